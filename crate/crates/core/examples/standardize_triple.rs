//! Moves a Siegel set for a non-standard flag and form into a standard one
//! and checks the containment on a grid, with a corrupted σ as control.

use siegelkit::decomp::{format_float, Precision};
use siegelkit::gensiegel::{random_triple, standardize, verify_containment, ContainmentGrid, SiegelTripleGLn};

fn main() -> siegelkit::Result<()> {
    let prec = Precision::DEFAULT;
    let text = r#"{
        "flag": [["0", "1", "0"], ["1", "1", "0"], ["0", "0", "2"]],
        "form": [["4", "1", "0"], ["1", "2", "0"], ["0", "0", "1"]],
        "t": "sqrt3over2"
    }"#;
    let mut triples = vec![SiegelTripleGLn::from_json(text, prec)?];
    triples.extend((0..3).map(|seed| random_triple(3, seed, prec)).collect::<siegelkit::Result<Vec<_>>>()?);
    let grid = ContainmentGrid::default();
    for triple in &triples {
        let r = standardize(triple, prec)?;
        let ok = verify_containment(triple, &r, &grid)?;
        let bad = verify_containment(triple, &r.with_beta_scaled(1.1), &grid)?;
        println!(
            "u' = {}  s = {}  |sigma sigma^T Q' - I| = {}  grid misses {}/{}  control misses {}",
            format_float(&r.u_prime, 6),
            format_float(&r.s, 6),
            format_float(&r.sigma_residual(), 2),
            ok.failures.len(),
            ok.points,
            bad.failures.len()
        );
    }
    println!("{}", standardize(&triples[0], prec)?.to_json()?);
    Ok(())
}
