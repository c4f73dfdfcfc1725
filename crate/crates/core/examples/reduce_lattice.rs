//! Reduces random lattice bases into the fundamental Siegel set and shows
//! the unimodular change of basis together with the swap potential.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegelkit::decomp::{format_float, Precision, RealMatrix};
use siegelkit::siegel::{reduce_to_siegel, SiegelParams};

fn main() -> siegelkit::Result<()> {
    let prec = Precision::DEFAULT;
    let params = SiegelParams::fundamental();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=4 {
        let g = RealMatrix::from_fn(n, prec, |_, _| prec.float(rng.random_range(-10.0..10.0)));
        let red = reduce_to_siegel(&g, &params)?;
        println!("n = {n}: {} swaps, det delta = {}", red.swaps, red.delta.det());
        println!("delta =\n{}", red.delta);
        let trace: Vec<String> = red.potential_trace.iter().map(|p| format_float(p, 5)).collect();
        println!("log potential: {}", trace.join(" > "));
        println!("alpha ratios after reduction:");
        for w in red.decomposition.alpha.windows(2) {
            println!("  {}", format_float(&(w[0].clone() / &w[1]), 6));
        }
        println!();
    }
    Ok(())
}
