//! For the base point i, reduces every isogeny matrix of determinant up to
//! N_max back into the fundamental domain and reports how H(γ) grows with N.

use siegelkit::decomp::Precision;
use siegelkit::gl2::{hp_experiment, isogeny_matrices, divisor_sum, UpperHalfPoint};

fn main() -> siegelkit::Result<()> {
    let prec = Precision::DEFAULT;
    for n in [1, 2, 6, 12] {
        assert_eq!(isogeny_matrices(n).len() as u64, divisor_sum(n));
    }
    let out = hp_experiment(&UpperHalfPoint::i(prec), 200, prec)?;
    println!("matrices: {}", out.summary.matrices);
    println!("slope of log max H against log N: {:.4}", out.summary.slope.unwrap_or(f64::NAN));
    println!("max H/N: {}", out.summary.max_ratio);
    println!("outside the fundamental domain by at most {}", out.summary.max_domain_violation);
    for r in out.records.iter().filter(|r| r.det == 6) {
        println!("  [[{}, {}], [0, {}]] -> H = {}", r.a, r.b, r.d, r.height);
    }
    Ok(())
}
