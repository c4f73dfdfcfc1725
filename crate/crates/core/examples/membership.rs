//! Membership in the standard Siegel set for points built from chosen
//! Iwasawa coordinates, one inside and one on each side of the boundary.

use siegelkit::decomp::{Precision, RealMatrix};
use siegelkit::siegel::{in_siegel, SiegelParams};

fn main() -> siegelkit::Result<()> {
    let prec = Precision::DEFAULT;
    let params = SiegelParams::fundamental();
    let rot = RealMatrix::from_f64_rows(&[[0.6, -0.8], [0.8, 0.6]], prec);

    // (x, α₁/α₂): the set asks |x| ≤ 1/2 and α₁/α₂ ≥ √3/2
    let cases = [(0.3, 2.0), (0.5, 0.866), (0.51, 1.0), (0.1, 0.8)];
    for (x, ratio) in cases {
        let nu = RealMatrix::from_f64_rows(&[[1.0, x], [0.0, 1.0]], prec);
        let a = RealMatrix::from_f64_rows(&[[ratio, 0.0], [0.0, 1.0]], prec);
        let g = nu.mul(&a).mul(&rot);
        let (inside, _) = in_siegel(&g, &params, 1e-12)?;
        println!("x = {x:<5} alpha1/alpha2 = {ratio:<6} in S({params}): {inside}");
    }
    Ok(())
}
