//! Iwasawa decomposition of a few matrices and the residuals of each.
//!
//! cargo run --example decompose

use siegelkit::decomp::{format_float, iwasawa, Precision, RealMatrix};
use siegelkit::exactmat::RationalMatrix;

fn main() -> siegelkit::Result<()> {
    let prec = Precision::DEFAULT;
    let inputs = ["2 1; 0 1", "0 1; 1 0", "1 2 3; 0 1 4; 5 6 0", "1/2 1/3; -1/5 7"];
    for text in inputs {
        let g = RealMatrix::from_rational(&RationalMatrix::parse(text)?, prec);
        let dec = iwasawa(&g)?;
        println!("g = {text}");
        println!("  nu    = {:.8}", dec.nu);
        let alpha: Vec<String> = dec.alpha.iter().map(|a| format_float(a, 8)).collect();
        println!("  alpha = ({})", alpha.join(", "));
        println!("  kappa = {:.8}", dec.kappa);
        println!(
            "  |g - nu.alpha.kappa| = {}   |kappa.kappa^T - I| = {}",
            format_float(&dec.reconstruction_residual(&g), 3),
            format_float(&dec.orthogonality_residual(), 3)
        );
    }
    Ok(())
}
