//! Seeded height-bound experiment: random γ with γ·𝔖 ∩ 𝔖 ≠ ∅, their
//! heights against N·Dⁿ, and the fitted growth exponent per (n, D).
//!
//! cargo run --release --example height_bound_experiment [samples]

use siegelkit::boundlab::{run_experiment, ExperimentConfig, NLaw};
use siegelkit::cli::{emit_records, Format};

fn main() -> siegelkit::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ExperimentConfig {
        dims: vec![2, 3],
        denominators: vec![1, 2],
        n_law: NLaw::LogUniform { min: 1, max: 1000 },
        samples,
        seed: 2024,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&config)?;
    let path = std::env::temp_dir().join("siegelkit_heights.csv");
    emit_records(&out.records, Format::Csv, Some(&path))?;
    println!("{} samples, {} failures, records in {}", out.summary.samples, out.summary.failures, path.display());
    println!("max H / max(N D^n, D) = {}", out.summary.max_r_h.as_deref().unwrap_or("-"));
    for fit in &out.summary.slopes {
        println!(
            "n = {} D = {}: slope {:.3} over {} points, envelope slope {:.3}",
            fit.n,
            fit.denominator,
            fit.slope.unwrap_or(f64::NAN),
            fit.points,
            fit.envelope_slope.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
