//! Height-bound laboratory: generates rational matrices `γ` with an explicit
//! witness `γ·μ·α = ν·β·κ` of `γ·𝔖 ∩ 𝔖 ≠ ∅`, evaluates the chain of ratio
//! inequalities leading to the height bound, and runs seeded experiments.

mod experiment;
mod lemmas;
mod sampling;

use rug::Float;

use crate::decomp::{iwasawa, Precision, RealMatrix};
use crate::error::Result;
use crate::exactmat::{Integer, Rational, RationalMatrix};
use crate::siegel::{reduce_to_siegel, SiegelParams};

pub use experiment::{
    run_experiment, splitmix64, ExperimentConfig, ExperimentFailure, ExperimentOutput,
    ExperimentRecord, ExperimentSummary, NLaw, RecordMatrices, SlopeFit, CSV_HEADER,
};
pub use lemmas::{verify_lemmas, LemmaReport};
pub use sampling::{
    sample_rational_map, sample_rational_map_with, sample_siegel_point, sample_siegel_point_with,
    MapOptions, SiegelPoint, DEFAULT_LOG_RATIO_BAND,
};

pub(crate) use experiment::least_squares_slope;
use sampling::{rng_for, stream};

/// `γ ∈ GL_n(ℚ)` together with `μ, ν ∈ Ω_u`, `α, β ∈ A_t` and orthogonal
/// `κ` such that `γ·μ·diag(α) = ν·diag(β)·κ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessedElement {
    pub gamma: RationalMatrix,
    /// `N = |det γ|`, recomputed exactly from `γ`.
    pub det_abs: Rational,
    /// `D`, the largest lowest-terms denominator of `γ`.
    pub denominator: Integer,
    pub mu: RealMatrix,
    pub alpha: Vec<Float>,
    pub nu: RealMatrix,
    pub beta: Vec<Float>,
    pub kappa: RealMatrix,
    /// Rotation of the sampled point `x = μ·diag(α)·κ₂`.
    pub kappa2: RealMatrix,
    pub params: SiegelParams,
    pub seed: u64,
    /// Adjacent swaps used when reducing `m·x`.
    pub swaps: usize,
}

impl WitnessedElement {
    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn precision(&self) -> Precision {
        self.mu.precision()
    }

    /// `x = μ·diag(α)·κ₂`.
    pub fn x(&self) -> RealMatrix {
        self.mu.scale_cols(&self.alpha).mul(&self.kappa2)
    }

    /// `γ·μ·diag(α)`, the left side of the witness identity.
    pub fn lhs(&self) -> RealMatrix {
        RealMatrix::from_rational(&self.gamma, self.precision())
            .mul(&self.mu)
            .scale_cols(&self.alpha)
    }

    /// `ν·diag(β)·κ`, the right side of the witness identity.
    pub fn rhs(&self) -> RealMatrix {
        self.nu.scale_cols(&self.beta).mul(&self.kappa)
    }
}

/// Options for [`generate_witnessed_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerateOptions {
    pub precision: Precision,
    pub map: MapOptions,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            precision: Precision::DEFAULT,
            map: MapOptions::default(),
        }
    }
}

/// [`generate_witnessed_with`] at default precision and sampler settings.
pub fn generate_witnessed(
    n: usize,
    big_n: u64,
    d: u64,
    params: &SiegelParams,
    seed: u64,
) -> Result<WitnessedElement> {
    generate_witnessed_with(n, big_n, d, params, seed, &GenerateOptions::default())
}

/// Samples `x ∈ 𝔖` and a rational `m` with `|det m| = N`, denominator `D`,
/// reduces `m·x` into `𝔖` by a unimodular `δ`, and returns `γ = δ·m` with the
/// decomposition `γ·μ·diag(α) = ν·diag(β)·κ`.
pub fn generate_witnessed_with(
    n: usize,
    big_n: u64,
    d: u64,
    params: &SiegelParams,
    seed: u64,
    opts: &GenerateOptions,
) -> Result<WitnessedElement> {
    let prec = opts.precision;
    let point = sample_siegel_point(n, params, prec, seed)?;
    let m = sample_rational_map_with(n, big_n, d, &opts.map, &mut rng_for(seed, stream::RATIONAL_MAP))?;
    let y = RealMatrix::from_rational(&m, prec).mul(&point.matrix());
    let red = reduce_to_siegel(&y, params)?;
    let gamma = red.delta.mul_rational(&m)?;

    let lhs = RealMatrix::from_rational(&gamma, prec)
        .mul(&point.mu)
        .scale_cols(&point.alpha);
    let dec = iwasawa(&lhs)?;
    Ok(WitnessedElement {
        det_abs: gamma.det().abs(),
        denominator: gamma.denominator(),
        gamma,
        mu: point.mu,
        alpha: point.alpha,
        nu: dec.nu,
        beta: dec.alpha,
        kappa: dec.kappa,
        kappa2: point.kappa2,
        params: params.clone(),
        seed,
        swaps: red.swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siegel::in_siegel;

    #[test]
    fn trivial_case_is_unimodular() {
        let f = SiegelParams::fundamental();
        for seed in 0..20 {
            let w = generate_witnessed(2, 1, 1, &f, seed).unwrap();
            assert_eq!(w.det_abs, 1);
            assert_eq!(w.denominator, 1);
            assert!(w.gamma.is_integral());
        }
    }

    #[test]
    fn witness_invariants() {
        let f = SiegelParams::fundamental();
        let tol = Precision::DEFAULT.eps_rec();
        for seed in 0..40 {
            let n = 2 + (seed as usize % 3);
            let big_n = 1 + seed * 37 % 500;
            let d = 1 + seed % 3;
            let w = generate_witnessed(n, big_n, d, &f, seed).unwrap();
            assert_eq!(w.det_abs, big_n);
            assert_eq!(w.denominator, d);
            let scale = w.lhs().max_abs().max(&Precision::DEFAULT.one());
            assert!(w.lhs().max_abs_diff(&w.rhs()) / scale <= tol);
            assert!(in_siegel(&w.x(), &f, 1e-20).unwrap().0);
            assert!(in_siegel(&w.lhs(), &f, 1e-12).unwrap().0);
            assert!(w.kappa.orthogonality_residual() <= tol);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let f = SiegelParams::fundamental();
        let a = generate_witnessed(3, 120, 2, &f, 9).unwrap();
        let b = generate_witnessed(3, 120, 2, &f, 9).unwrap();
        assert_eq!(a, b);
    }
}
