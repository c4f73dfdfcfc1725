use rug::Float;

use super::WitnessedElement;
use crate::decomp::RealMatrix;
use crate::exactmat::{height, Rational};
use crate::segments::{leading_entries, off_block_max, segment_partition};

/// Ratios whose boundedness makes up the height bound, plus residuals of
/// the identities the witness must satisfy.
///
/// With `N = |det γ|` and `D` the denominator of `γ`:
/// * `r32` max over leading entries `(i,j)` of `α_j/(D·β_i)`
/// * `r33` max over `k` of `α_k/(D·β_k)`
/// * `r34` max over nonempty `J` of `∏_J β / (N·D^{n-#J}·∏_J α)`
/// * `r35` max over `i, j` in one segment of `β_j/(N·D^{n-1}·α_i)`
/// * `r36` max `|κ_pq|` over `p, q` in different segments
/// * `r37` max `|γ_ij| / (N·D^{n-1})`
/// * `r_h` `H(γ) / max(N·Dⁿ, D)`
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    pub r32: Float,
    pub r33: Float,
    pub r34: Float,
    pub r35: Float,
    pub r36: Float,
    pub r37: Float,
    pub r_h: Float,
    /// `r34` at `J = {1..n}`; equals 1 exactly in theory.
    pub r34_full: Float,
    /// `max|γμα − νβκ| / max(1, max|γμα|)`.
    pub eq2_residual: Float,
    /// Max over rows `i` of `|Σ_p (γμ)_ip² α_p² − Σ_p ν_ip² β_p²|` relative to the right side.
    pub row_length_residual: Float,
    /// `|∏β − N·∏α| / (N·∏α)`.
    pub det_residual: Float,
}

impl LemmaReport {
    pub fn ratios(&self) -> [&Float; 7] {
        [&self.r32, &self.r33, &self.r34, &self.r35, &self.r36, &self.r37, &self.r_h]
    }

    pub fn all_finite(&self) -> bool {
        self.ratios().iter().all(|r| r.is_finite() && **r >= 0)
    }
}

fn max_into(acc: &mut Float, v: Float) {
    if v > *acc {
        *acc = v;
    }
}

/// Evaluates every ratio of [`LemmaReport`] on a witnessed element.
pub fn verify_lemmas(w: &WitnessedElement) -> LemmaReport {
    let n = w.n();
    let prec = w.precision();
    let bits = prec.bits();
    let big_n = prec.float(&w.det_abs);
    let d = prec.float(&w.denominator);
    let d_pow = |k: usize| Float::with_val(bits, rug::ops::Pow::pow(&d, k as u32));
    let leading = leading_entries(&w.gamma).expect("witnessed γ is invertible");
    let part = segment_partition(&w.gamma).expect("witnessed γ is invertible");
    let (alpha, beta) = (&w.alpha, &w.beta);

    let mut r32 = prec.zero();
    for e in &leading {
        let v = Float::with_val(bits, &alpha[e.col - 1] / &beta[e.row - 1]) / &d;
        max_into(&mut r32, v);
    }

    let mut r33 = prec.zero();
    for k in 0..n {
        max_into(&mut r33, Float::with_val(bits, &alpha[k] / &beta[k]) / &d);
    }

    let ratio: Vec<Float> = (0..n).map(|k| Float::with_val(bits, &beta[k] / &alpha[k])).collect();
    let mut r34 = prec.zero();
    for mask in 1u32..(1u32 << n) {
        let mut prod = Float::with_val(bits, 1 / &big_n);
        for (k, r) in ratio.iter().enumerate() {
            if mask & (1 << k) != 0 {
                prod *= r;
            }
        }
        let size = mask.count_ones() as usize;
        max_into(&mut r34, prod / d_pow(n - size));
    }
    let r34_full = ratio.iter().fold(Float::with_val(bits, 1 / &big_n), |acc, r| acc * r);

    let scale35 = Float::with_val(bits, &big_n * d_pow(n - 1));
    let mut r35 = prec.zero();
    for i in 0..n {
        for j in 0..n {
            if part.same_segment(i + 1, j + 1) {
                let v = Float::with_val(bits, &beta[j] / &alpha[i]) / &scale35;
                max_into(&mut r35, v);
            }
        }
    }

    let r36 = off_block_max(&w.kappa, &part);

    let max_entry = w
        .gamma
        .entries()
        .iter()
        .map(|e| Rational::from(e.abs_ref()))
        .max()
        .unwrap_or_default();
    let r37 = prec.float(&max_entry) / &scale35;

    let d_n = &w.det_abs * Rational::from(rug::ops::Pow::pow(w.denominator.clone(), n as u32));
    let denom_h = d_n.max(Rational::from(w.denominator.clone()));
    let r_h = prec.float(&Rational::from((height(&w.gamma), 1u32)) / denom_h);

    let lhs = w.lhs();
    let rhs = w.rhs();
    let eq2_residual = lhs.max_abs_diff(&rhs) / lhs.max_abs().max(&prec.one());

    let gamma_mu = RealMatrix::from_rational(&w.gamma, prec).mul(&w.mu);
    let mut row_length_residual = prec.zero();
    for i in 0..n {
        let mut left = prec.zero();
        let mut right = prec.zero();
        for p in 0..n {
            left += Float::with_val(bits, &gamma_mu[(i, p)] * &alpha[p]).square();
            right += Float::with_val(bits, &w.nu[(i, p)] * &beta[p]).square();
        }
        let rel = Float::with_val(bits, &left - &right).abs() / &right;
        max_into(&mut row_length_residual, rel);
    }

    let prod_alpha = alpha.iter().fold(prec.one(), |acc, a| acc * a);
    let prod_beta = beta.iter().fold(prec.one(), |acc, b| acc * b);
    let target = Float::with_val(bits, &big_n * &prod_alpha);
    let det_residual = Float::with_val(bits, &prod_beta - &target).abs() / &target;

    LemmaReport {
        r32,
        r33,
        r34,
        r35,
        r36,
        r37,
        r_h,
        r34_full,
        eq2_residual,
        row_length_residual,
        det_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundlab::{generate_witnessed, WitnessedElement};
    use crate::decomp::Precision;
    use crate::exactmat::{Integer, RationalMatrix};
    use crate::siegel::SiegelParams;

    #[test]
    fn identity_witness() {
        let p = Precision::DEFAULT;
        let id = RealMatrix::identity(3, p);
        let w = WitnessedElement {
            gamma: RationalMatrix::identity(3),
            det_abs: Rational::from(1),
            denominator: Integer::from(1),
            mu: id.clone(),
            alpha: vec![p.one(); 3],
            nu: id.clone(),
            beta: vec![p.one(); 3],
            kappa: id.clone(),
            kappa2: id,
            params: SiegelParams::fundamental(),
            seed: 0,
            swaps: 0,
        };
        let r = verify_lemmas(&w);
        assert_eq!(r.r32, 1);
        assert_eq!(r.r33, 1);
        assert_eq!(r.r34, 1);
        assert_eq!(r.r35, 1);
        assert_eq!(r.r36, 0);
        assert_eq!(r.r37, 1);
        assert_eq!(r.r_h, 1);
        assert_eq!(r.eq2_residual, 0);
        assert!(r.all_finite());
    }

    #[test]
    fn random_witnesses_meet_identities() {
        let f = SiegelParams::fundamental();
        for seed in 0..60 {
            let n = 2 + (seed as usize % 2);
            let w = generate_witnessed(n, 1 + seed * 17 % 1000, 1 + seed % 3, &f, seed).unwrap();
            let r = verify_lemmas(&w);
            assert!(r.all_finite());
            assert!(r.eq2_residual < 1e-20);
            assert!(r.row_length_residual < 1e-20);
            assert!(r.det_residual < 1e-20);
            assert!(Float::with_val(128, &r.r34_full - 1u32).abs() < 1e-20);
            assert!(r.r36 < 1e-8);
            assert!(r.r34 >= r.r34_full);
        }
    }
}
