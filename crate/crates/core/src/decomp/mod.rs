//! Multiprecision real linear algebra: UDUᵀ factorization and the Iwasawa
//! decomposition `g = ν·diag(α)·κ` of an invertible real matrix.
//!
//! The Iwasawa factors come from `g·gᵀ = ν·diag(α²)·νᵀ`, so `ν` is unit
//! upper triangular by construction; `κ = diag(α)⁻¹·ν⁻¹·g` is formed last.

mod real;

use rug::Float;

pub use real::{format_float, parse_float, Precision, RealMatrix};

use crate::error::{Error, Result};
use crate::exactmat::RationalMatrix;

/// `g = ν·diag(α)·κ` with `ν` unit upper triangular, `α > 0`, `κ` orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct IwasawaDecomposition {
    pub nu: RealMatrix,
    pub alpha: Vec<Float>,
    pub kappa: RealMatrix,
}

impl IwasawaDecomposition {
    pub fn n(&self) -> usize {
        self.nu.n()
    }

    pub fn precision(&self) -> Precision {
        self.nu.precision()
    }

    /// `ν·diag(α)·κ`.
    pub fn reconstruct(&self) -> RealMatrix {
        self.nu.scale_cols(&self.alpha).mul(&self.kappa)
    }

    pub fn reconstruction_residual(&self, g: &RealMatrix) -> Float {
        self.reconstruct().max_abs_diff(g)
    }

    pub fn orthogonality_residual(&self) -> Float {
        self.kappa.orthogonality_residual()
    }

    pub fn alpha_product(&self) -> Float {
        let prec = self.precision();
        self.alpha.iter().fold(prec.one(), |acc, a| acc * a)
    }
}

/// Factors a symmetric positive definite `a` as `ν·diag(d)·νᵀ` with `ν` unit
/// upper triangular and `d > 0`.
///
/// Elimination runs from the last index upwards, so `d_n = a_nn` and the
/// reverse leading minors must be positive.
pub fn udu_factor(a: &RealMatrix) -> Result<(RealMatrix, Vec<Float>)> {
    let n = a.n();
    let prec = a.precision();
    let bits = prec.bits();
    let scale = a.max_abs().max(&prec.one());
    let sym_tol = Float::with_val(bits, prec.eps_rec() * &scale);
    for i in 0..n {
        for j in 0..i {
            let asym = Float::with_val(bits, &a[(i, j)] - &a[(j, i)]).abs();
            if asym > sym_tol {
                return Err(Error::DomainError(format!(
                    "udu_factor needs a symmetric matrix; entries ({},{}) and ({},{}) differ by {}",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1,
                    format_float(&asym, 6)
                )));
            }
        }
    }

    let pivot_tol = prec.eps_pivot();
    let mut work = a.clone();
    let mut nu = RealMatrix::identity(n, prec);
    let mut d = vec![prec.zero(); n];
    for k in (0..n).rev() {
        let pivot = work[(k, k)].clone();
        if pivot <= pivot_tol {
            return Err(Error::NotPositiveDefinite {
                index: k + 1,
                pivot: format_float(&pivot, 6),
                threshold: format_float(&pivot_tol, 6),
            });
        }
        for i in 0..k {
            nu[(i, k)] = Float::with_val(bits, &work[(i, k)] / &pivot);
        }
        for i in 0..k {
            for j in 0..=i {
                let upd = Float::with_val(bits, &nu[(i, k)] * &work[(j, k)]);
                work[(i, j)] -= &upd;
                if i != j {
                    work[(j, i)] = work[(i, j)].clone();
                }
            }
        }
        d[k] = pivot;
    }
    Ok((nu, d))
}

/// Iwasawa decomposition `g = ν·diag(α)·κ`.
///
/// Rows are orthonormalized from the bottom up (`g_n = α_n·κ_n`) by modified
/// Gram-Schmidt with one reorthogonalization pass, so `κ` stays orthogonal
/// to working precision even when `g` is badly conditioned.
pub fn iwasawa(g: &RealMatrix) -> Result<IwasawaDecomposition> {
    let n = g.n();
    let prec = g.precision();
    let bits = prec.bits();
    let pivot_tol = prec.eps_pivot();
    let mut nu = RealMatrix::identity(n, prec);
    let mut alpha = vec![prec.zero(); n];
    let mut kappa = RealMatrix::zeros(n, prec);
    let mut coeff = vec![prec.zero(); n];
    for i in (0..n).rev() {
        let mut v: Vec<Float> = (0..n).map(|c| g[(i, c)].clone()).collect();
        for c in coeff.iter_mut() {
            *c = prec.zero();
        }
        for _pass in 0..2 {
            for j in i + 1..n {
                let dot = dot_row(&v, &kappa, j, bits);
                for (c, x) in v.iter_mut().enumerate() {
                    *x -= Float::with_val(bits, &dot * &kappa[(j, c)]);
                }
                coeff[j] += dot;
            }
        }
        let norm_sq = v.iter().fold(prec.zero(), |acc, x| acc + Float::with_val(bits, x.square_ref()));
        if norm_sq <= pivot_tol {
            return Err(Error::NearSingular(format!(
                "squared Iwasawa diagonal entry {} is {}",
                i + 1,
                format_float(&norm_sq, 6)
            )));
        }
        let a = norm_sq.sqrt();
        for (c, x) in v.into_iter().enumerate() {
            kappa[(i, c)] = x / &a;
        }
        for j in i + 1..n {
            nu[(i, j)] = Float::with_val(bits, &coeff[j] / &alpha[j]);
        }
        alpha[i] = a;
    }
    Ok(IwasawaDecomposition { nu, alpha, kappa })
}

fn dot_row(v: &[Float], m: &RealMatrix, row: usize, bits: u32) -> Float {
    v.iter()
        .enumerate()
        .fold(Float::new(bits), |acc, (c, x)| acc + Float::with_val(bits, x * &m[(row, c)]))
}

/// Correctly rounded lift of an exact matrix to the working precision.
pub fn rational_lift(m: &RationalMatrix, prec: Precision) -> RealMatrix {
    RealMatrix::from_rational(m, prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: Precision = Precision::DEFAULT;

    fn m(rows: &[[f64; 2]]) -> RealMatrix {
        RealMatrix::from_f64_rows(rows, P)
    }

    #[test]
    fn udu_identity() {
        let (nu, d) = udu_factor(&RealMatrix::identity(3, P)).unwrap();
        assert_eq!(nu, RealMatrix::identity(3, P));
        assert!(d.iter().all(|x| *x == 1));
    }

    #[test]
    fn udu_two_by_two() {
        // a + x²b = 5, xb = 1, b = 1  =>  x = 1, a = 4
        let (nu, d) = udu_factor(&m(&[[5.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(nu, m(&[[1.0, 1.0], [0.0, 1.0]]));
        assert_eq!(d, vec![P.float(4), P.float(1)]);
        let back = nu.scale_cols(&d).mul(&nu.transpose());
        assert_eq!(back, m(&[[5.0, 1.0], [1.0, 1.0]]));
    }

    #[test]
    fn udu_diagonal() {
        let (nu, d) = udu_factor(&m(&[[9.0, 0.0], [0.0, 4.0]])).unwrap();
        assert_eq!(nu, RealMatrix::identity(2, P));
        assert_eq!(d, vec![P.float(9), P.float(4)]);
    }

    #[test]
    fn udu_rejects_indefinite_and_asymmetric() {
        assert!(matches!(
            udu_factor(&m(&[[1.0, 2.0], [2.0, 1.0]])),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        assert!(matches!(
            udu_factor(&m(&[[1.0, 2.0], [0.0, 1.0]])),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn iwasawa_identity() {
        let dec = iwasawa(&RealMatrix::identity(4, P)).unwrap();
        assert_eq!(dec.nu, RealMatrix::identity(4, P));
        assert!(dec.alpha.iter().all(|a| *a == 1));
        assert_eq!(dec.kappa, RealMatrix::identity(4, P));
    }

    #[test]
    fn iwasawa_upper_triangular() {
        let dec = iwasawa(&m(&[[2.0, 1.0], [0.0, 1.0]])).unwrap();
        let tol = P.eps_rec();
        assert!(dec.nu.max_abs_diff(&m(&[[1.0, 1.0], [0.0, 1.0]])) <= tol);
        assert!(Float::with_val(128, &dec.alpha[0] - 2).abs() <= tol);
        assert!(Float::with_val(128, &dec.alpha[1] - 1).abs() <= tol);
        assert!(dec.kappa.max_abs_diff(&RealMatrix::identity(2, P)) <= tol);
    }

    #[test]
    fn iwasawa_of_rotation() {
        let theta = P.float(0.7);
        let (s, c) = theta.sin_cos(P.zero());
        let k0 = RealMatrix::from_fn(2, P, |i, j| match (i, j) {
            (0, 0) | (1, 1) => c.clone(),
            (0, 1) => Float::with_val(128, -&s),
            _ => s.clone(),
        });
        let dec = iwasawa(&k0).unwrap();
        let tol = P.eps_rec();
        assert!(dec.nu.max_abs_diff(&RealMatrix::identity(2, P)) <= tol);
        assert!(dec.alpha.iter().all(|a| Float::with_val(128, a - 1u32).abs() <= tol));
        assert!(dec.kappa.max_abs_diff(&k0) <= tol);
    }

    #[test]
    fn iwasawa_rejects_singular() {
        assert!(matches!(
            iwasawa(&m(&[[1.0, 2.0], [2.0, 4.0]])),
            Err(Error::NearSingular(_))
        ));
    }

    #[test]
    fn rational_lift_rounding() {
        let third = RationalMatrix::parse("1/3").unwrap();
        let lifted = rational_lift(&third, P);
        assert_eq!(lifted[(0, 0)], P.float(&rug::Rational::from((1, 3))));
        let half = rational_lift(&RationalMatrix::parse("1/2").unwrap(), P);
        assert_eq!(half[(0, 0)], 0.5);
        assert_eq!(
            rational_lift(&RationalMatrix::identity(3), P),
            RealMatrix::identity(3, P)
        );
    }

    #[test]
    fn random_round_trip_and_det_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = P.eps_rec();
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let g = RealMatrix::from_fn(n, P, |_, _| P.float(rng.random_range(-10.0..10.0)));
            let det = g.det().abs();
            if det < 1e-3 {
                continue;
            }
            let dec = iwasawa(&g).unwrap();
            assert!(dec.reconstruction_residual(&g) <= tol);
            assert!(dec.orthogonality_residual() <= tol);
            assert!(dec.nu.is_unit_upper_triangular(&P.zero()));
            assert!(dec.alpha.iter().all(|a| *a > 0));
            // |det g| = ∏α · |det κ|, |det κ| = 1
            let rel = Float::with_val(128, &det - dec.alpha_product()).abs() / &det;
            assert!(rel <= tol);
            assert!(Float::with_val(128, dec.kappa.det().abs() - 1u32).abs() <= tol);
            // deterministic: a second call is identical
            assert_eq!(iwasawa(&g).unwrap(), dec);
        }
    }
}
