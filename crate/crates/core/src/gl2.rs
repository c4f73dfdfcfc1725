//! The upper half-plane: Möbius action, reduction into the standard
//! fundamental domain `ℱ` of `SL₂(ℤ)`, and heights of the matrices relating
//! a fixed point to its degree-`N` isogenous points.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::boundlab::splitmix64;
use crate::decomp::{format_float, parse_float, Precision, RealMatrix};
use crate::error::{Error, Result};
use crate::exactmat::{Integer, IntegerMatrix};

/// `z = re + i·im` with `im > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperHalfPoint {
    pub re: Float,
    pub im: Float,
}

impl UpperHalfPoint {
    pub fn new(re: Float, im: Float) -> Result<Self> {
        if im <= 0 || !im.is_finite() || !re.is_finite() {
            return Err(Error::DomainError(format!(
                "point must lie in the upper half-plane, got im = {}",
                format_float(&im, 6)
            )));
        }
        Ok(Self { re, im })
    }

    /// The point `i`.
    pub fn i(prec: Precision) -> Self {
        Self {
            re: prec.zero(),
            im: prec.one(),
        }
    }

    /// Parses `"re,im"`, e.g. `"0,1"` for `i`.
    pub fn parse(text: &str, prec: Precision) -> Result<Self> {
        let (re, im) = text
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected \"re,im\", got {text:?}")))?;
        Self::new(parse_float(re, prec)?, parse_float(im, prec)?)
    }

    pub fn precision(&self) -> Precision {
        Precision::new(self.re.prec()).unwrap_or_default()
    }

    /// `|z|²`.
    pub fn norm_sq(&self) -> Float {
        Float::with_val(self.re.prec(), self.re.square_ref()) + Float::with_val(self.im.prec(), self.im.square_ref())
    }

    /// `|re| ≤ 1/2 + tol` and `|z|² ≥ 1 − tol`.
    pub fn in_fundamental_domain(&self, tol: f64) -> bool {
        self.re.clone().abs() <= 0.5 + tol && self.norm_sq() >= 1.0 - tol
    }
}

impl fmt::Display for UpperHalfPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(12);
        write!(f, "{},{}", format_float(&self.re, digits), format_float(&self.im, digits))
    }
}

/// A point of `ℱ` together with `δ ∈ SL₂(ℤ)` carrying the input onto it.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalDomainCert {
    pub point: UpperHalfPoint,
    pub delta: IntegerMatrix,
}

/// `(a·z + b)/(c·z + d)` for a real `2×2` matrix with positive determinant.
pub fn mobius(g: &RealMatrix, z: &UpperHalfPoint) -> Result<UpperHalfPoint> {
    if g.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: g.n(),
        });
    }
    let det = g.det();
    if det <= 0 {
        return Err(Error::DomainError(format!(
            "Möbius action needs det > 0, got {}",
            format_float(&det, 6)
        )));
    }
    let bits = z.re.prec().max(g.precision().bits());
    let (a, b, c, d) = (&g[(0, 0)], &g[(0, 1)], &g[(1, 0)], &g[(1, 1)]);
    // (a z + b)(c z̄ + d) / |c z + d|²
    let num_re = Float::with_val(bits, a * &z.re) + b;
    let num_im = Float::with_val(bits, a * &z.im);
    let den_re = Float::with_val(bits, c * &z.re) + d;
    let den_im = Float::with_val(bits, c * &z.im);
    let den_sq = Float::with_val(bits, den_re.square_ref()) + Float::with_val(bits, den_im.square_ref());
    let re = (Float::with_val(bits, &num_re * &den_re) + Float::with_val(bits, &num_im * &den_im)) / &den_sq;
    let im = Float::with_val(bits, &det * &z.im) / &den_sq;
    UpperHalfPoint::new(re, im)
}

/// [`mobius`] for an integer matrix.
pub fn mobius_integer(g: &IntegerMatrix, z: &UpperHalfPoint) -> Result<UpperHalfPoint> {
    mobius(&RealMatrix::from_integer(g, z.precision()), z)
}

const MAX_REDUCTION_STEPS: usize = 100_000;

/// Gauss reduction: translate `re` into `[-1/2, 1/2]`, invert while `|z| < 1`.
///
/// `δ` is tracked exactly and the point is recomputed from the input after
/// every step, so rounding does not accumulate.
pub fn reduce_point(z: &UpperHalfPoint) -> Result<FundamentalDomainCert> {
    let prec = z.precision();
    let below_one = Float::with_val(prec.bits(), 1 - prec.eps_pivot());
    let mut delta = IntegerMatrix::identity(2);
    let mut w = z.clone();
    for _ in 0..MAX_REDUCTION_STEPS {
        let k = Float::with_val(prec.bits(), w.re.round_ref())
            .to_integer()
            .expect("finite real part");
        if k != 0 {
            let t = IntegerMatrix::new(2, vec![Integer::from(1), Integer::from(-&k), Integer::new(), Integer::from(1)])?;
            delta = t.mul(&delta)?;
            w = mobius_integer(&delta, z)?;
        }
        if w.norm_sq() >= below_one {
            return Ok(FundamentalDomainCert { point: w, delta });
        }
        let s = IntegerMatrix::from_i64_rows(&[[0, -1], [1, 0]]);
        delta = s.mul(&delta)?;
        w = mobius_integer(&delta, z)?;
    }
    Err(Error::PrecisionExhausted(format!(
        "point {z} not reduced after {MAX_REDUCTION_STEPS} steps"
    )))
}

/// All `[[a, b], [0, d]]` with `a·d = N` and `0 ≤ b < d`, ordered by `a`
/// then `b`. There are `σ₁(N)` of them.
pub fn isogeny_matrices(big_n: u64) -> Vec<IntegerMatrix> {
    let mut out = Vec::new();
    for a in 1..=big_n {
        if !big_n.is_multiple_of(a) {
            continue;
        }
        let d = big_n / a;
        for b in 0..d {
            out.push(
                IntegerMatrix::new(2, vec![Integer::from(a), Integer::from(b), Integer::new(), Integer::from(d)])
                    .expect("2x2"),
            );
        }
    }
    out
}

/// A base point of `ℱ`: `re` uniform in `[-1/2, 1/2]`, `im` uniform in
/// `[√(1 − re²), √(1 − re²) + 2]`.
pub fn sample_base_point(seed: u64, prec: Precision) -> UpperHalfPoint {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re: f64 = rng.random_range(-0.5..=0.5);
    let lift: f64 = rng.random_range(0.0..=2.0);
    let re = prec.float(re);
    let floor = (prec.one() - Float::with_val(prec.bits(), re.square_ref())).sqrt();
    let im = floor + lift;
    UpperHalfPoint { re, im }
}

/// One isogeny matrix `m = [[a,b],[0,d]]` and the height of `γ = δ·m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HpRecord {
    #[serde(rename = "N")]
    pub det: u64,
    pub idx: usize,
    pub a: u64,
    pub b: u64,
    pub d: u64,
    #[serde(rename = "H")]
    pub height: String,
    /// `H(γ)/N`.
    pub ratio: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpSummary {
    pub base_point: String,
    pub n_max: u64,
    pub matrices: usize,
    /// Least-squares slope of `log max_N H(γ)` against `log N`.
    pub slope: Option<f64>,
    pub max_ratio: String,
    /// Largest distance of `γ·x` outside `ℱ` (0 when inside).
    pub max_domain_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HpOutput {
    pub records: Vec<HpRecord>,
    pub summary: HpSummary,
}

/// For every `N ≤ n_max` and every isogeny matrix `m` of determinant `N`,
/// reduces `m·x` into `ℱ` and records the height of `γ = δ·m`.
pub fn hp_experiment(x: &UpperHalfPoint, n_max: u64, prec: Precision) -> Result<HpOutput> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let x = UpperHalfPoint {
        re: prec.float(&x.re),
        im: prec.float(&x.im),
    };
    let digits = prec.decimal_digits();
    let per_n: Vec<Result<(Vec<HpRecord>, Integer, f64)>> = (1..=n_max)
        .into_par_iter()
        .map(|big_n| {
            let mut records = Vec::new();
            let mut max_h = Integer::new();
            let mut violation = 0f64;
            for (idx, m) in isogeny_matrices(big_n).into_iter().enumerate() {
                let y = mobius_integer(&m, &x)?;
                let cert = reduce_point(&y)?;
                let gamma = cert.delta.mul(&m)?;
                let gx = mobius_integer(&gamma, &x)?;
                violation = violation.max(domain_violation(&gx));
                let h = gamma
                    .entries()
                    .iter()
                    .map(|e| Integer::from(e.abs_ref()))
                    .max()
                    .unwrap_or_default();
                let ratio = prec.float(&h) / big_n;
                if h > max_h {
                    max_h = h.clone();
                }
                records.push(HpRecord {
                    det: big_n,
                    idx,
                    a: m[(0, 0)].to_u64().unwrap_or_default(),
                    b: m[(0, 1)].to_u64().unwrap_or_default(),
                    d: m[(1, 1)].to_u64().unwrap_or_default(),
                    height: h.to_string(),
                    ratio: format_float(&ratio, digits),
                });
            }
            Ok((records, max_h, violation))
        })
        .collect();

    let mut records = Vec::new();
    let mut points = Vec::new();
    let mut max_ratio = prec.zero();
    let mut max_violation = 0f64;
    for (big_n, item) in (1..=n_max).zip(per_n) {
        let (recs, max_h, violation) = item?;
        let r = prec.float(&max_h) / big_n;
        if r > max_ratio {
            max_ratio = r;
        }
        max_violation = max_violation.max(violation);
        points.push(((big_n as f64).ln(), max_h.to_f64().ln()));
        records.extend(recs);
    }
    Ok(HpOutput {
        summary: HpSummary {
            base_point: format!("{x:.digits$}"),
            n_max,
            matrices: records.len(),
            slope: crate::boundlab::least_squares_slope(&points),
            max_ratio: format_float(&max_ratio, digits),
            max_domain_violation: max_violation,
        },
        records,
    })
}

fn domain_violation(z: &UpperHalfPoint) -> f64 {
    let over_re = (z.re.clone().abs() - 0.5f64).to_f64().max(0.0);
    let under_norm = (1.0 - z.norm_sq().to_f64()).max(0.0);
    over_re.max(under_norm)
}

/// Sum of the divisors of `n`.
pub fn divisor_sum(n: u64) -> u64 {
    (1..=n).filter(|k| n.is_multiple_of(*k)).sum()
}

/// Seed for the `k`-th additional sampled base point.
pub fn base_point_seed(seed: u64, k: u64) -> u64 {
    splitmix64(seed ^ splitmix64(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: Precision = Precision::DEFAULT;

    fn pt(re: f64, im: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(P.float(re), P.float(im)).unwrap()
    }

    fn close(a: &UpperHalfPoint, b: &UpperHalfPoint, tol: f64) -> bool {
        Float::with_val(128, &a.re - &b.re).abs() <= tol && Float::with_val(128, &a.im - &b.im).abs() <= tol
    }

    #[test]
    fn mobius_examples() {
        let i = UpperHalfPoint::i(P);
        let id = RealMatrix::identity(2, P);
        assert_eq!(mobius(&id, &i).unwrap(), i);
        let t = RealMatrix::from_f64_rows(&[[1.0, 1.0], [0.0, 1.0]], P);
        assert_eq!(mobius(&t, &i).unwrap(), pt(1.0, 1.0));
        let s = RealMatrix::from_f64_rows(&[[0.0, -1.0], [1.0, 0.0]], P);
        assert_eq!(mobius(&s, &pt(0.0, 0.5)).unwrap(), pt(0.0, 2.0));
        let neg = RealMatrix::from_f64_rows(&[[0.0, 1.0], [1.0, 0.0]], P);
        assert!(matches!(mobius(&neg, &i), Err(Error::DomainError(_))));
        assert!(UpperHalfPoint::new(P.zero(), P.float(-1)).is_err());
    }

    #[test]
    fn reduce_examples() {
        let c = reduce_point(&UpperHalfPoint::i(P)).unwrap();
        assert_eq!(c.delta, IntegerMatrix::identity(2));
        let c = reduce_point(&pt(5.0, 1.0)).unwrap();
        assert_eq!(c.delta, IntegerMatrix::from_i64_rows(&[[1, -5], [0, 1]]));
        assert!(close(&c.point, &UpperHalfPoint::i(P), 1e-30));
        let c = reduce_point(&pt(0.0, 0.5)).unwrap();
        assert_eq!(c.delta, IntegerMatrix::from_i64_rows(&[[0, -1], [1, 0]]));
        assert!(close(&c.point, &pt(0.0, 2.0), 1e-30));
    }

    #[test]
    fn reduce_deep_points() {
        for (re, im) in [(0.3, 1e-6), (-123.4, 0.01), (0.49999, 0.0001), (7.0, 1e-12)] {
            let c = reduce_point(&pt(re, im)).unwrap();
            assert!(c.point.in_fundamental_domain(1e-20));
            assert_eq!(c.delta.det(), 1);
        }
    }

    #[test]
    fn isogeny_examples() {
        assert_eq!(isogeny_matrices(1), vec![IntegerMatrix::identity(2)]);
        assert_eq!(
            isogeny_matrices(2),
            vec![
                IntegerMatrix::from_i64_rows(&[[1, 0], [0, 2]]),
                IntegerMatrix::from_i64_rows(&[[1, 1], [0, 2]]),
                IntegerMatrix::from_i64_rows(&[[2, 0], [0, 1]]),
            ]
        );
        assert_eq!(isogeny_matrices(6).len(), 12);
    }

    #[test]
    fn hp_small_cases() {
        let out = hp_experiment(&UpperHalfPoint::i(P), 2, P).unwrap();
        assert_eq!(out.records.len(), 4);
        assert_eq!(out.records[0].height, "1");
        let diag = out.records.iter().find(|r| r.det == 2 && r.a == 2).unwrap();
        assert_eq!(diag.height, "2");
        assert!(diag.ratio.starts_with("1.000"));
        assert_eq!(out.summary.max_domain_violation, 0.0);
    }

    #[test]
    fn base_points_in_domain() {
        for seed in 0..50 {
            let z = sample_base_point(seed, P);
            assert!(z.in_fundamental_domain(0.0));
            assert_eq!(z, sample_base_point(seed, P));
        }
    }

    #[test]
    fn parse_and_display() {
        let z = UpperHalfPoint::parse("0.25, 1.5", P).unwrap();
        assert_eq!(z, pt(0.25, 1.5));
        assert_eq!(format!("{z:.3}"), "2.50e-1,1.50e0");
        assert!(UpperHalfPoint::parse("1", P).is_err());
    }
}
