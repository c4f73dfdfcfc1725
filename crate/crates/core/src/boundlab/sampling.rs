use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rug::Float;

use crate::decomp::{iwasawa, Precision, RealMatrix};
use crate::error::{Error, Result};
use crate::exactmat::{Integer, IntegerMatrix, Rational, RationalMatrix, MAX_DIM};
use crate::siegel::SiegelParams;

/// Independent random streams derived from one seed.
pub(crate) mod stream {
    pub const SIEGEL_POINT: u64 = 1;
    pub const RATIONAL_MAP: u64 = 2;
    pub const EXPERIMENT_N: u64 = 3;
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Width of the band of log-ratios `log(α_j/α_{j+1}) ∈ [log t, log t + w]`.
pub const DEFAULT_LOG_RATIO_BAND: f64 = 2.0;

/// A point `x = μ·diag(α)·κ₂` of a standard Siegel set.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelPoint {
    pub mu: RealMatrix,
    pub alpha: Vec<Float>,
    pub kappa2: RealMatrix,
}

impl SiegelPoint {
    pub fn matrix(&self) -> RealMatrix {
        self.mu.scale_cols(&self.alpha).mul(&self.kappa2)
    }
}

/// Draws `μ` with strict upper entries uniform in `[-u, u]`, `α` with
/// `α_n = 1` and log-ratios uniform in `[log t, log t + 2]`, and a random
/// orthogonal `κ₂`.
pub fn sample_siegel_point(n: usize, params: &SiegelParams, prec: Precision, seed: u64) -> Result<SiegelPoint> {
    sample_siegel_point_with(n, params, prec, DEFAULT_LOG_RATIO_BAND, &mut rng_for(seed, stream::SIEGEL_POINT))
}

pub fn sample_siegel_point_with<R: Rng>(
    n: usize,
    params: &SiegelParams,
    prec: Precision,
    band: f64,
    rng: &mut R,
) -> Result<SiegelPoint> {
    check_dim(n)?;
    let bits = prec.bits();
    let u = params.u_float(prec).to_f64();
    let mu = RealMatrix::from_fn(n, prec, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => prec.float(rng.random_range(-u..=u)),
        std::cmp::Ordering::Equal => prec.one(),
        std::cmp::Ordering::Greater => prec.zero(),
    });

    let log_t = params.t_float(prec).ln();
    let mut alpha = vec![prec.one(); n];
    for j in (0..n.saturating_sub(1)).rev() {
        let step: f64 = rng.random_range(0.0..=band);
        let log_ratio = Float::with_val(bits, &log_t + step);
        alpha[j] = Float::with_val(bits, &alpha[j + 1] * log_ratio.exp());
    }

    let gaussian = RealMatrix::from_fn(n, prec, |_, _| prec.float(rng.sample::<f64, _>(StandardNormal)));
    let kappa2 = iwasawa(&gaussian)?.kappa;
    Ok(SiegelPoint { mu, alpha, kappa2 })
}

/// Knobs of [`sample_rational_map_with`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapOptions {
    /// Elementary matrices multiplied on each side; `None` means `2n`.
    pub word_length: Option<usize>,
    pub retries: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            word_length: None,
            retries: 1000,
        }
    }
}

/// Random `m ∈ M_n(ℚ)` with `|det m| = N` and denominator exactly `D`.
pub fn sample_rational_map(n: usize, big_n: u64, d: u64, seed: u64) -> Result<RationalMatrix> {
    sample_rational_map_with(n, big_n, d, &MapOptions::default(), &mut rng_for(seed, stream::RATIONAL_MAP))
}

/// `m = (1/D)·U·T·V` where `T` is upper triangular with `det T = N·Dⁿ` and
/// entries `0 ≤ T_ij < T_jj` above the diagonal, and `U`, `V` are words in
/// elementary matrices. Resampled until the denominator of `m` is exactly `D`.
pub fn sample_rational_map_with<R: Rng>(
    n: usize,
    big_n: u64,
    d: u64,
    opts: &MapOptions,
    rng: &mut R,
) -> Result<RationalMatrix> {
    check_dim(n)?;
    if big_n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "N and D must be positive, got N = {big_n}, D = {d}"
        )));
    }
    let mut primes = Vec::new();
    for (p, e) in factor(big_n) {
        primes.extend(std::iter::repeat_n(p, e as usize));
    }
    for (p, e) in factor(d) {
        primes.extend(std::iter::repeat_n(p, e as usize * n));
    }
    let word = opts.word_length.unwrap_or(2 * n);
    let d_int = Integer::from(d);

    for _ in 0..opts.retries.max(1) {
        let mut diag = vec![Integer::from(1); n];
        for &p in &primes {
            diag[rng.random_range(0..n)] *= p;
        }
        let mut m = IntegerMatrix::from_fn(n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => diag[i].clone(),
            std::cmp::Ordering::Less => random_below(&diag[j], rng),
            std::cmp::Ordering::Greater => Integer::new(),
        })?;
        if n > 1 && word > 0 {
            for _ in 0..word {
                let (a, b, s) = elementary(n, rng);
                m.add_row_multiple(a, b, &s);
            }
            for _ in 0..word {
                let (a, b, s) = elementary(n, rng);
                m.add_col_multiple(a, b, &s);
            }
            if rng.random_bool(0.5) {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(rng);
                m = IntegerMatrix::from_fn(n, |i, j| m[(perm[i], j)].clone())?;
            }
        }
        let out = RationalMatrix::from_fn(n, |i, j| Rational::from((m[(i, j)].clone(), d_int.clone())))?;
        if out.denominator() == d_int {
            return Ok(out);
        }
    }
    Err(Error::RetriesExhausted {
        det: big_n.to_string(),
        denominator: d.to_string(),
        attempts: opts.retries.max(1),
    })
}

fn elementary<R: Rng>(n: usize, rng: &mut R) -> (usize, usize, Integer) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let s = if rng.random_bool(0.5) { 1 } else { -1 };
    (a, b, Integer::from(s))
}

/// Uniform integer in `[0, bound)` for `bound ≥ 1`.
fn random_below<R: Rng>(bound: &Integer, rng: &mut R) -> Integer {
    if let Some(b) = bound.to_u64() {
        return Integer::from(rng.random_range(0..b));
    }
    let bits = bound.significant_bits();
    loop {
        let mut x = Integer::new();
        for k in (0..bits).step_by(32) {
            let chunk = rng.next_u32() >> (32 - (bits - k).min(32));
            x |= Integer::from(chunk) << k;
        }
        if x < *bound {
            return x;
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange(n));
    }
    Ok(())
}

/// Prime factorization by trial division.
pub(crate) fn factor(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= x {
        let mut e = 0;
        while x.is_multiple_of(p) {
            x /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}
