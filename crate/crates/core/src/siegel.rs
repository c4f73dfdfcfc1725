//! Standard Siegel sets `𝔖 = Ω_u·A_t·K` in `GL_n(ℝ)` and reduction of an
//! arbitrary invertible matrix into the fundamental Siegel set by a
//! unimodular left factor.

use std::fmt;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::decomp::{format_float, iwasawa, IwasawaDecomposition, Precision, RealMatrix};
use crate::error::{Error, Result};
use crate::exactmat::{format_rational, parse_rational, Integer, IntegerMatrix, Rational};

/// Token accepted wherever a `t` value is parsed, standing for `√3/2`.
pub const SQRT3_OVER_2: &str = "sqrt3over2";

/// Parameters `(u, t)` of a standard Siegel set.
///
/// `t` is stored through its exact square so that `t = √3/2` compares
/// exactly; `t` itself is only materialized at a working precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ParamsWire", into = "ParamsWire")]
pub struct SiegelParams {
    u: Rational,
    t_sq: Rational,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ParamsWire {
    u: String,
    t: String,
}

impl SiegelParams {
    pub fn new(u: Rational, t: Rational) -> Result<Self> {
        let t_sq = Rational::from(t.square_ref());
        if t <= 0 {
            return Err(Error::InvalidArgument(format!(
                "t must be positive, got {}",
                format_rational(&t)
            )));
        }
        Self::with_t_squared(u, t_sq)
    }

    pub fn with_t_squared(u: Rational, t_sq: Rational) -> Result<Self> {
        if u <= 0 {
            return Err(Error::InvalidArgument(format!(
                "u must be positive, got {}",
                format_rational(&u)
            )));
        }
        if t_sq <= 0 {
            return Err(Error::InvalidArgument(format!(
                "t^2 must be positive, got {}",
                format_rational(&t_sq)
            )));
        }
        Ok(Self { u, t_sq })
    }

    /// `(1/2, √3/2)`, the classical fundamental Siegel set for `GL_n(ℤ)`.
    pub fn fundamental() -> Self {
        Self {
            u: Rational::from((1, 2)),
            t_sq: Rational::from((3, 4)),
        }
    }

    /// Parses `u` as a rational and `t` as a rational, `sqrt3over2`, or
    /// `sqrt(a/b)`.
    pub fn parse(u: &str, t: &str) -> Result<Self> {
        Self::with_t_squared(parse_rational(u)?, parse_t_squared(t)?)
    }

    pub fn u(&self) -> &Rational {
        &self.u
    }

    pub fn t_squared(&self) -> &Rational {
        &self.t_sq
    }

    /// True iff `u ≥ 1/2` and `t ≤ √3/2`, decided exactly as `t² ≤ 3/4`.
    pub fn is_fundamental(&self) -> bool {
        self.u >= (1, 2) && self.t_sq <= (3, 4)
    }

    pub fn u_float(&self, prec: Precision) -> Float {
        prec.float(&self.u)
    }

    pub fn t_float(&self, prec: Precision) -> Float {
        prec.float(&self.t_sq).sqrt()
    }

    pub fn t_string(&self) -> String {
        format_t_squared(&self.t_sq)
    }
}

impl Default for SiegelParams {
    fn default() -> Self {
        Self::fundamental()
    }
}

impl fmt::Display for SiegelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u = {}, t = {}", format_rational(&self.u), self.t_string())
    }
}

impl TryFrom<ParamsWire> for SiegelParams {
    type Error = Error;

    fn try_from(w: ParamsWire) -> Result<Self> {
        Self::parse(&w.u, &w.t)
    }
}

impl From<SiegelParams> for ParamsWire {
    fn from(p: SiegelParams) -> Self {
        ParamsWire {
            u: format_rational(&p.u),
            t: p.t_string(),
        }
    }
}

/// Parses a `t` token into the exact value of `t²`.
pub fn parse_t_squared(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s == SQRT3_OVER_2 {
        return Ok(Rational::from((3, 4)));
    }
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return parse_rational(inner);
    }
    let t = parse_rational(s)?;
    if t <= 0 {
        return Err(Error::InvalidArgument(format!("t must be positive, got {s}")));
    }
    Ok(Rational::from(t.square_ref()))
}

/// Inverse of [`parse_t_squared`].
pub fn format_t_squared(t_sq: &Rational) -> String {
    if *t_sq == Rational::from((3, 4)) {
        return SQRT3_OVER_2.to_string();
    }
    let (num, den) = (t_sq.numer(), t_sq.denom());
    if num.is_perfect_square() && den.is_perfect_square() {
        let t = Rational::from((Integer::from(num.sqrt_ref()), Integer::from(den.sqrt_ref())));
        return format_rational(&t);
    }
    format!("sqrt({})", format_rational(t_sq))
}

/// `ν ∈ Ω_u`: every strict upper entry satisfies `|ν_ij| ≤ u + tol`.
pub fn in_omega(nu: &RealMatrix, u: &Float, tol: f64) -> Result<bool> {
    let prec = nu.precision();
    let tol_f = prec.float(tol);
    if !nu.is_unit_upper_triangular(&tol_f) {
        return Err(Error::ShapeError(
            "in_omega needs a unit upper triangular matrix".into(),
        ));
    }
    let bound = Float::with_val(prec.bits(), u + &tol_f);
    let n = nu.n();
    Ok((0..n).all(|i| (i + 1..n).all(|j| Float::with_val(prec.bits(), nu[(i, j)].abs_ref()) <= bound)))
}

/// `α ∈ A_t`: `α_j/α_{j+1} ≥ t·(1 − tol)` for every `j`.
pub fn in_at(alpha: &[Float], t: &Float, tol: f64) -> Result<bool> {
    if let Some(k) = alpha.iter().position(|a| *a <= 0) {
        return Err(Error::DomainError(format!(
            "A_t membership needs positive entries, alpha_{} = {}",
            k + 1,
            format_float(&alpha[k], 6)
        )));
    }
    let bits = t.prec();
    let bound = Float::with_val(bits, t * Float::with_val(bits, 1 - Float::with_val(bits, tol)));
    Ok(alpha
        .windows(2)
        .all(|w| Float::with_val(bits, &w[0] / &w[1]) >= bound))
}

/// Iwasawa-decomposes `g` and tests `ν ∈ Ω_u` and `α ∈ A_t`.
pub fn in_siegel(
    g: &RealMatrix,
    params: &SiegelParams,
    tol: f64,
) -> Result<(bool, IwasawaDecomposition)> {
    let dec = iwasawa(g)?;
    let ok = decomposition_in_siegel(&dec, params, tol)?;
    Ok((ok, dec))
}

/// Membership test on an already computed decomposition.
pub fn decomposition_in_siegel(
    dec: &IwasawaDecomposition,
    params: &SiegelParams,
    tol: f64,
) -> Result<bool> {
    let prec = dec.precision();
    Ok(in_omega(&dec.nu, &params.u_float(prec), tol)?
        && in_at(&dec.alpha, &params.t_float(prec), tol)?)
}

/// `log ∏_j α_j^{2j}` (1-based `j`), the log of the product of the Gram
/// determinants of the trailing row blocks. Each adjacent swap performed by
/// [`reduce_to_siegel`] strictly decreases it.
pub fn log_swap_potential(alpha: &[Float]) -> Float {
    let bits = alpha[0].prec();
    let mut acc = Float::new(bits);
    for (j, a) in alpha.iter().enumerate() {
        let term = Float::with_val(bits, a.ln_ref()) * (2 * (j as u32 + 1));
        acc += term;
    }
    acc
}

/// Output of [`reduce_to_siegel`].
#[derive(Clone, Debug)]
pub struct SiegelReduction {
    /// Unimodular `δ` with `δ·g ∈ 𝔖`.
    pub delta: IntegerMatrix,
    /// `δ·g` at the working precision.
    pub reduced: RealMatrix,
    /// Iwasawa decomposition of `δ·g`.
    pub decomposition: IwasawaDecomposition,
    pub swaps: usize,
    /// Log swap potential before the first swap and after each swap.
    pub potential_trace: Vec<Float>,
}

const MAX_SWAPS_PER_DIM: usize = 20_000;

/// Reduces `g` into the Siegel set of `params` by size reduction and
/// adjacent row swaps, returning the first certified `δ`.
///
/// Requires fundamental parameters (`u ≥ 1/2`, `t ≤ √3/2`). The result is
/// certified with tolerance `2^-(p/2)`; if certification fails the caller
/// should retry at a higher precision.
pub fn reduce_to_siegel(g: &RealMatrix, params: &SiegelParams) -> Result<SiegelReduction> {
    if !params.is_fundamental() {
        return Err(Error::NotFundamental {
            u: format_rational(params.u()),
            t_sq: format_rational(params.t_squared()),
        });
    }
    let n = g.n();
    let prec = g.precision();
    let bits = prec.bits();
    let cert_tol = prec.eps_pivot().to_f64();
    let t = params.t_float(prec);
    let swap_below = Float::with_val(bits, &t * Float::with_val(bits, 1 - prec.eps_pivot() / 2u32));

    let mut delta = IntegerMatrix::identity(n);
    let mut reduced = g.clone();
    let mut dec = iwasawa(&reduced)?;
    let mut trace = vec![log_swap_potential(&dec.alpha)];
    let mut swaps = 0;

    loop {
        if size_reduce(&dec.nu, &mut delta) {
            reduced = RealMatrix::from_integer(&delta, prec).mul(g);
            dec = iwasawa(&reduced)?;
        }
        let violation = (0..n.saturating_sub(1))
            .find(|&j| Float::with_val(bits, &dec.alpha[j] / &dec.alpha[j + 1]) < swap_below);
        let Some(j) = violation else { break };
        if swaps >= MAX_SWAPS_PER_DIM * n {
            return Err(Error::PrecisionExhausted(format!(
                "Siegel reduction did not terminate after {swaps} swaps"
            )));
        }
        delta.swap_rows(j, j + 1);
        swaps += 1;
        reduced = RealMatrix::from_integer(&delta, prec).mul(g);
        dec = iwasawa(&reduced)?;
        trace.push(log_swap_potential(&dec.alpha));
    }

    if !decomposition_in_siegel(&dec, params, cert_tol)? {
        return Err(Error::PrecisionExhausted(format!(
            "reduced matrix could not be certified in the Siegel set ({params}) at {bits} bits"
        )));
    }
    Ok(SiegelReduction {
        delta,
        reduced,
        decomposition: dec,
        swaps,
        potential_trace: trace,
    })
}

/// Size-reduces a floating copy of `nu` so that `|ν_ij| ≤ 1/2`, applying the
/// same integer row operations to `delta`. Returns whether anything changed.
fn size_reduce(nu: &RealMatrix, delta: &mut IntegerMatrix) -> bool {
    let n = nu.n();
    let bits = nu.precision().bits();
    let mut work = nu.clone();
    let mut changed = false;
    for i in (0..n).rev() {
        for j in i + 1..n {
            let r = Float::with_val(bits, work[(i, j)].round_ref());
            if r.is_zero() {
                continue;
            }
            // row_i -= r·row_j touches columns ≥ j only
            for k in j..n {
                let d = Float::with_val(bits, &r * &work[(j, k)]);
                work[(i, k)] -= d;
            }
            let r_int = r.to_integer().expect("finite multiplier");
            delta.add_row_multiple(i, j, &(-r_int));
            changed = true;
        }
    }
    changed
}
