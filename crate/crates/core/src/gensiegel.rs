//! Non-standard Siegel sets in `GL_n`: a rational full flag `P = g_P·P₀·g_P⁻¹`,
//! a maximal compact `K = O(Q)` given by a positive definite form, a cone
//! parameter `t` and finitely many samples of the compact set `Ω`.
//!
//! [`standardize`] finds `γ ∈ GL_n(ℚ)` and upper triangular `σ = τ·diag(β)`
//! such that `γ⁻¹·𝔖·γ·σ` sits inside the standard Siegel set with
//! parameters `(u′, s)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::decomp::{format_float, iwasawa, udu_factor, Precision, RealMatrix};
use crate::error::{Error, Result};
use crate::exactmat::{Integer, Rational, RationalMatrix};
use crate::siegel::{format_t_squared, in_siegel, parse_t_squared, SiegelParams};

/// Data `(g_P, Q, t, Ω)` of a Siegel set `Ω·A_t·K` for the flag of `g_P`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiegelTripleGLn {
    pub flag: RationalMatrix,
    pub form: RationalMatrix,
    pub t_sq: Rational,
    pub omega_samples: Vec<RealMatrix>,
}

#[derive(Serialize, Deserialize)]
struct TripleWire {
    flag: Vec<Vec<String>>,
    form: Vec<Vec<String>>,
    t: String,
    #[serde(default)]
    omega: Vec<Vec<Vec<String>>>,
}

impl SiegelTripleGLn {
    pub fn new(flag: RationalMatrix, form: RationalMatrix, t_sq: Rational, omega_samples: Vec<RealMatrix>) -> Result<Self> {
        let n = flag.n();
        if form.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: form.n(),
            });
        }
        if let Some(w) = omega_samples.iter().find(|w| w.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: w.n(),
            });
        }
        if flag.det() == 0 {
            return Err(Error::SingularMatrix);
        }
        if !form.is_symmetric() {
            return Err(Error::DomainError("the form Q must be symmetric".into()));
        }
        if !form.is_positive_definite() {
            return Err(Error::NotPositiveDefinite {
                index: 0,
                pivot: "<= 0".into(),
                threshold: "0".into(),
            });
        }
        if t_sq <= 0 {
            return Err(Error::InvalidArgument("t must be positive".into()));
        }
        Ok(Self {
            flag,
            form,
            t_sq,
            omega_samples,
        })
    }

    pub fn n(&self) -> usize {
        self.flag.n()
    }

    /// The standard triple `(I, I, √3/2, {I})`.
    pub fn standard(n: usize, prec: Precision) -> Self {
        Self {
            flag: RationalMatrix::identity(n),
            form: RationalMatrix::identity(n),
            t_sq: Rational::from((3, 4)),
            omega_samples: vec![RealMatrix::identity(n, prec)],
        }
    }

    /// Reads `{"flag": [[..]], "form": [[..]], "t": "sqrt3over2", "omega": [[[..]]]}`;
    /// flag and form entries are exact rationals, omega entries decimals.
    pub fn from_json(text: &str, prec: Precision) -> Result<Self> {
        let wire: TripleWire = serde_json::from_str(text)?;
        let flag = RationalMatrix::try_from(wire.flag)?;
        let form = RationalMatrix::try_from(wire.form)?;
        let omega = wire
            .omega
            .iter()
            .map(|rows| RealMatrix::from_string_rows(rows, prec))
            .collect::<Result<Vec<_>>>()?;
        let omega = if omega.is_empty() {
            vec![RealMatrix::identity(flag.n(), prec)]
        } else {
            omega
        };
        Self::new(flag, form, parse_t_squared(&wire.t)?, omega)
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = TripleWire {
            flag: self.flag.to_string_rows(),
            form: self.form.to_string_rows(),
            t: format_t_squared(&self.t_sq),
            omega: self.omega_samples.iter().map(RealMatrix::to_string_rows).collect(),
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn t_float(&self, prec: Precision) -> Float {
        prec.float(&self.t_sq).sqrt()
    }
}

/// `γ_q`, `σ = τ·diag(β)` and the standard parameters `(u′, s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardizationResult {
    pub gamma_q: RationalMatrix,
    /// `Q′ = γ_qᵀ·Q·γ_q`.
    pub q_prime: RationalMatrix,
    pub tau: RealMatrix,
    pub beta: Vec<Float>,
    pub u_prime: Float,
    pub s: Float,
}

impl StandardizationResult {
    pub fn sigma(&self) -> RealMatrix {
        self.tau.scale_cols(&self.beta)
    }

    pub fn precision(&self) -> Precision {
        self.tau.precision()
    }

    /// `max|σ·σᵀ·Q′ − I|`.
    pub fn sigma_residual(&self) -> Float {
        let prec = self.precision();
        let sigma = self.sigma();
        sigma
            .mul(&sigma.transpose())
            .mul(&RealMatrix::from_rational(&self.q_prime, prec))
            .max_abs_diff(&RealMatrix::identity(sigma.n(), prec))
    }

    /// Copy with `β₁` multiplied by `factor`; a deliberately wrong `σ`.
    pub fn with_beta_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.beta[0] *= factor;
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let digits = self.precision().decimal_digits();
        let f = |x: &Float| format_float(x, digits);
        let value = serde_json::json!({
            "gamma_q": self.gamma_q.to_string_rows(),
            "q_prime": self.q_prime.to_string_rows(),
            "sigma": self.sigma().to_string_rows(),
            "tau": self.tau.to_string_rows(),
            "beta": self.beta.iter().map(f).collect::<Vec<_>>(),
            "u_prime": f(&self.u_prime),
            "s": f(&self.s),
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// Computes `γ_q = g_P`, the reverse-Cholesky factor `σ` of `Q′⁻¹`, and
///
/// * `u′ = max |(γ_q⁻¹·ω·γ_q·τ)_ij|` over strict upper entries and samples
/// * `s = t·min_j β_j/β_{j+1}`
pub fn standardize(triple: &SiegelTripleGLn, prec: Precision) -> Result<StandardizationResult> {
    let n = triple.n();
    let bits = prec.bits();
    let gamma_q = triple.flag.clone();
    let q_prime = gamma_q.transpose().mul(&triple.form)?.mul(&gamma_q)?;
    let q_prime_inv = q_prime.inverse()?;
    let (tau, d) = udu_factor(&RealMatrix::from_rational(&q_prime_inv, prec))?;
    let beta: Vec<Float> = d.into_iter().map(Float::sqrt).collect();

    let g = RealMatrix::from_rational(&gamma_q, prec);
    let g_inv = RealMatrix::from_rational(&gamma_q.inverse()?, prec);
    let mut u_prime = prec.zero();
    for (index, omega) in triple.omega_samples.iter().enumerate() {
        let v = g_inv.mul(omega).mul(&g).mul(&tau);
        let scale = v.max_abs().max(&prec.one());
        let mut deviation = prec.zero();
        for i in 0..n {
            for j in 0..=i {
                let target = if i == j { 1 } else { 0 };
                let dev = Float::with_val(bits, &v[(i, j)] - target).abs();
                if dev > deviation {
                    deviation = dev;
                }
            }
            for j in i + 1..n {
                let e = v[(i, j)].clone().abs();
                if e > u_prime {
                    u_prime = e;
                }
            }
        }
        if deviation > Float::with_val(bits, prec.eps_pivot() * &scale) {
            return Err(Error::InconsistentOmega {
                index: index + 1,
                deviation: format_float(&deviation, 6),
            });
        }
    }

    let mut s = triple.t_float(prec);
    if n > 1 {
        let min_ratio = (0..n - 1)
            .map(|j| Float::with_val(bits, &beta[j] / &beta[j + 1]))
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
            .expect("n > 1");
        s *= min_ratio;
    }
    Ok(StandardizationResult {
        gamma_q,
        q_prime,
        tau,
        beta,
        u_prime,
        s,
    })
}

/// Grid for [`verify_containment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentGrid {
    pub points: usize,
    pub seed: u64,
    /// Relative slack: checks against `(u′ + margin, s·(1 − margin))`.
    pub margin: f64,
    /// Largest extra log-ratio above `log t` on the grid rays.
    pub max_log_excess: f64,
}

impl Default for ContainmentGrid {
    fn default() -> Self {
        Self {
            points: 100,
            seed: 0,
            margin: 0.05,
            max_log_excess: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentFailure {
    pub point: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub points: usize,
    pub failures: Vec<ContainmentFailure>,
}

impl ContainmentReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random element of `K = {k : kᵀ·Q·k = Q}`, as `L·r·L⁻¹` with `L·Lᵀ = Q⁻¹`
/// and `r` a random orthogonal matrix.
pub fn sample_form_orthogonal<R: Rng>(form: &RationalMatrix, prec: Precision, rng: &mut R) -> Result<RealMatrix> {
    let n = form.n();
    let (nu, d) = udu_factor(&RealMatrix::from_rational(&form.inverse()?, prec))?;
    let sqrt_d: Vec<Float> = d.into_iter().map(Float::sqrt).collect();
    let l = nu.scale_cols(&sqrt_d);
    let inv_sqrt_d: Vec<Float> = sqrt_d.iter().map(|x| Float::with_val(prec.bits(), 1 / x)).collect();
    let l_inv = nu.unit_upper_inverse().scale_rows(&inv_sqrt_d);
    let gaussian = RealMatrix::from_fn(n, prec, |_, _| prec.float(rng.sample::<f64, _>(StandardNormal)));
    let r = iwasawa(&gaussian)?.kappa;
    Ok(l.mul(&r).mul(&l_inv))
}

/// Checks `γ_q⁻¹·(ω·a·k)·γ_q·σ ∈ 𝔖(u′ + margin, s·(1 − margin))` over a grid of
/// `a` in the triple's cone, cycling through the `Ω` samples and drawing a
/// fresh `k ∈ K` per point.
///
/// The cone of the triple is `γ_q·σ·A_{0,t}·σ⁻¹·γ_q⁻¹`; grid points put some
/// ratios of the `A_{0,t}` factor exactly at `t` and lift the others along a
/// logarithmic scale.
pub fn verify_containment(
    triple: &SiegelTripleGLn,
    result: &StandardizationResult,
    grid: &ContainmentGrid,
) -> Result<ContainmentReport> {
    let n = triple.n();
    let prec = result.precision();
    let bits = prec.bits();
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let g = RealMatrix::from_rational(&result.gamma_q, prec);
    let g_inv = RealMatrix::from_rational(&result.gamma_q.inverse()?, prec);
    let sigma = result.sigma();
    let inv_beta: Vec<Float> = result.beta.iter().map(|b| Float::with_val(bits, 1 / b)).collect();
    let sigma_inv = result.tau.unit_upper_inverse().scale_rows(&inv_beta);
    let conj = g.mul(&sigma);
    let conj_inv = sigma_inv.mul(&g_inv);

    let t = triple.t_float(prec);
    let log_t = Float::with_val(bits, t.ln_ref());
    let u_check = Float::with_val(bits, &result.u_prime + grid.margin);
    let s_check = Float::with_val(bits, &result.s * (1.0 - grid.margin));
    let u_rat = Rational::from_f64(u_check.to_f64()).unwrap_or_default();
    let s_sq = Float::with_val(bits, s_check.square_ref());
    let params = SiegelParams::with_t_squared(
        u_rat.max(Rational::from((1, 1u32 << 20))),
        s_sq.to_rational().unwrap_or_default(),
    )?;

    let patterns = 1usize << n.saturating_sub(1);
    let mut failures = Vec::new();
    for point in 0..grid.points {
        let pattern = point % patterns;
        let step = (point / patterns) as f64;
        let steps = grid.points.div_ceil(patterns).max(2) as f64 - 1.0;
        let excess = grid.max_log_excess * step / steps;
        let mut a0 = vec![prec.one(); n];
        for j in (0..n.saturating_sub(1)).rev() {
            let lifted = if pattern & (1 << j) != 0 { excess } else { 0.0 };
            let log_ratio = Float::with_val(bits, &log_t + lifted);
            a0[j] = Float::with_val(bits, &a0[j + 1] * log_ratio.exp());
        }
        let center = prec.float(rng.random_range(-1.0..1.0)).exp();
        let a0: Vec<Float> = a0.into_iter().map(|x| x * &center).collect();
        let a = conj.scale_cols(&a0).mul(&conj_inv);
        let omega = &triple.omega_samples[point % triple.omega_samples.len()];
        let k = sample_form_orthogonal(&triple.form, prec, &mut rng)?;
        let h = g_inv.mul(&omega.mul(&a).mul(&k)).mul(&g).mul(&sigma);
        let (ok, dec) = in_siegel(&h, &params, 1e-20)?;
        if !ok {
            failures.push(ContainmentFailure {
                point,
                reason: describe_miss(&dec, &u_check, &s_check),
            });
        }
    }
    Ok(ContainmentReport {
        points: grid.points,
        failures,
    })
}

fn describe_miss(dec: &crate::decomp::IwasawaDecomposition, u: &Float, s: &Float) -> String {
    let n = dec.n();
    let mut worst_nu = dec.precision().zero();
    for i in 0..n {
        for j in i + 1..n {
            let e = dec.nu[(i, j)].clone().abs();
            if e > worst_nu {
                worst_nu = e;
            }
        }
    }
    let worst_ratio = dec
        .alpha
        .windows(2)
        .map(|w| Float::with_val(w[0].prec(), &w[0] / &w[1]))
        .min_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    format!(
        "max |nu_ij| = {} (bound {}), min alpha ratio = {} (bound {})",
        format_float(&worst_nu, 6),
        format_float(u, 6),
        worst_ratio.map_or("-".into(), |r| format_float(&r, 6)),
        format_float(s, 6)
    )
}

/// A random well-formed triple: small integer flag and form, `t` either
/// `√3/2` or a rational in `(0, 1]`, and `Ω` samples `g_P·v·g_P⁻¹` with `v`
/// unit upper triangular.
pub fn random_triple(n: usize, seed: u64, prec: Precision) -> Result<SiegelTripleGLn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flag = loop {
        let m = RationalMatrix::from_fn(n, |_, _| {
            Rational::from((Integer::from(rng.random_range(-3i32..=3)), Integer::from(rng.random_range(1u32..=2))))
        })?;
        if m.det() != 0 {
            break m;
        }
    };
    let a = RationalMatrix::from_fn(n, |_, _| Rational::from(rng.random_range(-2i32..=2)))?;
    let form = a.transpose().mul(&a)?;
    let form = RationalMatrix::from_fn(n, |i, j| {
        let bump = if i == j { Rational::from(rng.random_range(1i32..=3)) } else { Rational::new() };
        Rational::from(&form[(i, j)] + &bump)
    })?;
    let t_sq = if rng.random_bool(0.5) {
        Rational::from((3, 4))
    } else {
        let t = Rational::from((rng.random_range(1i32..=10), 10));
        Rational::from(t.square_ref())
    };
    let g = RealMatrix::from_rational(&flag, prec);
    let g_inv = RealMatrix::from_rational(&flag.inverse()?, prec);
    let mut omega = vec![RealMatrix::identity(n, prec)];
    for _ in 0..3 {
        let v = RealMatrix::from_fn(n, prec, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => prec.float(rng.random_range(-1.0..1.0)),
            std::cmp::Ordering::Equal => prec.one(),
            std::cmp::Ordering::Greater => prec.zero(),
        });
        omega.push(g.mul(&v).mul(&g_inv));
    }
    SiegelTripleGLn::new(flag, form, t_sq, omega)
}
