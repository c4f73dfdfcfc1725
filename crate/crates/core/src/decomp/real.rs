use std::fmt;
use std::ops::{Index, IndexMut};

use rug::Float;

use crate::error::{Error, Result};
use crate::exactmat::{IntegerMatrix, RationalMatrix, MAX_DIM};

/// Working precision in bits, threaded explicitly through every real
/// computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(128);
    pub const MIN_BITS: u32 = 64;
    pub const MAX_BITS: u32 = 4096;

    pub fn new(bits: u32) -> Result<Self> {
        if !(Self::MIN_BITS..=Self::MAX_BITS).contains(&bits) {
            return Err(Error::InvalidArgument(format!(
                "precision must be between {} and {} bits, got {bits}",
                Self::MIN_BITS,
                Self::MAX_BITS
            )));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn zero(self) -> Float {
        Float::new(self.0)
    }

    pub fn one(self) -> Float {
        Float::with_val(self.0, 1)
    }

    pub fn float<T>(self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.0, v)
    }

    /// `2^-k` at this precision.
    pub fn pow2_neg(self, k: u32) -> Float {
        self.one() >> k
    }

    /// Reconstruction tolerance `2^-(p-30)`.
    pub fn eps_rec(self) -> Float {
        self.pow2_neg(self.0 - 30)
    }

    /// Orthogonality tolerance, equal to the reconstruction tolerance.
    pub fn eps_orth(self) -> Float {
        self.eps_rec()
    }

    /// Pivot threshold `2^-(p/2)`.
    pub fn eps_pivot(self) -> Float {
        self.pow2_neg(self.0 / 2)
    }

    /// Number of significant decimal digits used when serializing (p/3).
    pub fn decimal_digits(self) -> usize {
        (self.0 / 3) as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Formats a float in decimal scientific notation with `digits`
/// significant digits.
pub fn format_float(x: &Float, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_zero() {
        return format!("{:.*e}", digits - 1, 0.0f64);
    }
    // rug's precision is the number of significant digits
    format!("{:.*e}", digits, x)
}

/// Parses a decimal (or integer / `a/b`) string into a float at `prec`.
pub fn parse_float(s: &str, prec: Precision) -> Result<Float> {
    let s = s.trim();
    if s.contains('/') {
        let r = crate::exactmat::parse_rational(s)?;
        return Ok(prec.float(&r));
    }
    let parsed = Float::parse(s).map_err(|e| Error::Parse(format!("bad decimal {s:?}: {e}")))?;
    Ok(prec.float(parsed))
}

/// Square matrix of multiprecision floats, all at the same precision.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    prec: Precision,
    entries: Vec<Float>,
}

impl RealMatrix {
    pub fn zeros(n: usize, prec: Precision) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        Self {
            n,
            prec,
            entries: vec![prec.zero(); n * n],
        }
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        Self::from_fn(n, prec, |i, j| prec.float(u8::from(i == j)))
    }

    pub fn from_fn(n: usize, prec: Precision, mut f: impl FnMut(usize, usize) -> Float) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} out of range");
        let entries = (0..n * n)
            .map(|k| {
                let mut v = f(k / n, k % n);
                v.set_prec(prec.bits());
                v
            })
            .collect();
        Self { n, prec, entries }
    }

    pub fn from_f64_rows<R: AsRef<[f64]>>(rows: &[R], prec: Precision) -> Self {
        let n = rows.len();
        Self::from_fn(n, prec, |i, j| {
            let row = rows[i].as_ref();
            assert_eq!(row.len(), n, "square matrix");
            prec.float(row[j])
        })
    }

    pub fn diagonal(d: &[Float], prec: Precision) -> Self {
        let n = d.len();
        Self::from_fn(n, prec, |i, j| {
            if i == j {
                d[i].clone()
            } else {
                prec.zero()
            }
        })
    }

    /// Correctly rounded entrywise conversion of an exact rational matrix.
    pub fn from_rational(m: &RationalMatrix, prec: Precision) -> Self {
        Self::from_fn(m.n(), prec, |i, j| prec.float(&m[(i, j)]))
    }

    pub fn from_integer(m: &IntegerMatrix, prec: Precision) -> Self {
        Self::from_fn(m.n(), prec, |i, j| prec.float(&m[(i, j)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn entries(&self) -> &[Float] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let prec = self.prec;
        let mut out = Self::zeros(n, prec);
        let mut tmp = prec.zero();
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    tmp.assign_mul(a, &other[(k, j)]);
                    out[(i, j)] += &tmp;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.prec, |i, j| self[(j, i)].clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, self.prec, |i, j| {
            Float::with_val(self.prec.bits(), &self[(i, j)] - &other[(i, j)])
        })
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[Float]) -> Self {
        Self::from_fn(self.n, self.prec, |i, j| {
            Float::with_val(self.prec.bits(), &self[(i, j)] * &d[i])
        })
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[Float]) -> Self {
        Self::from_fn(self.n, self.prec, |i, j| {
            Float::with_val(self.prec.bits(), &self[(i, j)] * &d[j])
        })
    }

    pub fn scale(&self, c: &Float) -> Self {
        Self::from_fn(self.n, self.prec, |i, j| {
            Float::with_val(self.prec.bits(), &self[(i, j)] * c)
        })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Float {
        let mut best = self.prec.zero();
        for e in &self.entries {
            let a = Float::with_val(self.prec.bits(), e.abs_ref());
            if a > best {
                best = a;
            }
        }
        best
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Float {
        self.sub(other).max_abs()
    }

    /// `max |self·selfᵀ − I|`.
    pub fn orthogonality_residual(&self) -> Float {
        let id = Self::identity(self.n, self.prec);
        self.mul(&self.transpose()).max_abs_diff(&id)
    }

    pub fn is_unit_upper_triangular(&self, tol: &Float) -> bool {
        let one = self.prec.one();
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let v = &self[(i, j)];
                let dev = if i == j {
                    Float::with_val(self.prec.bits(), v - &one).abs()
                } else if i > j {
                    Float::with_val(self.prec.bits(), v.abs_ref())
                } else {
                    return true;
                };
                dev <= *tol
            })
        })
    }

    /// Inverse of a unit upper triangular matrix by back substitution. Only
    /// the strict upper triangle of `self` is read.
    pub fn unit_upper_inverse(&self) -> Self {
        let n = self.n;
        let prec = self.prec;
        let mut inv = Self::identity(n, prec);
        let mut tmp = prec.zero();
        for j in 0..n {
            for i in (0..j).rev() {
                let mut acc = prec.zero();
                for k in i + 1..=j {
                    tmp.assign_mul(&self[(i, k)], &inv[(k, j)]);
                    acc += &tmp;
                }
                inv[(i, j)] = -acc;
            }
        }
        inv
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Float {
        let n = self.n;
        let bits = self.prec.bits();
        let mut a = self.entries.clone();
        let mut det = self.prec.one();
        for k in 0..n {
            let mut piv = k;
            for r in k + 1..n {
                if Float::with_val(bits, a[r * n + k].abs_ref())
                    > Float::with_val(bits, a[piv * n + k].abs_ref())
                {
                    piv = r;
                }
            }
            if a[piv * n + k].is_zero() {
                return self.prec.zero();
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[k * n + k].clone();
            det *= &p;
            for i in k + 1..n {
                let f = Float::with_val(bits, &a[i * n + k] / &p);
                for j in k..n {
                    let d = Float::with_val(bits, &f * &a[k * n + j]);
                    a[i * n + j] -= d;
                }
            }
        }
        det
    }

    /// Rows as decimal strings with `p/3` significant digits.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        let digits = self.prec.decimal_digits();
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| format_float(&self[(i, j)], digits))
                    .collect()
            })
            .collect()
    }

    pub fn from_string_rows(rows: &[Vec<String>], prec: Precision) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionOutOfRange(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeError(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            for s in row {
                entries.push(parse_float(s, prec)?);
            }
        }
        Ok(Self { n, prec, entries })
    }
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = Float;

    fn index(&self, (i, j): (usize, usize)) -> &Float {
        &self.entries[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Float {
        &mut self.entries[i * self.n + j]
    }
}

impl fmt::Display for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(12);
        for i in 0..self.n {
            if i > 0 {
                f.write_str("; ")?;
            }
            let row: Vec<String> = (0..self.n)
                .map(|j| format_float(&self[(i, j)], digits))
                .collect();
            f.write_str(&row.join(" "))?;
        }
        Ok(())
    }
}
