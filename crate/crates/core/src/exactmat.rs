//! Exact matrices over ℚ and ℤ.
//!
//! Entries are GMP rationals and integers, so every value is kept in lowest
//! terms with a positive denominator. Matrices are square, stored row-major,
//! and immutable once built.
//!
//! The text format shared by the CLI and the file readers is one matrix per
//! block: rows separated by `;`, entries separated by whitespace, each entry
//! an integer or `a/b`, e.g. `"1/2 3; 0 1"`. The JSON form is an array of
//! arrays of strings.

use std::fmt;
use std::ops::Index;
use std::str::FromStr;

pub use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange(n));
    }
    Ok(())
}

/// Parses an integer, `a/b`, or a finite decimal such as `-0.125` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let den: Integer = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::from((num, den)));
    }
    if let Some((int_part, frac)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let digits = frac.len() as u32;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Parse(format!("bad decimal {s:?}")));
        }
        let int_val: Integer = match int_part {
            "" | "-" | "+" => Integer::new(),
            _ => int_part
                .parse()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?,
        };
        let frac_val: Integer = frac.parse().unwrap_or_default();
        let scale = Integer::from(Integer::u_pow_u(10, digits));
        let mut num = int_val.abs() * &scale + frac_val;
        if negative {
            num = -num;
        }
        return Ok(Rational::from((num, scale)));
    }
    let n: Integer = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer {s:?}")))?;
    Ok(Rational::from(n))
}

/// Formats a rational as `a` or `a/b`.
pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Height of a single rational: `max(|numerator|, denominator)`.
pub fn rational_height(r: &Rational) -> Integer {
    let num = Integer::from(r.numer().abs_ref());
    if num > *r.denom() {
        num
    } else {
        r.denom().clone()
    }
}

fn split_rows(text: &str) -> Vec<Vec<&str>> {
    text.split(';')
        .map(|row| row.split_whitespace().collect::<Vec<_>>())
        .filter(|row| !row.is_empty())
        .collect()
}

/// Square matrix over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(n: usize, entries: Vec<Rational>) -> Result<Self> {
        check_dim(n)?;
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        check_dim(n)?;
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::ShapeError(format!(
                    "row of length {} in a {n}x{n} matrix",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix from small integer rows; panics on a non-square input.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&v| Rational::from(v)).collect())
            .collect();
        Self::from_rows(rows).expect("square matrix")
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        check_dim(n)?;
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| Rational::from(u8::from(i == j))).expect("valid dimension")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Maximum over entries of `max(|numerator|, denominator)`; always ≥ 1.
    pub fn height(&self) -> Integer {
        self.entries
            .iter()
            .map(rational_height)
            .max()
            .unwrap_or_else(|| Integer::from(1))
    }

    /// Maximum lowest-terms denominator; 1 iff the matrix is integral.
    pub fn denominator(&self) -> Integer {
        self.entries
            .iter()
            .map(|e| e.denom().clone())
            .max()
            .unwrap_or_else(|| Integer::from(1))
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|e| *e.denom() == 1)
    }

    /// Exact determinant. Each row is cleared of denominators and the
    /// resulting integer matrix goes through Bareiss elimination.
    pub fn det(&self) -> Rational {
        let mut scale = Integer::from(1);
        let mut rows = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let lcm = row
                .iter()
                .fold(Integer::from(1), |acc, e| acc.lcm(e.denom()));
            for e in row {
                let scaled = Rational::from(e * &lcm);
                rows.push(scaled.numer().clone());
            }
            scale *= lcm;
        }
        let int_det = bareiss_det(self.n, rows);
        Rational::from((int_det, scale))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut acc = Rational::new();
            for k in 0..n {
                acc += Rational::from(&self[(i, k)] * &other[(k, j)]);
            }
            acc
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone()).expect("valid dimension")
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_fn(self.n, |i, j| Rational::from(&self[(i, j)] * c)).expect("valid dimension")
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| Rational::from(u8::from(i == j))).collect())
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a[r][col] != 0)
                .ok_or(Error::SingularMatrix)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] /= &p;
                inv[col][j] /= &p;
            }
            for r in 0..n {
                if r == col || a[r][col] == 0 {
                    continue;
                }
                let f = a[r][col].clone();
                for j in 0..n {
                    let da = Rational::from(&f * &a[col][j]);
                    a[r][j] -= da;
                    let di = Rational::from(&f * &inv[col][j]);
                    inv[r][j] -= di;
                }
            }
        }
        Self::from_rows(inv)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Exact positive-definiteness test for a symmetric matrix: all pivots of
    /// unpivoted elimination (equivalently all leading principal minors) are
    /// positive.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        let n = self.n;
        let mut a: Vec<Vec<Rational>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        for k in 0..n {
            if a[k][k] <= 0 {
                return false;
            }
            for i in k + 1..n {
                let f = Rational::from(&a[i][k] / &a[k][k]);
                for j in k..n {
                    let d = Rational::from(&f * &a[k][j]);
                    a[i][j] -= d;
                }
            }
        }
        true
    }

    pub fn to_integer(&self) -> Option<IntegerMatrix> {
        if !self.is_integral() {
            return None;
        }
        let entries = self.entries.iter().map(|e| e.numer().clone()).collect();
        Some(IntegerMatrix { n: self.n, entries })
    }

    /// Parses the `;`-separated text format.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = split_rows(text)
            .into_iter()
            .map(|row| row.into_iter().map(parse_rational).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(Error::Parse("empty matrix".into()));
        }
        Self::from_rows(rows)
    }

    /// Parses either the text format or a JSON array of arrays of strings.
    pub fn parse_any(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            let rows: Vec<Vec<serde_json::Value>> = serde_json::from_str(text)?;
            let rows = rows
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|v| match v {
                            serde_json::Value::String(s) => parse_rational(&s),
                            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                            other => Err(Error::Parse(format!("bad matrix entry {other}"))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Self::from_rows(rows)
        } else {
            Self::parse(text)
        }
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for RationalMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.n + j]
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            if i > 0 {
                f.write_str("; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            f.write_str(&row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for RationalMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_any(s)
    }
}

impl TryFrom<Vec<Vec<String>>> for RationalMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<String>>) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl From<RationalMatrix> for Vec<Vec<String>> {
    fn from(m: RationalMatrix) -> Self {
        m.to_string_rows()
    }
}

impl From<&IntegerMatrix> for RationalMatrix {
    fn from(m: &IntegerMatrix) -> Self {
        let entries = m.entries.iter().map(|e| Rational::from(e.clone())).collect();
        Self { n: m.n, entries }
    }
}

/// Square matrix over ℤ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<Integer>,
}

impl IntegerMatrix {
    pub fn new(n: usize, entries: Vec<Integer>) -> Result<Self> {
        check_dim(n)?;
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix from small integer rows; panics on a non-square input.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let entries: Vec<Integer> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.as_ref().len(), n, "square matrix");
                r.as_ref().iter().map(|&v| Integer::from(v))
            })
            .collect();
        Self::new(n, entries).expect("valid dimension")
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Integer) -> Result<Self> {
        check_dim(n)?;
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Ok(Self { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| Integer::from(u8::from(i == j))).expect("valid dimension")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Integer] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Integer] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn det(&self) -> Integer {
        bareiss_det(self.n, self.entries.clone())
    }

    /// True iff the determinant is ±1.
    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut acc = Integer::new();
            for k in 0..n {
                acc += &self[(i, k)] * &other[(k, j)];
            }
            acc
        })
    }

    /// Product with a rational matrix, `self · m`.
    pub fn mul_rational(&self, m: &RationalMatrix) -> Result<RationalMatrix> {
        RationalMatrix::from(self).mul(m)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone()).expect("valid dimension")
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.entries.swap(a * self.n + j, b * self.n + j);
        }
    }

    /// `row[target] += factor · row[source]`.
    pub fn add_row_multiple(&mut self, target: usize, source: usize, factor: &Integer) {
        let n = self.n;
        for j in 0..n {
            let d = Integer::from(factor * &self.entries[source * n + j]);
            self.entries[target * n + j] += d;
        }
    }

    /// `col[target] += factor · col[source]`.
    pub fn add_col_multiple(&mut self, target: usize, source: usize, factor: &Integer) {
        let n = self.n;
        for i in 0..n {
            let d = Integer::from(factor * &self.entries[i * n + source]);
            self.entries[i * n + target] += d;
        }
    }

    fn negate_row(&mut self, r: usize) {
        let n = self.n;
        for e in &mut self.entries[r * n..(r + 1) * n] {
            *e = Integer::from(-&*e);
        }
    }

    /// Replaces rows `(a, b)` by `(s·a + t·b, u·a + v·b)`.
    fn combine_rows(&mut self, a: usize, b: usize, [s, t, u, v]: [&Integer; 4]) {
        let n = self.n;
        for j in 0..n {
            let x = self.entries[a * n + j].clone();
            let y = self.entries[b * n + j].clone();
            self.entries[a * n + j] = Integer::from(s * &x) + Integer::from(t * &y);
            self.entries[b * n + j] = Integer::from(u * &x) + Integer::from(v * &y);
        }
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(Integer::to_string).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for IntegerMatrix {
    type Output = Integer;

    fn index(&self, (i, j): (usize, usize)) -> &Integer {
        &self.entries[i * self.n + j]
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            if i > 0 {
                f.write_str("; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(Integer::to_string).collect();
            f.write_str(&row.join(" "))?;
        }
        Ok(())
    }
}

/// Fraction-free Gaussian elimination on a row-major integer matrix.
fn bareiss_det(n: usize, mut a: Vec<Integer>) -> Integer {
    let mut negate = false;
    let mut prev = Integer::from(1);
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                return Integer::new();
            };
            for j in 0..n {
                a.swap(k * n + j, r * n + j);
            }
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = Integer::from(&a[i * n + j] * &a[k * n + k])
                    - Integer::from(&a[i * n + k] * &a[k * n + j]);
                a[i * n + j] = v.div_exact(&prev);
            }
        }
        prev = a[k * n + k].clone();
    }
    let det = a[n * n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Row-style Hermite normal form.
///
/// Returns `(h, u)` with `u` unimodular and `h = u·m` upper triangular, with
/// positive diagonal and `0 ≤ h[i][j] < h[j][j]` for `i < j`.
pub fn hnf(m: &IntegerMatrix) -> Result<(IntegerMatrix, IntegerMatrix)> {
    if m.det() == 0 {
        return Err(Error::SingularMatrix);
    }
    let n = m.n;
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(n);
    for k in 0..n {
        for i in k + 1..n {
            if h[(i, k)] == 0 {
                continue;
            }
            let a = h[(k, k)].clone();
            let b = h[(i, k)].clone();
            let (g, s, t) = a.clone().gcd_cofactors(b.clone(), Integer::new());
            let u_coef = Integer::from(-&b).div_exact(&g);
            let v_coef = a.div_exact(&g);
            let coefs = [&s, &t, &u_coef, &v_coef];
            h.combine_rows(k, i, coefs);
            u.combine_rows(k, i, coefs);
        }
        if h[(k, k)] < 0 {
            h.negate_row(k);
            u.negate_row(k);
        }
        for i in 0..k {
            let (q, _) = h[(i, k)].clone().div_rem_floor(h[(k, k)].clone());
            if q != 0 {
                let neg = Integer::from(-&q);
                h.add_row_multiple(i, k, &neg);
                u.add_row_multiple(i, k, &neg);
            }
        }
    }
    Ok((h, u))
}

pub fn height(m: &RationalMatrix) -> Integer {
    m.height()
}

pub fn denominator(m: &RationalMatrix) -> Integer {
    m.denominator()
}

pub fn det(m: &RationalMatrix) -> Rational {
    m.det()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn mat(s: &str) -> RationalMatrix {
        RationalMatrix::parse(s).unwrap()
    }

    // Cofactor expansion along the first row.
    fn laplace_det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = Rational::new();
        for c in 0..n {
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = Rational::from(&m[0][c] * &laplace_det(&minor));
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn rows(m: &RationalMatrix) -> Vec<Vec<Rational>> {
        (0..m.n()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn parse_and_format() {
        let m = mat("1/2 3; 0 1");
        assert_eq!(m.to_string(), "1/2 3; 0 1");
        assert_eq!(q("4/6"), Rational::from((2, 3)));
        assert_eq!(q("-0.125"), Rational::from((-1, 8)));
        assert_eq!(q("7"), Rational::from(7));
        assert!(parse_rational("1/0").is_err());
        assert!(RationalMatrix::parse("1 2; 3").is_err());
        let json = RationalMatrix::parse_any(r#"[["1/2", "3"], ["0", "1"]]"#).unwrap();
        assert_eq!(json, m);
    }

    #[test]
    fn height_examples() {
        assert_eq!(RationalMatrix::identity(4).height(), 1);
        assert_eq!(mat("1/2 3; 0 1").height(), 3);
        assert_eq!(mat("5/7 2/3; 1 9").height(), 9);
    }

    #[test]
    fn denominator_examples() {
        let int = IntegerMatrix::from_i64_rows(&[[3, -7], [11, 2]]);
        assert_eq!(RationalMatrix::from(&int).denominator(), 1);
        assert_eq!(mat("1/2 1/3; 1 1").denominator(), 3);
        assert_eq!(mat("1/6 0; 0 1/4").denominator(), 6);
    }

    #[test]
    fn det_examples() {
        assert_eq!(RationalMatrix::identity(5).det(), 1);
        assert_eq!(mat("2 0; 0 3").det(), 6);
        assert_eq!(mat("1/2 1; 1 2").det(), 0);
        assert_eq!(mat("0 1; 1 0").det(), -1);
    }

    #[test]
    fn inverse_round_trip() {
        let m = mat("1/2 3 0; 0 1 -2/3; 5 0 1");
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), RationalMatrix::identity(3));
        assert!(matches!(mat("1 2; 2 4").inverse(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn positive_definite() {
        assert!(mat("4 0; 0 1").is_positive_definite());
        assert!(mat("2 1; 1 2").is_positive_definite());
        assert!(!mat("1 2; 2 1").is_positive_definite());
        assert!(!mat("1 1; 0 1").is_positive_definite());
    }

    #[test]
    fn hnf_examples() {
        let (h, u) = hnf(&IntegerMatrix::identity(3)).unwrap();
        assert_eq!(h, IntegerMatrix::identity(3));
        assert_eq!(u, IntegerMatrix::identity(3));

        let m = IntegerMatrix::from_i64_rows(&[[0, 1], [2, 0]]);
        let (h, u) = hnf(&m).unwrap();
        assert_eq!(h, IntegerMatrix::from_i64_rows(&[[2, 0], [0, 1]]));
        assert_eq!(u, IntegerMatrix::from_i64_rows(&[[0, 1], [1, 0]]));
        assert_eq!(u.mul(&m).unwrap(), h);

        let m = IntegerMatrix::from_i64_rows(&[[2, 4], [0, 2]]);
        let (h, u) = hnf(&m).unwrap();
        assert_eq!(h, IntegerMatrix::from_i64_rows(&[[2, 0], [0, 2]]));
        assert_eq!(u, IntegerMatrix::from_i64_rows(&[[1, -2], [0, 1]]));

        let singular = IntegerMatrix::from_i64_rows(&[[1, 2], [2, 4]]);
        assert!(matches!(hnf(&singular), Err(Error::SingularMatrix)));
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(
            RationalMatrix::new(17, vec![Rational::new(); 289]),
            Err(Error::DimensionOutOfRange(17))
        ));
        assert!(RationalMatrix::new(0, vec![]).is_err());
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-20i64..=20, 1i64..=9).prop_map(|(a, b)| Rational::from((a, b)))
    }

    fn rational_matrix(max_n: usize) -> impl Strategy<Value = RationalMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(small_rational(), n * n)
                .prop_map(move |e| RationalMatrix::new(n, e).unwrap())
        })
    }

    fn nonsingular_integer_matrix(max_n: usize) -> impl Strategy<Value = IntegerMatrix> {
        (1..=max_n)
            .prop_flat_map(|n| {
                prop::collection::vec(-9i64..=9, n * n).prop_map(move |e| {
                    IntegerMatrix::new(n, e.into_iter().map(Integer::from).collect()).unwrap()
                })
            })
            .prop_filter("nonsingular", |m| m.det() != 0)
    }

    fn pair(max_n: usize) -> impl Strategy<Value = (RationalMatrix, RationalMatrix)> {
        (1..=max_n).prop_flat_map(|n| {
            let one = move || {
                prop::collection::vec(small_rational(), n * n)
                    .prop_map(move |e| RationalMatrix::new(n, e).unwrap())
            };
            (one(), one())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn det_is_multiplicative((a, b) in pair(5)) {
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.det(), a.det() * b.det());
        }

        #[test]
        fn bareiss_matches_laplace(m in rational_matrix(5)) {
            prop_assert_eq!(m.det(), laplace_det(&rows(&m)));
        }

        #[test]
        fn hnf_certificate(m in nonsingular_integer_matrix(5)) {
            let (h, u) = hnf(&m).unwrap();
            prop_assert_eq!(u.mul(&m).unwrap(), h.clone());
            prop_assert_eq!(u.det().abs(), 1);
            prop_assert_eq!(h.det().abs(), m.det().abs());
            let n = h.n();
            for i in 0..n {
                prop_assert!(h[(i, i)] > 0);
                for j in 0..n {
                    if i > j {
                        prop_assert_eq!(&h[(i, j)], &Integer::new());
                    } else if i < j {
                        prop_assert!(h[(i, j)] >= 0 && h[(i, j)] < h[(j, j)]);
                    }
                }
            }
        }

        #[test]
        fn results_stay_in_lowest_terms((a, b) in pair(4)) {
            let prod = a.mul(&b).unwrap();
            let det = prod.det();
            for e in prod.entries().iter().chain(std::iter::once(&det)) {
                prop_assert_eq!(Integer::from(e.numer().gcd_ref(e.denom())), 1);
                prop_assert!(*e.denom() >= 1);
            }
        }

        #[test]
        fn height_bounded_by_denominator_times_size(m in rational_matrix(5)) {
            // H(γ) ≤ D·max(1, ⌈max |γ_ij|⌉)
            let d = m.denominator();
            let max_abs = m.entries().iter().map(|e| e.clone().abs()).max().unwrap();
            let ceil = Integer::from(max_abs.ceil_ref()).max(Integer::from(1));
            prop_assert!(m.height() <= d * ceil);
        }
    }
}
