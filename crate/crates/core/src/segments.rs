//! Leading entries, segments (the finest interval partition making a matrix
//! block upper triangular) and witnessing sequences between indices of the
//! same segment.

use std::fmt;
use std::ops::RangeInclusive;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::decomp::RealMatrix;
use crate::error::{Error, Result};
use crate::exactmat::{Rational, RationalMatrix};

/// Leftmost nonzero entry of a row, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeadingEntry {
    pub row: usize,
    pub col: usize,
}

impl LeadingEntry {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for LeadingEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl From<(usize, usize)> for LeadingEntry {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

/// Partition of `{1..n}` into consecutive intervals, stored by start index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SegmentPartition {
    n: usize,
    starts: Vec<usize>,
}

impl SegmentPartition {
    /// Builds a partition from sorted 1-based start indices; the first must be 1.
    pub fn from_starts(n: usize, starts: Vec<usize>) -> Result<Self> {
        let valid = starts.first() == Some(&1)
            && starts.windows(2).all(|w| w[0] < w[1])
            && starts.last().is_some_and(|&s| s <= n);
        if !valid {
            return Err(Error::InvalidArgument(format!(
                "segment starts {starts:?} are not a sorted list beginning at 1 within 1..={n}"
            )));
        }
        Ok(Self { n, starts })
    }

    /// Partition with a single block.
    pub fn whole(n: usize) -> Self {
        Self { n, starts: vec![1] }
    }

    /// Partition into singletons.
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            starts: (1..=n).collect(),
        }
    }

    /// Parses the display form, e.g. `{1},{2,3}`.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut starts = Vec::new();
        let mut expected = 1;
        for block in text.split('}') {
            let block = block.trim().trim_start_matches(',').trim();
            if block.is_empty() {
                continue;
            }
            let inner = block
                .strip_prefix('{')
                .ok_or_else(|| Error::Parse(format!("bad segment block {block:?}")))?;
            let members = inner
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            for (off, &k) in members.iter().enumerate() {
                if k != expected + off {
                    return Err(Error::Parse(format!("segment {{{inner}}} is not the next interval")));
                }
            }
            starts.push(expected);
            expected += members.len();
        }
        if expected != n + 1 {
            return Err(Error::Parse(format!("segments {text:?} do not cover 1..={n}")));
        }
        Self::from_starts(n, starts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Segments as inclusive 1-based ranges.
    pub fn segments(&self) -> Vec<RangeInclusive<usize>> {
        let mut out = Vec::with_capacity(self.starts.len());
        for (idx, &s) in self.starts.iter().enumerate() {
            let end = self.starts.get(idx + 1).map_or(self.n, |&next| next - 1);
            out.push(s..=end);
        }
        out
    }

    /// 0-based index of the segment containing the 1-based index `k`.
    pub fn segment_of(&self, k: usize) -> usize {
        assert!((1..=self.n).contains(&k), "index {k} outside 1..={}", self.n);
        self.starts.partition_point(|&s| s <= k) - 1
    }

    pub fn same_segment(&self, i: usize, j: usize) -> bool {
        self.segment_of(i) == self.segment_of(j)
    }

    /// True if every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SegmentPartition) -> bool {
        self.n == other.n && other.starts.iter().all(|s| self.starts.contains(s))
    }
}

impl fmt::Display for SegmentPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, seg) in self.segments().into_iter().enumerate() {
            if idx > 0 {
                f.write_str(",")?;
            }
            let members: Vec<String> = seg.map(|k| k.to_string()).collect();
            write!(f, "{{{}}}", members.join(","))?;
        }
        Ok(())
    }
}

fn leading_col(gamma: &RationalMatrix, i: usize) -> Option<usize> {
    (0..gamma.n()).find(|&j| gamma[(i, j)] != 0)
}

/// Leading entry of every row, 1-based.
pub fn leading_entries(gamma: &RationalMatrix) -> Result<Vec<LeadingEntry>> {
    (0..gamma.n())
        .map(|i| {
            leading_col(gamma, i)
                .map(|j| LeadingEntry::new(i + 1, j + 1))
                .ok_or(Error::SingularMatrix)
        })
        .collect()
}

/// Finest interval partition with respect to which `gamma` is block upper
/// triangular.
///
/// A new segment starts after column `k` exactly when rows `k+1..n`
/// vanish in columns `1..k`.
pub fn segment_partition(gamma: &RationalMatrix) -> Result<SegmentPartition> {
    let n = gamma.n();
    let leading = leading_entries(gamma)?;
    // lowest row whose leading entry lies in columns 1..=k
    let mut reach = vec![0usize; n + 1];
    for e in &leading {
        reach[e.col] = reach[e.col].max(e.row);
    }
    let mut starts = vec![1];
    let mut lowest = 0;
    for k in 1..n {
        lowest = lowest.max(reach[k]);
        if lowest <= k {
            starts.push(k + 1);
        }
    }
    Ok(SegmentPartition { n, starts })
}

/// Chain of leading entries `(i_1,j_1),…,(i_s,j_s)` with `i ≤ i_1`,
/// `j_p ≤ i_{p+1}` and `j_s ≤ j`, for `i > j` in the same segment.
///
/// Walks down from `k = i`, each time taking the leading entry with the
/// smallest column among those with `j' < k ≤ i'`. Repeated rows and rows
/// equal to `j` are then cut out by deleting the enclosed subsequence.
pub fn witnessing_sequence(gamma: &RationalMatrix, i: usize, j: usize) -> Result<Vec<LeadingEntry>> {
    let n = gamma.n();
    if !(1..=n).contains(&i) || !(1..=n).contains(&j) || i <= j {
        return Err(Error::NotSameSegment { i, j });
    }
    let leading = leading_entries(gamma)?;
    let part = segment_partition(gamma)?;
    if !part.same_segment(i, j) {
        return Err(Error::NotSameSegment { i, j });
    }
    let mut raw = Vec::new();
    let mut k = i;
    while k > j {
        let step = leading
            .iter()
            .filter(|e| e.col < k && k <= e.row)
            .min_by(|a, b| a.col.cmp(&b.col).then(b.row.cmp(&a.row)))
            .copied()
            .ok_or(Error::NotSameSegment { i, j })?;
        raw.push(step);
        k = step.col;
    }
    Ok(prune_sequence(raw, j))
}

/// Deletes enclosed subsequences so that rows are distinct and differ from `j`.
fn prune_sequence(mut seq: Vec<LeadingEntry>, j: usize) -> Vec<LeadingEntry> {
    let mut p = 0;
    while p < seq.len() {
        if let Some(q) = seq[..p].iter().position(|e| e.row == seq[p].row) {
            // i_q = i_p, so the link into q still holds for entry p
            seq.drain(q..p);
            p = q;
            continue;
        }
        p += 1;
    }
    seq
        .iter()
        .position(|e| e.row == j)
        .map_or(seq.clone(), |cut| seq[..cut].to_vec())
}

/// Checks condition `i ≤ i_1`, `j_p ≤ i_{p+1}`, `j_s ≤ j` for a sequence of
/// leading entries of `gamma`.
pub fn satisfies_chain_condition(
    gamma: &RationalMatrix,
    seq: &[LeadingEntry],
    i: usize,
    j: usize,
) -> Result<bool> {
    let leading = leading_entries(gamma)?;
    let (Some(first), Some(last)) = (seq.first(), seq.last()) else {
        return Ok(false);
    };
    let all_leading = seq.iter().all(|e| leading.contains(e));
    let linked = seq.windows(2).all(|w| w[0].col <= w[1].row);
    Ok(all_leading && i <= first.row && linked && last.col <= j)
}

/// Entry access shared by exact and floating matrices for the block tests.
pub trait BlockEntries {
    fn dim(&self) -> usize;
    /// `|m_ij| ≤ tol`, 0-based.
    fn entry_within(&self, i: usize, j: usize, tol: f64) -> bool;
}

impl BlockEntries for RationalMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn entry_within(&self, i: usize, j: usize, tol: f64) -> bool {
        let v = &self[(i, j)];
        if tol == 0.0 {
            return *v == 0;
        }
        let tol = Rational::from_f64(tol).unwrap_or_default();
        Rational::from(v.abs_ref()) <= tol
    }
}

impl BlockEntries for RealMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn entry_within(&self, i: usize, j: usize, tol: f64) -> bool {
        self[(i, j)].clone().abs() <= tol
    }
}

/// Every entry strictly below the block diagonal has `|entry| ≤ tol`.
pub fn in_block_upper<M: BlockEntries + ?Sized>(m: &M, part: &SegmentPartition, tol: f64) -> bool {
    check_blocks(m, part, tol, |si, sj| si > sj)
}

/// Every entry outside the diagonal blocks has `|entry| ≤ tol`.
pub fn in_block_diagonal<M: BlockEntries + ?Sized>(m: &M, part: &SegmentPartition, tol: f64) -> bool {
    check_blocks(m, part, tol, |si, sj| si != sj)
}

fn check_blocks<M: BlockEntries + ?Sized>(
    m: &M,
    part: &SegmentPartition,
    tol: f64,
    outside: impl Fn(usize, usize) -> bool,
) -> bool {
    let n = m.dim();
    if n != part.n() {
        return false;
    }
    (0..n).all(|i| {
        (0..n).all(|j| !outside(part.segment_of(i + 1), part.segment_of(j + 1)) || m.entry_within(i, j, tol))
    })
}

/// Largest `|m_pq|` over positions in different segments.
pub fn off_block_max(m: &RealMatrix, part: &SegmentPartition) -> Float {
    let n = m.n();
    let mut best = m.precision().zero();
    for p in 0..n {
        for q in 0..n {
            if !part.same_segment(p + 1, q + 1) {
                let v = m[(p, q)].clone().abs();
                if v > best {
                    best = v;
                }
            }
        }
    }
    best
}
