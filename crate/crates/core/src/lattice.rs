//! Multi-index and partition combinatorics.
//!
//! Multi-indices enumerate the monomial basis of the truncated Bergman space,
//! partitions group the coordinates into blocks, and fiber labels record the
//! block degrees `|alpha_(j)|` that a quasi-radial Toeplitz operator sees.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A point of the lattice `Z_+^n`, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `ln(alpha!)`.
    pub fn ln_factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| crate::special::ln_factorial(a))
            .sum()
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        MultiIndex(v)
    }

    /// Splits into the first `at` entries and the rest.
    pub fn split_at(&self, at: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(at);
        (MultiIndex(a.to_vec()), MultiIndex(b.to_vec()))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        graded_lex(&self.0, &other.0)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

/// Block degrees `s = (|alpha_(1)|, ..., |alpha_(m)|)` labelling a fiber `H_s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiberLabel(Vec<u32>);

impl FiberLabel {
    pub fn new(s: Vec<u32>) -> Self {
        FiberLabel(s)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl From<Vec<u32>> for FiberLabel {
    fn from(v: Vec<u32>) -> Self {
        FiberLabel(v)
    }
}

impl Ord for FiberLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        graded_lex(&self.0, &other.0)
    }
}

impl PartialOrd for FiberLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FiberLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.0)
    }
}

fn graded_lex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u64 = a.iter().map(|&x| x as u64).sum();
    let db: u64 = b.iter().map(|&x| x as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

fn write_tuple(f: &mut fmt::Formatter<'_>, v: &[u32]) -> fmt::Result {
    write!(f, "(")?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

/// A composition `k = (k_1, ..., k_m)` of the dimension `n` into coordinate blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<usize>,
    n: usize,
}

impl Partition {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        if blocks.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "block sizes must be positive: {blocks:?}"
            )));
        }
        let n = blocks.iter().sum();
        Ok(Partition { blocks, n })
    }

    /// The one-block partition `(n)`; radial symbols.
    pub fn radial(n: usize) -> Result<Self> {
        Partition::new(vec![n])
    }

    /// The partition `(1, ..., 1)`; separately radial symbols.
    pub fn separate(n: usize) -> Result<Self> {
        Partition::new(vec![1; n])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    /// Coordinate range of block `j` (0-based).
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.blocks[..j].iter().sum();
        start..start + self.blocks[j]
    }

    /// Cumulative block boundaries, excluding 0 and including n.
    fn cuts(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, &k| {
                *acc += k;
                Some(*acc)
            })
            .collect()
    }

    /// Drops the last block: `(k_1, ..., k_{m-1})`.
    pub fn without_last(&self) -> Result<Partition> {
        if self.m() < 2 {
            return Err(Error::InvalidPartition(format!(
                "{:?} has no block to drop",
                self.blocks
            )));
        }
        Partition::new(self.blocks[..self.m() - 1].to_vec())
    }

    /// `(self, extra)`.
    pub fn append(&self, extra: usize) -> Result<Partition> {
        let mut b = self.blocks.clone();
        b.push(extra);
        Partition::new(b)
    }

    /// Every composition of `n`, in lexicographic order of the block lists.
    pub fn all_of(n: usize) -> Vec<Partition> {
        fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
            if rest == 0 {
                out.push(Partition::new(cur.clone()).expect("positive blocks"));
                return;
            }
            for k in 1..=rest {
                cur.push(k);
                rec(rest - k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(n, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// Binomial coefficient with overflow detection.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > i64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of multi-indices in `n` variables of total degree at most `cap`.
pub fn truncation_size(n: usize, cap: u32) -> Result<u64> {
    binomial(cap as u64 + n as u64, n as u64).ok_or(Error::Overflow { n, cap })
}

/// All `alpha` in `Z_+^n` with `|alpha| <= cap`, in graded-lex order.
pub fn enumerate_multi_indices(n: usize, cap: u32) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    let count = truncation_size(n, cap)?;
    let mut out = Vec::with_capacity(count as usize);
    for d in 0..=cap {
        for v in compositions(d, n) {
            out.push(MultiIndex(v));
        }
    }
    Ok(out)
}

/// Weak compositions of `total` into `parts` nonnegative entries, lex ascending.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=rest {
            cur.push(first);
            rec(rest - first, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// All fiber labels `s` in `Z_+^m` with `|s| <= cap`, graded-lex.
pub fn enumerate_labels(m: usize, cap: u32) -> Vec<FiberLabel> {
    (0..=cap)
        .flat_map(|d| compositions(d, m).into_iter().map(FiberLabel))
        .collect()
}

/// Block sums of `alpha` with respect to `k`.
pub fn group_norms(alpha: &MultiIndex, k: &Partition) -> Result<FiberLabel> {
    if alpha.dim() != k.n() {
        return Err(Error::DimensionMismatch {
            expected: k.n(),
            got: alpha.dim(),
        });
    }
    let s = (0..k.m())
        .map(|j| alpha.0[k.block_range(j)].iter().sum())
        .collect();
    Ok(FiberLabel(s))
}

/// `d_l = C(l + n - 1, n - 1)`, the number of monomials of degree `l` in `n` variables.
pub fn homogeneous_dimension(n: usize, ell: u32) -> Result<u64> {
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    binomial(ell as u64 + n as u64 - 1, n as u64 - 1).ok_or(Error::Overflow { n, cap: ell })
}

/// `dim H_s = prod_j C(s_j + k_j - 1, k_j - 1)`.
pub fn fiber_dimension(k: &Partition, s: &FiberLabel) -> Result<u64> {
    check_label(k, s)?;
    let mut acc: u64 = 1;
    for (j, &sj) in s.0.iter().enumerate() {
        let d = homogeneous_dimension(k.blocks[j], sj)?;
        acc = acc.checked_mul(d).ok_or(Error::Overflow {
            n: k.n(),
            cap: s.total(),
        })?;
    }
    Ok(acc)
}

pub(crate) fn check_label(k: &Partition, s: &FiberLabel) -> Result<()> {
    if s.len() != k.m() {
        return Err(Error::DimensionMismatch {
            expected: k.m(),
            got: s.len(),
        });
    }
    Ok(())
}

/// Basis multi-indices spanning `H_s`, graded-lex.
pub fn fiber(k: &Partition, s: &FiberLabel, cap: u32) -> Result<Vec<MultiIndex>> {
    check_label(k, s)?;
    if s.total() > cap {
        return Err(Error::CapExceeded {
            label: s.0.clone(),
            cap,
        });
    }
    let mut acc: Vec<Vec<u32>> = vec![Vec::with_capacity(k.n())];
    for (j, &sj) in s.0.iter().enumerate() {
        let parts = compositions(sj, k.blocks[j]);
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                parts.iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    v
                })
            })
            .collect();
    }
    let mut out: Vec<MultiIndex> = acc.into_iter().map(MultiIndex).collect();
    out.sort();
    Ok(out)
}

/// `k1 <= k2` in the refinement order: each block of `k1` is a sum of
/// consecutive blocks of `k2`. Coordinates are never permuted.
pub fn partition_preceq(k1: &Partition, k2: &Partition) -> Result<bool> {
    if k1.n() != k2.n() {
        return Err(Error::DimensionMismatch {
            expected: k1.n(),
            got: k2.n(),
        });
    }
    let fine = k2.cuts();
    Ok(k1.cuts().iter().all(|c| fine.contains(c)))
}

/// Maps a label of the finer partition `fine` to the label of `coarse` by
/// summing the fine blocks inside each coarse block. Requires `coarse <= fine`.
pub fn coarsen_label(
    fine_label: &FiberLabel,
    fine: &Partition,
    coarse: &Partition,
) -> Result<FiberLabel> {
    check_label(fine, fine_label)?;
    if !partition_preceq(coarse, fine)? {
        return Err(Error::NotRefinement {
            coarse: coarse.blocks.clone(),
            fine: fine.blocks.clone(),
        });
    }
    let mut out = Vec::with_capacity(coarse.m());
    let mut fi = 0;
    for &cb in &coarse.blocks {
        let mut width = 0;
        let mut sum = 0;
        while width < cb {
            width += fine.blocks[fi];
            sum += fine_label.0[fi];
            fi += 1;
        }
        out.push(sum);
    }
    Ok(FiberLabel(out))
}
