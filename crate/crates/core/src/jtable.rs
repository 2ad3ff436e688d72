//! Transition tables J(i,l) over k disk centers.
//!
//! `j ∈ J(i,l)` when the disk `D_R(x_j + a·x_l)` has a biholomorphic preimage in `D_r(x_i)`
//! under the (rescaled) entire function. Symbols are zero-based here: `0..k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::winding::{biholo_preimage_test, Disk, PreimageVerdict};
use crate::C64;

/// Abstract transition sets `J(i,l) ⊆ {0..k}` indexed by `(i, l)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionTable {
    k: usize,
    sets: Vec<Vec<usize>>,
}

impl TransitionTable {
    /// `sets[i * k + l]` is J(i,l). Entries are sorted and deduplicated.
    pub fn new(k: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("alphabet must be nonempty"));
        }
        if sets.len() != k * k {
            return Err(Error::InvalidParameter("transition table must have k*k entries"));
        }
        for s in &mut sets {
            if s.iter().any(|&j| j >= k) {
                return Err(Error::InvalidParameter("transition symbol out of range"));
            }
            s.sort_unstable();
            s.dedup();
        }
        Ok(TransitionTable { k, sets })
    }

    /// Every J(i,l) equal to the whole alphabet.
    pub fn full(k: usize) -> Self {
        TransitionTable { k, sets: (0..k * k).map(|_| (0..k).collect()).collect() }
    }

    /// Every J(i,l) empty.
    pub fn empty(k: usize) -> Self {
        TransitionTable { k, sets: (0..k * k).map(|_| Vec::new()).collect() }
    }

    /// A table with `|J(i,l)| = k − 2` everywhere: J(i,l) omits `(i+l) mod k` and
    /// `(i+l+1) mod k`.
    pub fn uniform_k_minus_2(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidParameter("k - 2 table needs k >= 3"));
        }
        let sets = (0..k * k)
            .map(|idx| {
                let (i, l) = (idx / k, idx % k);
                let skip = [(i + l) % k, (i + l + 1) % k];
                (0..k).filter(|j| !skip.contains(j)).collect()
            })
            .collect();
        TransitionTable::new(k, sets)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, l: usize) -> &[usize] {
        &self.sets[i * self.k + l]
    }

    pub fn contains(&self, i: usize, l: usize, j: usize) -> bool {
        self.get(i, l).binary_search(&j).is_ok()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// `min_{i,l} |J(i,l)|`.
    pub fn min_cardinality(&self) -> usize {
        self.sets.iter().map(Vec::len).min().unwrap_or(0)
    }
}

pub fn jtable_min_cardinality(t: &TransitionTable) -> usize {
    t.min_cardinality()
}

/// Whether every J(i,l) has at least k − 2 elements.
pub fn meets_k_minus_2(t: &TransitionTable) -> bool {
    t.min_cardinality() + 2 >= t.k()
}

#[derive(Clone, Debug, PartialEq)]
pub struct JTable {
    pub centers: Vec<C64>,
    pub r: f64,
    pub big_r: f64,
    pub a: C64,
    pub membership: TransitionTable,
    /// Targets for which some contour test could not be resolved.
    pub inconclusive: TransitionTable,
    /// Rows whose inconclusive entries outnumber their confirmed ones.
    pub flagged_rows: Vec<usize>,
}

impl JTable {
    pub fn k(&self) -> usize {
        self.membership.k()
    }

    pub fn min_cardinality(&self) -> usize {
        self.membership.min_cardinality()
    }
}

/// Checks k ≥ 3, pairwise disjoint closed disks of radius R, `0 < r < R` and `|a|r < R − r`.
pub fn validate_geometry(centers: &[C64], r: f64, big_r: f64, a: C64) -> Result<()> {
    if centers.len() < 3 {
        return Err(Error::InvalidParameter("need at least three centers"));
    }
    if !(r > 0.0 && r < big_r) {
        return Err(Error::InvalidParameter("radii must satisfy 0 < r < R"));
    }
    if a.norm() == 0.0 {
        return Err(Error::InvalidParameter("a must be nonzero"));
    }
    if a.norm() * r >= big_r - r {
        return Err(Error::InvalidParameter("radii must satisfy |a| r < R - r"));
    }
    for (i, x) in centers.iter().enumerate() {
        for y in &centers[i + 1..] {
            if (x - y).norm() <= 2.0 * big_r {
                return Err(Error::InvalidParameter("closed disks D_R(x_i) must be pairwise disjoint"));
            }
        }
    }
    Ok(())
}

/// The `(i, l)` cell: confirmed and inconclusive `j`, in increasing order.
pub fn jtable_cell(
    f: &Expr,
    a: C64,
    centers: &[C64],
    r: f64,
    big_r: f64,
    density: usize,
    i: usize,
    l: usize,
) -> (Vec<usize>, Vec<usize>) {
    let source = Disk::new(centers[i], r);
    let mut yes = Vec::new();
    let mut unsure = Vec::new();
    for (j, xj) in centers.iter().enumerate() {
        let target = Disk::new(xj + a * centers[l], big_r);
        match biholo_preimage_test(f, source, target, density) {
            PreimageVerdict::Yes => yes.push(j),
            PreimageVerdict::Inconclusive => unsure.push(j),
            PreimageVerdict::No => {}
        }
    }
    (yes, unsure)
}

/// Assembles a table from cells listed in `(i, l)` row-major order.
pub fn assemble_jtable(
    centers: &[C64],
    r: f64,
    big_r: f64,
    a: C64,
    cells: Vec<(Vec<usize>, Vec<usize>)>,
) -> Result<JTable> {
    let k = centers.len();
    let (yes, unsure): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
    let membership = TransitionTable::new(k, yes)?;
    let inconclusive = TransitionTable::new(k, unsure)?;
    let flagged_rows = (0..k)
        .filter(|&i| {
            let sure: usize = (0..k).map(|l| membership.get(i, l).len()).sum();
            let unsure: usize = (0..k).map(|l| inconclusive.get(i, l).len()).sum();
            unsure > sure
        })
        .collect();
    Ok(JTable { centers: centers.to_vec(), r, big_r, a, membership, inconclusive, flagged_rows })
}

/// Builds J(i,l) for all pairs by biholomorphic-preimage tests on polar target grids.
pub fn build_jtable(f: &Expr, a: C64, centers: &[C64], r: f64, big_r: f64, density: usize) -> Result<JTable> {
    validate_geometry(centers, r, big_r, a)?;
    let k = centers.len();
    let cells = (0..k * k)
        .map(|idx| jtable_cell(f, a, centers, r, big_r, density, idx / k, idx % k))
        .collect();
    assemble_jtable(centers, r, big_r, a, cells)
}
