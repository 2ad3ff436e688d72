//! Grid estimates of topological entropy on the quotient box, and area growth of lines.
//!
//! Orbits of grid points under the induced map are tabulated once; separated and covering
//! counts are then greedy passes over that table in grid order.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{Error, Result};
use crate::quotient::{point_metric, MetricForm, QuotientBox};
use crate::shiftlike::{CVec, Dynamics};
use crate::{sup_dist, C64};

/// A finite sample set of Δ̄, stored flat.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    dim: usize,
    points: Vec<C64>,
    spacing: f64,
}

fn lattice(r: f64, res: usize) -> Vec<C64> {
    let coord = |i: usize| if res == 1 { 0.0 } else { -r + 2.0 * r * i as f64 / (res - 1) as f64 };
    let mut out = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let t = C64::new(coord(i), coord(j));
            if t.norm() < r {
                out.push(t);
            }
        }
    }
    out
}

impl SampleGrid {
    pub fn from_points(dim: usize, points: &[CVec], spacing: f64) -> Result<Self> {
        let mut flat = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
            flat.extend_from_slice(p);
        }
        Ok(SampleGrid { dim, points: flat, spacing })
    }

    /// A `res × res` lattice on `[−r, r]²` in coordinate `axis`, the other coordinates fixed
    /// at `base`; lattice points outside the open disk are dropped. Order: real part outer,
    /// imaginary part inner.
    pub fn line(q: &QuotientBox, base: &[C64], axis: usize, res: usize) -> Result<Self> {
        if base.len() != q.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), found: base.len() });
        }
        if axis >= q.dim() || res == 0 {
            return Err(Error::InvalidParameter("line axis or resolution out of range"));
        }
        let mut points = Vec::new();
        for t in lattice(q.radius(), res) {
            let start = points.len();
            points.extend_from_slice(base);
            points[start + axis] = t;
            if !q.in_open(&points[start..]) {
                points.truncate(start);
            }
        }
        Ok(SampleGrid { dim: q.dim(), points, spacing: spacing(q.radius(), res) })
    }

    /// The product of `res × res` disk lattices in every coordinate, lexicographic order.
    pub fn product(q: &QuotientBox, res: usize) -> Result<Self> {
        let disk = lattice(q.radius(), res);
        let total = disk
            .len()
            .checked_pow(q.dim() as u32)
            .filter(|&t| t <= 1 << 24)
            .ok_or(Error::InvalidParameter("product grid too large"))?;
        let mut points = Vec::with_capacity(total * q.dim());
        for idx in 0..total {
            let mut x = idx;
            let start = points.len();
            points.resize(start + q.dim(), C64::new(0.0, 0.0));
            for c in (0..q.dim()).rev() {
                points[start + c] = disk[x % disk.len()];
                x /= disk.len();
            }
        }
        Ok(SampleGrid { dim: q.dim(), points, spacing: spacing(q.radius(), res) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[C64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Lattice spacing used to build the grid.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// The image grid under `z ↦ s·z`, same order.
    pub fn scaled(&self, s: f64) -> SampleGrid {
        SampleGrid { dim: self.dim, points: self.points.iter().map(|z| z * s).collect(), spacing: self.spacing * s }
    }

    /// The points whose flag is set, in order.
    pub fn select(&self, keep: &[bool]) -> SampleGrid {
        let mut points = Vec::new();
        for (i, _) in keep.iter().enumerate().filter(|(_, &k)| k) {
            points.extend_from_slice(self.point(i));
        }
        SampleGrid { dim: self.dim, points, spacing: self.spacing }
    }

    /// The grid points lying in `D_n`, i.e. not collapsed by `n` steps of the induced map.
    pub fn surviving<D: Dynamics + ?Sized>(&self, q: &QuotientBox, map: &D, n: usize) -> Result<SampleGrid> {
        let mut points = Vec::new();
        for i in 0..self.len() {
            if survives(q, map, self.point(i), n)? {
                points.extend_from_slice(self.point(i));
            }
        }
        Ok(SampleGrid { dim: self.dim, points, spacing: self.spacing })
    }
}

fn spacing(r: f64, res: usize) -> f64 {
    if res <= 1 {
        2.0 * r
    } else {
        2.0 * r / (res - 1) as f64
    }
}

/// Advances one step of the induced map in place; returns false on collapse.
fn induced_step<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, cur: &mut Vec<C64>, tmp: &mut Vec<C64>) -> Result<bool> {
    for _ in 0..q.nu() {
        match map.step(cur, tmp) {
            Ok(()) => core::mem::swap(cur, tmp),
            Err(Error::Range) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(q.in_open(cur))
}

/// Whether `z` stays in the open box for `n` steps of the induced map.
pub fn survives<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, z: &[C64], n: usize) -> Result<bool> {
    if !q.in_closed(z) {
        return Err(Error::OutsideBox);
    }
    if q.on_outgoing_boundary(z) {
        return Ok(false);
    }
    let mut cur = z.to_vec();
    let mut tmp = vec![C64::new(0.0, 0.0); z.len()];
    for _ in 0..n {
        if !induced_step(q, map, &mut cur, &mut tmp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first `n` induced iterates of one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    coords: Vec<C64>,
    delta: Vec<f64>,
    collapsed: Vec<bool>,
}

pub fn orbit_row<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, z: &[C64], n: usize) -> Result<OrbitRow> {
    if z.len() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: z.len() });
    }
    if !q.in_closed(z) {
        return Err(Error::OutsideBox);
    }
    let dim = q.dim();
    let mut row = OrbitRow {
        coords: vec![C64::new(0.0, 0.0); n * dim],
        delta: vec![0.0; n],
        collapsed: vec![true; n],
    };
    let mut cur = z.to_vec();
    let mut tmp = vec![C64::new(0.0, 0.0); dim];
    let mut alive = !q.on_outgoing_boundary(z);
    for j in 0..n {
        if !alive {
            break;
        }
        row.coords[j * dim..(j + 1) * dim].copy_from_slice(&cur);
        row.delta[j] = q.boundary_distance(&cur);
        row.collapsed[j] = false;
        if j + 1 < n {
            alive = induced_step(q, map, &mut cur, &mut tmp)?;
        }
    }
    Ok(row)
}

/// Induced orbits of every grid point up to a fixed horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTable {
    dim: usize,
    horizon: usize,
    form: MetricForm,
    rows: Vec<OrbitRow>,
}

impl OrbitTable {
    pub fn build<D: Dynamics + ?Sized>(
        q: &QuotientBox,
        map: &D,
        grid: &SampleGrid,
        horizon: usize,
        form: MetricForm,
    ) -> Result<Self> {
        let rows = (0..grid.len())
            .map(|i| orbit_row(q, map, grid.point(i), horizon))
            .collect::<Result<Vec<_>>>()?;
        OrbitTable::from_rows(q.dim(), horizon, form, rows)
    }

    /// Rows in grid order, e.g. computed in parallel by the caller.
    pub fn from_rows(dim: usize, horizon: usize, form: MetricForm, rows: Vec<OrbitRow>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidParameter("orbit horizon must be at least 1"));
        }
        if rows.iter().any(|r| r.delta.len() != horizon || r.coords.len() != horizon * dim) {
            return Err(Error::InvalidParameter("orbit rows do not match the horizon"));
        }
        Ok(OrbitTable { dim, horizon, form, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    fn step_distance(&self, a: usize, b: usize, j: usize, eps: f64) -> f64 {
        let (ra, rb) = (&self.rows[a], &self.rows[b]);
        match (ra.collapsed[j], rb.collapsed[j]) {
            (true, true) => 0.0,
            (true, false) => rb.delta[j],
            (false, true) => ra.delta[j],
            (false, false) => {
                let (da, db) = (ra.delta[j], rb.delta[j]);
                // Under the min form the distance never exceeds the smaller boundary distance.
                if self.form == MetricForm::Min && da.min(db) < eps {
                    return da.min(db);
                }
                let d = sup_dist(&ra.coords[j * self.dim..(j + 1) * self.dim], &rb.coords[j * self.dim..(j + 1) * self.dim]);
                point_metric(self.form, d, da, db)
            }
        }
    }

    /// `max_{0 ≤ j < n} d̃(F̃ʲa, F̃ʲb)`.
    pub fn distance(&self, a: usize, b: usize, n: usize) -> f64 {
        (0..n.min(self.horizon)).fold(0.0, |m, j| m.max(self.step_distance(a, b, j, f64::NEG_INFINITY)))
    }

    /// Whether the orbits of `a` and `b` are `(n, ε)`-separated.
    pub fn separated(&self, a: usize, b: usize, n: usize, eps: f64) -> bool {
        (0..n.min(self.horizon)).any(|j| self.step_distance(a, b, j, eps) >= eps)
    }
}

/// Greedy maximal `(n, ε)`-separated subset in grid order; returns the chosen indices.
pub fn separated_indices(table: &OrbitTable, n: usize, eps: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..table.len() {
        // Recently chosen points are the likeliest to be close in grid order.
        if chosen.iter().rev().all(|&s| table.separated(i, s, n, eps)) {
            chosen.push(i);
        }
    }
    chosen
}

pub fn separated_set_lower(table: &OrbitTable, n: usize, eps: f64) -> usize {
    separated_indices(table, n, eps).len()
}

/// Indices within orbit distance `< ε` of `i` (including `i`), increasing.
pub fn neighbors(table: &OrbitTable, i: usize, n: usize, eps: f64) -> Vec<u32> {
    (0..table.len())
        .filter(|&j| j == i || !table.separated(i, j, n, eps))
        .map(|j| j as u32)
        .collect()
}

/// Greedy set cover: repeatedly take the point covering the most uncovered points, ties by
/// smallest index.
pub fn greedy_cover(lists: &[Vec<u32>]) -> usize {
    let mut covered = vec![false; lists.len()];
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> =
        lists.iter().enumerate().map(|(i, l)| (l.len(), Reverse(i))).collect();
    let mut remaining = lists.len();
    let mut picks = 0;
    while remaining > 0 {
        let Some((stale, Reverse(i))) = heap.pop() else { break };
        let gain = lists[i].iter().filter(|&&j| !covered[j as usize]).count();
        if gain == 0 {
            continue;
        }
        if gain < stale {
            heap.push((gain, Reverse(i)));
            continue;
        }
        for &j in &lists[i] {
            if !covered[j as usize] {
                covered[j as usize] = true;
                remaining -= 1;
            }
        }
        picks += 1;
    }
    picks
}

pub fn covering_upper(table: &OrbitTable, n: usize, eps: f64) -> usize {
    let lists: Vec<Vec<u32>> = (0..table.len()).map(|i| neighbors(table, i, n, eps)).collect();
    greedy_cover(&lists)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub n: usize,
    pub epsilon: f64,
    pub s_lower: usize,
    pub c_upper: usize,
    pub h_lower: f64,
    pub h_upper: f64,
    pub grid_resolution: f64,
}

impl EntropyEstimate {
    pub fn new(n: usize, epsilon: f64, s_lower: usize, c_upper: usize, grid_resolution: f64) -> Self {
        let h = |c: usize| libm::log(c as f64) / n as f64;
        EntropyEstimate { n, epsilon, s_lower, c_upper, h_lower: h(s_lower), h_upper: h(c_upper), grid_resolution }
    }
}

/// A pair of thresholds at which the separated count decreased as ε decreased.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub n: usize,
    pub eps_large: f64,
    pub eps_small: f64,
    pub s_large: usize,
    pub s_small: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyReport {
    pub estimates: Vec<EntropyEstimate>,
    pub violations: Vec<MonotonicityViolation>,
}

/// Checks that `s_lower` does not decrease as ε decreases, for each `n`.
pub fn monotonicity_violations(estimates: &[EntropyEstimate]) -> Vec<MonotonicityViolation> {
    let mut out = Vec::new();
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            if a.n != b.n {
                continue;
            }
            let (large, small) = if a.epsilon >= b.epsilon { (a, b) } else { (b, a) };
            if large.epsilon > small.epsilon && small.s_lower < large.s_lower {
                out.push(MonotonicityViolation {
                    n: a.n,
                    eps_large: large.epsilon,
                    eps_small: small.epsilon,
                    s_large: large.s_lower,
                    s_small: small.s_lower,
                });
            }
        }
    }
    out
}

/// The full `(n, ε)` table, `n` outer and `ε` inner.
pub fn entropy_estimate<D: Dynamics + ?Sized>(
    q: &QuotientBox,
    map: &D,
    grid: &SampleGrid,
    n_list: &[usize],
    eps_list: &[f64],
    form: MetricForm,
) -> Result<EntropyReport> {
    if n_list.is_empty() || eps_list.is_empty() {
        return Err(Error::InvalidParameter("n and epsilon lists must be nonempty"));
    }
    if n_list.contains(&0) || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("n must be positive and epsilon > 0"));
    }
    let horizon = n_list.iter().copied().max().unwrap_or(1);
    let table = OrbitTable::build(q, map, grid, horizon, form)?;
    Ok(report_from_table(&table, grid.spacing(), n_list, eps_list))
}

pub fn report_from_table(table: &OrbitTable, spacing: f64, n_list: &[usize], eps_list: &[f64]) -> EntropyReport {
    let mut estimates = Vec::new();
    for &n in n_list {
        for &eps in eps_list {
            let s = separated_set_lower(table, n, eps);
            let c = covering_upper(table, n, eps);
            estimates.push(EntropyEstimate::new(n, eps, s, c, spacing));
        }
    }
    let violations = monotonicity_violations(&estimates);
    EntropyReport { estimates, violations }
}

/// A complex line through `base` parallel to coordinate `axis` (zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct LineSpec {
    pub base: CVec,
    pub axis: usize,
}

/// Contribution of one parameter sample: `‖(F^{nν})′ e_axis‖²` if the point lies in `D_n`.
pub fn line_area_factor<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, line: &LineSpec, t: C64, n: usize) -> Result<Option<f64>> {
    let dim = q.dim();
    let mut z = line.base.to_vec();
    z[line.axis] = t;
    if !q.in_open(&z) {
        return Ok(None);
    }
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[line.axis] = C64::new(1.0, 0.0);
    let (mut zn, mut vn) = (z.clone(), v.clone());
    for _ in 0..n {
        for _ in 0..q.nu() {
            if let Err(e) = map.tangent(&z, &v, &mut vn) {
                return if e == Error::Range { Ok(None) } else { Err(e) };
            }
            match map.step(&z, &mut zn) {
                Ok(()) => {}
                Err(Error::Range) => return Ok(None),
                Err(e) => return Err(e),
            }
            core::mem::swap(&mut z, &mut zn);
            core::mem::swap(&mut v, &mut vn);
        }
        if !q.in_open(&z) {
            return Ok(None);
        }
    }
    Ok(Some(v.iter().map(|c| c.norm_sqr()).sum()))
}

/// `(1/n)·log(area(F^{nν}(L ∩ D_n)) / area(L ∩ Δ))` by a cell-centred `res × res` sum.
///
/// The area is normalized by the parameter disk so that isometric dynamics reports 0.
pub fn volume_growth_estimate<D: Dynamics + ?Sized>(
    q: &QuotientBox,
    map: &D,
    line: &LineSpec,
    n: usize,
    res: usize,
) -> Result<f64> {
    check_line(q, line, n, res)?;
    let factors = (0..res * res)
        .map(|idx| line_cell(q, map, line, n, res, idx))
        .collect::<Result<Vec<_>>>()?;
    volume_growth_from_cells(&factors, n)
}

pub fn check_line(q: &QuotientBox, line: &LineSpec, n: usize, res: usize) -> Result<()> {
    if line.base.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: line.base.dim() });
    }
    if line.axis < q.dim() - q.nu() || line.axis >= q.dim() {
        return Err(Error::InvalidParameter("line must be parallel to one of the last nu axes"));
    }
    if n == 0 || res == 0 {
        return Err(Error::InvalidParameter("n and resolution must be positive"));
    }
    Ok(())
}

/// Cell `idx` of the parameter lattice: `None` outside the disk, else the in-disk flag
/// paired with the area factor (0 when the point leaves `D_n`).
pub fn line_cell<D: Dynamics + ?Sized>(
    q: &QuotientBox,
    map: &D,
    line: &LineSpec,
    n: usize,
    res: usize,
    idx: usize,
) -> Result<Option<f64>> {
    let r = q.radius();
    let h = 2.0 * r / res as f64;
    let t = C64::new(-r + h * ((idx / res) as f64 + 0.5), -r + h * ((idx % res) as f64 + 0.5));
    if t.norm() >= r {
        return Ok(None);
    }
    Ok(Some(line_area_factor(q, map, line, t, n)?.map_or(-1.0, |a| a)))
}

/// Combines per-cell results; a cell value of `-1` marks a point outside `D_n`.
pub fn volume_growth_from_cells(cells: &[Option<f64>], n: usize) -> Result<f64> {
    let mut base = 0usize;
    let mut area = 0.0;
    let mut alive = 0usize;
    for c in cells.iter().flatten() {
        base += 1;
        if *c >= 0.0 {
            alive += 1;
            area += c;
        }
    }
    if alive == 0 || !(area > 0.0) {
        return Err(Error::EmptySurvivingSet);
    }
    Ok(libm::log(area / base as f64) / n as f64)
}
