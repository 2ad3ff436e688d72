//! Rayon versions of the grid computations in `shiftlab-core`.
//!
//! Work is split per grid point, cell or row and always collected in index order, so
//! results do not depend on the number of threads. Greedy passes stay sequential.

use rayon::prelude::*;
use shiftlab_core::entropy::{
    self, greedy_cover, neighbors, orbit_row, EntropyReport, LineSpec, OrbitTable, SampleGrid,
};
use shiftlab_core::expr::Expr;
use shiftlab_core::jtable::{assemble_jtable, jtable_cell, validate_geometry, JTable};
use shiftlab_core::quotient::{MetricForm, QuotientBox};
use shiftlab_core::shiftlike::Dynamics;
use shiftlab_core::wandering::{check_resolution, render_row, BasinGrid, ClassifyParams, SliceSpec, WanderingMap};
use shiftlab_core::winding::{assemble_probe, probe_row, ProbeReport};
use shiftlab_core::{Result, C64};

pub fn surviving<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, grid: &SampleGrid, n: usize) -> Result<SampleGrid> {
    let keep = (0..grid.len())
        .into_par_iter()
        .map(|i| entropy::survives(q, map, grid.point(i), n))
        .collect::<Result<Vec<bool>>>()?;
    Ok(grid.select(&keep))
}

pub fn orbit_table<D: Dynamics + ?Sized>(
    q: &QuotientBox,
    map: &D,
    grid: &SampleGrid,
    horizon: usize,
    form: MetricForm,
) -> Result<OrbitTable> {
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|i| orbit_row(q, map, grid.point(i), horizon))
        .collect::<Result<Vec<_>>>()?;
    OrbitTable::from_rows(q.dim(), horizon, form, rows)
}

pub fn covering_upper(table: &OrbitTable, n: usize, eps: f64) -> usize {
    let lists: Vec<Vec<u32>> = (0..table.len()).into_par_iter().map(|i| neighbors(table, i, n, eps)).collect();
    greedy_cover(&lists)
}

/// Same table as `entropy::entropy_estimate`, with the orbit table and neighbor lists
/// computed in parallel.
pub fn entropy_estimate<D: Dynamics + ?Sized>(
    q: &QuotientBox,
    map: &D,
    grid: &SampleGrid,
    n_list: &[usize],
    eps_list: &[f64],
    form: MetricForm,
) -> Result<EntropyReport> {
    if n_list.is_empty() || eps_list.is_empty() || n_list.contains(&0) || eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(shiftlab_core::Error::InvalidParameter("need nonempty lists, n >= 1 and epsilon > 0"));
    }
    let horizon = n_list.iter().copied().max().unwrap_or(1);
    let table = orbit_table(q, map, grid, horizon, form)?;
    let mut estimates = Vec::new();
    for &n in n_list {
        for &eps in eps_list {
            let s = entropy::separated_set_lower(&table, n, eps);
            let c = covering_upper(&table, n, eps);
            estimates.push(entropy::EntropyEstimate::new(n, eps, s, c, grid.spacing()));
        }
    }
    let violations = entropy::monotonicity_violations(&estimates);
    Ok(EntropyReport { estimates, violations })
}

pub fn volume_growth<D: Dynamics + ?Sized>(q: &QuotientBox, map: &D, line: &LineSpec, n: usize, res: usize) -> Result<f64> {
    entropy::check_line(q, line, n, res)?;
    let cells = (0..res * res)
        .into_par_iter()
        .map(|idx| entropy::line_cell(q, map, line, n, res, idx))
        .collect::<Result<Vec<_>>>()?;
    entropy::volume_growth_from_cells(&cells, n)
}

pub fn jtable(f: &Expr, a: C64, centers: &[C64], r: f64, big_r: f64, density: usize) -> Result<JTable> {
    validate_geometry(centers, r, big_r, a)?;
    let k = centers.len();
    let cells = (0..k * k)
        .into_par_iter()
        .map(|idx| jtable_cell(f, a, centers, r, big_r, density, idx / k, idx % k))
        .collect();
    assemble_jtable(centers, r, big_r, a, cells)
}

pub fn probe(f: &Expr, r: f64, big_r: f64, m: i64, ns: &[u32]) -> Result<ProbeReport> {
    if !(r > 0.0 && big_r > 0.0) || m < 1 {
        return Err(shiftlab_core::Error::InvalidParameter("probe needs r > 0, R > 0, m >= 1"));
    }
    let rows = ns.par_iter().map(|&n| probe_row(f, r, big_r, m, n)).collect::<Result<Vec<_>>>()?;
    Ok(assemble_probe(r, big_r, m, rows))
}

pub fn render(m: &WanderingMap, slice: &SliceSpec, width: usize, height: usize, p: &ClassifyParams) -> Result<BasinGrid> {
    check_resolution(width, height)?;
    let rows: Vec<_> = (0..height).into_par_iter().map(|py| render_row(m, slice, width, height, py, p)).collect();
    Ok(BasinGrid { slice: slice.clone(), width, height, cells: rows.into_iter().flatten().collect() })
}
