//! One function per subcommand. Each writes its files into the output directory and
//! returns the list of files written.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use shiftlab_core::entropy::{LineSpec, SampleGrid};
use shiftlab_core::jtable::{meets_k_minus_2, TransitionTable};
use shiftlab_core::quotient::{MetricForm, QuotientBox};
use shiftlab_core::wandering::{
    attracting_threshold, ball_perturbations, classify_point, escape_certificate, fixed_point_spectrum, q,
    spectral_sweep, verify_identities, BasinGrid, ClassifyParams, Label, SliceSpec, WanderingMap,
};
use shiftlab_core::winding::horseshoe_certificate;
use shiftlab_core::words::{big_log, symbolic_entropy_lower, word_counts};
use shiftlab_core::{sup_norm, CVec, C64};

use crate::config::{MapSpec, Model, RunConfig, TableSource};
use crate::error::CliError;
use crate::io::{complex, fmt_f64, num, write_csv, write_json, write_ppm};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Orbit,
    Entropy,
    Certify,
    JTable,
    Words,
    Wandering,
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Orbit => "orbit",
            Command::Entropy => "entropy",
            Command::Certify => "certify",
            Command::JTable => "jtable",
            Command::Words => "words",
            Command::Wandering => "wandering",
            Command::Render => "render",
        }
    }

    fn default_map(self) -> MapSpec {
        match self {
            Command::Orbit | Command::Wandering | Command::Render => MapSpec::wandering(0.25),
            _ => MapSpec::horseshoe(),
        }
    }
}

/// Writes `manifest.json`, then runs the command.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out)?;
    let manifest = out.join("manifest.json");
    write_json(
        &manifest,
        &json!({
            "tool": "shiftlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": cmd.name(),
            "config": serde_json::to_value(cfg).map_err(std::io::Error::from)?,
        }),
    )?;
    let spec = cfg.map.clone().unwrap_or_else(|| cmd.default_map());
    let model = spec.resolve()?;
    let mut files = match cmd {
        Command::Orbit => orbit(cfg, &model, out),
        Command::Entropy => entropy(cfg, &model, out),
        Command::Certify => certify(cfg, &model, out),
        Command::JTable => jtable(cfg, &model, out),
        Command::Words => words(cfg, out),
        Command::Wandering => wandering(cfg, &model, out),
        Command::Render => render(cfg, &model, out),
    }?;
    files.insert(0, manifest);
    Ok(files)
}

fn points(values: &[crate::config::ComplexValue], dim: usize, field: &str) -> Result<Vec<C64>, CliError> {
    if values.len() != dim {
        return Err(CliError::Config {
            path: field.into(),
            message: format!("expected {dim} coordinates, found {}", values.len()),
        });
    }
    Ok(values.iter().map(|v| v.to_c64()).collect())
}

fn shift_like<'a>(model: &'a Model, what: &str) -> Result<&'a shiftlab_core::ShiftLikeMap, CliError> {
    model.shift_like().ok_or_else(|| CliError::Config {
        path: "map".into(),
        message: format!("{what} needs an explicit shift-like map, not the identity preset"),
    })
}

fn wandering_map<'a>(model: &'a Model, what: &str) -> Result<&'a WanderingMap, CliError> {
    match model {
        Model::Wandering(w) => Ok(w),
        _ => Err(CliError::Config { path: "map".into(), message: format!("{what} needs the wandering preset") }),
    }
}

fn orbit(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let dim = model.dim();
    let start = match &cfg.orbit.start {
        Some(v) => points(v, dim, "orbit.start")?,
        None if matches!(model, Model::Wandering(_)) => q(0).to_vec(),
        None => vec![C64::new(0.0, 0.0); dim],
    };
    let map = model.dynamics();
    let mut z = start;
    let mut next = vec![C64::new(0.0, 0.0); dim];
    let mut rows = Vec::new();
    for step in 0..=cfg.orbit.steps {
        let escaped = !z.iter().all(|w| w.is_finite()) || sup_norm(&z) > cfg.orbit.escape_radius;
        let mut row = vec![step.to_string()];
        for w in &z {
            row.push(fmt_f64(w.re));
            row.push(fmt_f64(w.im));
        }
        row.push(u8::from(escaped).to_string());
        rows.push(row);
        if escaped || step == cfg.orbit.steps {
            break;
        }
        if map.step(&z, &mut next).is_err() {
            next.fill(C64::new(f64::INFINITY, 0.0));
        }
        std::mem::swap(&mut z, &mut next);
    }
    let mut header = vec!["step".to_string()];
    for i in 1..=dim {
        header.push(format!("z{i}_re"));
        header.push(format!("z{i}_im"));
    }
    header.push("escaped".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = out.join("orbit.csv");
    write_csv(&path, &header, rows)?;
    Ok(vec![path])
}

fn entropy(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let e = &cfg.entropy;
    let form = match e.metric.as_str() {
        "min" => MetricForm::Min,
        "sum" => MetricForm::Sum,
        other => {
            return Err(CliError::Config {
                path: "entropy.metric".into(),
                message: format!("expected \"min\" or \"sum\", found {other:?}"),
            })
        }
    };
    let dim = model.dim();
    let qbox = QuotientBox::new(e.r, dim, model.nu())?;
    let axis = e.axis.unwrap_or(dim - 1);
    let base = match &e.base {
        Some(v) => points(v, dim, "entropy.base")?,
        None => vec![C64::new(0.0, 0.0); dim],
    };
    let map = model.dynamics();
    let full = SampleGrid::line(&qbox, &base, axis, e.grid)?;
    let horizon = e.n.iter().copied().max().unwrap_or(1);
    let grid = if e.surviving { par::surviving(&qbox, map, &full, horizon)? } else { full.clone() };
    if grid.is_empty() {
        return Err(shiftlab_core::Error::EmptySurvivingSet.into());
    }
    let report = par::entropy_estimate(&qbox, map, &grid, &e.n, &e.epsilon, form)?;
    let mut volume = Vec::new();
    if e.volume_res > 0 {
        let line = LineSpec { base: CVec::new(base.clone())?, axis };
        for &n in &e.n {
            let v = par::volume_growth(&qbox, map, &line, n, e.volume_res);
            volume.push(json!({ "n": n, "growth": v.as_ref().map(|x| num(*x)).unwrap_or(Value::Null),
                                "error": v.err().map(|err| err.to_string()) }));
        }
    }
    let csv_path = out.join("entropy.csv");
    write_csv(
        &csv_path,
        &["n", "epsilon", "s_lower", "c_upper", "h_lower", "h_upper"],
        report.estimates.iter().map(|est| {
            vec![
                est.n.to_string(),
                fmt_f64(est.epsilon),
                est.s_lower.to_string(),
                est.c_upper.to_string(),
                fmt_f64(est.h_lower),
                fmt_f64(est.h_upper),
            ]
        }),
    )?;
    let best = report.estimates.iter().fold(f64::NEG_INFINITY, |m, est| m.max(est.h_lower));
    let summary = json!({
        "grid": {
            "resolution": e.grid,
            "spacing": num(grid.spacing()),
            "points": full.len(),
            "surviving": grid.len(),
            "axis": axis,
        },
        "metric": e.metric,
        "estimates": report.estimates.iter().map(|est| json!({
            "n": est.n, "epsilon": num(est.epsilon), "s_lower": est.s_lower, "c_upper": est.c_upper,
            "h_lower": num(est.h_lower), "h_upper": num(est.h_upper), "grid_resolution": num(est.grid_resolution),
        })).collect::<Vec<_>>(),
        "monotonicity_violations": report.violations.iter().map(|v| json!({
            "n": v.n, "eps_large": num(v.eps_large), "eps_small": num(v.eps_small),
            "s_large": v.s_large, "s_small": v.s_small,
        })).collect::<Vec<_>>(),
        "volume_growth": volume,
        "best_h_lower": num(best),
    });
    let json_path = out.join("entropy.json");
    write_json(&json_path, &summary)?;
    if let Some(min) = e.min_h_lower {
        if !(best >= min) {
            return Err(CliError::verification(
                format!("best h_lower {} is below the required {}", fmt_f64(best), fmt_f64(min)),
                json!({ "best_h_lower": num(best), "required": num(min) }),
            ));
        }
    }
    Ok(vec![csv_path, json_path])
}

fn certify(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let map = shift_like(model, "certify")?;
    let cert = horseshoe_certificate(map.f(), map.a(), cfg.certify.r)?;
    let mut files = Vec::new();
    let mut probe_json = Value::Null;
    if let Some(p) = &cfg.certify.probe {
        let ns: Vec<u32> = (p.n_min.max(1)..=p.n_max).collect();
        let report = par::probe(map.f(), p.r, p.big_r, p.m, &ns)?;
        let path = out.join("probe.csv");
        write_csv(
            &path,
            &["n", "min_modulus", "winding", "pass"],
            report.rows.iter().map(|row| {
                vec![
                    row.n.to_string(),
                    fmt_f64(row.min_modulus),
                    row.winding.map_or("inconclusive".into(), |w| w.to_string()),
                    row.pass.to_string(),
                ]
            }),
        )?;
        files.push(path);
        probe_json = json!({
            "r": num(p.r), "R": num(p.big_r), "m": p.m, "n_min": p.n_min, "n_max": p.n_max,
            "first_pass": report.first_pass, "inconclusive": report.inconclusive,
        });
    }
    let body = json!({
        "map": { "N": map.dim(), "nu": map.nu(), "a": complex(map.a()), "f": map.f().to_text() },
        "r": num(cfg.certify.r),
        "certificate": {
            "min_modulus": num(cert.min_modulus),
            "threshold": num(cert.threshold),
            "degree": cert.degree,
            "valid": cert.valid,
            "entropy_bound": cert.entropy_bound.map(num),
        },
        "probe": probe_json,
    });
    let path = out.join("certify.json");
    write_json(&path, &body)?;
    files.insert(0, path);
    if !cert.valid {
        return Err(CliError::verification(
            "horseshoe hypotheses do not hold on the given circle",
            body["certificate"].clone(),
        ));
    }
    Ok(files)
}

fn table_json(t: &TransitionTable) -> Value {
    let k = t.k();
    Value::from((0..k).map(|i| Value::from((0..k).map(|l| Value::from(t.get(i, l).to_vec())).collect::<Vec<_>>())).collect::<Vec<_>>())
}

fn jtable(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let j = &cfg.jtable;
    let map = shift_like(model, "jtable")?;
    let f = map.f().rescale(j.rescale)?;
    let centers: Vec<C64> = j.centers.iter().map(|c| c.to_c64()).collect();
    let t = par::jtable(&f, map.a(), &centers, j.r, j.big_r, j.density)?;
    let meets = meets_k_minus_2(&t.membership);
    let body = json!({
        "k": t.k(),
        "centers": centers.iter().map(|c| complex(*c)).collect::<Vec<_>>(),
        "r": num(j.r),
        "R": num(j.big_r),
        "a": complex(map.a()),
        "f": map.f().to_text(),
        "rescale": j.rescale,
        "density": j.density,
        "membership": table_json(&t.membership),
        "inconclusive": table_json(&t.inconclusive),
        "flagged_rows": t.flagged_rows,
        "min_cardinality": t.min_cardinality(),
        "meets_k_minus_2": meets,
    });
    let path = out.join("jtable.json");
    write_json(&path, &body)?;
    if j.require_k_minus_2 && !meets {
        return Err(CliError::verification(
            format!("min |J(i,l)| = {} is below k - 2 = {}", t.min_cardinality(), t.k().saturating_sub(2)),
            json!({ "min_cardinality": t.min_cardinality(), "k": t.k() }),
        ));
    }
    Ok(vec![path])
}

fn load_table(src: &TableSource, k: usize) -> Result<TransitionTable, CliError> {
    let bad = |message: String| CliError::Config { path: "words.table".into(), message };
    match src {
        TableSource::Named(name) if name == "full" => Ok(TransitionTable::full(k)),
        TableSource::Named(name) if name == "uniform" => {
            TransitionTable::uniform_k_minus_2(k).map_err(|e| bad(e.to_string()))
        }
        TableSource::Named(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{path}: {e}")))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| bad(format!("{path}: {e}")))?;
            let sets: Vec<Vec<Vec<usize>>> = serde_json::from_value(v["membership"].clone())
                .map_err(|e| bad(format!("{path}: membership: {e}")))?;
            explicit_table(&sets).map_err(|e| bad(format!("{path}: {e}")))
        }
        TableSource::Explicit { sets } => explicit_table(sets).map_err(|e| bad(e.to_string())),
    }
}

fn explicit_table(sets: &[Vec<Vec<usize>>]) -> shiftlab_core::Result<TransitionTable> {
    let k = sets.len();
    if sets.iter().any(|row| row.len() != k) {
        return Err(shiftlab_core::Error::InvalidParameter("transition table must be k by k"));
    }
    TransitionTable::new(k, sets.iter().flatten().cloned().collect())
}

/// Exhaustive count of admissible words of length `m`.
fn brute_force_count(t: &TransitionTable, dim: usize, nu: usize, m: usize) -> u64 {
    let k = t.k();
    let mut word = vec![0usize; m];
    let mut count = 0;
    for idx in 0..k.pow(m as u32) {
        let mut x = idx;
        for p in (0..m).rev() {
            word[p] = x % k;
            x /= k;
        }
        if (dim..m).all(|p| t.contains(word[p - nu], word[p - dim], word[p])) {
            count += 1;
        }
    }
    count
}

fn words(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let w = &cfg.words;
    if w.m_max == 0 {
        return Err(CliError::Config { path: "words.m_max".into(), message: "must be positive".into() });
    }
    let table = load_table(&w.table, w.k)?;
    let counts = word_counts(&table, w.dim, w.nu, w.m_max)?;
    let entropy_lower = if w.m_max >= 2 * w.dim { Some(symbolic_entropy_lower(&table, w.dim, w.nu, w.m_max)?) } else { None };
    let mut mismatches = Vec::new();
    let mut checked = 0;
    if w.brute_force {
        for m in 1..=w.m_max {
            if (table.k() as f64).powi(m as i32) > 1e6 {
                break;
            }
            let b = brute_force_count(&table, w.dim, w.nu, m);
            checked = m;
            if counts[m - 1] != b.into() {
                mismatches.push(json!({ "m": m, "dp": counts[m - 1].to_string(), "enumeration": b }));
            }
        }
    }
    let last = &counts[w.m_max - 1];
    let body = json!({
        "k": table.k(),
        "N": w.dim,
        "nu": w.nu,
        "min_cardinality": table.min_cardinality(),
        "counts": counts.iter().enumerate().map(|(i, c)| json!({ "m": i + 1, "count": c.to_string() })).collect::<Vec<_>>(),
        "growth_rate": num(big_log(last) / w.m_max as f64),
        "entropy_lower": entropy_lower.map(num),
        "brute_force": { "checked_up_to": checked, "mismatches": mismatches },
    });
    let path = out.join("words.json");
    write_json(&path, &body)?;
    if !mismatches.is_empty() {
        return Err(CliError::verification("word counts disagree with enumeration", body["brute_force"].clone()));
    }
    Ok(vec![path])
}

fn label_text(l: Label) -> String {
    match l {
        Label::Basin(n) => n.to_string(),
        Label::Escaped => "escaped".into(),
        Label::Undecided => "undecided".into(),
    }
}

fn write_basin_files(grid: &BasinGrid, out: &Path, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let ppm = out.join("basins.ppm");
    write_ppm(&ppm, grid.width, grid.height, &grid.raster())?;
    let hist = out.join("histogram.csv");
    write_csv(&hist, &["label", "count"], grid.histogram().into_iter().map(|(l, c)| vec![label_text(l), c.to_string()]))?;
    files.push(ppm);
    files.push(hist);
    Ok(())
}

fn wandering(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let w = &cfg.wandering;
    let m = wandering_map(model, "wandering")?;
    let ids = verify_identities(m, w.samples, w.tol, cfg.seed)?;
    let spectra = w.fixed_points.iter().map(|&n| fixed_point_spectrum(m, n)).collect::<Result<Vec<_>, _>>()?;
    let params = cfg.render.params();
    let pts = ball_perturbations(&q(0), w.perturbation_radius, w.perturbations, cfg.seed);
    let results: Vec<Value> = pts
        .par_iter()
        .map(|z| {
            let c = classify_point(m, z, &params);
            let cert = escape_certificate(m, z, w.steps, &params).ok();
            json!({
                "label": label_text(c.label),
                "iterations": c.iterations,
                "final_deviation": cert.as_ref().map(|c| num(c.final_deviation())),
                "escape_from": cert.as_ref().and_then(|c| c.escape_from),
                "monotone_from": cert.as_ref().and_then(|c| c.monotone_from),
            })
        })
        .collect();
    let in_basin_0 = results.iter().filter(|r| r["label"] == "0").count();
    let mut files = Vec::new();
    let mut render_json = Value::Null;
    if w.render {
        let r = &cfg.render;
        let grid = par::render(m, &r.slice.to_spec(), r.width, r.height, &params)?;
        write_basin_files(&grid, out, &mut files)?;
        render_json = json!({ "width": r.width, "height": r.height, "distinct_basins":
            grid.histogram().keys().filter(|l| matches!(l, Label::Basin(_))).count() });
    }
    let body = json!({
        "a": num(m.a()),
        "alpha": num(m.alpha().alpha),
        "sign": match m.sign() { shiftlab_core::wandering::Sign::Plus => "+", shiftlab_core::wandering::Sign::Minus => "-" },
        "identities": {
            "tol": num(ids.tol),
            "samples": ids.samples,
            "passed": ids.passed(),
            "checks": ids.checks.iter().map(|c| json!({ "name": c.name, "residual": num(c.residual), "passed": c.passed })).collect::<Vec<_>>(),
        },
        "spectrum": spectra.iter().map(|s| json!({
            "n": s.n, "moduli": s.moduli.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "radius": num(s.radius), "attracting": s.attracting,
        })).collect::<Vec<_>>(),
        "attracting_threshold": num(attracting_threshold()),
        "sweep": spectral_sweep(&w.sweep).iter().map(|(a, r)| json!({ "a": num(*a), "radius": num(*r) })).collect::<Vec<_>>(),
        "perturbations": {
            "count": pts.len(),
            "radius": num(w.perturbation_radius),
            "steps": w.steps,
            "in_basin_0": in_basin_0,
            "points": results,
        },
        "render": render_json,
    });
    let path = out.join("wandering.json");
    write_json(&path, &body)?;
    files.insert(0, path);
    if !ids.passed() {
        return Err(CliError::verification(
            format!("identity residuals above {}", fmt_f64(ids.tol)),
            json!(ids.failures().map(|c| json!({ "name": c.name, "residual": num(c.residual) })).collect::<Vec<_>>()),
        ));
    }
    Ok(files)
}

fn render(cfg: &RunConfig, model: &Model, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let r = &cfg.render;
    let m = wandering_map(model, "render")?;
    let spec: SliceSpec = r.slice.to_spec();
    let params: ClassifyParams = r.params();
    let grid = par::render(m, &spec, r.width, r.height, &params)?;
    let mut files = Vec::new();
    write_basin_files(&grid, out, &mut files)?;
    let csv_path = out.join("basins.csv");
    let rows = (0..grid.height).flat_map(|py| (0..grid.width).map(move |px| (px, py))).map(|(px, py)| {
        let (x, y) = spec.pixel(grid.width, grid.height, px, py);
        let c = grid.cells[py * grid.width + px];
        vec![fmt_f64(x), fmt_f64(y), label_text(c.label), c.iterations.to_string()]
    });
    write_csv(&csv_path, &["x", "y", "label", "iters"], rows)?;
    files.push(csv_path);
    Ok(files)
}
