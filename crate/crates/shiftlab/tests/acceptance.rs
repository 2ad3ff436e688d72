//! Acceptance checks. Runs without the libtest harness so that every criterion prints one
//! PASS/FAIL line; exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::par;
use shiftlab_core::entropy::{separated_set_lower, OrbitTable, SampleGrid};
use shiftlab_core::expr::Expr;
use shiftlab_core::jtable::TransitionTable;
use shiftlab_core::quotient::{MetricForm, QuotientBox};
use shiftlab_core::wandering::{
    ball_perturbations, basin_shift_check, classify_point, escape_certificate, fixed_point_spectrum, q,
    verify_identities, ClassifyParams, Label, SliceSpec, WanderingMap,
};
use shiftlab_core::winding::{rescaled_family_probe, winding_number};
use shiftlab_core::words::{symbolic_entropy_lower, word_counts};
use shiftlab_core::{sup_dist, ShiftLikeMap, C64};

type Outcome = (bool, String);

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn horseshoe() -> (ShiftLikeMap, QuotientBox) {
    let f = ShiftLikeMap::new(2, 1, C64::new(0.5, 0.0), Expr::monomial(4.0, 2)).unwrap();
    let q = QuotientBox::for_map(1.0, &f).unwrap();
    (f, q)
}

fn horseshoe_entropy() -> Outcome {
    let (f, q) = horseshoe();
    let start = Instant::now();
    let n = 8;
    let grid = SampleGrid::line(&q, &[zero(), zero()], 1, 200).unwrap();
    let grid = par::surviving(&q, &f, &grid, n).unwrap();
    let rep = par::entropy_estimate(&q, &f, &grid, &[n], &[0.05], MetricForm::Min).unwrap();
    let took = start.elapsed();
    let h = rep.estimates[0].h_lower;
    let need = 0.9 * LN_2;
    (
        h >= need && took < Duration::from_secs(60),
        format!("h_lower = {h:.4} (need >= {need:.4}), s = {}, {:.1}s", rep.estimates[0].s_lower, took.as_secs_f64()),
    )
}

fn winding_exact() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut wrong = Vec::new();
    let mut cases: Vec<(String, Expr, i64)> = (1..=6).map(|d| (format!("z^{d}"), Expr::monomial(1.0, d), d as i64)).collect();
    cases.push(("exp".into(), Expr::exp(Expr::var()), 0));
    for (name, f, expect) in cases {
        match winding_number(&f, zero(), 1.0, zero()) {
            Ok(w) => {
                worst = worst.max(w.residual);
                if w.value != expect || w.residual > 0.05 {
                    wrong.push(format!("{name}: {} (residual {:.3})", w.value, w.residual));
                }
            }
            Err(e) => wrong.push(format!("{name}: {e}")),
        }
    }
    (wrong.is_empty(), if wrong.is_empty() { format!("max residual {worst:.2e}") } else { wrong.join("; ") })
}

fn conjugacy() -> Outcome {
    let (f, q) = horseshoe();
    // Off the lattice spacing, so no pair distance ties with the threshold.
    let eps = 0.07;
    let mut pairs = Vec::new();
    let mut ok = true;
    for n in [2u32, 3, 5] {
        let fn_ = f.dilation_conjugate(n).unwrap();
        let qn = q.scaled(1.0 / n as f64).unwrap();
        let small = SampleGrid::line(&qn, &[zero(), zero()], 1, 81).unwrap();
        let big = small.scaled(n as f64);
        let ts = OrbitTable::build(&qn, &fn_, &small, 4, MetricForm::Min).unwrap();
        let tb = OrbitTable::build(&q, &f, &big, 4, MetricForm::Min).unwrap();
        for m in [2, 4] {
            let a = separated_set_lower(&ts, m, eps / n as f64);
            let b = separated_set_lower(&tb, m, eps);
            ok &= a == b;
            pairs.push(format!("n={n},m={m}: {a}/{b}"));
        }
    }
    (ok, pairs.join(" "))
}

fn probe() -> Outcome {
    let ns: Vec<u32> = (1..=60).collect();
    let rep = rescaled_family_probe(&Expr::monomial(1.0, 2), 0.5, 10.0, 2, &ns).unwrap();
    (rep.first_pass == Some(40), format!("first passing n = {:?}", rep.first_pass))
}

fn brute_force(t: &TransitionTable, dim: usize, nu: usize, m: usize) -> u64 {
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

fn symbolic() -> Outcome {
    let t = TransitionTable::uniform_k_minus_2(10).unwrap();
    let h = symbolic_entropy_lower(&t, 3, 1, 12).unwrap();
    let err = (h - 8f64.ln()).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mismatches = 0;
    for _ in 0..50 {
        let k = rng.gen_range(1..=5);
        let dim = rng.gen_range(2..=4);
        let nu = rng.gen_range(1..dim);
        let sets = (0..k * k).map(|_| (0..k).filter(|_| rng.gen_bool(0.6)).collect()).collect();
        let table = TransitionTable::new(k, sets).unwrap();
        let counts = word_counts(&table, dim, nu, 8).unwrap();
        for m in 1..=8 {
            if counts[m - 1] != BigUint::from(brute_force(&table, dim, nu, m)) {
                mismatches += 1;
            }
        }
    }
    (err <= 1e-9 && mismatches == 0, format!("|h - log 8| = {err:.1e}, {mismatches} count mismatches over 50 tables"))
}

fn identities() -> Outcome {
    let m = WanderingMap::build(0.25, None).unwrap();
    let rep = verify_identities(&m, 10_000, 1e-10, 0).unwrap();
    let shift = (-3..=3).map(|n| sup_dist(&m.apply(&q(n)).unwrap(), &q(n + 1))).fold(0.0, f64::max);
    (
        rep.passed() && shift <= 1e-12,
        format!("max identity residual {:.1e}, max |F(q_n) - q_(n+1)| {shift:.1e}", rep.max_residual()),
    )
}

fn attraction() -> Outcome {
    let m = WanderingMap::build(0.25, None).unwrap();
    let radius = fixed_point_spectrum(&m, 0).unwrap().radius;
    let p = ClassifyParams::default();
    let pts = ball_perturbations(&q(0), 0.05, 100, 0);
    let mut in_basin = 0;
    let mut worst_dev: f64 = 0.0;
    let mut escape_ok = 0;
    for z in &pts {
        let c = classify_point(&m, z, &p);
        if c.label == Label::Basin(0) && c.iterations <= 500 {
            in_basin += 1;
        }
        if let Ok(cert) = escape_certificate(&m, z, 200, &p) {
            worst_dev = worst_dev.max(cert.final_deviation());
            if cert.escape_from.is_some_and(|k| k <= 10) {
                escape_ok += 1;
            }
        } else {
            worst_dev = f64::INFINITY;
        }
    }
    let max_norm = pts.iter().map(|z| sup_dist(z, &q(0))).fold(0.0, f64::max);
    (
        (radius - 0.67).abs() <= 0.02 && in_basin == 100 && worst_dev <= 1e-6 && escape_ok == 100,
        format!(
            "radius {radius:.6}, {in_basin}/100 in basin 0 (max offset {max_norm:.3}), max |F^200 - q_200| {worst_dev:.1e}, {escape_ok}/100 escape"
        ),
    )
}

fn basin_shift() -> Outcome {
    let m = WanderingMap::build(0.25, None).unwrap();
    let chk = basin_shift_check(&m, &SliceSpec::default(), 1000, 0, &ClassifyParams::default());
    (
        chk.decided == 1000 && chk.fraction() >= 0.99 && chk.other_basin == 0,
        format!(
            "{}/{} shifted, {} undecided images, {} other basin",
            chk.shifted, chk.decided, chk.undecided_image, chk.other_basin
        ),
    )
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("render.json");
    std::fs::write(&cfg, r#"{"render": {"width": 96, "height": 96}, "wandering": {"render": true, "samples": 2000}}"#).unwrap();
    let mut differ = Vec::new();
    for cmd in ["orbit", "entropy", "certify", "jtable", "words", "wandering", "render"] {
        let mut outs = Vec::new();
        for threads in ["1", "4"] {
            let out = tmp.path().join(format!("{cmd}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
                .arg(cmd)
                .args(["--seed", "7", "--threads", threads, "--out"])
                .arg(&out)
                .arg("--config")
                .arg(&cfg)
                .output()
                .unwrap()
                .status;
            if !status.success() {
                differ.push(format!("{cmd} exited with {status}"));
            }
            outs.push(read_dir(&out));
        }
        if outs[0] != outs[1] {
            differ.push(cmd.to_string());
        }
    }
    (differ.is_empty(), if differ.is_empty() { "7 commands byte-identical at 1 and 4 threads".into() } else { differ.join(", ") })
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("horseshoe entropy bound", horseshoe_entropy),
        ("winding exactness", winding_exact),
        ("conjugacy exactness", conjugacy),
        ("rescaled probe threshold", probe),
        ("symbolic entropy and word counts", symbolic),
        ("wandering identities", identities),
        ("attraction and escape", attraction),
        ("basin shift", basin_shift),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!("criterion {} {}: {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
