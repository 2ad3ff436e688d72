//! A translation-equivariant map on C³ with attracting fixed points of `G = F − (1,1,1)`.
//!
//! `F(z) = (z₂, z₃, f̃(z₃) + a(z₃ − 1) − a·z₁ + c·a)` where `f̃` is the shifted conjugate of
//! `z + sin(2πz) + 1 − √(1 − 1/4π²)` and `c = ±1`. `F` commutes with `T(z) = z + (1,1,1)`
//! for either sign; only `c = −1` makes `F(n−1, n, n+1) = (n, n+1, n+2)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{solve_alpha, wandering_f, AlphaConstant, Expr};
use crate::linalg::spectral_radius;
use crate::shiftlike::ShiftLikeMap;
use crate::{sup_dist, sup_norm, C64};

pub type Point3 = [C64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WanderingMap {
    a: f64,
    alpha: AlphaConstant,
    sign: Sign,
    f: Expr,
    f_tilde: Expr,
    map: ShiftLikeMap,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `q_n = (n − 1, n, n + 1)`.
pub fn q(n: i64) -> Point3 {
    let n = n as f64;
    [c(n - 1.0), c(n), c(n + 1.0)]
}

fn translate(z: &Point3, t: f64) -> Point3 {
    [z[0] + t, z[1] + t, z[2] + t]
}

impl WanderingMap {
    /// Builds the map; with `sign = None` the sign is resolved by [`resolve_sign`].
    pub fn build(a: f64, sign: Option<Sign>) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter("a must lie in (0, 1)"));
        }
        let sign = match sign {
            Some(s) => s,
            None => resolve_sign(a)?,
        };
        Self::with_sign(a, sign)
    }

    fn with_sign(a: f64, sign: Sign) -> Result<Self> {
        let alpha = solve_alpha();
        let f = wandering_f();
        let f_tilde = f.conjugate_by_shift(c(alpha.alpha));
        // Last coordinate: g(z₃) − a·z₁ with g(z) = f̃(z) + a·z + (c − 1)·a.
        let g = Expr::add(
            Expr::add(f_tilde.clone(), Expr::mul(Expr::real(a), Expr::var())),
            Expr::real((sign.value() - 1.0) * a),
        );
        let map = ShiftLikeMap::new(3, 1, c(a), g)?;
        Ok(WanderingMap { a, alpha, sign, f, f_tilde, map })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn alpha(&self) -> AlphaConstant {
        self.alpha
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn f_tilde(&self) -> &Expr {
        &self.f_tilde
    }

    /// `F` as a shift-like map of type 1 on C³.
    pub fn shift_like(&self) -> &ShiftLikeMap {
        &self.map
    }

    pub fn apply(&self, z: &Point3) -> Result<Point3> {
        let mut out = [C64::new(0.0, 0.0); 3];
        self.map.apply_into(z, &mut out)?;
        Ok(out)
    }

    /// `G = T⁻¹ ∘ F`.
    pub fn apply_g(&self, z: &Point3) -> Result<Point3> {
        Ok(translate(&self.apply(z)?, -1.0))
    }
}

fn sample_point(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-0.5..0.5))
}

fn commutation_residual(m: &WanderingMap, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = [sample_point(&mut rng), sample_point(&mut rng), sample_point(&mut rng)];
        let lhs = m.apply(&translate(&z, 1.0))?;
        let rhs = translate(&m.apply(&z)?, 1.0);
        worst = worst.max(sup_dist(&lhs, &rhs));
    }
    Ok(worst)
}

fn fixed_point_residual(m: &WanderingMap, range: core::ops::RangeInclusive<i64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in range {
        worst = worst.max(sup_dist(&m.apply(&q(n))?, &q(n + 1)));
    }
    Ok(worst)
}

/// The unique sign for which both the commutation and the fixed-point identities hold.
pub fn resolve_sign(a: f64) -> Result<Sign> {
    let mut ok = Vec::new();
    for s in [Sign::Plus, Sign::Minus] {
        let m = WanderingMap::with_sign(a, s)?;
        if commutation_residual(&m, 64, 0)? <= 1e-10 && fixed_point_residual(&m, -3..=3)? <= 1e-10 {
            ok.push(s);
        }
    }
    match ok.as_slice() {
        [s] => Ok(*s),
        _ => Err(Error::InvalidParameter("sign of the constant term is not uniquely determined")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub tol: f64,
    pub samples: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.residual))
    }
}

/// Residuals of every algebraic identity the construction relies on.
pub fn verify_identities(m: &WanderingMap, samples: usize, tol: f64, seed: u64) -> Result<IdentityReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample"));
    }
    let alpha = m.alpha.alpha;
    let (f, ft) = (&m.f, &m.f_tilde);
    let (df, dft) = (f.derivative(), ft.derivative());
    let ints = -3i64..=3;
    let max_over = |g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        ints.clone().try_fold(0.0f64, |acc, n| Ok(acc.max(g(n as f64)?)))
    };
    let mut checks = Vec::new();
    let mut push = |name, residual: f64| {
        checks.push(IdentityCheck { name, residual, passed: residual <= tol });
    };
    push("f(alpha+n) = alpha+n+1", max_over(&|n| Ok((f.eval(c(alpha + n))? - c(alpha + n + 1.0)).norm()))?);
    push("f'(alpha+n) = 0", max_over(&|n| Ok(df.eval(c(alpha + n))?.norm()))?);
    push("ftilde(n) = n+1", max_over(&|n| Ok((ft.eval(c(n))? - c(n + 1.0)).norm()))?);
    push("ftilde'(n) = 0", max_over(&|n| Ok(dft.eval(c(n))?.norm()))?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let z = sample_point(&mut rng);
        worst = worst.max((ft.eval(z + 1.0)? - ft.eval(z)? - 1.0).norm());
    }
    push("ftilde(z+1) = ftilde(z)+1", worst);
    push("F(z+(1,1,1)) = F(z)+(1,1,1)", commutation_residual(m, samples, seed.wrapping_add(1))?);
    push("F(q_n) = q_(n+1)", fixed_point_residual(m, -3..=3)?);
    Ok(IdentityReport { tol, samples, checks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub n: i64,
    /// Eigenvalues of DG(q_n), largest modulus first.
    pub eigenvalues: Vec<C64>,
    pub moduli: Vec<f64>,
    pub radius: f64,
    pub attracting: bool,
}

/// Eigenvalues of the Jacobian of `G` (equal to that of `F`) at `q_n`.
pub fn fixed_point_spectrum(m: &WanderingMap, n: i64) -> Result<Spectrum> {
    let mut eigenvalues = m.map.jacobian(&q(n))?.eigenvalues();
    eigenvalues.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(x.im.total_cmp(&y.im)));
    let moduli: Vec<f64> = eigenvalues.iter().map(|e| e.norm()).collect();
    let radius = spectral_radius(&eigenvalues);
    Ok(Spectrum { n, eigenvalues, moduli, radius, attracting: radius < 1.0 })
}

/// Spectral radius of the companion matrix of `λ³ − aλ² + a`, the Jacobian at every `q_n`.
pub fn companion_radius(a: f64) -> f64 {
    let roots = crate::linalg::poly_roots(&[c(1.0), c(-a), c(0.0), c(a)]);
    spectral_radius(&roots)
}

/// Radii at the given values of `a`.
pub fn spectral_sweep(values: &[f64]) -> Vec<(f64, f64)> {
    values.iter().map(|&a| (a, companion_radius(a))).collect()
}

/// The value `a*` in (0, 1) at which the fixed points stop being attracting, by bisection.
pub fn attracting_threshold() -> f64 {
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-3);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if companion_radius(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Basin(i64),
    Escaped,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyParams {
    pub max_iter: usize,
    pub conv_tol: f64,
    pub escape_radius: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams { max_iter: 500, conv_tol: 1e-8, escape_radius: 100.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub iterations: usize,
}

/// Iterates `G` until the orbit is within `conv_tol` of some `q_n`, leaves the ball of
/// radius `escape_radius`, or runs out of iterations.
pub fn classify_point(m: &WanderingMap, z: &Point3, p: &ClassifyParams) -> Classification {
    let mut cur = *z;
    for k in 0..=p.max_iter {
        if !cur.iter().all(|w| w.is_finite()) || sup_norm(&cur) > p.escape_radius {
            return Classification { label: Label::Escaped, iterations: k };
        }
        let n = libm::round(cur[1].re) as i64;
        if sup_dist(&cur, &q(n)) <= p.conv_tol {
            return Classification { label: Label::Basin(n), iterations: k };
        }
        if k == p.max_iter {
            break;
        }
        match m.apply_g(&cur) {
            Ok(next) => cur = next,
            Err(_) => return Classification { label: Label::Escaped, iterations: k + 1 },
        }
    }
    Classification { label: Label::Undecided, iterations: p.max_iter }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EscapeCertificate {
    pub basin: i64,
    pub steps: usize,
    /// `‖Fᵏ(z) − (q_m + (k,k,k))‖` for `k = 0..=steps`.
    pub deviations: Vec<f64>,
    /// First `k` after which every three-step window contracts (up to rounding).
    pub monotone_from: Option<usize>,
    /// First `k₀` with `‖Fᵏ(z)‖ ≥ k − 2` for every `k ≥ k₀`.
    pub escape_from: Option<usize>,
    /// Smallest coordinate modulus of the last iterate.
    pub final_min_modulus: f64,
}

impl EscapeCertificate {
    pub fn final_deviation(&self) -> f64 {
        *self.deviations.last().unwrap_or(&f64::INFINITY)
    }
}

/// Follows `Fⁿ(z)` for a point classified into a basin and records its convergence to the
/// translated fixed points and its escape to infinity.
pub fn escape_certificate(m: &WanderingMap, z: &Point3, steps: usize, p: &ClassifyParams) -> Result<EscapeCertificate> {
    let basin = match classify_point(m, z, p).label {
        Label::Basin(b) => b,
        _ => return Err(Error::NotInBasin),
    };
    let mut cur = *z;
    let mut deviations = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        deviations.push(sup_dist(&cur, &q(basin + k as i64)));
        norms.push(sup_norm(&cur));
        if k < steps {
            cur = m.apply(&cur)?;
        }
    }
    let window = 3;
    let mut monotone_from = None;
    for k in (0..deviations.len().saturating_sub(window)).rev() {
        let slack = 1e-12 * (1.0 + k as f64);
        if deviations[k + window] <= deviations[k] + slack {
            monotone_from = Some(k);
        } else {
            break;
        }
    }
    let mut escape_from = None;
    for k in (0..norms.len()).rev() {
        if norms[k] >= k as f64 - 2.0 {
            escape_from = Some(k);
        } else {
            break;
        }
    }
    let final_min_modulus = cur.iter().fold(f64::INFINITY, |acc, w| acc.min(w.norm()));
    Ok(EscapeCertificate { basin, steps, deviations, monotone_from, escape_from, final_min_modulus })
}

/// `count` points drawn uniformly from the Euclidean ball of radius `radius` about `center`
/// in C³ = R⁶, by rejection from the cube.
pub fn ball_perturbations(center: &Point3, radius: f64, count: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: [f64; 6] = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        if x.iter().map(|t| t * t).sum::<f64>() > 1.0 {
            continue;
        }
        out.push(core::array::from_fn(|i| center[i] + C64::new(x[2 * i], x[2 * i + 1]) * radius));
    }
    out
}

/// The real 2-plane `origin + x·u + y·v`, `x ∈ [x_min, x_max]`, `y ∈ [y_min, y_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSpec {
    pub origin: Point3,
    pub u: Point3,
    pub v: Point3,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Default for SliceSpec {
    /// `z₁ = x`, `z₃ = y`, `z₂` their midpoint, on `[−4, 4]²`.
    fn default() -> Self {
        SliceSpec {
            origin: [c(0.0); 3],
            u: [c(1.0), c(0.5), c(0.0)],
            v: [c(0.0), c(0.5), c(1.0)],
            x_range: (-4.0, 4.0),
            y_range: (-4.0, 4.0),
        }
    }
}

impl SliceSpec {
    pub fn at(&self, x: f64, y: f64) -> Point3 {
        core::array::from_fn(|i| self.origin[i] + self.u[i] * x + self.v[i] * y)
    }

    /// Centre of pixel `(px, py)`; row 0 is the top (largest y).
    pub fn pixel(&self, width: usize, height: usize, px: usize, py: usize) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let x = x0 + (px as f64 + 0.5) * (x1 - x0) / width as f64;
        let y = y1 - (py as f64 + 0.5) * (y1 - y0) / height as f64;
        (x, y)
    }
}

pub const MAX_SIDE: usize = 8192;

pub fn check_resolution(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(Error::InvalidParameter("resolution must be between 1 and 8192 per side"));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasinGrid {
    pub slice: SliceSpec,
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub cells: Vec<Classification>,
}

/// Classifies one row of pixels.
pub fn render_row(m: &WanderingMap, slice: &SliceSpec, width: usize, height: usize, py: usize, p: &ClassifyParams) -> Vec<Classification> {
    (0..width)
        .map(|px| {
            let (x, y) = slice.pixel(width, height, px, py);
            classify_point(m, &slice.at(x, y), p)
        })
        .collect()
}

pub fn render_basin_slice(m: &WanderingMap, slice: &SliceSpec, width: usize, height: usize, p: &ClassifyParams) -> Result<BasinGrid> {
    check_resolution(width, height)?;
    let cells = (0..height).flat_map(|py| render_row(m, slice, width, height, py, p)).collect();
    Ok(BasinGrid { slice: slice.clone(), width, height, cells })
}

impl BasinGrid {
    /// Label counts, ordered by label.
    pub fn histogram(&self) -> BTreeMap<Label, usize> {
        let mut h = BTreeMap::new();
        for c in &self.cells {
            *h.entry(c.label).or_insert(0) += 1;
        }
        h
    }

    /// RGB bytes, row-major.
    pub fn raster(&self) -> Vec<u8> {
        self.cells.iter().flat_map(|c| label_color(c.label)).collect()
    }
}

/// Basin `n` gets hue `30°·(n mod 12)`; escaped is black and undecided gray.
pub fn label_color(label: Label) -> [u8; 3] {
    match label {
        Label::Escaped => [0, 0, 0],
        Label::Undecided => [128, 128, 128],
        Label::Basin(n) => hsv_to_rgb(30.0 * n.rem_euclid(12) as f64, 0.8, 0.95),
    }
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let cc = v * s;
    let hp = h / 60.0;
    let x = cc * (1.0 - libm::fabs(hp % 2.0 - 1.0));
    let (r, g, b) = match hp as u32 {
        0 => (cc, x, 0.0),
        1 => (x, cc, 0.0),
        2 => (0.0, cc, x),
        3 => (0.0, x, cc),
        4 => (x, 0.0, cc),
        _ => (cc, 0.0, x),
    };
    let mm = v - cc;
    let to = |t: f64| libm::round((t + mm) * 255.0) as u8;
    [to(r), to(g), to(b)]
}

/// Outcome of comparing a decided point with its image under `F`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShiftCheck {
    pub decided: usize,
    pub shifted: usize,
    pub undecided_image: usize,
    pub other_basin: usize,
}

impl ShiftCheck {
    pub fn fraction(&self) -> f64 {
        if self.decided == 0 {
            0.0
        } else {
            self.shifted as f64 / self.decided as f64
        }
    }
}

/// Samples slice points (seeded), keeps up to `count` that land in a basin, and checks that
/// their images under `F` land in the next basin.
pub fn basin_shift_check(m: &WanderingMap, slice: &SliceSpec, count: usize, seed: u64, p: &ClassifyParams) -> ShiftCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ShiftCheck::default();
    let mut tries = 0;
    while out.decided < count && tries < 1000 * count {
        tries += 1;
        let z = slice.at(rng.gen_range(slice.x_range.0..slice.x_range.1), rng.gen_range(slice.y_range.0..slice.y_range.1));
        let Label::Basin(b) = classify_point(m, &z, p).label else { continue };
        out.decided += 1;
        match m.apply(&z).map(|w| classify_point(m, &w, p).label) {
            Ok(Label::Basin(b2)) if b2 == b + 1 => out.shifted += 1,
            Ok(Label::Basin(_)) => out.other_basin += 1,
            _ => out.undecided_image += 1,
        }
    }
    out
}
