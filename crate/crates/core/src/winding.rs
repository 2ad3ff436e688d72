//! Argument-principle tools: winding numbers of image circles, zero counts, the
//! horseshoe certificate `|f| > (|a|+1)r` on ∂D_r with degree d ≥ 1, biholomorphic-preimage
//! tests and the rescaled-family probe.
//!
//! Winding numbers are computed by summing argument increments of the sampled image curve.
//! Sampling starts at 256 points and doubles until every increment is below π/2, with a cap
//! of 2²⁰ samples. A result is only accepted when the summed turn is within 0.25 of an
//! integer; anything else is [`Inconclusive`].

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Inconclusive, Result};
use crate::expr::Expr;
use crate::C64;

pub const INITIAL_SAMPLES: usize = 256;
pub const MAX_SAMPLES: usize = 1 << 20;
/// Relative threshold (against the largest sampled modulus) for "passes through the origin".
pub const NEAR_ZERO_REL: f64 = 1e-9;
pub const MAX_RESIDUAL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindingResult {
    pub value: i64,
    /// Distance of the raw turn count from `value`.
    pub residual: f64,
    pub samples_used: usize,
    /// Smallest sampled modulus of the shifted curve.
    pub min_modulus: f64,
}

/// A closed disk `center + radius·D̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disk {
    pub center: C64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: C64, radius: f64) -> Self {
        Disk { center, radius }
    }

    #[inline]
    pub fn boundary_point(&self, t: f64) -> C64 {
        self.center + C64::from_polar(self.radius, TAU * t)
    }
}

/// Samples `f(c + ρe^{2πi t}) − w0` on a doubling grid of `t`.
struct Contour<'a> {
    f: &'a Expr,
    disk: Disk,
    w0: C64,
    values: Vec<C64>,
}

impl<'a> Contour<'a> {
    fn new(f: &'a Expr, disk: Disk, w0: C64) -> Result<Self> {
        let mut c = Contour { f, disk, w0, values: Vec::new() };
        c.values = (0..INITIAL_SAMPLES)
            .map(|i| c.value_at(i as f64 / INITIAL_SAMPLES as f64))
            .collect::<Result<_>>()?;
        Ok(c)
    }

    fn value_at(&self, t: f64) -> Result<C64> {
        Ok(self.f.eval(self.disk.boundary_point(t))? - self.w0)
    }

    fn refine(&mut self) -> Result<()> {
        let m = self.values.len();
        let mut next = Vec::with_capacity(2 * m);
        for (i, v) in self.values.iter().enumerate() {
            next.push(*v);
            next.push(self.value_at((2 * i + 1) as f64 / (2 * m) as f64)?);
        }
        self.values = next;
        Ok(())
    }

    fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.norm()), hi.max(v.norm())))
    }
}

fn arg_increment(from: C64, to: C64) -> f64 {
    let q = to * from.conj();
    libm::atan2(q.im, q.re)
}

/// Winding number of `t ↦ f(center + radius·e^{2πit}) − w0` around 0.
pub fn winding_number(f: &Expr, center: C64, radius: f64, w0: C64) -> Result<WindingResult> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("contour radius must be positive"));
    }
    let disk = Disk::new(center, radius);
    let mut contour = Contour::new(f, disk, w0)?;
    // A coarse contour can alias (z^300 on 256 points looks like small steps), so a count is
    // accepted only once two consecutive levels agree.
    let mut previous: Option<f64> = None;
    loop {
        let (lo, hi) = contour.min_max();
        if lo <= NEAR_ZERO_REL * hi.max(f64::MIN_POSITIVE) || lo == 0.0 {
            return Err(Error::Inconclusive(Inconclusive::NearZero { min_modulus: lo }));
        }
        let m = contour.values.len();
        let mut total = 0.0;
        let mut worst = 0.0f64;
        for i in 0..m {
            let inc = arg_increment(contour.values[i], contour.values[(i + 1) % m]);
            worst = worst.max(inc.abs());
            total += inc;
        }
        let turns = total / TAU;
        let value = libm::round(turns);
        if worst < FRAC_PI_2 {
            if previous == Some(value) {
                let residual = (turns - value).abs();
                if residual > MAX_RESIDUAL {
                    return Err(Error::Inconclusive(Inconclusive::Residual { residual }));
                }
                return Ok(WindingResult { value: value as i64, residual, samples_used: m, min_modulus: lo });
            }
            previous = Some(value);
        } else {
            previous = None;
        }
        if 2 * m > MAX_SAMPLES {
            return Err(Error::Inconclusive(Inconclusive::RefinementCap { samples: m }));
        }
        contour.refine()?;
    }
}

/// Number of solutions of `f(z) = w` in the open disk, counted with multiplicity.
pub fn zero_count(f: &Expr, w: C64, center: C64, radius: f64) -> Result<i64> {
    winding_number(f, center, radius, w).map(|r| r.value)
}

/// Minimum of `|f|` over a circle: dense sampling followed by golden-section refinement
/// around the smallest sample.
pub fn min_modulus_on_circle(f: &Expr, disk: Disk, samples: usize) -> Result<f64> {
    let samples = samples.max(16);
    let g = |t: f64| -> Result<f64> { Ok(f.eval(disk.boundary_point(t))?.norm()) };
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..samples {
        let v = g(i as f64 / samples as f64)?;
        if v < best.0 {
            best = (v, i);
        }
    }
    let h = 1.0 / samples as f64;
    let (mut lo, mut hi) = ((best.1 as f64 - 1.0) * h, (best.1 as f64 + 1.0) * h);
    let phi = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1)?, g(x2)?);
    for _ in 0..60 {
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - phi * (hi - lo);
            g1 = g(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + phi * (hi - lo);
            g2 = g(x2)?;
        }
    }
    Ok(best.0.min(g1).min(g2))
}

/// Samples used by [`min_modulus_on_circle`] inside the certificate and probe.
pub const MODULUS_SAMPLES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorseshoeCertificate {
    pub min_modulus: f64,
    /// `(|a| + 1)·r`, the bound the minimum must exceed.
    pub threshold: f64,
    pub degree: i64,
    pub valid: bool,
    /// `log d` when valid: the certified lower bound for the entropy of F^ν.
    pub entropy_bound: Option<f64>,
}

pub fn horseshoe_certificate(f: &Expr, a: C64, r: f64) -> Result<HorseshoeCertificate> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("certificate radius must be positive"));
    }
    let disk = Disk::new(C64::new(0.0, 0.0), r);
    let min_modulus = min_modulus_on_circle(f, disk, MODULUS_SAMPLES)?;
    let degree = winding_number(f, disk.center, r, C64::new(0.0, 0.0))?.value;
    let threshold = (a.norm() + 1.0) * r;
    let valid = min_modulus > threshold && degree >= 1;
    let entropy_bound = valid.then(|| libm::log(degree as f64));
    Ok(HorseshoeCertificate { min_modulus, threshold, degree, valid, entropy_bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreimageVerdict {
    Yes,
    No,
    Inconclusive,
}

/// Default polar grid density (rings × rays) for target-disk sampling.
pub const DEFAULT_GRID: usize = 21;

/// Deterministic polar grid over the open target disk: radii `R·p/density` for
/// `p = 0..density` and `density` equally spaced angles per ring.
pub fn polar_grid(target: Disk, density: usize) -> Vec<C64> {
    let density = density.max(1);
    let mut pts = Vec::with_capacity(density * density);
    for p in 0..density {
        let rho = target.radius * p as f64 / density as f64;
        for q in 0..density {
            let theta = TAU * q as f64 / density as f64;
            pts.push(target.center + C64::from_polar(rho, theta));
        }
    }
    pts
}

/// Whether the target disk has a biholomorphic preimage under `f` inside `source`: every
/// sampled target value has exactly one preimage in `source`.
///
/// A definite count other than 1 gives `No` even if other samples were inconclusive.
pub fn biholo_preimage_test(f: &Expr, source: Disk, target: Disk, density: usize) -> PreimageVerdict {
    if !(source.radius > 0.0 && target.radius > 0.0) {
        return PreimageVerdict::Inconclusive;
    }
    let mut inconclusive = false;
    for w in polar_grid(target, density) {
        match zero_count(f, w, source.center, source.radius) {
            Ok(1) => {}
            Ok(_) => return PreimageVerdict::No,
            Err(_) => inconclusive = true,
        }
    }
    if inconclusive {
        PreimageVerdict::Inconclusive
    } else {
        PreimageVerdict::Yes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub n: u32,
    pub min_modulus: f64,
    /// `None` when the winding computation was inconclusive.
    pub winding: Option<i64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub r: f64,
    pub big_r: f64,
    pub m: i64,
    pub rows: Vec<ProbeRow>,
    /// Smallest n in the scanned range from which every later row passes.
    pub first_pass: Option<u32>,
    pub inconclusive: Vec<u32>,
}

/// Relative slack for the modulus condition: `min |f_n| ≥ R` up to rounding.
pub const PROBE_MODULUS_SLACK: f64 = 1e-12;

/// Scans `f_n(z) = f(nz)/n` for `n` in `ns` and checks on ∂D_r that
/// (1) `min |f_n| ≥ R` (up to rounding) and (2) the winding of `f_n(∂D_r)` about 0 is ≥ m.
pub fn rescaled_family_probe(f: &Expr, r: f64, big_r: f64, m: i64, ns: &[u32]) -> Result<ProbeReport> {
    if !(r > 0.0 && big_r > 0.0) || m < 1 {
        return Err(Error::InvalidParameter("probe needs r > 0, R > 0, m >= 1"));
    }
    let rows = ns
        .iter()
        .map(|&n| probe_row(f, r, big_r, m, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_probe(r, big_r, m, rows))
}

/// One row of [`rescaled_family_probe`]; exposed for parallel drivers.
pub fn probe_row(f: &Expr, r: f64, big_r: f64, m: i64, n: u32) -> Result<ProbeRow> {
    let fn_ = f.rescale(n)?;
    let disk = Disk::new(C64::new(0.0, 0.0), r);
    let min_modulus = min_modulus_on_circle(&fn_, disk, MODULUS_SAMPLES)?;
    let winding = winding_number(&fn_, disk.center, r, C64::new(0.0, 0.0)).ok().map(|w| w.value);
    let pass = min_modulus >= big_r * (1.0 - PROBE_MODULUS_SLACK) && winding.is_some_and(|w| w >= m);
    Ok(ProbeRow { n, min_modulus, winding, pass })
}

pub fn assemble_probe(r: f64, big_r: f64, m: i64, rows: Vec<ProbeRow>) -> ProbeReport {
    let mut first_pass = None;
    for row in rows.iter().rev() {
        if row.pass {
            first_pass = Some(row.n);
        } else {
            break;
        }
    }
    let inconclusive = rows.iter().filter(|r| r.winding.is_none()).map(|r| r.n).collect();
    ProbeReport { r, big_r, m, rows, first_pass, inconclusive }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zero() -> C64 {
        c(0., 0.)
    }

    #[test]
    fn degrees_of_monomials() {
        for d in 1..=6 {
            let w = winding_number(&Expr::pow(Expr::var(), d), zero(), 1.0, zero()).unwrap();
            assert_eq!(w.value, d as i64);
            assert!(w.residual < 1e-9);
        }
        let e = winding_number(&Expr::exp(Expr::var()), zero(), 1.0, zero()).unwrap();
        assert_eq!(e.value, 0);
    }

    #[test]
    fn shifted_quadratic() {
        let f = Expr::pow(Expr::var(), 2) - Expr::real(4.0);
        assert_eq!(winding_number(&f, zero(), 3.0, zero()).unwrap().value, 2);
        assert_eq!(winding_number(&f, zero(), 1.0, zero()).unwrap().value, 0);
        // Contour through a root.
        assert!(matches!(
            winding_number(&f, zero(), 2.0, zero()),
            Err(Error::Inconclusive(Inconclusive::NearZero { .. }))
        ));
    }

    #[test]
    fn zero_count_examples() {
        let s = Expr::sin(Expr::mul(Expr::real(TAU), Expr::var()));
        assert_eq!(zero_count(&s, zero(), zero(), 0.4).unwrap(), 1);
        assert_eq!(zero_count(&s, zero(), zero(), 1.2).unwrap(), 5);
        let sq = Expr::pow(Expr::var(), 2);
        assert_eq!(zero_count(&sq, c(1., 0.), zero(), 1.5).unwrap(), 2);
        assert_eq!(zero_count(&sq, c(10., 0.), zero(), 1.5).unwrap(), 0);
    }

    #[test]
    fn refinement_handles_high_degree() {
        // z^300 needs more than the initial 256 samples.
        let w = winding_number(&Expr::pow(Expr::var(), 300), zero(), 1.0, zero()).unwrap();
        assert_eq!(w.value, 300);
        assert!(w.samples_used > INITIAL_SAMPLES);
    }

    #[test]
    fn winding_is_additive_over_products() {
        let polys = [
            Expr::pow(Expr::var(), 2) - Expr::real(0.25),
            Expr::var() - Expr::constant(c(0.3, 0.4)),
            Expr::pow(Expr::var(), 3) + Expr::constant(c(2.0, 1.0)),
            Expr::var() - Expr::real(5.0),
        ];
        for p in &polys {
            for q in &polys {
                let wp = winding_number(p, zero(), 1.0, zero()).unwrap().value;
                let wq = winding_number(q, zero(), 1.0, zero()).unwrap().value;
                let wpq = winding_number(&(p.clone() * q.clone()), zero(), 1.0, zero()).unwrap().value;
                assert_eq!(wpq, wp + wq);
            }
        }
    }

    /// Hand-constructed polynomials ∏(z − root) with explicitly known roots.
    #[test]
    fn zero_count_matches_known_roots() {
        let cases: [(&[C64], C64, f64); 20] = [
            (&[c(0., 0.)], zero(), 1.0),
            (&[c(2., 0.)], zero(), 1.0),
            (&[c(0.5, 0.), c(-0.5, 0.)], zero(), 1.0),
            (&[c(0.5, 0.), c(-1.5, 0.)], zero(), 1.0),
            (&[c(0., 0.9), c(0., -0.9), c(3., 0.)], zero(), 1.0),
            (&[c(1., 1.), c(1., -1.)], c(1., 0.), 1.5),
            (&[c(1., 1.), c(1., -1.)], c(1., 0.), 0.5),
            (&[c(0.1, 0.), c(0.2, 0.), c(0.3, 0.)], zero(), 0.25),
            (&[c(0.1, 0.), c(0.2, 0.), c(0.3, 0.)], zero(), 0.35),
            (&[c(0.1, 0.), c(0.1, 0.)], zero(), 0.5),
            (&[c(0.1, 0.), c(0.1, 0.), c(0.1, 0.)], c(0.1, 0.), 0.01),
            (&[c(5., 5.), c(-5., 5.), c(0., -7.)], zero(), 8.0),
            (&[c(5., 5.), c(-5., 5.), c(0., -7.)], zero(), 7.5),
            (&[c(5., 5.), c(-5., 5.), c(0., -7.)], c(5., 5.), 1.0),
            (&[c(-2., 0.), c(2., 0.), c(0., 2.), c(0., -2.)], zero(), 3.0),
            (&[c(-2., 0.), c(2., 0.), c(0., 2.), c(0., -2.)], c(2., 2.), 2.5),
            (&[c(0.3, 0.3), c(-0.3, -0.3), c(0.3, -0.3), c(-0.3, 0.3), c(0., 0.)], zero(), 0.5),
            (&[c(0.3, 0.3), c(-0.3, -0.3), c(0.3, -0.3), c(-0.3, 0.3), c(0., 0.)], zero(), 0.2),
            (&[c(10., 0.), c(11., 0.)], c(10.5, 0.), 0.6),
            (&[c(10., 0.), c(11., 0.)], c(10.5, 0.), 0.4),
        ];
        for (roots, center, radius) in cases {
            let mut p = Expr::real(1.0);
            for r in roots {
                p = p * (Expr::var() - Expr::constant(*r));
            }
            let expected = roots.iter().filter(|r| (*r - center).norm() < radius).count() as i64;
            assert_eq!(zero_count(&p, zero(), center, radius).unwrap(), expected, "{roots:?} {center} {radius}");
        }
    }

    #[test]
    fn certificate_examples() {
        let h = horseshoe_certificate(&Expr::monomial(4.0, 2), c(0.5, 0.), 1.0).unwrap();
        assert!((h.min_modulus - 4.0).abs() < 1e-12);
        assert_eq!(h.degree, 2);
        assert!(h.valid);
        assert!((h.entropy_bound.unwrap() - 2f64.ln()).abs() < 1e-15);

        let h = horseshoe_certificate(&Expr::var(), c(1., 0.), 1.0).unwrap();
        assert!((h.min_modulus - 1.0).abs() < 1e-12);
        assert!(!h.valid);
        assert_eq!(h.entropy_bound, None);

        let h = horseshoe_certificate(&Expr::monomial(10.0, 3), c(1., 0.), 1.0).unwrap();
        assert_eq!(h.degree, 3);
        assert!(h.valid);
        assert!((h.entropy_bound.unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn min_modulus_refines_between_samples() {
        // |z − 1.0001e^{iθ₀}| on the unit circle has its minimum 1e-4 at an off-grid angle.
        let theta0 = 0.123_456;
        let f = Expr::var() - Expr::constant(C64::from_polar(1.0001, theta0));
        let m = min_modulus_on_circle(&f, Disk::new(zero(), 1.0), 64).unwrap();
        assert!((m - 1e-4).abs() < 1e-9, "{m}");
    }

    #[test]
    fn preimage_examples() {
        let src = Disk::new(c(0.3, -0.2), 0.5);
        assert_eq!(biholo_preimage_test(&Expr::var(), src, src, DEFAULT_GRID), PreimageVerdict::Yes);
        let sq = Expr::pow(Expr::var(), 2);
        let d = Disk::new(c(1., 0.), 0.2);
        assert_eq!(biholo_preimage_test(&sq, d, d, DEFAULT_GRID), PreimageVerdict::Yes);
        assert_eq!(
            biholo_preimage_test(&sq, Disk::new(zero(), 0.5), Disk::new(c(0.01, 0.), 0.1), DEFAULT_GRID),
            PreimageVerdict::No
        );
        // Target far outside the image of the source disk.
        assert_eq!(
            biholo_preimage_test(&sq, Disk::new(zero(), 0.5), Disk::new(c(5., 0.), 0.1), DEFAULT_GRID),
            PreimageVerdict::No
        );
    }

    #[test]
    fn preimage_with_contour_hit_is_inconclusive() {
        // For f = id the only sampled target value (the center 0.5) lies on the source circle.
        let v = biholo_preimage_test(&Expr::var(), Disk::new(zero(), 0.5), Disk::new(c(0.5, 0.), 0.2), 1);
        assert_eq!(v, PreimageVerdict::Inconclusive);
    }

    #[test]
    fn rouche_stability_for_linear_maps() {
        // f(z) = λz: the target D_R(c) has a biholomorphic preimage in D_r(x) iff
        // |c − λx| + R < |λ|r. Perturbing by a small constant keeps a "yes" with margin.
        let lambda = 40.0;
        let (r, big_r, a) = (0.1, 0.5, 0.5);
        let margin = (big_r - r - a * r) / 2.0;
        let src = Disk::new(c(0.2, 0.1), r);
        let target = Disk::new(c(lambda * 0.2 + 0.7, lambda * 0.1 - 0.4), big_r);
        let f = Expr::monomial(lambda, 1);
        assert_eq!(biholo_preimage_test(&f, src, target, 11), PreimageVerdict::Yes);
        for k in 0..8 {
            let shift = C64::from_polar(0.99 * margin, k as f64);
            let g = f.clone() + Expr::constant(shift);
            assert_eq!(biholo_preimage_test(&g, src, target, 11), PreimageVerdict::Yes);
        }
    }

    #[test]
    fn probe_examples() {
        let ns: Vec<u32> = (1..=60).collect();
        let rep = rescaled_family_probe(&Expr::pow(Expr::var(), 2), 0.5, 10.0, 2, &ns).unwrap();
        assert_eq!(rep.first_pass, Some(40));
        for row in &rep.rows {
            assert!((row.min_modulus - row.n as f64 * 0.25).abs() < 1e-12);
            assert_eq!(row.winding, Some(2));
        }
        let rep = rescaled_family_probe(&Expr::var(), 0.5, 1.0, 1, &ns).unwrap();
        assert_eq!(rep.first_pass, None);
        let rep = rescaled_family_probe(&Expr::pow(Expr::var(), 3), 0.5, 1.0, 4, &ns).unwrap();
        assert_eq!(rep.first_pass, None);
        assert!(rep.rows.iter().all(|r| r.winding == Some(3)));
    }
}
