//! The closed polydisk Δ̄ = ∏ D̄_r with its outgoing boundary slab
//! ∂ᵥ⁺Δ = {|z_i| = r for some N−ν+1 ≤ i ≤ N} collapsed to the single class of (r,…,r).
//!
//! Points are compared with the coordinatewise sup-metric. The induced map applies F^ν and
//! sends everything whose image leaves the open polydisk to the collapsed class, which is
//! fixed.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::shiftlike::{CVec, Dynamics, ShiftLikeMap};
use crate::{sup_dist, C64};

/// A point of Δ̄/∼.
#[derive(Clone, Debug, PartialEq)]
pub enum Class {
    /// The class of ∂ᵥ⁺Δ, represented by (r,…,r).
    Collapsed,
    /// A singleton class of a point of Δ̄ ∖ ∂ᵥ⁺Δ.
    Point(CVec),
}

impl Class {
    pub fn is_collapsed(&self) -> bool {
        matches!(self, Class::Collapsed)
    }
}

/// Which formula to use for the metric on Δ̄/∼.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MetricForm {
    /// `min{d(z,w), d(z,∂ᵥ⁺Δ), d(w,∂ᵥ⁺Δ)}`.
    #[default]
    Min,
    /// `min{d(z,w), d(z,∂ᵥ⁺Δ) + d(w,∂ᵥ⁺Δ)}`, the usual one-point-collapse metric.
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientBox {
    r: f64,
    dim: usize,
    nu: usize,
}

impl QuotientBox {
    pub fn new(r: f64, dim: usize, nu: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter("box radius must be positive"));
        }
        if dim < 2 || nu < 1 || nu >= dim {
            return Err(Error::InvalidParameter("box needs N >= 2 and 1 <= nu <= N-1"));
        }
        Ok(QuotientBox { r, dim, nu })
    }

    pub fn for_map(r: f64, map: &ShiftLikeMap) -> Result<Self> {
        QuotientBox::new(r, map.dim(), map.nu())
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// The same box scaled by `s` (radius `s·r`).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        QuotientBox::new(self.r * s, self.dim, self.nu)
    }

    /// The representative (r,…,r) of the collapsed class.
    pub fn collapsed_point(&self) -> CVec {
        CVec::new(vec![C64::new(self.r, 0.0); self.dim]).expect("dim >= 2")
    }

    pub fn in_closed(&self, z: &[C64]) -> bool {
        z.len() == self.dim && z.iter().all(|c| c.norm() <= self.r)
    }

    pub fn in_open(&self, z: &[C64]) -> bool {
        z.len() == self.dim && z.iter().all(|c| c.norm() < self.r)
    }

    /// Whether a point of Δ̄ lies on ∂ᵥ⁺Δ.
    pub fn on_outgoing_boundary(&self, z: &[C64]) -> bool {
        z[self.dim - self.nu..].iter().any(|c| c.norm() >= self.r)
    }

    /// Sup-distance from a point of Δ̄ to ∂ᵥ⁺Δ: `min_{i > N−ν} (r − |z_i|)`.
    #[inline]
    pub fn boundary_distance(&self, z: &[C64]) -> f64 {
        z[self.dim - self.nu..]
            .iter()
            .fold(f64::INFINITY, |m, c| m.min(self.r - c.norm()))
            .max(0.0)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: len });
        }
        Ok(())
    }

    /// The quotient map π.
    pub fn project(&self, z: &CVec) -> Result<Class> {
        self.check_dim(z.len())?;
        if !self.in_closed(z) {
            return Err(Error::OutsideBox);
        }
        if self.on_outgoing_boundary(z) {
            Ok(Class::Collapsed)
        } else {
            Ok(Class::Point(z.clone()))
        }
    }

    pub fn metric(&self, a: &Class, b: &Class) -> f64 {
        self.metric_with(MetricForm::Min, a, b)
    }

    pub fn metric_with(&self, form: MetricForm, a: &Class, b: &Class) -> f64 {
        match (a, b) {
            (Class::Collapsed, Class::Collapsed) => 0.0,
            (Class::Collapsed, Class::Point(z)) | (Class::Point(z), Class::Collapsed) => {
                self.boundary_distance(z)
            }
            (Class::Point(z), Class::Point(w)) => point_metric(
                form,
                sup_dist(z, w),
                self.boundary_distance(z),
                self.boundary_distance(w),
            ),
        }
    }

    /// The induced map: F^ν, collapsing whenever the image leaves the open polydisk.
    pub fn apply<D: Dynamics + ?Sized>(&self, map: &D, c: &Class) -> Result<Class> {
        self.check_dim(map.dim())?;
        let z = match c {
            Class::Collapsed => return Ok(Class::Collapsed),
            Class::Point(z) => z,
        };
        let mut cur = z.to_vec();
        let mut next = vec![C64::new(0.0, 0.0); self.dim];
        for _ in 0..self.nu {
            match map.step(&cur, &mut next) {
                Ok(()) => core::mem::swap(&mut cur, &mut next),
                Err(Error::Range) => return Ok(Class::Collapsed),
                Err(e) => return Err(e),
            }
        }
        if self.in_open(&cur) {
            Ok(Class::Point(CVec::new(cur)?))
        } else {
            Ok(Class::Collapsed)
        }
    }

    /// As [`apply`](Self::apply), additionally checking that the map has this box's N and ν.
    pub fn apply_map(&self, map: &ShiftLikeMap, c: &Class) -> Result<Class> {
        if map.nu() != self.nu {
            return Err(Error::InvalidParameter("map and box disagree on nu"));
        }
        self.apply(map, c)
    }

    /// Tests the triangle inequality of a metric form on random triples drawn from `classes`.
    pub fn check_triangle(
        &self,
        form: MetricForm,
        classes: &[Class],
        triples: usize,
        seed: u64,
    ) -> TriangleReport {
        let mut report = TriangleReport::default();
        if classes.is_empty() {
            return report;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..triples {
            let (i, j, k) = (
                rng.gen_range(0..classes.len()),
                rng.gen_range(0..classes.len()),
                rng.gen_range(0..classes.len()),
            );
            let d_ik = self.metric_with(form, &classes[i], &classes[k]);
            let d_ij = self.metric_with(form, &classes[i], &classes[j]);
            let d_jk = self.metric_with(form, &classes[j], &classes[k]);
            report.checked += 1;
            let excess = d_ik - (d_ij + d_jk);
            if excess > 1e-12 {
                report.violations += 1;
                if excess > report.worst_excess {
                    report.worst_excess = excess;
                    report.worst = Some([i, j, k]);
                }
            }
        }
        report
    }
}

/// Metric between two non-collapsed classes given their sup-distance and boundary distances.
#[inline]
pub fn point_metric(form: MetricForm, d: f64, dz: f64, dw: f64) -> f64 {
    match form {
        MetricForm::Min => d.min(dz).min(dw),
        MetricForm::Sum => d.min(dz + dw),
    }
}

/// Outcome of a random triangle-inequality audit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleReport {
    pub checked: usize,
    pub violations: usize,
    pub worst_excess: f64,
    /// Indices (x, y, z) with d(x,z) − d(x,y) − d(y,z) = `worst_excess`.
    pub worst: Option<[usize; 3]>,
}

/// Random points of Δ̄ in a box, projected; handy for metric audits.
pub fn random_classes(q: &QuotientBox, count: usize, seed: u64) -> Vec<Class> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = q.radius();
    (0..count)
        .map(|_| {
            let coords: Vec<C64> = (0..q.dim())
                .map(|_| C64::from_polar(r * libm::sqrt(rng.gen::<f64>()), rng.gen_range(0.0..core::f64::consts::TAU)))
                .collect();
            // Every sampled coordinate has modulus ≤ r.
            q.project(&CVec::new(coords).expect("finite")).unwrap_or(Class::Collapsed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::shiftlike::IdentityMap;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pt(v: &[C64]) -> CVec {
        CVec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn projection() {
        let q = QuotientBox::new(1.0, 3, 1).unwrap();
        let z = pt(&[c(0.1, 0.), c(0.2, 0.), c(0.3, 0.)]);
        assert_eq!(q.project(&z).unwrap(), Class::Point(z.clone()));
        let b1 = pt(&[c(0.1, 0.), c(0.2, 0.), c(0., 1.)]);
        let b2 = pt(&[c(0.5, 0.), c(0.9, 0.), c(-1., 0.)]);
        assert_eq!(q.project(&b1).unwrap(), Class::Collapsed);
        assert_eq!(q.project(&b2).unwrap(), Class::Collapsed);
        // |z₁| = r is on ∂₋, not collapsed.
        let lower = pt(&[c(1., 0.), c(0.2, 0.), c(0.3, 0.)]);
        assert!(!q.project(&lower).unwrap().is_collapsed());
        let outside = pt(&[c(0.1, 0.), c(2., 0.), c(0.3, 0.)]);
        assert_eq!(q.project(&outside), Err(Error::OutsideBox));
    }

    #[test]
    fn metric_examples() {
        let q = QuotientBox::new(1.0, 2, 1).unwrap();
        let z = Class::Point(pt(&[c(0.0, 0.), c(0.0, 0.)]));
        let w = Class::Point(pt(&[c(0.1, 0.), c(0.05, 0.)]));
        assert!((q.metric(&z, &w) - 0.1).abs() < 1e-15);
        assert!((q.metric(&w, &Class::Collapsed) - 0.95).abs() < 1e-15);
        assert_eq!(q.metric(&Class::Collapsed, &Class::Collapsed), 0.0);
        let b1 = q.project(&pt(&[c(0.3, 0.), c(1., 0.)])).unwrap();
        let b2 = q.project(&pt(&[c(-0.3, 0.), c(0., -1.)])).unwrap();
        assert_eq!(q.metric(&b1, &b2), 0.0);
    }

    #[test]
    fn metric_basic_properties() {
        let q = QuotientBox::new(1.5, 3, 2).unwrap();
        let classes = random_classes(&q, 200, 7);
        for form in [MetricForm::Min, MetricForm::Sum] {
            for a in &classes {
                assert_eq!(q.metric_with(form, a, a), 0.0);
                for b in classes.iter().take(40) {
                    let d = q.metric_with(form, a, b);
                    assert_eq!(d, q.metric_with(form, b, a));
                    if let (Class::Point(x), Class::Point(y)) = (a, b) {
                        assert!(d <= sup_dist(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn min_form_violates_triangle_inequality() {
        // x, y deep inside and far apart; z close to ∂ᵥ⁺Δ.
        let q = QuotientBox::new(1.0, 2, 1).unwrap();
        let x = Class::Point(pt(&[c(-0.9, 0.), c(0.0, 0.)]));
        let y = Class::Point(pt(&[c(0.9, 0.), c(0.0, 0.)]));
        let z = Class::Point(pt(&[c(0.0, 0.), c(0.95, 0.)]));
        let dxy = q.metric(&x, &y);
        assert!((dxy - 1.0).abs() < 1e-15);
        assert!(dxy > q.metric(&x, &z) + q.metric(&z, &y));
        // The sum form is a genuine metric on the same triple.
        let s = |a: &Class, b: &Class| q.metric_with(MetricForm::Sum, a, b);
        assert!(s(&x, &y) <= s(&x, &z) + s(&z, &y));

        let classes = random_classes(&q, 500, 3);
        let min_report = q.check_triangle(MetricForm::Min, &classes, 20_000, 1);
        assert!(min_report.violations > 0);
        let [i, j, k] = min_report.worst.unwrap();
        assert!(q.metric(&classes[i], &classes[k]) > q.metric(&classes[i], &classes[j]) + q.metric(&classes[j], &classes[k]));
        let sum_report = q.check_triangle(MetricForm::Sum, &classes, 20_000, 1);
        assert_eq!(sum_report.violations, 0);
    }

    #[test]
    fn induced_map() {
        let q = QuotientBox::new(1.0, 2, 1).unwrap();
        let f = ShiftLikeMap::new(2, 1, c(0.5, 0.), Expr::monomial(4.0, 2)).unwrap();
        assert_eq!(q.apply(&f, &Class::Collapsed).unwrap(), Class::Collapsed);
        let z = Class::Point(pt(&[c(0.1, 0.), c(0.2, 0.)]));
        let img = q.apply(&f, &z).unwrap();
        let Class::Point(w) = img else { panic!("collapsed") };
        assert!(sup_dist(&w, &[c(0.2, 0.), c(0.11, 0.)]) < 1e-15);
        let out = Class::Point(pt(&[c(0.1, 0.), c(0.6, 0.)]));
        assert_eq!(q.apply(&f, &out).unwrap(), Class::Collapsed);
        assert!(q.apply(&IdentityMap { dim: 3 }, &z).is_err());
        let g = ShiftLikeMap::new(3, 2, c(0.5, 0.), Expr::var()).unwrap();
        assert!(q.apply_map(&g, &z).is_err());
    }

    #[test]
    fn induced_map_agrees_with_iteration_on_trapped_orbits() {
        let q = QuotientBox::new(1.0, 3, 2).unwrap();
        let f = ShiftLikeMap::new(3, 2, c(0.3, 0.), Expr::monomial(0.5, 2)).unwrap();
        for cls in random_classes(&q, 300, 5) {
            let Class::Point(z) = &cls else { continue };
            let mut plain = z.to_vec();
            let mut scratch = vec![c(0., 0.); 3];
            let mut current = cls.clone();
            for _ in 0..5 {
                f.power_into(2, &plain, &mut scratch).unwrap();
                plain.copy_from_slice(&scratch);
                current = q.apply(&f, &current).unwrap();
                if !q.in_open(&plain) {
                    break;
                }
                assert_eq!(current, Class::Point(pt(&plain)));
            }
        }
    }

    #[test]
    fn horseshoe_grid_mostly_collapses() {
        let q = QuotientBox::new(1.0, 2, 1).unwrap();
        let f = ShiftLikeMap::new(2, 1, c(0.5, 0.), Expr::monomial(4.0, 2)).unwrap();
        let res = 40;
        let (mut total, mut survivors) = (0, 0);
        for i in 0..res {
            for j in 0..res {
                let z2 = c(-1.0 + 2.0 * (i as f64 + 0.5) / res as f64, -1.0 + 2.0 * (j as f64 + 0.5) / res as f64);
                if z2.norm() >= 1.0 {
                    continue;
                }
                total += 1;
                let mut cls = Class::Point(pt(&[c(0., 0.), z2]));
                for _ in 0..3 {
                    cls = q.apply(&f, &cls).unwrap();
                }
                survivors += usize::from(!cls.is_collapsed());
            }
        }
        assert!(survivors > 0);
        assert!(2 * survivors < total, "{survivors} of {total}");
    }
}
