//! Shift-like maps of type ν on Cᴺ:
//!
//! `F(z₁,…,z_N) = (z₂,…,z_N, f(z_{N−ν+1}) − a·z₁)`
//!
//! with `f` entire and `a ≠ 0`. Successive iterates overlap in N−1 coordinates, so an orbit
//! is a single bi-infinite sequence read through a window of width N.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::CMatrix;
use crate::{sup_norm, C64};

/// A point of Cᴺ with N ≥ 2 and finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(Vec<C64>);

impl CVec {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidParameter("points need at least two coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Range);
        }
        Ok(CVec(coords))
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        CVec::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> CVec {
        CVec(self.0.iter().map(|c| c * s).collect())
    }
}

impl Deref for CVec {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

/// A self-map of Cᴺ that can be stepped in place. Implemented by [`ShiftLikeMap`] and by
/// the trivial [`IdentityMap`] used as a zero-entropy reference.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;

    /// Writes the image of `z` into `out`; both have length `dim()`.
    fn step(&self, z: &[C64], out: &mut [C64]) -> Result<()>;

    /// Pushes the tangent vector `v` at `z` forward by the derivative.
    fn tangent(&self, z: &[C64], v: &[C64], out: &mut [C64]) -> Result<()>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityMap {
    pub dim: usize,
}

impl Dynamics for IdentityMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self, z: &[C64], out: &mut [C64]) -> Result<()> {
        out.copy_from_slice(z);
        Ok(())
    }

    fn tangent(&self, _z: &[C64], v: &[C64], out: &mut [C64]) -> Result<()> {
        out.copy_from_slice(v);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftLikeMap {
    dim: usize,
    nu: usize,
    a: C64,
    f: Expr,
    df: Expr,
}

impl ShiftLikeMap {
    pub fn new(dim: usize, nu: usize, a: C64, f: Expr) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter("N must be at least 2"));
        }
        if nu < 1 || nu >= dim {
            return Err(Error::InvalidParameter("nu must satisfy 1 <= nu <= N-1"));
        }
        if a.norm() == 0.0 || !a.is_finite() {
            return Err(Error::InvalidParameter("a must be a finite nonzero complex number"));
        }
        let df = f.derivative();
        Ok(ShiftLikeMap { dim, nu, a, f, df })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    /// Zero-based index of the coordinate fed to `f`.
    #[inline]
    fn active(&self) -> usize {
        self.dim - self.nu
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: len });
        }
        Ok(())
    }

    /// Slice form of [`apply`](Self::apply) without allocation.
    pub fn apply_into(&self, z: &[C64], out: &mut [C64]) -> Result<()> {
        self.check_dim(z.len())?;
        self.check_dim(out.len())?;
        let last = self.f.eval_unchecked(z[self.active()]) - self.a * z[0];
        if !last.is_finite() {
            return Err(Error::Range);
        }
        out[..self.dim - 1].copy_from_slice(&z[1..]);
        out[self.dim - 1] = last;
        Ok(())
    }

    pub fn apply(&self, z: &CVec) -> Result<CVec> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(z, &mut out)?;
        Ok(CVec(out))
    }

    /// `z₁ = (f(w_{N−ν}) − w_N)/a`, `z_j = w_{j−1}` for j ≥ 2.
    pub fn apply_inverse(&self, w: &CVec) -> Result<CVec> {
        self.check_dim(w.len())?;
        let first = (self.f.eval_unchecked(w[self.active() - 1]) - w[self.dim - 1]) / self.a;
        if !first.is_finite() {
            return Err(Error::Range);
        }
        let mut out = Vec::with_capacity(self.dim);
        out.push(first);
        out.extend_from_slice(&w[..self.dim - 1]);
        Ok(CVec(out))
    }

    /// `F^k` applied in place through a scratch buffer.
    pub fn power_into(&self, k: usize, z: &[C64], out: &mut [C64]) -> Result<()> {
        self.check_dim(z.len())?;
        out.copy_from_slice(z);
        let mut tmp = vec![C64::new(0.0, 0.0); self.dim];
        for _ in 0..k {
            self.apply_into(out, &mut tmp)?;
            out.copy_from_slice(&tmp);
        }
        Ok(())
    }

    /// Iterates up to `n` times, stopping early once the sup-norm exceeds `escape_radius`
    /// (or evaluation overflows).
    pub fn iterate(&self, z: &CVec, n: usize, escape_radius: f64) -> Result<Orbit> {
        self.check_dim(z.len())?;
        let mut samples = vec![z.clone()];
        let mut escaped_at = (sup_norm(z) > escape_radius).then_some(0);
        let mut j = 0;
        while escaped_at.is_none() && j < n {
            j += 1;
            match self.apply(&samples[j - 1]) {
                Ok(w) => {
                    let out = sup_norm(&w) > escape_radius;
                    samples.push(w);
                    if out {
                        escaped_at = Some(j);
                    }
                }
                Err(Error::Range) => escaped_at = Some(j),
                Err(e) => return Err(e),
            }
        }
        Ok(Orbit { base: z.clone(), samples, escaped_at })
    }

    /// Rows 1..N−1 are shifted unit rows; the last row holds −a in column 1 and
    /// f′(z_{N−ν+1}) in column N−ν+1.
    pub fn jacobian(&self, z: &[C64]) -> Result<CMatrix> {
        self.check_dim(z.len())?;
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = C64::new(1.0, 0.0);
        }
        let d = self.df.eval(z[self.active()])?;
        m[(n - 1, 0)] = -self.a;
        m[(n - 1, self.active())] += d;
        Ok(m)
    }

    /// Jacobian-vector product along the orbit without forming the matrix.
    pub fn push_tangent(&self, z: &[C64], v: &[C64], out: &mut [C64]) -> Result<()> {
        let n = self.dim;
        let d = self.df.eval_unchecked(z[self.active()]);
        let last = d * v[self.active()] - self.a * v[0];
        if !last.is_finite() {
            return Err(Error::Range);
        }
        out[..n - 1].copy_from_slice(&v[1..]);
        out[n - 1] = last;
        Ok(())
    }

    /// `F_n`, conjugate to `F` through `Λ_n(z) = n·z`: `Λ_n ∘ F_n = F ∘ Λ_n`.
    pub fn dilation_conjugate(&self, n: u32) -> Result<ShiftLikeMap> {
        ShiftLikeMap::new(self.dim, self.nu, self.a, self.f.rescale(n)?)
    }
}

impl Dynamics for ShiftLikeMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self, z: &[C64], out: &mut [C64]) -> Result<()> {
        self.apply_into(z, out)
    }

    fn tangent(&self, z: &[C64], v: &[C64], out: &mut [C64]) -> Result<()> {
        self.push_tangent(z, v, out)
    }
}

/// A finite orbit segment. `samples[0]` is the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub base: CVec,
    pub samples: Vec<CVec>,
    pub escaped_at: Option<usize>,
}

impl Orbit {
    /// The bi-infinite-sequence reading: coordinate `k` of sample `j` is term `j + k`.
    pub fn sequence(&self) -> Vec<C64> {
        let mut seq: Vec<C64> = self.samples[0].to_vec();
        for s in &self.samples[1..] {
            seq.push(s[s.len() - 1]);
        }
        seq
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> CVec {
        let coords = (0..n)
            .map(|_| loop {
                let z = c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
                if z.norm() < radius {
                    break z;
                }
            })
            .collect();
        CVec::new(coords).unwrap()
    }

    fn sample_maps() -> Vec<ShiftLikeMap> {
        vec![
            ShiftLikeMap::new(2, 1, c(0.5, 0.0), Expr::monomial(4.0, 2)).unwrap(),
            ShiftLikeMap::new(3, 1, c(2.0, 0.0), Expr::var()).unwrap(),
            ShiftLikeMap::new(3, 2, c(0.3, -0.4), Expr::exp(Expr::var())).unwrap(),
            ShiftLikeMap::new(4, 2, c(-1.0, 0.5), crate::expr::wandering_f()).unwrap(),
            ShiftLikeMap::new(5, 3, c(0.1, 0.0), Expr::sin(Expr::var())).unwrap(),
        ]
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ShiftLikeMap::new(1, 1, c(1., 0.), Expr::var()).is_err());
        assert!(ShiftLikeMap::new(3, 0, c(1., 0.), Expr::var()).is_err());
        assert!(ShiftLikeMap::new(3, 3, c(1., 0.), Expr::var()).is_err());
        assert!(ShiftLikeMap::new(3, 1, c(0., 0.), Expr::var()).is_err());
        assert!(CVec::from_real(&[1.0]).is_err());
    }

    #[test]
    fn apply_examples() {
        let f = ShiftLikeMap::new(3, 1, c(2., 0.), Expr::var()).unwrap();
        let w = f.apply(&CVec::from_real(&[1., 0., 3.]).unwrap()).unwrap();
        assert_eq!(w, CVec::from_real(&[0., 3., 1.]).unwrap());
        assert_eq!(f.apply_inverse(&w).unwrap(), CVec::from_real(&[1., 0., 3.]).unwrap());

        let g = ShiftLikeMap::new(3, 2, c(1., 0.), Expr::var()).unwrap();
        let w = g.apply(&CVec::from_real(&[1., 2., 3.]).unwrap()).unwrap();
        assert_eq!(w, CVec::from_real(&[2., 3., 1.]).unwrap());

        let err = f.apply(&CVec::from_real(&[1., 2.]).unwrap());
        assert_eq!(err, Err(Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for f in sample_maps() {
            for _ in 0..1000 {
                let z = random_point(&mut rng, f.dim(), 1.0);
                let back = f.apply_inverse(&f.apply(&z).unwrap()).unwrap();
                assert!(crate::sup_dist(&back, &z) <= 1e-12);
                let fwd = f.apply(&f.apply_inverse(&z).unwrap()).unwrap();
                assert!(crate::sup_dist(&fwd, &z) <= 1e-12);
            }
        }
    }

    #[test]
    fn iterate_fixed_point_and_overlap() {
        let f = ShiftLikeMap::new(2, 1, c(1., 0.), Expr::var()).unwrap();
        let o = f.iterate(&CVec::from_real(&[0., 0.]).unwrap(), 5, 1e6).unwrap();
        assert_eq!(o.samples.len(), 6);
        assert!(o.samples.iter().all(|s| s.iter().all(|x| *x == c(0., 0.))));
        assert_eq!(o.escaped_at, None);

        let g = &sample_maps()[2];
        let o = g.iterate(&CVec::from_real(&[0.1, 0.2, -0.3]).unwrap(), 6, 1e6).unwrap();
        for pair in o.samples.windows(2) {
            assert_eq!(&pair[0][1..], &pair[1][..2]);
        }
        assert_eq!(o.sequence().len(), 3 + 6);
    }

    #[test]
    fn iterate_records_escape() {
        let f = ShiftLikeMap::new(2, 1, c(0.5, 0.), Expr::monomial(4.0, 2)).unwrap();
        let o = f.iterate(&CVec::from_real(&[0., 2.]).unwrap(), 50, 1e6).unwrap();
        let k = o.escaped_at.unwrap();
        assert!(k < 50);
        assert_eq!(o.samples.len(), k + 1);
        assert!(sup_norm(&o.samples[k]) > 1e6);
    }

    #[test]
    fn jacobian_rows_and_determinant() {
        let f = ShiftLikeMap::new(3, 1, c(2., 0.), Expr::var()).unwrap();
        let j = f.jacobian(&[c(0.3, 0.), c(1., 1.), c(-2., 0.)]).unwrap();
        let one = c(1., 0.);
        let zero = c(0., 0.);
        assert_eq!(j.rows(), vec![vec![zero, one, zero], vec![zero, zero, one], vec![c(-2., 0.), zero, one]]);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for f in sample_maps() {
            let sign = if f.dim() % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..200 {
                let z = random_point(&mut rng, f.dim(), 1.0);
                let det = f.jacobian(&z).unwrap().det();
                assert!((det - f.a() * sign).norm() <= 1e-10 * f.a().norm());
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for f in sample_maps() {
            let n = f.dim();
            for _ in 0..50 {
                let z = random_point(&mut rng, n, 1.0);
                let j = f.jacobian(&z).unwrap();
                for k in 0..n {
                    let mut zp = z.to_vec();
                    let mut zm = z.to_vec();
                    zp[k] += h;
                    zm[k] -= h;
                    let fp = f.apply(&CVec::new(zp).unwrap()).unwrap();
                    let fm = f.apply(&CVec::new(zm).unwrap()).unwrap();
                    for i in 0..n {
                        let fd = (fp[i] - fm[i]) / (2.0 * h);
                        assert!((fd - j[(i, k)]).norm() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn dilation_conjugacy() {
        let id = ShiftLikeMap::new(2, 1, c(1., 0.), Expr::var()).unwrap();
        assert_eq!(id.dilation_conjugate(5).unwrap(), id);

        let sq = ShiftLikeMap::new(2, 1, c(1., 0.), Expr::pow(Expr::var(), 2)).unwrap();
        let f2 = sq.dilation_conjugate(2).unwrap();
        let one = CVec::from_real(&[1., 1.]).unwrap();
        assert_eq!(f2.apply(&one).unwrap(), one);
        let two = CVec::from_real(&[2., 2.]).unwrap();
        assert_eq!(sq.apply(&two).unwrap(), two);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for f in sample_maps() {
            for n in 1..=10u32 {
                let fnn = f.dilation_conjugate(n).unwrap();
                for _ in 0..50 {
                    let z = random_point(&mut rng, f.dim(), 1.0 / n as f64);
                    let lhs = fnn.apply(&z).unwrap().scaled(n as f64);
                    let rhs = f.apply(&z.scaled(n as f64)).unwrap();
                    assert!(crate::sup_dist(&lhs, &rhs) <= 1e-10 * (1.0 + sup_norm(&rhs)));
                }
            }
        }
    }

    #[test]
    fn tangent_push_matches_jacobian() {
        let f = &sample_maps()[3];
        let z = [c(0.1, 0.2), c(-0.3, 0.1), c(0.5, 0.0), c(0.2, -0.2)];
        let v = [c(1., 0.), c(0., 1.), c(0.5, 0.5), c(-1., 2.)];
        let mut out = [c(0., 0.); 4];
        f.push_tangent(&z, &v, &mut out).unwrap();
        let jv = f.jacobian(&z).unwrap().mul_vec(&v);
        for (a, b) in out.iter().zip(jv.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
