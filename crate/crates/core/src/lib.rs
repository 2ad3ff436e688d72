//! Numerical kernels for shift-like holomorphic maps on Cᴺ.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. Everything here is a pure
//! function of its inputs; parallel drivers, file formats and the command-line front end
//! live in the `shiftlab` crate.
//!
//! Layout:
//! - [`expr`]: closed-form entire functions with symbolic derivatives.
//! - [`shiftlike`] and [`quotient`]: the map F, its inverse, Jacobian, dilation conjugates
//!   and the collapsed-boundary box dynamics.
//! - [`winding`] and [`jtable`]: argument-principle certificates and transition tables.
//! - [`entropy`] and [`words`]: grid entropy bounds and exact admissible-word counting.
//! - [`wandering`]: the translation-equivariant example on C³ and its basins.
#![no_std]

extern crate alloc;

pub mod entropy;
pub mod error;
pub mod expr;
pub mod jtable;
pub mod linalg;
pub mod quotient;
pub mod shiftlike;
pub mod wandering;
pub mod winding;
pub mod words;

pub use error::{Error, Result};
pub use expr::{AlphaConstant, Expr};
pub use quotient::{Class, QuotientBox};
pub use shiftlike::{CVec, Orbit, ShiftLikeMap};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Sup-norm (max coordinate modulus) of a point in Cᴺ.
#[inline]
pub fn sup_norm(z: &[C64]) -> f64 {
    z.iter().fold(0.0, |m, c| m.max(c.norm()))
}

/// Sup-distance between two points of Cᴺ.
#[inline]
pub fn sup_dist(z: &[C64], w: &[C64]) -> f64 {
    z.iter().zip(w).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
}
