//! Entire functions of one complex variable as immutable expression trees.
//!
//! The catalog is closed: constants, the variable, sums, products, non-negative integer
//! powers, composition, sine and exponential. Every derivative of a catalog expression is
//! again a catalog expression (cosine is written as a phase-shifted sine).
//!
//! The text form is a prefix notation, e.g. `add(var, sin(mul(c(6.283185307179586), var)))`.
//! Constants are `c(re)` or `c(re, im)`; composition is `comp(outer, inner)`.

use alloc::boxed::Box;
use alloc::string::String;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use core::fmt;

use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// `Compose(outer, inner)` evaluates `outer(inner(z))`.
    Compose(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn var() -> Self {
        Expr::Var
    }

    pub fn constant(c: C64) -> Self {
        Expr::Const(c)
    }

    pub fn real(re: f64) -> Self {
        Expr::Const(C64::new(re, 0.0))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, k: u32) -> Self {
        Expr::Pow(Box::new(a), k)
    }

    pub fn compose(outer: Expr, inner: Expr) -> Self {
        Expr::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn sin(a: Expr) -> Self {
        Expr::Sin(Box::new(a))
    }

    pub fn exp(a: Expr) -> Self {
        Expr::Exp(Box::new(a))
    }

    /// `c · z^k`, the monomial used by most examples.
    pub fn monomial(c: f64, k: u32) -> Self {
        Expr::mul(Expr::real(c), Expr::pow(Expr::Var, k))
    }

    /// Evaluates the expression at `z`.
    ///
    /// Any non-finite result (overflow, `inf - inf`) is reported as [`Error::Range`].
    pub fn eval(&self, z: C64) -> Result<C64> {
        if !z.is_finite() {
            return Err(Error::InvalidParameter("evaluation point must be finite"));
        }
        let v = self.eval_unchecked(z);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Range)
        }
    }

    /// Raw recursive evaluation; the result may be non-finite.
    pub fn eval_unchecked(&self, z: C64) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => z,
            Expr::Add(a, b) => a.eval_unchecked(z) + b.eval_unchecked(z),
            Expr::Mul(a, b) => a.eval_unchecked(z) * b.eval_unchecked(z),
            Expr::Pow(a, k) => a.eval_unchecked(z).powu(*k),
            Expr::Compose(outer, inner) => outer.eval_unchecked(inner.eval_unchecked(z)),
            Expr::Sin(a) => complex_sin(a.eval_unchecked(z)),
            Expr::Exp(a) => a.eval_unchecked(z).exp(),
        }
    }

    /// Symbolic derivative with light algebraic simplification (zero/one folding).
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => zero(),
            Expr::Var => one(),
            Expr::Add(a, b) => s_add(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => s_add(
                s_mul(a.derivative(), (**b).clone()),
                s_mul((**a).clone(), b.derivative()),
            ),
            Expr::Pow(a, k) => match *k {
                0 => zero(),
                1 => a.derivative(),
                k => s_mul(
                    s_mul(Expr::real(k as f64), s_pow((**a).clone(), k - 1)),
                    a.derivative(),
                ),
            },
            Expr::Compose(outer, inner) => s_mul(
                s_compose(outer.derivative(), (**inner).clone()),
                inner.derivative(),
            ),
            // cos(u) = sin(u + π/2)
            Expr::Sin(a) => s_mul(
                Expr::sin(s_add((**a).clone(), Expr::real(FRAC_PI_2))),
                a.derivative(),
            ),
            Expr::Exp(a) => s_mul(Expr::exp((**a).clone()), a.derivative()),
        }
    }

    pub fn eval_derivative(&self, z: C64) -> Result<C64> {
        self.derivative().eval(z)
    }

    /// The rescaled function `z ↦ f(n·z)/n`.
    pub fn rescale(&self, n: u32) -> Result<Expr> {
        if n == 0 {
            return Err(Error::InvalidParameter("rescale factor must be >= 1"));
        }
        if n == 1 || matches!(self, Expr::Var) {
            return Ok(self.clone());
        }
        let n = n as f64;
        Ok(Expr::mul(
            Expr::real(1.0 / n),
            Expr::compose(self.clone(), Expr::mul(Expr::real(n), Expr::Var)),
        ))
    }

    /// `φ ∘ f ∘ φ⁻¹` for the translation `φ(z) = z − alpha`.
    pub fn conjugate_by_shift(&self, alpha: C64) -> Expr {
        Expr::add(
            Expr::compose(self.clone(), Expr::add(Expr::Var, Expr::Const(alpha))),
            Expr::Const(-alpha),
        )
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Compose(a, b) => 1 + a.size() + b.size(),
            Expr::Pow(a, _) | Expr::Sin(a) | Expr::Exp(a) => 1 + a.size(),
        }
    }

    pub fn to_text(&self) -> String {
        use alloc::string::ToString;
        self.to_string()
    }

    /// Parses the prefix text form.
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

impl core::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

/// Complex sine through `(e^{iz} − e^{−iz}) / 2i`.
#[inline]
pub fn complex_sin(u: C64) -> C64 {
    let iu = C64::new(-u.im, u.re);
    let d = iu.exp() - (-iu).exp();
    // d / 2i = (d.im − i·d.re) / 2
    C64::new(0.5 * d.im, -0.5 * d.re)
}

fn zero() -> Expr {
    Expr::real(0.0)
}

fn one() -> Expr {
    Expr::real(1.0)
}

fn as_const(e: &Expr) -> Option<C64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn is_value(e: &Expr, v: f64) -> bool {
    as_const(e) == Some(C64::new(v, 0.0))
}

fn s_add(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x + y),
        _ if is_value(&a, 0.0) => b,
        _ if is_value(&b, 0.0) => a,
        _ => Expr::add(a, b),
    }
}

fn s_mul(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        _ if is_value(&a, 0.0) || is_value(&b, 0.0) => zero(),
        _ if is_value(&a, 1.0) => b,
        _ if is_value(&b, 1.0) => a,
        _ => Expr::mul(a, b),
    }
}

fn s_pow(a: Expr, k: u32) -> Expr {
    match k {
        0 => one(),
        1 => a,
        k => Expr::pow(a, k),
    }
}

fn s_compose(outer: Expr, inner: Expr) -> Expr {
    match (&outer, &inner) {
        (Expr::Const(_), _) => outer,
        (Expr::Var, _) => inner,
        (_, Expr::Var) => outer,
        _ => Expr::compose(outer, inner),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.im == 0.0 => write!(f, "c({:?})", c.re),
            Expr::Const(c) => write!(f, "c({:?}, {:?})", c.re, c.im),
            Expr::Var => f.write_str("var"),
            Expr::Add(a, b) => write!(f, "add({a}, {b})"),
            Expr::Mul(a, b) => write!(f, "mul({a}, {b})"),
            Expr::Pow(a, k) => write!(f, "pow({a}, {k})"),
            Expr::Compose(a, b) => write!(f, "comp({a}, {b})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl core::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl core::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl core::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add(self, Expr::mul(Expr::real(-1.0), rhs))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &'static str) -> Error {
        Error::Parse { pos: self.pos, msg }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, b: u8, msg: &'static str) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(msg))
        }
    }

    fn ident(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a constructor name"));
        }
        // ASCII letters only, always valid UTF-8.
        Ok(core::str::from_utf8(&self.src[start..self.pos]).unwrap_or(""))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b'0'..=b'9' | b'+' | b'-' | b'.' | b'e' | b'E' => self.pos += 1,
                _ => break,
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => {
                self.pos = start;
                Err(self.err("expected a finite number"))
            }
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let name_pos = {
            self.skip_ws();
            self.pos
        };
        let name = self.ident()?;
        match name {
            "var" | "z" => Ok(Expr::Var),
            "c" => {
                self.expect(b'(', "expected '('")?;
                let re = self.number()?;
                self.skip_ws();
                let im = if self.src.get(self.pos) == Some(&b',') {
                    self.pos += 1;
                    self.number()?
                } else {
                    0.0
                };
                self.expect(b')', "expected ')'")?;
                Ok(Expr::Const(C64::new(re, im)))
            }
            "add" | "mul" | "comp" => {
                let binary = match name {
                    "add" => Expr::add,
                    "mul" => Expr::mul,
                    _ => Expr::compose,
                };
                self.expect(b'(', "expected '('")?;
                let a = self.expr()?;
                self.expect(b',', "expected ','")?;
                let b = self.expr()?;
                self.expect(b')', "expected ')'")?;
                Ok(binary(a, b))
            }
            "pow" => {
                self.expect(b'(', "expected '('")?;
                let a = self.expr()?;
                self.expect(b',', "expected ','")?;
                let k = self.number()?;
                if k < 0.0 || libm::trunc(k) != k || k > u32::MAX as f64 {
                    return Err(self.err("power must be a non-negative integer"));
                }
                self.expect(b')', "expected ')'")?;
                Ok(Expr::pow(a, k as u32))
            }
            "sin" | "exp" => {
                let unary = if name == "sin" { Expr::sin } else { Expr::exp };
                self.expect(b'(', "expected '('")?;
                let a = self.expr()?;
                self.expect(b')', "expected ')'")?;
                Ok(unary(a))
            }
            _ => Err(Error::Parse { pos: name_pos, msg: "unknown constructor" }),
        }
    }
}

/// `1 − √(1 − 1/(4π²))`, the additive constant of the wandering example.
pub fn wandering_offset() -> f64 {
    1.0 - libm::sqrt(1.0 - 1.0 / (4.0 * PI * PI))
}

/// `z + sin(2πz) + 1 − √(1 − 1/(4π²))`.
pub fn wandering_f() -> Expr {
    Expr::add(
        Expr::add(Expr::Var, Expr::sin(Expr::mul(Expr::real(TAU), Expr::Var))),
        Expr::real(wandering_offset()),
    )
}

/// The root of `sin(2πα) = √(1 − 1/(4π²))` on (1/4, 1/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaConstant {
    pub alpha: f64,
    pub residual: f64,
}

/// Bisection for α. `sin(2π·)` is strictly decreasing on (1/4, 1/2), so the root is unique.
pub fn solve_alpha() -> AlphaConstant {
    let target = libm::sqrt(1.0 - 1.0 / (4.0 * PI * PI));
    let g = |x: f64| libm::sin(TAU * x) - target;
    let (mut lo, mut hi) = (0.25_f64, 0.5_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
    AlphaConstant { alpha, residual: g(alpha).abs() }
}
