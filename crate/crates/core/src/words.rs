//! Counting admissible words of the subshift defined by a transition table.
//!
//! A word `s_0 s_1 … s_{m−1}` over `0..k` is admissible when its first `N` symbols are
//! arbitrary and every later symbol satisfies `s_{N+t} ∈ J(s_{N−ν+t}, s_t)`.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jtable::TransitionTable;

#[derive(Clone, Debug, PartialEq)]
pub struct WordCount {
    pub m: usize,
    pub count: BigUint,
    /// `log(count) / m`; `-inf` when no word survives.
    pub growth_rate: f64,
}

fn check_shape(dim: usize, nu: usize) -> Result<()> {
    if dim < 2 || nu == 0 || nu >= dim {
        return Err(Error::InvalidParameter("need N >= 2 and 1 <= nu < N"));
    }
    Ok(())
}

/// Counts for every length `1..=m_max`; entry `m − 1` is the count at length `m`.
///
/// Dynamic programming over the last `N` symbols (`k^N` states).
pub fn word_counts(table: &TransitionTable, dim: usize, nu: usize, m_max: usize) -> Result<Vec<BigUint>> {
    check_shape(dim, nu)?;
    let k = table.k();
    let states = k
        .checked_pow(dim as u32)
        .filter(|&s| s <= 1 << 26)
        .ok_or(Error::InvalidParameter("k^N states exceed the supported size"))?;
    let mut out = Vec::with_capacity(m_max);
    let kb = BigUint::from(k);
    let mut p = BigUint::from(1u32);
    for _ in 0..m_max.min(dim) {
        p *= &kb;
        out.push(p.clone());
    }
    if m_max <= dim {
        return Ok(out);
    }
    // State s encodes (s_0, …, s_{N−1}) in base k with s_0 most significant.
    let high = states / k;
    let digit = |s: usize, pos: usize| (s / k.pow((dim - 1 - pos) as u32)) % k;
    let mut counts = vec![BigUint::from(1u32); states];
    for _ in dim..m_max {
        let mut next = vec![BigUint::zero(); states];
        for (s, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let allowed = table.get(digit(s, dim - nu), digit(s, 0));
            let shifted = (s % high) * k;
            for &j in allowed {
                next[shifted + j] += c;
            }
        }
        counts = next;
        out.push(counts.iter().sum());
    }
    Ok(out)
}

/// Exact number of admissible words of length `m`.
pub fn count_admissible_words(table: &TransitionTable, dim: usize, nu: usize, m: usize) -> Result<WordCount> {
    if m == 0 {
        return Err(Error::InvalidParameter("word length must be positive"));
    }
    let count = word_counts(table, dim, nu, m)?.pop().unwrap_or_default();
    let growth_rate = big_log(&count) / m as f64;
    Ok(WordCount { m, count, growth_rate })
}

/// Natural log of a big integer; `-inf` for zero.
pub fn big_log(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return libm::log(x.to_u64().unwrap_or(u64::MAX) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX);
    libm::log(top as f64) + shift as f64 * core::f64::consts::LN_2
}

/// `log(count(m_max) / count(m_max − 1))`, a lower estimate of the symbolic entropy.
///
/// Requires `m_max ≥ 2N`. Returns `-inf` when no word of length `m_max` survives.
pub fn symbolic_entropy_lower(table: &TransitionTable, dim: usize, nu: usize, m_max: usize) -> Result<f64> {
    check_shape(dim, nu)?;
    if m_max < 2 * dim {
        return Err(Error::InvalidParameter("m_max must be at least 2N"));
    }
    let counts = word_counts(table, dim, nu, m_max)?;
    let (num, den) = (&counts[m_max - 1], &counts[m_max - 2]);
    if num.is_zero() || den.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    if (num % den).is_zero() {
        if let Some(q) = (num / den).to_u64() {
            return Ok(libm::log(q as f64));
        }
    }
    Ok(big_log(num) - big_log(den))
}
