//! Problem parameters and arithmetic over Z_q.
//!
//! Residues are stored canonically in `[0, q)` as `u16`; products and sums are
//! formed in `u32`/`u64`. Wherever magnitudes matter (error wrapping, the
//! pruned hypothesis bound) a residue is read as its signed representative in
//! `[-(q-1)/2, (q-1)/2]`.

use crate::error::{Error, Result};

/// Largest supported modulus: residues must fit in `u16`.
pub const MAX_MODULUS: u32 = u16::MAX as u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LweParams {
    /// Secret dimension.
    pub n: usize,
    /// Odd prime modulus.
    pub q: u32,
    /// Relative error size.
    pub alpha: f64,
    /// Noise standard deviation, `alpha * q`.
    pub sigma: f64,
}

impl LweParams {
    pub fn new(n: usize, q: u32, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n must be at least 1"));
        }
        check_modulus(q)?;
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self {
            n,
            q,
            alpha,
            sigma: alpha * q as f64,
        })
    }

    /// Same as [`LweParams::new`] but with the noise given as a standard deviation.
    pub fn with_sigma(n: usize, q: u32, sigma: f64) -> Result<Self> {
        Self::new(n, q, sigma / q as f64)
    }

    pub fn half_q(&self) -> u32 {
        (self.q - 1) / 2
    }
}

/// Fails unless `q` is an odd prime that fits the residue storage.
pub fn check_modulus(q: u32) -> Result<()> {
    if q > MAX_MODULUS {
        return Err(Error::param(format!("q = {q} exceeds {MAX_MODULUS}")));
    }
    if q.is_multiple_of(2) || !is_prime(q as u64) {
        return Err(Error::param(format!("q = {q} is not an odd prime")));
    }
    Ok(())
}

pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x.is_multiple_of(2) {
        return x == 2;
    }
    let mut d = 3;
    while d * d <= x {
        if x.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Signed representative of a canonical residue.
#[inline]
pub fn to_signed(x: u32, q: u32) -> i64 {
    if x > (q - 1) / 2 {
        x as i64 - q as i64
    } else {
        x as i64
    }
}

/// Canonical residue of any integer.
#[inline]
pub fn from_signed(x: i64, q: u32) -> u32 {
    x.rem_euclid(q as i64) as u32
}

#[inline]
pub fn add_mod(a: u32, b: u32, q: u32) -> u32 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u32, b: u32, q: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

#[inline]
pub fn neg_mod(a: u32, q: u32) -> u32 {
    if a == 0 {
        0
    } else {
        q - a
    }
}

#[inline]
pub fn mul_mod(a: u32, b: u32, q: u32) -> u32 {
    ((a as u64 * b as u64) % q as u64) as u32
}

pub fn pow_mod(mut base: u32, mut exp: u64, q: u32) -> u32 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse modulo a prime `q`; `None` for zero.
pub fn inv_mod(a: u32, q: u32) -> Option<u32> {
    let a = a % q;
    if a == 0 {
        None
    } else {
        Some(pow_mod(a, q as u64 - 2, q))
    }
}

/// `<a, s> mod q` for canonical vectors.
pub fn dot_mod(a: &[u16], s: &[u16], q: u32) -> u32 {
    let acc = a
        .iter()
        .zip(s)
        .fold(0u64, |acc, (&x, &y)| acc + x as u64 * y as u64);
    (acc % q as u64) as u32
}
