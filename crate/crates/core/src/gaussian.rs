//! The rounded Gaussian error distribution over Z_q.
//!
//! A draw is `round(x) mod q` with `x ~ N(0, sigma^2)`; the probability of a
//! residue `e` is the Gaussian mass of every unit interval centred on
//! `e + k*q`. The wrap sum is truncated at `|k| <= ceil(10*sigma/q) + 1`, past
//! which the remaining tail is far below double precision.

use rand_distr::{Distribution, Normal};
use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::params::{check_modulus, to_signed};
use crate::rng::StreamRng;

/// Floor applied before taking logarithms of far-tail probabilities.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone)]
pub struct RoundedGaussian {
    sigma: f64,
    q: u32,
    /// Probability per canonical residue `0..q`.
    pmf: Vec<f64>,
    normal: Normal<f64>,
}

impl RoundedGaussian {
    pub fn new(sigma: f64, q: u32) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        check_modulus(q)?;
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
        Ok(Self {
            sigma,
            q,
            pmf: wrapped_pmf(sigma, q),
            normal,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Probabilities indexed by canonical residue.
    pub fn table(&self) -> &[f64] {
        &self.pmf
    }

    pub fn pmf(&self, residue: u32) -> f64 {
        self.pmf[(residue % self.q) as usize]
    }

    pub fn pmf_signed(&self, e: i64) -> f64 {
        self.pmf[e.rem_euclid(self.q as i64) as usize]
    }

    /// Second moment of the signed representative.
    pub fn variance(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(r, &p)| {
                let e = to_signed(r as u32, self.q) as f64;
                e * e * p
            })
            .sum()
    }

    /// `ln(q * pmf(e))` per canonical residue, with zero probabilities floored
    /// at [`LOG_FLOOR`]. The second value counts floored entries.
    pub fn log_likelihood_ratios(&self) -> (Vec<f64>, usize) {
        let qf = self.q as f64;
        let mut floored = 0;
        let table = self
            .pmf
            .iter()
            .map(|&p| {
                let p = if p < LOG_FLOOR {
                    floored += 1;
                    LOG_FLOOR
                } else {
                    p
                };
                (qf * p).ln()
            })
            .collect();
        (table, floored)
    }

    pub fn sample(&self, rng: &mut StreamRng) -> u16 {
        let x: f64 = self.normal.sample(rng);
        (x.round() as i64).rem_euclid(self.q as i64) as u16
    }
}

/// Builds the rounded Gaussian for `(sigma, q)`.
pub fn rounded_gaussian_pmf(sigma: f64, q: u32) -> Result<RoundedGaussian> {
    RoundedGaussian::new(sigma, q)
}

/// Standard deviation after `steps` plain BKW steps, times `sqrt(3)` when the
/// samples were amplified from triples.
pub fn noise_after_steps(sigma: f64, steps: usize, amplified: bool) -> f64 {
    let grown = sigma * 2f64.powf(steps as f64 / 2.0);
    if amplified {
        grown * 3f64.sqrt()
    } else {
        grown
    }
}

fn wrapped_pmf(sigma: f64, q: u32) -> Vec<f64> {
    let qf = q as f64;
    let half = (q - 1) / 2;
    let wraps = (10.0 * sigma / qf).ceil() as i64 + 1;
    let mut pmf = vec![0.0; q as usize];
    for e in 0..=half {
        let centre = e as f64;
        // Sum from the outermost wraps inwards so small terms accumulate first.
        let mut terms: Vec<f64> = (-wraps..=wraps)
            .map(|k| {
                let mid = centre + k as f64 * qf;
                interval_mass(mid - 0.5, mid + 0.5, sigma)
            })
            .collect();
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p: f64 = terms.iter().sum();
        pmf[e as usize] = p;
        if e != 0 {
            pmf[(q - e) as usize] = p;
        }
    }
    pmf
}

/// Mass of `N(0, sigma^2)` on `[lo, hi]`, using whichever of erf/erfc keeps
/// relative precision on that side of the origin.
fn interval_mass(lo: f64, hi: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    if lo >= 0.0 {
        0.5 * (erfc(lo / s) - erfc(hi / s))
    } else if hi <= 0.0 {
        0.5 * (erfc(-hi / s) - erfc(-lo / s))
    } else {
        0.5 * (erf(hi / s) - erf(lo / s))
    }
}
