//! LWE instances: generation, the challenge text format and the
//! secret-noise transformation.

mod challenge;
mod transform;

pub use challenge::{
    read_challenge, read_secret, write_challenge, write_secret, parse_challenge, parse_secret,
    format_challenge, format_secret,
};
pub use transform::{secret_noise_transform, BasisInfo};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::RoundedGaussian;
use crate::params::{dot_mod, sub_mod, to_signed, LweParams};
use crate::rng::StreamRng;
use crate::samples::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SecretDistribution {
    /// Uniform over Z_q^n.
    Uniform,
    /// Each coordinate drawn from the error distribution.
    Noise,
}

impl SecretDistribution {
    pub fn as_str(self) -> &'static str {
        match self {
            SecretDistribution::Uniform => "uniform",
            SecretDistribution::Noise => "noise",
        }
    }
}

impl fmt::Display for SecretDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SecretDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(SecretDistribution::Uniform),
            "noise" | "noise-distributed" => Ok(SecretDistribution::Noise),
            other => Err(Error::param(format!("unknown secret distribution {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Secret {
    pub s: Vec<u16>,
    pub distribution: SecretDistribution,
}

impl Secret {
    pub fn signed(&self, q: u32) -> Vec<i64> {
        self.s.iter().map(|&x| to_signed(x as u32, q)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LweInstance {
    pub params: LweParams,
    pub samples: Samples,
    /// Known for generated instances, absent for ingested challenges.
    pub secret: Option<Secret>,
}

impl LweInstance {
    /// Signed errors `b - <a, s>` of every sample, when the secret is known.
    pub fn errors(&self) -> Option<Vec<i64>> {
        let secret = self.secret.as_ref()?;
        let q = self.params.q;
        Some(
            self.samples
                .iter()
                .map(|smp| to_signed(sub_mod(smp.b as u32, dot_mod(smp.a, &secret.s, q), q), q))
                .collect(),
        )
    }

    /// Drops the secret, e.g. before publishing as a challenge.
    pub fn without_secret(mut self) -> Self {
        self.secret = None;
        self
    }
}

/// Draws `m` samples `b = <a, s> + e mod q` for a fresh secret.
pub fn generate_instance(
    params: LweParams,
    m: usize,
    secret_dist: SecretDistribution,
    rng: &mut StreamRng,
) -> Result<LweInstance> {
    if m == 0 {
        return Err(Error::param("m must be at least 1"));
    }
    let noise = RoundedGaussian::new(params.sigma, params.q)?;
    let q = params.q;
    let n = params.n;

    let s: Vec<u16> = match secret_dist {
        SecretDistribution::Uniform => (0..n).map(|_| rng.random_range(0..q) as u16).collect(),
        SecretDistribution::Noise => (0..n).map(|_| noise.sample(rng)).collect(),
    };

    let mut samples = Samples::with_capacity(n, m);
    let mut a = vec![0u16; n];
    for _ in 0..m {
        for x in a.iter_mut() {
            *x = rng.random_range(0..q) as u16;
        }
        let e = noise.sample(rng) as u32;
        let b = (dot_mod(&a, &s, q) + e) % q;
        samples.push(&a, b as u16);
    }

    Ok(LweInstance {
        params,
        samples,
        secret: Some(Secret {
            s,
            distribution: secret_dist,
        }),
    })
}
