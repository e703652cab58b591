//! The solving phase: ranking hypotheses for the `k` unreduced positions.
//!
//! After reduction every sample satisfies `b = sum_i a_i s_i + e` over the
//! last `k` positions. For a guess `s'` the residual `e' = b - <a, s'>` is
//! noise-shaped when the guess is right and uniform otherwise; the
//! distinguishers here score every guess from those residuals:
//!
//! * [`llr_distinguish`] sums `ln(q * Pr(e'))` (the optimal test),
//! * [`fft_distinguish`] sums `cos(2*pi*e'/q)`, either directly or through a
//!   `k`-dimensional DFT of the sample accumulator,
//! * [`pruned_fft_distinguish`] does the same over guesses with every signed
//!   coordinate in `[-d, d]`.

mod cosine;
mod fft;
mod hypothesis;
mod llr;
mod theory;

pub use cosine::{cosine_approximation, CosineFit};
pub use fft::{fft_distinguish, pruned_fft_distinguish, FftPath};
pub use hypothesis::{HypothesisSpace, ScoreTable};
pub use llr::{llr_distinguish, llr_distinguish_with, LlrPath};
pub use theory::{
    default_bound, pruned_gain, theory_log_samples, theory_samples, theory_samples_pruned,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::reduction::SampleSet;
use crate::samples::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistinguisherKind {
    Llr,
    Fft,
    FftPruned,
}

impl DistinguisherKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistinguisherKind::Llr => "LLR",
            DistinguisherKind::Fft => "FFT",
            DistinguisherKind::FftPruned => "FFT_PRUNED",
        }
    }
}

impl fmt::Display for DistinguisherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistinguisherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "LLR" | "OPTIMAL" => Ok(DistinguisherKind::Llr),
            "FFT" => Ok(DistinguisherKind::Fft),
            "FFT_PRUNED" | "PRUNED" => Ok(DistinguisherKind::FftPruned),
            other => Err(Error::param(format!("unknown distinguisher {other:?}"))),
        }
    }
}

/// The trailing `k` positions of a prefix of a sample batch.
#[derive(Debug, Clone, Copy)]
pub struct ActiveSamples<'a> {
    rows: &'a [u16],
    stride: usize,
    offset: usize,
    len: usize,
    q: u32,
}

impl<'a> ActiveSamples<'a> {
    /// Uses positions `offset..` of the first `len` samples.
    pub fn new(samples: &'a Samples, offset: usize, len: usize, q: u32) -> Self {
        assert!(offset < samples.dim(), "no active positions");
        assert!(len <= samples.len(), "prefix longer than the batch");
        Self {
            rows: samples.rows(),
            stride: samples.stride(),
            offset,
            len,
            q,
        }
    }

    /// All samples of a reduced set, over its remaining positions.
    pub fn from_set(set: &'a SampleSet) -> Self {
        Self::new(set.samples(), set.offset(), set.len(), set.params().q)
    }

    pub fn prefix(&self, len: usize) -> Self {
        assert!(len <= self.len);
        Self { len, ..*self }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn k(&self) -> usize {
        self.stride - 1 - self.offset
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Active part of `a` and `b` for sample `j`.
    #[inline]
    pub fn get(&self, j: usize) -> (&'a [u16], u16) {
        let row = &self.rows[j * self.stride..(j + 1) * self.stride];
        (&row[self.offset..self.stride - 1], row[self.stride - 1])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a [u16], u16)> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }
}

/// `(b - <a, guess>) mod q` over the active positions.
pub fn residual_error(a: &[u16], b: u16, guess: &[u16], q: u32) -> u32 {
    assert_eq!(a.len(), guess.len(), "guess length must equal k");
    let dot = a
        .iter()
        .zip(guess)
        .fold(0u64, |acc, (&x, &s)| acc + x as u64 * s as u64);
    let q64 = q as u64;
    ((b as u64 + q64 - dot % q64) % q64) as u32
}
