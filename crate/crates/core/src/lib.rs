//! BKW-style solving of LWE.
//!
//! The crate covers the whole pipeline used to study sample complexity of the
//! BKW solving phase:
//!
//! * [`params`], [`gaussian`] and [`rng`]: modular arithmetic helpers, the
//!   rounded Gaussian error distribution and reproducible random streams.
//! * [`instance`]: LWE instance generation, the challenge text format and the
//!   secret-noise transformation.
//! * [`reduction`]: plain BKW steps (LF1 and LF2) and sample amplification.
//! * [`distinguish`]: the log-likelihood, FFT and pruned FFT distinguishers,
//!   closed-form sample-complexity estimates and the cosine fit of the LLR
//!   terms.
//! * [`experiment`]: the Monte Carlo harness measuring minimum sample counts.
//! * [`cli`]: the `bkw` command-line tool.

pub mod cli;
pub mod distinguish;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod instance;
pub mod params;
pub mod reduction;
pub mod rng;
pub mod samples;

pub use error::{Error, Result};
pub use gaussian::{noise_after_steps, RoundedGaussian};
pub use params::LweParams;
pub use rng::StreamRng;
pub use samples::{LweSample, SampleRef, Samples};
