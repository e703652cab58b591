//! Plain BKW reduction.
//!
//! Positions are reduced left to right in blocks of `b`. Each step groups the
//! samples by the `b` active positions up to sign ([`categorize`]) and emits
//! sums or differences that cancel that block, either against a single
//! representative per category ([`reduce_step_lf1`]) or over all pairs
//! ([`reduce_step_lf2`]). Before reducing, a sample-limited instance can be
//! expanded with [`sample_amplify`].

mod amplify;
mod category;
mod steps;

pub use amplify::{max_amplified, sample_amplify};
pub use category::{categorize, category_count, CategoryIndex};
pub use steps::{reduce_step_lf1, reduce_step_lf2};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gaussian::noise_after_steps;
use crate::instance::LweInstance;
use crate::params::{sub_mod, LweParams};
use crate::rng::StreamRng;
use crate::samples::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Lf1,
    Lf2,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Lf1 => "LF1",
            Strategy::Lf2 => "LF2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LF1" => Ok(Strategy::Lf1),
            "LF2" => Ok(Strategy::Lf2),
            other => Err(Error::param(format!("unknown strategy {other:?}"))),
        }
    }
}

/// One entry of a set's history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepTag {
    Lf1,
    Lf2,
    Amplified,
}

/// Signed multiset of original sample indices a sample was built from.
pub type Lineage = Vec<(u32, i8)>;

/// A batch of samples together with its reduction bookkeeping.
#[derive(Debug, Clone)]
pub struct SampleSet {
    params: LweParams,
    samples: Samples,
    dim: usize,
    steps: usize,
    amplified: bool,
    log: Vec<StepTag>,
    lineage: Option<Vec<Lineage>>,
}

impl SampleSet {
    pub fn new(params: LweParams, samples: Samples) -> Self {
        assert_eq!(samples.dim(), params.n);
        Self {
            params,
            dim: params.n,
            samples,
            steps: 0,
            amplified: false,
            log: Vec::new(),
            lineage: None,
        }
    }

    pub fn from_instance(inst: &LweInstance) -> Self {
        Self::new(inst.params, inst.samples.clone())
    }

    /// Like [`SampleSet::from_instance`] but records, for every produced
    /// sample, which original samples it combines. Meant for verification on
    /// small sets.
    pub fn tracked(inst: &LweInstance) -> Self {
        let mut set = Self::from_instance(inst);
        set.lineage = Some((0..inst.samples.len() as u32).map(|i| vec![(i, 1)]).collect());
        set
    }

    pub fn params(&self) -> &LweParams {
        &self.params
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Positions not yet reduced to zero.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// First active position; everything before it is zero.
    pub fn offset(&self) -> usize {
        self.params.n - self.dim
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn is_amplified(&self) -> bool {
        self.amplified
    }

    pub fn strategy_log(&self) -> &[StepTag] {
        &self.log
    }

    pub fn lineage(&self) -> Option<&[Lineage]> {
        self.lineage.as_deref()
    }

    /// Heuristic standard deviation of the current noise.
    pub fn sigma_current(&self) -> f64 {
        noise_after_steps(self.params.sigma, self.steps, self.amplified)
    }

    /// Seeded reordering, so that prefixes of the set are not clustered by
    /// category.
    pub fn shuffle(&mut self, rng: &mut StreamRng) {
        let order = self.samples.shuffle(rng);
        if let Some(lin) = self.lineage.as_mut() {
            let old = std::mem::take(lin);
            *lin = order.iter().map(|&i| old[i].clone()).collect();
        }
    }

    pub fn truncate(&mut self, len: usize) {
        self.samples.truncate(len);
        if let Some(lin) = self.lineage.as_mut() {
            lin.truncate(len);
        }
    }

    fn amplified_from(&self, samples: Samples, lineage: Option<Vec<Lineage>>) -> Self {
        let mut log = self.log.clone();
        log.push(StepTag::Amplified);
        Self {
            params: self.params,
            samples,
            dim: self.dim,
            steps: self.steps,
            amplified: true,
            log,
            lineage,
        }
    }

    fn reduced(&self, samples: Samples, lineage: Option<Vec<Lineage>>, b: usize, tag: StepTag) -> Self {
        let mut log = self.log.clone();
        log.push(tag);
        Self {
            params: self.params,
            samples,
            dim: self.dim - b,
            steps: self.steps + 1,
            amplified: self.amplified,
            log,
            lineage,
        }
    }
}

/// Applies `t` steps of width `b` with the given strategy. `lf2_cap` bounds
/// the number of outputs per LF2 step.
pub fn reduce(
    set: &SampleSet,
    t: usize,
    b: usize,
    strategy: Strategy,
    lf2_cap: Option<usize>,
    rng: &mut StreamRng,
) -> Result<SampleSet> {
    let mut cur = set.clone();
    for _ in 0..t {
        cur = match strategy {
            Strategy::Lf1 => reduce_step_lf1(&cur, b, rng)?,
            Strategy::Lf2 => reduce_step_lf2(&cur, b, lf2_cap, rng)?,
        };
    }
    Ok(cur)
}

/// Writes `x - sign * y` over full rows (including `b`).
#[inline]
pub(crate) fn combine_rows(out: &mut Vec<u16>, x: &[u16], y: &[u16], sign: i8, q: u32) {
    if sign > 0 {
        out.extend(x.iter().zip(y).map(|(&u, &v)| sub_mod(u as u32, v as u32, q) as u16));
    } else {
        out.extend(x.iter().zip(y).map(|(&u, &v)| {
            let s = u as u32 + v as u32;
            (if s >= q { s - q } else { s }) as u16
        }));
    }
}

pub(crate) fn combine_lineage(x: &Lineage, y: &Lineage, sign: i8) -> Lineage {
    x.iter()
        .copied()
        .chain(y.iter().map(|&(i, s)| (i, -s * sign)))
        .collect()
}
