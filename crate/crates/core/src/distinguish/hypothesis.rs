use std::cmp::Ordering;

use super::DistinguisherKind;
use crate::error::{Error, Result};
use crate::params::to_signed;

/// Guesses for the `k` last secret positions: all of Z_q^k, or those with
/// every signed coordinate in `[-d, d]`.
///
/// Hypotheses are indexed in mixed radix with axis 0 most significant. Along
/// an axis the full space is ordered `0, 1, ..., q-1` and the bounded space
/// `-d, ..., d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypothesisSpace {
    k: usize,
    q: u32,
    bound: Option<u32>,
}

impl HypothesisSpace {
    pub fn full(k: usize, q: u32) -> Self {
        assert!(k >= 1, "k must be positive");
        Self { k, q, bound: None }
    }

    pub fn bounded(k: usize, q: u32, d: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k must be positive"));
        }
        if d > (q - 1) / 2 {
            return Err(Error::param(format!("bound d = {d} exceeds (q-1)/2")));
        }
        Ok(Self {
            k,
            q,
            bound: Some(d),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn bound(&self) -> Option<u32> {
        self.bound
    }

    pub fn is_full(&self) -> bool {
        self.bound.is_none()
    }

    /// Values along one axis.
    pub fn side(&self) -> usize {
        match self.bound {
            None => self.q as usize,
            Some(d) => 2 * d as usize + 1,
        }
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Canonical residues along one axis, in index order.
    pub fn axis_values(&self) -> Vec<u32> {
        match self.bound {
            None => (0..self.q).collect(),
            Some(d) => (-(d as i64)..=d as i64)
                .map(|v| v.rem_euclid(self.q as i64) as u32)
                .collect(),
        }
    }

    pub fn hypothesis(&self, mut idx: usize) -> Vec<u16> {
        let vals = self.axis_values();
        let side = self.side();
        let mut out = vec![0u16; self.k];
        for slot in out.iter_mut().rev() {
            *slot = vals[idx % side] as u16;
            idx /= side;
        }
        out
    }

    pub fn index_of(&self, h: &[u16]) -> Option<usize> {
        if h.len() != self.k {
            return None;
        }
        let side = self.side();
        let mut idx = 0usize;
        for &x in h {
            let x = x as u32;
            if x >= self.q {
                return None;
            }
            let pos = match self.bound {
                None => x as usize,
                Some(d) => {
                    let s = to_signed(x, self.q);
                    if s.unsigned_abs() > d as u64 {
                        return None;
                    }
                    (s + d as i64) as usize
                }
            };
            idx = idx * side + pos;
        }
        Some(idx)
    }

    pub fn contains(&self, h: &[u16]) -> bool {
        self.index_of(h).is_some()
    }

    fn signed_cmp(&self, a: usize, b: usize) -> Ordering {
        let (ha, hb) = (self.hypothesis(a), self.hypothesis(b));
        let sa = ha.iter().map(|&x| to_signed(x as u32, self.q));
        let sb = hb.iter().map(|&x| to_signed(x as u32, self.q));
        sa.cmp(sb)
    }
}

/// A score per hypothesis plus the winning guess.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    space: HypothesisSpace,
    scores: Vec<f64>,
    kind: DistinguisherKind,
    best: usize,
    /// Probability-table entries floored before taking logs (LLR only).
    floored: usize,
}

impl ScoreTable {
    pub(crate) fn new(space: HypothesisSpace, scores: Vec<f64>, kind: DistinguisherKind) -> Self {
        assert_eq!(scores.len(), space.len());
        let best = argmax(&space, &scores);
        Self {
            space,
            scores,
            kind,
            best,
            floored: 0,
        }
    }

    pub(crate) fn with_floored(mut self, floored: usize) -> Self {
        self.floored = floored;
        self
    }

    pub fn space(&self) -> &HypothesisSpace {
        &self.space
    }

    pub fn kind(&self) -> DistinguisherKind {
        self.kind
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn floored(&self) -> usize {
        self.floored
    }

    /// Highest-scoring hypothesis; ties go to the lexicographically smallest
    /// signed vector.
    pub fn argmax(&self) -> Vec<u16> {
        self.space.hypothesis(self.best)
    }

    pub fn argmax_signed(&self) -> Vec<i64> {
        self.argmax()
            .iter()
            .map(|&x| to_signed(x as u32, self.space.q()))
            .collect()
    }

    pub fn best_score(&self) -> f64 {
        self.scores[self.best]
    }

    /// Best score minus the runner-up (0 for a single hypothesis).
    pub fn margin(&self) -> f64 {
        let second = self
            .scores
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.best)
            .map(|(_, &s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        if second.is_finite() {
            self.best_score() - second
        } else {
            0.0
        }
    }

    pub fn score(&self, h: &[u16]) -> Option<f64> {
        self.space.index_of(h).map(|i| self.scores[i])
    }

    /// The table restricted to a bounded sub-space, scores copied verbatim.
    pub fn restrict(&self, sub: &HypothesisSpace, kind: DistinguisherKind) -> Result<ScoreTable> {
        if sub.k() != self.space.k() || sub.q() != self.space.q() {
            return Err(Error::param("sub-space shape differs"));
        }
        let scores = (0..sub.len())
            .map(|i| {
                self.score(&sub.hypothesis(i))
                    .ok_or_else(|| Error::param("sub-space not contained in table"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreTable::new(*sub, scores, kind).with_floored(self.floored))
    }
}

fn argmax(space: &HypothesisSpace, scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        let b = scores[best];
        if s > b || (s == b && space.signed_cmp(i, best) == Ordering::Less) {
            best = i;
        }
    }
    best
}
