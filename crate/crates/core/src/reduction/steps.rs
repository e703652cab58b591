use rand::seq::index;
use rand::Rng;

use super::{categorize, combine_lineage, combine_rows, Lineage, SampleSet, StepTag};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::samples::Samples;

/// Members of one category in insertion order, with their signs.
struct Group {
    key: u64,
    members: Vec<(u32, i8)>,
}

fn check_width(set: &SampleSet, b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::param("step width b must be positive"));
    }
    if set.dim() < b {
        return Err(Error::param(format!(
            "cannot reduce {b} positions, only {} remain",
            set.dim()
        )));
    }
    Ok(())
}

/// Buckets samples by category of the next `b` active positions, in key order.
fn group(set: &SampleSet, b: usize) -> Vec<Group> {
    let q = set.params().q;
    let off = set.offset();
    let mut tagged: Vec<(u64, i8, u32)> = set
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let c = categorize(&s.a[off..off + b], q);
            (c.key, c.sign, i as u32)
        })
        .collect();
    tagged.sort_by_key(|&(k, _, i)| (k, i));

    let mut groups: Vec<Group> = Vec::new();
    for (key, sign, idx) in tagged {
        match groups.last_mut() {
            Some(g) if g.key == key => g.members.push((idx, sign)),
            _ => groups.push(Group {
                key,
                members: vec![(idx, sign)],
            }),
        }
    }
    groups
}

struct Emitter<'a> {
    set: &'a SampleSet,
    out: Samples,
    lineage: Option<Vec<Lineage>>,
}

impl<'a> Emitter<'a> {
    fn new(set: &'a SampleSet, capacity: usize) -> Self {
        Self {
            set,
            out: Samples::with_capacity(set.params().n, capacity),
            lineage: set.lineage().map(|_| Vec::with_capacity(capacity)),
        }
    }

    fn pass(&mut self, idx: u32) {
        self.out.push_row(self.set.samples().row(idx as usize));
        if let (Some(dst), Some(src)) = (self.lineage.as_mut(), self.set.lineage()) {
            dst.push(src[idx as usize].clone());
        }
    }

    /// Emits `x - sign * y`.
    fn combine(&mut self, x: u32, y: u32, sign: i8) {
        let samples = self.set.samples();
        let mut row = Vec::with_capacity(samples.stride());
        combine_rows(
            &mut row,
            samples.row(x as usize),
            samples.row(y as usize),
            sign,
            self.set.params().q,
        );
        self.out.push_row(&row);
        if let (Some(dst), Some(src)) = (self.lineage.as_mut(), self.set.lineage()) {
            dst.push(combine_lineage(&src[x as usize], &src[y as usize], sign));
        }
    }
}

/// One LF1 step: a uniformly chosen member of each category is its
/// representative and every other member is combined with it once. A category
/// of `c` samples yields `c - 1` outputs; zero-category samples pass through.
///
/// The choice must not follow sample order: outputs are emitted in category
/// order with pass-throughs first, so "first member" would keep picking the
/// less noisy pass-through samples as representatives in the next step.
pub fn reduce_step_lf1(set: &SampleSet, b: usize, rng: &mut StreamRng) -> Result<SampleSet> {
    check_width(set, b)?;
    let groups = group(set, b);
    let mut em = Emitter::new(set, set.len());
    for g in &groups {
        if g.key == 0 {
            g.members.iter().for_each(|&(i, _)| em.pass(i));
            continue;
        }
        let r = rng.random_range(0..g.members.len());
        let (rep, rep_sign) = g.members[r];
        for (j, &(i, s)) in g.members.iter().enumerate() {
            if j != r {
                em.combine(i, rep, s * rep_sign);
            }
        }
    }
    let Emitter { out, lineage, .. } = em;
    Ok(set.reduced(out, lineage, b, StepTag::Lf1))
}

fn pairs(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

/// Decodes a colexicographic pair rank into `(i, j)` with `i < j`.
fn unrank_pair(p: u64) -> (u64, u64) {
    let mut j = ((1.0 + (1.0 + 8.0 * p as f64).sqrt()) / 2.0) as u64;
    while pairs(j) > p {
        j -= 1;
    }
    while pairs(j + 1) <= p {
        j += 1;
    }
    (p - pairs(j), j)
}

/// Splits `cap` over categories proportionally to their pair counts, with
/// leftover units going to the largest remainders (ties in key order).
fn allocate(cap: u64, weights: &[u64]) -> Vec<u64> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let mut alloc = Vec::with_capacity(weights.len());
    let mut rema = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let num = cap as u128 * w as u128;
        alloc.push((num / total) as u64);
        rema.push(((num % total), i));
    }
    let mut left = cap - alloc.iter().sum::<u64>();
    rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(r, i) in &rema {
        if left == 0 {
            break;
        }
        if r > 0 {
            alloc[i] += 1;
            left -= 1;
        }
    }
    alloc
}

/// One LF2 step: every pair within a category is combined, giving
/// `C(c, 2)` outputs for a category of `c` samples. With `max_outputs`, a
/// uniformly chosen subset of pairs is kept, spread over categories in
/// proportion to their pair counts.
pub fn reduce_step_lf2(
    set: &SampleSet,
    b: usize,
    max_outputs: Option<usize>,
    rng: &mut StreamRng,
) -> Result<SampleSet> {
    check_width(set, b)?;
    let groups = group(set, b);
    let weights: Vec<u64> = groups
        .iter()
        .map(|g| if g.key == 0 { 0 } else { pairs(g.members.len() as u64) })
        .collect();
    let total: u64 = weights.iter().sum();
    let quota = match max_outputs {
        Some(cap) if (cap as u64) < total => Some(allocate(cap as u64, &weights)),
        _ => None,
    };
    let expected = quota.as_ref().map_or(total, |q| q.iter().sum()) as usize;
    let mut em = Emitter::new(set, expected + set.len() / 16);

    for (gi, g) in groups.iter().enumerate() {
        if g.key == 0 {
            g.members.iter().for_each(|&(i, _)| em.pass(i));
            continue;
        }
        let emit = |em: &mut Emitter, i: usize, j: usize| {
            let (xi, si) = g.members[i];
            let (xj, sj) = g.members[j];
            em.combine(xj, xi, si * sj);
        };
        match &quota {
            None => {
                for j in 1..g.members.len() {
                    for i in 0..j {
                        emit(&mut em, i, j);
                    }
                }
            }
            Some(quota) => {
                let k = quota[gi] as usize;
                if k == 0 {
                    continue;
                }
                let mut chosen = index::sample(rng, weights[gi] as usize, k).into_vec();
                chosen.sort_unstable();
                for p in chosen {
                    let (i, j) = unrank_pair(p as u64);
                    emit(&mut em, i as usize, j as usize);
                }
            }
        }
    }
    let Emitter { out, lineage, .. } = em;
    Ok(set.reduced(out, lineage, b, StepTag::Lf2))
}
