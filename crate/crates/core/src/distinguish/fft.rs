//! FFT distinguisher.
//!
//! The score of a guess `s'` is `Re(sum_j theta^(b_j - <a_j, s'>))` with
//! `theta = exp(2*pi*i/q)`, i.e. `sum_j cos(2*pi*e'_j/q)`. It is computed either
//! by summing the cosines per guess, or by accumulating
//! `f(x) = sum_{a_j = x} theta^(b_j)` on Z_q^k and taking an exact size-`q`
//! DFT along each axis. rustfft picks a Rader/Bluestein plan for prime `q`.
//!
//! Axes are transformed in order `0..k`; once axis `i` is done, only lines
//! whose coordinates on axes `< i` lie in the hypothesis space are
//! transformed further. For the full space nothing is skipped, and for a
//! bounded space every retained value goes through exactly the same
//! operations, so the pruned table equals the restricted full table bit for
//! bit.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{ActiveSamples, DistinguisherKind, HypothesisSpace, ScoreTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FftPath {
    /// Pick by cost estimate.
    #[default]
    Auto,
    /// Per-hypothesis cosine sums, `O(m * |space|)`.
    Direct,
    /// Accumulator plus axis-wise DFT, `O(m + k q^k log q)`.
    Transform,
}

fn check(samples: &ActiveSamples, space: &HypothesisSpace) -> Result<()> {
    if samples.k() != space.k() || samples.q() != space.q() {
        return Err(Error::param(format!(
            "samples have k = {}, q = {}; space has k = {}, q = {}",
            samples.k(),
            samples.q(),
            space.k(),
            space.q()
        )));
    }
    Ok(())
}

fn resolve(path: FftPath, samples: &ActiveSamples, space: &HypothesisSpace) -> FftPath {
    match path {
        FftPath::Auto => {
            if space.is_full() {
                return FftPath::Transform;
            }
            let k = space.k() as f64;
            let full = (space.q() as f64).powf(k);
            let direct = space.len() as f64 * samples.len() as f64;
            let pruned = k * full * (space.side() as f64).ln();
            if direct < pruned {
                FftPath::Direct
            } else {
                FftPath::Transform
            }
        }
        p => p,
    }
}

/// Scores every hypothesis in `space` (full or bounded).
pub fn fft_distinguish(
    samples: &ActiveSamples,
    space: &HypothesisSpace,
    path: FftPath,
) -> Result<ScoreTable> {
    check(samples, space)?;
    let kind = if space.is_full() {
        DistinguisherKind::Fft
    } else {
        DistinguisherKind::FftPruned
    };
    let scores = match resolve(path, samples, space) {
        FftPath::Direct => direct_scores(samples, space),
        _ => transform_scores(samples, space),
    };
    Ok(ScoreTable::new(*space, scores, kind))
}

/// FFT distinguisher over guesses with every signed coordinate in `[-d, d]`.
pub fn pruned_fft_distinguish(samples: &ActiveSamples, d: u32, path: FftPath) -> Result<ScoreTable> {
    let q = samples.q();
    if d == 0 || d > (q - 1) / 2 {
        return Err(Error::param(format!("bound d = {d} outside 1..=(q-1)/2")));
    }
    let space = HypothesisSpace::bounded(samples.k(), q, d)?;
    fft_distinguish(samples, &space, path)
}

pub(crate) fn cos_table(q: u32) -> Vec<f64> {
    (0..q).map(|e| (TAU * e as f64 / q as f64).cos()).collect()
}

fn direct_scores(samples: &ActiveSamples, space: &HypothesisSpace) -> Vec<f64> {
    let q = space.q();
    let q64 = q as u64;
    let cos = cos_table(q);
    (0..space.len())
        .map(|h| {
            let guess = space.hypothesis(h);
            // b + sum a_i * (q - s_i) == b - <a, s> (mod q)
            let neg: Vec<u64> = guess.iter().map(|&s| (q64 - s as u64) % q64).collect();
            samples
                .iter()
                .map(|(a, b)| {
                    let acc = a
                        .iter()
                        .zip(&neg)
                        .fold(b as u64, |acc, (&x, &n)| acc + x as u64 * n);
                    cos[(acc % q64) as usize]
                })
                .sum()
        })
        .collect()
}

fn transform_scores(samples: &ActiveSamples, space: &HypothesisSpace) -> Vec<f64> {
    let q = space.q() as usize;
    let theta = roots(space.q());
    let mut data = accumulate(samples, |b| theta[b as usize]);

    let mut allowed = vec![false; q];
    for v in space.axis_values() {
        allowed[v as usize] = true;
    }
    let mut dft = AxisDft::new(space.q(), space.k());
    dft.forward(&mut data, Some(&allowed));

    (0..space.len())
        .map(|h| data[flat_index(&space.hypothesis(h), q)].re)
        .collect()
}

/// `exp(2*pi*i*x/q)` for `x in 0..q`.
pub(crate) fn roots(q: u32) -> Vec<Complex64> {
    (0..q)
        .map(|x| Complex64::from_polar(1.0, TAU * x as f64 / q as f64))
        .collect()
}

pub(crate) fn flat_index(x: &[u16], q: usize) -> usize {
    x.iter().fold(0usize, |acc, &v| acc * q + v as usize)
}

/// `f(x) = sum_{a_j = x} weight(b_j)` over Z_q^k, row-major.
pub(crate) fn accumulate(
    samples: &ActiveSamples,
    weight: impl Fn(u16) -> Complex64,
) -> Vec<Complex64> {
    let q = samples.q() as usize;
    let mut data = vec![Complex64::new(0.0, 0.0); q.pow(samples.k() as u32)];
    for (a, b) in samples.iter() {
        data[flat_index(a, q)] += weight(b);
    }
    data
}

/// Forward DFT of a row-major `q^k` array, one axis at a time.
pub(crate) struct AxisDft {
    q: usize,
    k: usize,
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl AxisDft {
    pub(crate) fn new(q: u32, k: usize) -> Self {
        let fft = FftPlanner::<f64>::new().plan_fft_forward(q as usize);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Self {
            q: q as usize,
            k,
            fft,
            line: vec![Complex64::new(0.0, 0.0); q as usize],
            scratch,
        }
    }

    /// With `allowed`, lines whose coordinate on an already transformed axis
    /// is not allowed are left alone; they never reach an allowed output.
    pub(crate) fn forward(&mut self, data: &mut [Complex64], allowed: Option<&[bool]>) {
        let (q, k) = (self.q, self.k);
        let total = q.pow(k as u32);
        assert_eq!(data.len(), total);
        let mut coords = vec![0usize; k];
        for axis in 0..k {
            let stride = q.pow((k - 1 - axis) as u32);
            'lines: for l in 0..total / q {
                let mut rest = l;
                for ax in (0..k).rev() {
                    if ax == axis {
                        coords[ax] = 0;
                        continue;
                    }
                    coords[ax] = rest % q;
                    rest /= q;
                }
                if let Some(allowed) = allowed {
                    if coords[..axis].iter().any(|&c| !allowed[c]) {
                        continue 'lines;
                    }
                }
                let base = coords.iter().fold(0usize, |acc, &c| acc * q + c);
                for (i, slot) in self.line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                self.fft.process_with_scratch(&mut self.line, &mut self.scratch);
                for (i, v) in self.line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SecretDistribution};
    use crate::params::{to_signed, LweParams};
    use crate::rng::StreamRng;
    use crate::samples::Samples;
    use rand::Rng;

    fn random_samples(q: u32, k: usize, m: usize, seed: u64) -> Samples {
        let mut rng = StreamRng::new(seed, 0);
        let mut s = Samples::new(k);
        for _ in 0..m {
            let a: Vec<u16> = (0..k).map(|_| rng.random_range(0..q) as u16).collect();
            s.push(&a, rng.random_range(0..q) as u16);
        }
        s
    }

    #[test]
    fn single_sample_is_analytic() {
        let mut s = Samples::new(1);
        s.push(&[1], 2);
        let view = ActiveSamples::new(&s, 0, 1, 5);
        let space = HypothesisSpace::full(1, 5);
        for path in [FftPath::Direct, FftPath::Transform] {
            let t = fft_distinguish(&view, &space, path).unwrap();
            for alpha in 0..5u16 {
                let expect = (TAU * (2.0 - alpha as f64) / 5.0).cos();
                assert!((t.score(&[alpha]).unwrap() - expect).abs() < 1e-12);
            }
            assert_eq!(t.argmax(), vec![2]);
        }
    }

    #[test]
    fn noiseless_correct_guess_scores_m() {
        let params = LweParams::with_sigma(2, 11, 1e-6).unwrap();
        let inst = generate_instance(params, 40, SecretDistribution::Uniform, &mut StreamRng::new(1, 1))
            .unwrap();
        let view = ActiveSamples::new(&inst.samples, 0, 40, 11);
        let secret = inst.secret.unwrap().s;
        for path in [FftPath::Direct, FftPath::Transform] {
            let t = fft_distinguish(&view, &HypothesisSpace::full(2, 11), path).unwrap();
            assert!((t.score(&secret).unwrap() - 40.0).abs() < 1e-9);
            assert_eq!(t.argmax(), secret);
        }
    }

    #[test]
    fn transform_matches_direct() {
        for &(q, k, m) in &[(5u32, 1usize, 50usize), (5, 2, 200), (11, 1, 300), (11, 2, 500), (101, 1, 2000), (101, 2, 3000)] {
            let s = random_samples(q, k, m, q as u64 * 7 + k as u64);
            let view = ActiveSamples::new(&s, 0, m, q);
            let space = HypothesisSpace::full(k, q);
            let d = fft_distinguish(&view, &space, FftPath::Direct).unwrap();
            let t = fft_distinguish(&view, &space, FftPath::Transform).unwrap();
            for (x, y) in d.scores().iter().zip(t.scores()) {
                assert!((x - y).abs() <= 1e-6, "q={q} k={k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn pruned_equals_restricted_full_table() {
        let (q, k, m) = (101u32, 2usize, 4000usize);
        let s = random_samples(q, k, m, 77);
        let view = ActiveSamples::new(&s, 0, m, q);
        for path in [FftPath::Direct, FftPath::Transform] {
            let full = fft_distinguish(&view, &HypothesisSpace::full(k, q), path).unwrap();
            let pruned = pruned_fft_distinguish(&view, 10, path).unwrap();
            let restricted = full.restrict(pruned.space(), DistinguisherKind::FftPruned).unwrap();
            assert_eq!(pruned.scores(), restricted.scores());
            assert_eq!(pruned.argmax(), restricted.argmax());
        }
    }

    #[test]
    fn no_pruning_at_maximal_bound() {
        let (q, k, m) = (11u32, 2usize, 300usize);
        let s = random_samples(q, k, m, 5);
        let view = ActiveSamples::new(&s, 0, m, q);
        let full = fft_distinguish(&view, &HypothesisSpace::full(k, q), FftPath::Transform).unwrap();
        let pruned = pruned_fft_distinguish(&view, 5, FftPath::Transform).unwrap();
        assert_eq!(pruned.space().len(), full.space().len());
        for i in 0..pruned.space().len() {
            let h = pruned.space().hypothesis(i);
            assert_eq!(pruned.score(&h), full.score(&h));
        }
        assert_eq!(pruned.argmax(), full.argmax());
        assert!(pruned_fft_distinguish(&view, 6, FftPath::Transform).is_err());
    }

    #[test]
    fn shifting_b_rotates_residuals() {
        let (q, k, m) = (11u32, 2usize, 200usize);
        let s = random_samples(q, k, m, 9);
        let c = 3u16;
        let mut shifted = Samples::new(k);
        for smp in s.iter() {
            shifted.push(smp.a, ((smp.b as u32 + c as u32) % q) as u16);
        }
        let space = HypothesisSpace::full(k, q);
        let t = fft_distinguish(&ActiveSamples::new(&shifted, 0, m, q), &space, FftPath::Transform).unwrap();
        for h in 0..space.len() {
            let guess = space.hypothesis(h);
            let expect: f64 = s
                .iter()
                .map(|smp| {
                    let e = super::super::residual_error(smp.a, smp.b, &guess, q);
                    (TAU * ((e + c as u32) % q) as f64 / q as f64).cos()
                })
                .sum();
            assert!((t.scores()[h] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_secret_usually_within_three_sigma() {
        // Oracle: P(|e| <= 25) from the pmf, squared for k = 2.
        let sigma = 8.005;
        let q = 1601u32;
        let params = LweParams::with_sigma(2, q, sigma).unwrap();
        let rg = crate::gaussian::RoundedGaussian::new(sigma, q).unwrap();
        let inside: f64 = (-25i64..=25).map(|e| rg.pmf_signed(e)).sum();
        assert!(inside * inside > 0.99);
        let hits = (0..1000)
            .filter(|&i| {
                let inst = generate_instance(params, 1, SecretDistribution::Noise, &mut StreamRng::new(3, i))
                    .unwrap();
                inst.secret.unwrap().s.iter().all(|&x| to_signed(x as u32, q).abs() <= 25)
            })
            .count();
        assert!(hits > 990, "{hits}");
    }
}
