//! Log-likelihood-ratio distinguisher.
//!
//! The score of a guess `s'` is `sum_j ln(q * Pr[e = b_j - <a_j, s'>])` under
//! the rounded Gaussian with the post-reduction deviation, uniform being the
//! alternative. Probabilities below `1e-300` are floored before the log.
//!
//! Two evaluation paths:
//!
//! * direct: one table lookup per sample and hypothesis;
//! * spectral: with `g(e) = ln(q Pr[e])` and its DFT `G`, the score is
//!   `(1/q) sum_w G(w) F_w(w s')`, where `F_w` is the DFT of the accumulator
//!   `sum_{a_j = x} theta^(w b_j)`. `g` is symmetric, so `G` is real and only
//!   `w = 0..=(q-1)/2` are needed.

use rustfft::num_complex::Complex64;

use super::fft::{accumulate, flat_index, roots, AxisDft};
use super::{ActiveSamples, DistinguisherKind, HypothesisSpace, ScoreTable};
use crate::error::{Error, Result};
use crate::gaussian::RoundedGaussian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrPath {
    #[default]
    Auto,
    Direct,
    Spectral,
}

/// LLR scores with the path picked by cost.
pub fn llr_distinguish(
    samples: &ActiveSamples,
    space: &HypothesisSpace,
    sigma_f: f64,
) -> Result<ScoreTable> {
    llr_distinguish_with(samples, space, sigma_f, LlrPath::Auto)
}

pub fn llr_distinguish_with(
    samples: &ActiveSamples,
    space: &HypothesisSpace,
    sigma_f: f64,
    path: LlrPath,
) -> Result<ScoreTable> {
    if samples.k() != space.k() || samples.q() != space.q() {
        return Err(Error::param("sample and hypothesis shapes differ"));
    }
    let noise = RoundedGaussian::new(sigma_f, space.q())?;
    let (g, floored) = noise.log_likelihood_ratios();
    let scores = match resolve(path, samples, space) {
        LlrPath::Direct => direct(samples, space, &g),
        _ => spectral(samples, space, &g),
    };
    Ok(ScoreTable::new(*space, scores, DistinguisherKind::Llr).with_floored(floored))
}

fn resolve(path: LlrPath, samples: &ActiveSamples, space: &HypothesisSpace) -> LlrPath {
    if path != LlrPath::Auto {
        return path;
    }
    let q = space.q() as f64;
    let k = space.k() as f64;
    let direct = space.len() as f64 * samples.len() as f64 * k;
    let full = q.powf(k);
    let spectral = (q + 1.0) / 2.0 * (samples.len() as f64 + 4.0 * k * full * q.log2());
    if direct <= spectral {
        LlrPath::Direct
    } else {
        LlrPath::Spectral
    }
}

fn direct(samples: &ActiveSamples, space: &HypothesisSpace, g: &[f64]) -> Vec<f64> {
    let q64 = space.q() as u64;
    (0..space.len())
        .map(|h| {
            let neg: Vec<u64> = space
                .hypothesis(h)
                .iter()
                .map(|&s| (q64 - s as u64) % q64)
                .collect();
            samples
                .iter()
                .map(|(a, b)| {
                    let acc = a
                        .iter()
                        .zip(&neg)
                        .fold(b as u64, |acc, (&x, &n)| acc + x as u64 * n);
                    g[(acc % q64) as usize]
                })
                .sum()
        })
        .collect()
}

fn spectral(samples: &ActiveSamples, space: &HypothesisSpace, g: &[f64]) -> Vec<f64> {
    let q = space.q() as usize;
    let theta = roots(space.q());
    // G(w) = sum_e g(e) cos(2 pi w e / q), real by symmetry of g.
    let big_g: Vec<f64> = (0..=(q - 1) / 2)
        .map(|w| {
            g.iter()
                .enumerate()
                .map(|(e, &v)| v * theta[(w * e) % q].re)
                .sum()
        })
        .collect();

    let hyps: Vec<Vec<u16>> = (0..space.len()).map(|h| space.hypothesis(h)).collect();
    let mut scores = vec![big_g[0] * samples.len() as f64; space.len()];
    let mut dft = AxisDft::new(space.q(), space.k());
    let mut scaled = vec![0u16; space.k()];
    for (w, &gw) in big_g.iter().enumerate().skip(1) {
        let mut data: Vec<Complex64> = accumulate(samples, |b| theta[(w * b as usize) % q]);
        dft.forward(&mut data, None);
        for (score, h) in scores.iter_mut().zip(&hyps) {
            for (dst, &s) in scaled.iter_mut().zip(h) {
                *dst = ((w * s as usize) % q) as u16;
            }
            *score += 2.0 * gw * data[flat_index(&scaled, q)].re;
        }
    }
    let inv_q = 1.0 / q as f64;
    scores.iter_mut().for_each(|s| *s *= inv_q);
    scores
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distinguish::residual_error;
    use crate::instance::{generate_instance, SecretDistribution};
    use crate::params::{to_signed, LweParams};
    use crate::rng::StreamRng;
    use crate::samples::Samples;

    /// `ln(11 * Pr[e])` for `sigma = 1.3`, `e = 0..=5`, from
    /// python/oracles/closed_forms.py (mpmath, 60 digits).
    const ORACLE_G: [f64; 6] = [
        1.1921796369439858807,
        0.91058460379764033025,
        0.065329508584252594876,
        -1.3449240614507278753,
        -3.3221061435958545675,
        -5.8256510469815134887,
    ];

    fn brute_force(s: &Samples, q: u32) -> Vec<f64> {
        (0..q as u16)
            .map(|guess| {
                s.iter()
                    .map(|smp| {
                        let e = to_signed(residual_error(smp.a, smp.b, &[guess], q), q);
                        ORACLE_G[e.unsigned_abs() as usize]
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_brute_force_oracle() {
        let (q, sigma) = (11u32, 1.3);
        let params = LweParams::with_sigma(1, q, sigma).unwrap();
        let inst = generate_instance(params, 50, SecretDistribution::Uniform, &mut StreamRng::new(4, 0))
            .unwrap();
        let view = ActiveSamples::new(&inst.samples, 0, 50, q);
        let want = brute_force(&inst.samples, q);
        for path in [LlrPath::Direct, LlrPath::Spectral] {
            let t = llr_distinguish_with(&view, &HypothesisSpace::full(1, q), sigma, path).unwrap();
            for (x, y) in t.scores().iter().zip(&want) {
                assert!((x - y).abs() <= 1e-10, "{path:?}: {x} vs {y}");
            }
            assert_eq!(t.argmax(), inst.secret.as_ref().unwrap().s);
        }
    }

    #[test]
    fn paths_agree_for_two_positions() {
        let q = 101u32;
        let params = LweParams::with_sigma(2, q, 20.0).unwrap();
        let inst = generate_instance(params, 5000, SecretDistribution::Uniform, &mut StreamRng::new(8, 0))
            .unwrap();
        let view = ActiveSamples::new(&inst.samples, 0, 5000, q);
        let space = HypothesisSpace::full(2, q);
        let a = llr_distinguish_with(&view, &space, 20.0, LlrPath::Direct).unwrap();
        let b = llr_distinguish_with(&view, &space, 20.0, LlrPath::Spectral).unwrap();
        for (x, y) in a.scores().iter().zip(b.scores()) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
        }
        assert_eq!(a.argmax(), b.argmax());
        let bounded = HypothesisSpace::bounded(2, q, 7).unwrap();
        let c = llr_distinguish_with(&view, &bounded, 20.0, LlrPath::Spectral).unwrap();
        let d = llr_distinguish_with(&view, &bounded, 20.0, LlrPath::Direct).unwrap();
        for (x, y) in c.scores().iter().zip(d.scores()) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn flat_noise_gives_near_zero_scores() {
        let q = 11u32;
        let params = LweParams::with_sigma(1, q, 1.0).unwrap();
        let inst = generate_instance(params, 200, SecretDistribution::Uniform, &mut StreamRng::new(2, 0))
            .unwrap();
        let view = ActiveSamples::new(&inst.samples, 0, 200, q);
        let t = llr_distinguish(&view, &HypothesisSpace::full(1, q), 1e4).unwrap();
        assert!(t.scores().iter().all(|s| s.abs() < 1e-6));
    }

    #[test]
    fn tiny_sigma_floors_and_still_finds_secret() {
        let q = 101u32;
        let params = LweParams::with_sigma(2, q, 1e-3).unwrap();
        let inst = generate_instance(params, 30, SecretDistribution::Noise, &mut StreamRng::new(6, 0))
            .unwrap();
        let view = ActiveSamples::new(&inst.samples, 0, 30, q);
        let t = llr_distinguish_with(&view, &HypothesisSpace::full(2, q), 0.3, LlrPath::Direct).unwrap();
        assert!(t.floored() > 0);
        assert!(t.scores().iter().all(|s| s.is_finite()));
        let secret = inst.secret.unwrap();
        assert_eq!(t.argmax(), secret.s);
        assert!(secret.s.iter().all(|&x| to_signed(x as u32, q) == 0));
    }
}
