use crate::distinguish::{
    fft_distinguish, llr_distinguish, pruned_fft_distinguish, ActiveSamples, DistinguisherKind,
    FftPath, HypothesisSpace, ScoreTable,
};
use crate::error::Result;
use crate::reduction::SampleSet;

/// First prefix length found by doubling from 32 and then bisecting, or
/// `None` if `full` itself fails.
///
/// Success need not be monotone in the prefix length; the result is the
/// boundary this search lands on: `ok(m)` holds and `ok(lo)` failed for the
/// last failing probe `lo < m`, with `m - lo == 1`.
pub fn first_success(full: usize, mut ok: impl FnMut(usize) -> Result<bool>) -> Result<Option<usize>> {
    if full == 0 {
        return Ok(None);
    }
    let mut lo = 0; // known failure (0 = nothing probed)
    let mut hi = 32.min(full);
    loop {
        if ok(hi)? {
            break;
        }
        if hi == full {
            return Ok(None);
        }
        lo = hi;
        hi = (hi * 2).min(full);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Runs one distinguisher. `d` is used by the pruned FFT, `sigma_f` by LLR.
pub fn run_distinguisher(
    view: &ActiveSamples,
    kind: DistinguisherKind,
    d: u32,
    sigma_f: f64,
) -> Result<ScoreTable> {
    let full = HypothesisSpace::full(view.k(), view.q());
    match kind {
        DistinguisherKind::Llr => llr_distinguish(view, &full, sigma_f),
        DistinguisherKind::Fft => fft_distinguish(view, &full, FftPath::Auto),
        DistinguisherKind::FftPruned => pruned_fft_distinguish(view, d, FftPath::Auto),
    }
}

/// Smallest prefix of `reduced` (in its current order) on which `kind`
/// ranks `truth` first, located by [`first_success`].
pub fn min_samples_to_success(
    reduced: &SampleSet,
    truth: &[u16],
    kind: DistinguisherKind,
    d: u32,
) -> Result<Option<usize>> {
    let view = ActiveSamples::from_set(reduced);
    let sigma_f = reduced.sigma_current();
    first_success(view.len(), |m| {
        Ok(run_distinguisher(&view.prefix(m), kind, d, sigma_f)?.argmax() == truth)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SecretDistribution};
    use crate::params::LweParams;
    use crate::rng::StreamRng;
    use crate::samples::Samples;
    use proptest::prelude::*;
    use rand::Rng;

    fn linear_scan(full: usize, ok: impl Fn(usize) -> bool) -> Option<usize> {
        (1..=full).find(|&m| ok(m))
    }

    proptest! {
        #[test]
        fn bisection_matches_linear_scan_on_thresholds(full in 1usize..3000, threshold in 1usize..4000) {
            let ok = |m: usize| m >= threshold;
            let got = first_success(full, |m| Ok(ok(m))).unwrap();
            prop_assert_eq!(got, linear_scan(full, ok));
        }
    }

    #[test]
    fn lands_on_a_success_boundary() {
        // Non-monotone predicate: the result succeeds and its predecessor fails.
        let ok = |m: usize| m % 7 == 0 || m > 500;
        let got = first_success(1000, |m| Ok(ok(m))).unwrap().unwrap();
        assert!(ok(got) && !ok(got - 1), "{got}");
        assert_eq!(first_success(10, |_| Ok(false)).unwrap(), None);
        assert_eq!(first_success(0, |_| Ok(true)).unwrap(), None);
    }

    #[test]
    fn noiseless_toy_needs_one_sample() {
        let params = LweParams::with_sigma(1, 5, 1e-9).unwrap();
        let mut rng = StreamRng::new(5, 0);
        let mut inst = generate_instance(params, 40, SecretDistribution::Uniform, &mut rng).unwrap();
        // Put a sample with a != 0 first so one sample pins the secret.
        let first = (0..40).find(|&i| inst.samples.get(i).a[0] != 0).unwrap();
        let mut order: Vec<usize> = (0..40).collect();
        order.swap(0, first);
        inst.samples = inst.samples.select(&order);
        let set = SampleSet::from_instance(&inst);
        let truth = inst.secret.unwrap().s;
        for kind in [DistinguisherKind::Fft, DistinguisherKind::Llr] {
            assert_eq!(min_samples_to_success(&set, &truth, kind, 2).unwrap(), Some(1));
        }
    }

    /// Planted decoys make small prefixes favour a wrong guess; success is
    /// monotone here, so search and scan must agree.
    #[test]
    fn matches_linear_scan_on_ramped_noise() {
        let q = 11u32;
        for seed in 0..20u64 {
            let mut rng = StreamRng::new(seed, 9);
            let secret = rng.random_range(0..q) as u16;
            let decoy = (secret as u32 + 1 + rng.random_range(0..q - 1)) % q;
            let mut s = Samples::new(1);
            let decoys = rng.random_range(5..40usize);
            for j in 0..200 {
                let a = rng.random_range(1..q);
                let target = if j < decoys { decoy } else { secret as u32 };
                s.push(&[a as u16], ((a * target) % q) as u16);
            }
            let params = LweParams::with_sigma(1, q, 1.0).unwrap();
            let set = SampleSet::new(params, s);
            let view = ActiveSamples::from_set(&set);
            let ok = |m: usize| {
                run_distinguisher(&view.prefix(m), DistinguisherKind::Fft, 0, 1.0)
                    .unwrap()
                    .argmax()
                    == [secret]
            };
            let scan = linear_scan(200, ok);
            let monotone = (1..=200).all(|m| ok(m) == (scan.is_some_and(|t| m >= t)));
            assert!(monotone, "seed {seed}");
            let got = min_samples_to_success(&set, &[secret], DistinguisherKind::Fft, 0).unwrap();
            assert_eq!(got, scan, "seed {seed}");
            assert!(got.unwrap() > decoys);
        }
    }
}
