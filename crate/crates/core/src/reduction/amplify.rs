use rand::seq::index;

use super::{Lineage, SampleSet};
use crate::error::{Error, Result};
use crate::params::{add_mod, sub_mod};
use crate::rng::StreamRng;
use crate::samples::Samples;

fn choose3(m: u64) -> u64 {
    if m < 3 {
        0
    } else {
        m * (m - 1) * (m - 2) / 6
    }
}

/// Largest number of distinct triple combinations: `4 * C(m, 3)`.
pub fn max_amplified(m: usize) -> u64 {
    4 * choose3(m as u64)
}

/// Decodes a colexicographic rank into a triple `i < j < k`.
fn unrank_triple(mut r: u64, m: u64) -> (u64, u64, u64) {
    let (mut lo, mut hi) = (2u64, m - 1);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if choose3(mid) <= r {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let k = lo;
    r -= choose3(k);
    let mut j = ((1.0 + (1.0 + 8.0 * r as f64).sqrt()) / 2.0) as u64;
    while j * (j - 1) / 2 > r {
        j -= 1;
    }
    while (j + 1) * j / 2 <= r {
        j += 1;
    }
    let i = r - j * (j - 1) / 2;
    (i, j, k)
}

/// Expands `set` to `target_m` distinct combinations `a_i ± a_j ± a_k`
/// (`i < j < k`; the four sign patterns up to global negation), drawn without
/// repetition. Must be applied before any reduction step.
pub fn sample_amplify(set: &SampleSet, target_m: usize, rng: &mut StreamRng) -> Result<SampleSet> {
    if set.steps_taken() > 0 || set.is_amplified() {
        return Err(Error::param(
            "amplification applies to unreduced, unamplified samples",
        ));
    }
    let m = set.len() as u64;
    let max = max_amplified(set.len());
    if target_m == 0 || target_m as u64 > max {
        return Err(Error::param(format!(
            "target {target_m} outside 1..={max} for m = {m}"
        )));
    }
    let q = set.params().q;
    let src = set.samples();
    let stride = src.stride();
    let mut out = Samples::with_capacity(src.dim(), target_m);
    let mut lineage: Option<Vec<Lineage>> = set.lineage().map(|_| Vec::with_capacity(target_m));
    let mut row = vec![0u16; stride];

    for code in index::sample(rng, max as usize, target_m).into_iter() {
        let code = code as u64;
        let (i, j, k) = unrank_triple(code / 4, m);
        let sj: i8 = if code & 1 == 0 { 1 } else { -1 };
        let sk: i8 = if code & 2 == 0 { 1 } else { -1 };
        let (ri, rj, rk) = (src.row(i as usize), src.row(j as usize), src.row(k as usize));
        for c in 0..stride {
            let mut v = ri[c] as u32;
            v = if sj > 0 { add_mod(v, rj[c] as u32, q) } else { sub_mod(v, rj[c] as u32, q) };
            v = if sk > 0 { add_mod(v, rk[c] as u32, q) } else { sub_mod(v, rk[c] as u32, q) };
            row[c] = v as u16;
        }
        out.push_row(&row);
        if let (Some(dst), Some(srcl)) = (lineage.as_mut(), set.lineage()) {
            let mut l = srcl[i as usize].clone();
            l.extend(srcl[j as usize].iter().map(|&(x, s)| (x, s * sj)));
            l.extend(srcl[k as usize].iter().map(|&(x, s)| (x, s * sk)));
            dst.push(l);
        }
    }
    Ok(set.amplified_from(out, lineage))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, SecretDistribution};
    use crate::params::{to_signed, LweParams};
    use crate::reduction::test_support::{assert_consistent, tracked_set};
    use crate::reduction::reduce_step_lf1;
    use std::collections::BTreeSet;

    #[test]
    fn triple_unranking() {
        let m = 12u64;
        let mut r = 0;
        for k in 2..m {
            for j in 1..k {
                for i in 0..j {
                    assert_eq!(unrank_triple(r, m), (i, j, k));
                    r += 1;
                }
            }
        }
        assert_eq!(r, choose3(m));
    }

    #[test]
    fn three_samples_give_the_four_sign_patterns() {
        let (inst, set) = tracked_set(3, 11, 0.05, 3, 1);
        let out = sample_amplify(&set, 4, &mut StreamRng::new(0, 0)).unwrap();
        assert_eq!(out.len(), 4);
        let rows: BTreeSet<Vec<u16>> = out.samples().iter().map(|s| s.a.to_vec()).collect();
        assert_eq!(rows.len(), 4);
        let patterns: BTreeSet<Vec<i8>> = out
            .lineage()
            .unwrap()
            .iter()
            .map(|l| l.iter().map(|&(_, s)| s).collect())
            .collect();
        let expected: BTreeSet<Vec<i8>> =
            [[1, 1, 1], [1, -1, 1], [1, 1, -1], [1, -1, -1]].iter().map(|p| p.to_vec()).collect();
        assert_eq!(patterns, expected);
        assert_consistent(&inst, &out);
        assert!(sample_amplify(&set, 5, &mut StreamRng::new(0, 0)).is_err());
    }

    #[test]
    fn outputs_are_distinct_and_consistent() {
        let (inst, set) = tracked_set(6, 101, 0.02, 20, 2);
        let out = sample_amplify(&set, 2000, &mut StreamRng::new(2, 2)).unwrap();
        assert!(out.is_amplified());
        let mut seen = BTreeSet::new();
        for l in out.lineage().unwrap() {
            assert!(seen.insert(l.clone()));
        }
        assert_consistent(&inst, &out);
        let reduced = reduce_step_lf1(&out, 2, &mut StreamRng::new(0, 0)).unwrap();
        assert_consistent(&inst, &reduced);
        let expected = inst.params.sigma * 2f64.sqrt() * 3f64.sqrt();
        assert!((reduced.sigma_current() - expected).abs() < 1e-12);
    }

    #[test]
    fn only_before_reduction() {
        let (_, set) = tracked_set(4, 11, 0.05, 100, 3);
        let reduced = reduce_step_lf1(&set, 2, &mut StreamRng::new(0, 0)).unwrap();
        assert!(sample_amplify(&reduced, 10, &mut StreamRng::new(0, 0)).is_err());
    }

    #[test]
    fn amplified_error_variance_is_tripled() {
        let params = LweParams::new(4, 1601, 0.005).unwrap();
        let inst = generate_instance(params, 400, SecretDistribution::Uniform, &mut StreamRng::new(3, 0))
            .unwrap();
        let set = SampleSet::from_instance(&inst);
        let out = sample_amplify(&set, 100_000, &mut StreamRng::new(3, 1)).unwrap();
        let amp = crate::instance::LweInstance {
            params,
            samples: out.samples().clone(),
            secret: inst.secret.clone(),
        };
        let q = params.q;
        let var = amp
            .errors()
            .unwrap()
            .iter()
            .map(|&e| (to_signed(e.rem_euclid(q as i64) as u32, q) as f64).powi(2))
            .sum::<f64>()
            / out.len() as f64;
        // Oracle: three times the second moment of the 400 base errors (the
        // cross terms cancel over the four sign patterns), which itself must
        // sit near the pmf variance.
        let base = inst.errors().unwrap().iter().map(|&e| (e as f64).powi(2)).sum::<f64>() / 400.0;
        assert!((var / (3.0 * base) - 1.0).abs() < 0.05, "var {var} base {base}");
        let pmf_var = crate::gaussian::RoundedGaussian::new(params.sigma, q).unwrap().variance();
        assert!((base / pmf_var - 1.0).abs() < 0.25, "base {base} pmf {pmf_var}");
    }
}
