//! Secret-noise transformation.
//!
//! Pick `n` samples whose `a` vectors form an invertible matrix `A0` (rows
//! `a_i`), so `b0 = A0 s + e0`. Every other sample `(a, b)` is rewritten with
//! `u = A0^{-T} a` as `(-u, b - <u, b0>)`, whose secret is `e0`. The original
//! secret is `A0^{-1} (b0 - e0)`.

use rand::seq::index;

use super::{LweInstance, Secret, SecretDistribution};
use crate::error::{Error, Result};
use crate::params::{dot_mod, inv_mod, mul_mod, neg_mod, sub_mod};
use crate::rng::StreamRng;
use crate::samples::Samples;

/// Sliding windows tried before falling back to random subsets.
const WINDOW_ATTEMPTS: usize = 32;
const RANDOM_ATTEMPTS: usize = 32;

/// What is needed to map a recovered transformed secret back to the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisInfo {
    /// Indices of the samples forming `A0`, in row order.
    pub indices: Vec<usize>,
    /// `A0^{-1}`, row-major `n x n`.
    pub a0_inv: Vec<u16>,
    pub b0: Vec<u16>,
    pub q: u32,
}

impl BasisInfo {
    /// `s = A0^{-1} (b0 - e0)`.
    pub fn recover_secret(&self, transformed: &[u16]) -> Vec<u16> {
        let n = self.b0.len();
        assert_eq!(transformed.len(), n, "secret length mismatch");
        let q = self.q;
        let diff: Vec<u16> = self
            .b0
            .iter()
            .zip(transformed)
            .map(|(&b, &e)| sub_mod(b as u32, e as u32, q) as u16)
            .collect();
        (0..n)
            .map(|r| dot_mod(&self.a0_inv[r * n..(r + 1) * n], &diff, q) as u16)
            .collect()
    }
}

/// Gauss-Jordan inverse over Z_q of a row-major `n x n` matrix.
pub(crate) fn invert_mod(matrix: &[u16], n: usize, q: u32) -> Option<Vec<u16>> {
    let w = 2 * n;
    let mut m = vec![0u32; n * w];
    for r in 0..n {
        for c in 0..n {
            m[r * w + c] = matrix[r * n + c] as u32;
        }
        m[r * w + n + r] = 1;
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r * w + col] != 0)?;
        if pivot != col {
            for c in 0..w {
                m.swap(pivot * w + c, col * w + c);
            }
        }
        let inv = inv_mod(m[col * w + col], q)?;
        for c in 0..w {
            m[col * w + c] = mul_mod(m[col * w + c], inv, q);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * w + col];
            if f == 0 {
                continue;
            }
            for c in 0..w {
                let v = mul_mod(f, m[col * w + c], q);
                m[r * w + c] = sub_mod(m[r * w + c], v, q);
            }
        }
    }
    Some(
        (0..n)
            .flat_map(|r| (n..w).map(move |c| (r, c)))
            .map(|(r, c)| m[r * w + c] as u16)
            .collect(),
    )
}

fn try_indices(samples: &Samples, indices: &[usize], q: u32) -> Option<Vec<u16>> {
    let n = samples.dim();
    let mut a0 = Vec::with_capacity(n * n);
    for &i in indices {
        a0.extend_from_slice(samples.get(i).a);
    }
    invert_mod(&a0, n, q)
}

fn select_basis(inst: &LweInstance, rng: &mut StreamRng) -> Result<(Vec<usize>, Vec<u16>)> {
    let n = inst.params.n;
    let m = inst.samples.len();
    let q = inst.params.q;
    if m < n {
        return Err(Error::param(format!(
            "transform needs at least n = {n} samples, got {m}"
        )));
    }
    let windows = (m - n + 1).min(WINDOW_ATTEMPTS);
    for start in 0..windows {
        let idx: Vec<usize> = (start..start + n).collect();
        if let Some(inv) = try_indices(&inst.samples, &idx, q) {
            return Ok((idx, inv));
        }
    }
    let mut attempts = windows;
    if m > n {
        for _ in 0..RANDOM_ATTEMPTS {
            attempts += 1;
            let mut idx = index::sample(rng, m, n).into_vec();
            idx.sort_unstable();
            if let Some(inv) = try_indices(&inst.samples, &idx, q) {
                return Ok((idx, inv));
            }
        }
    }
    Err(Error::Singular { n, attempts })
}

/// Rewrites `inst` so that its secret is the error vector of `n` selected
/// samples. The transformed instance holds the remaining `m - n` samples; its
/// secret is filled in when the original secret is known.
pub fn secret_noise_transform(
    inst: &LweInstance,
    rng: &mut StreamRng,
) -> Result<(LweInstance, BasisInfo)> {
    let n = inst.params.n;
    let q = inst.params.q;
    let (indices, a0_inv) = select_basis(inst, rng)?;
    let b0: Vec<u16> = indices.iter().map(|&i| inst.samples.get(i).b).collect();

    let mut chosen = vec![false; inst.samples.len()];
    for &i in &indices {
        chosen[i] = true;
    }

    let mut out = Samples::with_capacity(n, inst.samples.len() - n);
    let mut u = vec![0u16; n];
    for (j, smp) in inst.samples.iter().enumerate() {
        if chosen[j] {
            continue;
        }
        // u_c = sum_r a[r] * inv[r][c]
        for (c, slot) in u.iter_mut().enumerate() {
            let mut acc = 0u64;
            for r in 0..n {
                acc += smp.a[r] as u64 * a0_inv[r * n + c] as u64;
            }
            *slot = (acc % q as u64) as u16;
        }
        let shift = dot_mod(&u, &b0, q);
        let b = sub_mod(smp.b as u32, shift, q) as u16;
        for x in u.iter_mut() {
            *x = neg_mod(*x as u32, q) as u16;
        }
        out.push(&u, b);
    }

    let secret = inst.secret.as_ref().map(|secret| {
        // e0 = b0 - A0 s
        let e0 = indices
            .iter()
            .zip(&b0)
            .map(|(&i, &b)| sub_mod(b as u32, dot_mod(inst.samples.get(i).a, &secret.s, q), q) as u16)
            .collect();
        Secret {
            s: e0,
            distribution: SecretDistribution::Noise,
        }
    });

    let basis = BasisInfo {
        indices,
        a0_inv,
        b0,
        q,
    };
    Ok((
        LweInstance {
            params: inst.params,
            samples: out,
            secret,
        },
        basis,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::RoundedGaussian;
    use crate::instance::generate_instance;
    use crate::params::{add_mod, LweParams};
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn mat_vec(matrix: &[u16], v: &[u16], q: u32) -> Vec<u16> {
        let n = v.len();
        (0..n)
            .map(|r| {
                (0..n).fold(0u32, |acc, c| {
                    add_mod(acc, mul_mod(matrix[r * n + c] as u32, v[c] as u32, q), q)
                }) as u16
            })
            .collect()
    }

    #[test]
    fn inverse_is_inverse() {
        let q = 101;
        let n = 5;
        let mut rng = StreamRng::new(4, 4);
        let params = LweParams::new(n, q, 0.01).unwrap();
        let inst = generate_instance(params, n, SecretDistribution::Uniform, &mut rng).unwrap();
        let mat: Vec<u16> = inst.samples.iter().flat_map(|s| s.a.to_vec()).collect();
        let inv = invert_mod(&mat, n, q).unwrap();
        for col in 0..n {
            let e: Vec<u16> = (0..n).map(|r| inv[r * n + col]).collect();
            let prod = mat_vec(&mat, &e, q);
            for (r, &v) in prod.iter().enumerate() {
                assert_eq!(v, (r == col) as u16);
            }
        }
    }

    #[test]
    fn singular_matrix_detected() {
        assert!(invert_mod(&[1, 2, 2, 4], 2, 5).is_none());
        assert!(invert_mod(&[0, 0, 0, 0], 2, 5).is_none());
    }

    #[test]
    fn noiseless_transform_has_zero_secret() {
        let params = LweParams::with_sigma(6, 101, 1e-6).unwrap();
        let inst =
            generate_instance(params, 40, SecretDistribution::Uniform, &mut StreamRng::new(8, 0))
                .unwrap();
        let (t, basis) = secret_noise_transform(&inst, &mut StreamRng::new(8, 1)).unwrap();
        assert_eq!(t.samples.len(), 34);
        let secret = t.secret.as_ref().unwrap();
        assert!(secret.s.iter().all(|&x| x == 0));
        assert_eq!(basis.recover_secret(&secret.s), inst.secret.unwrap().s);
        assert!(t.errors().unwrap().iter().all(|&e| e == 0));
    }

    #[test]
    fn recovers_original_secret_and_keeps_errors() {
        let params = LweParams::new(10, 1601, 0.005).unwrap();
        let inst = generate_instance(
            params,
            200,
            SecretDistribution::Uniform,
            &mut StreamRng::new(21, 0),
        )
        .unwrap();
        let (t, basis) = secret_noise_transform(&inst, &mut StreamRng::new(21, 1)).unwrap();
        let e0 = &t.secret.as_ref().unwrap().s;
        assert_eq!(&basis.recover_secret(e0), &inst.secret.as_ref().unwrap().s);

        // Errors of the surviving samples are carried over unchanged.
        let before = inst.errors().unwrap();
        let after = t.errors().unwrap();
        let survivors: Vec<i64> = before
            .iter()
            .enumerate()
            .filter(|(i, _)| !basis.indices.contains(i))
            .map(|(_, &e)| e)
            .collect();
        assert_eq!(after, survivors);
    }

    #[test]
    fn singular_instance_errors() {
        // Every a vector is a multiple of (1, 1): no invertible 2x2 submatrix.
        let params = LweParams::new(2, 5, 0.1).unwrap();
        let mut samples = Samples::new(2);
        for k in 0..10u16 {
            samples.push(&[k % 5, k % 5], 0);
        }
        let inst = LweInstance {
            params,
            samples,
            secret: None,
        };
        assert!(matches!(
            secret_noise_transform(&inst, &mut StreamRng::new(0, 0)),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn transformed_secret_follows_noise() {
        let (q, alpha) = (1601u32, 0.005);
        let params = LweParams::new(25, q, alpha).unwrap();
        let rg = RoundedGaussian::new(params.sigma, q).unwrap();
        let mut counts = vec![0u64; q as usize];
        for trial in 0..200 {
            let mut rng = StreamRng::new(99, trial);
            let inst =
                generate_instance(params, 30, SecretDistribution::Uniform, &mut rng).unwrap();
            let (t, _) = secret_noise_transform(&inst, &mut rng).unwrap();
            for &x in &t.secret.unwrap().s {
                counts[x as usize] += 1;
            }
        }
        let total = counts.iter().sum::<u64>() as f64;
        let (mut stat, mut dof, mut po, mut pe) = (0.0, 0.0, 0.0, 0.0);
        for (r, &c) in counts.iter().enumerate() {
            let e = rg.pmf(r as u32) * total;
            if e < 5.0 {
                po += c as f64;
                pe += e;
            } else {
                stat += (c as f64 - e).powi(2) / e;
                dof += 1.0;
            }
        }
        stat += (po - pe).powi(2) / pe;
        let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
        assert!(p > 0.001, "p = {p}");
    }
}
