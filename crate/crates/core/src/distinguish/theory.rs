//! Closed-form sample-complexity estimates for the FFT distinguisher.
//!
//! `N(eps) = 8 ln(W^k / eps) * c^(-2^(t+1))` with
//! `c = (q/pi) sin(pi/q) exp(-2 pi^2 sigma^2 / q^2)`, where `W = q` for the
//! full search and `W = 2d + 1` when each guessed coordinate is bounded by
//! `d`. `sigma` is the noise before reduction; the exponent carries the
//! growth over `t` steps. Evaluated in log space since `c^(-2^14)` is far
//! beyond `f64` range for large `t` and small `c`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn log_base(q: u32, sigma: f64) -> f64 {
    let qf = q as f64;
    (qf / PI * (PI / qf).sin()).ln() - 2.0 * PI * PI * sigma * sigma / (qf * qf)
}

fn estimate(q: u32, k: usize, sigma: f64, t: usize, eps: f64, width: f64) -> Result<f64> {
    if q < 3 || k == 0 {
        return Err(Error::Domain(format!("need q >= 3 and k >= 1, got q = {q}, k = {k}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let log_hyp = k as f64 * width.ln();
    if eps.is_nan() || eps <= 0.0 || eps.ln() > log_hyp {
        return Err(Error::Domain(format!(
            "eps must lie in (0, {width}^{k}], got {eps}"
        )));
    }
    let numerator = log_hyp - eps.ln();
    if numerator == 0.0 {
        return Ok(0.0);
    }
    // Beyond f64 range this saturates to infinity; `theory_log_samples`
    // keeps the finite logarithm.
    Ok(((8.0 * numerator).ln() - 2f64.powi(t as i32 + 1) * log_base(q, sigma)).exp())
}

/// Samples needed to guess the `k` positions over all of Z_q^k with error
/// probability about `eps`.
pub fn theory_samples(q: u32, k: usize, sigma: f64, t: usize, eps: f64) -> Result<f64> {
    estimate(q, k, sigma, t, eps, q as f64)
}

/// Natural log of [`theory_samples`], finite for any `t`.
pub fn theory_log_samples(q: u32, k: usize, sigma: f64, t: usize, eps: f64) -> Result<f64> {
    let n = estimate(q, k, sigma, t, eps, q as f64)?;
    if n.is_finite() {
        return Ok(n.ln());
    }
    let numerator = k as f64 * (q as f64).ln() - eps.ln();
    Ok((8.0 * numerator).ln() - 2f64.powi(t as i32 + 1) * log_base(q, sigma))
}

/// As [`theory_samples`] with every guessed coordinate in `[-d, d]`.
pub fn theory_samples_pruned(q: u32, k: usize, sigma: f64, t: usize, eps: f64, d: u32) -> Result<f64> {
    if d == 0 || d > (q - 1) / 2 {
        return Err(Error::Domain(format!("bound d = {d} outside 1..=(q-1)/2")));
    }
    estimate(q, k, sigma, t, eps, (2 * d + 1) as f64)
}

/// `theory_samples / theory_samples_pruned`, independent of `sigma` and `t`.
pub fn pruned_gain(q: u32, k: usize, eps: f64, d: u32) -> Result<f64> {
    let full = theory_samples(q, k, 1.0, 0, eps)?;
    let pruned = theory_samples_pruned(q, k, 1.0, 0, eps, d)?;
    Ok(full / pruned)
}

/// `ceil(3 sigma)`, capped at `(q-1)/2`.
pub fn default_bound(sigma: f64, q: u32) -> u32 {
    ((3.0 * sigma).ceil().max(1.0) as u32).min((q - 1) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // Reference values from python/oracles/closed_forms.py (mpmath, 60 digits).
    #[test]
    fn matches_arbitrary_precision_oracle() {
        let full = theory_samples(1601, 2, 8.005, 13, 0.5).unwrap();
        assert!(rel(full, 405444.5407156112807640956) < 1e-9, "{full}");
        let pruned = theory_samples_pruned(1601, 2, 8.005, 13, 0.5, 25).unwrap();
        assert!(rel(pruned, 224551.8699803324053796118) < 1e-9, "{pruned}");

        let sigma = 0.0896 * 101.0;
        let full = theory_samples(101, 2, sigma, 5, 0.5).unwrap();
        assert!(rel(full, 2036424.501893232742098993) < 1e-9, "{full}");
        let pruned = theory_samples_pruned(101, 2, sigma, 5, 0.5, 28).unwrap();
        assert!(rel(pruned, 1801630.536302951513587692) < 1e-9, "{pruned}");
    }

    #[test]
    fn alpha_series_values() {
        // q = 1601, t = 13, sigma = alpha * q.
        let expected = [
            (0.005, 405444.54),
            (0.0052, 784255.44),
            (0.0054, 1556753.80),
            (0.0056, 3171163.61),
            (0.0058, 6629086.42),
            (0.006, 14220832.75),
        ];
        for (alpha, want) in expected {
            let got = theory_samples(1601, 2, alpha * 1601.0, 13, 0.5).unwrap();
            assert!(rel(got, want) < 1e-7, "alpha = {alpha}: {got}");
        }
    }

    #[test]
    fn pruned_gain_at_the_main_point() {
        let g = pruned_gain(1601, 2, 0.5, 25).unwrap();
        assert!((g - 1.805571874).abs() < 1e-8, "{g}");
        assert_eq!(format!("{g:.4}"), "1.8056");
        assert_eq!(default_bound(8.005, 1601), 25);
    }

    #[test]
    fn q_series_gains() {
        let qs = [101u32, 201, 401, 801, 1601, 3201];
        let ds = [28u32, 28, 27, 27, 27, 27];
        let want = ["1.1303", "1.2871", "1.4563", "1.6152", "1.7743", "1.9334"];
        for ((q, d), w) in qs.iter().zip(ds).zip(want) {
            let g = pruned_gain(*q, 2, 0.5, d).unwrap();
            assert_eq!(format!("{g:.4}"), w, "q = {q}");
        }
    }

    #[test]
    fn edge_cases() {
        assert_eq!(theory_samples(101, 2, 9.0, 5, 101.0 * 101.0).unwrap(), 0.0);
        assert!(theory_samples(101, 2, 9.0, 5, 0.0).is_err());
        assert!(theory_samples(101, 2, 9.0, 5, 101.0 * 101.0 * 1.01).is_err());
        assert!(theory_samples(101, 2, -1.0, 5, 0.5).is_err());
        let full = theory_samples(101, 2, 9.0, 5, 0.5).unwrap();
        let widest = theory_samples_pruned(101, 2, 9.0, 5, 0.5, 50).unwrap();
        assert_eq!(full, widest);
        assert!(theory_samples_pruned(101, 2, 9.0, 5, 0.5, 51).is_err());
        // Large t: the value saturates, its logarithm does not.
        assert_eq!(theory_samples(1601, 2, 8.005, 20, 0.5).unwrap(), f64::INFINITY);
        let ln = theory_log_samples(1601, 2, 8.005, 20, 0.5).unwrap();
        assert!(ln.is_finite() && ln > 709.0);
        let ln13 = theory_log_samples(1601, 2, 8.005, 13, 0.5).unwrap();
        assert!((ln13 - 405444.5407156112807640956f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_noise_and_steps() {
        let a = theory_samples(1601, 2, 8.0, 13, 0.5).unwrap();
        let b = theory_samples(1601, 2, 8.5, 13, 0.5).unwrap();
        let c = theory_samples(1601, 2, 8.0, 14, 0.5).unwrap();
        assert!(a < b && a < c);
    }
}
