//! How well `ln(q * Pr[e])` is described by a single cosine of period `q`.
//!
//! The fit matches the largest and smallest value of `g`:
//! `model(e) = offset + amplitude * cos(2 pi e / q)`.

use std::f64::consts::TAU;

use crate::error::Result;
use crate::gaussian::RoundedGaussian;

#[derive(Debug, Clone, PartialEq)]
pub struct CosineFit {
    pub q: u32,
    pub sigma_f: f64,
    /// `g(e)` per signed residue `-(q-1)/2..=(q-1)/2`.
    pub g_table: Vec<f64>,
    pub amplitude: f64,
    pub offset: f64,
    pub max_abs_deviation: f64,
}

impl CosineFit {
    pub fn model(&self, e: i64) -> f64 {
        self.offset + self.amplitude * (TAU * e as f64 / self.q as f64).cos()
    }

    pub fn g(&self, e: i64) -> f64 {
        let half = ((self.q - 1) / 2) as i64;
        self.g_table[(e + half) as usize]
    }
}

pub fn cosine_approximation(sigma_f: f64, q: u32) -> Result<CosineFit> {
    let noise = RoundedGaussian::new(sigma_f, q)?;
    let (by_residue, _) = noise.log_likelihood_ratios();
    let half = ((q - 1) / 2) as i64;
    let g_table: Vec<f64> = (-half..=half)
        .map(|e| by_residue[e.rem_euclid(q as i64) as usize])
        .collect();
    let g_max = g_table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g_min = g_table.iter().copied().fold(f64::INFINITY, f64::min);
    let amplitude = (g_max - g_min) / 2.0;
    let offset = (g_max + g_min) / 2.0;
    let mut fit = CosineFit {
        q,
        sigma_f,
        g_table,
        amplitude,
        offset,
        max_abs_deviation: 0.0,
    };
    fit.max_abs_deviation = (-half..=half)
        .map(|e| (fit.g(e) - fit.model(e)).abs())
        .fold(0.0, f64::max);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_after(t: i32) -> f64 {
        8.005 * 2f64.powf(t as f64 / 2.0)
    }

    // From python/oracles/closed_forms.py (mpmath pmf, 60 digits).
    const ORACLE: [(i32, f64); 5] = [
        (10, 0.98979031041139010385),
        (11, 0.28660819317184434273),
        (12, 0.035391265759938994985),
        (13, 0.00061618995896868713951),
        (14, 1.8922221799626864197e-7),
    ];

    #[test]
    fn deviations_match_oracle() {
        for (t, want) in ORACLE {
            let fit = cosine_approximation(sigma_after(t), 1601).unwrap();
            assert!(
                (fit.max_abs_deviation - want).abs() < 1e-9,
                "t = {t}: {} vs {want}",
                fit.max_abs_deviation
            );
        }
    }

    #[test]
    fn improves_with_noise() {
        let d12 = cosine_approximation(sigma_after(12), 1601).unwrap().max_abs_deviation;
        let d13 = cosine_approximation(sigma_after(13), 1601).unwrap().max_abs_deviation;
        assert!(d13 < d12);
    }

    #[test]
    fn fit_touches_extremes() {
        let fit = cosine_approximation(300.0, 1601).unwrap();
        assert!((fit.model(0) - fit.g(0)).abs() < 1e-12);
        let edge = 800;
        // The cosine at the edge is -cos(pi/q), slightly above -1.
        let gap = fit.amplitude * (1.0 - (std::f64::consts::PI / 1601.0).cos());
        assert!((fit.model(edge) - fit.g(edge) - gap).abs() < 1e-9);
        assert!(cosine_approximation(-1.0, 11).is_err());
    }
}
