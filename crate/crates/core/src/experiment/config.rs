use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::distinguish::{default_bound, theory_samples, DistinguisherKind};
use crate::error::{Error, Result};
use crate::params::check_modulus;
use crate::reduction::{category_count, Strategy};

/// Fewest trials a reported point may rest on.
pub const PROTOCOL_TRIALS: usize = 30;

/// One `(q, alpha, t)` grid point; `n = t * b + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub q: u32,
    pub alpha: f64,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecretMode {
    /// Draw the secret from the error distribution directly.
    Noise,
    /// Uniform secret followed by the secret-noise transformation.
    Transform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lf2Sizing {
    /// `3 (q^b - 1) / 2` samples in every generation.
    SizePreserving,
    /// Every generation as large as the final set.
    TargetAtEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundPolicy {
    /// `ceil(3 * alpha * q)` from the point's nominal alpha.
    Auto,
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub points: Vec<Point>,
    pub b: usize,
    pub k: usize,
    pub strategy: Strategy,
    pub lf2_sizing: Lf2Sizing,
    /// Initial sample count when amplifying from triples; `alpha` is then
    /// divided by `sqrt(3)` so that the final noise matches.
    pub amplify: Option<usize>,
    pub distinguishers: Vec<DistinguisherKind>,
    pub bound: BoundPolicy,
    /// Size of the reduced set the search runs on; `None` picks
    /// `theory_samples / 3` per point.
    pub samples: Option<usize>,
    pub secret: SecretMode,
    pub trials: usize,
    pub master_seed: u64,
    /// Check LLR against FFT argmax at the FFT threshold.
    pub agreement: bool,
    /// Record wall times (makes the CSV non-reproducible).
    pub timing: bool,
    /// Enforce at least [`PROTOCOL_TRIALS`] trials.
    pub protocol_floor: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            points: vec![Point {
                q: 101,
                alpha: 0.0896,
                t: 5,
            }],
            b: 2,
            k: 2,
            strategy: Strategy::Lf1,
            lf2_sizing: Lf2Sizing::TargetAtEnd,
            amplify: None,
            distinguishers: vec![DistinguisherKind::Fft, DistinguisherKind::FftPruned],
            bound: BoundPolicy::Auto,
            samples: None,
            secret: SecretMode::Noise,
            trials: PROTOCOL_TRIALS,
            master_seed: 1,
            agreement: false,
            timing: false,
            protocol_floor: true,
        }
    }
}

/// Per-point quantities derived from the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPlan {
    pub n: usize,
    /// Alpha used to generate samples.
    pub alpha: f64,
    pub d: u32,
    /// Samples drawn (or amplified to) before reduction.
    pub initial: usize,
    /// Size the reduced set is cut to.
    pub reduced: usize,
    pub lf2_cap: Option<usize>,
}

impl ExperimentConfig {
    pub fn dim(&self, p: &Point) -> usize {
        p.t * self.b + self.k
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.points.is_empty() {
            return bad("no points".into());
        }
        if self.b == 0 || self.k == 0 {
            return bad("b and k must be positive".into());
        }
        if self.distinguishers.is_empty() {
            return bad("no distinguishers".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.protocol_floor && self.trials < PROTOCOL_TRIALS {
            return bad(format!(
                "trials = {} is below the {PROTOCOL_TRIALS}-trial floor (set protocol_floor = false to allow)",
                self.trials
            ));
        }
        for p in &self.points {
            check_modulus(p.q).map_err(|e| Error::Config(e.to_string()))?;
            if !(p.alpha > 0.0 && p.alpha < 1.0) {
                return bad(format!("alpha = {} outside (0, 1)", p.alpha));
            }
            if (p.q as u64).pow(self.k as u32) > 1 << 26 {
                return bad(format!("q^k = {}^{} hypotheses is too many", p.q, self.k));
            }
            if let BoundPolicy::Fixed(d) = self.bound {
                if d == 0 || d > (p.q - 1) / 2 {
                    return bad(format!("d = {d} outside 1..=(q-1)/2 for q = {}", p.q));
                }
            }
        }
        if let Some(m0) = self.amplify {
            if m0 < 3 {
                return bad("amplification needs at least 3 initial samples".into());
            }
            if self.strategy != Strategy::Lf1 {
                return bad("amplification is only combined with LF1".into());
            }
        }
        if self.agreement && !self.distinguishers.contains(&DistinguisherKind::Fft) {
            return bad("agreement check needs FFT among the distinguishers".into());
        }
        Ok(())
    }

    pub fn plan(&self, p: &Point) -> Result<PointPlan> {
        let n = self.dim(p);
        let sigma = p.alpha * p.q as f64;
        let d = match self.bound {
            BoundPolicy::Auto => default_bound(sigma, p.q),
            BoundPolicy::Fixed(d) => d,
        };
        let alpha = match self.amplify {
            Some(_) => p.alpha / 3f64.sqrt(),
            None => p.alpha,
        };
        let reduced = match self.samples {
            Some(m) => m,
            None => {
                let est = theory_samples(p.q, self.k, sigma, p.t, 0.5)?;
                (est / 3.0).ceil().max(64.0) as usize
            }
        };
        let categories = category_count(p.q, self.b) as usize;
        let (initial, lf2_cap) = match (self.strategy, self.lf2_sizing) {
            (Strategy::Lf1, _) => (reduced + p.t * categories, None),
            (Strategy::Lf2, Lf2Sizing::SizePreserving) => (3 * categories, Some(3 * categories)),
            (Strategy::Lf2, Lf2Sizing::TargetAtEnd) => (reduced, Some(reduced)),
        };
        let reduced = match (self.strategy, self.lf2_sizing) {
            (Strategy::Lf2, Lf2Sizing::SizePreserving) => 3 * categories,
            _ => reduced,
        };
        Ok(PointPlan {
            n,
            alpha,
            d,
            initial,
            reduced,
            lf2_cap,
        })
    }

    /// Canonical `key = value` text; parsing it gives back the same config.
    pub fn to_text(&self) -> String {
        let join = |f: &dyn Fn(&Point) -> String| {
            self.points.iter().map(f).collect::<Vec<_>>().join(",")
        };
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("experiment", self.name.clone());
        put("q", join(&|p| p.q.to_string()));
        put("alpha", join(&|p| p.alpha.to_string()));
        put("t", join(&|p| p.t.to_string()));
        put("b", self.b.to_string());
        put("k", self.k.to_string());
        put("strategy", self.strategy.to_string());
        put("lf2_sizing", self.lf2_sizing.to_string());
        put("amplify", self.amplify.unwrap_or(0).to_string());
        put(
            "distinguishers",
            self.distinguishers
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        put(
            "d",
            match self.bound {
                BoundPolicy::Auto => "auto".into(),
                BoundPolicy::Fixed(d) => d.to_string(),
            },
        );
        put(
            "samples",
            self.samples.map_or("auto".into(), |m| m.to_string()),
        );
        put("secret", self.secret.to_string());
        put("trials", self.trials.to_string());
        put("seed", self.master_seed.to_string());
        put("agreement", self.agreement.to_string());
        put("timing", self.timing.to_string());
        put("protocol_floor", self.protocol_floor.to_string());
        out
    }

    /// SHA-256 of [`Self::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_text().as_bytes()))
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped; unknown keys are errors.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut qs = None;
        let mut alphas = None;
        let mut ts = None;
        let mut n = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let at = |e: Error| Error::parse(idx + 1, format!("{key}: {e}"));
            match key {
                "q" => qs = Some(list::<u32>(value).map_err(at)?),
                "alpha" => alphas = Some(list::<f64>(value).map_err(at)?),
                "t" => ts = Some(list::<usize>(value).map_err(at)?),
                "n" => n = Some(scalar::<usize>(value).map_err(at)?),
                _ => self.set(key, value).map_err(at)?,
            }
        }
        if qs.is_some() || alphas.is_some() || ts.is_some() {
            let old = &self.points;
            let qs = qs.unwrap_or_else(|| old.iter().map(|p| p.q).collect());
            let alphas = alphas.unwrap_or_else(|| old.iter().map(|p| p.alpha).collect());
            let ts = ts.unwrap_or_else(|| old.iter().map(|p| p.t).collect());
            self.points = zip_points(&qs, &alphas, &ts)?;
        }
        if let Some(n) = n {
            for p in &self.points {
                if self.dim(p) != n {
                    return Err(Error::Config(format!(
                        "n = {n} but t * b + k = {} at q = {}",
                        self.dim(p),
                        p.q
                    )));
                }
            }
        }
        Ok(())
    }

    /// Sets a single non-grid key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" | "name" => self.name = value.to_string(),
            "b" => self.b = scalar(value)?,
            "k" => self.k = scalar(value)?,
            "strategy" => self.strategy = value.parse()?,
            "lf2_sizing" => self.lf2_sizing = value.parse()?,
            "amplify" => {
                let m: usize = scalar(value)?;
                self.amplify = (m > 0).then_some(m);
            }
            "distinguishers" | "distinguisher" => self.distinguishers = list(value)?,
            "d" => {
                self.bound = if value.eq_ignore_ascii_case("auto") {
                    BoundPolicy::Auto
                } else {
                    BoundPolicy::Fixed(scalar(value)?)
                }
            }
            "samples" => {
                self.samples = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(scalar(value)?)
                }
            }
            "secret" => self.secret = value.parse()?,
            "trials" => self.trials = scalar(value)?,
            "seed" | "master_seed" => self.master_seed = scalar(value)?,
            "agreement" => self.agreement = scalar(value)?,
            "timing" => self.timing = scalar(value)?,
            "protocol_floor" => self.protocol_floor = scalar(value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn scalar<T: FromStr>(v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e: T::Err| Error::Config(format!("bad value {v:?}: {e}")))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',').map(scalar).collect()
}

/// Pairs up grid lists; a list of length one is repeated.
fn zip_points(qs: &[u32], alphas: &[f64], ts: &[usize]) -> Result<Vec<Point>> {
    let len = qs.len().max(alphas.len()).max(ts.len());
    let pick = |n: usize, what: &str| -> Result<()> {
        if n == 1 || n == len {
            Ok(())
        } else {
            Err(Error::Config(format!("{what} has {n} entries, expected 1 or {len}")))
        }
    };
    pick(qs.len(), "q")?;
    pick(alphas.len(), "alpha")?;
    pick(ts.len(), "t")?;
    let at = |v: usize, i: usize| if v == 1 { 0 } else { i };
    Ok((0..len)
        .map(|i| Point {
            q: qs[at(qs.len(), i)],
            alpha: alphas[at(alphas.len(), i)],
            t: ts[at(ts.len(), i)],
        })
        .collect())
}

impl fmt::Display for SecretMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecretMode::Noise => "noise",
            SecretMode::Transform => "transform",
        })
    }
}

impl FromStr for SecretMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noise" => Ok(SecretMode::Noise),
            "transform" | "uniform" => Ok(SecretMode::Transform),
            other => Err(Error::Config(format!("unknown secret mode {other:?}"))),
        }
    }
}

impl fmt::Display for Lf2Sizing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lf2Sizing::SizePreserving => "size-preserving",
            Lf2Sizing::TargetAtEnd => "target-at-end",
        })
    }
}

impl FromStr for Lf2Sizing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "size-preserving" => Ok(Lf2Sizing::SizePreserving),
            "target-at-end" => Ok(Lf2Sizing::TargetAtEnd),
            other => Err(Error::Config(format!("unknown LF2 sizing {other:?}"))),
        }
    }
}

// Nearest primes to 201, 801 and 3201; the modulus must be prime.
const Q_SERIES: [u32; 6] = [101, 199, 401, 797, 1601, 3203];
const Q_SERIES_ALPHA: [f64; 6] = [0.0896, 0.0448, 0.0224, 0.0112, 0.0056, 0.0028];
const Q_SERIES_T: [usize; 6] = [5, 7, 9, 11, 13, 15];
const ALPHA_SERIES: [f64; 6] = [0.005, 0.0052, 0.0054, 0.0056, 0.0058, 0.006];

pub const PRESETS: [&str; 8] = [
    "v-a-quick",
    "v-b-quick",
    "v-c-quick",
    "v-d-quick",
    "v-a",
    "v-b",
    "v-c",
    "v-d",
];

/// Built-in configurations. The `-quick` ones run at `q = 101`; the others
/// use the full `q = 1601` grids and take hours.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    use DistinguisherKind::{Fft, FftPruned};
    let desk = Point {
        q: 101,
        alpha: 0.0896,
        t: 5,
    };
    let alpha_grid: Vec<Point> = ALPHA_SERIES
        .iter()
        .map(|&alpha| Point { q: 1601, alpha, t: 13 })
        .collect();
    let q_grid: Vec<Point> = (0..6)
        .map(|i| Point {
            q: Q_SERIES[i],
            alpha: Q_SERIES_ALPHA[i],
            t: Q_SERIES_T[i],
        })
        .collect();
    let base = ExperimentConfig {
        name: name.to_string(),
        ..ExperimentConfig::default()
    };
    let cfg = match name {
        "v-a-quick" => ExperimentConfig {
            points: vec![desk],
            samples: Some(600_000),
            agreement: true,
            ..base
        },
        "v-b-quick" => ExperimentConfig {
            points: q_grid[..2].to_vec(),
            ..base
        },
        "v-c-quick" => ExperimentConfig {
            points: vec![desk],
            strategy: Strategy::Lf2,
            lf2_sizing: Lf2Sizing::TargetAtEnd,
            distinguishers: vec![FftPruned],
            samples: Some(600_000),
            ..base
        },
        "v-d-quick" => ExperimentConfig {
            points: vec![desk],
            amplify: Some(1600),
            distinguishers: vec![FftPruned],
            samples: Some(600_000),
            ..base
        },
        "v-a" => ExperimentConfig {
            points: alpha_grid,
            distinguishers: vec![Fft, FftPruned],
            ..base
        },
        "v-b" => ExperimentConfig {
            points: q_grid,
            ..base
        },
        "v-c" => ExperimentConfig {
            points: alpha_grid,
            strategy: Strategy::Lf2,
            distinguishers: vec![FftPruned],
            ..base
        },
        "v-d" => ExperimentConfig {
            points: alpha_grid,
            amplify: Some(1600),
            distinguishers: vec![FftPruned],
            ..base
        },
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?} (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let back = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
            assert_eq!(back, cfg, "{name}");
            assert_eq!(back.hash(), cfg.hash());
        }
    }

    #[test]
    fn parses_lists_and_broadcasts() {
        let cfg = ExperimentConfig::from_text(
            "# q-series\nq = 101, 199\nalpha = 0.0896,0.0448\nt = 5,7\ntrials = 40\nd = 12\nstrategy = lf2\n",
        )
        .unwrap();
        assert_eq!(cfg.points.len(), 2);
        assert_eq!(cfg.points[1], Point { q: 199, alpha: 0.0448, t: 7 });
        assert!(ExperimentConfig::from_text("q = 201").is_err());
        assert_eq!(cfg.trials, 40);
        assert_eq!(cfg.bound, BoundPolicy::Fixed(12));
        assert_eq!(cfg.strategy, Strategy::Lf2);

        let cfg = ExperimentConfig::from_text("q = 1601\nalpha = 0.005,0.006\nt = 13\n").unwrap();
        assert_eq!(cfg.points.len(), 2);
        assert!(cfg.points.iter().all(|p| p.q == 1601 && p.t == 13));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_text("bogus = 1").is_err());
        assert!(ExperimentConfig::from_text("trials = 5").is_err());
        assert!(ExperimentConfig::from_text("trials = 5\nprotocol_floor = false").is_ok());
        assert!(ExperimentConfig::from_text("q = 100").is_err());
        assert!(ExperimentConfig::from_text("q = 101,201,401\nalpha = 0.1,0.2").is_err());
        assert!(ExperimentConfig::from_text("n = 13").is_err());
        assert!(ExperimentConfig::from_text("n = 12").is_ok());
        assert!(ExperimentConfig::from_text("d = 60").is_err());
        assert!(ExperimentConfig::from_text("no equals sign").is_err());
        match ExperimentConfig::from_text("b = 2\nk = x") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plans() {
        let cfg = preset("v-a-quick").unwrap();
        let plan = cfg.plan(&cfg.points[0]).unwrap();
        assert_eq!(plan.n, 12);
        assert_eq!(plan.d, 28);
        assert_eq!(plan.initial, 600_000 + 5 * 5100);
        assert_eq!(plan.reduced, 600_000);

        let amp = preset("v-d-quick").unwrap();
        let plan = amp.plan(&amp.points[0]).unwrap();
        assert!((plan.alpha * 3f64.sqrt() - 0.0896).abs() < 1e-15);
        assert_eq!(plan.d, 28);

        let mut lf2 = preset("v-c-quick").unwrap();
        assert_eq!(lf2.plan(&lf2.points[0]).unwrap().lf2_cap, Some(600_000));
        lf2.lf2_sizing = Lf2Sizing::SizePreserving;
        let plan = lf2.plan(&lf2.points[0]).unwrap();
        assert_eq!((plan.initial, plan.reduced, plan.lf2_cap), (15_300, 15_300, Some(15_300)));

        let full = preset("v-a").unwrap();
        assert_eq!(full.plan(&full.points[0]).unwrap().n, 28);
        assert_eq!(full.plan(&full.points[0]).unwrap().d, 25);
    }
}
