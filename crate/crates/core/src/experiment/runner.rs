use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Point, PointPlan, SecretMode, PROTOCOL_TRIALS};
use super::search::{first_success, run_distinguisher};
use crate::distinguish::{theory_samples, theory_samples_pruned, ActiveSamples, DistinguisherKind};
use crate::error::{Error, Result};
use crate::instance::{generate_instance, secret_noise_transform, LweInstance, SecretDistribution};
use crate::params::LweParams;
use crate::reduction::{max_amplified, reduce, sample_amplify, SampleSet};
use crate::rng::{splitmix64, StreamRng};

pub const CSV_HEADER: &str =
    "experiment,point,q,n,alpha,t,b,k,strategy,amplified,distinguisher,d,trial,seed,min_samples,success,wall_time_ms";

/// One CSV row: a distinguisher's outcome on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub point: usize,
    pub q: u32,
    pub n: usize,
    /// Alpha the samples were generated with.
    pub alpha: f64,
    pub t: usize,
    pub b: usize,
    pub k: usize,
    pub strategy: String,
    pub amplified: bool,
    pub distinguisher: DistinguisherKind,
    /// Bound, for the pruned FFT only.
    pub d: Option<u32>,
    pub trial: usize,
    /// Point seed; trial `i` uses stream `i` of it.
    pub seed: u64,
    pub min_samples: Option<usize>,
    pub success: bool,
    pub wall_time_ms: u64,
}

/// Everything measured in one trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    /// Per configured distinguisher, in config order.
    pub min_samples: Vec<Option<usize>>,
    pub wall_time_ms: Vec<u64>,
    /// LLR argmax equals FFT argmax at this trial's own FFT threshold.
    pub boundary_agreement: Option<bool>,
    /// LLR argmax equals FFT argmax on the first `PointResult::agreement_at`
    /// samples.
    pub agreement: Option<bool>,
    /// LLR finds the secret on those samples.
    pub llr_correct: Option<bool>,
    pub reduced_len: usize,
    pub sigma_f: f64,
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub index: usize,
    pub point: Point,
    pub plan: PointPlan,
    pub seed: u64,
    pub trials: Vec<TrialOutcome>,
    /// Prefix length of the agreement check: the median FFT threshold,
    /// rounded up.
    pub agreement_at: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub points: Vec<PointResult>,
}

/// Median over the successful trials of one distinguisher at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub point: usize,
    pub q: u32,
    pub alpha: f64,
    pub t: usize,
    pub distinguisher: DistinguisherKind,
    pub trials: usize,
    pub successes: usize,
    pub median: Option<f64>,
    /// At least the protocol number of successful trials.
    pub meets_floor: bool,
    /// Closed-form estimate at `eps = 0.5` (pruned estimate for the pruned FFT).
    pub theory: f64,
}

impl PointSummary {
    /// `theory / median`.
    pub fn gap(&self) -> Option<f64> {
        self.median.map(|m| self.theory / m)
    }
}

pub fn point_seed(master_seed: u64, point: usize) -> u64 {
    splitmix64(master_seed.wrapping_add(point as u64))
}

pub fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid] as f64
    } else {
        (values[mid - 1] as f64 + values[mid] as f64) / 2.0
    })
}

/// Generates, (amplifies,) reduces and shuffles one trial's sample set.
/// Returns the set and the true values of the `k` guessed positions.
pub fn prepare_trial(
    cfg: &ExperimentConfig,
    point: &Point,
    plan: &PointPlan,
    rng: &mut StreamRng,
) -> Result<(SampleSet, Vec<u16>)> {
    let params = LweParams::new(plan.n, point.q, plan.alpha)?;
    let drawn = cfg.amplify.unwrap_or(plan.initial);
    let inst = draw(params, drawn, cfg.secret, rng)?;
    let mut set = SampleSet::from_instance(&inst);
    if cfg.amplify.is_some() {
        if (plan.initial as u64) > max_amplified(drawn) {
            return Err(Error::Config(format!(
                "{} amplified samples exceed 4 C({drawn}, 3)",
                plan.initial
            )));
        }
        set = sample_amplify(&set, plan.initial, rng)?;
    }
    let mut reduced = reduce(&set, point.t, cfg.b, cfg.strategy, plan.lf2_cap, rng)?;
    if reduced.len() < plan.reduced {
        return Err(Error::Domain(format!(
            "reduction left {} samples, {} planned",
            reduced.len(),
            plan.reduced
        )));
    }
    reduced.shuffle(rng);
    reduced.truncate(plan.reduced);
    let secret = inst.secret.expect("generated instances carry their secret").s;
    let truth = secret[plan.n - cfg.k..].to_vec();
    Ok((reduced, truth))
}

fn draw(params: LweParams, m: usize, mode: SecretMode, rng: &mut StreamRng) -> Result<LweInstance> {
    match mode {
        SecretMode::Noise => generate_instance(params, m, SecretDistribution::Noise, rng),
        SecretMode::Transform => {
            let raw = generate_instance(params, m + params.n, SecretDistribution::Uniform, rng)?;
            Ok(secret_noise_transform(&raw, rng)?.0)
        }
    }
}

pub fn run_trial(
    cfg: &ExperimentConfig,
    point: &Point,
    plan: &PointPlan,
    seed: u64,
    trial: usize,
) -> Result<TrialOutcome> {
    let mut rng = StreamRng::new(seed, trial as u64);
    let (set, truth) = prepare_trial(cfg, point, plan, &mut rng)?;
    let view = ActiveSamples::from_set(&set);
    let sigma_f = set.sigma_current();

    let mut min_samples = Vec::with_capacity(cfg.distinguishers.len());
    let mut wall_time_ms = Vec::with_capacity(cfg.distinguishers.len());
    for &kind in &cfg.distinguishers {
        let start = Instant::now();
        let found = first_success(view.len(), |m| {
            Ok(run_distinguisher(&view.prefix(m), kind, plan.d, sigma_f)?.argmax() == truth)
        })?;
        min_samples.push(found);
        wall_time_ms.push(if cfg.timing {
            start.elapsed().as_millis() as u64
        } else {
            0
        });
    }

    let mut boundary_agreement = None;
    if cfg.agreement {
        if let Some(m) = fft_index(cfg).and_then(|i| min_samples[i]) {
            boundary_agreement = Some(compare_at(&view, m, plan.d, sigma_f, &truth)?.0);
        }
    }

    Ok(TrialOutcome {
        trial,
        min_samples,
        wall_time_ms,
        boundary_agreement,
        agreement: None,
        llr_correct: None,
        reduced_len: set.len(),
        sigma_f,
    })
}

fn fft_index(cfg: &ExperimentConfig) -> Option<usize> {
    cfg.distinguishers.iter().position(|&d| d == DistinguisherKind::Fft)
}

/// `(llr argmax == fft argmax, llr argmax == truth)` on the first `m` samples.
fn compare_at(
    view: &ActiveSamples,
    m: usize,
    d: u32,
    sigma_f: f64,
    truth: &[u16],
) -> Result<(bool, bool)> {
    let prefix = view.prefix(m);
    let fft = run_distinguisher(&prefix, DistinguisherKind::Fft, d, sigma_f)?;
    let llr = run_distinguisher(&prefix, DistinguisherKind::Llr, d, sigma_f)?;
    Ok((llr.argmax() == fft.argmax(), llr.argmax() == truth))
}

/// Re-derives one trial's reduced set and compares LLR with FFT on its first
/// `m` samples.
fn agreement_trial(
    cfg: &ExperimentConfig,
    point: &Point,
    plan: &PointPlan,
    seed: u64,
    outcome: &mut TrialOutcome,
    m: usize,
) -> Result<()> {
    if outcome.reduced_len < m {
        return Ok(());
    }
    let mut rng = StreamRng::new(seed, outcome.trial as u64);
    let (set, truth) = prepare_trial(cfg, point, plan, &mut rng)?;
    let view = ActiveSamples::from_set(&set);
    let (agree, correct) = compare_at(&view, m, plan.d, set.sigma_current(), &truth)?;
    outcome.agreement = Some(agree);
    outcome.llr_correct = Some(correct);
    Ok(())
}

/// All trials of one point, in trial order.
pub fn run_point(cfg: &ExperimentConfig, index: usize) -> Result<PointResult> {
    let point = cfg.points[index];
    let plan = cfg.plan(&point)?;
    let seed = point_seed(cfg.master_seed, index);
    let mut trials = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &point, &plan, seed, trial))
        .collect::<Result<Vec<_>>>()?;
    let mut agreement_at = None;
    if cfg.agreement {
        if let Some(i) = fft_index(cfg) {
            let mut found: Vec<usize> = trials.iter().filter_map(|t| t.min_samples[i]).collect();
            agreement_at = median(&mut found).map(|m| m.ceil() as usize);
        }
    }
    if let Some(m) = agreement_at {
        trials
            .par_iter_mut()
            .map(|t| agreement_trial(cfg, &point, &plan, seed, t, m))
            .collect::<Result<()>>()?;
    }
    Ok(PointResult {
        index,
        point,
        plan,
        seed,
        trials,
        agreement_at,
    })
}

/// Runs every point on a pool of `threads` workers. Output does not depend
/// on the worker count except for wall times.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let points = pool.install(|| {
        (0..cfg.points.len())
            .map(|i| run_point(cfg, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentResult {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        points,
    })
}

impl ExperimentResult {
    pub fn records(&self) -> Vec<ExperimentRecord> {
        let cfg = &self.config;
        let mut out = Vec::new();
        for p in &self.points {
            for trial in &p.trials {
                for (i, &kind) in cfg.distinguishers.iter().enumerate() {
                    out.push(ExperimentRecord {
                        experiment: cfg.name.clone(),
                        point: p.index,
                        q: p.point.q,
                        n: p.plan.n,
                        alpha: p.plan.alpha,
                        t: p.point.t,
                        b: cfg.b,
                        k: cfg.k,
                        strategy: cfg.strategy.to_string(),
                        amplified: cfg.amplify.is_some(),
                        distinguisher: kind,
                        d: (kind == DistinguisherKind::FftPruned).then_some(p.plan.d),
                        trial: trial.trial,
                        seed: p.seed,
                        min_samples: trial.min_samples[i],
                        success: trial.min_samples[i].is_some(),
                        wall_time_ms: trial.wall_time_ms[i],
                    });
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn summaries(&self) -> Result<Vec<PointSummary>> {
        let cfg = &self.config;
        let mut out = Vec::new();
        for p in &self.points {
            let sigma = p.point.alpha * p.point.q as f64;
            for (i, &kind) in cfg.distinguishers.iter().enumerate() {
                let mut found: Vec<usize> = p.trials.iter().filter_map(|t| t.min_samples[i]).collect();
                let successes = found.len();
                let theory = match kind {
                    DistinguisherKind::FftPruned => {
                        theory_samples_pruned(p.point.q, cfg.k, sigma, p.point.t, 0.5, p.plan.d)?
                    }
                    _ => theory_samples(p.point.q, cfg.k, sigma, p.point.t, 0.5)?,
                };
                out.push(PointSummary {
                    point: p.index,
                    q: p.point.q,
                    alpha: p.point.alpha,
                    t: p.point.t,
                    distinguisher: kind,
                    trials: p.trials.len(),
                    successes,
                    median: median(&mut found),
                    meets_floor: successes >= PROTOCOL_TRIALS,
                    theory,
                });
            }
        }
        Ok(out)
    }

    /// `(agreeing, checked)` at each point's median FFT threshold.
    pub fn agreement(&self) -> (usize, usize) {
        self.count(|t| t.agreement)
    }

    /// `(agreeing, checked)` at each trial's own FFT threshold.
    pub fn boundary_agreement(&self) -> (usize, usize) {
        self.count(|t| t.boundary_agreement)
    }

    fn count(&self, f: impl Fn(&TrialOutcome) -> Option<bool>) -> (usize, usize) {
        let checks: Vec<bool> = self
            .points
            .iter()
            .flat_map(|p| p.trials.iter().filter_map(&f))
            .collect();
        (checks.iter().filter(|&&a| a).count(), checks.len())
    }
}

pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.point,
            r.q,
            r.n,
            r.alpha,
            r.t,
            r.b,
            r.k,
            r.strategy,
            r.amplified,
            r.distinguisher,
            r.d.map_or(String::new(), |d| d.to_string()),
            r.trial,
            r.seed,
            r.min_samples.map_or(String::new(), |m| m.to_string()),
            r.success,
            r.wall_time_ms
        );
    }
    out
}

/// Reads CSV written by [`records_to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(Error::parse(1, "missing or unexpected CSV header")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 17 {
            return Err(Error::parse(lineno, format!("expected 17 fields, got {}", f.len())));
        }
        let bad = |what: &str| Error::parse(lineno, format!("bad {what}"));
        let num = |i: usize, what: &str| f[i].parse::<u64>().map_err(|_| bad(what));
        let opt = |i: usize, what: &str| -> Result<Option<u64>> {
            if f[i].is_empty() {
                Ok(None)
            } else {
                num(i, what).map(Some)
            }
        };
        out.push(ExperimentRecord {
            experiment: f[0].to_string(),
            point: num(1, "point")? as usize,
            q: num(2, "q")? as u32,
            n: num(3, "n")? as usize,
            alpha: f[4].parse().map_err(|_| bad("alpha"))?,
            t: num(5, "t")? as usize,
            b: num(6, "b")? as usize,
            k: num(7, "k")? as usize,
            strategy: f[8].to_string(),
            amplified: f[9].parse().map_err(|_| bad("amplified"))?,
            distinguisher: f[10].parse().map_err(|_| bad("distinguisher"))?,
            d: opt(11, "d")?.map(|d| d as u32),
            trial: num(12, "trial")? as usize,
            seed: num(13, "seed")?,
            min_samples: opt(14, "min_samples")?.map(|m| m as usize),
            success: f[15].parse().map_err(|_| bad("success"))?,
            wall_time_ms: num(16, "wall_time_ms")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::BoundPolicy;
    use crate::reduction::Strategy;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            name: "tiny".into(),
            points: vec![
                Point { q: 11, alpha: 0.05, t: 2 },
                Point { q: 13, alpha: 0.05, t: 2 },
            ],
            b: 1,
            k: 1,
            distinguishers: vec![
                DistinguisherKind::Fft,
                DistinguisherKind::FftPruned,
                DistinguisherKind::Llr,
            ],
            samples: Some(400),
            trials: 4,
            protocol_floor: false,
            agreement: true,
            master_seed: 3,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [5, 1, 3]), Some(3.0));
        assert_eq!(median(&mut [4, 1, 3, 2]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn csv_is_reproducible_and_parses_back() {
        let cfg = tiny();
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 1).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let two_workers = run_experiment(&cfg, 2).unwrap();
        assert_eq!(a.to_csv(), two_workers.to_csv());

        let csv = a.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        let records = parse_csv(&csv).unwrap();
        assert_eq!(records, a.records());
        assert_eq!(records.len(), 2 * 4 * 3);
        for r in &records {
            assert_eq!(r.success, r.min_samples.is_some());
            assert_eq!(r.d.is_some(), r.distinguisher == DistinguisherKind::FftPruned);
            assert_eq!(r.n, r.t * r.b + r.k);
        }
        let mut other = cfg.clone();
        other.master_seed = 4;
        assert_ne!(run_experiment(&other, 1).unwrap().to_csv(), csv);
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        assert!(parse_csv("nope\n").is_err());
        let row = format!("{CSV_HEADER}\ne,0,11,3,0.05,2,1,1,LF1,false,FFT,,0,1,5,true\n");
        match parse_csv(&row) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reduced_sets_are_consistent() {
        let mut cfg = tiny();
        cfg.secret = SecretMode::Transform;
        cfg.points.truncate(1);
        for strategy in [Strategy::Lf1, Strategy::Lf2] {
            cfg.strategy = strategy;
            let plan = cfg.plan(&cfg.points[0]).unwrap();
            let (set, truth) =
                prepare_trial(&cfg, &cfg.points[0], &plan, &mut StreamRng::new(1, 2)).unwrap();
            assert_eq!(set.len(), 400);
            assert_eq!(set.offset(), 2);
            assert_eq!(truth.len(), 1);
            assert!(set.samples().iter().all(|s| s.a[..2].iter().all(|&x| x == 0)));
        }
    }

    #[test]
    fn amplified_trials_run() {
        let mut cfg = tiny();
        cfg.points.truncate(1);
        cfg.amplify = Some(20);
        cfg.bound = BoundPolicy::Fixed(3);
        let res = run_experiment(&cfg, 1).unwrap();
        let rec = res.records();
        assert!(rec.iter().all(|r| r.amplified));
        assert!((rec[0].alpha - 0.05 / 3f64.sqrt()).abs() < 1e-15);
        assert!(rec.iter().any(|r| r.success));
        cfg.amplify = Some(5); // 4 C(5, 3) = 40 < 400 + 2 * 5
        assert!(run_experiment(&cfg, 1).is_err());
    }

    #[test]
    fn summaries_use_successful_trials() {
        let res = run_experiment(&tiny(), 1).unwrap();
        let sums = res.summaries().unwrap();
        assert_eq!(sums.len(), 6);
        for s in &sums {
            assert!(!s.meets_floor);
            assert!(s.successes <= s.trials);
            assert_eq!(s.median.is_some(), s.successes > 0);
            assert!(s.theory > 0.0);
        }
        let (agree, checked) = res.agreement();
        assert!(agree <= checked && checked <= 8);
    }
}
