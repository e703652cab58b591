//! The `bkw` command-line tool.
//!
//! Exit status is 0 on success, 1 when an operation fails (bad parameters,
//! unreadable files, a failed transform) and 2 for usage errors. Errors go to
//! standard error prefixed with `error:`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::distinguish::{
    cosine_approximation, default_bound, pruned_gain, theory_samples, theory_samples_pruned,
    ActiveSamples, DistinguisherKind,
};
use crate::error::{Error, Result};
use crate::experiment::{preset, run_distinguisher, run_experiment, ExperimentConfig, PRESETS};
use crate::instance::{
    generate_instance, read_challenge, read_secret, secret_noise_transform, write_challenge,
    write_secret, LweInstance, SecretDistribution,
};
use crate::params::{to_signed, LweParams};
use crate::reduction::{reduce, sample_amplify, SampleSet, Strategy};
use crate::rng::StreamRng;

#[derive(Debug, Parser)]
#[command(name = "bkw", version, about = "BKW-style LWE solving and sample-complexity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an LWE challenge file.
    Gen(GenArgs),
    /// Apply the secret-noise transformation to a challenge file.
    Transform(TransformArgs),
    /// Apply t plain BKW steps and write the reduced samples.
    Reduce(ReduceArgs),
    /// Guess the unreduced positions of a (reduced) challenge file.
    Solve(SolveArgs),
    /// Run a Monte Carlo experiment and write its CSV.
    Experiment(ExperimentArgs),
    /// Print closed-form sample-complexity estimates.
    Theory(TheoryArgs),
    /// Print the cosine fit of the log-likelihood terms.
    CosineCheck(CosineArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Secret dimension.
    #[arg(long)]
    n: usize,
    /// Odd prime modulus.
    #[arg(long)]
    q: u32,
    /// Relative error size; sigma = alpha * q.
    #[arg(long)]
    alpha: f64,
    /// Number of samples.
    #[arg(long)]
    m: usize,
    /// Secret distribution: uniform or noise.
    #[arg(long, default_value = "uniform")]
    secret_dist: SecretDistribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Challenge file to write.
    #[arg(long)]
    out: PathBuf,
    /// Also write the secret to this sidecar file.
    #[arg(long)]
    secret_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    /// Challenge file to read.
    #[arg(long = "in")]
    input: PathBuf,
    /// Transformed challenge file to write.
    #[arg(long)]
    out: PathBuf,
    /// Secret sidecar of the input, if known.
    #[arg(long)]
    secret: Option<PathBuf>,
    /// Where to write the transformed secret (needs --secret).
    #[arg(long)]
    secret_out: Option<PathBuf>,
    /// Where to write the basis indices used.
    #[arg(long)]
    basis_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of steps.
    #[arg(long)]
    t: usize,
    /// Positions reduced per step.
    #[arg(long)]
    b: usize,
    /// LF1 or LF2.
    #[arg(long, default_value = "LF1")]
    strategy: Strategy,
    /// Cap on LF2 outputs per step.
    #[arg(long)]
    max_outputs: Option<usize>,
    /// Amplify to this many samples from triples before reducing.
    #[arg(long)]
    amplify_to: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reduced challenge file; its alpha is the grown noise sigma_f / q.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of guessed positions (default: trailing positions not
    /// identically zero).
    #[arg(long)]
    k: Option<usize>,
    /// LLR, FFT or FFT_PRUNED.
    #[arg(long, default_value = "FFT")]
    distinguisher: DistinguisherKind,
    /// Bound for the pruned FFT (default ceil(3 sigma_f) capped at (q-1)/2).
    #[arg(long)]
    d: Option<u32>,
    /// Noise deviation for LLR (default alpha * q from the file).
    #[arg(long)]
    sigma_f: Option<f64>,
    /// Secret sidecar to check the guess against.
    #[arg(long)]
    secret: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Built-in configuration.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per point (overrides the config).
    #[arg(long)]
    trials: Option<usize>,
    /// Reduced set size (overrides the config).
    #[arg(long)]
    samples: Option<usize>,
    /// Further key=value overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    k: usize,
    /// Relative error size (sigma = alpha * q).
    #[arg(long, conflicts_with = "sigma", required_unless_present = "sigma")]
    alpha: Option<f64>,
    /// Initial noise deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// BKW steps.
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Also print the pruned estimate with this bound.
    #[arg(long)]
    d: Option<u32>,
}

#[derive(Debug, Args)]
struct CosineArgs {
    #[arg(long)]
    q: u32,
    /// Noise deviation after reduction.
    #[arg(long, conflicts_with_all = ["alpha", "sigma"])]
    sigma_f: Option<f64>,
    /// Initial relative error size; sigma_f = alpha * q * 2^(t/2).
    #[arg(long, conflicts_with = "sigma")]
    alpha: Option<f64>,
    /// Initial noise deviation; sigma_f = sigma * 2^(t/2).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    t: usize,
    /// Write the table as CSV (e,g,model) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the table to standard output.
    #[arg(long)]
    table: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a, out),
        Command::Transform(a) => transform(a, out),
        Command::Reduce(a) => reduce_cmd(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::Theory(a) => theory(a, out),
        Command::CosineCheck(a) => cosine(a, out),
    }
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|e| Error::io("<stdout>", e))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { say($out, format_args!($($arg)*)) };
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let params = LweParams::new(a.n, a.q, a.alpha)?;
    let mut rng = StreamRng::new(a.seed, 0);
    let inst = generate_instance(params, a.m, a.secret_dist, &mut rng)?;
    write_challenge(&inst, &a.out)?;
    if let Some(path) = &a.secret_out {
        write_secret(inst.secret.as_ref().expect("generated secret"), path)?;
    }
    say!(out, "wrote {} samples (n = {}, q = {}) to {}", a.m, a.n, a.q, a.out.display())
}

fn load(path: &PathBuf, secret: Option<&PathBuf>) -> Result<LweInstance> {
    let mut inst = read_challenge(path)?;
    if let Some(sp) = secret {
        let s = read_secret(sp, inst.params.q)?;
        if s.s.len() != inst.params.n {
            return Err(Error::param(format!(
                "secret has {} coordinates, challenge has n = {}",
                s.s.len(),
                inst.params.n
            )));
        }
        inst.secret = Some(s);
    }
    Ok(inst)
}

fn transform(a: TransformArgs, out: &mut dyn Write) -> Result<()> {
    if a.secret_out.is_some() && a.secret.is_none() {
        return Err(Error::param("--secret-out needs --secret"));
    }
    let inst = load(&a.input, a.secret.as_ref())?;
    let mut rng = StreamRng::new(a.seed, 0);
    let (transformed, basis) = secret_noise_transform(&inst, &mut rng)?;
    write_challenge(&transformed, &a.out)?;
    if let (Some(path), Some(secret)) = (&a.secret_out, &transformed.secret) {
        write_secret(secret, path)?;
    }
    if let Some(path) = &a.basis_out {
        let idx: Vec<String> = basis.indices.iter().map(|i| i.to_string()).collect();
        fs::write(path, idx.join(" ") + "\n").map_err(|e| Error::io(path, e))?;
    }
    say!(
        out,
        "wrote {} transformed samples to {}",
        transformed.samples.len(),
        a.out.display()
    )
}

fn reduce_cmd(a: ReduceArgs, out: &mut dyn Write) -> Result<()> {
    let inst = read_challenge(&a.input)?;
    let n = inst.params.n;
    if a.t * a.b >= n {
        return Err(Error::param(format!(
            "t * b = {} leaves no positions of n = {n}",
            a.t * a.b
        )));
    }
    let mut rng = StreamRng::new(a.seed, 0);
    let mut set = SampleSet::from_instance(&inst);
    if let Some(target) = a.amplify_to {
        set = sample_amplify(&set, target, &mut rng)?;
    }
    let reduced = reduce(&set, a.t, a.b, a.strategy, a.max_outputs, &mut rng)?;
    if reduced.is_empty() {
        return Err(Error::Domain("reduction left no samples".into()));
    }
    let sigma_f = reduced.sigma_current();
    let params = LweParams::with_sigma(n, inst.params.q, sigma_f)?;
    let result = LweInstance {
        params,
        samples: reduced.samples().clone(),
        secret: None,
    };
    write_challenge(&result, &a.out)?;
    say!(
        out,
        "{} samples after {} {} steps; {} positions left; sigma_f = {}",
        reduced.len(),
        a.t,
        a.strategy,
        reduced.dim(),
        sigma_f
    )
}

/// Number of leading positions that are zero in every sample.
fn zero_prefix(inst: &LweInstance) -> usize {
    let n = inst.params.n;
    inst.samples
        .iter()
        .map(|s| s.a.iter().position(|&x| x != 0).unwrap_or(n))
        .min()
        .unwrap_or(0)
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let inst = load(&a.input, a.secret.as_ref())?;
    let n = inst.params.n;
    let q = inst.params.q;
    let k = match a.k {
        Some(k) if k == 0 || k > n => {
            return Err(Error::param(format!("k = {k} outside 1..={n}")));
        }
        Some(k) => k,
        None => (n - zero_prefix(&inst)).max(1),
    };
    if (q as u64).pow(k as u32) > 1 << 26 {
        return Err(Error::param(format!("q^k = {q}^{k} hypotheses is too many")));
    }
    let sigma_f = a.sigma_f.unwrap_or(inst.params.sigma);
    let d = match a.d {
        Some(d) => d,
        None => default_bound(sigma_f, q),
    };
    let view = ActiveSamples::new(&inst.samples, n - k, inst.samples.len(), q);
    let table = run_distinguisher(&view, a.distinguisher, d, sigma_f)?;
    let guess: Vec<String> = table.argmax_signed().iter().map(|x| x.to_string()).collect();
    say!(out, "distinguisher: {}", table.kind())?;
    say!(out, "positions: {}..{}", n - k, n)?;
    say!(out, "secret: {}", guess.join(" "))?;
    say!(out, "score: {}", table.best_score())?;
    say!(out, "margin: {}", table.margin())?;
    if table.floored() > 0 {
        say!(out, "floored: {}", table.floored())?;
    }
    if let Some(secret) = &inst.secret {
        let truth = &secret.s[n - k..];
        let truth_signed: Vec<String> = truth.iter().map(|&x| to_signed(x as u32, q).to_string()).collect();
        say!(out, "expected: {}", truth_signed.join(" "))?;
        say!(out, "correct: {}", table.argmax() == truth)?;
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut cfg = ExperimentConfig::default();
            cfg.apply_text(&text)?;
            cfg
        }
        _ => {
            return Err(Error::Config(format!(
                "give --preset (one of {}) or --config",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = a.trials {
        cfg.trials = trials;
    }
    if let Some(samples) = a.samples {
        cfg.samples = Some(samples);
    }
    for kv in &a.set {
        cfg.apply_text(kv)?;
    }
    cfg.validate()?;
    let result = run_experiment(&cfg, a.threads)?;
    result.write_csv(&a.out)?;
    say!(out, "config_hash: {}", result.config_hash)?;
    for s in result.summaries()? {
        let median = s.median.map_or("-".to_string(), |m| m.to_string());
        let gap = s.gap().map_or("-".to_string(), |g| format!("{g:.4}"));
        say!(
            out,
            "point {} q={} alpha={} t={} {}: {}/{} succeeded, median {}, theory {:.1}, gap {}{}",
            s.point,
            s.q,
            s.alpha,
            s.t,
            s.distinguisher,
            s.successes,
            s.trials,
            median,
            s.theory,
            gap,
            if s.meets_floor { "" } else { " (below trial floor)" }
        )?;
    }
    if cfg.agreement {
        let (agree, checked) = result.agreement();
        say!(out, "llr/fft argmax agreement: {agree}/{checked}")?;
    }
    say!(out, "wrote {}", a.out.display())
}

fn theory(a: TheoryArgs, out: &mut dyn Write) -> Result<()> {
    let sigma = match (a.alpha, a.sigma) {
        (Some(alpha), None) => alpha * a.q as f64,
        (None, Some(sigma)) => sigma,
        _ => return Err(Error::param("give exactly one of --alpha and --sigma")),
    };
    let full = theory_samples(a.q, a.k, sigma, a.t, a.eps)?;
    say!(out, "theory_samples: {full:.10e}")?;
    if let Some(d) = a.d {
        let pruned = theory_samples_pruned(a.q, a.k, sigma, a.t, a.eps, d)?;
        say!(out, "theory_samples_pruned: {pruned:.10e}")?;
        say!(out, "pruned_gain: {:.6}", pruned_gain(a.q, a.k, a.eps, d)?)?;
    }
    Ok(())
}

fn cosine(a: CosineArgs, out: &mut dyn Write) -> Result<()> {
    let grow = 2f64.powf(a.t as f64 / 2.0);
    let sigma_f = match (a.sigma_f, a.alpha, a.sigma) {
        (Some(s), None, None) => s,
        (None, Some(alpha), None) => alpha * a.q as f64 * grow,
        (None, None, Some(sigma)) => sigma * grow,
        _ => return Err(Error::param("give one of --sigma-f, --alpha or --sigma")),
    };
    let fit = cosine_approximation(sigma_f, a.q)?;
    say!(out, "q: {}", a.q)?;
    say!(out, "sigma_f: {sigma_f}")?;
    say!(out, "amplitude: {:.12e}", fit.amplitude)?;
    say!(out, "offset: {:.12e}", fit.offset)?;
    say!(out, "max_abs_deviation: {:.12e}", fit.max_abs_deviation)?;
    let half = ((a.q - 1) / 2) as i64;
    let rows = || {
        (-half..=half).map(|e| format!("{e},{:.15e},{:.15e}", fit.g(e), fit.model(e)))
    };
    if a.table {
        say!(out, "e,g,model")?;
        for row in rows() {
            say!(out, "{row}")?;
        }
    }
    if let Some(path) = &a.out {
        let mut text = String::from("e,g,model\n");
        for row in rows() {
            text.push_str(&row);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
