//! Python bindings for the `bkw` crate.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bkw::distinguish::{self as dist, ActiveSamples, DistinguisherKind, ScoreTable};
use bkw::experiment::{self as exp, ExperimentConfig};
use bkw::instance::{self as inst, LweInstance, SecretDistribution};
use bkw::reduction::{self as red, Strategy};
use bkw::{LweParams, StreamRng};

fn py_err(e: bkw::Error) -> PyErr {
    match e {
        bkw::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for bkw::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parse<T: std::str::FromStr<Err = bkw::Error>>(s: &str) -> PyResult<T> {
    s.parse().py()
}

/// Outcome of one distinguisher run.
#[pyclass(module = "pybkw", get_all, frozen)]
struct Guess {
    /// Guessed values in `(-q/2, q/2]`.
    secret: Vec<i64>,
    score: f64,
    margin: f64,
    distinguisher: String,
}

#[pymethods]
impl Guess {
    fn __repr__(&self) -> String {
        format!(
            "Guess(secret={:?}, score={}, margin={}, distinguisher={})",
            self.secret, self.score, self.margin, self.distinguisher
        )
    }
}

fn guess(table: &ScoreTable) -> Guess {
    Guess {
        secret: table.argmax_signed(),
        score: table.best_score(),
        margin: table.margin(),
        distinguisher: table.kind().to_string(),
    }
}

fn solve_view(view: &ActiveSamples, kind: &str, d: Option<u32>, sigma_f: f64) -> PyResult<Guess> {
    let kind: DistinguisherKind = parse(kind)?;
    let d = d.unwrap_or_else(|| dist::default_bound(sigma_f, view.q()));
    Ok(guess(&exp::run_distinguisher(view, kind, d, sigma_f).py()?))
}

/// An LWE instance: samples plus, when known, the secret.
#[pyclass(module = "pybkw", skip_from_py_object)]
#[derive(Clone)]
struct Instance {
    inner: LweInstance,
}

#[pymethods]
impl Instance {
    #[staticmethod]
    #[pyo3(signature = (n, q, alpha, m, secret = "uniform", seed = 0))]
    fn generate(n: usize, q: u32, alpha: f64, m: usize, secret: &str, seed: u64) -> PyResult<Self> {
        let params = LweParams::new(n, q, alpha).py()?;
        let dist: SecretDistribution = parse(secret)?;
        let inner = inst::generate_instance(params, m, dist, &mut StreamRng::new(seed, 0)).py()?;
        Ok(Self { inner })
    }

    /// Reads a challenge file, attaching the secret sidecar if given.
    #[staticmethod]
    #[pyo3(signature = (path, secret = None))]
    fn read(path: &str, secret: Option<&str>) -> PyResult<Self> {
        let mut inner = inst::read_challenge(path).py()?;
        if let Some(sp) = secret {
            inner.secret = Some(inst::read_secret(sp, inner.params.q).py()?);
        }
        Ok(Self { inner })
    }

    #[pyo3(signature = (path, secret = None))]
    fn write(&self, path: &str, secret: Option<&str>) -> PyResult<()> {
        inst::write_challenge(&self.inner, path).py()?;
        if let Some(sp) = secret {
            let s = self
                .inner
                .secret
                .as_ref()
                .ok_or_else(|| PyValueError::new_err("instance has no secret"))?;
            inst::write_secret(s, sp).py()?;
        }
        Ok(())
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.params.n
    }

    #[getter]
    fn q(&self) -> u32 {
        self.inner.params.q
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.params.alpha
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.params.sigma
    }

    /// Signed secret, or None.
    #[getter]
    fn secret(&self) -> Option<Vec<i64>> {
        let q = self.inner.params.q;
        self.inner.secret.as_ref().map(|s| s.signed(q))
    }

    /// Signed errors, when the secret is known.
    fn errors(&self) -> Option<Vec<i64>> {
        self.inner.errors()
    }

    /// Rows as `(a, b)` with `a` a list.
    fn samples(&self) -> Vec<(Vec<u16>, u16)> {
        self.inner.samples.iter().map(|s| (s.a.to_vec(), s.b)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    /// Secret-noise transformation; returns the new instance and the basis
    /// indices used.
    #[pyo3(signature = (seed = 0))]
    fn transform(&self, seed: u64) -> PyResult<(Instance, Vec<usize>)> {
        let (out, basis) = inst::secret_noise_transform(&self.inner, &mut StreamRng::new(seed, 0)).py()?;
        Ok((Instance { inner: out }, basis.indices))
    }

    fn sample_set(&self) -> SampleSet {
        SampleSet {
            inner: red::SampleSet::from_instance(&self.inner),
        }
    }

    /// Runs a distinguisher on the last `k` positions.
    #[pyo3(signature = (k, distinguisher = "FFT", d = None, sigma_f = None))]
    fn solve(&self, k: usize, distinguisher: &str, d: Option<u32>, sigma_f: Option<f64>) -> PyResult<Guess> {
        let n = self.inner.params.n;
        if k == 0 || k > n {
            return Err(PyValueError::new_err(format!("k = {k} outside 1..={n}")));
        }
        let view = ActiveSamples::new(&self.inner.samples, n - k, self.inner.samples.len(), self.inner.params.q);
        solve_view(&view, distinguisher, d, sigma_f.unwrap_or(self.inner.params.sigma))
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!("Instance(n={}, q={}, alpha={}, m={})", p.n, p.q, p.alpha, self.inner.samples.len())
    }
}

/// Samples in reduction, with the noise bookkeeping.
#[pyclass(module = "pybkw", skip_from_py_object)]
#[derive(Clone)]
struct SampleSet {
    inner: red::SampleSet,
}

#[pymethods]
impl SampleSet {
    /// Applies `t` steps of width `b`.
    #[pyo3(signature = (t, b, strategy = "LF1", max_outputs = None, seed = 0))]
    fn reduce(&self, t: usize, b: usize, strategy: &str, max_outputs: Option<usize>, seed: u64) -> PyResult<Self> {
        let strategy: Strategy = parse(strategy)?;
        let inner = red::reduce(&self.inner, t, b, strategy, max_outputs, &mut StreamRng::new(seed, 0)).py()?;
        Ok(Self { inner })
    }

    /// Combines random triples into `target` samples.
    #[pyo3(signature = (target, seed = 0))]
    fn amplify(&self, target: usize, seed: u64) -> PyResult<Self> {
        let inner = red::sample_amplify(&self.inner, target, &mut StreamRng::new(seed, 0)).py()?;
        Ok(Self { inner })
    }

    /// Runs a distinguisher on the remaining positions, optionally on the
    /// first `m` samples only.
    #[pyo3(signature = (distinguisher = "FFT", d = None, sigma_f = None, m = None))]
    fn solve(&self, distinguisher: &str, d: Option<u32>, sigma_f: Option<f64>, m: Option<usize>) -> PyResult<Guess> {
        let view = ActiveSamples::from_set(&self.inner);
        let m = m.unwrap_or(view.len());
        if m == 0 || m > view.len() {
            return Err(PyValueError::new_err(format!("m = {m} outside 1..={}", view.len())));
        }
        solve_view(&view.prefix(m), distinguisher, d, sigma_f.unwrap_or(self.inner.sigma_current()))
    }

    #[getter]
    fn sigma_f(&self) -> f64 {
        self.inner.sigma_current()
    }

    /// Remaining positions.
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn offset(&self) -> usize {
        self.inner.offset()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps_taken()
    }

    #[getter]
    fn amplified(&self) -> bool {
        self.inner.is_amplified()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SampleSet(len={}, dim={}, steps={}, sigma_f={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.steps_taken(),
            self.inner.sigma_current()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (q, k, sigma, t, eps = 0.5))]
fn theory_samples(q: u32, k: usize, sigma: f64, t: usize, eps: f64) -> PyResult<f64> {
    dist::theory_samples(q, k, sigma, t, eps).py()
}

#[pyfunction]
#[pyo3(signature = (q, k, sigma, t, d, eps = 0.5))]
fn theory_samples_pruned(q: u32, k: usize, sigma: f64, t: usize, d: u32, eps: f64) -> PyResult<f64> {
    dist::theory_samples_pruned(q, k, sigma, t, eps, d).py()
}

#[pyfunction]
#[pyo3(signature = (q, k, d, eps = 0.5))]
fn pruned_gain(q: u32, k: usize, d: u32, eps: f64) -> PyResult<f64> {
    dist::pruned_gain(q, k, eps, d).py()
}

/// Probabilities of the rounded Gaussian, indexed by residue.
#[pyfunction]
fn rounded_gaussian_pmf(sigma: f64, q: u32) -> PyResult<Vec<f64>> {
    Ok(bkw::RoundedGaussian::new(sigma, q).py()?.table().to_vec())
}

#[pyfunction]
fn noise_after_steps(sigma: f64, steps: usize, amplified: bool) -> f64 {
    bkw::noise_after_steps(sigma, steps, amplified)
}

/// Cosine fit of the log-likelihood terms as a dict.
#[pyfunction]
fn cosine_approximation<'py>(py: Python<'py>, sigma_f: f64, q: u32) -> PyResult<Bound<'py, PyDict>> {
    let fit = dist::cosine_approximation(sigma_f, q).py()?;
    let half = ((q - 1) / 2) as i64;
    let out = PyDict::new(py);
    out.set_item("amplitude", fit.amplitude)?;
    out.set_item("offset", fit.offset)?;
    out.set_item("max_abs_deviation", fit.max_abs_deviation)?;
    out.set_item("e", (-half..=half).collect::<Vec<_>>())?;
    out.set_item("g", (-half..=half).map(|e| fit.g(e)).collect::<Vec<_>>())?;
    out.set_item("model", (-half..=half).map(|e| fit.model(e)).collect::<Vec<_>>())?;
    Ok(out)
}

/// Runs an experiment from a preset name or `key = value` text and returns
/// a dict with the CSV text, the config hash and the agreement counts.
#[pyfunction]
#[pyo3(signature = (preset = None, config = None, seed = None, trials = None, samples = None, threads = 1))]
fn run_experiment<'py>(
    py: Python<'py>,
    preset: Option<&str>,
    config: Option<&str>,
    seed: Option<u64>,
    trials: Option<usize>,
    samples: Option<usize>,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = match (preset, config) {
        (Some(name), None) => exp::preset(name).py()?,
        (None, Some(text)) => {
            let mut cfg = ExperimentConfig::default();
            cfg.apply_text(text).py()?;
            cfg
        }
        _ => return Err(PyValueError::new_err("give exactly one of preset and config")),
    };
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = trials {
        cfg.trials = trials;
    }
    if let Some(samples) = samples {
        cfg.samples = Some(samples);
    }
    let res = py.detach(|| exp::run_experiment(&cfg, threads)).py()?;
    let out = PyDict::new(py);
    out.set_item("csv", res.to_csv())?;
    out.set_item("config_hash", res.config_hash.clone())?;
    out.set_item("agreement", res.agreement())?;
    Ok(out)
}

#[pymodule]
fn pybkw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<SampleSet>()?;
    m.add_class::<Guess>()?;
    m.add_function(wrap_pyfunction!(theory_samples, m)?)?;
    m.add_function(wrap_pyfunction!(theory_samples_pruned, m)?)?;
    m.add_function(wrap_pyfunction!(pruned_gain, m)?)?;
    m.add_function(wrap_pyfunction!(rounded_gaussian_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(noise_after_steps, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_approximation, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("CSV_HEADER", exp::CSV_HEADER)?;
    Ok(())
}
