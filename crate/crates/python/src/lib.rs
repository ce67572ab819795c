//! Python bindings for `superstable`.

use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use superstable::boundary::{BoundaryConfiguration, GenerationMode, GrowthFunction, Kernel};
use superstable::bounds::{self, c_delta_estimate, kappa_tilde, Verdict};
use superstable::ensemble::{self, GcmcParams, IntegrationParams, SeriesParams, System};
use superstable::field::{ExternalField, OmegaClass};
use superstable::geometry::SimBox;
use superstable::harness::experiment::{self, RunOptions};
use superstable::harness::ExperimentPlan;
use superstable::potential::{self, EnvelopeSpec, PotentialSpec};

fn py_err(e: superstable::Error) -> PyErr {
    match e {
        superstable::Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for superstable::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn growth(q: f64) -> PyResult<GrowthFunction> {
    if q == 0.0 {
        Ok(GrowthFunction::Zero)
    } else {
        GrowthFunction::power(q).py()
    }
}

/// Radial pair potential.
#[pyclass(name = "Potential", module = "superstable_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn ideal(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: PotentialSpec::ideal(dim).py()? })
    }

    #[staticmethod]
    fn soft_rod(dim: usize, strength: f64, core: f64, core_strength: f64) -> PyResult<Self> {
        Ok(Self { inner: PotentialSpec::soft_rod(dim, strength, core, core_strength).py()? })
    }

    #[staticmethod]
    fn hard_rod(dim: usize, core: f64) -> PyResult<Self> {
        Ok(Self { inner: PotentialSpec::hard_rod(dim, core).py()? })
    }

    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn core_plus_tail(
        dim: usize,
        strength: f64,
        core: f64,
        core_strength: f64,
        tail_start: f64,
        tail_amplitude: f64,
        tail_exponent: f64,
        stability: f64,
    ) -> PyResult<Self> {
        Ok(Self { inner: PotentialSpec::core_plus_tail(dim, strength, core, core_strength, tail_start, tail_amplitude, tail_exponent, stability).py()? })
    }

    #[staticmethod]
    fn default(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: PotentialSpec::default_core_plus_tail(dim).py()? })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn stability(&self) -> f64 {
        self.inner.stability()
    }

    #[getter]
    fn core(&self) -> f64 {
        self.inner.core()
    }

    #[getter]
    fn core_strength(&self) -> f64 {
        self.inner.core_strength()
    }

    fn evaluate(&self, r: f64) -> PyResult<f64> {
        self.inner.evaluate(r).py()
    }

    fn split_signs(&self, r: f64) -> PyResult<(f64, f64)> {
        self.inner.split_signs(r).py()
    }

    fn is_non_negative(&self) -> bool {
        self.inner.is_non_negative()
    }

    fn __repr__(&self) -> String {
        format!("Potential(kind='{}', dim={})", self.inner.kind_name(), self.inner.dim())
    }
}

/// Monotone envelope of |v|.
#[pyclass(name = "Envelope", module = "superstable_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnvelope {
    inner: EnvelopeSpec,
}

#[pymethods]
impl PyEnvelope {
    #[staticmethod]
    fn power_law(dim: usize, plateau: f64, range: f64, amplitude: f64, exponent: f64) -> PyResult<Self> {
        Ok(Self { inner: EnvelopeSpec::power_law(dim, plateau, range, amplitude, exponent).py()? })
    }

    #[staticmethod]
    fn default(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: EnvelopeSpec::default_for_core_plus_tail(dim).py()? })
    }

    #[staticmethod]
    fn compact_rod(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: EnvelopeSpec::compact_rod(dim).py()? })
    }

    #[staticmethod]
    fn shipped() -> PyResult<Vec<(String, PyEnvelope)>> {
        Ok(potential::shipped_envelopes().py()?.into_iter().map(|(n, e)| (n, PyEnvelope { inner: e })).collect())
    }

    fn eta(&self, r: f64) -> f64 {
        self.inner.eta(r)
    }

    /// Tail integral V(r).
    fn big_v(&self, r: f64) -> PyResult<f64> {
        bounds::big_v(&self.inner, r).py()
    }

    /// Tail integral W(r) for g(r) = r^q.
    #[pyo3(signature = (r, q=0.25))]
    fn big_w(&self, r: f64, q: f64) -> PyResult<f64> {
        bounds::big_w(&self.inner, &growth(q)?, r).py()
    }

    fn __repr__(&self) -> String {
        format!("Envelope(dim={}, plateau={}, range={})", self.inner.dim(), self.inner.plateau(), self.inner.range())
    }
}

/// Truncated-series estimate of log Ξ.
#[pyclass(name = "SeriesOutcome", module = "superstable_py", frozen, get_all)]
struct PySeriesOutcome {
    log_xi: f64,
    beta_p: f64,
    stat_error: f64,
    tail_bound: f64,
    coefficients: Vec<f64>,
    increase_n_max: bool,
}

/// Summary of a single grand-canonical chain.
#[pyclass(name = "ChainOutcome", module = "superstable_py", frozen, get_all)]
struct PyChainOutcome {
    mean_n: f64,
    mean_n_error: f64,
    var_n: f64,
    mean_u: f64,
    acceptance: Vec<f64>,
    step: f64,
    drift: f64,
    warnings: Vec<String>,
}

/// Pressure from thermodynamic integration over the fugacity.
#[pyclass(name = "PressureOutcome", module = "superstable_py", frozen, get_all)]
struct PyPressureOutcome {
    beta_p: f64,
    error: f64,
    log_xi: f64,
    grid: Vec<f64>,
    mean_n: Vec<f64>,
    warnings: Vec<String>,
}

/// Convergence table of a sweep.
#[pyclass(name = "ExperimentSummary", module = "superstable_py", frozen, get_all)]
struct PyExperimentSummary {
    verdict: String,
    /// (L, βp free, err, βp ω, err, Δp, combined err) per row.
    rows: Vec<(f64, f64, f64, f64, f64, f64, f64)>,
    bulk_density: f64,
    rho: f64,
    outside_theorem: bool,
}

struct Setup {
    bx: SimBox,
    omega: BoundaryConfiguration,
    field_bound: f64,
}

fn setup(pot: &PyPotential, env: &PyEnvelope, half_size: f64, delta: f64, omega_rho: Option<f64>, omega_q: f64, seed: u64) -> PyResult<Setup> {
    let bx = SimBox::new(pot.inner.dim(), half_size, delta).py()?;
    let Some(rho) = omega_rho else {
        return Ok(Setup { bx, omega: BoundaryConfiguration::empty(bx.dim()), field_bound: 0.0 });
    };
    let g = growth(omega_q)?;
    let class = OmegaClass { mode: GenerationMode::Saturated, rho, growth: g.clone(), delta: 1.0, tail_tol: 1e-3, max_radius: 5e3 };
    let (omega, _) = class.generate_for_box(&bx, &env.inner, seed).py()?;
    let c_delta = c_delta_estimate(&env.inner, class.delta, 200, seed).py()?.value;
    let kappa = kappa_tilde(c_delta, rho, &env.inner, &g).py()?;
    Ok(Setup { bx, omega, field_bound: kappa * (1.0 + g.eval(half_size)) })
}

/// log Ξ by the truncated series with Monte Carlo coefficients.
#[pyfunction]
#[pyo3(signature = (potential, envelope, half_size, lambda_, beta=1.0, n_max=40, mc_samples=20000, seed=1, omega_rho=None, omega_q=0.0, delta=0.5))]
#[allow(clippy::too_many_arguments)]
fn xi_truncated(
    py: Python<'_>,
    potential: &PyPotential,
    envelope: &PyEnvelope,
    half_size: f64,
    lambda_: f64,
    beta: f64,
    n_max: usize,
    mc_samples: usize,
    seed: u64,
    omega_rho: Option<f64>,
    omega_q: f64,
    delta: f64,
) -> PyResult<PySeriesOutcome> {
    let s = setup(potential, envelope, half_size, delta, omega_rho, omega_q, seed)?;
    py.detach(|| {
        let field = ExternalField::build(&s.bx, &s.omega, &potential.inner, &envelope.inner, Kernel::V);
        let sys = System::new(s.bx, &potential.inner, &envelope.inner, &field, beta)?;
        let params = SeriesParams { n_max, mc_samples, seed, stability: potential.inner.stability(), field_bound: s.field_bound, tail_tol: 1e-6 };
        let r = ensemble::xi_truncated(&sys, lambda_, &params)?;
        Ok(PySeriesOutcome {
            log_xi: r.log_xi,
            beta_p: r.log_xi / s.bx.volume(),
            stat_error: r.stat_error,
            tail_bound: r.tail_bound,
            coefficients: r.coefficients,
            increase_n_max: r.increase_n_max,
        })
    })
    .py()
}

/// One grand-canonical Monte Carlo chain at fugacity `lambda_`.
#[pyfunction]
#[pyo3(signature = (potential, envelope, half_size, lambda_, beta=1.0, moves=200000, burn_in=20000, seed=1, omega_rho=None, omega_q=0.0, delta=0.5))]
#[allow(clippy::too_many_arguments)]
fn gcmc(
    py: Python<'_>,
    potential: &PyPotential,
    envelope: &PyEnvelope,
    half_size: f64,
    lambda_: f64,
    beta: f64,
    moves: usize,
    burn_in: usize,
    seed: u64,
    omega_rho: Option<f64>,
    omega_q: f64,
    delta: f64,
) -> PyResult<PyChainOutcome> {
    let s = setup(potential, envelope, half_size, delta, omega_rho, omega_q, seed)?;
    py.detach(|| {
        let field = ExternalField::build(&s.bx, &s.omega, &potential.inner, &envelope.inner, Kernel::V);
        let sys = System::new(s.bx, &potential.inner, &envelope.inner, &field, beta)?;
        let r = ensemble::gcmc_run(&sys, &GcmcParams::new(lambda_, burn_in, moves, seed))?;
        Ok(PyChainOutcome {
            mean_n: r.mean_n,
            mean_n_error: r.mean_n_error,
            var_n: r.var_n,
            mean_u: r.mean_u,
            acceptance: r.acceptance.to_vec(),
            step: r.step,
            drift: r.drift,
            warnings: r.warnings,
        })
    })
    .py()
}

/// βp by integrating ⟨N⟩ over a logarithmic fugacity grid.
#[pyfunction]
#[pyo3(signature = (potential, envelope, half_size, lambda_, beta=1.0, moves=200000, seed=1, omega_rho=None, omega_q=0.0, delta=0.5))]
#[allow(clippy::too_many_arguments)]
fn pressure(
    py: Python<'_>,
    potential: &PyPotential,
    envelope: &PyEnvelope,
    half_size: f64,
    lambda_: f64,
    beta: f64,
    moves: usize,
    seed: u64,
    omega_rho: Option<f64>,
    omega_q: f64,
    delta: f64,
) -> PyResult<PyPressureOutcome> {
    let s = setup(potential, envelope, half_size, delta, omega_rho, omega_q, seed)?;
    py.detach(|| {
        let field = ExternalField::build(&s.bx, &s.omega, &potential.inner, &envelope.inner, Kernel::V);
        let sys = System::new(s.bx, &potential.inner, &envelope.inner, &field, beta)?;
        let r = ensemble::pressure_by_integration(&sys, &IntegrationParams::new(lambda_, moves, seed))?;
        Ok(PyPressureOutcome { beta_p: r.beta_p, error: r.error, log_xi: r.log_xi, grid: r.grid, mean_n: r.mean_n, warnings: r.warnings })
    })
    .py()
}

/// Exact log Ξ of hard rods on a segment of length `length`.
#[pyfunction]
fn tonks_log_xi(length: f64, core: f64, lambda_: f64) -> PyResult<f64> {
    ensemble::tonks_log_xi(length, core, lambda_).py()
}

/// (Ξ, βp) of hard rods on a segment.
#[pyfunction]
fn tonks_reference(length: f64, core: f64, lambda_: f64) -> PyResult<(f64, f64)> {
    ensemble::tonks_reference(length, core, lambda_).py()
}

/// Power-law gate: q < min(1, p)/2.
#[pyfunction]
fn gate(p: f64, q: f64) -> PyResult<bool> {
    bounds::power_law_gate(p, q).py()
}

type ProbeRows = Vec<(String, Vec<f64>, Vec<f64>, String)>;
type AuditRows = (bool, Vec<(String, bool, String)>);

fn verdict_name(v: Verdict) -> String {
    v.name().to_string()
}

/// Growth-balance probes for g(r) = r^q: [(name, abscissae, values, verdict)].
#[pyfunction]
#[pyo3(signature = (envelope, q=0.0))]
fn probe(envelope: &PyEnvelope, q: f64) -> PyResult<ProbeRows> {
    let (a, b) = bounds::probe_growth_balance(&growth(q)?, &envelope.inner, &experiment::probe_abscissae()).py()?;
    Ok([a, b].into_iter().map(|s| (s.name, s.abscissae, s.values, verdict_name(s.verdict))).collect())
}

/// Sampling audit of the potential assumptions: (passed, [(check, passed, detail)]).
#[pyfunction]
#[pyo3(signature = (potential, envelope, n_trials=1000, seed=1))]
fn audit(potential: &PyPotential, envelope: &PyEnvelope, n_trials: usize, seed: u64) -> PyResult<AuditRows> {
    let r = potential::audit_assumptions(&potential.inner, &envelope.inner, n_trials, seed).py()?;
    Ok((r.passed(), r.checks.into_iter().map(|c| (c.name, c.passed, c.detail)).collect()))
}

/// Experiment plan read from TOML.
#[pyclass(name = "Plan", module = "superstable_py", frozen, skip_from_py_object)]
struct PyPlan {
    inner: ExperimentPlan,
    base: Option<PathBuf>,
}

#[pymethods]
impl PyPlan {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, base) = ExperimentPlan::load(&path).py()?;
        Ok(Self { inner, base })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ExperimentPlan::parse(text).py()?, base: None })
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml().py()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn sizes(&self) -> Vec<f64> {
        self.inner.sizes().to_vec()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate(self.base.as_deref()).py()
    }

    /// Runs the sweep; artifacts go under `out` when given.
    #[pyo3(signature = (out=None, contrast=false))]
    fn run(&self, py: Python<'_>, out: Option<PathBuf>, contrast: bool) -> PyResult<PyExperimentSummary> {
        let opts = RunOptions { out, contrast };
        let base: Option<&Path> = self.base.as_deref();
        let r = py.detach(|| experiment::run_experiment(&self.inner, base, &opts)).py()?;
        Ok(PyExperimentSummary {
            verdict: r.table.verdict.name().to_string(),
            rows: r
                .table
                .rows
                .iter()
                .map(|w| (w.half_size, w.free, w.free_error, w.omega, w.omega_error, w.delta_p, w.combined_error))
                .collect(),
            bulk_density: r.bulk_density,
            rho: r.rho,
            outside_theorem: r.table.outside_theorem,
        })
    }
}

/// Adds every class and function of the extension to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyEnvelope>()?;
    m.add_class::<PySeriesOutcome>()?;
    m.add_class::<PyChainOutcome>()?;
    m.add_class::<PyPressureOutcome>()?;
    m.add_class::<PyExperimentSummary>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(xi_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(gcmc, m)?)?;
    m.add_function(wrap_pyfunction!(pressure, m)?)?;
    m.add_function(wrap_pyfunction!(tonks_log_xi, m)?)?;
    m.add_function(wrap_pyfunction!(tonks_reference, m)?)?;
    m.add_function(wrap_pyfunction!(gate, m)?)?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[pymodule]
fn superstable_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
