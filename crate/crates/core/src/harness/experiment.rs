//! The convergence sweep: free and ω pressures along a box series, with a
//! bounds report and probe values per box.

use super::config::{BoundsSettings, DensitySpec, ExperimentPlan};
use super::{derive_seed, CsvDoc};
use crate::boundary::{audit_admissible, redelta_bound, BoundaryConfiguration, GrowthFunction, Kernel};
use crate::bounds::{
    attractive_field_check, c_delta_estimate, kappa_tilde, probe_growth_balance, probe_margin_decay, proof_quantities, sk_analytic, sup_estimates,
    FieldBoundCheck, Margin, ProbeSeries, ProofQuantities, TrendSk,
};
use crate::ensemble::series::poisson_tail;
use crate::ensemble::{fmt17, pressure_by_integration, xi_truncated, IntegrationParams, IntegrationResult, Method, PressureEstimate, SeriesParams, System};
use crate::error::{Error, Result};
use crate::field::{ExternalField, OmegaClass};
use crate::geometry::SimBox;
use crate::potential::{audit_assumptions, EnvelopeSpec, PotentialSpec};
use crate::rng::GENERATOR;
use std::path::{Path, PathBuf};

/// Δp may exceed this multiple of the combined error only within the relative tolerance.
pub const ERROR_FACTOR: f64 = 2.0;
/// Relative tolerance on the final Δp, in units of βp^∅.
pub const RELATIVE_TOLERANCE: f64 = 0.02;
/// Number of trailing rows over which Δp must be non-increasing.
pub const WINDOW: usize = 3;
/// Flag stamped on every output of a plan that fails the power-law gate.
pub const OUTSIDE_THEOREM: &str = "outside-theorem";

const LABEL_OMEGA: u64 = 1;
const LABEL_BOUNDS: u64 = 2;
const LABEL_SERIES: u64 = 3;
const LABEL_AUDIT: u64 = 4;

/// Verdict of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableVerdict {
    Converging,
    NotConverging,
    Inconclusive,
}

impl TableVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Converging => "converging",
            Self::NotConverging => "not-converging",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// One box of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub half_size: f64,
    pub free: f64,
    pub free_error: f64,
    pub omega: f64,
    pub omega_error: f64,
    pub delta_p: f64,
    pub combined_error: f64,
    pub flags: Vec<String>,
}

impl ConvergenceRow {
    pub fn new(half_size: f64, free: (f64, f64), omega: (f64, f64), flags: Vec<String>) -> Self {
        Self {
            half_size,
            free: free.0,
            free_error: free.1,
            omega: omega.0,
            omega_error: omega.1,
            delta_p: (free.0 - omega.0).abs(),
            combined_error: free.1.hypot(omega.1),
            flags,
        }
    }
}

/// Δp non-increasing over the last [`WINDOW`] rows up to the combined errors
/// and final Δp ≤ max(2·err, 0.02·βp^∅); fewer rows are inconclusive.
pub fn convergence_verdict(rows: &[ConvergenceRow]) -> TableVerdict {
    if rows.len() < WINDOW {
        return TableVerdict::Inconclusive;
    }
    let tail = &rows[rows.len() - WINDOW..];
    let monotone = tail.windows(2).all(|w| w[1].delta_p <= w[0].delta_p + w[0].combined_error.hypot(w[1].combined_error));
    let last = &tail[WINDOW - 1];
    let small = last.delta_p <= (ERROR_FACTOR * last.combined_error).max(RELATIVE_TOLERANCE * last.free.abs());
    if monotone && small {
        TableVerdict::Converging
    } else {
        TableVerdict::NotConverging
    }
}

/// Rows ordered by L with their verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub verdict: TableVerdict,
    pub outside_theorem: bool,
}

impl ConvergenceTable {
    pub const HEADER: [&'static str; 8] = ["L", "beta_p_free", "error_free", "beta_p_omega", "error_omega", "delta_p", "combined_error", "flags"];

    pub fn new(mut rows: Vec<ConvergenceRow>, outside_theorem: bool) -> Self {
        rows.sort_by(|a, b| a.half_size.total_cmp(&b.half_size));
        let verdict = convergence_verdict(&rows);
        Self { rows, verdict, outside_theorem }
    }

    pub fn to_csv(&self) -> CsvDoc {
        let mut doc = CsvDoc::new(&Self::HEADER);
        doc.meta("verdict", self.verdict.name());
        doc.meta(
            "verdict_rule",
            format!("delta_p non-increasing over last {WINDOW} rows within combined error; final delta_p <= max({ERROR_FACTOR}*combined_error, {RELATIVE_TOLERANCE}*beta_p_free)"),
        );
        if self.outside_theorem {
            doc.meta("coverage", OUTSIDE_THEOREM);
        }
        for r in &self.rows {
            doc.push(vec![
                fmt17(r.half_size),
                fmt17(r.free),
                fmt17(r.free_error),
                fmt17(r.omega),
                fmt17(r.omega_error),
                fmt17(r.delta_p),
                fmt17(r.combined_error),
                r.flags.join(";"),
            ]);
        }
        doc
    }
}

/// Bounds for one box and one ω: the attractive-field check against
/// κ̃(1 + g(L)), the suprema S and K, their order relations and the
/// S·K/|Λ| trend point with its analytic bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub half_size: f64,
    pub rho: f64,
    pub omega_delta: f64,
    pub omega_points: usize,
    pub r_cut: f64,
    pub c_delta: f64,
    pub kappa: f64,
    pub g_at_l: f64,
    pub field_check: FieldBoundCheck,
    pub s: f64,
    pub k: f64,
    pub proof: ProofQuantities,
    pub s_ge_k: bool,
    pub k_le_bound: bool,
    pub sk_over_volume: f64,
    pub sk_bound: f64,
}

impl BoundsReport {
    pub const HEADER: [&'static str; 19] = [
        "L",
        "rho",
        "omega_delta",
        "omega_points",
        "r_cut",
        "c_delta",
        "kappa_tilde",
        "g_L",
        "field_samples",
        "field_violations",
        "field_max_ratio",
        "S",
        "K",
        "E_Lambda",
        "G_Lambda",
        "S_ge_K",
        "K_le_kappa_bound",
        "SK_over_volume",
        "SK_analytic",
    ];

    pub fn passed(&self) -> bool {
        self.field_check.passed() && self.s_ge_k && self.k_le_bound
    }

    pub fn record(&self) -> Vec<String> {
        let verdict = |b: bool| if b { "pass" } else { "fail" }.to_string();
        let (e, g) = match self.proof {
            ProofQuantities::FreeBoundShortcut => ("free-bound-shortcut".to_string(), "free-bound-shortcut".to_string()),
            ProofQuantities::Regular { e_lambda, g_lambda, .. } => (fmt17(e_lambda), fmt17(g_lambda)),
        };
        vec![
            fmt17(self.half_size),
            fmt17(self.rho),
            fmt17(self.omega_delta),
            self.omega_points.to_string(),
            fmt17(self.r_cut),
            fmt17(self.c_delta),
            fmt17(self.kappa),
            fmt17(self.g_at_l),
            self.field_check.samples.to_string(),
            self.field_check.violations.to_string(),
            fmt17(self.field_check.max_ratio),
            fmt17(self.s),
            fmt17(self.k),
            e,
            g,
            verdict(self.s_ge_k),
            verdict(self.k_le_bound),
            fmt17(self.sk_over_volume),
            fmt17(self.sk_bound),
        ]
    }

    pub fn to_csv(&self) -> CsvDoc {
        let mut doc = CsvDoc::new(&Self::HEADER);
        doc.push(self.record());
        doc
    }
}

/// Computes the [`BoundsReport`] of `omega` on `bx`, with C_δ estimated on the ω grid.
#[allow(clippy::too_many_arguments)]
pub fn bounds_report(
    bx: &SimBox,
    pot: &PotentialSpec,
    env: &EnvelopeSpec,
    class: &OmegaClass,
    omega: &BoundaryConfiguration,
    r_cut: f64,
    settings: &BoundsSettings,
    seed: u64,
) -> Result<BoundsReport> {
    let g = &class.growth;
    let c_delta = c_delta_estimate(env, class.delta, settings.c_delta_cubes, seed)?.value;
    let kappa = kappa_tilde(c_delta, class.rho, env, g)?;
    let field = ExternalField::exact(bx, omega, pot, env, Kernel::VMinus);
    let f = |x: &crate::geometry::Point| field.at(x);
    let field_check = attractive_field_check(bx, &f, kappa, g, settings.field_samples, seed);
    let sups = sup_estimates(bx, &f, pot.core(), settings.samples_per_cube, settings.grid_resolution, seed)?;
    let (s, k) = (sups.s, sups.k);
    let vol = bx.volume();
    let proof = proof_quantities(s, k, vol, pot.core_strength(), 0.0)?;
    let g_at_l = g.eval(bx.half_size());
    let rho_box = redelta_bound(omega, g, class.delta, bx.delta())?;
    let c_box = c_delta_estimate(env, bx.delta(), settings.c_delta_cubes, seed)?.value;
    let sk_bound = sk_analytic(env, g, rho_box, c_box, bx.delta(), kappa, bx.half_size())?;
    Ok(BoundsReport {
        half_size: bx.half_size(),
        rho: class.rho,
        omega_delta: class.delta,
        omega_points: omega.outside(bx).len(),
        r_cut,
        c_delta,
        kappa,
        g_at_l,
        field_check,
        s,
        k,
        proof,
        s_ge_k: s >= k,
        k_le_bound: k <= kappa * (1.0 + g_at_l) * (1.0 + 1e-12),
        sk_over_volume: s * k / vol,
        sk_bound,
    })
}

/// Where to write artifacts and whether plans outside the gate may run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub contrast: bool,
}

/// Everything a sweep produced.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub table: ConvergenceTable,
    pub bounds: Vec<BoundsReport>,
    pub trend: TrendSk,
    pub probes: Vec<ProbeSeries>,
    pub estimates: Vec<Vec<PressureEstimate>>,
    pub bulk_density: f64,
    pub rho: f64,
    pub gate: Option<bool>,
}

/// Names a growth function for identifiers and metadata.
pub fn growth_name(g: &GrowthFunction) -> String {
    match g {
        GrowthFunction::Zero => "zero".into(),
        GrowthFunction::Power { exponent } => format!("power-{exponent}"),
        GrowthFunction::Tabulated(_) => "tabulated".into(),
    }
}

/// Validates the plan and runs its audits and gate, returning the gate result.
/// The ideal gas has no core and is exempt from the core-positivity check.
pub fn preflight(plan: &ExperimentPlan, base: Option<&Path>, contrast: bool) -> Result<Option<bool>> {
    plan.validate(base)?;
    let pot = plan.potential_spec(base)?;
    let env = plan.envelope_spec(base)?;
    let g = plan.growth(base)?;
    let trials = plan.bounds_settings().audit_trials;
    let audit = audit_assumptions(&pot, &env, trials, derive_seed(plan.seed, LABEL_AUDIT, 0))?;
    let ideal = matches!(pot.kind(), crate::potential::PotentialKind::Ideal);
    if let Some(f) = audit.checks.iter().find(|c| !c.passed && !(ideal && c.name == "core-positivity")) {
        return Err(Error::Validation(format!("audit check '{}' failed: {}", f.name, f.detail)));
    }
    let adm = audit_admissible(&g, &env, trials, derive_seed(plan.seed, LABEL_AUDIT, 1));
    if let Some(f) = adm.audit.first_failure() {
        return Err(Error::Validation(format!("growth check '{}' failed: {}", f.name, f.detail)));
    }
    let gate = plan.gate(base)?;
    if gate == Some(false) && !contrast {
        return Err(Error::Validation("power-law gate failed: q >= min(1, p)/2; rerun with --contrast to run it as a contrast plan".into()));
    }
    Ok(gate)
}

fn integration_params(plan: &ExperimentPlan, index: usize) -> Result<IntegrationParams> {
    let c = plan.chain_settings()?;
    Ok(IntegrationParams {
        lambda: plan.lambda(),
        n_points: c.points,
        octaves: c.octaves,
        burn_in: c.burn_in,
        moves: c.moves[index],
        batches: c.batches,
        seed: plan.seed,
        stream: index as u64,
        anchor_samples: c.anchor_samples,
        record_every: c.record_every,
    })
}

fn integration_estimate(res: &IntegrationResult, sys: &System, plan: &ExperimentPlan, omega_id: &str, flags: &[String]) -> PressureEstimate {
    let mut f = flags.to_vec();
    if !res.warnings.is_empty() {
        f.push("ergodicity-warning".into());
    }
    let steps: Vec<String> = res.runs.iter().map(|r| fmt17(r.step)).collect();
    PressureEstimate {
        value: res.beta_p,
        error: res.error,
        method: Method::GcmcIntegration,
        beta: sys.beta,
        lambda: plan.lambda(),
        half_size: sys.bx.half_size(),
        omega_id: omega_id.to_string(),
        seed: plan.seed,
        flags: f,
        metadata: vec![
            ("stat_error".into(), fmt17(res.stat_error)),
            ("discretization_error".into(), fmt17(res.discretization_error)),
            ("anchor".into(), fmt17(res.anchor)),
            ("pair_cutoff".into(), fmt17(sys.pair_cutoff)),
            ("pair_tail".into(), fmt17(sys.pair_tail)),
            ("tuned_steps".into(), steps.join(" ")),
        ],
    }
}

/// Smallest n_max ≤ `cap` whose tail bound is below `tol`.
fn series_order(x: f64, cap: usize, tol: f64) -> usize {
    (1..=cap).find(|&n| poisson_tail(x, n) <= tol).unwrap_or(cap)
}

#[allow(clippy::too_many_arguments)]
fn series_estimate(sys: &System, plan: &ExperimentPlan, lambda: f64, field_bound: f64, seed: u64, omega_id: &str, flags: &[String]) -> Result<PressureEstimate> {
    let s = plan.series_settings();
    let stability = sys.pot.stability();
    let x = lambda * sys.bx.volume() * (sys.beta * stability).exp() * (sys.beta * field_bound).exp();
    let params = SeriesParams {
        n_max: series_order(x, s.n_max, s.tail_tol),
        mc_samples: s.mc_samples,
        seed,
        stability,
        field_bound,
        tail_tol: s.tail_tol,
    };
    let r = xi_truncated(sys, lambda, &params)?;
    let vol = sys.bx.volume();
    let mut f = flags.to_vec();
    if r.increase_n_max {
        f.push("increase-n-max".into());
    }
    Ok(PressureEstimate {
        value: r.log_xi / vol,
        error: (r.stat_error + r.tail_bound / r.xi) / vol,
        method: Method::Series,
        beta: sys.beta,
        lambda,
        half_size: sys.bx.half_size(),
        omega_id: omega_id.to_string(),
        seed,
        flags: f,
        metadata: vec![("n_max".into(), params.n_max.to_string()), ("tail_bound".into(), fmt17(r.tail_bound))],
    })
}

fn stream_doc(res: &IntegrationResult, k: usize, plan: &ExperimentPlan, index: usize, omega_id: &str) -> CsvDoc {
    let run = &res.runs[k];
    let mut doc = CsvDoc::new(&["move_index", "N", "U"]);
    doc.meta("generator", GENERATOR)
        .meta("seed", plan.seed)
        .meta("stream", format!("{index} {k}"))
        .meta("omega_id", omega_id)
        .meta("lambda", fmt17(res.grid[k]))
        .meta("tuned_step", fmt17(run.step))
        .meta("acceptance_insert", fmt17(run.acceptance[0]))
        .meta("acceptance_delete", fmt17(run.acceptance[1]))
        .meta("acceptance_translate", fmt17(run.acceptance[2]))
        .meta("mean_n", fmt17(run.mean_n))
        .meta("mean_n_error", fmt17(run.mean_n_error))
        .meta("energy_drift", fmt17(run.drift));
    for s in &run.samples {
        doc.push(vec![s.move_index.to_string(), s.n.to_string(), fmt17(s.u)]);
    }
    doc
}

fn pressure_doc(plan: &ExperimentPlan, estimates: &[PressureEstimate], extra: &[(String, String)]) -> CsvDoc {
    let mut doc = CsvDoc::new(&PressureEstimate::CSV_HEADER);
    doc.meta("plan", &plan.name).meta("generator", GENERATOR).meta("seed", plan.seed);
    for (k, v) in extra {
        doc.meta(k, v);
    }
    for e in estimates {
        doc.meta(&format!("{}:{}:error_kind", e.omega_id, e.method.name()), e.method.error_kind());
        for (k, v) in &e.metadata {
            doc.meta(&format!("{}:{}:{k}", e.omega_id, e.method.name()), v);
        }
    }
    for e in estimates {
        doc.push(e.csv_record());
    }
    doc
}

fn probe_doc(series: &[ProbeSeries], verdicts: bool) -> CsvDoc {
    let mut doc = if verdicts { CsvDoc::new(&["name", "abscissa", "value", "slope", "verdict"]) } else { CsvDoc::new(&["name", "abscissa", "value"]) };
    for s in series {
        for (x, y) in s.abscissae.iter().zip(&s.values) {
            let mut row = vec![s.name.clone(), fmt17(*x), fmt17(*y)];
            if verdicts {
                row.push(s.slope.map(fmt17).unwrap_or_default());
                row.push(s.verdict.name().to_string());
            }
            doc.push(row);
        }
    }
    doc
}

/// Log-spaced abscissae 10^1 … 10^4, four per decade.
pub fn probe_abscissae() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(1.0 + k as f64 / 4.0)).collect()
}

/// Runs the sweep of a validated plan and writes the artifact tree when an
/// output directory is given.
pub fn run_experiment(plan: &ExperimentPlan, base: Option<&Path>, opts: &RunOptions) -> Result<ExperimentOutput> {
    let gate = preflight(plan, base, opts.contrast)?;
    let outside = gate == Some(false);
    let flags: Vec<String> = if outside { vec![OUTSIDE_THEOREM.to_string()] } else { Vec::new() };
    let pot = plan.potential_spec(base)?;
    let env = plan.envelope_spec(base)?;
    let g = plan.growth(base)?;
    let sizes = plan.sizes().to_vec();
    let beta = plan.beta();
    let lambda = plan.lambda();
    let boxes: Vec<SimBox> = sizes.iter().map(|&l| SimBox::new(plan.dim(), l, plan.delta())).collect::<Result<_>>()?;
    let root = opts.out.as_ref().map(|o| o.join(&plan.name));
    let series_cap = plan.series_settings().max_lambda_volume;

    let zero = ExternalField::zero(&pot, &env, Kernel::V);
    let mut free = Vec::with_capacity(boxes.len());
    for (i, bx) in boxes.iter().enumerate() {
        let sys = System::new(*bx, &pot, &env, &zero, beta)?;
        free.push(pressure_by_integration(&sys, &integration_params(plan, i)?)?);
    }
    let last = free.last().expect("non-empty box series");
    let bulk_density = last.mean_n[last.mean_n.len() - 1] / boxes[boxes.len() - 1].volume();
    let rho = match plan.density()? {
        DensitySpec::Absolute(r) => r,
        DensitySpec::BulkFactor(f) => f * bulk_density,
    };
    let class = plan.omega_class(rho, base)?;
    let settings = plan.bounds_settings();

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut estimates = Vec::new();
    let mut omegas = Vec::new();
    for (i, bx) in boxes.iter().enumerate() {
        let omega_seed = derive_seed(plan.seed, LABEL_OMEGA, i as u64);
        let (omega, r_cut) = class.generate_for_box(bx, &env, omega_seed)?;
        let omega_id = format!("{}-rho{}-{}-seed{}", class.mode.name(), fmt17(rho), growth_name(&g), omega_seed);
        let field = ExternalField::build(bx, &omega, &pot, &env, Kernel::V);
        let sys_w = System::new(*bx, &pot, &env, &field, beta)?;
        let res_w = pressure_by_integration(&sys_w, &integration_params(plan, i)?)?;
        let sys_0 = System::new(*bx, &pot, &env, &zero, beta)?;
        let res_0 = &free[i];

        let report = bounds_report(bx, &pot, &env, &class, &omega, r_cut, &settings, derive_seed(plan.seed, LABEL_BOUNDS, i as u64))?;
        let est_0 = integration_estimate(res_0, &sys_0, plan, "empty", &flags);
        let relative_tail = class.relative_tail(&env, bx.half_size(), r_cut)?;
        let mut omega_flags = flags.clone();
        if relative_tail > class.tail_tol * (1.0 + 1e-9) {
            omega_flags.push("truncation-tail".into());
        }
        let est_w = integration_estimate(&res_w, &sys_w, plan, &omega_id, &omega_flags);
        let mut row_flags = flags.clone();
        for f in ["ergodicity-warning", "truncation-tail"] {
            if est_0.flags.iter().chain(&est_w.flags).any(|x| x == f) {
                row_flags.push(f.into());
            }
        }
        rows.push(ConvergenceRow::new(bx.half_size(), (est_0.value, est_0.error), (est_w.value, est_w.error), row_flags));

        let mut ests = vec![est_0, est_w];
        let vol = bx.volume();
        let series_seed = derive_seed(plan.seed, LABEL_SERIES, i as u64);
        if lambda * vol <= series_cap {
            let fb = report.kappa * (1.0 + report.g_at_l);
            let mut s0 = series_estimate(&sys_0, plan, lambda, 0.0, series_seed, "empty", &flags)?;
            let mut sw = series_estimate(&sys_w, plan, lambda, fb, series_seed, &omega_id, &omega_flags)?;
            for (s, t) in [(&mut s0, &ests[0]), (&mut sw, &ests[1])] {
                s.flags.push("cross-check".into());
                if (s.value - t.value).abs() > 3.0 * s.error.hypot(t.error) {
                    s.flags.push("cross-check-disagree".into());
                }
            }
            ests.push(s0);
            ests.push(sw);
        } else if let Some(k) = res_0.grid.iter().rposition(|&l| l * vol <= series_cap) {
            let lk = res_0.grid[k];
            let mut s0 = series_estimate(&sys_0, plan, lk, 0.0, series_seed, "empty", &flags)?;
            let mut t0 = PressureEstimate {
                value: res_0.cumulative[k] / vol,
                error: res_0.error,
                lambda: lk,
                metadata: Vec::new(),
                ..ests[0].clone()
            };
            t0.flags.push("cross-check".into());
            s0.flags.push("cross-check".into());
            if (s0.value - t0.value).abs() > 3.0 * s0.error.hypot(t0.error) {
                s0.flags.push("cross-check-disagree".into());
            }
            ests.push(t0);
            ests.push(s0);
        }

        if let Some(root) = &root {
            let dir = root.join(format!("L{}", bx.half_size()));
            let extra = vec![
                ("beta".to_string(), fmt17(beta)),
                ("lambda".to_string(), fmt17(lambda)),
                ("L".to_string(), fmt17(bx.half_size())),
                ("delta".to_string(), fmt17(bx.delta())),
                ("omega_rho".to_string(), fmt17(rho)),
                ("omega_r_cut".to_string(), fmt17(r_cut)),
                ("omega_relative_tail".to_string(), fmt17(relative_tail)),
                ("omega_points_outside".to_string(), omega.outside(bx).len().to_string()),
                ("bulk_density".to_string(), fmt17(bulk_density)),
                ("chain_moves".to_string(), integration_params(plan, i)?.moves.to_string()),
                ("grid".to_string(), res_0.grid.iter().map(|l| fmt17(*l)).collect::<Vec<_>>().join(" ")),
            ];
            pressure_doc(plan, &ests, &extra).write(&dir.join("pressure.csv"))?;
            report.to_csv().write(&dir.join("bounds.csv"))?;
            for k in 0..res_0.runs.len() {
                stream_doc(res_0, k, plan, i, "empty").write(&dir.join(format!("gcmc_free_{k:02}.csv")))?;
                stream_doc(&res_w, k, plan, i, &omega_id).write(&dir.join(format!("gcmc_omega_{k:02}.csv")))?;
            }
            std::fs::write(dir.join("omega.txt"), omega.to_text())?;
        }
        reports.push(report);
        estimates.push(ests);
        omegas.push(omega);
    }

    let table = ConvergenceTable::new(rows, outside);
    let trend = TrendSk {
        measured: ProbeSeries::new("sk-over-volume", sizes.clone(), reports.iter().map(|r| r.sk_over_volume).collect()),
        analytic: reports.iter().map(|r| r.sk_bound).collect(),
        s: reports.iter().map(|r| r.s).collect(),
        k: reports.iter().map(|r| r.k).collect(),
    };
    let abscissae = probe_abscissae();
    let (p1, p2) = probe_growth_balance(&g, &env, &abscissae)?;
    let p3 = probe_margin_decay(&g, &env, Margin::TwoThirds, &abscissae)?;
    let probes = vec![p1, p2, p3];

    if let Some(root) = &root {
        for (i, bx) in boxes.iter().enumerate() {
            let l = bx.half_size();
            let per_l: Vec<ProbeSeries> = vec![
                single_probe("growth-times-mean-w", l, probe_value_w(&g, &env, l)?),
                single_probe("growth-squared-times-mean-v", l, probe_value_v(&g, &env, l)?),
                single_probe("growth-times-v-of-margin", l, (1.0 + g.eval(l)) * crate::bounds::big_v(&env, Margin::TwoThirds.eval(l))?),
                single_probe("sk-over-volume", l, reports[i].sk_over_volume),
            ];
            probe_doc(&per_l, false).write(&root.join(format!("L{l}")).join("probes.csv"))?;
        }
        let mut all = probes.clone();
        all.push(trend.measured.clone());
        probe_doc(&all, true).write(&root.join("probes.csv"))?;
        let mut doc = table.to_csv();
        doc.meta("plan", &plan.name)
            .meta("seed", plan.seed)
            .meta("generator", GENERATOR)
            .meta("bulk_density", fmt17(bulk_density))
            .meta("omega_rho", fmt17(rho))
            .meta("gate", gate.map(|b| if b { "pass" } else { "fail" }).unwrap_or("not-applicable"));
        doc.write(&root.join("table.csv"))?;
        std::fs::write(root.join("plan.toml"), plan.to_toml()?)?;
    }
    Ok(ExperimentOutput { table, bounds: reports, trend, probes, estimates, bulk_density, rho, gate })
}

fn single_probe(name: &str, x: f64, y: f64) -> ProbeSeries {
    ProbeSeries { name: name.to_string(), abscissae: vec![x], values: vec![y], slope: None, verdict: crate::bounds::Verdict::Inconclusive }
}

fn probe_value_w(g: &GrowthFunction, env: &EnvelopeSpec, r: f64) -> Result<f64> {
    let q = crate::quadrature::integrate(&|s| crate::bounds::big_w(env, g, s).unwrap_or(f64::NAN), 0.0, r, 1e-10, 0.0);
    Ok(g.eval(r) * q.value / r)
}

fn probe_value_v(g: &GrowthFunction, env: &EnvelopeSpec, r: f64) -> Result<f64> {
    let q = crate::quadrature::integrate(&|s| crate::bounds::big_v(env, s).unwrap_or(f64::NAN), 0.0, r, 1e-10, 0.0);
    let gr = if matches!(g, GrowthFunction::Zero) { 1.0 } else { g.eval(r).powi(2) };
    Ok(gr * q.value / r)
}
