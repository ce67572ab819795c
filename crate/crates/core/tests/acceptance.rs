//! Acceptance criteria 1-10. Prints one line per criterion and exits
//! non-zero when any fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use superstable::boundary::{GenerationMode, GrowthFunction, Kernel};
use superstable::bounds::{
    big_v, big_v_quadrature, big_w, big_w_quadrature, core_pair_verify, pile_configuration, power_law_gate, probe_growth_balance,
    probe_margin_decay, sup_estimates, Margin, Verdict,
};
use superstable::ensemble::{
    gcmc_run, pressure_by_integration, tonks_reference, xi_truncated, GcmcParams, IntegrationParams, SeriesParams, System,
};
use superstable::field::{ExternalField, OmegaClass};
use superstable::geometry::{Point, SimBox};
use superstable::harness::config::BoundsSettings;
use superstable::harness::experiment::{bounds_report, run_experiment, BoundsReport, RunOptions, TableVerdict};
use superstable::harness::ExperimentPlan;
use superstable::potential::{shipped_envelopes, EnvelopeSpec, PotentialSpec};
use superstable::rng::{tagged, Tag};
use superstable::table::RadialTable;
use superstable::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn settings() -> BoundsSettings {
    BoundsSettings { field_samples: 1000, c_delta_cubes: 200, samples_per_cube: 16, grid_resolution: 16, audit_trials: 200 }
}

fn saturated(rho: f64, growth: GrowthFunction) -> OmegaClass {
    OmegaClass { mode: GenerationMode::Saturated, rho, growth, delta: 1.0, tail_tol: 1e-3, max_radius: 5e3 }
}

fn rod_envelope() -> EnvelopeSpec {
    EnvelopeSpec::compact_rod(1).unwrap()
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn criterion_1() -> Result<Outcome> {
    let pot = PotentialSpec::ideal(1)?;
    let env = rod_envelope();
    let f = ExternalField::zero(&pot, &env, Kernel::V);
    let sys = System::new(SimBox::new(1, 2.0, 0.5)?, &pot, &env, &f, 1.0)?;
    let sp = SeriesParams { n_max: 40, mc_samples: 16, seed: 11, stability: 0.0, field_bound: 0.0, tail_tol: 1e-14 };
    let s = xi_truncated(&sys, 0.5, &sp)?;
    let series_ok = ((s.log_xi - 2.0) / 2.0).abs() <= 1e-12;
    let g = gcmc_run(&sys, &GcmcParams::new(0.5, 20_000, 1_000_000, 12))?;
    let n_ok = (g.mean_n - 2.0).abs() <= 3.0 * g.mean_n_error;
    let ti = pressure_by_integration(&sys, &IntegrationParams::new(0.5, 200_000, 13))?;
    let p_ok = (ti.beta_p - 0.5).abs() <= ti.error;
    outcome(
        series_ok && n_ok && p_ok,
        format!(
            "log Xi {:.15} | <N> {:.5} +- {:.5} | beta p {:.5} +- {:.5}",
            s.log_xi, g.mean_n, g.mean_n_error, ti.beta_p, ti.error
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let (ell, a, lambda) = (4.0_f64, 1.0, 0.5_f64);
    let oracle: f64 = (0..=4).map(|n| lambda.powi(n as i32) * (ell - (n as f64 - 1.0) * a).max(0.0).powi(n as i32) / fact(n)).sum();
    let (xi_ref, _) = tonks_reference(ell, a, lambda)?;
    let oracle_ok = (oracle - 4.2943).abs() < 5e-5 && ((xi_ref - oracle) / oracle).abs() < 1e-12;
    let pot = PotentialSpec::hard_rod(1, a)?;
    let env = rod_envelope();
    let f = ExternalField::zero(&pot, &env, Kernel::V);
    let sys = System::new(SimBox::new(1, ell / 2.0, 0.5)?, &pot, &env, &f, 1.0)?;
    let sp = SeriesParams { n_max: 30, mc_samples: 1_000_000, seed: 21, stability: 0.0, field_bound: 0.0, tail_tol: 1e-12 };
    let s = xi_truncated(&sys, lambda, &sp)?;
    let series_ok = (s.log_xi - oracle.ln()).abs() <= 3.0 * s.stat_error;
    let ti = pressure_by_integration(&sys, &IntegrationParams::new(lambda, 200_000, 22))?;
    let p_ok = (ti.beta_p - oracle.ln() / ell).abs() <= ti.error;
    outcome(
        oracle_ok && series_ok && p_ok,
        format!(
            "Xi oracle {oracle:.6} | series Xi {:.6} (log +- {:.2e}) | beta p {:.5} +- {:.5} vs {:.5}",
            s.xi,
            s.stat_error,
            ti.beta_p,
            ti.error,
            oracle.ln() / ell
        ),
    )
}

fn criterion_3() -> Result<Outcome> {
    let env = EnvelopeSpec::power_law(1, 1.0, 1.0, 1.0, 1.0)?;
    let g = GrowthFunction::power(0.25)?;
    let v_hand = |r: f64| if r >= 1.0 { 2.0 / r } else { 2.0 * (2.0 - r) };
    let w_hand = |r: f64| {
        if r >= 1.0 {
            8.0 / 3.0 * r.powf(-0.75)
        } else {
            2.0 * (0.8 * (1.0 - r.powf(1.25)) + 4.0 / 3.0)
        }
    };
    let anchors = (big_v(&env, 2.0)? - 1.0).abs() < 1e-12 && (big_v(&env, 0.0)? - 4.0).abs() < 1e-12 && (big_w(&env, &g, 1.0)? - 8.0 / 3.0).abs() < 1e-12;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let r = 10f64.powf(-2.0 + 5.0 * i as f64 / 19.0);
        let v = big_v(&env, r)?;
        let w = big_w(&env, &g, r)?;
        for (closed, other) in [(v, big_v_quadrature(&env, r)?), (w, big_w_quadrature(&env, &g, r)?), (v, v_hand(r)), (w, w_hand(r))] {
            worst = worst.max(((other - closed) / closed).abs());
        }
    }
    outcome(anchors && worst <= 1e-6, format!("anchors {} | worst relative error {worst:.2e} over 20 radii", if anchors { "exact" } else { "wrong" }))
}

fn field_bound_grid() -> Result<Vec<(f64, f64, f64, BoundsReport)>> {
    let pot = PotentialSpec::default_core_plus_tail(1)?;
    let env = EnvelopeSpec::default_for_core_plus_tail(1)?;
    let mut out = Vec::new();
    let mut seed = 400;
    for rho in [1.0, 5.0] {
        for q in [0.0, 0.25] {
            let growth = if q == 0.0 { GrowthFunction::Zero } else { GrowthFunction::power(q)? };
            let class = saturated(rho, growth);
            for l in [8.0, 16.0] {
                seed += 1;
                let bx = SimBox::new(1, l, 0.5)?;
                let (omega, r_cut) = class.generate_for_box(&bx, &env, seed)?;
                out.push((rho, q, l, bounds_report(&bx, &pot, &env, &class, &omega, r_cut, &settings(), seed)?));
            }
        }
    }
    Ok(out)
}

fn criterion_4(grid: &[(f64, f64, f64, BoundsReport)]) -> Result<Outcome> {
    let violations: usize = grid.iter().map(|(.., r)| r.field_check.violations).sum();
    let samples_ok = grid.iter().all(|(.., r)| r.field_check.samples >= 1000);
    let worst = grid.iter().map(|(.., r)| r.field_check.max_ratio).fold(0.0, f64::max);
    outcome(violations == 0 && samples_ok, format!("{} instances | {violations} violations | max E/bound {worst:.4}", grid.len()))
}

fn criterion_6(grid: &[(f64, f64, f64, BoundsReport)]) -> Result<Outcome> {
    let bad: Vec<String> = grid.iter().filter(|(.., r)| !(r.s_ge_k && r.k_le_bound)).map(|(rho, q, l, _)| format!("rho={rho},q={q},L={l}")).collect();
    outcome(bad.is_empty(), format!("{} instances | failing: {}", grid.len(), if bad.is_empty() { "none".into() } else { bad.join(" ") }))
}

fn tabulated_potential() -> Result<PotentialSpec> {
    let r: Vec<f64> = (0..=240).map(|i| 0.025 * i as f64).collect();
    let y: Vec<f64> = r.iter().map(|&x| if x <= 1.0 { 10.0 } else { -x.powi(-2) }).collect();
    PotentialSpec::tabulated(1, RadialTable::new(r, y)?, 1.0, 1.0, 2.0)
}

fn core_pair_kind(name: &str, pot: &PotentialSpec, kind_index: u64) -> Result<(usize, usize, usize)> {
    let default_pot = PotentialSpec::default_core_plus_tail(pot.dim())?;
    let field_pot = if pot.is_non_negative() { &default_pot } else { pot };
    let env = EnvelopeSpec::default_for_core_plus_tail(pot.dim())?;
    let (mut found, mut violations, mut tried) = (0, 0, 0);
    for i in 0..2000u64 {
        if found >= 100 {
            break;
        }
        tried += 1;
        let seed = 5000 + 10_000 * kind_index + i;
        let mut rng = tagged(seed, Tag::CorePairs, kind_index, i);
        let rho = 1.0 + 4.0 * rand::Rng::random::<f64>(&mut rng);
        let growth = if i % 2 == 0 { GrowthFunction::Zero } else { GrowthFunction::power(0.25)? };
        let l = [1.0, 1.5, 2.0, 3.0][(i % 4) as usize];
        let p = 2 + i % 5;
        let bx = SimBox::new(pot.dim(), l, 0.5)?;
        let class = OmegaClass { mode: GenerationMode::Saturated, rho, growth, delta: 1.0, tail_tol: 1e-3, max_radius: 20.0 };
        let (omega, _) = class.generate_for_box(&bx, &env, seed)?;
        let field = ExternalField::exact(&bx, &omega, field_pot, &env, Kernel::VMinus);
        let f = |x: &Point| field.at(x);
        let sups = sup_estimates(&bx, &f, pot.core(), 4, 8, seed)?;
        if sups.k <= 0.0 {
            continue;
        }
        let xs = pile_configuration(&bx, &f, &sups, p, &mut rng);
        match core_pair_verify(&xs, &f, pot, &bx, &sups, p) {
            Ok(cert) => {
                found += 1;
                if !cert.passed {
                    violations += 1;
                    eprintln!("{name}: violation at seed {seed}: v2 {} < rhs {}", cert.v2_total, cert.rhs);
                }
            }
            Err(superstable::Error::Hypothesis(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((found, violations, tried))
}

fn criterion_5() -> Result<Outcome> {
    let kinds = [
        ("soft-rod", PotentialSpec::soft_rod(1, 10.0, 1.0, 1.0)?),
        ("hard-rod", PotentialSpec::hard_rod(1, 1.0)?),
        ("core-plus-tail", PotentialSpec::default_core_plus_tail(1)?),
        ("tabulated", tabulated_potential()?),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (name, pot)) in kinds.iter().enumerate() {
        let (found, violations, tried) = core_pair_kind(name, pot, k as u64)?;
        ok &= found >= 100 && violations == 0;
        parts.push(format!("{name} {found}/{tried} ok, {violations} violations"));
    }
    outcome(ok, parts.join(" | "))
}

fn criterion_7() -> Result<Outcome> {
    let gates = power_law_gate(1.0, 0.25)? && !power_law_gate(1.0, 0.5)? && !power_law_gate(0.4, 0.25)?;
    let radii = superstable::harness::experiment::probe_abscissae();
    let mut ok = gates;
    let mut notes = vec![format!("gates {}", if gates { "ok" } else { "wrong" })];
    for (name, env) in shipped_envelopes()? {
        let (a, b) = probe_growth_balance(&GrowthFunction::Zero, &env, &radii)?;
        let good = a.verdict == Verdict::TendingToZero && b.verdict == Verdict::TendingToZero;
        ok &= good;
        if !good {
            notes.push(format!("g=0 {name}: {} {}", a.verdict.name(), b.verdict.name()));
        }
    }
    let env = EnvelopeSpec::default_for_core_plus_tail(1)?;
    let g = GrowthFunction::power(0.25)?;
    let (a, b) = probe_growth_balance(&g, &env, &radii)?;
    let m = probe_margin_decay(&g, &env, Margin::TwoThirds, &radii)?;
    ok &= a.verdict == Verdict::TendingToZero && b.verdict == Verdict::TendingToZero && m.verdict == Verdict::TendingToZero;
    notes.push(format!("{} shipped envelopes with g=0", shipped_envelopes()?.len()));
    notes.push(format!(
        "q=1/4: balance {} / {} (slopes {:.3} / {:.3}), margin {} (slope {:.3})",
        a.verdict.name(),
        b.verdict.name(),
        a.slope.unwrap_or(f64::NAN),
        b.slope.unwrap_or(f64::NAN),
        m.verdict.name(),
        m.slope.unwrap_or(f64::NAN)
    ));
    outcome(ok, notes.join(" | "))
}

fn criterion_8() -> Result<Outcome> {
    let pot = PotentialSpec::default_core_plus_tail(1)?;
    let env = EnvelopeSpec::default_for_core_plus_tail(1)?;
    let class = saturated(2.0, GrowthFunction::Zero);
    let mut measured = Vec::new();
    let mut analytic = Vec::new();
    for (i, l) in [8.0, 16.0, 32.0, 64.0].into_iter().enumerate() {
        let bx = SimBox::new(1, l, 0.5)?;
        let (omega, r_cut) = class.generate_for_box(&bx, &env, 800 + i as u64)?;
        let r = bounds_report(&bx, &pot, &env, &class, &omega, r_cut, &settings(), 800 + i as u64)?;
        measured.push(r.sk_over_volume);
        analytic.push(r.sk_bound);
    }
    let decreasing = measured.windows(2).all(|w| w[1] < w[0]);
    let below = measured.iter().zip(&analytic).all(|(m, a)| m <= a);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(decreasing && below, format!("SK/|L| [{}] | analytic [{}]", fmt(&measured), fmt(&analytic)))
}

const HEADLINE_PLANS: [&str; 2] = ["default-g0.toml", "default-g-quarter.toml"];

fn plan_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("plans").join(name)
}

fn run_headline(out: &Path) -> Result<Vec<(String, TableVerdict, String)>> {
    let mut results = Vec::new();
    for file in HEADLINE_PLANS {
        let (plan, base) = ExperimentPlan::load(&plan_path(file))?;
        let opts = RunOptions { out: Some(out.to_path_buf()), contrast: false };
        let output = run_experiment(&plan, base.as_deref(), &opts)?;
        let rows: Vec<String> = output
            .table
            .rows
            .iter()
            .map(|r| format!("L={} dp={:.4}+-{:.4}", r.half_size, r.delta_p, r.combined_error))
            .collect();
        results.push((plan.name.clone(), output.table.verdict, format!("rho0={:.4} rho={:.4} {}", output.bulk_density, output.rho, rows.join(" "))));
    }
    Ok(results)
}

fn criterion_9(out: &Path) -> Result<Outcome> {
    let results = run_headline(out)?;
    let ok = results.iter().all(|(_, v, _)| *v == TableVerdict::Converging);
    let detail = results.iter().map(|(n, v, d)| format!("{n}: {} [{d}]", v.name())).collect::<Vec<_>>().join(" | ");
    outcome(ok, detail)
}

fn table_bytes(out: &Path, plan: &str) -> Result<Vec<u8>> {
    let text = std::fs::read_to_string(out.join(plan).join("table.csv"))?;
    Ok(text.lines().filter(|l| !l.starts_with("# timestamp")).collect::<Vec<_>>().join("\n").into_bytes())
}

fn criterion_10(first: &Path) -> Result<Outcome> {
    let second = tempfile::tempdir()?;
    run_headline(second.path())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for file in HEADLINE_PLANS {
        let (plan, _) = ExperimentPlan::load(&plan_path(file))?;
        let same = table_bytes(first, &plan.name)? == table_bytes(second.path(), &plan.name)?;
        ok &= same;
        notes.push(format!("{}: {}", plan.name, if same { "identical" } else { "differs" }));
    }
    outcome(ok, notes.join(" | "))
}

fn report(n: usize, started: Instant, r: Result<Outcome>) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match r {
        Ok(o) => {
            println!("criterion {n}: {} ({}) [{secs:.1}s]", if o.passed { "PASS" } else { "FAIL" }, o.detail);
            o.passed
        }
        Err(e) => {
            println!("criterion {n}: FAIL (error: {e}) [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut passed = Vec::new();
    let t = Instant::now();
    passed.push(report(1, t, criterion_1()));
    let t = Instant::now();
    passed.push(report(2, t, criterion_2()));
    let t = Instant::now();
    passed.push(report(3, t, criterion_3()));
    let t = Instant::now();
    let grid = field_bound_grid();
    match grid {
        Ok(grid) => {
            passed.push(report(4, t, criterion_4(&grid)));
            let t5 = Instant::now();
            passed.push(report(5, t5, criterion_5()));
            let t6 = Instant::now();
            passed.push(report(6, t6, criterion_6(&grid)));
        }
        Err(e) => {
            let msg = e.to_string();
            passed.push(report(4, t, Err(e)));
            let t5 = Instant::now();
            passed.push(report(5, t5, criterion_5()));
            passed.push(report(6, t, Err(superstable::Error::Invalid(msg))));
        }
    }
    let t = Instant::now();
    passed.push(report(7, t, criterion_7()));
    let t = Instant::now();
    passed.push(report(8, t, criterion_8()));
    let out = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            println!("criterion 9: FAIL (error: {e})");
            println!("criterion 10: FAIL (error: {e})");
            return ExitCode::FAILURE;
        }
    };
    let t = Instant::now();
    passed.push(report(9, t, criterion_9(out.path())));
    let t = Instant::now();
    passed.push(report(10, t, criterion_10(out.path())));
    let n_pass = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {n_pass}/{} criteria passed", passed.len());
    if n_pass == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
