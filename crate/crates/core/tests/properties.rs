use proptest::prelude::*;

use superstable::boundary::{
    audit_admissible, class_membership, field_sum, generate_boundary, redelta_bound, GenerationMode, GrowthFunction, Kernel,
};
use superstable::bounds::{
    big_v, big_w, c_delta_estimate, kappa_tilde, partition_upper_bound, power_law_gate, probe_growth_balance, proof_quantities,
    ProofQuantities, Verdict,
};
use superstable::ensemble::{
    acceptance_probability, gcmc_run, pressure_by_integration, tonks_log_xi, xi_truncated, GcmcParams, IntegrationParams, MoveKind,
    SeriesParams, System,
};
use superstable::field::{ExternalField, OmegaClass};
use superstable::geometry::{point, Point, SimBox, ORIGIN};
use superstable::harness::experiment::probe_abscissae;
use superstable::harness::ExperimentPlan;
use superstable::potential::{audit_assumptions, shipped_envelopes, EnvelopeSpec, PotentialSpec};
use superstable::table::RadialTable;

fn tabulated() -> PotentialSpec {
    let r: Vec<f64> = (0..=240).map(|i| 0.025 * i as f64).collect();
    let y: Vec<f64> = r.iter().map(|&x| if x <= 1.0 { 10.0 } else { -x.powi(-2) }).collect();
    PotentialSpec::tabulated(1, RadialTable::new(r, y).unwrap(), 1.0, 1.0, 2.0).unwrap()
}

fn all_kinds() -> Vec<(PotentialSpec, EnvelopeSpec)> {
    let rods = EnvelopeSpec::compact_rod(1).unwrap();
    let tail = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
    vec![
        (PotentialSpec::ideal(1).unwrap(), rods.clone()),
        (PotentialSpec::soft_rod(1, 10.0, 1.0, 1.0).unwrap(), rods.clone()),
        (PotentialSpec::hard_rod(1, 1.0).unwrap(), rods),
        (PotentialSpec::default_core_plus_tail(1).unwrap(), tail.clone()),
        (tabulated(), tail),
    ]
}

fn small_omega(bx: &SimBox, env: &EnvelopeSpec, rho: f64, seed: u64) -> superstable::boundary::BoundaryConfiguration {
    let class = OmegaClass { mode: GenerationMode::Saturated, rho, growth: GrowthFunction::Zero, delta: 1.0, tail_tol: 1e-3, max_radius: 20.0 };
    class.generate_for_box(bx, env, seed).unwrap().0
}

fn log_weight(lambda: f64, beta: f64, n: usize, u: f64) -> f64 {
    n as f64 * lambda.ln() - beta * u - (1..=n).map(|k| (k as f64).ln()).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn detailed_balance(
        coords in prop::collection::vec(-2.0f64..2.0, 0..7),
        y in -2.0f64..2.0,
        kind in 0usize..3,
        pick in 0usize..64,
        lambda in 0.05f64..3.0,
        beta in 0.2f64..2.0,
    ) {
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let bx = SimBox::new(1, 2.0, 0.5).unwrap();
        let field = ExternalField::exact(&bx, &small_omega(&bx, &env, 1.0, 3), &pot, &env, Kernel::V);
        let sys = System::new(bx, &pot, &env, &field, beta).unwrap();
        let xs: Vec<Point> = coords.iter().map(|&c| point(&[c]).unwrap()).collect();
        let n = xs.len();
        let vol = bx.volume();
        let u = sys.energy(&xs);
        let yp = point(&[y]).unwrap();
        // Forward and reverse path weights on ordered tuples.
        let (fwd, rev) = match kind {
            0 => {
                let mut next = xs.clone();
                next.push(yp);
                let u2 = sys.energy(&next);
                let a = acceptance_probability(MoveKind::Insert, beta, lambda, vol, n, u2 - u);
                let b = acceptance_probability(MoveKind::Delete, beta, lambda, vol, n + 1, u - u2);
                (log_weight(lambda, beta, n, u) - vol.ln() - ((n + 1) as f64).ln() + a.ln(),
                 log_weight(lambda, beta, n + 1, u2) - ((n + 1) as f64).ln() + b.ln())
            }
            1 if n > 0 => {
                let mut next = xs.clone();
                next.remove(pick % n);
                let u2 = sys.energy(&next);
                let a = acceptance_probability(MoveKind::Delete, beta, lambda, vol, n, u2 - u);
                let b = acceptance_probability(MoveKind::Insert, beta, lambda, vol, n - 1, u - u2);
                (log_weight(lambda, beta, n, u) - (n as f64).ln() + a.ln(),
                 log_weight(lambda, beta, n - 1, u2) - vol.ln() - (n as f64).ln() + b.ln())
            }
            _ if n > 0 => {
                let mut next = xs.clone();
                next[pick % n] = yp;
                let u2 = sys.energy(&next);
                let a = acceptance_probability(MoveKind::Translate, beta, lambda, vol, n, u2 - u);
                let b = acceptance_probability(MoveKind::Translate, beta, lambda, vol, n, u - u2);
                (log_weight(lambda, beta, n, u) + a.ln(), log_weight(lambda, beta, n, u2) + b.ln())
            }
            _ => (0.0, 0.0),
        };
        if fwd.is_finite() || rev.is_finite() {
            prop_assert!(((fwd - rev).exp() - 1.0).abs() <= 1e-10, "fwd {fwd} rev {rev}");
        }
    }
}

proptest! {
    #[test]
    fn split_signs_recombine(r in 0.0f64..20.0, k in 0usize..5) {
        let (pot, _) = &all_kinds()[k];
        let v = pot.evaluate(r).unwrap();
        let (plus, minus) = pot.split_signs(r).unwrap();
        prop_assert!(plus >= 0.0 && minus >= 0.0);
        if v.is_finite() {
            prop_assert_eq!((plus - minus).to_bits(), v.to_bits());
        }
    }

    #[test]
    fn envelopes_are_monotone(a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let (r1, r2) = if a <= b { (a, b) } else { (b, a) };
        for (_, env) in shipped_envelopes().unwrap() {
            prop_assert!(env.eta(r1) >= env.eta(r2));
            prop_assert!(big_v(&env, r1).unwrap() >= big_v(&env, r2).unwrap());
        }
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let g = GrowthFunction::power(0.25).unwrap();
        prop_assert!(big_w(&env, &g, r1).unwrap() >= big_w(&env, &g, r2).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn rods_are_stable_with_zero_constant(seed in any::<u64>(), trials in 1usize..50) {
        let env = EnvelopeSpec::compact_rod(1).unwrap();
        for pot in [PotentialSpec::soft_rod(1, 3.0, 1.0, 1.0).unwrap(), PotentialSpec::hard_rod(1, 1.0).unwrap()] {
            let report = audit_assumptions(&pot.with_stability(0.0).unwrap(), &env, trials, seed).unwrap();
            prop_assert!(report.check("stability").unwrap().passed);
        }
    }

    #[test]
    fn radial_mass_matches_closed_form(d in 1usize..4, plateau in 1.0f64..5.0, b in 0.5f64..2.0, p in 0.3f64..3.0) {
        let c = plateau * b.powf(d as f64 + p) * 0.5;
        let env = EnvelopeSpec::power_law(d, plateau, b, c, p).unwrap();
        let closed = env.radial_mass_closed().unwrap();
        let hand = plateau * b.powi(d as i32) / d as f64 + c * b.powf(-p) / p;
        prop_assert!(((closed - hand) / hand).abs() <= 1e-12);
        prop_assert!(((env.radial_mass_quadrature().unwrap() - closed) / closed).abs() <= 1e-8);
    }

    #[test]
    fn box_geometry(d in 1usize..4, cells in 1usize..12, u in prop::array::uniform3(-1.0f64..1.0), h in 0.01f64..0.99) {
        let delta = 0.5;
        let l = cells as f64 * delta / 2.0;
        let bx = SimBox::new(d, l, delta).unwrap();
        let mut x = ORIGIN;
        for i in 0..d {
            x[i] = u[i] * l;
        }
        let dist = bx.boundary_distance(&x).unwrap();
        prop_assert!((0.0..=l).contains(&dist));
        prop_assert_eq!(bx.boundary_distance(&ORIGIN).unwrap(), l);
        let slot = bx.cell_slot(&x);
        prop_assert!(slot.is_some());
        let owners = bx.cells().iter().filter(|c| **c == bx.cube_of(&x)).count();
        prop_assert_eq!(owners, 1);
        prop_assert_eq!(bx.cells().len(), bx.cells_per_side().pow(d as u32));
        let s = bx.shrink(h * l).unwrap();
        prop_assert!((s.half_size() + h * l - l).abs() <= 1e-12 * l);
    }

    #[test]
    fn field_splits_by_sign(seed in any::<u64>(), c in -1.0f64..1.0) {
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let bx = SimBox::new(1, 2.0, 0.5).unwrap();
        let omega = small_omega(&bx, &env, 3.0, seed);
        let pts = omega.outside(&bx);
        let x = point(&[2.0 * c]).unwrap();
        let v = field_sum(&pts, &pot, &env, Kernel::V, &x);
        let plus = field_sum(&pts, &pot, &env, Kernel::VPlus, &x);
        let minus = field_sum(&pts, &pot, &env, Kernel::VMinus, &x);
        prop_assert!((v - (plus - minus)).abs() <= 1e-12 * (plus + minus).max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn saturated_omega_is_in_class(seed in any::<u64>(), rho in 0.5f64..6.0, q in 0.0f64..0.45, d in 1usize..3) {
        let g = if q == 0.0 { GrowthFunction::Zero } else { GrowthFunction::power(q).unwrap() };
        let omega = generate_boundary(GenerationMode::Saturated, d, rho, &g, 1.0, 12.0, seed).unwrap();
        prop_assert!(class_membership(&omega, rho, &g, 1.0).member);
        let tilde = redelta_bound(&omega, &g, 1.0, 0.5).unwrap();
        prop_assert!(class_membership(&omega, tilde, &g, 0.5).member);
        prop_assert!(!class_membership(&omega, tilde * (1.0 - 1e-9), &g, 0.5).member);
    }

    #[test]
    fn enlarging_the_box_never_adds_outside_points(seed in any::<u64>(), rho in 0.5f64..4.0) {
        let g = GrowthFunction::power(0.25).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let omega = generate_boundary(GenerationMode::Saturated, 1, rho, &g, 1.0, 40.0, seed).unwrap();
        let mut last = (usize::MAX, f64::INFINITY);
        for l in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let pts = omega.outside(&SimBox::new(1, l, 0.5).unwrap());
            let e = field_sum(&pts, &pot, &env, Kernel::Eta, &ORIGIN);
            prop_assert!(pts.len() <= last.0 && e <= last.1);
            last = (pts.len(), e);
        }
    }

    #[test]
    fn proof_index_exceeds_field(s in 0.01f64..100.0, ratio in 4.0f64..1000.0, k in 0.01f64..10.0) {
        let e = ratio * s;
        match proof_quantities(s, k, 8.0, 1.0, e).unwrap() {
            ProofQuantities::Regular { p_index, .. } => prop_assert!((p_index as f64) * s < e),
            ProofQuantities::FreeBoundShortcut => prop_assert!(false),
        }
    }

    // Pass region minus a band of width 0.05 in q below the threshold, where
    // the asymptotic probe slope 2q - min(1, p) lies above the verdict cutoff.
    #[test]
    fn gate_pass_implies_admissible_and_balanced(p in 0.2f64..3.0, frac in 0.0f64..1.0, seed in any::<u64>()) {
        let q = frac * (0.5 * p.min(1.0) - 0.05).max(0.0);
        prop_assert!(power_law_gate(p, q).unwrap());
        let env = EnvelopeSpec::power_law(1, 4.0, 1.0, 1.0, p).unwrap();
        let g = if q == 0.0 { GrowthFunction::Zero } else { GrowthFunction::power(q).unwrap() };
        prop_assert!(audit_admissible(&g, &env, 200, seed).admissible());
        let (a, b) = probe_growth_balance(&g, &env, &probe_abscissae()).unwrap();
        prop_assert_eq!(a.verdict, Verdict::TendingToZero);
        prop_assert_eq!(b.verdict, Verdict::TendingToZero);
    }

    #[test]
    fn plan_round_trip(seed in any::<u64>(), lambda in 0.01f64..5.0, beta in 0.1f64..4.0, n in 1usize..6) {
        let (mut plan, _) = ExperimentPlan::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("plans/default-g0.toml")).unwrap();
        plan.seed = seed;
        plan.thermo.lambda = Some(lambda);
        plan.thermo.beta = Some(beta);
        plan.box_series.sizes = (1..=n).map(|k| 4.0 * k as f64).collect();
        let text = plan.to_toml().unwrap();
        let back = ExperimentPlan::parse(&text).unwrap();
        prop_assert_eq!(&back, &plan);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}

#[test]
fn shipped_plans_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let plan = ExperimentPlan::parse(&text).unwrap();
        assert_eq!(ExperimentPlan::parse(&plan.to_toml().unwrap()).unwrap(), plan, "{}", path.display());
    }
}

#[test]
fn energy_drift_is_small_for_every_kind() {
    for (k, (pot, env)) in all_kinds().iter().enumerate() {
        let bx = SimBox::new(1, 4.0, 0.5).unwrap();
        let omega = small_omega(&bx, env, 2.0, 7 + k as u64);
        let field = ExternalField::build(&bx, &omega, pot, env, Kernel::V);
        let sys = System::new(bx, pot, env, &field, 1.0).unwrap();
        let run = gcmc_run(&sys, &GcmcParams::new(0.5, 1000, 100_000, 40 + k as u64)).unwrap();
        assert!(run.drift <= 1e-8, "{}: drift {}", pot.kind_name(), run.drift);
    }
}

#[test]
fn series_matches_tonks_grid() {
    let env = EnvelopeSpec::compact_rod(1).unwrap();
    let pot = PotentialSpec::hard_rod(1, 1.0).unwrap();
    let field = ExternalField::zero(&pot, &env, Kernel::V);
    for (i, ell) in [4.0, 8.0].into_iter().enumerate() {
        for (j, lambda) in [0.25, 0.5].into_iter().enumerate() {
            let sys = System::new(SimBox::new(1, ell / 2.0, 0.5).unwrap(), &pot, &env, &field, 1.0).unwrap();
            let sp = SeriesParams { n_max: 30, mc_samples: 1_000_000, seed: 60 + (2 * i + j) as u64, stability: 0.0, field_bound: 0.0, tail_tol: 1e-12 };
            let r = xi_truncated(&sys, lambda, &sp).unwrap();
            let exact = tonks_log_xi(ell, 1.0, lambda).unwrap();
            assert!((r.log_xi - exact).abs() <= 3.0 * r.stat_error, "l={ell} lambda={lambda}: {} vs {exact} +- {}", r.log_xi, r.stat_error);
        }
    }
}

#[test]
fn hard_rod_pressure_decreases_with_omega() {
    let env = EnvelopeSpec::compact_rod(1).unwrap();
    let pot = PotentialSpec::hard_rod(1, 1.0).unwrap();
    let bx = SimBox::new(1, 3.0, 0.5).unwrap();
    let free = ExternalField::zero(&pot, &env, Kernel::V);
    let omega = small_omega(&bx, &env, 1.0, 5);
    let field = ExternalField::exact(&bx, &omega, &pot, &env, Kernel::V);
    let s_free = System::new(bx, &pot, &env, &free, 1.0).unwrap();
    let s_omega = System::new(bx, &pot, &env, &field, 1.0).unwrap();
    let sp = SeriesParams { n_max: 30, mc_samples: 50_000, seed: 71, stability: 0.0, field_bound: 0.0, tail_tol: 1e-12 };
    let a = xi_truncated(&s_free, 0.5, &sp).unwrap();
    let b = xi_truncated(&s_omega, 0.5, &sp).unwrap();
    for (ca, cb) in a.coefficients.iter().zip(&b.coefficients) {
        assert!(cb <= ca, "{cb} > {ca}");
    }
    let pa = pressure_by_integration(&s_free, &IntegrationParams::new(0.5, 50_000, 72)).unwrap();
    let pb = pressure_by_integration(&s_omega, &IntegrationParams::new(0.5, 50_000, 72)).unwrap();
    assert!(pb.beta_p <= pa.beta_p + pa.error.hypot(pb.error), "{} vs {}", pb.beta_p, pa.beta_p);
}

#[test]
fn series_is_dominated_by_partition_bound() {
    let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
    let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
    let bx = SimBox::new(1, 1.0, 0.5).unwrap();
    for (i, (rho, q)) in [(1.0, 0.0), (2.0, 0.0), (1.0, 0.25), (2.0, 0.25)].into_iter().enumerate() {
        let g = if q == 0.0 { GrowthFunction::Zero } else { GrowthFunction::power(q).unwrap() };
        let class = OmegaClass { mode: GenerationMode::Saturated, rho, growth: g.clone(), delta: 1.0, tail_tol: 1e-3, max_radius: 5e3 };
        let (omega, _) = class.generate_for_box(&bx, &env, 80 + i as u64).unwrap();
        let field = ExternalField::build(&bx, &omega, &pot, &env, Kernel::V);
        let sys = System::new(bx, &pot, &env, &field, 1.0).unwrap();
        let c_delta = c_delta_estimate(&env, 1.0, 200, 90).unwrap().value;
        let kappa = kappa_tilde(c_delta, rho, &env, &g).unwrap();
        let sp = SeriesParams { n_max: 20, mc_samples: 20_000, seed: 91, stability: 2.0, field_bound: 0.0, tail_tol: 1e-3 };
        for lambda in [0.1, 0.5, 1.0] {
            let r = xi_truncated(&sys, lambda, &sp).unwrap();
            let bound = partition_upper_bound(lambda, 1.0, bx.volume(), 2.0, kappa, g.eval(bx.half_size())).unwrap();
            assert!(r.log_xi <= bound + r.stat_error, "rho={rho} q={q} lambda={lambda}: {} > {bound}", r.log_xi);
        }
    }
}
