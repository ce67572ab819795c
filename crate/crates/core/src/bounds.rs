//! Analytic bounds and their numerical checks: tail integrals V and W, the
//! envelope constant C_δ, field bounds, the quantities S, K, E_Λ, G_Λ, p,
//! the core-pair certificate, condition probes and the power-law gate.

use crate::boundary::GrowthFunction;
use crate::error::{Error, Result};
use crate::geometry::{distance, norm, Point, SimBox, ORIGIN};
use crate::potential::{EnvelopeLaw, EnvelopeSpec, PotentialSpec};
use crate::quadrature::{integrate_breaks, radial_breaks};
use crate::rng::{tagged, StreamRng, Tag};
use rand::Rng;
use std::f64::consts::PI;

/// Surface measure of the unit sphere in ℝ^d.
pub fn unit_sphere_surface(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => f64::NAN,
    }
}

const QUAD_REL: f64 = 1e-9;

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be non-negative, got {r}")))
    }
}

fn tempered(env: &EnvelopeSpec) -> Result<()> {
    if let EnvelopeLaw::PowerLaw { amplitude, exponent } = env.law() {
        if *amplitude > 0.0 && *exponent <= 0.0 {
            return Err(Error::NotTempered(format!("tail exponent p = {exponent} must be positive")));
        }
    }
    Ok(())
}

/// Radial integral S_d ∫_r^∞ η(s) f(s) s^{d−1} ds by quadrature; for power
/// laws the remainder beyond `cut` uses `f(∞)`-bounded closed form supplied by
/// `remainder`.
fn radial_quadrature<F: Fn(f64) -> f64>(env: &EnvelopeSpec, f: F, r: f64, kinks: &[f64], remainder: &dyn Fn(f64) -> f64) -> f64 {
    let d = env.dim() as f64;
    let integrand = |s: f64| env.eta(s) * f(s) * s.powf(d - 1.0);
    let mut k = env.kinks();
    k.extend_from_slice(kinks);
    let (upper, rem) = match env.support() {
        Some(s) => (s.max(r), 0.0),
        None => {
            let x = (1e6 * env.range()).max(r).max(k.iter().copied().fold(0.0, f64::max));
            (x, remainder(x))
        }
    };
    let q = integrate_breaks(&integrand, &radial_breaks(r, upper, &k), QUAD_REL * 1e-3, 0.0);
    unit_sphere_surface(env.dim()) * q.value + rem
}

/// V(r) = S_d ∫_r^∞ η(s) s^{d−1} ds.
pub fn big_v(env: &EnvelopeSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    tempered(env)?;
    let sd = unit_sphere_surface(env.dim());
    let d = env.dim() as f64;
    match env.law() {
        EnvelopeLaw::PowerLaw { amplitude, exponent } => {
            let b = env.range();
            let tail = |x: f64| if *amplitude == 0.0 { 0.0 } else { amplitude * x.powf(-exponent) / exponent };
            if r >= b {
                Ok(sd * tail(r))
            } else {
                Ok(sd * (env.plateau() * (b.powf(d) - r.powf(d)) / d + tail(b)))
            }
        }
        EnvelopeLaw::Tabulated(_) => Ok(big_v_quadrature(env, r)?),
    }
}

/// V(r) by adaptive quadrature.
pub fn big_v_quadrature(env: &EnvelopeSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    tempered(env)?;
    let sd = unit_sphere_surface(env.dim());
    let rem = |x: f64| match env.law() {
        EnvelopeLaw::PowerLaw { amplitude, exponent } => sd * amplitude * x.powf(-exponent) / exponent,
        EnvelopeLaw::Tabulated(_) => 0.0,
    };
    Ok(radial_quadrature(env, |_| 1.0, r, &[], &rem))
}

/// W(r) = S_d ∫_r^∞ η(s) g(s) s^{d−1} ds.
pub fn big_w(env: &EnvelopeSpec, g: &GrowthFunction, r: f64) -> Result<f64> {
    check_radius(r)?;
    tempered(env)?;
    if matches!(g, GrowthFunction::Zero) {
        return Ok(0.0);
    }
    match (env.law(), g) {
        (EnvelopeLaw::PowerLaw { amplitude, exponent }, GrowthFunction::Power { exponent: q }) => {
            if *amplitude > 0.0 && q >= exponent {
                return Err(Error::Divergent(format!("growth exponent q = {q} is not below the tail exponent p = {exponent}")));
            }
            let sd = unit_sphere_surface(env.dim());
            let d = env.dim() as f64;
            let b = env.range();
            let tail = |x: f64| if *amplitude == 0.0 { 0.0 } else { amplitude * x.powf(q - exponent) / (exponent - q) };
            if r >= b {
                Ok(sd * tail(r))
            } else {
                Ok(sd * (env.plateau() * (b.powf(q + d) - r.powf(q + d)) / (q + d) + tail(b)))
            }
        }
        _ => big_w_quadrature(env, g, r),
    }
}

/// W(r) by adaptive quadrature.
pub fn big_w_quadrature(env: &EnvelopeSpec, g: &GrowthFunction, r: f64) -> Result<f64> {
    check_radius(r)?;
    tempered(env)?;
    let sd = unit_sphere_surface(env.dim());
    let rem: Box<dyn Fn(f64) -> f64> = match (env.law(), g) {
        (EnvelopeLaw::Tabulated(_), _) | (_, GrowthFunction::Zero) => Box::new(|_| 0.0),
        (EnvelopeLaw::PowerLaw { amplitude, exponent }, GrowthFunction::Power { exponent: q }) => {
            if *amplitude > 0.0 && q >= exponent {
                return Err(Error::Divergent(format!("growth exponent q = {q} is not below the tail exponent p = {exponent}")));
            }
            let (a, p, q) = (*amplitude, *exponent, *q);
            Box::new(move |x: f64| sd * a * x.powf(q - p) / (p - q))
        }
        (EnvelopeLaw::PowerLaw { amplitude, exponent }, GrowthFunction::Tabulated(t)) => {
            let top = t.values()[t.values().len() - 1];
            let (a, p) = (*amplitude, *exponent);
            Box::new(move |x: f64| sd * top * a * x.powf(-p) / p)
        }
    };
    Ok(radial_quadrature(env, |s| g.eval(s), r, &g.kinks(), &*rem))
}

/// Integral of η(‖y‖) over the cube `lo + [0, δ]^d`.
pub fn cell_integral(env: &EnvelopeSpec, lo: &Point, delta: f64) -> f64 {
    let kinks = env.kinks();
    let tol = 1e-11;
    let breaks_1d = |a: f64, b: f64, offset2: f64| -> Vec<f64> {
        let mut pts = vec![a, b];
        for &k in &kinks {
            let s2 = k * k - offset2;
            if s2 > 0.0 {
                let s = s2.sqrt();
                for t in [s, -s] {
                    if t > a && t < b {
                        pts.push(t);
                    }
                }
            }
        }
        pts.sort_by(f64::total_cmp);
        pts
    };
    match env.dim() {
        1 => {
            let f = |x: f64| env.eta(x.abs());
            integrate_breaks(&f, &breaks_1d(lo[0], lo[0] + delta, 0.0), tol, 0.0).value
        }
        2 => {
            let inner = |x: f64| {
                let f = |y: f64| env.eta((x * x + y * y).sqrt());
                integrate_breaks(&f, &breaks_1d(lo[1], lo[1] + delta, x * x), tol, 0.0).value
            };
            let mut outer = breaks_1d(lo[0], lo[0] + delta, 0.0);
            for y in [lo[1], lo[1] + delta] {
                outer.extend(breaks_1d(lo[0], lo[0] + delta, y * y));
            }
            outer.sort_by(f64::total_cmp);
            outer.dedup();
            integrate_breaks(&inner, &outer, 1e-9, 0.0).value
        }
        _ => {
            let plane = |x: f64| {
                let inner = |y: f64| {
                    let f = |z: f64| env.eta((x * x + y * y + z * z).sqrt());
                    integrate_breaks(&f, &breaks_1d(lo[2], lo[2] + delta, x * x + y * y), tol, 0.0).value
                };
                let mut mid = breaks_1d(lo[1], lo[1] + delta, x * x);
                for z in [lo[2], lo[2] + delta] {
                    mid.extend(breaks_1d(lo[1], lo[1] + delta, x * x + z * z));
                }
                mid.sort_by(f64::total_cmp);
                mid.dedup();
                integrate_breaks(&inner, &mid, 1e-9, 0.0).value
            };
            let mut outer = breaks_1d(lo[0], lo[0] + delta, 0.0);
            for y in [lo[1], lo[1] + delta] {
                for z in [lo[2], lo[2] + delta] {
                    outer.extend(breaks_1d(lo[0], lo[0] + delta, y * y + z * z));
                }
            }
            outer.sort_by(f64::total_cmp);
            outer.dedup();
            integrate_breaks(&plane, &outer, 1e-8, 0.0).value
        }
    }
}

/// δ^d · sup_Δ η / ∫_Δ η for the cube `lo + [0, δ]^d`, or `None` when η
/// vanishes on the cube.
pub fn cell_ratio(env: &EnvelopeSpec, lo: &Point, delta: f64, rng: &mut StreamRng) -> Result<Option<f64>> {
    let d = env.dim();
    let mut sup: f64 = 0.0;
    let mut closest = ORIGIN;
    for i in 0..d {
        closest[i] = if lo[i] > 0.0 {
            lo[i]
        } else if lo[i] + delta < 0.0 {
            lo[i] + delta
        } else {
            0.0
        };
    }
    sup = sup.max(env.eta(norm(&closest)));
    for mask in 0..1usize << d {
        let mut p = *lo;
        for (i, pi) in p.iter_mut().enumerate().take(d) {
            if mask >> i & 1 == 1 {
                *pi += delta;
            }
        }
        sup = sup.max(env.eta(norm(&p)));
    }
    for _ in 0..32 {
        let mut p = *lo;
        for pi in p.iter_mut().take(d) {
            *pi += delta * rng.random::<f64>();
        }
        sup = sup.max(env.eta(norm(&p)));
    }
    if sup == 0.0 {
        return Ok(None);
    }
    let integral = cell_integral(env, lo, delta);
    if integral <= 0.0 {
        return Err(Error::EmptyCell(format!("cell at {:?} with delta {delta}", &lo[..d])));
    }
    Ok(Some(delta.powi(d as i32) * sup / integral))
}

/// Empirical C_δ with the sampled cells attached.
#[derive(Clone, Debug, PartialEq)]
pub struct CDelta {
    pub value: f64,
    pub worst_corner: Point,
    pub n_cubes: usize,
}

/// Maximum of [`cell_ratio`] over `n_cubes` cells at radii spanning [0, 10³·δ],
/// including cells with a corner on the plateau edge r = b when b lies in that range.
pub fn c_delta_estimate(env: &EnvelopeSpec, delta: f64, n_cubes: usize, seed: u64) -> Result<CDelta> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Invalid(format!("delta must be positive, got {delta}")));
    }
    let d = env.dim();
    let b = env.range();
    let mut rng = tagged(seed, Tag::CDelta, 0, 0);
    let mut corners: Vec<Point> = vec![ORIGIN];
    if b <= 1e3 * delta {
        let mut axis = ORIGIN;
        axis[0] = b;
        corners.push(axis);
        axis[0] = (b - 0.5 * delta).max(0.0);
        corners.push(axis);
    }
    let mut k = 0usize;
    while corners.len() < n_cubes.max(3) {
        let r = match k % 4 {
            0 if b <= 1e3 * delta => (b + delta * (2.0 * rng.random::<f64>() - 1.0)).max(0.0),
            1 => 2.0 * delta * rng.random::<f64>(),
            _ => delta * 10f64.powf(rng.random_range(-2.0..3.0)),
        };
        k += 1;
        let mut u = ORIGIN;
        let mut n2 = 0.0;
        for ui in u.iter_mut().take(d) {
            *ui = rng.random::<f64>();
            n2 += *ui * *ui;
        }
        let n = n2.sqrt().max(1e-300);
        let mut c = ORIGIN;
        for i in 0..d {
            c[i] = if d == 1 { r } else { r * u[i] / n };
        }
        corners.push(c);
    }
    let mut best = CDelta { value: 1.0, worst_corner: ORIGIN, n_cubes: corners.len() };
    for c in &corners {
        if let Some(ratio) = cell_ratio(env, c, delta, &mut rng)? {
            if ratio > best.value {
                best.value = ratio;
                best.worst_corner = *c;
            }
        }
    }
    Ok(best)
}

/// κ̃ = C_δ ρ d (W(0) + V(0)).
pub fn kappa_tilde(c_delta: f64, rho: f64, env: &EnvelopeSpec, g: &GrowthFunction) -> Result<f64> {
    Ok(c_delta * rho * env.dim() as f64 * (big_w(env, g, 0.0)? + big_v(env, 0.0)?))
}

/// log Ξ ≤ |λ| |Λ| e^{βB} e^{βκ̃(1+g(L))}.
pub fn partition_upper_bound(lambda: f64, beta: f64, volume: f64, stability: f64, kappa: f64, g_at_l: f64) -> Result<f64> {
    if beta < 0.0 {
        return Err(Error::Invalid(format!("beta must be non-negative, got {beta}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    Ok(lambda.abs() * volume * (beta * stability).exp() * (beta * kappa * (1.0 + g_at_l)).exp())
}

/// Result of comparing a sampled field against a bound.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldBoundCheck {
    pub samples: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub worst_point: Point,
    pub bound: f64,
}

impl FieldBoundCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn sample_in_cube(d: usize, half: f64, rng: &mut StreamRng) -> Point {
    let mut x = ORIGIN;
    for xi in x.iter_mut().take(d) {
        *xi = half * (2.0 * rng.random::<f64>() - 1.0);
    }
    x
}

/// Checks E^{v−}(x, ω) ≤ κ̃(1 + g(L)) at the origin, the box corners and
/// `n_samples` uniform points of Λ.
pub fn attractive_field_check(bx: &SimBox, field: &dyn Fn(&Point) -> f64, kappa: f64, g: &GrowthFunction, n_samples: usize, seed: u64) -> FieldBoundCheck {
    let bound = kappa * (1.0 + g.eval(bx.half_size()));
    let d = bx.dim();
    let mut rng = tagged(seed, Tag::FieldCheck, 0, 0);
    let mut points = vec![ORIGIN];
    for mask in 0..1usize << d {
        let mut p = ORIGIN;
        for (i, pi) in p.iter_mut().enumerate().take(d) {
            *pi = if mask >> i & 1 == 1 { bx.half_size() } else { -bx.half_size() };
        }
        points.push(p);
    }
    points.extend((0..n_samples).map(|_| sample_in_cube(d, bx.half_size(), &mut rng)));
    let bounds = vec![bound; points.len()];
    compare_field(&points, field, &bounds, bound)
}

fn compare_field(points: &[Point], field: &dyn Fn(&Point) -> f64, bounds: &[f64], nominal: f64) -> FieldBoundCheck {
    let mut check = FieldBoundCheck { samples: points.len(), violations: 0, max_ratio: 0.0, worst_point: ORIGIN, bound: nominal };
    for (x, &bnd) in points.iter().zip(bounds) {
        let e = field(x);
        let ratio = if bnd > 0.0 { e / bnd } else if e > 0.0 { f64::INFINITY } else { 0.0 };
        if ratio > check.max_ratio {
            check.max_ratio = ratio;
            check.worst_point = *x;
        }
        if e > bnd * (1.0 + 1e-12) {
            check.violations += 1;
        }
    }
    check
}

/// κ̄ [W(d_x) + (1 + g(L)) V(d_x)] with κ̄ = C_δ ρ d, valid for d_x ≥ b.
pub fn repulsive_field_bound(bx: &SimBox, x: &Point, rho: f64, g: &GrowthFunction, env: &EnvelopeSpec, c_delta: f64) -> Result<f64> {
    let dx = bx.boundary_distance(x)?;
    if dx < env.range() {
        return Err(Error::Hypothesis(format!("boundary distance {dx} is below the envelope range b = {}", env.range())));
    }
    let kbar = c_delta * rho * env.dim() as f64;
    Ok(kbar * (big_w(env, g, dx)? + (1.0 + g.eval(bx.half_size())) * big_v(env, dx)?))
}

/// Checks E^{v+}(x, ω) against [`repulsive_field_bound`] at the origin and
/// `n_samples` uniform points with d_x ≥ b.
#[allow(clippy::too_many_arguments)]
pub fn repulsive_field_check(
    bx: &SimBox,
    field: &dyn Fn(&Point) -> f64,
    rho: f64,
    g: &GrowthFunction,
    env: &EnvelopeSpec,
    c_delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<FieldBoundCheck> {
    let inner = bx.half_size() - env.range();
    if inner < 0.0 {
        return Err(Error::Hypothesis("no point of the box is at distance b from its boundary".into()));
    }
    let mut rng = tagged(seed, Tag::FieldCheck, 1, 0);
    let mut points = vec![ORIGIN];
    points.extend((0..n_samples).map(|_| sample_in_cube(bx.dim(), inner, &mut rng)));
    let nominal = repulsive_field_bound(bx, &ORIGIN, rho, g, env, c_delta)?;
    let bounds: Vec<f64> = points.iter().map(|x| repulsive_field_bound(bx, x, rho, g, env, c_delta)).collect::<Result<_>>()?;
    Ok(compare_field(&points, field, &bounds, nominal))
}

/// Sampled per-cell suprema of a field over Λ_δ and its global supremum.
#[derive(Clone, Debug, PartialEq)]
pub struct SupEstimates {
    pub cell_sup: Vec<f64>,
    pub s: f64,
    pub k: f64,
    pub argmax: Point,
    pub samples_per_cube: usize,
    pub grid_resolution: usize,
}

impl SupEstimates {
    fn record(&mut self, bx: &SimBox, x: &Point, value: f64) {
        if let Some(slot) = bx.cell_slot(x) {
            if value > self.cell_sup[slot] {
                self.s += value - self.cell_sup[slot];
                self.cell_sup[slot] = value;
            }
        }
        if value > self.k {
            self.k = value;
            self.argmax = *x;
        }
    }

    /// Includes further evaluation points in the estimates.
    pub fn refine(&mut self, bx: &SimBox, field: &dyn Fn(&Point) -> f64, points: &[Point]) {
        for x in points {
            let v = field(x);
            self.record(bx, x, v);
        }
        self.s = self.cell_sup.iter().sum();
    }
}

/// Checks δ < a/√d on the box partition.
pub fn check_core_partition(bx: &SimBox, core: f64) -> Result<()> {
    if bx.delta() >= core / (bx.dim() as f64).sqrt() {
        return Err(Error::Hypothesis(format!("partition delta = {} must be below a/sqrt(d) = {}", bx.delta(), core / (bx.dim() as f64).sqrt())));
    }
    Ok(())
}

/// Estimates S = Σ_cells sup E^{v−} and K = sup_Λ E^{v−} by sampling:
/// stratified samples and corners per cell, then a regular grid with one
/// local refinement around its argmax.
pub fn sup_estimates(
    bx: &SimBox,
    field: &dyn Fn(&Point) -> f64,
    core: f64,
    samples_per_cube: usize,
    grid_resolution: usize,
    seed: u64,
) -> Result<SupEstimates> {
    check_core_partition(bx, core)?;
    let d = bx.dim();
    let grid = bx.grid();
    let cells = bx.cells();
    let mut est = SupEstimates {
        cell_sup: vec![0.0; cells.len()],
        s: 0.0,
        k: 0.0,
        argmax: ORIGIN,
        samples_per_cube,
        grid_resolution,
    };
    let mut rng = tagged(seed, Tag::Sup, 0, 0);
    let strata = (samples_per_cube as f64).powf(1.0 / d as f64).ceil().max(1.0) as usize;
    let h = bx.delta() / strata as f64;
    let eps = 1e-12 * bx.half_size();
    for (slot, c) in cells.iter().enumerate() {
        let lo = grid.lower_corner(c);
        let mut best = 0.0f64;
        let mut best_x = lo;
        for corner in grid.corners(c) {
            let mut p = corner;
            for i in 0..d {
                p[i] = p[i].clamp(-bx.half_size(), bx.half_size());
                if p[i] > lo[i] + 0.5 * bx.delta() {
                    p[i] -= eps;
                }
            }
            let v = field(&p);
            if v > best {
                best = v;
                best_x = p;
            }
        }
        for flat in 0..strata.pow(d as u32) {
            let mut p = lo;
            let mut f = flat;
            for pi in p.iter_mut().take(d) {
                *pi += h * ((f % strata) as f64 + rng.random::<f64>());
                f /= strata;
            }
            let v = field(&p);
            if v > best {
                best = v;
                best_x = p;
            }
        }
        est.cell_sup[slot] = best;
        if best > est.k {
            est.k = best;
            est.argmax = best_x;
        }
    }
    est.s = est.cell_sup.iter().sum();

    let n = grid_resolution.max(2);
    let l = bx.half_size();
    let spacing = 2.0 * l / (n - 1) as f64;
    let regular = |centre: &Point, half: f64| -> Vec<Point> {
        let total = n.pow(d as u32);
        (0..total)
            .map(|mut flat| {
                let mut p = ORIGIN;
                for i in 0..d {
                    let t = (flat % n) as f64 / (n - 1) as f64;
                    p[i] = (centre[i] - half + 2.0 * half * t).clamp(-l, l);
                    flat /= n;
                }
                p
            })
            .collect()
    };
    let coarse = regular(&ORIGIN, l);
    est.refine(bx, field, &coarse);
    let centre = est.argmax;
    let fine = regular(&centre, spacing);
    est.refine(bx, field, &fine);
    Ok(est)
}

/// S alone; see [`sup_estimates`].
pub fn s_lambda(bx: &SimBox, field: &dyn Fn(&Point) -> f64, core: f64, samples_per_cube: usize, seed: u64) -> Result<f64> {
    Ok(sup_estimates(bx, field, core, samples_per_cube, 2, seed)?.s)
}

/// K alone; see [`sup_estimates`].
pub fn k_lambda(bx: &SimBox, field: &dyn Fn(&Point) -> f64, core: f64, grid_resolution: usize) -> Result<f64> {
    Ok(sup_estimates(bx, field, core, 1, grid_resolution, 0)?.k)
}

/// E_Λ, G_Λ and p, or the free-bound shortcut when S·K = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProofQuantities {
    FreeBoundShortcut,
    Regular { e_lambda: f64, g_lambda: f64, p_index: u64 },
}

/// E_Λ = (SK)^{1/3}|Λ|^{2/3}, p = ⌊E⁻/(2S)⌋ + 2, G_Λ = E_Λ(c/16 · E_Λ/(SK) − 1).
pub fn proof_quantities(s: f64, k: f64, volume: f64, c: f64, e_minus: f64) -> Result<ProofQuantities> {
    if !(s >= 0.0 && k >= 0.0 && volume > 0.0 && e_minus >= 0.0) {
        return Err(Error::Invalid("S, K, E- must be non-negative and the volume positive".into()));
    }
    if s * k == 0.0 {
        return Ok(ProofQuantities::FreeBoundShortcut);
    }
    let sk = s * k;
    let e_lambda = sk.cbrt() * volume.powf(2.0 / 3.0);
    let p_index = (e_minus / (2.0 * s)).floor() as u64 + 2;
    let g_lambda = e_lambda * (c / 16.0 * e_lambda / sk - 1.0);
    Ok(ProofQuantities::Regular { e_lambda, g_lambda, p_index })
}

/// Outcome of the core-pair verification.
#[derive(Clone, Debug, PartialEq)]
pub struct CorePairCertificate {
    pub p: u64,
    pub s: f64,
    pub k: f64,
    pub removals_per_level: u64,
    pub pairs_found: u64,
    pub pairs_required: u64,
    pub replay_ok: bool,
    pub v2_total: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Verifies v2(x⃗) ≥ (c/4) p(p−1) S/K for a configuration with
/// E^{v−}(x⃗, ω) > pS, and replays the extraction of core pairs cell by cell.
/// The estimates are first refined with the configuration's own points.
pub fn core_pair_verify(
    xs: &[Point],
    field: &dyn Fn(&Point) -> f64,
    pot: &PotentialSpec,
    bx: &SimBox,
    sups: &SupEstimates,
    p: u64,
) -> Result<CorePairCertificate> {
    check_core_partition(bx, pot.core())?;
    if p < 1 {
        return Err(Error::Hypothesis("p must be at least 1".into()));
    }
    if xs.iter().any(|x| !bx.contains(x)) {
        return Err(Error::Hypothesis("configuration leaves the box".into()));
    }
    let mut sups = sups.clone();
    sups.refine(bx, field, xs);
    let (s, k) = (sups.s, sups.k);
    if k <= 0.0 {
        return Err(Error::Hypothesis("K must be positive".into()));
    }
    let values: Vec<f64> = xs.iter().map(field).collect();
    let e: f64 = values.iter().sum();
    if e <= p as f64 * s {
        return Err(Error::Hypothesis(format!("E- = {e} does not exceed pS = {}", p as f64 * s)));
    }
    let c = pot.core_strength();
    let rhs = c / 4.0 * (p * (p - 1)) as f64 * s / k;
    let mut v2_total = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            v2_total += pot.v2(distance(&xs[i], &xs[j]));
        }
    }

    let m = (s / k).floor() as u64;
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); sups.cell_sup.len()];
    for (i, x) in xs.iter().enumerate() {
        cells[bx.cell_slot(x).expect("inside box")].push(i);
    }
    let mut remaining = e;
    let mut pairs = 0u64;
    let mut replay_ok = true;
    'levels: for level in (2..=p).rev() {
        for _ in 0..m {
            if remaining <= (level - 1) as f64 * s {
                replay_ok = false;
                break 'levels;
            }
            let (slot, members) = cells.iter().enumerate().max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0))).expect("cells");
            if (members.len() as u64) < level {
                replay_ok = false;
                break 'levels;
            }
            let removed = *members.last().expect("nonempty");
            for &j in &members[..members.len() - 1] {
                if distance(&xs[removed], &xs[j]) > pot.core() {
                    replay_ok = false;
                }
            }
            pairs += members.len() as u64 - 1;
            remaining -= values[removed];
            cells[slot].pop();
        }
    }
    let pairs_required = m * p * (p - 1) / 2;
    let replay_ok = replay_ok && pairs >= pairs_required;
    let passed = v2_total >= rhs && replay_ok;
    Ok(CorePairCertificate { p, s, k, removals_per_level: m, pairs_found: pairs, pairs_required, replay_ok, v2_total, rhs, passed })
}

/// Piles particles into cells, weighted by the cell suprema, until the
/// configuration satisfies E^{v−}(x⃗, ω) > pS for the refined estimates.
pub fn pile_configuration(bx: &SimBox, field: &dyn Fn(&Point) -> f64, sups: &SupEstimates, p: u64, rng: &mut StreamRng) -> Vec<Point> {
    let grid = bx.grid();
    let cells = bx.cells();
    let total: f64 = sups.cell_sup.iter().sum();
    let mut sups = sups.clone();
    let mut xs: Vec<Point> = Vec::new();
    let mut e = 0.0;
    while e <= p as f64 * sups.s {
        let mut t = rng.random::<f64>() * total;
        let mut slot = cells.len() - 1;
        for (i, w) in sups.cell_sup.iter().enumerate() {
            if t < *w {
                slot = i;
                break;
            }
            t -= w;
        }
        let lo = grid.lower_corner(&cells[slot]);
        let mut x = lo;
        for xi in x.iter_mut().take(bx.dim()) {
            *xi += bx.delta() * rng.random::<f64>();
        }
        let v = field(&x);
        sups.refine(bx, field, &[x]);
        e += v;
        xs.push(x);
    }
    xs
}

/// Decision for a finite probe of a limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    TendingToZero,
    Inconclusive,
    Diverging,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::TendingToZero => "tending-to-zero",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Diverging => "diverging",
        }
    }
}

/// A probed expression evaluated along increasing abscissae.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSeries {
    pub name: String,
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: Option<f64>,
    pub verdict: Verdict,
}

/// Slope threshold of the verdict rule.
pub const SLOPE_THRESHOLD: f64 = 0.05;

/// Least-squares slope of log(value) against log(abscissa) over the last
/// ⌈n/2⌉ points: ≤ −0.05 tends to zero, ≥ 0.05 diverges, otherwise
/// inconclusive. All-zero series tend to zero.
pub fn verdict_of(abscissae: &[f64], values: &[f64]) -> (Verdict, Option<f64>) {
    if values.iter().all(|&v| v == 0.0) {
        return (Verdict::TendingToZero, None);
    }
    let n = values.len();
    let start = n - n.div_ceil(2);
    let xs: Vec<f64> = abscissae[start..].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = values[start..].iter().map(|y| y.ln()).collect();
    if values[start..].iter().any(|&v| v <= 0.0 || !v.is_finite()) || xs.len() < 2 {
        return (Verdict::Inconclusive, None);
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let verdict = if slope <= -SLOPE_THRESHOLD {
        Verdict::TendingToZero
    } else if slope >= SLOPE_THRESHOLD {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    };
    (verdict, Some(slope))
}

impl ProbeSeries {
    pub fn new(name: &str, abscissae: Vec<f64>, values: Vec<f64>) -> Self {
        let (verdict, slope) = verdict_of(&abscissae, &values);
        Self { name: name.to_string(), abscissae, values, slope, verdict }
    }
}

fn check_abscissae(xs: &[f64]) -> Result<()> {
    if xs.len() < 4 {
        return Err(Error::Invalid("probes need at least 4 abscissae".into()));
    }
    if xs[0] <= 0.0 || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("probe abscissae must be positive and strictly increasing".into()));
    }
    if xs[xs.len() - 1] / xs[0] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Invalid("probe abscissae must span at least two decades".into()));
    }
    Ok(())
}

fn cumulative_integral(f: &dyn Fn(f64) -> f64, xs: &[f64], kinks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &x in xs {
        acc += integrate_breaks(&f, &radial_breaks(prev, x, kinks), 1e-10, 0.0).value;
        out.push(acc);
        prev = x;
    }
    out
}

/// Evaluates g(R)·(∫_0^R W)/R and g(R)²·(∫_0^R V)/R; for g ≡ 0 the second
/// series is (∫_0^R V)/R.
pub fn probe_growth_balance(g: &GrowthFunction, env: &EnvelopeSpec, r_values: &[f64]) -> Result<(ProbeSeries, ProbeSeries)> {
    check_abscissae(r_values)?;
    big_w(env, g, 0.0)?;
    let mut kinks = env.kinks();
    kinks.extend(g.kinks());
    let w = |s: f64| big_w(env, g, s).unwrap_or(f64::NAN);
    let v = |s: f64| big_v(env, s).unwrap_or(f64::NAN);
    let iw = cumulative_integral(&w, r_values, &kinks);
    let iv = cumulative_integral(&v, r_values, &kinks);
    let zero = matches!(g, GrowthFunction::Zero);
    let first: Vec<f64> = r_values.iter().zip(&iw).map(|(&r, i)| g.eval(r) * i / r).collect();
    let second: Vec<f64> = r_values
        .iter()
        .zip(&iv)
        .map(|(&r, i)| if zero { i / r } else { g.eval(r).powi(2) * i / r })
        .collect();
    Ok((ProbeSeries::new("growth-times-mean-w", r_values.to_vec(), first), ProbeSeries::new("growth-squared-times-mean-v", r_values.to_vec(), second)))
}

/// Choice of the margin function h(L).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Margin {
    TwoThirds,
    Sqrt,
    Power(f64),
}

impl Margin {
    pub fn eval(&self, l: f64) -> f64 {
        match self {
            Margin::TwoThirds => l.powf(2.0 / 3.0),
            Margin::Sqrt => l.sqrt(),
            Margin::Power(e) => l.powf(*e),
        }
    }
}

/// Evaluates (1 + g(L))·V(h(L)).
pub fn probe_margin_decay(g: &GrowthFunction, env: &EnvelopeSpec, h: Margin, l_values: &[f64]) -> Result<ProbeSeries> {
    check_abscissae(l_values)?;
    let values = l_values.iter().map(|&l| Ok((1.0 + g.eval(l)) * big_v(env, h.eval(l))?)).collect::<Result<Vec<f64>>>()?;
    Ok(ProbeSeries::new("growth-times-v-of-margin", l_values.to_vec(), values))
}

/// Passes iff q < min(1, p)/2; q = 0 always passes.
pub fn power_law_gate(p: f64, q: f64) -> Result<bool> {
    if !(p > 0.0) || !(q >= 0.0) {
        return Err(Error::Invalid(format!("gate needs p > 0 and q >= 0, got p={p}, q={q}")));
    }
    Ok(q == 0.0 || q < 0.5 * p.min(1.0))
}

/// Analytic upper bound on S·K/|Λ| for a box of half-size L built from the
/// envelope chain: S ≤ ρ̃ K_δ ∫_Λ F(d_x) dx with F = W + (1 + d g(L)) V and
/// K_δ = C_δ²/δ^d, and K ≤ κ̃ (1 + g(L)).
#[allow(clippy::too_many_arguments)]
pub fn sk_analytic(env: &EnvelopeSpec, g: &GrowthFunction, rho_box: f64, c_delta_box: f64, delta_box: f64, kappa: f64, half_size: f64) -> Result<f64> {
    let d = env.dim();
    let gl = g.eval(half_size);
    big_w(env, g, 0.0)?;
    let f = |r: f64| {
        let fr = big_w(env, g, r).unwrap_or(f64::NAN) + (1.0 + d as f64 * gl) * big_v(env, r).unwrap_or(f64::NAN);
        fr * 2.0 * d as f64 * (2.0 * (half_size - r)).powi(d as i32 - 1)
    };
    let mut kinks = env.kinks();
    kinks.extend(g.kinks());
    let shell = integrate_breaks(&f, &radial_breaks(0.0, half_size, &kinks), 1e-10, 0.0).value;
    let k_delta = c_delta_box * c_delta_box / delta_box.powi(d as i32);
    let s_bound = rho_box * k_delta * shell;
    let k_bound = kappa * (1.0 + gl);
    Ok(s_bound * k_bound / (2.0 * half_size).powi(d as i32))
}

/// Measured S·K/|Λ| along a box series with the analytic bound per box.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendSk {
    pub measured: ProbeSeries,
    pub analytic: Vec<f64>,
    pub s: Vec<f64>,
    pub k: Vec<f64>,
}

impl TrendSk {
    pub fn strictly_decreasing(&self) -> bool {
        self.measured.values.windows(2).all(|w| w[1] < w[0])
    }

    pub fn below_analytic(&self) -> bool {
        self.measured.values.iter().zip(&self.analytic).all(|(m, a)| m <= a)
    }
}
