//! log Ξ by thermodynamic integration of ⟨N⟩ over ln λ.

use super::gcmc::{gcmc_run_from, GcmcParams, GcmcRun, ParticleState};
use super::System;
use crate::error::{Error, Result};
use crate::geometry::{distance, Point, ORIGIN};
use crate::potential::boltzmann;
use crate::quadrature::integrate;
use crate::rng::{tagged, Tag};
use rand::Rng;

/// λ_k = λ·2^{−octaves(1 − k/(n−1))} for k = 0..n.
pub fn lambda_grid(lambda: f64, n_points: usize, octaves: f64) -> Result<Vec<f64>> {
    if n_points < 5 || !(n_points - 1).is_multiple_of(4) {
        return Err(Error::Invalid(format!("number of integration points must be 4m+1 with m >= 1, got {n_points}")));
    }
    if !(lambda > 0.0 && octaves > 0.0) {
        return Err(Error::Invalid("lambda and octaves must be positive".into()));
    }
    let last = (n_points - 1) as f64;
    Ok((0..n_points).map(|k| lambda * (-(octaves * (1.0 - k as f64 / last)) * std::f64::consts::LN_2).exp()).collect())
}

/// Parameters of [`pressure_by_integration`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationParams {
    pub lambda: f64,
    pub n_points: usize,
    pub octaves: f64,
    pub burn_in: usize,
    pub moves: usize,
    pub batches: usize,
    pub seed: u64,
    /// First stream coordinate of the chains; the grid index is the second.
    pub stream: u64,
    pub anchor_samples: usize,
    pub record_every: usize,
}

impl IntegrationParams {
    pub fn new(lambda: f64, moves: usize, seed: u64) -> Self {
        Self {
            lambda,
            n_points: 17,
            octaves: 8.0,
            burn_in: moves / 10,
            moves,
            batches: 32,
            seed,
            stream: 0,
            anchor_samples: 100_000,
            record_every: 0,
        }
    }
}

/// Outcome of [`pressure_by_integration`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegrationResult {
    pub log_xi: f64,
    pub beta_p: f64,
    /// Total error on βp_Λ.
    pub error: f64,
    pub stat_error: f64,
    pub discretization_error: f64,
    pub anchor: f64,
    pub anchor_error: f64,
    pub grid: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub mean_n_error: Vec<f64>,
    /// Running log Ξ at each grid point by the trapezoid rule.
    pub cumulative: Vec<f64>,
    pub runs: Vec<GcmcRun>,
    pub warnings: Vec<String>,
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Z₁ = ∫_Λ e^{−βE(x)} dx, by quadrature in d = 1 and sampling otherwise,
/// and Z₂ = ∫∫ e^{−β(E(x)+E(y)+v(x−y))} by uniform sampling.
fn anchor_integrals(sys: &System, samples: usize, seed: u64, stream: u64) -> (f64, f64, f64) {
    let mut rng = tagged(seed, Tag::Anchor, stream, 0);
    let d = sys.bx.dim();
    let l = sys.bx.half_size();
    let vol = sys.bx.volume();
    let draw = |rng: &mut crate::rng::StreamRng| {
        let mut x: Point = ORIGIN;
        for c in x.iter_mut().take(d) {
            *c = l * (2.0 * rng.random::<f64>() - 1.0);
        }
        x
    };
    let (mut s1, mut s1sq, mut s2) = (0.0, 0.0, 0.0);
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let ex = sys.field.at(&x);
        let ey = sys.field.at(&y);
        let w = boltzmann(sys.beta, ex);
        s1 += w;
        s1sq += w * w;
        s2 += boltzmann(sys.beta, ex + ey + sys.pair(distance(&x, &y)));
    }
    let n = samples as f64;
    let z2 = s2 / n * vol * vol;
    if d == 1 {
        let q = integrate(&|x| boltzmann(sys.beta, sys.field.at(&[x, 0.0, 0.0])), -l, l, 1e-12, 0.0);
        return (q.value, q.error, z2);
    }
    let m1 = s1 / n;
    let se1 = ((s1sq / n - m1 * m1).max(0.0) / (n - 1.0)).sqrt();
    (m1 * vol, se1 * vol, z2)
}

/// log Ξ(λ) = log Ξ(λ_0) + ∫ ⟨N⟩_μ d ln μ over the grid of [`lambda_grid`];
/// log Ξ(λ_0) is λ_0 Z₁ with the second virial term counted as error.
pub fn pressure_by_integration(sys: &System, params: &IntegrationParams) -> Result<IntegrationResult> {
    let grid = lambda_grid(params.lambda, params.n_points, params.octaves)?;
    if params.anchor_samples < 2 {
        return Err(Error::Invalid("anchor_samples must be at least 2".into()));
    }
    let n = grid.len();
    let h = params.octaves * std::f64::consts::LN_2 / (n - 1) as f64;
    let mut runs = Vec::with_capacity(n);
    let mut mean_n = Vec::with_capacity(n);
    let mut mean_n_error = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    let mut state = ParticleState::default();
    for (k, &lam) in grid.iter().enumerate() {
        let gp = GcmcParams {
            lambda: lam,
            burn_in: params.burn_in,
            moves: params.moves,
            seed: params.seed,
            stream: (params.stream, k as u64),
            batches: params.batches,
            record_every: params.record_every,
            initial_step: 0.5,
            target_acceptance: 0.4,
        };
        let run = gcmc_run_from(sys, &gp, state)?;
        state = run.state.clone();
        mean_n.push(run.mean_n);
        mean_n_error.push(run.mean_n_error);
        for w in &run.warnings {
            warnings.push(format!("lambda {lam:e}: {w}"));
        }
        if run.drift > 1e-8 {
            warnings.push(format!("lambda {lam:e}: energy drift {:e}", run.drift));
        }
        runs.push(run);
    }
    let w = simpson_weights(n, h);
    let integral: f64 = w.iter().zip(&mean_n).map(|(w, m)| w * m).sum();
    let stat_integral = w.iter().zip(&mean_n_error).map(|(w, e)| (w * e).powi(2)).sum::<f64>().sqrt();
    let coarse: Vec<f64> = mean_n.iter().step_by(2).copied().collect();
    let wc = simpson_weights(coarse.len(), 2.0 * h);
    let integral_coarse: f64 = wc.iter().zip(&coarse).map(|(w, m)| w * m).sum();
    let discretization = (integral - integral_coarse).abs() / 15.0;
    let (z1, z1_err, z2) = anchor_integrals(sys, params.anchor_samples, params.seed, params.stream);
    let l0 = grid[0];
    let anchor = l0 * z1;
    let virial = (l0 * l0 * 0.5 * (z2 - z1 * z1)).abs();
    let anchor_stat = l0 * z1_err;
    let log_xi = anchor + integral;
    let mut cumulative = vec![anchor];
    for k in 1..n {
        let prev = cumulative[k - 1];
        cumulative.push(prev + 0.5 * h * (mean_n[k - 1] + mean_n[k]));
    }
    let vol = sys.bx.volume();
    let stat = (stat_integral.powi(2) + anchor_stat.powi(2)).sqrt();
    let total = stat + discretization + virial;
    Ok(IntegrationResult {
        log_xi,
        beta_p: log_xi / vol,
        error: total / vol,
        stat_error: stat / vol,
        discretization_error: (discretization + virial) / vol,
        anchor,
        anchor_error: anchor_stat + virial,
        grid,
        mean_n,
        mean_n_error,
        cumulative,
        runs,
        warnings,
    })
}
