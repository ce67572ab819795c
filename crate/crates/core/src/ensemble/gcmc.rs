//! Grand-canonical Metropolis sampling with insertion, deletion and
//! translation moves.

use super::System;
use crate::error::{Error, Result};
use crate::geometry::{distance, Point, ORIGIN};
use crate::rng::{tagged, StreamRng, Tag};
use rand::Rng;

/// The three move types, chosen with equal probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Insert,
    Delete,
    Translate,
}

/// Metropolis acceptance probability of a move from a state with `n_before`
/// particles and energy change `delta_u`.
pub fn acceptance_probability(kind: MoveKind, beta: f64, lambda: f64, volume: f64, n_before: usize, delta_u: f64) -> f64 {
    if delta_u == f64::INFINITY {
        return 0.0;
    }
    let boltz = (-beta * delta_u).exp();
    let ratio = match kind {
        MoveKind::Insert => lambda * volume / (n_before as f64 + 1.0) * boltz,
        MoveKind::Delete => {
            if n_before == 0 {
                return 0.0;
            }
            n_before as f64 / (lambda * volume) * boltz
        }
        MoveKind::Translate => boltz,
    };
    if ratio.is_nan() {
        0.0
    } else {
        ratio.min(1.0)
    }
}

/// Particle positions with the running total energy.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParticleState {
    pub xs: Vec<Point>,
    pub energy: f64,
}

impl ParticleState {
    pub fn new(sys: &System, xs: Vec<Point>) -> Self {
        let energy = sys.energy(&xs);
        Self { xs, energy }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Energy of a particle at `x` against every stored particle except `skip`.
    pub fn particle_energy(&self, sys: &System, x: &Point, skip: Option<usize>) -> f64 {
        let mut e = sys.field.at(x);
        for (j, y) in self.xs.iter().enumerate() {
            if Some(j) == skip {
                continue;
            }
            e += sys.pair(distance(x, y));
            if e == f64::INFINITY {
                return e;
            }
        }
        e
    }

    /// Relative difference between the running and recomputed energies.
    pub fn drift(&self, sys: &System) -> f64 {
        let exact = sys.energy(&self.xs);
        if exact == self.energy {
            return 0.0;
        }
        (self.energy - exact).abs() / exact.abs().max(1.0)
    }
}

/// Parameters of [`gcmc_run`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GcmcParams {
    pub lambda: f64,
    pub burn_in: usize,
    pub moves: usize,
    pub seed: u64,
    /// Stream coordinates within [`Tag::Chain`].
    pub stream: (u64, u64),
    pub batches: usize,
    /// Record a sample every this many production moves; 0 records nothing.
    pub record_every: usize,
    pub initial_step: f64,
    pub target_acceptance: f64,
}

impl GcmcParams {
    pub fn new(lambda: f64, burn_in: usize, moves: usize, seed: u64) -> Self {
        Self {
            lambda,
            burn_in,
            moves,
            seed,
            stream: (0, 0),
            batches: 32,
            record_every: 0,
            initial_step: 0.5,
            target_acceptance: 0.4,
        }
    }
}

/// A recorded point of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub move_index: usize,
    pub n: usize,
    pub u: f64,
}

/// Outcome of [`gcmc_run`].
#[derive(Clone, Debug, PartialEq)]
pub struct GcmcRun {
    pub mean_n: f64,
    /// Batch-means standard error of `mean_n`.
    pub mean_n_error: f64,
    pub var_n: f64,
    pub mean_u: f64,
    /// Acceptance rates of insertion, deletion and translation.
    pub acceptance: [f64; 3],
    pub step: f64,
    pub drift: f64,
    pub samples: Vec<Sample>,
    pub warnings: Vec<String>,
    pub state: ParticleState,
}

struct Chain<'s, 'a> {
    sys: &'s System<'a>,
    state: ParticleState,
    rng: StreamRng,
    lambda: f64,
    volume: f64,
    step: f64,
    accepted: [u64; 3],
    attempted: [u64; 3],
}

impl Chain<'_, '_> {
    fn uniform_point(&mut self) -> Point {
        let l = self.sys.bx.half_size();
        let mut x = ORIGIN;
        for c in x.iter_mut().take(self.sys.bx.dim()) {
            *c = l * (2.0 * self.rng.random::<f64>() - 1.0);
        }
        x
    }

    fn step_once(&mut self) {
        let kind = match self.rng.random_range(0..3u8) {
            0 => MoveKind::Insert,
            1 => MoveKind::Delete,
            _ => MoveKind::Translate,
        };
        let slot = kind as usize;
        let n = self.state.len();
        match kind {
            MoveKind::Insert => {
                self.attempted[slot] += 1;
                let x = self.uniform_point();
                let du = self.state.particle_energy(self.sys, &x, None);
                let p = acceptance_probability(kind, self.sys.beta, self.lambda, self.volume, n, du);
                if self.rng.random::<f64>() < p {
                    self.state.xs.push(x);
                    self.state.energy += du;
                    self.accepted[slot] += 1;
                }
            }
            MoveKind::Delete => {
                if n == 0 {
                    return;
                }
                self.attempted[slot] += 1;
                let i = self.rng.random_range(0..n);
                let x = self.state.xs[i];
                let du = -self.state.particle_energy(self.sys, &x, Some(i));
                let p = acceptance_probability(kind, self.sys.beta, self.lambda, self.volume, n, du);
                if self.rng.random::<f64>() < p {
                    self.state.xs.swap_remove(i);
                    self.state.energy += du;
                    self.accepted[slot] += 1;
                }
            }
            MoveKind::Translate => {
                if n == 0 {
                    return;
                }
                self.attempted[slot] += 1;
                let i = self.rng.random_range(0..n);
                let old = self.state.xs[i];
                let mut new = old;
                for c in new.iter_mut().take(self.sys.bx.dim()) {
                    *c += self.step * (2.0 * self.rng.random::<f64>() - 1.0);
                }
                if !self.sys.bx.contains(&new) {
                    return;
                }
                let e_old = self.state.particle_energy(self.sys, &old, Some(i));
                let e_new = self.state.particle_energy(self.sys, &new, Some(i));
                let du = e_new - e_old;
                let p = acceptance_probability(kind, self.sys.beta, self.lambda, self.volume, n, du);
                if self.rng.random::<f64>() < p {
                    self.state.xs[i] = new;
                    self.state.energy += du;
                    self.accepted[slot] += 1;
                }
            }
        }
    }
}

/// Runs a chain from the empty configuration: burn-in with step tuning,
/// then production with a frozen step.
pub fn gcmc_run(sys: &System, params: &GcmcParams) -> Result<GcmcRun> {
    gcmc_run_from(sys, params, ParticleState::default())
}

/// As [`gcmc_run`], starting from a given state.
pub fn gcmc_run_from(sys: &System, params: &GcmcParams, initial: ParticleState) -> Result<GcmcRun> {
    if !(params.lambda > 0.0 && params.lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be positive, got {}", params.lambda)));
    }
    if params.moves == 0 || params.batches == 0 || params.moves < params.batches {
        return Err(Error::Invalid("moves must be at least the number of batches".into()));
    }
    let l = sys.bx.half_size();
    let mut chain = Chain {
        sys,
        state: initial,
        rng: tagged(params.seed, Tag::Chain, params.stream.0, params.stream.1),
        lambda: params.lambda,
        volume: sys.bx.volume(),
        step: params.initial_step.clamp(1e-4, 2.0 * l),
        accepted: [0; 3],
        attempted: [0; 3],
    };
    let mut window = (0u64, 0u64);
    for _ in 0..params.burn_in {
        chain.step_once();
        let t = (chain.attempted[2], chain.accepted[2]);
        if t.0 - window.0 >= 200 {
            let rate = (t.1 - window.1) as f64 / (t.0 - window.0) as f64;
            chain.step = if rate > params.target_acceptance { chain.step * 1.1 } else { chain.step / 1.1 };
            chain.step = chain.step.clamp(1e-4, 2.0 * l);
            window = t;
        }
    }
    chain.accepted = [0; 3];
    chain.attempted = [0; 3];
    let batch_len = params.moves / params.batches;
    let used = batch_len * params.batches;
    let mut batch_means = Vec::with_capacity(params.batches);
    let (mut sum_n, mut sum_n2, mut sum_u) = (0.0, 0.0, 0.0);
    let mut batch_sum = 0.0;
    let mut samples = Vec::new();
    for m in 0..used {
        chain.step_once();
        let n = chain.state.len() as f64;
        sum_n += n;
        sum_n2 += n * n;
        sum_u += chain.state.energy;
        batch_sum += n;
        if (m + 1) % batch_len == 0 {
            batch_means.push(batch_sum / batch_len as f64);
            batch_sum = 0.0;
        }
        if params.record_every > 0 && m % params.record_every == 0 {
            samples.push(Sample { move_index: m, n: chain.state.len(), u: chain.state.energy });
        }
    }
    let total = used as f64;
    let mean_n = sum_n / total;
    let var_n = (sum_n2 / total - mean_n * mean_n).max(0.0);
    let k = batch_means.len() as f64;
    let bm = batch_means.iter().sum::<f64>() / k;
    let bvar = batch_means.iter().map(|b| (b - bm).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    let rate = |i: usize| {
        if chain.attempted[i] == 0 {
            0.0
        } else {
            chain.accepted[i] as f64 / chain.attempted[i] as f64
        }
    };
    let acceptance = [rate(0), rate(1), rate(2)];
    let exchange_attempts = chain.attempted[0] + chain.attempted[1];
    let exchange = if exchange_attempts == 0 {
        0.0
    } else {
        (chain.accepted[0] + chain.accepted[1]) as f64 / exchange_attempts as f64
    };
    let mut warnings = Vec::new();
    if !(0.05..=0.95).contains(&exchange) {
        warnings.push(format!("exchange acceptance {exchange:.3} outside [0.05, 0.95]"));
    }
    if chain.attempted[2] > 0 && !(0.05..=0.95).contains(&acceptance[2]) {
        warnings.push(format!("translation acceptance {:.3} outside [0.05, 0.95]", acceptance[2]));
    }
    let drift = chain.state.drift(sys);
    Ok(GcmcRun {
        mean_n,
        mean_n_error: (bvar / k).sqrt(),
        var_n,
        mean_u: sum_u / total,
        acceptance,
        step: chain.step,
        drift,
        samples,
        warnings,
        state: chain.state,
    })
}
