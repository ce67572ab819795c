//! Partition functions and pressures: the exact hard-rod oracle, truncated
//! series, grand-canonical Monte Carlo and thermodynamic integration.

pub mod gcmc;
pub mod integration;
pub mod series;
pub mod tonks;

use crate::boundary::{config_field, BoundaryConfiguration, Kernel};
use crate::bounds::big_v;
use crate::error::{Error, Result};
use crate::field::ExternalField;
use crate::geometry::{distance, Point, SimBox};
use crate::potential::{EnvelopeSpec, PotentialSpec};

pub use gcmc::{acceptance_probability, gcmc_run, GcmcParams, GcmcRun, MoveKind, ParticleState, Sample};
pub use integration::{lambda_grid, pressure_by_integration, IntegrationParams, IntegrationResult};
pub use series::{xi_truncated, SeriesParams, SeriesResult};
pub use tonks::{tonks_log_xi, tonks_mean_number, tonks_reference};

/// Relative size of the neglected pair tail, in units of c·a^{−d}.
pub const PAIR_TAIL_TOL: f64 = 1e-4;

/// A box, a pair potential, the external field of ω and the inverse temperature.
#[derive(Clone, Copy, Debug)]
pub struct System<'a> {
    pub bx: SimBox,
    pub pot: &'a PotentialSpec,
    pub field: &'a ExternalField,
    pub beta: f64,
    pub pair_cutoff: f64,
    pub pair_tail: f64,
}

impl<'a> System<'a> {
    /// Chooses the pair cutoff: the range of v if it has one, otherwise the
    /// radius where V falls below 1e−4·c·a^{−d}, capped at the box diagonal.
    pub fn new(bx: SimBox, pot: &'a PotentialSpec, env: &EnvelopeSpec, field: &'a ExternalField, beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be non-negative, got {beta}")));
        }
        if pot.dim() != bx.dim() {
            return Err(Error::Invalid("potential and box dimensions differ".into()));
        }
        let diagonal = 2.0 * bx.half_size() * (bx.dim() as f64).sqrt();
        let (cutoff, tail) = match pot.range() {
            Some(r) => (r.min(diagonal), 0.0),
            None => {
                let target = PAIR_TAIL_TOL * pot.core_strength() * pot.core().powi(-(bx.dim() as i32));
                let (mut lo, mut hi) = (0.0, env.range().max(pot.core()));
                while big_v(env, hi)? > target {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if big_v(env, mid)? <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if hi >= diagonal {
                    (diagonal, 0.0)
                } else {
                    (hi, big_v(env, hi)?)
                }
            }
        };
        Ok(Self { bx, pot, field, beta, pair_cutoff: cutoff, pair_tail: tail })
    }

    /// v(r) with the cutoff applied.
    #[inline]
    pub fn pair(&self, r: f64) -> f64 {
        if r <= self.pair_cutoff {
            self.pot.value(r)
        } else {
            0.0
        }
    }

    /// Pair energy plus external field of a configuration, +∞ on a core overlap.
    pub fn energy(&self, xs: &[Point]) -> f64 {
        let mut e = 0.0;
        for i in 0..xs.len() {
            e += self.field.at(&xs[i]);
            for j in (i + 1)..xs.len() {
                e += self.pair(distance(&xs[i], &xs[j]));
                if e == f64::INFINITY {
                    return e;
                }
            }
        }
        e
    }
}

/// Σ_{i<j} v(x_i − x_j) + Σ_i E_Λ^v(x_i, ω), summed exactly.
pub fn total_energy(bx: &SimBox, pot: &PotentialSpec, env: &EnvelopeSpec, xs: &[Point], omega: &BoundaryConfiguration) -> Result<f64> {
    let mut e = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            e += pot.value(distance(&xs[i], &xs[j]));
        }
    }
    if e == f64::INFINITY {
        return Ok(e);
    }
    Ok(e + config_field(bx, omega, pot, env, Kernel::V, xs)?)
}

/// βp_Λ = log Ξ / |Λ|.
pub fn pressure_finite(log_xi: f64, bx: &SimBox) -> Result<f64> {
    if !log_xi.is_finite() {
        return Err(Error::Invalid(format!("log Xi must be finite, got {log_xi}")));
    }
    Ok(log_xi / bx.volume())
}

/// How a pressure was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    GcmcIntegration,
    TonksOracle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::GcmcIntegration => "gcmc-integration",
            Method::TonksOracle => "tonks-oracle",
        }
    }

    /// Whether the error is a rigorous bound or a statistical estimate.
    pub fn error_kind(&self) -> &'static str {
        match self {
            Method::Series => "truncation-bound-plus-statistical",
            Method::GcmcIntegration => "statistical-estimate",
            Method::TonksOracle => "exact",
        }
    }
}

/// A value of βp_Λ with its error and metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureEstimate {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub beta: f64,
    pub lambda: f64,
    pub half_size: f64,
    pub omega_id: String,
    pub seed: u64,
    pub flags: Vec<String>,
    pub metadata: Vec<(String, String)>,
}

impl PressureEstimate {
    pub const CSV_HEADER: [&'static str; 8] = ["beta", "lambda", "L", "omega_id", "method", "beta_p", "error", "flags"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            fmt17(self.beta),
            fmt17(self.lambda),
            fmt17(self.half_size),
            self.omega_id.clone(),
            self.method.name().to_string(),
            fmt17(self.value),
            fmt17(self.error),
            self.flags.join(";"),
        ]
    }
}

/// Formats a number with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ORIGIN;

    #[test]
    fn total_energy_examples() {
        let bx = SimBox::new(1, 2.0, 0.5).unwrap();
        let hard = PotentialSpec::hard_rod(1, 1.0).unwrap();
        let env = EnvelopeSpec::power_law(1, 0.0, 1.0, 0.0, 1.0).unwrap();
        let empty = BoundaryConfiguration::empty(1);
        assert_eq!(total_energy(&bx, &hard, &env, &[], &empty).unwrap(), 0.0);
        assert_eq!(total_energy(&bx, &hard, &env, &[ORIGIN], &empty).unwrap(), 0.0);
        assert_eq!(total_energy(&bx, &hard, &env, &[ORIGIN, [0.5, 0.0, 0.0]], &empty).unwrap(), f64::INFINITY);
    }

    #[test]
    fn pressure_finite_examples() {
        let bx = SimBox::new(1, 2.0, 0.5).unwrap();
        assert_eq!(pressure_finite(2.0, &bx).unwrap(), 0.5);
        assert_eq!(pressure_finite(0.0, &bx).unwrap(), 0.0);
        assert!(pressure_finite(f64::INFINITY, &bx).is_err());
    }

    #[test]
    fn cutoff_covers_box_for_slow_tails() {
        let bx = SimBox::new(1, 8.0, 0.5).unwrap();
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let f = ExternalField::zero(&pot, &env, Kernel::V);
        let sys = System::new(bx, &pot, &env, &f, 1.0).unwrap();
        assert_eq!(sys.pair_cutoff, 16.0);
        assert_eq!(sys.pair_tail, 0.0);
    }
}
