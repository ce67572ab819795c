//! External fields of a boundary configuration on a box, evaluated fast
//! enough for Monte Carlo, and the truncation radius of ω.

use crate::boundary::{field_sum, generate_boundary, BoundaryConfiguration, GenerationMode, GrowthFunction, Kernel};
use crate::bounds::{big_v, big_w};
use crate::error::{Error, Result};
use crate::geometry::{Point, SimBox};
use crate::potential::{EnvelopeSpec, PotentialSpec};

/// Spacing of the interpolation table for the far part of a field.
pub const TABLE_SPACING: f64 = 0.02;
/// Margin beyond the kernel's last kink that separates near from far points.
pub const NEAR_MARGIN: f64 = 2.0;

#[derive(Clone, Debug)]
enum Far {
    None,
    Direct(Vec<Point>),
    Table { x0: f64, h: f64, values: Vec<f64> },
}

/// E_Λ^f(·, ω) on a fixed box. Points of ω close to Λ are summed exactly;
/// in one dimension the smooth contribution of distant points is tabulated
/// and interpolated with four-point Lagrange polynomials.
#[derive(Clone, Debug)]
pub struct ExternalField {
    pot: PotentialSpec,
    env: EnvelopeSpec,
    kernel: Kernel,
    near: Vec<Point>,
    far: Far,
    far_count: usize,
}

fn distance_to_box(bx: &SimBox, y: &Point) -> f64 {
    let l = bx.half_size();
    y.iter().take(bx.dim()).map(|c| (c.abs() - l).max(0.0).powi(2)).sum::<f64>().sqrt()
}

impl ExternalField {
    /// The zero field of the free boundary.
    pub fn zero(pot: &PotentialSpec, env: &EnvelopeSpec, kernel: Kernel) -> Self {
        Self { pot: pot.clone(), env: env.clone(), kernel, near: Vec::new(), far: Far::None, far_count: 0 }
    }

    /// Builds the evaluator, tabulating the far part when it pays off.
    pub fn build(bx: &SimBox, omega: &BoundaryConfiguration, pot: &PotentialSpec, env: &EnvelopeSpec, kernel: Kernel) -> Self {
        Self::build_with(bx, omega, pot, env, kernel, true)
    }

    /// Builds the evaluator with every point summed exactly.
    pub fn exact(bx: &SimBox, omega: &BoundaryConfiguration, pot: &PotentialSpec, env: &EnvelopeSpec, kernel: Kernel) -> Self {
        Self::build_with(bx, omega, pot, env, kernel, false)
    }

    fn build_with(bx: &SimBox, omega: &BoundaryConfiguration, pot: &PotentialSpec, env: &EnvelopeSpec, kernel: Kernel, tabulate: bool) -> Self {
        let split = kernel.smooth_beyond(pot, env) + NEAR_MARGIN;
        let mut near = Vec::new();
        let mut far = Vec::new();
        for y in omega.points.iter().filter(|y| !bx.contains(y)) {
            if distance_to_box(bx, y) <= split {
                near.push(*y);
            } else {
                far.push(*y);
            }
        }
        let far_count = far.len();
        let n_nodes = (2.0 * bx.half_size() / TABLE_SPACING).ceil() as usize + 1;
        let far = if far.is_empty() {
            Far::None
        } else if tabulate && bx.dim() == 1 && far.len() > 8 && n_nodes >= 4 {
            let h = 2.0 * bx.half_size() / (n_nodes - 1) as f64;
            let x0 = -bx.half_size();
            let values = (0..n_nodes)
                .map(|i| {
                    let x = [x0 + i as f64 * h, 0.0, 0.0];
                    field_sum(&far, pot, env, kernel, &x)
                })
                .collect();
            Far::Table { x0, h, values }
        } else {
            Far::Direct(far)
        };
        Self { pot: pot.clone(), env: env.clone(), kernel, near, far, far_count }
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn near_count(&self) -> usize {
        self.near.len()
    }

    pub fn far_count(&self) -> usize {
        self.far_count
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.far, Far::Table { .. })
    }

    pub fn is_zero(&self) -> bool {
        self.near.is_empty() && matches!(self.far, Far::None)
    }

    /// Field at x ∈ Λ.
    #[inline]
    pub fn at(&self, x: &Point) -> f64 {
        let near = field_sum(&self.near, &self.pot, &self.env, self.kernel, x);
        let far = match &self.far {
            Far::None => 0.0,
            Far::Direct(points) => field_sum(points, &self.pot, &self.env, self.kernel, x),
            Far::Table { x0, h, values } => {
                let n = values.len();
                let t = (x[0] - x0) / h;
                let i = (t.floor() as i64).clamp(1, n as i64 - 3) as usize;
                let s = t - i as f64;
                let (f0, f1, f2, f3) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
                let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
                let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
                let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
                let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
                w0 * f0 + w1 * f1 + w2 * f2 + w3 * f3
            }
        };
        near + far
    }
}

/// Envelope bound ρ[W(r) + (1 + g(L)) V(r)] on the field of the points of a
/// class member beyond distance r.
pub fn tail_bound(env: &EnvelopeSpec, g: &GrowthFunction, rho: f64, half_size: f64, r: f64) -> Result<f64> {
    Ok(rho * (big_w(env, g, r)? + (1.0 + g.eval(half_size)) * big_v(env, r)?))
}

/// Declared class of boundary configurations and how to realise it around a box.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaClass {
    pub mode: GenerationMode,
    pub rho: f64,
    pub growth: GrowthFunction,
    pub delta: f64,
    /// Relative tail tolerance for the truncation radius.
    pub tail_tol: f64,
    /// Upper limit on the truncation radius.
    pub max_radius: f64,
}

impl OmegaClass {
    /// Smallest R with tail_bound(R) ≤ tail_tol · tail_bound(0), capped at `max_radius`.
    pub fn truncation_radius(&self, env: &EnvelopeSpec, half_size: f64) -> Result<f64> {
        Ok(self.tolerance_radius(env, half_size)?.min(self.max_radius))
    }

    /// tail_bound(R)/tail_bound(0): the relative size of the field of the points beyond R.
    pub fn relative_tail(&self, env: &EnvelopeSpec, half_size: f64, r: f64) -> Result<f64> {
        let scale = tail_bound(env, &self.growth, 1.0, half_size, 0.0)?;
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(tail_bound(env, &self.growth, 1.0, half_size, r)? / scale)
    }

    fn tolerance_radius(&self, env: &EnvelopeSpec, half_size: f64) -> Result<f64> {
        if !(self.max_radius > 0.0) {
            return Err(Error::Invalid(format!("maximal truncation radius must be positive, got {}", self.max_radius)));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::Invalid(format!("tail tolerance must lie in (0, 1), got {}", self.tail_tol)));
        }
        let scale = tail_bound(env, &self.growth, 1.0, half_size, 0.0)?;
        let target = self.tail_tol * scale;
        let f = |r: f64| tail_bound(env, &self.growth, 1.0, half_size, r);
        if let Some(s) = env.support() {
            if f(s)? <= target {
                let (mut lo, mut hi) = (0.0, s);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid)? <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(hi);
            }
        }
        let (mut lo, mut hi) = (0.0, env.range().max(1.0));
        while f(hi)? > target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::Invalid("truncation radius does not converge".into()));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid)? <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Generates ω with extent L + R_cut rounded up to the grid, returning it
    /// with the truncation radius.
    pub fn generate_for_box(&self, bx: &SimBox, env: &EnvelopeSpec, seed: u64) -> Result<(BoundaryConfiguration, f64)> {
        if matches!(self.mode, GenerationMode::Empty) {
            return Ok((BoundaryConfiguration::empty(bx.dim()), 0.0));
        }
        let r_cut = self.truncation_radius(env, bx.half_size())?;
        let extent = ((bx.half_size() + r_cut) / self.delta).ceil() * self.delta;
        let omega = generate_boundary(self.mode, bx.dim(), self.rho, &self.growth, self.delta, extent, seed)?;
        Ok((omega, extent - bx.half_size()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::external_field;
    use crate::geometry::ORIGIN;

    #[test]
    fn table_matches_exact_sum() {
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let bx = SimBox::new(1, 8.0, 0.5).unwrap();
        let class = OmegaClass { mode: GenerationMode::Saturated, rho: 4.0, growth: GrowthFunction::power(0.25).unwrap(), delta: 1.0, tail_tol: 1e-3, max_radius: 1e4 };
        let (omega, r_cut) = class.generate_for_box(&bx, &env, 5).unwrap();
        assert!(r_cut > 100.0);
        for kernel in [Kernel::V, Kernel::VMinus, Kernel::Eta] {
            let fast = ExternalField::build(&bx, &omega, &pot, &env, kernel);
            assert!(fast.is_tabulated());
            for k in 0..=400 {
                let x = [-8.0 + 16.0 * k as f64 / 400.0, 0.0, 0.0];
                let exact = external_field(&bx, &omega, &pot, &env, kernel, &x).unwrap();
                assert!((fast.at(&x) - exact).abs() <= 1e-9 * exact.abs().max(1.0), "{kernel:?} at {x:?}: {} vs {exact}", fast.at(&x));
            }
        }
    }

    #[test]
    fn empty_boundary_gives_zero_field() {
        let pot = PotentialSpec::default_core_plus_tail(1).unwrap();
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let bx = SimBox::new(1, 4.0, 0.5).unwrap();
        let f = ExternalField::build(&bx, &BoundaryConfiguration::empty(1), &pot, &env, Kernel::V);
        assert!(f.is_zero());
        assert_eq!(f.at(&ORIGIN), 0.0);
    }

    #[test]
    fn truncation_radius_meets_tolerance() {
        let env = EnvelopeSpec::default_for_core_plus_tail(1).unwrap();
        let class = OmegaClass { mode: GenerationMode::Saturated, rho: 1.0, growth: GrowthFunction::Zero, delta: 1.0, tail_tol: 1e-3, max_radius: 1e4 };
        let r = class.truncation_radius(&env, 8.0).unwrap();
        let ratio = tail_bound(&env, &GrowthFunction::Zero, 1.0, 8.0, r).unwrap() / tail_bound(&env, &GrowthFunction::Zero, 1.0, 8.0, 0.0).unwrap();
        assert!(ratio <= 1e-3 && ratio > 0.999e-3);
    }
}
