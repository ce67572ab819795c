//! Growth functions, boundary configurations ω and the external fields they generate.

use crate::bounds::big_w;
use crate::error::{Error, Result};
use crate::geometry::{check_dim, CubeIndex, Grid, Point, SimBox, ORIGIN};
use crate::potential::{AuditReport, EnvelopeSpec, PotentialSpec, Witness};
use crate::rng::{tagged, Tag};
use crate::table::RadialTable;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// An admissible growth function g.
#[derive(Clone, Debug, PartialEq)]
pub enum GrowthFunction {
    Zero,
    Power { exponent: f64 },
    /// Linear interpolation of a non-decreasing table, constant beyond its last radius.
    Tabulated(RadialTable),
}

impl GrowthFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Invalid(format!("growth exponent must be positive, got {exponent}")));
        }
        Ok(Self::Power { exponent })
    }

    pub fn tabulated(table: RadialTable) -> Result<Self> {
        if !table.is_non_decreasing() || table.values()[0] < 0.0 {
            return Err(Error::Invalid("tabulated growth function must be non-negative and non-decreasing".into()));
        }
        Ok(Self::Tabulated(table))
    }

    /// g(r) for r ≥ 0.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Power { exponent } => r.max(0.0).powf(*exponent),
            Self::Tabulated(t) => t.interpolate(r).unwrap_or(t.values()[t.values().len() - 1]),
        }
    }

    /// Power exponent q, 0 for the zero function, `None` for tables.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Self::Zero => Some(0.0),
            Self::Power { exponent } => Some(*exponent),
            Self::Tabulated(_) => None,
        }
    }

    /// Whether g grows without bound.
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Self::Power { .. })
    }

    /// Radii at which g may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::Tabulated(t) => t.radii().to_vec(),
            _ => Vec::new(),
        }
    }
}

/// Admissibility audit and the non-triviality flag.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub audit: AuditReport,
    pub non_trivial: bool,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.audit.passed()
    }
}

/// Checks monotonicity, subadditivity on sampled pairs and finiteness of W(0).
pub fn audit_admissible(g: &GrowthFunction, env: &EnvelopeSpec, n_pairs: usize, seed: u64) -> AdmissibilityReport {
    let mut audit = AuditReport::default();
    let mut rng = tagged(seed, Tag::Admissible, 0, 0);

    let grid: Vec<f64> = (0..=2000).map(|k| 1e-3 * 10f64.powf(7.0 * k as f64 / 2000.0) - 1e-3).collect();
    let mono = grid.windows(2).find(|w| g.eval(w[1]) < g.eval(w[0]));
    let start = g.eval(0.0);
    match (start >= 0.0, mono) {
        (true, None) => audit.push("monotone", true, format!("g(0) = {start}, non-decreasing on sampled radii"), None),
        (false, _) => audit.push("monotone", false, format!("g(0) = {start} < 0"), Some(Witness::Radius(0.0))),
        (_, Some(w)) => audit.push("monotone", false, format!("g({}) < g({})", w[1], w[0]), Some(Witness::Radius(w[1]))),
    }

    let mut pairs = vec![(1.0, 1.0)];
    pairs.extend((0..n_pairs).map(|_| {
        let a = 10f64.powf(rng.random_range(-3.0..4.0));
        let b = 10f64.powf(rng.random_range(-3.0..4.0));
        (a, b)
    }));
    let viol = pairs.iter().copied().find(|&(a, b)| g.eval(a + b) > (g.eval(a) + g.eval(b)) * (1.0 + 1e-12) + 1e-300);
    match viol {
        None => audit.push("subadditive", true, format!("g(a+b) <= g(a)+g(b) on {} pairs", pairs.len()), None),
        Some((a, b)) => audit.push(
            "subadditive",
            false,
            format!("g({a}+{b}) = {} > g({a})+g({b}) = {}", g.eval(a + b), g.eval(a) + g.eval(b)),
            Some(Witness::Pair(a, b)),
        ),
    }

    match big_w(env, g, 0.0) {
        Ok(w) if w.is_finite() => audit.push("integrable", true, format!("W(0) = {w}"), None),
        Ok(w) => audit.push("integrable", false, format!("W(0) = {w}"), None),
        Err(e) => audit.push("integrable", false, e.to_string(), None),
    }
    AdmissibilityReport { audit, non_trivial: g.is_unbounded() }
}

/// How a boundary configuration was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenerationMode {
    Empty,
    Poisson,
    Saturated,
    Custom,
}

impl GenerationMode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Empty => "empty",
            Self::Poisson => "poisson",
            Self::Saturated => "saturated",
            Self::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "empty" => Ok(Self::Empty),
            "poisson" => Ok(Self::Poisson),
            "saturated" => Ok(Self::Saturated),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Parse(format!("unknown generation mode '{other}'"))),
        }
    }
}

/// A finite multiset of fixed external particles with its declared class.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConfiguration {
    pub dim: usize,
    pub points: Vec<Point>,
    pub extent: f64,
    pub delta: f64,
    pub rho: f64,
    pub growth: GrowthFunction,
    pub mode: GenerationMode,
    pub seed: u64,
}

impl BoundaryConfiguration {
    /// The free boundary ω = ∅.
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new(), extent: 0.0, delta: 1.0, rho: 0.0, growth: GrowthFunction::Zero, mode: GenerationMode::Empty, seed: 0 }
    }

    /// A user-given configuration declared in the class (ρ, g) at grid δ.
    pub fn custom(dim: usize, points: Vec<Point>, delta: f64, rho: f64, growth: GrowthFunction) -> Result<Self> {
        check_dim(dim)?;
        let extent = extent_of(dim, &points);
        Ok(Self { dim, points, extent, delta, rho, growth, mode: GenerationMode::Custom, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points strictly outside Λ.
    pub fn outside(&self, bx: &SimBox) -> Vec<Point> {
        self.points.iter().copied().filter(|y| !bx.contains(y)).collect()
    }

    /// Text form: header `d delta rho q mode seed`, then one point per line.
    pub fn to_text(&self) -> String {
        let q = match &self.growth {
            GrowthFunction::Zero => "0".to_string(),
            GrowthFunction::Power { exponent } => format!("{exponent}"),
            GrowthFunction::Tabulated(_) => "custom".to_string(),
        };
        let mut s = format!("{} {} {} {} {} {}\n", self.dim, self.delta, self.rho, q, self.mode.name(), self.seed);
        for p in &self.points {
            let coords: Vec<String> = p.iter().take(self.dim).map(|c| format!("{c}")).collect();
            let _ = writeln!(s, "{}", coords.join(" "));
        }
        s
    }

    /// Parses [`BoundaryConfiguration::to_text`] output. A `custom` growth
    /// header requires the growth function to be supplied.
    pub fn from_text(text: &str, custom_growth: Option<GrowthFunction>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("missing header line".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 6 {
            return Err(Error::Parse("header must be 'd delta rho q mode seed'".into()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("'{s}': {e}")));
        let dim: usize = h[0].parse().map_err(|e| Error::Parse(format!("dimension: {e}")))?;
        check_dim(dim)?;
        let delta = num(h[1])?;
        let rho = num(h[2])?;
        let growth = match h[3] {
            "custom" => custom_growth.ok_or_else(|| Error::Parse("custom growth function must be supplied".into()))?,
            s => {
                let q = num(s)?;
                if q == 0.0 {
                    GrowthFunction::Zero
                } else {
                    GrowthFunction::power(q)?
                }
            }
        };
        let mode = GenerationMode::parse(h[4])?;
        let seed: u64 = h[5].parse().map_err(|e| Error::Parse(format!("seed: {e}")))?;
        let mut points = Vec::new();
        for line in lines {
            let c: Vec<&str> = line.split_whitespace().collect();
            if c.len() != dim {
                return Err(Error::Parse(format!("expected {dim} coordinates, got '{line}'")));
            }
            let mut p = ORIGIN;
            for (i, s) in c.iter().enumerate() {
                p[i] = num(s)?;
            }
            points.push(p);
        }
        let extent = extent_of(dim, &points);
        Ok(Self { dim, points, extent, delta, rho, growth, mode, seed })
    }
}

fn extent_of(dim: usize, points: &[Point]) -> f64 {
    points.iter().flat_map(|p| p.iter().take(dim)).fold(0.0, |m, c| m.max(c.abs()))
}

/// Largest number of points a generated boundary configuration may hold.
pub const MAX_POINTS: usize = 20_000_000;

/// Class cap ⌊δ^d ρ (1 + g)⌋ for one cell and the bound it is compared against.
fn cell_bound(grid: &Grid, rho: f64, g: &GrowthFunction, c: &CubeIndex) -> f64 {
    grid.cell_volume() * rho * (1.0 + g.eval(grid.min_norm(c)))
}

/// Generates ω on the cells of the origin-aligned δ-grid that lie inside [−R, R]^d.
pub fn generate_boundary(
    mode: GenerationMode,
    dim: usize,
    rho: f64,
    g: &GrowthFunction,
    delta: f64,
    extent: f64,
    seed: u64,
) -> Result<BoundaryConfiguration> {
    check_dim(dim)?;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Invalid(format!("density must be non-negative, got {rho}")));
    }
    if !(delta > 0.0 && delta.is_finite()) || !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::Invalid("delta and extent must be positive".into()));
    }
    let mut cfg = BoundaryConfiguration { dim, points: Vec::new(), extent, delta, rho, growth: g.clone(), mode, seed };
    if matches!(mode, GenerationMode::Empty) {
        return Ok(cfg);
    }
    if matches!(mode, GenerationMode::Custom) {
        return Err(Error::Invalid("custom configurations are not generated".into()));
    }
    let grid = Grid::origin(dim, delta);
    let kmin = (-extent / delta - 1e-9).ceil() as i64;
    let kmax = (extent / delta + 1e-9).floor() as i64 - 1;
    if kmax < kmin {
        return Ok(cfg);
    }
    let side = (kmax - kmin + 1) as usize;
    let total = side.pow(dim as u32);
    let worst = grid.cell_volume() * rho * (1.0 + g.eval(extent * (dim as f64).sqrt()));
    if total as f64 * worst.floor().max(1.0) > MAX_POINTS as f64 {
        return Err(Error::Invalid(format!(
            "boundary configuration of extent {extent} could hold up to {:.3e} points, above the limit {MAX_POINTS}",
            total as f64 * worst.floor().max(1.0)
        )));
    }
    let mut rng = tagged(seed, Tag::Boundary, 0, 0);
    for mut flat in 0..total {
        let mut k = [0i64; 3];
        for ki in k.iter_mut().take(dim) {
            *ki = kmin + (flat % side) as i64;
            flat /= side;
        }
        let cell = CubeIndex(k);
        let cap = cell_bound(&grid, rho, g, &cell).floor();
        let count = match mode {
            GenerationMode::Saturated => cap as usize,
            GenerationMode::Poisson => {
                let mean = grid.cell_volume() * rho * (1.0 + g.eval(crate::geometry::norm(&grid.center(&cell))));
                if mean <= 0.0 {
                    0
                } else {
                    let dist = Poisson::new(mean).map_err(|e| Error::Invalid(e.to_string()))?;
                    let mut n = cap + 1.0;
                    let mut tries = 0;
                    while n > cap && tries < 10_000 {
                        n = dist.sample(&mut rng);
                        tries += 1;
                    }
                    n.min(cap) as usize
                }
            }
            GenerationMode::Empty | GenerationMode::Custom => 0,
        };
        let lo = grid.lower_corner(&cell);
        for _ in 0..count {
            let mut p = lo;
            for pi in p.iter_mut().take(dim) {
                *pi += delta * rng.random::<f64>();
            }
            cfg.points.push(p);
        }
    }
    Ok(cfg)
}

/// ρ_δ^ω(x): number of ω-points in the origin-aligned cell of x divided by δ^d.
pub fn local_density(omega: &BoundaryConfiguration, delta: f64, x: &Point) -> f64 {
    let grid = Grid::origin(omega.dim, delta);
    let c = grid.cube_of(x);
    let n = omega.points.iter().filter(|y| grid.cube_of(y) == c).count();
    n as f64 / grid.cell_volume()
}

/// Outcome of a class-membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub max_ratio: f64,
    pub worst_cell: Option<CubeIndex>,
}

fn cell_counts(omega: &BoundaryConfiguration, grid: &Grid) -> BTreeMap<CubeIndex, usize> {
    let mut counts = BTreeMap::new();
    for y in &omega.points {
        *counts.entry(grid.cube_of(y)).or_insert(0usize) += 1;
    }
    counts
}

/// Tests ρ_δ^ω ≤ ρ(1 + g) on every nonempty cell of `grid`, with g taken at
/// the smallest radius of the cell.
pub fn class_membership_on(omega: &BoundaryConfiguration, rho: f64, g: &GrowthFunction, grid: &Grid) -> Membership {
    let mut max_ratio = 0.0;
    let mut worst = None;
    for (cell, n) in cell_counts(omega, grid) {
        let bound = cell_bound(grid, rho, g, &cell);
        let ratio = if bound > 0.0 { n as f64 / bound } else { f64::INFINITY };
        if ratio > max_ratio || worst.is_none() {
            max_ratio = ratio;
            worst = Some(cell);
        }
    }
    Membership { member: max_ratio <= 1.0, max_ratio, worst_cell: worst }
}

/// [`class_membership_on`] for the origin-aligned grid of side δ.
pub fn class_membership(omega: &BoundaryConfiguration, rho: f64, g: &GrowthFunction, delta: f64) -> Membership {
    class_membership_on(omega, rho, g, &Grid::origin(omega.dim, delta))
}

/// Smallest ρ̃ with ω ∈ Ω_{ρ̃,g} on `grid2`, given membership in the declared
/// class at the origin-aligned grid of side δ1.
pub fn redelta_bound_on(omega: &BoundaryConfiguration, g: &GrowthFunction, delta1: f64, grid2: &Grid) -> Result<f64> {
    let m = class_membership(omega, omega.rho, g, delta1);
    if !m.member {
        return Err(Error::Membership(format!(
            "configuration exceeds its declared class at delta = {delta1}: ratio {} in cell {:?}",
            m.max_ratio, m.worst_cell
        )));
    }
    let mut rho = 0.0f64;
    for (cell, n) in cell_counts(omega, grid2) {
        let denom = grid2.cell_volume() * (1.0 + g.eval(grid2.min_norm(&cell)));
        rho = rho.max(n as f64 / denom);
    }
    while rho > 0.0 && !class_membership_on(omega, rho, g, grid2).member {
        rho = rho.next_up();
    }
    Ok(rho)
}

/// [`redelta_bound_on`] for the origin-aligned grid of side δ2.
pub fn redelta_bound(omega: &BoundaryConfiguration, g: &GrowthFunction, delta1: f64, delta2: f64) -> Result<f64> {
    redelta_bound_on(omega, g, delta1, &Grid::origin(omega.dim, delta2))
}

/// Radial function summed over the external points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    V,
    VPlus,
    VMinus,
    Eta,
}

impl Kernel {
    #[inline]
    pub fn eval(&self, pot: &PotentialSpec, env: &EnvelopeSpec, r: f64) -> f64 {
        match self {
            Kernel::V => pot.value(r),
            Kernel::VPlus => pot.v_plus(r),
            Kernel::VMinus => pot.v_minus(r),
            Kernel::Eta => env.eta(r),
        }
    }

    /// Radius beyond which the kernel is smooth.
    pub fn smooth_beyond(&self, pot: &PotentialSpec, env: &EnvelopeSpec) -> f64 {
        match self {
            Kernel::Eta => env.kinks().into_iter().fold(0.0, f64::max),
            _ => pot.smooth_beyond(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::V => "v",
            Kernel::VPlus => "v_plus",
            Kernel::VMinus => "v_minus",
            Kernel::Eta => "eta",
        }
    }
}

/// Compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        if self.sum.is_infinite() {
            self.sum
        } else {
            self.sum + self.c
        }
    }
}

/// Σ_{y ∈ ω, y ∉ Λ} kernel(‖x − y‖) for a list of external points.
pub fn field_sum(points: &[Point], pot: &PotentialSpec, env: &EnvelopeSpec, kernel: Kernel, x: &Point) -> f64 {
    let mut s = Neumaier::default();
    for y in points {
        s.add(kernel.eval(pot, env, crate::geometry::distance(x, y)));
    }
    s.value()
}

/// E_Λ^f(x, ω) summed exactly over the points of ω strictly outside Λ.
pub fn external_field(
    bx: &SimBox,
    omega: &BoundaryConfiguration,
    pot: &PotentialSpec,
    env: &EnvelopeSpec,
    kernel: Kernel,
    x: &Point,
) -> Result<f64> {
    if !bx.contains(x) {
        return Err(Error::Domain(format!("field point {:?} lies outside the box", &x[..bx.dim()])));
    }
    let mut s = Neumaier::default();
    for y in omega.points.iter().filter(|y| !bx.contains(y)) {
        s.add(kernel.eval(pot, env, crate::geometry::distance(x, y)));
    }
    Ok(s.value())
}

/// Σ_{x ∈ x⃗} E_Λ^f(x, ω).
pub fn config_field(
    bx: &SimBox,
    omega: &BoundaryConfiguration,
    pot: &PotentialSpec,
    env: &EnvelopeSpec,
    kernel: Kernel,
    xs: &[Point],
) -> Result<f64> {
    let outside = omega.outside(bx);
    let mut s = Neumaier::default();
    for x in xs {
        if !bx.contains(x) {
            return Err(Error::Domain(format!("field point {:?} lies outside the box", &x[..bx.dim()])));
        }
        s.add(field_sum(&outside, pot, env, kernel, x));
    }
    Ok(s.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn env1() -> EnvelopeSpec {
        EnvelopeSpec::power_law(1, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn growth_examples() {
        assert_eq!(GrowthFunction::Zero.eval(100.0), 0.0);
        assert_relative_eq!(GrowthFunction::power(0.25).unwrap().eval(16.0), 2.0);
        assert_eq!(GrowthFunction::power(0.5).unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn admissibility_examples() {
        let r = audit_admissible(&GrowthFunction::power(0.25).unwrap(), &env1(), 500, 1);
        assert!(r.admissible() && r.non_trivial);
        let bad = audit_admissible(&GrowthFunction::power(1.5).unwrap(), &env1(), 500, 1);
        let s = bad.audit.check("subadditive").unwrap();
        assert!(!s.passed);
        assert_eq!(s.witness, Some(Witness::Pair(1.0, 1.0)));
        let z = audit_admissible(&GrowthFunction::Zero, &env1(), 500, 1);
        assert!(z.admissible() && !z.non_trivial);
        let div = audit_admissible(&GrowthFunction::power(1.0).unwrap(), &env1(), 10, 1);
        assert!(!div.audit.check("integrable").unwrap().passed);
    }

    #[test]
    fn generation_examples() {
        let e = generate_boundary(GenerationMode::Empty, 1, 2.0, &GrowthFunction::Zero, 1.0, 2.0, 0).unwrap();
        assert!(e.is_empty());
        let s = generate_boundary(GenerationMode::Saturated, 1, 2.0, &GrowthFunction::Zero, 1.0, 2.0, 0).unwrap();
        assert_eq!(s.len(), 8);
        let grid = Grid::origin(1, 1.0);
        for k in -2..2 {
            let n = s.points.iter().filter(|p| grid.cube_of(p).0[0] == k).count();
            assert_eq!(n, 2);
        }
        let g = GrowthFunction::power(0.25).unwrap();
        let w = generate_boundary(GenerationMode::Saturated, 1, 1.0, &g, 1.0, 16.0, 0).unwrap();
        let n = w.points.iter().filter(|p| grid.cube_of(p).0[0] == 15).count();
        assert_eq!(n, 2);
    }

    #[test]
    fn local_density_examples() {
        let w = BoundaryConfiguration::custom(1, vec![[0.1, 0.0, 0.0], [0.2, 0.0, 0.0], [0.9, 0.0, 0.0]], 1.0, 3.0, GrowthFunction::Zero).unwrap();
        assert_eq!(local_density(&w, 1.0, &[0.5, 0.0, 0.0]), 3.0);
        assert_eq!(local_density(&BoundaryConfiguration::empty(1), 1.0, &[0.5, 0.0, 0.0]), 0.0);
        let w2 = BoundaryConfiguration::custom(2, vec![[0.1, 0.1, 0.0]], 0.5, 4.0, GrowthFunction::Zero).unwrap();
        assert_eq!(local_density(&w2, 0.5, &[0.2, 0.2, 0.0]), 4.0);
    }

    #[test]
    fn membership_examples() {
        let one = BoundaryConfiguration::custom(1, vec![[2.5, 0.0, 0.0]], 1.0, 2.0, GrowthFunction::Zero).unwrap();
        assert!(class_membership(&one, 2.0, &GrowthFunction::Zero, 1.0).member);
        let three = BoundaryConfiguration::custom(1, vec![[0.1, 0.0, 0.0]; 3], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        let m = class_membership(&three, 1.0, &GrowthFunction::Zero, 1.0);
        assert!(!m.member);
        assert_eq!(m.max_ratio, 3.0);
    }

    #[test]
    fn redelta_examples() {
        assert_eq!(redelta_bound(&BoundaryConfiguration::empty(1), &GrowthFunction::Zero, 1.0, 0.3).unwrap(), 0.0);
        let pts: Vec<Point> = (-8..8).map(|k| [k as f64 + 0.5, 0.0, 0.0]).collect();
        let w = BoundaryConfiguration::custom(1, pts, 1.0, 1.0, GrowthFunction::Zero).unwrap();
        assert_eq!(redelta_bound(&w, &GrowthFunction::Zero, 1.0, 2.0).unwrap(), 1.0);
        let o = BoundaryConfiguration::custom(1, vec![ORIGIN], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        assert_eq!(redelta_bound(&o, &GrowthFunction::Zero, 1.0, 0.5).unwrap(), 2.0);
        let bad = BoundaryConfiguration::custom(1, vec![ORIGIN; 3], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        assert!(matches!(redelta_bound(&bad, &GrowthFunction::Zero, 1.0, 0.5), Err(Error::Membership(_))));
    }

    #[test]
    fn field_examples() {
        let pot = PotentialSpec::core_plus_tail(1, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let env = env1();
        let bx = SimBox::new(1, 1.0, 0.5).unwrap();
        let w = BoundaryConfiguration::custom(1, vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        assert_relative_eq!(external_field(&bx, &w, &pot, &env, Kernel::V, &ORIGIN).unwrap(), -0.5);
        let e = BoundaryConfiguration::empty(1);
        for k in [Kernel::V, Kernel::VPlus, Kernel::VMinus, Kernel::Eta] {
            assert_eq!(external_field(&bx, &e, &pot, &env, k, &ORIGIN).unwrap(), 0.0);
        }
        let single = BoundaryConfiguration::custom(1, vec![[3.0, 0.0, 0.0]], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        let x = [0.25, 0.0, 0.0];
        assert_eq!(external_field(&bx, &single, &pot, &env, Kernel::Eta, &x).unwrap(), env.eta(2.75));
        let inside = BoundaryConfiguration::custom(1, vec![[0.5, 0.0, 0.0]], 1.0, 1.0, GrowthFunction::Zero).unwrap();
        assert_eq!(external_field(&bx, &inside, &pot, &env, Kernel::Eta, &x).unwrap(), 0.0);
        assert!(matches!(external_field(&bx, &w, &pot, &env, Kernel::V, &[1.5, 0.0, 0.0]), Err(Error::Domain(_))));
        let f = external_field(&bx, &w, &pot, &env, Kernel::Eta, &x).unwrap();
        assert_eq!(config_field(&bx, &w, &pot, &env, Kernel::Eta, &[]).unwrap(), 0.0);
        assert_eq!(config_field(&bx, &w, &pot, &env, Kernel::Eta, &[x]).unwrap(), f);
        assert_eq!(config_field(&bx, &w, &pot, &env, Kernel::Eta, &[x, x]).unwrap(), 2.0 * f);
    }

    #[test]
    fn text_round_trip() {
        let g = GrowthFunction::power(0.25).unwrap();
        let w = generate_boundary(GenerationMode::Poisson, 2, 1.3, &g, 0.5, 3.0, 42).unwrap();
        let back = BoundaryConfiguration::from_text(&w.to_text(), None).unwrap();
        assert_eq!(back.points, w.points);
        assert_eq!((back.dim, back.delta, back.rho, back.mode, back.seed), (w.dim, w.delta, w.rho, w.mode, w.seed));
        assert_eq!(back.growth, w.growth);
    }
}
