//! Pair potentials with a superstable split and a temperedness envelope.

use crate::error::{Error, Result};
use crate::geometry::{check_dim, distance, Point, ORIGIN};
use crate::quadrature::{integrate_breaks, radial_breaks};
use crate::rng::{tagged, Tag};
use crate::table::RadialTable;
use rand::Rng;

/// Shape of the pair potential.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    /// v ≡ 0.
    Ideal,
    /// v = K·1{r ≤ a}.
    SoftRod { strength: f64 },
    /// v = +∞ for r < a, 0 otherwise.
    HardRod,
    /// v = K·1{r ≤ a} − C·r^{−(d+p)}·1{r > b}.
    CorePlusTail { strength: f64, tail_start: f64, tail_amplitude: f64, tail_exponent: f64 },
    /// Linear interpolation of a radial table, 0 beyond the last radius.
    Tabulated(RadialTable),
}

/// A radial pair potential v = v1 + v2 with stability constant B and core
/// parameters (a, c) such that v2 ≥ c on [0, a].
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    dim: usize,
    kind: PotentialKind,
    stability: f64,
    core: f64,
    core_strength: f64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

impl PotentialSpec {
    pub fn new(dim: usize, kind: PotentialKind, stability: f64, core: f64, core_strength: f64) -> Result<Self> {
        check_dim(dim)?;
        positive("core radius", core)?;
        positive("core strength", core_strength)?;
        if !(stability >= 0.0 && stability.is_finite()) {
            return Err(Error::Invalid(format!("stability constant must be a finite non-negative number, got {stability}")));
        }
        match &kind {
            PotentialKind::SoftRod { strength } => {
                if !(strength.is_finite() && *strength >= core_strength) {
                    return Err(Error::Invalid(format!("soft-rod strength K={strength} must satisfy K >= c = {core_strength}")));
                }
            }
            PotentialKind::CorePlusTail { strength, tail_start, tail_amplitude, tail_exponent } => {
                if !(strength.is_finite() && *strength >= core_strength) {
                    return Err(Error::Invalid(format!("core strength K={strength} must satisfy K >= c = {core_strength}")));
                }
                positive("tail start", *tail_start)?;
                positive("tail exponent", *tail_exponent)?;
                if !(*tail_amplitude >= 0.0 && tail_amplitude.is_finite()) {
                    return Err(Error::Invalid(format!("tail amplitude must be non-negative, got {tail_amplitude}")));
                }
            }
            PotentialKind::Ideal | PotentialKind::HardRod | PotentialKind::Tabulated(_) => {}
        }
        Ok(Self { dim, kind, stability, core, core_strength })
    }

    pub fn ideal(dim: usize) -> Result<Self> {
        Self::new(dim, PotentialKind::Ideal, 0.0, 1.0, 1.0)
    }

    pub fn soft_rod(dim: usize, strength: f64, core: f64, core_strength: f64) -> Result<Self> {
        Self::new(dim, PotentialKind::SoftRod { strength }, 0.0, core, core_strength)
    }

    pub fn hard_rod(dim: usize, core: f64) -> Result<Self> {
        Self::new(dim, PotentialKind::HardRod, 0.0, core, 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn core_plus_tail(
        dim: usize,
        strength: f64,
        core: f64,
        core_strength: f64,
        tail_start: f64,
        tail_amplitude: f64,
        tail_exponent: f64,
        stability: f64,
    ) -> Result<Self> {
        Self::new(
            dim,
            PotentialKind::CorePlusTail { strength, tail_start, tail_amplitude, tail_exponent },
            stability,
            core,
            core_strength,
        )
    }

    /// The shipped default: K=10, a=b=1, C=1, p=1, c=1, B=2.
    pub fn default_core_plus_tail(dim: usize) -> Result<Self> {
        Self::core_plus_tail(dim, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0)
    }

    pub fn tabulated(dim: usize, table: RadialTable, core: f64, core_strength: f64, stability: f64) -> Result<Self> {
        Self::new(dim, PotentialKind::Tabulated(table), stability, core, core_strength)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            PotentialKind::Ideal => "ideal",
            PotentialKind::SoftRod { .. } => "soft-rod",
            PotentialKind::HardRod => "hard-rod",
            PotentialKind::CorePlusTail { .. } => "core-plus-tail",
            PotentialKind::Tabulated(_) => "tabulated",
        }
    }

    pub fn stability(&self) -> f64 {
        self.stability
    }

    pub fn core(&self) -> f64 {
        self.core
    }

    pub fn core_strength(&self) -> f64 {
        self.core_strength
    }

    /// Returns a copy with a different stability constant.
    pub fn with_stability(&self, stability: f64) -> Result<Self> {
        Self::new(self.dim, self.kind.clone(), stability, self.core, self.core_strength)
    }

    /// v(r), checking r ≥ 0.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if r < 0.0 || r.is_nan() {
            return Err(Error::Domain(format!("separation must be non-negative, got {r}")));
        }
        Ok(self.value(r))
    }

    /// v(r) for r ≥ 0 without the domain check.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Ideal => 0.0,
            PotentialKind::SoftRod { strength } => {
                if r <= self.core {
                    *strength
                } else {
                    0.0
                }
            }
            PotentialKind::HardRod => {
                if r < self.core {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PotentialKind::CorePlusTail { strength, tail_start, tail_amplitude, tail_exponent } => {
                let core = if r <= self.core { *strength } else { 0.0 };
                let tail = if r > *tail_start {
                    tail_amplitude * inverse_power(r, self.dim as f64 + tail_exponent)
                } else {
                    0.0
                };
                core - tail
            }
            PotentialKind::Tabulated(t) => t.interpolate(r).unwrap_or(0.0),
        }
    }

    /// The non-negative part v2 of the split.
    #[inline]
    pub fn v2(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Ideal => 0.0,
            PotentialKind::SoftRod { .. } | PotentialKind::HardRod => self.value(r),
            PotentialKind::CorePlusTail { .. } | PotentialKind::Tabulated(_) => {
                if r <= self.core {
                    self.core_strength
                } else {
                    0.0
                }
            }
        }
    }

    /// The stable part v1 = v − v2.
    #[inline]
    pub fn v1(&self, r: f64) -> f64 {
        match &self.kind {
            PotentialKind::Ideal | PotentialKind::SoftRod { .. } | PotentialKind::HardRod => 0.0,
            PotentialKind::CorePlusTail { .. } | PotentialKind::Tabulated(_) => self.value(r) - self.v2(r),
        }
    }

    /// (v⁺, v⁻) = (max(0, v), max(0, −v)).
    pub fn split_signs(&self, r: f64) -> Result<(f64, f64)> {
        Ok(sign_split(self.evaluate(r)?))
    }

    #[inline]
    pub fn v_plus(&self, r: f64) -> f64 {
        sign_split(self.value(r)).0
    }

    #[inline]
    pub fn v_minus(&self, r: f64) -> f64 {
        sign_split(self.value(r)).1
    }

    /// Radius beyond which v is smooth.
    pub fn smooth_beyond(&self) -> f64 {
        match &self.kind {
            PotentialKind::Ideal => 0.0,
            PotentialKind::SoftRod { .. } | PotentialKind::HardRod => self.core,
            PotentialKind::CorePlusTail { tail_start, .. } => self.core.max(*tail_start),
            PotentialKind::Tabulated(t) => t.last_radius(),
        }
    }

    /// Radius beyond which v vanishes identically, if any.
    pub fn range(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Ideal => Some(0.0),
            PotentialKind::SoftRod { .. } | PotentialKind::HardRod => Some(self.core),
            PotentialKind::CorePlusTail { tail_amplitude, .. } if *tail_amplitude == 0.0 => Some(self.core),
            PotentialKind::CorePlusTail { .. } => None,
            PotentialKind::Tabulated(t) => Some(t.last_radius()),
        }
    }

    /// True when v ≥ 0 everywhere.
    pub fn is_non_negative(&self) -> bool {
        match &self.kind {
            PotentialKind::Ideal | PotentialKind::SoftRod { .. } | PotentialKind::HardRod => true,
            PotentialKind::CorePlusTail { tail_amplitude, .. } => *tail_amplitude == 0.0,
            PotentialKind::Tabulated(t) => t.values().iter().all(|&y| y >= 0.0),
        }
    }
}

/// r^{−s}, using integer powers when s is a small integer.
#[inline]
pub fn inverse_power(r: f64, s: f64) -> f64 {
    if s == s.trunc() && s.abs() <= 16.0 {
        1.0 / r.powi(s as i32)
    } else {
        r.powf(-s)
    }
}

/// Splits an energy into its positive and negative parts.
#[inline]
pub fn sign_split(v: f64) -> (f64, f64) {
    if v >= 0.0 {
        (v, 0.0)
    } else {
        (0.0, -v)
    }
}

/// e^{−βU}, equal to 0 for the infinite core energy at every β ≥ 0.
#[inline]
pub fn boltzmann(beta: f64, u: f64) -> f64 {
    if u == f64::INFINITY {
        0.0
    } else {
        (-beta * u).exp()
    }
}

/// Decay law of the envelope beyond its plateau.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeLaw {
    /// η(r) = C·r^{−(d+p)}.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// Linear interpolation of a non-increasing table, 0 beyond its last radius.
    Tabulated(RadialTable),
}

/// Monotone envelope η: the plateau 2B on [0, b], then the decay law.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSpec {
    dim: usize,
    plateau: f64,
    range: f64,
    law: EnvelopeLaw,
}

impl EnvelopeSpec {
    pub fn new(dim: usize, plateau: f64, range: f64, law: EnvelopeLaw) -> Result<Self> {
        check_dim(dim)?;
        positive("envelope range b", range)?;
        if !(plateau >= 0.0 && plateau.is_finite()) {
            return Err(Error::Invalid(format!("envelope plateau must be non-negative, got {plateau}")));
        }
        match &law {
            EnvelopeLaw::PowerLaw { amplitude, exponent } => {
                if !(*amplitude >= 0.0 && amplitude.is_finite() && exponent.is_finite()) {
                    return Err(Error::Invalid("power-law amplitude must be non-negative and finite".into()));
                }
                if dim as f64 + exponent <= 0.0 && *amplitude > 0.0 {
                    return Err(Error::Invalid(format!("power law r^-(d+p) with d+p = {} is not decreasing", dim as f64 + exponent)));
                }
                if amplitude * range.powf(-(dim as f64 + exponent)) > plateau * (1.0 + 1e-12) {
                    return Err(Error::Invalid(format!(
                        "power law exceeds the plateau at r = b (C b^-(d+p) = {} > {plateau}); the envelope would not be monotone",
                        amplitude * range.powf(-(dim as f64 + exponent))
                    )));
                }
            }
            EnvelopeLaw::Tabulated(t) => {
                if !t.is_non_increasing() || t.values().iter().any(|&y| y < 0.0) {
                    return Err(Error::Invalid("tabulated envelope must be non-negative and non-increasing".into()));
                }
                if t.values()[0] > plateau {
                    return Err(Error::Invalid("tabulated envelope exceeds the plateau".into()));
                }
            }
        }
        Ok(Self { dim, plateau, range, law })
    }

    pub fn power_law(dim: usize, plateau: f64, range: f64, amplitude: f64, exponent: f64) -> Result<Self> {
        Self::new(dim, plateau, range, EnvelopeLaw::PowerLaw { amplitude, exponent })
    }

    /// Envelope matching [`PotentialSpec::default_core_plus_tail`]: 2B = 4, b = 1, C = 1, p = 1.
    pub fn default_for_core_plus_tail(dim: usize) -> Result<Self> {
        Self::power_law(dim, 4.0, 1.0, 1.0, 1.0)
    }

    /// Compact envelope for rods: η ≡ 0 beyond b = 1.
    pub fn compact_rod(dim: usize) -> Result<Self> {
        Self::power_law(dim, 0.0, 1.0, 0.0, 1.0)
    }
}

/// Envelopes shipped with the crate, by name, for d = 1, 2, 3.
pub fn shipped_envelopes() -> Result<Vec<(String, EnvelopeSpec)>> {
    let mut out = Vec::new();
    for d in 1..=3 {
        out.push((format!("core-plus-tail-d{d}"), EnvelopeSpec::default_for_core_plus_tail(d)?));
        out.push((format!("compact-rod-d{d}"), EnvelopeSpec::compact_rod(d)?));
    }
    Ok(out)
}

impl EnvelopeSpec {

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn law(&self) -> &EnvelopeLaw {
        &self.law
    }

    /// Power-law exponent p, if the law is a power law.
    pub fn exponent(&self) -> Option<f64> {
        match self.law {
            EnvelopeLaw::PowerLaw { exponent, .. } => Some(exponent),
            EnvelopeLaw::Tabulated(_) => None,
        }
    }

    /// η(r); the plateau applies on the closed interval [0, b].
    #[inline]
    pub fn eta(&self, r: f64) -> f64 {
        if r <= self.range {
            return self.plateau;
        }
        match &self.law {
            EnvelopeLaw::PowerLaw { amplitude, exponent } => amplitude * inverse_power(r, self.dim as f64 + exponent),
            EnvelopeLaw::Tabulated(t) => t.interpolate(r).unwrap_or(0.0),
        }
    }

    /// Radii at which η may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let mut k = vec![self.range];
        if let EnvelopeLaw::Tabulated(t) = &self.law {
            k.extend(t.radii().iter().copied().filter(|&r| r > self.range));
        }
        k
    }

    /// Radius beyond which η vanishes, if any.
    pub fn support(&self) -> Option<f64> {
        match &self.law {
            EnvelopeLaw::PowerLaw { amplitude, .. } if *amplitude == 0.0 => Some(self.range),
            EnvelopeLaw::PowerLaw { .. } => None,
            EnvelopeLaw::Tabulated(t) => Some(t.last_radius().max(self.range)),
        }
    }

    /// ∫_0^∞ η(r) r^{d−1} dr in closed form, for power laws.
    pub fn radial_mass_closed(&self) -> Result<f64> {
        match self.law {
            EnvelopeLaw::PowerLaw { amplitude, exponent } => {
                if amplitude > 0.0 && exponent <= 0.0 {
                    return Err(Error::NotTempered(format!("power-law exponent p = {exponent} must be positive")));
                }
                let d = self.dim as f64;
                let tail = if amplitude == 0.0 { 0.0 } else { amplitude * self.range.powf(-exponent) / exponent };
                Ok(self.plateau * self.range.powf(d) / d + tail)
            }
            EnvelopeLaw::Tabulated(_) => Err(Error::Invalid("no closed form for tabulated envelopes".into())),
        }
    }

    /// ∫_0^∞ η(r) r^{d−1} dr by adaptive quadrature, with the power-law
    /// remainder beyond 10⁶·b added in closed form.
    pub fn radial_mass_quadrature(&self) -> Result<f64> {
        let d = self.dim as f64;
        let f = |r: f64| self.eta(r) * r.powf(d - 1.0);
        let (upper, remainder) = match (&self.law, self.support()) {
            (_, Some(s)) => (s, 0.0),
            (EnvelopeLaw::PowerLaw { amplitude, exponent }, None) => {
                if *exponent <= 0.0 {
                    return Err(Error::NotTempered(format!("power-law exponent p = {exponent} must be positive")));
                }
                let x = 1e6 * self.range;
                (x, amplitude * x.powf(-exponent) / exponent)
            }
            (EnvelopeLaw::Tabulated(_), None) => unreachable!("tabulated envelopes have compact support"),
        };
        let q = integrate_breaks(&f, &radial_breaks(0.0, upper, &self.kinks()), 1e-12, 0.0);
        Ok(q.value + remainder)
    }
}

/// A configuration or radius that violates an audited property.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    Configuration(Vec<Point>),
    Radius(f64),
    Pair(f64, f64),
}

/// One audited property.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

/// Outcome of a sampling audit. Passing means no violation was found.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn push(&mut self, name: &str, passed: bool, detail: String, witness: Option<Witness>) {
        self.checks.push(AuditCheck { name: name.to_string(), passed, detail, witness });
    }
}

const RADIAL_GRID: usize = 4000;

fn stable_part_energy(spec: &PotentialSpec, xs: &[Point]) -> f64 {
    let mut e = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            e += spec.v1(distance(&xs[i], &xs[j]));
        }
    }
    e
}

fn lattice(dim: usize, side: usize, spacing: f64) -> Vec<Point> {
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut p = ORIGIN;
            for pi in p.iter_mut().take(dim) {
                *pi = (flat % side) as f64 * spacing;
                flat /= side;
            }
            p
        })
        .collect()
}

/// Audits stability of v1, positivity of v2 on the core, the envelope bound
/// |v| ≤ η beyond b, v⁻ ≤ 2B, and integrability of η.
pub fn audit_assumptions(spec: &PotentialSpec, env: &EnvelopeSpec, n_trials: usize, seed: u64) -> Result<AuditReport> {
    if n_trials < 1 {
        return Err(Error::Invalid("n_trials must be at least 1".into()));
    }
    if spec.dim() != env.dim() {
        return Err(Error::Invalid("potential and envelope dimensions differ".into()));
    }
    let d = spec.dim();
    let scale = spec.core().max(env.range());
    let b_const = spec.stability();
    let mut rng = tagged(seed, Tag::Audit, 0, 0);
    let mut report = AuditReport::default();

    // Stability of v1.
    let mut s1: Option<(String, Witness)> = None;
    let side = 10.0 * scale;
    for k in 0..=RADIAL_GRID {
        let r = side * k as f64 / RADIAL_GRID as f64;
        if spec.v1(r) < -2.0 * b_const {
            let mut y = ORIGIN;
            y[0] = r;
            s1 = Some((format!("two particles at r = {r}: v1 = {} < -2B = {}", spec.v1(r), -2.0 * b_const), Witness::Configuration(vec![ORIGIN, y])));
            break;
        }
    }
    if s1.is_none() {
        'chains: for n in 2..=20usize {
            for k in 1..=200 {
                let s = 3.0 * scale * k as f64 / 200.0;
                let xs: Vec<Point> = (0..n)
                    .map(|i| {
                        let mut p = ORIGIN;
                        p[0] = i as f64 * s;
                        p
                    })
                    .collect();
                let e = stable_part_energy(spec, &xs);
                if e < -b_const * n as f64 {
                    s1 = Some((format!("chain of {n} at spacing {s}: energy {e} < -Bn = {}", -b_const * n as f64), Witness::Configuration(xs)));
                    break 'chains;
                }
            }
        }
    }
    if s1.is_none() && d >= 2 {
        'lattices: for m in 2..=3usize {
            for k in 1..=200 {
                let s = 3.0 * scale * k as f64 / 200.0;
                let xs = lattice(d, m, s);
                let e = stable_part_energy(spec, &xs);
                if e < -b_const * xs.len() as f64 {
                    s1 = Some((format!("lattice of {} at spacing {s}: energy {e} < -Bn", xs.len()), Witness::Configuration(xs)));
                    break 'lattices;
                }
            }
        }
    }
    if s1.is_none() {
        for _ in 0..n_trials {
            let n = rng.random_range(2..=20usize);
            let xs: Vec<Point> = (0..n)
                .map(|_| {
                    let mut p = ORIGIN;
                    for pi in p.iter_mut().take(d) {
                        *pi = rng.random::<f64>() * side;
                    }
                    p
                })
                .collect();
            let e = stable_part_energy(spec, &xs);
            if e < -b_const * n as f64 {
                s1 = Some((format!("random configuration of {n}: energy {e} < -Bn = {}", -b_const * n as f64), Witness::Configuration(xs)));
                break;
            }
        }
    }
    match s1 {
        Some((detail, w)) => report.push("stability", false, detail, Some(w)),
        None => report.push("stability", true, format!("no violation of sum v1 >= -Bn with B = {b_const}"), None),
    }

    // v2 ≥ c on the core.
    let a = spec.core();
    let c = spec.core_strength();
    let mut s2 = None;
    for k in 0..=RADIAL_GRID {
        let r = a * k as f64 / RADIAL_GRID as f64;
        let r = if matches!(spec.kind(), PotentialKind::HardRod) { r.min(a * (1.0 - 1e-12)) } else { r };
        if spec.v2(r) < c {
            s2 = Some(r);
            break;
        }
    }
    match s2 {
        Some(r) => report.push("core-positivity", false, format!("v2({r}) = {} < c = {c}", spec.v2(r)), Some(Witness::Radius(r))),
        None => report.push("core-positivity", true, format!("v2 >= {c} on the core"), None),
    }

    // |v| ≤ η beyond b, and v⁻ ≤ 2B everywhere sampled.
    let b = env.range();
    let far = 100.0 * scale;
    let mut radii: Vec<f64> = (1..=RADIAL_GRID).map(|k| b + (far - b) * (k as f64 / RADIAL_GRID as f64).powi(2)).collect();
    radii.extend((0..n_trials).map(|_| b + (far - b) * rng.random::<f64>()));
    let s3 = radii.iter().copied().find(|&r| spec.value(r).abs() > env.eta(r) * (1.0 + 1e-12));
    match s3 {
        Some(r) => report.push("envelope", false, format!("|v({r})| = {} > eta = {}", spec.value(r).abs(), env.eta(r)), Some(Witness::Radius(r))),
        None => report.push("envelope", true, "|v| <= eta for all sampled r > b".into(), None),
    }
    let mut all: Vec<f64> = (0..=RADIAL_GRID).map(|k| far * k as f64 / RADIAL_GRID as f64).collect();
    all.extend(radii.iter().copied());
    let s4 = all.iter().copied().find(|&r| spec.v_minus(r) > 2.0 * b_const * (1.0 + 1e-12));
    match s4 {
        Some(r) => report.push("attraction-cap", false, format!("v-({r}) = {} > 2B = {}", spec.v_minus(r), 2.0 * b_const), Some(Witness::Radius(r))),
        None => report.push("attraction-cap", true, format!("v- <= 2B = {}", 2.0 * b_const), None),
    }

    // Integrability of η.
    match env.radial_mass_quadrature() {
        Ok(m) if m.is_finite() => report.push("envelope-integrable", true, format!("integral of eta r^(d-1) = {m}"), None),
        Ok(m) => report.push("envelope-integrable", false, format!("integral evaluates to {m}"), None),
        Err(e) => report.push("envelope-integrable", false, e.to_string(), None),
    }
    Ok(report)
}
