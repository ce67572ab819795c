//! Experiment plans: a TOML file with dotted sections, one experiment per file.

use crate::boundary::{GenerationMode, GrowthFunction};
use crate::bounds::{check_core_partition, power_law_gate};
use crate::error::{Error, Result};
use crate::field::OmegaClass;
use crate::geometry::SimBox;
use crate::potential::{EnvelopeLaw, EnvelopeSpec, PotentialKind, PotentialSpec};
use crate::table::RadialTable;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// `[potential]`: kind and parameters of the pair potential.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

/// `[envelope]`: the tempering envelope η.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

/// `[omega]`: class of boundary configurations and its realisation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Absolute density ρ of the class.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// ρ as a multiple of the measured free-boundary bulk density.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_bulk_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
}

/// `[box]`: the box series and its partition.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSection {
    pub sizes: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

/// `[thermo]`: inverse temperature and fugacity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// `[gcmc]`: chain and integration parameters, applied at every L.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcmcSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub octaves: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    /// Moves per L value, overriding `moves` entry by entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moves_per_size: Option<Vec<usize>>,
}

/// `[series]`: truncated series parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    /// Largest λ|Λ| at which the series is run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lambda_volume: Option<f64>,
}

/// `[bounds]`: sampling effort of the bounds report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_delta_cubes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_cube: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit_trials: Option<usize>,
}

/// One experiment: model, ω-class, box series, parameters and root seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub potential: PotentialSection,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub omega: OmegaSection,
    #[serde(rename = "box")]
    pub box_series: BoxSection,
    #[serde(default)]
    pub thermo: ThermoSection,
    #[serde(default)]
    pub gcmc: GcmcSection,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub bounds: BoundsSection,
}

/// Effective chain parameters after defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSettings {
    pub moves: Vec<usize>,
    pub burn_in: usize,
    pub batches: usize,
    pub points: usize,
    pub octaves: f64,
    pub anchor_samples: usize,
    pub record_every: usize,
}

/// Effective series parameters after defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSettings {
    pub n_max: usize,
    pub mc_samples: usize,
    pub tail_tol: f64,
    pub max_lambda_volume: f64,
}

/// Effective bounds-report parameters after defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsSettings {
    pub field_samples: usize,
    pub c_delta_cubes: usize,
    pub samples_per_cube: usize,
    pub grid_resolution: usize,
    pub audit_trials: usize,
}

/// Density of the ω-class, fixed or relative to the free bulk density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DensitySpec {
    Absolute(f64),
    BulkFactor(f64),
}

fn load_table(path: &str, base: Option<&Path>) -> Result<RadialTable> {
    let p = Path::new(path);
    let full = match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    };
    RadialTable::load(&full)
}

fn need<T>(x: Option<T>, name: &str) -> Result<T> {
    x.ok_or_else(|| Error::Validation(format!("missing {name}")))
}

impl ExperimentPlan {
    /// Parses a plan from TOML text.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Serialises the plan to TOML text.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a plan file; relative table paths resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, Option<std::path::PathBuf>)> {
        let text = std::fs::read_to_string(path)?;
        Ok((Self::parse(&text)?, path.parent().map(|p| p.to_path_buf())))
    }

    pub fn dim(&self) -> usize {
        self.potential.dim.unwrap_or(1)
    }

    pub fn beta(&self) -> f64 {
        self.thermo.beta.unwrap_or(1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.thermo.lambda.unwrap_or(0.5)
    }

    pub fn delta(&self) -> f64 {
        self.box_series.delta.unwrap_or(0.5)
    }

    pub fn sizes(&self) -> &[f64] {
        &self.box_series.sizes
    }

    /// Builds the pair potential.
    pub fn potential_spec(&self, base: Option<&Path>) -> Result<PotentialSpec> {
        let p = &self.potential;
        let d = self.dim();
        let a = p.core.unwrap_or(1.0);
        let c = p.core_strength.unwrap_or(1.0);
        match p.kind.as_str() {
            "ideal" => PotentialSpec::ideal(d),
            "hard-rod" => PotentialSpec::hard_rod(d, a),
            "soft-rod" => PotentialSpec::soft_rod(d, p.strength.unwrap_or(10.0), a, c)?.with_stability(p.stability.unwrap_or(0.0)),
            "core-plus-tail" => PotentialSpec::new(
                d,
                PotentialKind::CorePlusTail {
                    strength: p.strength.unwrap_or(10.0),
                    tail_start: p.tail_start.unwrap_or(1.0),
                    tail_amplitude: p.tail_amplitude.unwrap_or(1.0),
                    tail_exponent: p.tail_exponent.unwrap_or(1.0),
                },
                p.stability.unwrap_or(2.0),
                a,
                c,
            ),
            "tabulated" => {
                let t = load_table(&need(p.table.clone(), "potential.table")?, base)?;
                PotentialSpec::tabulated(d, t, a, c, need(p.stability, "potential.stability")?)
            }
            other => Err(Error::Validation(format!("unknown potential.kind '{other}'"))),
        }
    }

    /// Builds the envelope; absent fields default to the envelope of the
    /// shipped core-plus-tail potential.
    pub fn envelope_spec(&self, base: Option<&Path>) -> Result<EnvelopeSpec> {
        let e = &self.envelope;
        let d = self.dim();
        let plateau = e.plateau.unwrap_or(4.0);
        let range = e.range.unwrap_or(1.0);
        match e.law.as_deref().unwrap_or("power-law") {
            "power-law" => EnvelopeSpec::power_law(d, plateau, range, e.amplitude.unwrap_or(1.0), e.exponent.unwrap_or(1.0)),
            "tabulated" => {
                let t = load_table(&need(e.table.clone(), "envelope.table")?, base)?;
                EnvelopeSpec::new(d, plateau, range, EnvelopeLaw::Tabulated(t))
            }
            other => Err(Error::Validation(format!("unknown envelope.law '{other}'"))),
        }
    }

    /// Builds the growth function g.
    pub fn growth(&self, base: Option<&Path>) -> Result<GrowthFunction> {
        match self.omega.growth.as_deref().unwrap_or("zero") {
            "zero" => Ok(GrowthFunction::Zero),
            "power" => GrowthFunction::power(need(self.omega.growth_exponent, "omega.growth_exponent")?),
            "tabulated" => GrowthFunction::tabulated(load_table(&need(self.omega.growth_table.clone(), "omega.growth_table")?, base)?),
            other => Err(Error::Validation(format!("unknown omega.growth '{other}'"))),
        }
    }

    pub fn generation_mode(&self) -> Result<GenerationMode> {
        let mode = GenerationMode::parse(self.omega.mode.as_deref().unwrap_or("saturated")).map_err(|e| Error::Validation(e.to_string()))?;
        if matches!(mode, GenerationMode::Custom) {
            return Err(Error::Validation("omega.mode 'custom' is not supported by sweeps".into()));
        }
        Ok(mode)
    }

    pub fn density(&self) -> Result<DensitySpec> {
        match (self.omega.rho, self.omega.rho_bulk_factor) {
            (Some(_), Some(_)) => Err(Error::Validation("set only one of omega.rho and omega.rho_bulk_factor".into())),
            (Some(r), None) => Ok(DensitySpec::Absolute(r)),
            (None, Some(f)) => Ok(DensitySpec::BulkFactor(f)),
            (None, None) => Ok(DensitySpec::Absolute(1.0)),
        }
    }

    /// The ω-class for a resolved density.
    pub fn omega_class(&self, rho: f64, base: Option<&Path>) -> Result<OmegaClass> {
        Ok(OmegaClass {
            mode: self.generation_mode()?,
            rho,
            growth: self.growth(base)?,
            delta: self.omega.delta.unwrap_or(1.0),
            tail_tol: self.omega.tail_tol.unwrap_or(1e-3),
            max_radius: self.omega.max_radius.unwrap_or(5e3),
        })
    }

    pub fn chain_settings(&self) -> Result<ChainSettings> {
        let g = &self.gcmc;
        let moves = g.moves.unwrap_or(200_000);
        let per = match &g.moves_per_size {
            Some(v) if v.len() != self.sizes().len() => {
                return Err(Error::Validation("gcmc.moves_per_size must have one entry per box size".into()));
            }
            Some(v) => v.clone(),
            None => vec![moves; self.sizes().len()],
        };
        Ok(ChainSettings {
            burn_in: g.burn_in.unwrap_or(moves / 10),
            moves: per,
            batches: g.batches.unwrap_or(32),
            points: g.points.unwrap_or(17),
            octaves: g.octaves.unwrap_or(8.0),
            anchor_samples: g.anchor_samples.unwrap_or(100_000),
            record_every: g.record_every.unwrap_or(1000),
        })
    }

    pub fn series_settings(&self) -> SeriesSettings {
        let s = &self.series;
        SeriesSettings {
            n_max: s.n_max.unwrap_or(40),
            mc_samples: s.mc_samples.unwrap_or(20_000),
            tail_tol: s.tail_tol.unwrap_or(1e-6),
            max_lambda_volume: s.max_lambda_volume.unwrap_or(2.0),
        }
    }

    pub fn bounds_settings(&self) -> BoundsSettings {
        let b = &self.bounds;
        BoundsSettings {
            field_samples: b.field_samples.unwrap_or(1000),
            c_delta_cubes: b.c_delta_cubes.unwrap_or(200),
            samples_per_cube: b.samples_per_cube.unwrap_or(16),
            grid_resolution: b.grid_resolution.unwrap_or(16),
            audit_trials: b.audit_trials.unwrap_or(200),
        }
    }

    /// The power-law gate when the envelope is a power law and g a power.
    pub fn gate(&self, base: Option<&Path>) -> Result<Option<bool>> {
        let env = self.envelope_spec(base)?;
        match (env.exponent(), self.growth(base)?) {
            (Some(p), GrowthFunction::Power { exponent }) => Ok(Some(power_law_gate(p, exponent)?)),
            _ => Ok(None),
        }
    }

    /// Checks everything that can be checked without sampling: the model
    /// builds, δ divides 2L for every L and δ < a/√d.
    pub fn validate(&self, base: Option<&Path>) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Validation(format!("plan name '{}' must be a non-empty path component", self.name)));
        }
        let pot = self.potential_spec(base).map_err(to_validation)?;
        let env = self.envelope_spec(base).map_err(to_validation)?;
        self.growth(base).map_err(to_validation)?;
        self.generation_mode()?;
        let (DensitySpec::Absolute(r) | DensitySpec::BulkFactor(r)) = self.density()?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Validation(format!("omega density must be non-negative, got {r}")));
        }
        if pot.dim() != env.dim() {
            return Err(Error::Validation("potential and envelope dimensions differ".into()));
        }
        if self.sizes().is_empty() {
            return Err(Error::Validation("box.sizes is empty".into()));
        }
        if self.sizes().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("box.sizes must be strictly increasing".into()));
        }
        for &l in self.sizes() {
            let bx = SimBox::new(self.dim(), l, self.delta()).map_err(to_validation)?;
            check_core_partition(&bx, pot.core()).map_err(to_validation)?;
        }
        if !(self.beta() >= 0.0 && self.beta().is_finite()) || !(self.lambda() > 0.0 && self.lambda().is_finite()) {
            return Err(Error::Validation("thermo.beta must be non-negative and thermo.lambda positive".into()));
        }
        let od = self.omega.delta.unwrap_or(1.0);
        if !(od > 0.0 && od.is_finite()) {
            return Err(Error::Validation("omega.delta must be positive".into()));
        }
        let chain = self.chain_settings()?;
        crate::ensemble::lambda_grid(self.lambda(), chain.points, chain.octaves).map_err(to_validation)?;
        if chain.moves.iter().any(|&m| m < chain.batches) {
            return Err(Error::Validation("gcmc.moves must be at least gcmc.batches".into()));
        }
        Ok(())
    }
}

fn to_validation(e: Error) -> Error {
    match e {
        Error::Io(_) | Error::Validation(_) => e,
        other => Error::Validation(other.to_string()),
    }
}
