use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, linspace, C64};

/// Uniform grid `start..=stop` with `points` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, points: usize) -> Self {
        GridSpec { start, stop, points }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::invalid(field, "bounds must be finite"));
        }
        if self.points == 0 {
            return Err(Error::invalid(field, "needs at least one point"));
        }
        if self.points > 1 && self.stop <= self.start {
            return Err(Error::invalid(field, "grid must be strictly increasing"));
        }
        Ok(())
    }

    /// Validates as a grid of interaction times.
    pub fn validate_times(&self, field: &str) -> Result<()> {
        self.validate(field)?;
        if self.start < 0.0 {
            return Err(Error::invalid(field, "times must be non-negative"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            vec![self.start]
        } else {
            linspace(self.start, self.stop, self.points)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexValue {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexValue> for C64 {
    fn from(z: ComplexValue) -> C64 {
        c(z.re, z.im)
    }
}

/// Lab direction the squeezed axis is turned to by auto-orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SqueezeAxis {
    /// Along `x`, perpendicular to the plane of the mean spin: phase squeezing.
    X,
    /// In the `y–z` plane, perpendicular to the mean spin: amplitude squeezing.
    Y,
}

impl SqueezeAxis {
    /// Angle of the squeezed axis from `x` toward the in-plane transverse direction.
    pub fn angle(self) -> f64 {
        match self {
            SqueezeAxis::X => 0.0,
            SqueezeAxis::Y => PI / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationKeyword {
    Auto,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RotationConfig {
    Angles { theta: f64, phi: f64 },
    Keyword(RotationKeyword),
}

/// Rotation applied between preparation and emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rotation {
    /// `e^{-iφ Sz} e^{-iθ Sy}`
    Angles { theta: f64, phi: f64 },
    /// Mean spin at `theta` from `−z` in the `y–z` plane, squeezed axis turned by
    /// `chi` from `x` toward the in-plane transverse direction.
    Auto { theta: f64, chi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffPolicy {
    Fixed(usize),
    Keyword(CutoffKeyword),
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        CutoffPolicy::Keyword(CutoffKeyword::Auto)
    }
}

impl CutoffPolicy {
    pub fn fixed(&self) -> Option<usize> {
        match self {
            CutoffPolicy::Fixed(n) => Some(*n),
            CutoffPolicy::Keyword(CutoffKeyword::Auto) => None,
        }
    }
}

fn default_rotation() -> RotationConfig {
    RotationConfig::Keyword(RotationKeyword::Auto)
}

fn default_auto_theta() -> f64 {
    PI / 6.0
}

fn default_squeeze_axis() -> SqueezeAxis {
    SqueezeAxis::X
}

fn default_spin_floor() -> f64 {
    0.4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Run configuration shared by the pipeline subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepConfig {
    pub num_atoms: u32,
    pub alpha: ComplexValue,
    /// Fixed stage-1 interaction time.
    #[serde(default)]
    pub tau1: Option<f64>,
    /// Search range for the stage-1 time; used when `tau1` is absent.
    #[serde(default)]
    pub tau1_range: Option<GridSpec>,
    /// Optional search over `|α|` (phase taken from `alpha`) alongside `tau1_range`.
    #[serde(default)]
    pub alpha_range: Option<GridSpec>,
    /// Lower bound on `|<S>|` during the search, as a fraction of `S`.
    #[serde(default = "default_spin_floor")]
    pub spin_floor: f64,
    /// Keep only the dominant eigenvector of the prepared atomic state.
    #[serde(default)]
    pub projective: bool,
    #[serde(default = "default_rotation")]
    pub rotation: RotationConfig,
    #[serde(default = "default_auto_theta")]
    pub auto_theta: f64,
    #[serde(default = "default_squeeze_axis")]
    pub squeeze_axis: SqueezeAxis,
    /// Radiation times; defaults to one approximate period `[0, π/√(2S)]`.
    #[serde(default)]
    pub tau3_grid: Option<GridSpec>,
    /// Quadrature angles whose variance is tracked in stage 3.
    #[serde(default)]
    pub phi_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub n_max: CutoffPolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// Points of the default radiation grid.
pub const DEFAULT_TAU3_POINTS: usize = 201;

/// Stage-1 time selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Tau1 {
    Fixed(f64),
    Search(GridSpec),
}

impl PrepConfig {
    /// Minimal configuration: fixed `τ₁`, auto-orientation, default grids.
    pub fn new(num_atoms: u32, alpha: C64, tau1: f64) -> Self {
        PrepConfig {
            num_atoms,
            alpha: ComplexValue { re: alpha.re, im: alpha.im },
            tau1: Some(tau1),
            tau1_range: None,
            alpha_range: None,
            spin_floor: default_spin_floor(),
            projective: false,
            rotation: default_rotation(),
            auto_theta: default_auto_theta(),
            squeeze_axis: default_squeeze_axis(),
            tau3_grid: None,
            phi_grid: None,
            n_max: CutoffPolicy::default(),
            seed: 0,
            output_dir: default_output_dir(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_atoms < 1 {
            return Err(Error::invalid("num_atoms", "at least one atom is required"));
        }
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        match (self.tau1, &self.tau1_range) {
            (Some(_), Some(_)) => return Err(Error::invalid("tau1", "give either tau1 or tau1_range, not both")),
            (None, None) => return Err(Error::invalid("tau1", "one of tau1 or tau1_range is required")),
            (Some(t), None) if !(t >= 0.0 && t.is_finite()) => {
                return Err(Error::invalid("tau1", "must be finite and non-negative"))
            }
            (None, Some(g)) => g.validate_times("tau1_range")?,
            _ => {}
        }
        if let Some(g) = &self.alpha_range {
            if self.tau1_range.is_none() {
                return Err(Error::invalid("alpha_range", "requires tau1_range"));
            }
            g.validate("alpha_range")?;
            if g.start < 0.0 {
                return Err(Error::invalid("alpha_range", "amplitudes must be non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.spin_floor) {
            return Err(Error::invalid("spin_floor", "must lie in [0, 1]"));
        }
        if let RotationConfig::Angles { theta, phi } = self.rotation {
            if !(theta.is_finite() && phi.is_finite()) {
                return Err(Error::invalid("rotation", "angles must be finite"));
            }
        }
        if !self.auto_theta.is_finite() {
            return Err(Error::invalid("auto_theta", "must be finite"));
        }
        if let Some(g) = &self.tau3_grid {
            g.validate_times("tau3_grid")?;
        }
        if let Some(p) = &self.phi_grid {
            if p.is_empty() {
                return Err(Error::invalid("phi_grid", "needs at least one angle"));
            }
            if p.iter().any(|x| !x.is_finite()) || p.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("phi_grid", "angles must be finite and strictly increasing"));
            }
        }
        if self.n_max == CutoffPolicy::Fixed(0) {
            return Err(Error::invalid("n_max", "cutoff must be at least 1"));
        }
        Ok(())
    }

    pub fn spin(&self) -> f64 {
        self.num_atoms as f64 / 2.0
    }

    pub fn alpha(&self) -> C64 {
        self.alpha.into()
    }

    pub fn tau1(&self) -> Tau1 {
        match (self.tau1, self.tau1_range) {
            (Some(t), _) => Tau1::Fixed(t),
            (None, Some(g)) => Tau1::Search(g),
            (None, None) => Tau1::Fixed(0.0),
        }
    }

    pub fn rotation(&self) -> Option<Rotation> {
        match self.rotation {
            RotationConfig::Angles { theta, phi } => Some(Rotation::Angles { theta, phi }),
            RotationConfig::Keyword(RotationKeyword::Auto) => Some(Rotation::Auto {
                theta: self.auto_theta,
                chi: self.squeeze_axis.angle(),
            }),
            RotationConfig::Keyword(RotationKeyword::None) => None,
        }
    }

    /// Radiation grid, defaulting to `[0, π/√(2S)]`.
    pub fn tau3_values(&self) -> Vec<f64> {
        match &self.tau3_grid {
            Some(g) => g.values(),
            None => default_tau3_grid(self.spin()).values(),
        }
    }

    pub fn phi_values(&self) -> Vec<f64> {
        self.phi_grid.clone().unwrap_or_else(default_phi_grid)
    }
}

/// One approximate oscillation period of the emitted field variance, `π/√(2S)`.
pub fn default_tau3_grid(spin: f64) -> GridSpec {
    GridSpec::new(0.0, PI / (2.0 * spin).sqrt(), DEFAULT_TAU3_POINTS)
}

pub fn default_phi_grid() -> Vec<f64> {
    (0..4).map(|k| k as f64 * PI / 4.0).collect()
}
