use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{default_tau3_grid, Rotation};
use super::hull::{convex_hull, polygon_area, uncovered_fraction, Point};
use super::prepare::Preparer;
use super::radiate::Radiator;
use super::rotate::stage2_rotate;
use crate::error::{Error, Result};
use crate::linalg::{c, linspace};
use crate::states::DensityMatrix;

fn default_alphas() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
}

fn default_tau1s() -> Vec<f64> {
    vec![0.1, 0.2, 0.35, 0.6, 1.0]
}

fn default_thetas() -> Vec<f64> {
    linspace(0.0, std::f64::consts::PI, 9)
}

fn default_chis() -> Vec<f64> {
    vec![0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2]
}

fn default_tau3_points() -> usize {
    41
}

fn default_exhaustive_max() -> u32 {
    20
}

fn default_samples() -> usize {
    48
}

/// Sweep of preparations and rotations per atom number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub atom_counts: Vec<u32>,
    /// Stage-1 coherent amplitudes (real).
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_tau1s")]
    pub tau1s: Vec<f64>,
    /// Tilt of the mean spin from `−z` after rotation.
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// Squeezed-axis angle from `x` (0 phase, π/2 amplitude).
    #[serde(default = "default_chis")]
    pub chis: Vec<f64>,
    /// Points of each radiation series on `[0, π/√(2S)]`.
    #[serde(default = "default_tau3_points")]
    pub tau3_points: usize,
    /// Atom numbers above this are sampled instead of swept exhaustively.
    #[serde(default = "default_exhaustive_max")]
    pub exhaustive_max_atoms: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ScanConfig {
    pub fn new(atom_counts: Vec<u32>) -> Self {
        ScanConfig {
            atom_counts,
            alphas: default_alphas(),
            tau1s: default_tau1s(),
            thetas: default_thetas(),
            chis: default_chis(),
            tau3_points: default_tau3_points(),
            exhaustive_max_atoms: default_exhaustive_max(),
            samples: default_samples(),
            seed: 0,
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atom_counts.is_empty() || self.atom_counts.contains(&0) {
            return Err(Error::invalid("atom_counts", "need at least one positive atom number"));
        }
        for (field, v) in [("alphas", &self.alphas), ("tau1s", &self.tau1s), ("thetas", &self.thetas), ("chis", &self.chis)] {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(field, "needs finite values"));
            }
        }
        if self.alphas.iter().any(|a| *a < 0.0) {
            return Err(Error::invalid("alphas", "amplitudes must be non-negative"));
        }
        if self.tau1s.iter().any(|t| *t < 0.0) {
            return Err(Error::invalid("tau1s", "times must be non-negative"));
        }
        if self.tau3_points < 2 {
            return Err(Error::invalid("tau3_points", "need at least two points"));
        }
        Ok(())
    }
}

/// One achieved field state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub num_atoms: u32,
    pub amplitude: f64,
    pub var_min_phi: f64,
    pub var_fixed_phi: f64,
    pub var_amplitude: f64,
    pub var_phase: f64,
    pub tau: f64,
    pub alpha: f64,
    pub tau1: f64,
    pub theta: f64,
    pub chi: f64,
}

/// Hull of the `(|<a>|, variance)` cloud of one atom number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionHull {
    pub num_atoms: u32,
    pub min_phi: Vec<Point>,
    pub min_phi_area: f64,
    pub fixed_phi: Vec<Point>,
    pub fixed_phi_area: f64,
    pub max_amplitude: f64,
    pub points: usize,
    pub jobs: usize,
    /// Jobs skipped because auto-orientation had no mean spin direction.
    pub skipped: usize,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDataset {
    pub seed: u64,
    pub points: Vec<RegionPoint>,
    pub hulls: Vec<RegionHull>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct JobKey {
    prep: usize,
    theta: usize,
    chi: usize,
}

fn prepared_states(cfg: &ScanConfig, n: u32) -> Result<Vec<(f64, f64, DensityMatrix)>> {
    let max_alpha = cfg.alphas.iter().copied().fold(0.0, f64::max);
    let preparer = Preparer::for_amplitude(n, max_alpha, Default::default())?;
    let mut out = Vec::new();
    for &alpha in &cfg.alphas {
        let e = preparer.expand(c(alpha, 0.0))?;
        for &tau1 in &cfg.tau1s {
            out.push((alpha, tau1, preparer.atoms_at(&e, tau1)));
        }
    }
    Ok(out)
}

fn scan_atoms(cfg: &ScanConfig, n: u32) -> Result<(Vec<RegionPoint>, RegionHull)> {
    let preps = prepared_states(cfg, n)?;
    let radiator = Radiator::new(n)?.without_conservation();
    let taus = linspace(0.0, default_tau3_grid(n as f64 / 2.0).stop, cfg.tau3_points);
    let mut keys: Vec<JobKey> = Vec::new();
    for prep in 0..preps.len() {
        for theta in 0..cfg.thetas.len() {
            for chi in 0..cfg.chis.len() {
                keys.push(JobKey { prep, theta, chi });
            }
        }
    }
    let sampled = n > cfg.exhaustive_max_atoms && cfg.samples < keys.len();
    if sampled {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ u64::from(n));
        let mut picked: Vec<JobKey> = sample(&mut rng, keys.len(), cfg.samples).into_iter().map(|i| keys[i]).collect();
        picked.sort();
        keys = picked;
    }
    let results: Vec<(JobKey, Result<Vec<RegionPoint>>)> = keys
        .par_iter()
        .map(|&key| {
            let (alpha, tau1, rho) = &preps[key.prep];
            let (theta, chi) = (cfg.thetas[key.theta], cfg.chis[key.chi]);
            let run = || -> Result<Vec<RegionPoint>> {
                let rotated = stage2_rotate(rho, Some(Rotation::Auto { theta, chi }))?;
                let s3 = radiator.run(&rotated, &taus, &[], "scan")?;
                Ok(s3
                    .points
                    .iter()
                    .map(|p| RegionPoint {
                        num_atoms: n,
                        amplitude: p.amplitude.norm(),
                        var_min_phi: p.var_min_phi,
                        var_fixed_phi: p.var_fixed_phi,
                        var_amplitude: p.var_amplitude,
                        var_phase: p.var_phase,
                        tau: p.tau,
                        alpha: *alpha,
                        tau1: *tau1,
                        theta,
                        chi,
                    })
                    .collect())
            };
            (key, run())
        })
        .collect();
    let mut sorted = results;
    sorted.sort_by_key(|(k, _)| *k);
    let jobs = sorted.len();
    let mut skipped = 0;
    let mut points = Vec::new();
    for (_, r) in sorted {
        match r {
            Ok(p) => points.extend(p),
            Err(Error::DegenerateMeanSpin { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let cloud = |f: fn(&RegionPoint) -> f64| -> Vec<Point> { points.iter().map(|p| [p.amplitude, f(p)]).collect() };
    let min_phi = convex_hull(&cloud(|p| p.var_min_phi));
    let fixed_phi = convex_hull(&cloud(|p| p.var_fixed_phi));
    let hull = RegionHull {
        num_atoms: n,
        min_phi_area: polygon_area(&min_phi),
        min_phi,
        fixed_phi_area: polygon_area(&fixed_phi),
        fixed_phi,
        max_amplitude: points.iter().map(|p| p.amplitude).fold(0.0, f64::max),
        points: points.len(),
        jobs,
        skipped,
        sampled,
    };
    Ok((points, hull))
}

/// Run the sweep for every atom number, in the configured order.
pub fn scan_achievable_region(cfg: &ScanConfig) -> Result<RegionDataset> {
    cfg.validate()?;
    let mut points = Vec::new();
    let mut hulls = Vec::new();
    for &n in &cfg.atom_counts {
        let (p, h) = scan_atoms(cfg, n)?;
        points.extend(p);
        hulls.push(h);
    }
    Ok(RegionDataset {
        seed: cfg.seed,
        points,
        hulls,
    })
}

/// Containment of consecutive regions and growth of the largest amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingCheck {
    pub smaller: u32,
    pub larger: u32,
    /// Area fraction of the smaller hull outside the larger one.
    pub uncovered_min_phi: f64,
    pub uncovered_fixed_phi: f64,
    pub max_amplitude_nondecreasing: bool,
}

impl RegionDataset {
    pub fn hull(&self, num_atoms: u32) -> Option<&RegionHull> {
        self.hulls.iter().find(|h| h.num_atoms == num_atoms)
    }

    /// Checks for every pair of consecutive atom numbers (sorted ascending).
    pub fn nesting(&self) -> Vec<NestingCheck> {
        let mut hs: Vec<&RegionHull> = self.hulls.iter().collect();
        hs.sort_by_key(|h| h.num_atoms);
        hs.windows(2)
            .map(|w| NestingCheck {
                smaller: w[0].num_atoms,
                larger: w[1].num_atoms,
                uncovered_min_phi: uncovered_fraction(&w[0].min_phi, &w[1].min_phi),
                uncovered_fixed_phi: uncovered_fraction(&w[0].fixed_phi, &w[1].fixed_phi),
                max_amplitude_nondecreasing: w[1].max_amplitude >= w[0].max_amplitude,
            })
            .collect()
    }

    /// `region.csv`: one row per achieved point.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "N", "abs_a", "var_min_phi", "var_fixed_phi", "tau", "alpha", "tau1", "theta_r", "chi", "var_amplitude",
            "var_phase",
        ])?;
        for p in &self.points {
            w.write_record([
                p.num_atoms.to_string(),
                format!("{:.17e}", p.amplitude),
                format!("{:.17e}", p.var_min_phi),
                format!("{:.17e}", p.var_fixed_phi),
                format!("{:.17e}", p.tau),
                format!("{:.17e}", p.alpha),
                format!("{:.17e}", p.tau1),
                format!("{:.17e}", p.theta),
                format!("{:.17e}", p.chi),
                format!("{:.17e}", p.var_amplitude),
                format!("{:.17e}", p.var_phase),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
