//! Three-stage protocol: squeeze the atoms with a coherent field, rotate the
//! collective spin, radiate into a vacuum cavity. Also the preparation search
//! and the achievable-region scan.

pub mod config;
pub mod hull;
pub mod prepare;
pub mod radiate;
pub mod rotate;
pub mod scan;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{
    default_phi_grid, default_tau3_grid, ComplexValue, CutoffPolicy, GridSpec, PrepConfig, Rotation,
    RotationConfig, SqueezeAxis, Tau1,
};
pub use prepare::{
    default_search_grids, prep_cutoff, search_preparation, stage1_prepare, PrepPoint, PrepSearch, Preparer, Stage1,
};
pub use radiate::{quadrature_variance, radiation_cutoff, stage3_radiate, Conservation, FieldPoint, Radiator, Stage3};
pub use rotate::{auto_frame, rotation_unitary, stage2_rotate};
pub use scan::{scan_achievable_region, NestingCheck, RegionDataset, RegionHull, RegionPoint, ScanConfig};

use crate::error::Result;
use crate::io::{write_json, Manifest};
use crate::quasiprob::{field_q, profile_match, spin_husimi, BlochGrid, BlochGridSpec, ProfileMapping, QGrid, QGridSpec};
use crate::squeezing::{default_phases, SqueezingReport};
use crate::states::{spin_vector, DensityMatrix};

/// All outputs of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub stage1: Stage1,
    pub stage2: DensityMatrix,
    pub stage2_report: SqueezingReport,
    pub stage3: Stage3,
    /// Field Q-function at `τ*`.
    pub qgrid: QGrid,
    /// Husimi distribution of the rotated atoms.
    pub husimi: BlochGrid,
    /// Pearson score between the two under the approximate phase-space map.
    pub profile_score: f64,
}

/// Options for the quasi-probability grids of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub q_resolution: usize,
    pub bloch: BlochGridSpec,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            q_resolution: 201,
            bloch: BlochGridSpec::default(),
        }
    }
}

/// Field Q-function grid sized for `spin` at the given resolution.
pub fn q_spec(spin: f64, resolution: usize) -> QGridSpec {
    let mut spec = QGridSpec::for_spin(spin);
    spec.resolution = resolution;
    spec
}

pub fn run_pipeline(config: &PrepConfig, grids: GridOptions) -> Result<PipelineResult> {
    let stage1 = stage1_prepare(config)?;
    let stage2 = stage2_rotate(&stage1.rho, config.rotation())?;
    let stage2_report = SqueezingReport::new(&stage2, &default_phases())?;
    let stage3 = stage3_radiate(&stage2, &config.tau3_values(), &config.phi_values())?;
    let qgrid = field_q(&stage3.field_at_star, &q_spec(config.spin(), grids.q_resolution))?;
    let husimi = spin_husimi(&stage2, &grids.bloch)?;
    let s0 = spin_vector(&stage2)?.magnitude();
    let profile_score = profile_match(&qgrid, &husimi, &ProfileMapping::for_mean_spin(s0))?;
    Ok(PipelineResult {
        stage1,
        stage2,
        stage2_report,
        stage3,
        qgrid,
        husimi,
        profile_score,
    })
}

#[derive(Serialize)]
struct StageSummary<'a> {
    alpha: [f64; 2],
    tau1: f64,
    prep_cutoff: usize,
    purity: f64,
    projective: bool,
    search: Option<&'a PrepSearch>,
    tau_star: f64,
    star: &'a FieldPoint,
    emission_end_tau: f64,
    phi_grid: &'a [f64],
    conservation: Option<Conservation>,
    profile_score: f64,
}

#[derive(Serialize)]
struct Reports<'a> {
    stage1: &'a SqueezingReport,
    stage2: &'a SqueezingReport,
}

impl PipelineResult {
    /// Writes series, grids, reports and the manifest into `dir`.
    pub fn write_artifacts(&self, dir: &Path, config: &PrepConfig) -> Result<Manifest> {
        std::fs::create_dir_all(dir)?;
        let mut manifest = Manifest::new("pipeline", Some(config.seed));
        let s3 = &self.stage3;

        let series_csv = dir.join("series.csv");
        s3.series.write_csv(&series_csv)?;
        let series_json = dir.join("series.json");
        write_json(&series_json, &s3.metadata)?;
        let q_csv = dir.join("qgrid.csv");
        let q_json = self.qgrid.write(&q_csv)?;
        let h_csv = dir.join("husimi.csv");
        let h_json = self.husimi.write(&h_csv)?;
        let report = dir.join("report.json");
        write_json(
            &report,
            &Reports {
                stage1: &self.stage1.report,
                stage2: &self.stage2_report,
            },
        )?;
        let summary = dir.join("summary.json");
        write_json(
            &summary,
            &StageSummary {
                alpha: [self.stage1.alpha.re, self.stage1.alpha.im],
                tau1: self.stage1.tau1,
                prep_cutoff: self.stage1.cutoff,
                purity: self.stage1.purity,
                projective: self.stage1.projective,
                search: self.stage1.search.as_ref(),
                tau_star: s3.tau_star,
                star: s3.star(),
                emission_end_tau: s3.points[s3.emission_end].tau,
                phi_grid: &s3.phi_grid,
                conservation: s3.conservation,
                profile_score: self.profile_score,
            },
        )?;
        let config_out = dir.join("config.json");
        write_json(&config_out, config)?;

        let files: [(PathBuf, &str); 9] = [
            (series_csv, "series"),
            (series_json, "series-metadata"),
            (q_csv, "qgrid"),
            (q_json, "qgrid-metadata"),
            (h_csv, "husimi"),
            (h_json, "husimi-metadata"),
            (report, "report"),
            (summary, "summary"),
            (config_out, "config"),
        ];
        for (path, kind) in &files {
            manifest.add(dir, path, kind)?;
        }
        manifest.write(dir)?;
        Ok(manifest)
    }
}
