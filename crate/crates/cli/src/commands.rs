use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;

use dicke_cavity::dynamics::{check_heisenberg_identities, series, IdentityReport, NamedObservable, SpectralPropagator};
use dicke_cavity::hilbert::{
    build_field_matrices, build_spin_matrices, interaction_hamiltonian, interaction_tensor, DickeSpace, FockSpace,
    JointSpace, TensorOperator,
};
use dicke_cavity::io::{write_json, write_operator_blocks, write_sector_table, Manifest};
use dicke_cavity::linalg::linspace;
use dicke_cavity::pipeline::{
    radiation_cutoff, run_pipeline, scan_achievable_region, stage1_prepare, stage2_rotate, GridOptions, PrepConfig,
    Radiator, ScanConfig,
};
use dicke_cavity::quasiprob::{field_q, spin_husimi, write_pgm, BlochGridSpec, QGridSpec};
use dicke_cavity::squeezing::{default_phases, feasibility_report, thermal_occupancy, SqueezingReport};
use dicke_cavity::states::{dicke_basis, product_state, vacuum, DensityMatrix, DensityRecord, Space};

use crate::failure::Failure;
use crate::GridArgs;

/// Identity residual bound of the verification suite.
const IDENTITY_TOL: f64 = 1e-12;
/// Drift bound of the conservation suite.
const CONSERVATION_TOL: f64 = 1e-10;

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config("config", format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Failure::Config {
            field: Some(if field == "." { "config".into() } else { field }),
            message: e.into_inner().to_string(),
        }
    })
}

fn read_state(path: &Path) -> Result<DensityMatrix, Failure> {
    let record: DensityRecord = read_config(path).map_err(|f| match f {
        Failure::Config { field, message } => Failure::Config {
            field: field.map(|p| format!("state.{p}")),
            message,
        },
        other => other,
    })?;
    Ok(DensityMatrix::try_from(&record)?)
}

fn prep_config(path: &Path, out: Option<PathBuf>) -> Result<(PrepConfig, PathBuf), Failure> {
    let cfg: PrepConfig = read_config(path)?;
    cfg.validate()?;
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir).map_err(dicke_cavity::Error::from)?;
    Ok((cfg, dir))
}

fn write_state(dir: &Path, name: &str, rho: &DensityMatrix, manifest: &mut Manifest) -> Result<(), Failure> {
    let path = dir.join(name);
    write_json(&path, &DensityRecord::from(rho))?;
    manifest.add(dir, &path, "density-matrix")?;
    Ok(())
}

fn add_json<T: Serialize + ?Sized>(
    dir: &Path,
    name: &str,
    kind: &str,
    value: &T,
    manifest: &mut Manifest,
) -> Result<(), Failure> {
    let path = dir.join(name);
    write_json(&path, value)?;
    manifest.add(dir, &path, kind)?;
    Ok(())
}

fn dump_operators(dir: &Path, joint: &Arc<JointSpace>, manifest: &mut Manifest) -> Result<(), Failure> {
    let sectors = dir.join("sectors.json");
    write_sector_table(joint, &sectors)?;
    manifest.add(dir, &sectors, "sector-table")?;
    let blocks = dir.join("hamiltonian_blocks.csv");
    write_operator_blocks(&interaction_hamiltonian(joint), &blocks)?;
    manifest.add(dir, &blocks, "operator-blocks")?;
    Ok(())
}

#[derive(Serialize)]
struct PrepSummary<'a> {
    alpha: [f64; 2],
    tau1: f64,
    cutoff: usize,
    purity: f64,
    projective: bool,
    search: Option<&'a dicke_cavity::pipeline::PrepSearch>,
}

pub fn prep(config: &Path, out: Option<PathBuf>, dump: bool) -> Result<(), Failure> {
    let (cfg, dir) = prep_config(config, out)?;
    let s1 = stage1_prepare(&cfg)?;
    let mut manifest = Manifest::new("prep", Some(cfg.seed));
    write_state(&dir, "atoms.json", &s1.rho, &mut manifest)?;
    add_json(&dir, "report.json", "report", &s1.report, &mut manifest)?;
    let summary = PrepSummary {
        alpha: [s1.alpha.re, s1.alpha.im],
        tau1: s1.tau1,
        cutoff: s1.cutoff,
        purity: s1.purity,
        projective: s1.projective,
        search: s1.search.as_ref(),
    };
    add_json(&dir, "prep.json", "summary", &summary, &mut manifest)?;
    if dump {
        let joint = Arc::new(JointSpace::new(DickeSpace::new(cfg.num_atoms)?, FockSpace::new(s1.cutoff)));
        dump_operators(&dir, &joint, &mut manifest)?;
    }
    add_json(&dir, "config.json", "config", &cfg, &mut manifest)?;
    manifest.write(&dir)?;
    Ok(())
}

pub fn rotate(config: &Path, out: Option<PathBuf>, state: &Path) -> Result<(), Failure> {
    let (cfg, dir) = prep_config(config, out)?;
    let rho = read_state(state)?;
    let rotated = stage2_rotate(&rho, cfg.rotation())?;
    let report = SqueezingReport::new(&rotated, &default_phases())?;
    let mut manifest = Manifest::new("rotate", Some(cfg.seed));
    write_state(&dir, "rotated.json", &rotated, &mut manifest)?;
    add_json(&dir, "report.json", "report", &report, &mut manifest)?;
    manifest.write(&dir)?;
    Ok(())
}

#[derive(Serialize)]
struct RadiateSummary<'a> {
    tau_star: f64,
    star: &'a dicke_cavity::pipeline::FieldPoint,
    emission_end_tau: f64,
    phi_grid: &'a [f64],
    conservation: Option<dicke_cavity::pipeline::Conservation>,
}

pub fn radiate(config: &Path, out: Option<PathBuf>, state: &Path, dump: bool) -> Result<(), Failure> {
    let (cfg, dir) = prep_config(config, out)?;
    let rho = read_state(state)?;
    let d = rho.space().as_dicke()?;
    let radiator = Radiator::new(d.num_atoms())?;
    let s3 = radiator.run(&rho, &cfg.tau3_values(), &cfg.phi_values(), &state.display().to_string())?;
    let mut manifest = Manifest::new("radiate", Some(cfg.seed));
    let csv = dir.join("series.csv");
    s3.series.write_csv(&csv)?;
    manifest.add(&dir, &csv, "series")?;
    add_json(&dir, "series.json", "series-metadata", &s3.metadata, &mut manifest)?;
    write_state(&dir, "field_star.json", &s3.field_at_star, &mut manifest)?;
    let summary = RadiateSummary {
        tau_star: s3.tau_star,
        star: s3.star(),
        emission_end_tau: s3.points[s3.emission_end].tau,
        phi_grid: &s3.phi_grid,
        conservation: s3.conservation,
    };
    add_json(&dir, "stage3.json", "summary", &summary, &mut manifest)?;
    if dump {
        let joint = Arc::new(JointSpace::new(d, FockSpace::new(radiation_cutoff(d.num_atoms()))));
        dump_operators(&dir, &joint, &mut manifest)?;
    }
    manifest.write(&dir)?;
    Ok(())
}

pub fn pipeline(config: &Path, out: Option<PathBuf>, grids: GridArgs) -> Result<(), Failure> {
    let (cfg, dir) = prep_config(config, out)?;
    let options = GridOptions {
        q_resolution: grids.q_resolution,
        bloch: BlochGridSpec {
            theta_points: grids.theta_points,
            phi_points: grids.phi_points,
        },
    };
    let result = run_pipeline(&cfg, options)?;
    let mut manifest = result.write_artifacts(&dir, &cfg)?;
    write_state(&dir, "atoms.json", &result.stage1.rho, &mut manifest)?;
    write_state(&dir, "rotated.json", &result.stage2, &mut manifest)?;
    write_state(&dir, "field_star.json", &result.stage3.field_at_star, &mut manifest)?;
    manifest.write(&dir)?;
    Ok(())
}

#[derive(Serialize)]
struct RegionSummary<'a> {
    seed: u64,
    hulls: &'a [dicke_cavity::pipeline::RegionHull],
    nesting: Vec<dicke_cavity::pipeline::NestingCheck>,
}

pub fn scan_region(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg: ScanConfig = read_config(config)?;
    cfg.validate()?;
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(dicke_cavity::Error::from)?;
    let data = scan_achievable_region(&cfg)?;
    let mut manifest = Manifest::new("scan-region", Some(cfg.seed));
    let csv = dir.join("region.csv");
    data.write_csv(&csv)?;
    manifest.add(&dir, &csv, "region")?;
    let summary = RegionSummary {
        seed: data.seed,
        hulls: &data.hulls,
        nesting: data.nesting(),
    };
    add_json(&dir, "region_hulls.json", "region-hulls", &summary, &mut manifest)?;
    add_json(&dir, "config.json", "config", &cfg, &mut manifest)?;
    manifest.write(&dir)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Numerical(e.into()))
}

pub fn qfunc(state: &Path, out: &Path, extent: Option<f64>, resolution: usize, pgm: bool) -> Result<(), Failure> {
    let rho = read_state(state)?;
    ensure_dir(out)?;
    let cutoff = match rho.space() {
        Space::Fock { cutoff } | Space::Joint { cutoff, .. } => cutoff,
        Space::Dicke { .. } => return Err(Failure::config("state.space", "Q-function needs a field or joint state")),
    };
    let extent = extent.unwrap_or((cutoff as f64).sqrt() + 3.0);
    let grid = field_q(&rho, &QGridSpec::square(extent, resolution))?;
    let mut manifest = Manifest::new("qfunc", None);
    let csv = out.join("qgrid.csv");
    let sidecar = grid.write(&csv)?;
    manifest.add(out, &csv, "qgrid")?;
    manifest.add(out, &sidecar, "qgrid-metadata")?;
    if pgm {
        let p = out.join("qgrid.pgm");
        write_pgm(&p, &grid.values)?;
        manifest.add(out, &p, "qgrid-image")?;
    }
    manifest.write(out)?;
    Ok(())
}

pub fn husimi(state: &Path, out: &Path, theta_points: usize, phi_points: usize, pgm: bool) -> Result<(), Failure> {
    let rho = read_state(state)?;
    ensure_dir(out)?;
    let grid = spin_husimi(&rho, &BlochGridSpec { theta_points, phi_points })?;
    let mut manifest = Manifest::new("husimi", None);
    let csv = out.join("husimi.csv");
    let sidecar = grid.write(&csv)?;
    manifest.add(out, &csv, "husimi")?;
    manifest.add(out, &sidecar, "husimi-metadata")?;
    if pgm {
        let p = out.join("husimi.pgm");
        write_pgm(&p, &grid.values)?;
        manifest.add(out, &p, "husimi-image")?;
    }
    manifest.write(out)?;
    Ok(())
}

#[derive(Serialize)]
struct ConservationRecord {
    num_atoms: u32,
    cutoff: usize,
    norm: f64,
    excitation: f64,
    energy: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    identity_tolerance: f64,
    conservation_tolerance: f64,
    identities: Vec<IdentityReport>,
    conservation: Vec<ConservationRecord>,
    passed: bool,
}

fn drift(v: &[f64]) -> f64 {
    v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max)
}

/// Norm, `<a†a + Sz>` and `<H>` drift for `|S,S> ⊗ |0>` over `τ ∈ [0, 10]`.
fn conservation_run(num_atoms: u32, cutoff: usize) -> Result<ConservationRecord, Failure> {
    let dicke = DickeSpace::new(num_atoms)?;
    let fock = FockSpace::new(cutoff);
    let joint = Arc::new(JointSpace::new(dicke, fock));
    let prop = SpectralPropagator::new(Arc::new(interaction_hamiltonian(&joint)))?;
    let spin = build_spin_matrices(&dicke);
    let field = build_field_matrices(&fock);
    let excitation = &TensorOperator::field(dicke, fock, &field.a_dag * &field.a)
        + &TensorOperator::atom(dicke, fock, spin.sz.clone());
    let obs = [
        NamedObservable::mean("norm", TensorOperator::identity(dicke, fock)),
        NamedObservable::mean("excitation", excitation),
        NamedObservable::mean("energy", interaction_tensor(dicke, fock, 1.0)),
    ];
    let psi = product_state(dicke_basis(&dicke, dicke.top())?, vacuum(&fock))?;
    let s = series(&prop, &psi, &obs, &linspace(0.0, 10.0, 101), "top state + vacuum")?;
    let col = |n: &str| drift(&s.real(n).expect("column"));
    Ok(ConservationRecord {
        num_atoms,
        cutoff,
        norm: col("norm"),
        excitation: col("excitation"),
        energy: col("energy"),
    })
}

pub fn verify(atoms: &[u32], n_max: &[usize], phis: &[f64], out: &Path) -> Result<(), Failure> {
    ensure_dir(out)?;
    let mut identities = Vec::new();
    let mut conservation = Vec::new();
    for &n in atoms {
        let dicke = DickeSpace::new(n)?;
        for &cutoff in n_max {
            if cutoff == 0 {
                return Err(Failure::config("n-max", "cutoff must be at least 1"));
            }
            let joint = JointSpace::new(dicke, FockSpace::new(cutoff));
            for &phi in phis {
                identities.push(check_heisenberg_identities(&joint, phi, 1.0));
            }
            conservation.push(conservation_run(n, cutoff)?);
        }
    }
    let ids_ok = identities.iter().all(|r| r.max_interior() <= IDENTITY_TOL);
    let cons_ok = conservation
        .iter()
        .all(|c| c.norm.max(c.excitation).max(c.energy) <= CONSERVATION_TOL);
    let report = VerifyReport {
        identity_tolerance: IDENTITY_TOL,
        conservation_tolerance: CONSERVATION_TOL,
        identities,
        conservation,
        passed: ids_ok && cons_ok,
    };
    let mut manifest = Manifest::new("verify", None);
    add_json(out, "verify.json", "verify-report", &report, &mut manifest)?;
    manifest.write(out)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "identity suite {}, conservation suite {}; see {}",
            if ids_ok { "passed" } else { "failed" },
            if cons_ok { "passed" } else { "failed" },
            out.join("verify.json").display()
        )))
    }
}

pub struct FeasibilityArgs {
    pub coupling_hz: f64,
    pub tau: f64,
    pub lifetime_s: f64,
    pub cavity_lifetime_s: f64,
    pub frequency_hz: f64,
    pub temperature_k: f64,
}

#[derive(Serialize)]
struct FeasibilityJson {
    report: dicke_cavity::squeezing::FeasibilityReport,
    frequency_hz: f64,
    temperature_k: f64,
    thermal_occupancy: f64,
}

pub fn feasibility(args: FeasibilityArgs, out: &Path) -> Result<(), Failure> {
    ensure_dir(out)?;
    let report = feasibility_report(args.coupling_hz, args.tau, args.lifetime_s, args.cavity_lifetime_s)?;
    let occupancy = thermal_occupancy(args.frequency_hz, args.temperature_k)?;
    let mut manifest = Manifest::new("feasibility", None);
    let text = out.join("feasibility.txt");
    fs::write(
        &text,
        format!(
            "{}thermal photons    : {:.4e} at {:.3e} Hz, {} K\n",
            report.to_text(),
            occupancy,
            args.frequency_hz,
            args.temperature_k
        ),
    )
    .map_err(|e| Failure::Numerical(e.into()))?;
    manifest.add(out, &text, "feasibility-text")?;
    let json = FeasibilityJson {
        report,
        frequency_hz: args.frequency_hz,
        temperature_k: args.temperature_k,
        thermal_occupancy: occupancy,
    };
    add_json(out, "feasibility.json", "feasibility", &json, &mut manifest)?;
    manifest.write(out)?;
    Ok(())
}
