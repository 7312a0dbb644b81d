use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{series, NamedObservable, ObservableSeries, SeriesMetadata, SpectralPropagator};
use crate::error::{Error, Result};
use crate::hilbert::{
    build_field_matrices, build_spin_matrices, directional_field_op, interaction_hamiltonian, interaction_tensor,
    DickeSpace, FockSpace, JointSpace, TensorOperator,
};
use crate::linalg::{cis, C64};
use crate::states::{partial_trace, product_state, vacuum, DensityMatrix, JointState, Keep};

/// Quadrature angle of the fixed-phase variance variant.
pub const FIXED_PHI: f64 = FRAC_PI_2;

/// Largest population tolerated on the last Fock level.
pub const EDGE_TOL: f64 = 1e-10;

/// Cutoff for emission into vacuum: every atomic excitation fits, plus two
/// empty levels.
pub fn radiation_cutoff(num_atoms: u32) -> usize {
    num_atoms as usize + 2
}

/// Field moments at one radiation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub tau: f64,
    pub amplitude: C64,
    pub photons: f64,
    /// `min_φ Var(a_φ) = ¼(2<Δa†Δa> + 1 − 2|<Δa²>|)`
    pub var_min_phi: f64,
    pub phi_min: f64,
    /// Variance along the phase of `<a>`.
    pub var_amplitude: f64,
    /// Variance perpendicular to the phase of `<a>`.
    pub var_phase: f64,
    pub var_fixed_phi: f64,
    pub sz: f64,
    /// Mean-spin angle from `−z`.
    pub theta: f64,
}

/// Quadrature variance `Var(a_φ)` from `N = <a†a> − |<a>|²` and `C = <a²> − <a>²`.
pub fn quadrature_variance(normal: f64, anomalous: C64, phi: f64) -> f64 {
    0.25 * (2.0 * normal + 1.0 + 2.0 * (cis(-2.0 * phi) * anomalous).re)
}

impl FieldPoint {
    fn new(tau: f64, a: C64, a2: C64, n: f64, spin: [f64; 3]) -> Self {
        let normal = n - a.norm_sqr();
        let anomalous = a2 - a * a;
        let phi_min = 0.5 * (anomalous.arg() + std::f64::consts::PI);
        let phase = if a.norm() > 0.0 { a.arg() } else { 0.0 };
        let len = (spin[0] * spin[0] + spin[1] * spin[1] + spin[2] * spin[2]).sqrt();
        FieldPoint {
            tau,
            amplitude: a,
            photons: n,
            var_min_phi: 0.25 * (2.0 * normal + 1.0 - 2.0 * anomalous.norm()),
            phi_min,
            var_amplitude: quadrature_variance(normal, anomalous, phase),
            var_phase: quadrature_variance(normal, anomalous, phase + FRAC_PI_2),
            var_fixed_phi: quadrature_variance(normal, anomalous, FIXED_PHI),
            sz: spin[2],
            theta: if len > 0.0 { (-spin[2] / len).clamp(-1.0, 1.0).acos() } else { f64::NAN },
        }
    }
}

/// Largest drift of the conserved quantities along a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conservation {
    pub norm: f64,
    /// `<a†a + Sz>`
    pub excitation: f64,
    pub energy: f64,
}

impl Conservation {
    pub fn max(&self) -> f64 {
        self.norm.max(self.excitation).max(self.energy)
    }
}

fn drift(values: &[f64]) -> f64 {
    values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max)
}

/// Stage-3 output.
#[derive(Debug, Clone)]
pub struct Stage3 {
    pub series: ObservableSeries,
    pub metadata: SeriesMetadata,
    pub points: Vec<FieldPoint>,
    pub phi_grid: Vec<f64>,
    /// Index of the first local maximum of `<a†a>`; the emission window is
    /// `points[..=emission_end]`.
    pub emission_end: usize,
    pub star_index: usize,
    pub tau_star: f64,
    pub field_at_star: DensityMatrix,
    /// Absent when the radiator skips conservation tracking.
    pub conservation: Option<Conservation>,
}

impl Stage3 {
    pub fn emission_window(&self) -> &[FieldPoint] {
        &self.points[..=self.emission_end]
    }

    pub fn star(&self) -> &FieldPoint {
        &self.points[self.star_index]
    }
}

/// Emission of an atomic state into the vacuum, reusable across states with
/// the same atom number.
pub struct Radiator {
    dicke: DickeSpace,
    fock: FockSpace,
    propagator: SpectralPropagator,
    conservation: bool,
}

impl Radiator {
    pub fn new(num_atoms: u32) -> Result<Self> {
        Self::with_cutoff(num_atoms, radiation_cutoff(num_atoms))
    }

    pub fn with_cutoff(num_atoms: u32, cutoff: usize) -> Result<Self> {
        let dicke = DickeSpace::new(num_atoms)?;
        let fock = FockSpace::new(cutoff);
        let joint = Arc::new(JointSpace::new(dicke, fock));
        let propagator = SpectralPropagator::new(Arc::new(interaction_hamiltonian(&joint)))?;
        Ok(Radiator {
            dicke,
            fock,
            propagator,
            conservation: true,
        })
    }

    /// Skip the `<H>` and norm columns, roughly halving the cost of a run.
    pub fn without_conservation(mut self) -> Self {
        self.conservation = false;
        self
    }

    pub fn propagator(&self) -> &SpectralPropagator {
        &self.propagator
    }

    fn initial(&self, rho_atom: &DensityMatrix) -> Result<JointState> {
        let d = rho_atom.space().as_dicke()?;
        if d != self.dicke {
            return Err(Error::mismatch(self.dicke.dim(), d.dim()));
        }
        product_state(rho_atom.clone(), vacuum(&self.fock))
    }

    fn observables(&self, phis: &[f64]) -> Vec<NamedObservable> {
        let (d, f) = (self.dicke, self.fock);
        let spin = build_spin_matrices(&d);
        let field = build_field_matrices(&f);
        let number = &field.a_dag * &field.a;
        let mut edge = crate::linalg::CMatrix::zeros(f.dim(), f.dim());
        edge[(f.cutoff(), f.cutoff())] = C64::new(1.0, 0.0);
        let mut obs = vec![
            NamedObservable::mean("a", TensorOperator::field(d, f, field.a.clone())),
            NamedObservable::mean("a2", TensorOperator::field(d, f, &field.a * &field.a)),
            NamedObservable::mean("n", TensorOperator::field(d, f, number)),
            NamedObservable::mean("sx", TensorOperator::atom(d, f, spin.sx.clone())),
            NamedObservable::mean("sy", TensorOperator::atom(d, f, spin.sy.clone())),
            NamedObservable::mean("sz", TensorOperator::atom(d, f, spin.sz.clone())),
            NamedObservable::mean("edge", TensorOperator::field(d, f, edge)),
        ];
        if self.conservation {
            obs.push(NamedObservable::mean("norm", TensorOperator::identity(d, f)));
            obs.push(NamedObservable::mean("energy", interaction_tensor(d, f, 1.0)));
        }
        for (k, &phi) in phis.iter().enumerate() {
            obs.push(NamedObservable::variance(
                format!("var_a_phi{k}"),
                TensorOperator::field(d, f, directional_field_op(phi, &f)),
            ));
        }
        obs
    }

    /// Radiate `rho_atom` into the vacuum over `taus`.
    pub fn run(&self, rho_atom: &DensityMatrix, taus: &[f64], phis: &[f64], label: &str) -> Result<Stage3> {
        if taus.is_empty() {
            return Err(Error::invalid("tau3_grid", "empty grid"));
        }
        if taus.windows(2).any(|w| w[1] <= w[0]) || taus[0] < 0.0 {
            return Err(Error::invalid("tau3_grid", "times must be non-negative and strictly increasing"));
        }
        let state0 = self.initial(rho_atom)?;
        let mut s = series(&self.propagator, &state0, &self.observables(phis), taus, label)?;
        let col = |name: &str| s.get(name).expect("observable present").to_vec();
        let (a, a2) = (col("a"), col("a2"));
        let re = |name: &str| s.real(name).expect("observable present");
        let (n, sx, sy, sz) = (re("n"), re("sx"), re("sy"), re("sz"));
        let points: Vec<FieldPoint> = (0..taus.len())
            .map(|i| FieldPoint::new(taus[i], a[i], a2[i], n[i], [sx[i], sy[i], sz[i]]))
            .collect();

        let edge = re("edge").into_iter().fold(0.0, f64::max);
        if edge > EDGE_TOL {
            return Err(Error::CutoffTooSmall {
                cutoff: self.fock.cutoff(),
                tail: edge,
                tolerance: EDGE_TOL,
            });
        }
        let conservation = self.conservation.then(|| {
            let excitation: Vec<f64> = n.iter().zip(&sz).map(|(x, y)| x + y).collect();
            Conservation {
                norm: drift(&re("norm")),
                excitation: drift(&excitation),
                energy: drift(&re("energy")),
            }
        });

        let emission_end = (1..points.len().saturating_sub(1))
            .find(|&i| points[i].photons >= points[i - 1].photons && points[i].photons > points[i + 1].photons)
            .unwrap_or(points.len() - 1);
        let star_index = points
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.var_min_phi.total_cmp(&y.1.var_min_phi))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let tau_star = taus[star_index];
        let field_at_star = self.field_at(&state0, tau_star)?;

        for (name, values) in [
            ("var_min_phi", points.iter().map(|p| p.var_min_phi).collect::<Vec<_>>()),
            ("phi_min", points.iter().map(|p| p.phi_min).collect()),
            ("var_amplitude", points.iter().map(|p| p.var_amplitude).collect()),
            ("var_phase", points.iter().map(|p| p.var_phase).collect()),
            ("var_fixed_phi", points.iter().map(|p| p.var_fixed_phi).collect()),
            ("theta", points.iter().map(|p| p.theta).collect()),
        ] {
            s.push_column(name, &values)?;
        }
        let metadata = s.metadata(&self.propagator);
        Ok(Stage3 {
            series: s,
            metadata,
            points,
            phi_grid: phis.to_vec(),
            emission_end,
            star_index,
            tau_star,
            field_at_star,
            conservation,
        })
    }

    /// Reduced field state at `tau`, rejecting states that reach the cutoff.
    pub fn field_at(&self, state0: &JointState, tau: f64) -> Result<DensityMatrix> {
        let evolved = self.propagator.evolve(state0, tau)?;
        let rho = partial_trace(&evolved, Keep::Field);
        let edge = rho.matrix()[(self.fock.cutoff(), self.fock.cutoff())].re;
        if edge > EDGE_TOL {
            return Err(Error::CutoffTooSmall {
                cutoff: self.fock.cutoff(),
                tail: edge,
                tolerance: EDGE_TOL,
            });
        }
        Ok(rho)
    }

    /// Reduced atomic state at `tau`.
    pub fn atoms_at(&self, rho_atom: &DensityMatrix, tau: f64) -> Result<DensityMatrix> {
        let state0 = self.initial(rho_atom)?;
        Ok(partial_trace(&self.propagator.evolve(&state0, tau)?, Keep::Atom))
    }
}

/// One-shot radiation of `rho_atom` with the default cutoff.
pub fn stage3_radiate(rho_atom: &DensityMatrix, taus: &[f64], phis: &[f64]) -> Result<Stage3> {
    let d = rho_atom.space().as_dicke()?;
    Radiator::new(d.num_atoms())?.run(rho_atom, taus, phis, "stage2 atoms + vacuum")
}
