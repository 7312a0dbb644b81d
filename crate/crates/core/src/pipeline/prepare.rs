use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CutoffPolicy, GridSpec, PrepConfig, Tau1};
use crate::dynamics::{Expansion, SpectralPropagator};
use crate::error::{Error, Result};
use crate::hilbert::{interaction_hamiltonian, joint_matrix, DickeSpace, FockSpace, JointSpace};
use crate::linalg::{cis, C64};
use crate::squeezing::{min_transverse_variance, SqueezingReport, default_phases};
use crate::states::{coherent_state, dicke_basis, product_state, required_cutoff, DensityMatrix, Space};

/// Tail-mass tolerance of the coherent input field.
pub const PREP_TAIL_TOL: f64 = 1e-12;

/// Cutoff for a coherent input `|α|` next to `2S` atomic excitations: the
/// coherent tail bound plus room for every atomic quantum, so all populated
/// excitation sectors are complete.
pub fn prep_cutoff(spin: f64, alpha_abs: f64) -> usize {
    let tail = required_cutoff(alpha_abs, PREP_TAIL_TOL);
    let headroom = alpha_abs.powi(2).ceil() as usize;
    tail.max(headroom) + (2.0 * spin).round() as usize
}

/// Squeezing figures of one candidate preparation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepPoint {
    pub alpha: f64,
    pub tau1: f64,
    pub lambda_min: f64,
    pub mean_spin: f64,
    /// `λ_min / (|<S>|/2)`, infinite when the mean spin is degenerate.
    pub zeta: f64,
    /// `|<S>|` is above the search floor.
    pub feasible: bool,
}

/// Joint dynamics of `|S, S> ⊗ |α>` for one atom number and cutoff.
pub struct Preparer {
    dicke: DickeSpace,
    fock: FockSpace,
    propagator: SpectralPropagator,
}

impl Preparer {
    pub fn new(num_atoms: u32, cutoff: usize) -> Result<Self> {
        let dicke = DickeSpace::new(num_atoms)?;
        let fock = FockSpace::new(cutoff);
        let joint = Arc::new(JointSpace::new(dicke, fock));
        let propagator = SpectralPropagator::new(Arc::new(interaction_hamiltonian(&joint)))?;
        Ok(Preparer {
            dicke,
            fock,
            propagator,
        })
    }

    /// Sized for coherent amplitudes up to `max_alpha` (or a fixed cutoff).
    pub fn for_amplitude(num_atoms: u32, max_alpha: f64, policy: CutoffPolicy) -> Result<Self> {
        let cutoff = policy
            .fixed()
            .unwrap_or_else(|| prep_cutoff(num_atoms as f64 / 2.0, max_alpha));
        Self::new(num_atoms, cutoff)
    }

    pub fn propagator(&self) -> &SpectralPropagator {
        &self.propagator
    }

    pub fn cutoff(&self) -> usize {
        self.fock.cutoff()
    }

    /// Expansion of the initial product state in the energy basis.
    pub fn expand(&self, alpha: C64) -> Result<Expansion<'_>> {
        let field = coherent_state(alpha, &self.fock, PREP_TAIL_TOL)?;
        let atoms = dicke_basis(&self.dicke, self.dicke.top())?;
        let psi = product_state(atoms, field)?;
        let (_, v) = psi.components()[0];
        self.propagator.expand(v)
    }

    /// Reduced atomic state at `tau`.
    pub fn atoms_at(&self, expansion: &Expansion<'_>, tau: f64) -> DensityMatrix {
        let psi = expansion.at(tau);
        let g = joint_matrix(&psi, self.dicke.dim(), self.fock.dim());
        let rho = &g * g.adjoint();
        // exact hermiticity for downstream eigen-decompositions
        let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::new(Space::dicke(self.dicke), rho).expect("reduced state of a normalized vector")
    }

    pub fn point(&self, expansion: &Expansion<'_>, alpha: f64, tau: f64, floor: f64) -> PrepPoint {
        let rho = self.atoms_at(expansion, tau);
        match min_transverse_variance(&rho) {
            Ok(t) => {
                let mean_spin = t.mean_length();
                PrepPoint {
                    alpha,
                    tau1: tau,
                    lambda_min: t.lambda_min(),
                    mean_spin,
                    zeta: t.lambda_min() / (mean_spin / 2.0),
                    feasible: mean_spin >= floor,
                }
            }
            Err(_) => PrepPoint {
                alpha,
                tau1: tau,
                lambda_min: f64::NAN,
                mean_spin: 0.0,
                zeta: f64::INFINITY,
                feasible: false,
            },
        }
    }
}

fn objective(p: &PrepPoint) -> f64 {
    if p.feasible {
        p.zeta
    } else {
        f64::INFINITY
    }
}

/// Golden-section minimization on `[lo, hi]` down to `tol`.
fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Time resolution of the golden-section refinement.
pub const SEARCH_TOL: f64 = 1e-9;

/// Coarse grid in `τ₁` followed by golden-section refinement around the best
/// feasible node, for one amplitude.
pub fn search_tau(
    preparer: &Preparer,
    alpha: C64,
    taus: &[f64],
    floor: f64,
) -> Result<(PrepPoint, Vec<PrepPoint>)> {
    let expansion = preparer.expand(alpha)?;
    let amp = alpha.norm();
    let grid: Vec<PrepPoint> = taus.iter().map(|&t| preparer.point(&expansion, amp, t, floor)).collect();
    let best = grid
        .iter()
        .enumerate()
        .filter(|(_, p)| p.feasible)
        .min_by(|a, b| objective(a.1).total_cmp(&objective(b.1)))
        .map(|(i, _)| i);
    let Some(i) = best else {
        return Err(Error::DegenerateMeanSpin {
            magnitude: grid.iter().map(|p| p.mean_spin).fold(0.0, f64::max),
            threshold: floor,
        });
    };
    let lo = taus[i.saturating_sub(1)];
    let hi = taus[(i + 1).min(taus.len() - 1)];
    let mut chosen = grid[i];
    if hi > lo {
        let (t, _) = golden_section(lo, hi, SEARCH_TOL, |t| objective(&preparer.point(&expansion, amp, t, floor)));
        let refined = preparer.point(&expansion, amp, t, floor);
        if objective(&refined) < objective(&chosen) {
            chosen = refined;
        }
    }
    Ok((chosen, grid))
}

/// Result of a two-dimensional `(|α|, τ₁)` search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepSearch {
    pub best: PrepPoint,
    /// Refined optimum per amplitude.
    pub per_alpha: Vec<PrepPoint>,
    /// Every coarse-grid evaluation.
    pub grid: Vec<PrepPoint>,
    pub floor: f64,
    pub cutoff: usize,
}

impl PrepSearch {
    /// Points not dominated in (small `λ_min`, large `|<S>|`).
    pub fn pareto_front(&self) -> Vec<PrepPoint> {
        let pool: Vec<PrepPoint> = self
            .grid
            .iter()
            .chain(&self.per_alpha)
            .copied()
            .filter(|p| p.lambda_min.is_finite())
            .collect();
        let mut front: Vec<PrepPoint> = pool
            .iter()
            .filter(|p| {
                !pool.iter().any(|q| {
                    q.lambda_min <= p.lambda_min
                        && q.mean_spin >= p.mean_spin
                        && (q.lambda_min < p.lambda_min || q.mean_spin > p.mean_spin)
                })
            })
            .copied()
            .collect();
        front.sort_by(|a, b| a.mean_spin.total_cmp(&b.mean_spin));
        front
    }

    /// Front point nearest to a target `(λ_min, |<S>|)` in relative distance.
    pub fn closest_to(&self, lambda_min: f64, mean_spin: f64) -> Option<PrepPoint> {
        let dist = |p: &PrepPoint| {
            ((p.lambda_min - lambda_min) / lambda_min).powi(2) + ((p.mean_spin - mean_spin) / mean_spin).powi(2)
        };
        self.pareto_front()
            .into_iter()
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
    }
}

/// Minimize `ζ` over `|α| ∈ alphas` (phase `arg_alpha`) and `τ₁ ∈ taus`
/// subject to `|<S>| ≥ floor_fraction · S`.
pub fn search_preparation(
    num_atoms: u32,
    alphas: &[f64],
    arg_alpha: f64,
    taus: &[f64],
    floor_fraction: f64,
    policy: CutoffPolicy,
) -> Result<PrepSearch> {
    if alphas.is_empty() || taus.is_empty() {
        return Err(Error::invalid("search", "empty search grid"));
    }
    let max_alpha = alphas.iter().copied().fold(0.0, f64::max);
    let preparer = Preparer::for_amplitude(num_atoms, max_alpha, policy)?;
    let floor = floor_fraction * num_atoms as f64 / 2.0;
    let runs: Vec<Result<(PrepPoint, Vec<PrepPoint>)>> = alphas
        .par_iter()
        .map(|&a| search_tau(&preparer, cis(arg_alpha) * a, taus, floor))
        .collect();
    let mut per_alpha = Vec::new();
    let mut grid = Vec::new();
    for r in runs {
        match r {
            Ok((best, g)) => {
                per_alpha.push(best);
                grid.extend(g);
            }
            // an amplitude with no admissible time contributes nothing
            Err(Error::DegenerateMeanSpin { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let best = per_alpha
        .iter()
        .copied()
        .min_by(|a, b| objective(a).total_cmp(&objective(b)))
        .ok_or(Error::DegenerateMeanSpin {
            magnitude: 0.0,
            threshold: floor,
        })?;
    Ok(PrepSearch {
        best,
        per_alpha,
        grid,
        floor,
        cutoff: preparer.cutoff(),
    })
}

/// Stage-1 output: the prepared atomic state and its diagnostics.
#[derive(Debug, Clone)]
pub struct Stage1 {
    pub rho: DensityMatrix,
    pub report: SqueezingReport,
    pub alpha: C64,
    pub tau1: f64,
    pub cutoff: usize,
    /// Purity of the reduced state before any projection.
    pub purity: f64,
    pub projective: bool,
    pub search: Option<PrepSearch>,
}

/// Evolve `|S,S> ⊗ |α>` for `τ₁` and trace out the field.
pub fn stage1_prepare(config: &PrepConfig) -> Result<Stage1> {
    config.validate()?;
    let alpha = config.alpha();
    let (alpha, tau1, search) = match config.tau1() {
        Tau1::Fixed(t) => (alpha, t, None),
        Tau1::Search(taus) => {
            let alphas = config.alpha_range.map(|g| g.values()).unwrap_or_else(|| vec![alpha.norm()]);
            let s = search_preparation(
                config.num_atoms,
                &alphas,
                alpha.arg(),
                &taus.values(),
                config.spin_floor,
                config.n_max,
            )?;
            (cis(alpha.arg()) * s.best.alpha, s.best.tau1, Some(s))
        }
    };
    let preparer = Preparer::for_amplitude(config.num_atoms, alpha.norm(), config.n_max)?;
    let expansion = preparer.expand(alpha)?;
    let mixed = preparer.atoms_at(&expansion, tau1);
    let purity = mixed.purity();
    let rho = if config.projective {
        DensityMatrix::from_pure(&mixed.dominant_state()?)
    } else {
        mixed
    };
    let report = SqueezingReport::new(&rho, &default_phases())?;
    Ok(Stage1 {
        rho,
        report,
        alpha,
        tau1,
        cutoff: preparer.cutoff(),
        purity,
        projective: config.projective,
        search,
    })
}

/// Default search box: `|α| ∈ [1, 6]`, `τ₁ ∈ [0, 3]`.
pub fn default_search_grids() -> (GridSpec, GridSpec) {
    (GridSpec::new(1.0, 6.0, 11), GridSpec::new(0.0, 3.0, 61))
}
