use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{BlockedOperator, JointSpace};
use crate::linalg::{cis, hermitian_eigen, unitarity_error, CMatrix, CVector};
use crate::states::{JointEnsemble, JointState, PureState, Space};

/// Relative eigenpair residual and eigenvector unitarity accepted per block.
pub const EIGEN_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and eigenvectors of one sector block.
#[derive(Debug, Clone)]
pub struct SectorEigen {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

/// Exact propagator `e^{-iHτ}` from one Hermitian eigen-decomposition per
/// excitation sector; any τ is evaluated without stepping.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    hamiltonian: Arc<BlockedOperator>,
    sectors: Vec<SectorEigen>,
    max_residual: f64,
    max_unitarity_error: f64,
}

/// `max_i ‖H v_i − λ_i v_i‖∞`
fn eigen_residual(h: &CMatrix, values: &DVector<f64>, vectors: &CMatrix) -> f64 {
    let hv = h * vectors;
    let mut worst = 0.0f64;
    for (j, lambda) in values.iter().enumerate() {
        for i in 0..h.nrows() {
            worst = worst.max((hv[(i, j)] - vectors[(i, j)] * *lambda).norm());
        }
    }
    worst
}

/// Diagonalize every sector block of `h`, checking residuals and unitarity.
pub fn diagonalize(h: &BlockedOperator) -> Result<SpectralPropagator> {
    SpectralPropagator::new(Arc::new(h.clone()))
}

impl SpectralPropagator {
    pub fn new(h: Arc<BlockedOperator>) -> Result<Self> {
        let herm = h.hermiticity_error();
        if herm > 1e-14 * h.norm_inf().max(1.0) {
            return Err(Error::invalid(
                "hamiltonian",
                format!("operator is not Hermitian (max |H - H†| = {herm:e})"),
            ));
        }
        let scale = h.norm_inf();
        let results: Vec<Result<(SectorEigen, f64, f64)>> = h
            .blocks()
            .par_iter()
            .enumerate()
            .map(|(k, block)| {
                let (values, vectors) = hermitian_eigen(block).ok_or(Error::ConvergenceFailure {
                    sector: k,
                    reason: "eigensolver did not converge".into(),
                })?;
                let residual = eigen_residual(block, &values, &vectors);
                let unitarity = if block.nrows() == 0 { 0.0 } else { unitarity_error(&vectors) };
                if residual > EIGEN_TOL * scale {
                    return Err(Error::ConvergenceFailure {
                        sector: k,
                        reason: format!("eigenpair residual {residual:e} exceeds {:e}", EIGEN_TOL * scale),
                    });
                }
                if unitarity > EIGEN_TOL {
                    return Err(Error::ConvergenceFailure {
                        sector: k,
                        reason: format!("eigenvector matrix deviates from unitary by {unitarity:e}"),
                    });
                }
                Ok((SectorEigen { values, vectors }, residual, unitarity))
            })
            .collect();
        let mut sectors = Vec::with_capacity(results.len());
        let (mut max_residual, mut max_unitarity_error) = (0.0f64, 0.0f64);
        for r in results {
            let (eig, res, uni) = r?;
            max_residual = max_residual.max(res);
            max_unitarity_error = max_unitarity_error.max(uni);
            sectors.push(eig);
        }
        Ok(SpectralPropagator {
            hamiltonian: h,
            sectors,
            max_residual,
            max_unitarity_error,
        })
    }

    pub fn joint(&self) -> &Arc<JointSpace> {
        self.hamiltonian.joint()
    }

    pub fn hamiltonian(&self) -> &BlockedOperator {
        &self.hamiltonian
    }

    pub fn sectors(&self) -> &[SectorEigen] {
        &self.sectors
    }

    /// Largest eigenpair residual `‖Hv − λv‖∞` over all sectors.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn max_unitarity_error(&self) -> f64 {
        self.max_unitarity_error
    }

    fn check_len(&self, psi: &CVector) -> Result<()> {
        let dim = self.joint().dim();
        if psi.len() != dim {
            return Err(Error::mismatch(format!("joint vector of length {dim}"), psi.len()));
        }
        Ok(())
    }

    /// Eigenbasis coefficients `V† ψ_k` for every sector.
    pub fn expand(&self, psi: &CVector) -> Result<Expansion<'_>> {
        self.check_len(psi)?;
        let coefficients = self
            .joint()
            .sectors()
            .iter()
            .zip(&self.sectors)
            .map(|(s, eig)| {
                let local = CVector::from_iterator(s.dim(), s.indices.iter().map(|&i| psi[i]));
                eig.vectors.ad_mul(&local)
            })
            .collect();
        Ok(Expansion {
            propagator: self,
            coefficients,
        })
    }

    /// `e^{-iHτ} ψ`
    pub fn evolve_vector(&self, psi: &CVector, tau: f64) -> Result<CVector> {
        self.check_len(psi)?;
        if tau == 0.0 {
            return Ok(psi.clone());
        }
        Ok(self.expand(psi)?.at(tau))
    }

    pub fn evolve(&self, state: &JointState, tau: f64) -> Result<JointState> {
        self.check_state(state)?;
        match state {
            JointState::Pure(s) => {
                let v = self.evolve_vector(s.amplitudes(), tau)?;
                Ok(JointState::Pure(PureState::from_normalized(s.space(), v).with_tail_mass(s.tail_mass())))
            }
            JointState::Mixed(e) => {
                let components = e
                    .components()
                    .iter()
                    .map(|(w, v)| Ok((*w, self.evolve_vector(v, tau)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(JointState::Mixed(JointEnsemble::new(e.dicke(), e.fock(), components)?))
            }
        }
    }

    pub(crate) fn check_state(&self, state: &JointState) -> Result<()> {
        let joint = self.joint();
        let (d, f) = state.spaces();
        if d != joint.dicke() || f != joint.fock() {
            return Err(Error::mismatch(
                format!("{:?}", Space::joint(joint.dicke(), joint.fock())),
                format!("{:?}", Space::joint(d, f)),
            ));
        }
        Ok(())
    }
}

/// A joint vector resolved in the propagator's eigenbasis; evaluating it at
/// many times costs one block matrix-vector product per sector each.
#[derive(Debug, Clone)]
pub struct Expansion<'a> {
    propagator: &'a SpectralPropagator,
    coefficients: Vec<CVector>,
}

impl Expansion<'_> {
    /// `Σ_k V_k e^{-iΛ_k τ} V_k† ψ_k`
    pub fn at(&self, tau: f64) -> CVector {
        let joint = self.propagator.joint();
        let mut out = CVector::zeros(joint.dim());
        for ((s, eig), coeff) in joint
            .sectors()
            .iter()
            .zip(&self.propagator.sectors)
            .zip(&self.coefficients)
        {
            let phased = CVector::from_iterator(
                coeff.len(),
                coeff.iter().zip(eig.values.iter()).map(|(z, l)| z * cis(-l * tau)),
            );
            let local = &eig.vectors * phased;
            for (v, &i) in local.iter().zip(&s.indices) {
                out[i] = *v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{interaction_hamiltonian, interaction_tensor, DickeSpace, FockSpace};
    use crate::linalg::{c, expm_hermitian, ONE, ZERO};

    fn joint(n: u32, n_max: usize) -> Arc<JointSpace> {
        Arc::new(JointSpace::new(DickeSpace::new(n).unwrap(), FockSpace::new(n_max)))
    }

    #[test]
    fn two_level_block_eigenvalues() {
        let j = joint(1, 1);
        let mut blocks: Vec<CMatrix> = j.sectors().iter().map(|s| CMatrix::zeros(s.dim(), s.dim())).collect();
        blocks[1] = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let h = BlockedOperator::new(j, blocks, true).unwrap();
        let p = diagonalize(&h).unwrap();
        let v = &p.sectors()[1].values;
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn enhanced_coupling_eigenvalues() {
        let p = diagonalize(&interaction_hamiltonian(&joint(2, 3))).unwrap();
        let v = &p.sectors()[1].values;
        assert_eq!(v.len(), 2);
        assert!((v[0] + 2f64.sqrt()).abs() < 1e-14);
        assert!((v[1] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn large_space_residuals() {
        let h = interaction_hamiltonian(&joint(50, 60));
        let p = diagonalize(&h).unwrap();
        assert!(p.max_residual() <= EIGEN_TOL * h.norm_inf());
        assert!(p.max_unitarity_error() <= EIGEN_TOL);
    }

    #[test]
    fn non_hermitian_rejected() {
        let j = joint(1, 1);
        let mut blocks: Vec<CMatrix> = j.sectors().iter().map(|s| CMatrix::zeros(s.dim(), s.dim())).collect();
        blocks[1] = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let h = BlockedOperator::new(j, blocks, false).unwrap();
        assert!(matches!(diagonalize(&h), Err(Error::InvalidInput { .. })));
    }

    #[test]
    fn blocked_matches_dense_exponential() {
        for (n, n_max) in [(1, 4), (2, 6), (6, 10), (5, 3)] {
            let j = joint(n, n_max);
            let p = diagonalize(&interaction_hamiltonian(&j)).unwrap();
            let dense_h = interaction_tensor(j.dicke(), j.fock(), 1.0).to_dense();
            let psi = CVector::from_fn(j.dim(), |i, _| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
            let psi = psi.unscale(psi.norm());
            for tau in [0.1, 0.7, 2.5] {
                let dense = expm_hermitian(&dense_h, tau).unwrap() * &psi;
                let fast = p.evolve_vector(&psi, tau).unwrap();
                assert!((dense - fast).camax() < 1e-10, "N={n} n_max={n_max} tau={tau}");
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let j = joint(3, 4);
        let p = diagonalize(&interaction_hamiltonian(&j)).unwrap();
        let psi = CVector::from_fn(j.dim(), |i, _| c(i as f64, 1.0));
        assert_eq!(p.evolve_vector(&psi, 0.0).unwrap(), psi);
    }

    #[test]
    fn wrong_length_rejected() {
        let p = diagonalize(&interaction_hamiltonian(&joint(1, 2))).unwrap();
        let err = p.evolve_vector(&CVector::zeros(5), 1.0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }
}
