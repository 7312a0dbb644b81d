use nalgebra::DVector;

use super::pure::{PureState, Space};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermiticity_error, trace, CMatrix};

/// Dense density matrix on an atomic, field, or joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: Space,
    matrix: CMatrix,
}

/// Outcome of the opt-in O(d³) validity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCheck {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl DensityCheck {
    /// Hermitian to 1e-12, unit trace to 1e-10, spectrum inside [-1e-10, 1 + 1e-10].
    pub fn is_valid(&self) -> bool {
        self.hermiticity_error <= 1e-12
            && self.trace_error <= 1e-10
            && self.min_eigenvalue >= -1e-10
            && self.max_eigenvalue <= 1.0 + 1e-10
    }
}

impl DensityMatrix {
    /// Wraps a matrix after checking shape, hermiticity (1e-12) and trace (1e-10).
    pub fn new(space: Space, matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (space.dim(), space.dim()) {
            return Err(Error::mismatch(
                format!("{0}x{0}", space.dim()),
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        let herm = hermiticity_error(&matrix);
        if herm > 1e-12 {
            return Err(Error::invalid("matrix", format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::invalid("matrix", format!("trace {tr} is not 1")));
        }
        Ok(DensityMatrix { space, matrix })
    }

    pub(crate) fn from_parts(space: Space, matrix: CMatrix) -> Self {
        DensityMatrix { space, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        DensityMatrix {
            space: state.space(),
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(space: Space) -> Self {
        let d = space.dim();
        DensityMatrix {
            space,
            matrix: CMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    /// `tr ρ²`
    pub fn purity(&self) -> f64 {
        // tr(ρ ρ) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues ascending, eigenvectors as columns.
    pub fn spectrum(&self) -> Result<(DVector<f64>, CMatrix)> {
        hermitian_eigen(&self.matrix).ok_or(Error::ConvergenceFailure {
            sector: 0,
            reason: "density-matrix eigen-decomposition".into(),
        })
    }

    pub fn check(&self) -> Result<DensityCheck> {
        let (values, _) = self.spectrum()?;
        Ok(DensityCheck {
            hermiticity_error: hermiticity_error(&self.matrix),
            trace_error: (trace(&self.matrix) - 1.0).norm(),
            min_eigenvalue: values.iter().copied().fold(f64::INFINITY, f64::min),
            max_eigenvalue: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// `U ρ U†`
    pub fn transformed(&self, u: &CMatrix) -> Result<Self> {
        if u.shape() != self.matrix.shape() {
            return Err(Error::mismatch(self.dim(), u.nrows()));
        }
        let rotated = u * &self.matrix * u.adjoint();
        // re-symmetrize to keep hermiticity at roundoff level
        let herm = (&rotated + rotated.adjoint()).scale(0.5);
        Ok(DensityMatrix::from_parts(self.space, herm))
    }

    /// Eigenvector with the largest weight, as a pure state.
    pub fn dominant_state(&self) -> Result<PureState> {
        let (values, vectors) = self.spectrum()?;
        let last = values.len() - 1;
        PureState::new(self.space, vectors.column(last).into_owned())
    }
}
