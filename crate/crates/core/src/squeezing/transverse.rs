use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::build_spin_matrices;
use crate::states::{DensityMatrix, SpinMoments, SpinVector};

/// Relative threshold on `|<S>| / S` below which the transverse plane is undefined.
pub const DIRECTION_EPS: f64 = 1e-6;

/// Covariance of the spin components perpendicular to the mean spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseCovariance {
    pub mean: SpinVector,
    /// Unit vector along the mean spin.
    pub direction: [f64; 3],
    /// Orthonormal transverse frame `e1, e2`.
    pub frame: [[f64; 3]; 2],
    /// Symmetrized covariance in the frame.
    pub matrix: [[f64; 2]; 2],
    /// `[λ_min, λ_max]`
    pub eigvals: [f64; 2],
    /// Transverse unit vector of least variance.
    pub min_axis: [f64; 3],
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn combine(a: [f64; 3], ca: f64, b: [f64; 3], cb: f64) -> [f64; 3] {
    [ca * a[0] + cb * b[0], ca * a[1] + cb * b[1], ca * a[2] + cb * b[2]]
}

/// Some orthonormal pair perpendicular to `n`, turned by `angle` about `n`.
fn transverse_frame(n: [f64; 3], angle: f64) -> [[f64; 3]; 2] {
    // reference axis least aligned with n
    let reference = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = normalize(cross(reference, n));
    let e2 = cross(n, e1);
    let (s, c) = angle.sin_cos();
    [combine(e1, c, e2, s), combine(e1, -s, e2, c)]
}

/// Eigenvalues of a real symmetric 2×2 matrix, ascending, and the angle of the
/// eigenvector belonging to the smaller one.
fn symmetric_eigen_2x2(m: [[f64; 2]; 2]) -> ([f64; 2], f64) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let centre = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let major = 0.5 * (2.0 * b).atan2(a - d);
    ([centre - radius, centre + radius], major + std::f64::consts::FRAC_PI_2)
}

impl TransverseCovariance {
    pub fn from_moments(moments: &SpinMoments, spin: f64, frame_angle: f64) -> Result<Self> {
        let mean = moments.mean;
        let len = mean.magnitude();
        let threshold = DIRECTION_EPS * spin;
        if !(len >= threshold) || len == 0.0 {
            return Err(Error::DegenerateMeanSpin {
                magnitude: len,
                threshold,
            });
        }
        let direction = normalize(mean.as_array());
        let frame = transverse_frame(direction, frame_angle);
        let mut matrix = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                matrix[i][j] = moments.covariance_between(frame[i], frame[j]);
            }
        }
        let off = 0.5 * (matrix[0][1] + matrix[1][0]);
        matrix[0][1] = off;
        matrix[1][0] = off;
        let (eigvals, min_angle) = symmetric_eigen_2x2(matrix);
        let (s, c) = min_angle.sin_cos();
        Ok(TransverseCovariance {
            mean,
            direction,
            frame,
            matrix,
            eigvals,
            min_axis: combine(frame[0], c, frame[1], s),
        })
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigvals[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals[1]
    }

    pub fn mean_length(&self) -> f64 {
        self.mean.magnitude()
    }

    /// Transverse unit vector of greatest variance.
    pub fn max_axis(&self) -> [f64; 3] {
        cross(self.direction, self.min_axis)
    }
}

/// Minimum variance perpendicular to the mean spin of an atomic state.
pub fn min_transverse_variance(rho_atom: &DensityMatrix) -> Result<TransverseCovariance> {
    min_transverse_variance_in_frame(rho_atom, 0.0)
}

/// Same as [`min_transverse_variance`] with the transverse frame turned by `frame_angle`.
pub fn min_transverse_variance_in_frame(rho_atom: &DensityMatrix, frame_angle: f64) -> Result<TransverseCovariance> {
    let space = rho_atom.space().as_dicke()?;
    let moments = SpinMoments::of(rho_atom, &build_spin_matrices(&space))?;
    TransverseCovariance::from_moments(&moments, space.spin(), frame_angle)
}
