use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::pure::PureState;
use crate::error::{Error, Result};
use crate::hilbert::{build_spin_matrices, SpinMatrices};
use crate::linalg::{trace, CMatrix, C64};

/// Anything that can take expectation values of local (single-subsystem) operators.
pub trait Observe {
    fn dim(&self) -> usize;
    fn expect_unchecked(&self, op: &CMatrix) -> C64;

    fn expect(&self, op: &CMatrix) -> Result<C64> {
        if op.shape() != (self.dim(), self.dim()) {
            return Err(Error::mismatch(
                format!("{0}x{0} operator", self.dim()),
                format!("{}x{}", op.nrows(), op.ncols()),
            ));
        }
        Ok(self.expect_unchecked(op))
    }
}

impl Observe for PureState {
    fn dim(&self) -> usize {
        self.amplitudes().len()
    }

    fn expect_unchecked(&self, op: &CMatrix) -> C64 {
        let v = self.amplitudes();
        v.dotc(&(op * v))
    }
}

impl Observe for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix().nrows()
    }

    fn expect_unchecked(&self, op: &CMatrix) -> C64 {
        // tr(ρ O) = Σ_ij ρ_ij O_ji
        let rho = self.matrix();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                acc += rho[(i, j)] * op[(j, i)];
            }
        }
        acc
    }
}

pub fn expectation<S: Observe>(op: &CMatrix, state: &S) -> Result<C64> {
    state.expect(op)
}

/// `½<ΔA ΔB + ΔB ΔA>`, real part.
pub fn covariance_sym<S: Observe>(a: &CMatrix, b: &CMatrix, state: &S) -> Result<f64> {
    let ab = state.expect(&(a * b + b * a))?;
    let ea = state.expect(a)?;
    let eb = state.expect(b)?;
    Ok((ab * 0.5 - ea * eb).re)
}

pub fn variance<S: Observe>(a: &CMatrix, state: &S) -> Result<f64> {
    let a2 = state.expect(&(a * a))?;
    let ea = state.expect(a)?;
    Ok((a2 - ea * ea).re)
}

/// Mean collective spin `<S>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinVector {
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl SpinVector {
    pub fn magnitude(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }

    /// Angle between the mean spin and the negative z axis.
    pub fn angle_from_south(&self) -> f64 {
        let len = self.magnitude();
        if len == 0.0 {
            return f64::NAN;
        }
        (-self.sz / len).clamp(-1.0, 1.0).acos()
    }
}

/// Mean spin and full symmetrized 3×3 covariance of an atomic state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMoments {
    pub mean: SpinVector,
    pub covariance: [[f64; 3]; 3],
}

impl SpinMoments {
    pub fn of<S: Observe>(state: &S, ops: &SpinMatrices) -> Result<Self> {
        let comps = [&ops.sx, &ops.sy, &ops.sz];
        let mut mean = [0.0; 3];
        for (k, op) in comps.iter().enumerate() {
            mean[k] = state.expect(op)?.re;
        }
        let mut cov = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let sym = state.expect(&(comps[i] * comps[j] + comps[j] * comps[i]))?.re * 0.5;
                cov[i][j] = sym - mean[i] * mean[j];
                cov[j][i] = cov[i][j];
            }
        }
        Ok(SpinMoments {
            mean: SpinVector {
                sx: mean[0],
                sy: mean[1],
                sz: mean[2],
            },
            covariance: cov,
        })
    }

    /// `<(Δ n·S)²>` for a unit vector n.
    pub fn variance_along(&self, n: [f64; 3]) -> f64 {
        let mut v = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                v += n[i] * self.covariance[i][j] * n[j];
            }
        }
        v
    }

    pub fn covariance_between(&self, u: [f64; 3], v: [f64; 3]) -> f64 {
        let mut out = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                out += u[i] * self.covariance[i][j] * v[j];
            }
        }
        out
    }
}

/// Mean spin vector of an atomic density matrix.
pub fn spin_vector(rho: &DensityMatrix) -> Result<SpinVector> {
    let space = rho.space().as_dicke()?;
    let ops = build_spin_matrices(&space);
    let m = rho.matrix();
    Ok(SpinVector {
        sx: trace(&(m * &ops.sx)).re,
        sy: trace(&(m * &ops.sy)).re,
        sz: trace(&(m * &ops.sz)).re,
    })
}
