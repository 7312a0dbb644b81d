use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::SpinRotator;
use crate::linalg::{cis, linspace, C64};
use crate::states::DensityMatrix;

/// `θ ∈ [0, π]` inclusive, `φ ∈ [0, 2π)` with step `2π / phi_points`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlochGridSpec {
    pub theta_points: usize,
    pub phi_points: usize,
}

impl Default for BlochGridSpec {
    fn default() -> Self {
        BlochGridSpec {
            theta_points: 181,
            phi_points: 361,
        }
    }
}

/// Overlaps `<θ,φ|ρ|θ,φ>` with Bloch states over the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochGrid {
    pub spin: f64,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `values[i][j]` at `(theta[i], phi[j])`.
    pub values: Vec<Vec<f64>>,
}

impl BlochGrid {
    /// `(2S+1)/(4π) ∬ H sinθ dθ dφ`: trapezoid in θ, periodic sum in φ.
    pub fn resolution_integral(&self) -> f64 {
        let dtheta = self.theta[1] - self.theta[0];
        let dphi = 2.0 * std::f64::consts::PI / self.phi.len() as f64;
        let last = self.theta.len() - 1;
        let mut acc = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            acc += w * self.theta[i].sin() * row.iter().sum::<f64>();
        }
        (2.0 * self.spin + 1.0) / (4.0 * std::f64::consts::PI) * acc * dtheta * dphi
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation, periodic in φ; θ is clamped to `[0, π]`.
    pub fn sample(&self, theta: f64, phi: f64) -> f64 {
        let nt = self.theta.len();
        let np = self.phi.len();
        let dtheta = self.theta[1] - self.theta[0];
        let dphi = 2.0 * std::f64::consts::PI / np as f64;
        let t = (theta.clamp(0.0, std::f64::consts::PI) - self.theta[0]) / dtheta;
        let i0 = (t.floor() as usize).min(nt - 2);
        let ft = t - i0 as f64;
        let p = phi.rem_euclid(2.0 * std::f64::consts::PI) / dphi;
        let j0 = (p.floor() as usize) % np;
        let j1 = (j0 + 1) % np;
        let fp = p - p.floor();
        let v = &self.values;
        (1.0 - ft) * ((1.0 - fp) * v[i0][j0] + fp * v[i0][j1]) + ft * ((1.0 - fp) * v[i0 + 1][j0] + fp * v[i0 + 1][j1])
    }
}

/// Spin quasi-probability of an atomic state on a (θ, φ) grid.
pub fn spin_husimi(rho_atom: &DensityMatrix, spec: &BlochGridSpec) -> Result<BlochGrid> {
    let space = rho_atom.space().as_dicke()?;
    if spec.theta_points < 2 || spec.phi_points < 1 {
        return Err(Error::GridMismatch("Bloch grid needs at least 2 θ points and 1 φ point".into()));
    }
    let theta = linspace(0.0, std::f64::consts::PI, spec.theta_points);
    let step = 2.0 * std::f64::consts::PI / spec.phi_points as f64;
    let phi: Vec<f64> = (0..spec.phi_points).map(|j| j as f64 * step).collect();
    let rotator = SpinRotator::new(space);
    let rho = rho_atom.matrix();
    let d = space.dim();
    let values = theta
        .par_iter()
        .map(|&t| {
            let column = rotator.bloch_column(t, 0.0);
            phi.iter()
                .map(|&p| {
                    // e^{-iφSz} is diagonal
                    let v: Vec<C64> = (0..d).map(|i| column[i] * cis(-p * space.m(i))).collect();
                    let mut acc = C64::new(0.0, 0.0);
                    for i in 0..d {
                        let mut row = C64::new(0.0, 0.0);
                        for j in 0..d {
                            row += rho[(i, j)] * v[j];
                        }
                        acc += v[i].conj() * row;
                    }
                    acc.re
                })
                .collect()
        })
        .collect();
    Ok(BlochGrid {
        spin: space.spin(),
        theta,
        phi,
        values,
    })
}
