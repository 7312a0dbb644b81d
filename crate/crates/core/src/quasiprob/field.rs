use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, linspace, CMatrix, C64};
use crate::states::pure::coherent_amplitudes;
use crate::states::{partial_trace, partial_trace_dense, DensityMatrix, JointState, Keep, Space};

/// Population allowed on the last Fock level before the field state is
/// considered truncated.
pub const EDGE_POPULATION_TOL: f64 = 1e-10;

/// Square phase-space window `[-extent, extent]²` sampled with `points` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGridSpec {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub resolution: usize,
}

impl QGridSpec {
    pub fn square(extent: f64, resolution: usize) -> Self {
        QGridSpec {
            re_range: (-extent, extent),
            im_range: (-extent, extent),
            resolution,
        }
    }

    /// `±(√(2S) + 3)` with 201 points per axis.
    pub fn for_spin(spin: f64) -> Self {
        Self::square((2.0 * spin).sqrt() + 3.0, 201)
    }

    fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::GridMismatch("field grid needs at least 2 points per axis".into()));
        }
        for (name, (lo, hi)) in [("re_range", self.re_range), ("im_range", self.im_range)] {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(name, "range must be finite and increasing"));
            }
        }
        Ok(())
    }
}

/// `Q(α) = <α|ρ_field|α>/π` sampled on a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `values[j][i]` at `α = re[i] + i·im[j]`.
    pub values: Vec<Vec<f64>>,
}

impl QGrid {
    pub fn cell_area(&self) -> f64 {
        (self.re[1] - self.re[0]) * (self.im[1] - self.im[0])
    }

    /// Riemann sum of Q over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().flatten().sum::<f64>() * self.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value at `(re[i], im[j])`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j][i]
    }

    /// Centroid and covariance ellipse of Q over the grid.
    pub fn ellipse(&self) -> QEllipse {
        let total: f64 = self.values.iter().flatten().sum();
        let (mut mx, mut my) = (0.0, 0.0);
        for (j, row) in self.values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                mx += v * self.re[i];
                my += v * self.im[j];
            }
        }
        mx /= total;
        my /= total;
        let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
        for (j, row) in self.values.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let (dx, dy) = (self.re[i] - mx, self.im[j] - my);
                cxx += v * dx * dx;
                cxy += v * dx * dy;
                cyy += v * dy * dy;
            }
        }
        let covariance = [[cxx / total, cxy / total], [cxy / total, cyy / total]];
        let major_angle = 0.5 * (2.0 * covariance[0][1]).atan2(covariance[0][0] - covariance[1][1]);
        let centre_angle = my.atan2(mx);
        QEllipse {
            centroid: [mx, my],
            covariance,
            major_angle,
            radial_alignment: (major_angle - centre_angle).cos().abs(),
        }
    }
}

/// Moment ellipse of a Q distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QEllipse {
    pub centroid: [f64; 2],
    pub covariance: [[f64; 2]; 2],
    /// Direction of the major axis in the α plane.
    pub major_angle: f64,
    /// `|cos|` of the angle between the major axis and the centroid direction;
    /// 1 for a radially elongated distribution, 0 for a tangential one.
    pub radial_alignment: f64,
}

fn field_density(rho: &DensityMatrix) -> Result<DensityMatrix> {
    match rho.space() {
        Space::Fock { .. } => Ok(rho.clone()),
        Space::Joint { .. } => partial_trace_dense(rho, Keep::Field),
        other => Err(Error::mismatch("field or joint density matrix", format!("{other:?}"))),
    }
}

/// Q-function of a field (or joint, traced internally) density matrix.
///
/// Coherent amplitudes are evaluated without truncation, so the result is
/// exact for a state supported inside the cutoff; a state with population on
/// the last Fock level is rejected as possibly truncated.
pub fn field_q(rho: &DensityMatrix, spec: &QGridSpec) -> Result<QGrid> {
    spec.validate()?;
    let rho_f = field_density(rho)?;
    let m = rho_f.matrix();
    let cutoff = m.nrows() - 1;
    let edge = m[(cutoff, cutoff)].re;
    if edge > EDGE_POPULATION_TOL {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail: edge,
            tolerance: EDGE_POPULATION_TOL,
        });
    }
    let re = linspace(spec.re_range.0, spec.re_range.1, spec.resolution);
    let im = linspace(spec.im_range.0, spec.im_range.1, spec.resolution);
    let values = im
        .par_iter()
        .map(|&y| re.iter().map(|&x| q_value(m, c(x, y))).collect())
        .collect();
    Ok(QGrid { re, im, values })
}

pub fn field_q_state(state: &JointState, spec: &QGridSpec) -> Result<QGrid> {
    field_q(&partial_trace(state, Keep::Field), spec)
}

fn q_value(rho: &CMatrix, alpha: C64) -> f64 {
    let v = coherent_amplitudes(alpha, rho.nrows() - 1);
    let mut acc = C64::new(0.0, 0.0);
    for (n, vn) in v.iter().enumerate() {
        let mut row = C64::new(0.0, 0.0);
        for (np, vp) in v.iter().enumerate() {
            row += rho[(n, np)] * vp;
        }
        acc += vn.conj() * row;
    }
    acc.re / std::f64::consts::PI
}
