//! JSON forms of states: basis labels with `[re, im]` pairs, and row-major
//! density matrices with their space metadata.

use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::pure::{PureState, Space};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateRecord {
    pub space: Space,
    pub labels: Vec<String>,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default)]
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityRecord {
    pub space: Space,
    pub dim: usize,
    /// Row-major `[re, im]` entries.
    pub data: Vec<[f64; 2]>,
}

impl From<&PureState> for StateRecord {
    fn from(s: &PureState) -> Self {
        let space = s.space();
        StateRecord {
            space,
            labels: (0..space.dim()).map(|i| space.basis_label(i)).collect(),
            amplitudes: s.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            tail_mass: s.tail_mass(),
        }
    }
}

impl TryFrom<&StateRecord> for PureState {
    type Error = Error;

    fn try_from(r: &StateRecord) -> Result<Self> {
        let v = CVector::from_iterator(r.amplitudes.len(), r.amplitudes.iter().map(|p| c(p[0], p[1])));
        Ok(PureState::new(r.space, v)?.with_tail_mass(r.tail_mass))
    }
}

impl From<&DensityMatrix> for DensityRecord {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        DensityRecord {
            space: rho.space(),
            dim: m.nrows(),
            data,
        }
    }
}

impl TryFrom<&DensityRecord> for DensityMatrix {
    type Error = Error;

    fn try_from(r: &DensityRecord) -> Result<Self> {
        if r.dim != r.space.dim() || r.data.len() != r.dim * r.dim {
            return Err(Error::invalid(
                "data",
                format!("expected {0}x{0} entries for {1:?}", r.space.dim(), r.space),
            ));
        }
        let m = CMatrix::from_row_iterator(r.dim, r.dim, r.data.iter().map(|p| c(p[0], p[1])));
        DensityMatrix::new(r.space, m)
    }
}
