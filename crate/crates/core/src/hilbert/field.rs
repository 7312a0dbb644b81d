use nalgebra::DVector;

use super::space::FockSpace;
use crate::linalg::{c, cis, CMatrix};

#[derive(Debug, Clone)]
pub struct FieldMatrices {
    pub a: CMatrix,
    pub a_dag: CMatrix,
}

/// Truncated annihilation/creation operators, `<n-1|a|n> = √n`.
pub fn build_field_matrices(space: &FockSpace) -> FieldMatrices {
    let d = space.dim();
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    FieldMatrices { a, a_dag }
}

pub fn number_operator(space: &FockSpace) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_fn(space.dim(), |n, _| c(n as f64, 0.0)))
}

/// Quadrature `a_φ = (a e^{-iφ} + a† e^{iφ}) / 2`.
pub fn directional_field_op(phi: f64, space: &FockSpace) -> CMatrix {
    let f = build_field_matrices(space);
    directional_from(&f, phi)
}

pub(crate) fn directional_from(f: &FieldMatrices, phi: f64) -> CMatrix {
    (&f.a * cis(-phi) + &f.a_dag * cis(phi)).scale(0.5)
}
