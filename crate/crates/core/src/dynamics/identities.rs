use serde::{Deserialize, Serialize};

use crate::hilbert::{
    build_field_matrices, build_spin_matrices, interaction_tensor, JointSpace, TensorOperator,
};
use crate::hilbert::field::directional_from as field_direction;
use crate::hilbert::spin::directional_from as spin_direction;
use crate::linalg::{c, cis, CMatrix, I};

/// Largest entrywise residuals of the Heisenberg equations for the
/// quadrature `a_φ`, its conjugate spin component and `Sz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub spin: f64,
    pub cutoff: usize,
    pub phi: f64,
    pub coupling: f64,
    /// `i[H, a_φ] + g S_{π/2−φ}` on entries with both photon numbers below the cutoff.
    pub field_quadrature: f64,
    /// Largest entry of the same residual on the cutoff row/column.
    pub field_edge_magnitude: f64,
    /// Deviation of that residual from the predicted truncation term
    /// `(ig/2)(e^{iφ}S+ − e^{−iφ}S-) ⊗ ([a, a†] − 1)`.
    pub field_edge_deviation: f64,
    /// `i[H, S_{π/2−φ}] + 2g sym(a_φ Sz)`
    pub spin_quadrature: f64,
    /// `i[H, Sz] − 2g (sym(a_φ S_{π/2−φ}) + sym(a_{φ+π/2} S_{−φ}))`
    pub inversion: f64,
}

impl IdentityReport {
    pub fn max_interior(&self) -> f64 {
        self.field_quadrature
            .max(self.field_edge_deviation)
            .max(self.spin_quadrature)
            .max(self.inversion)
    }
}

/// Check the equations of motion of `H = g(a S+ + a† S-)` as matrix identities.
pub fn check_heisenberg_identities(joint: &JointSpace, phi: f64, coupling: f64) -> IdentityReport {
    let (dicke, fock) = (joint.dicke(), joint.fock());
    let spin = build_spin_matrices(&dicke);
    let field = build_field_matrices(&fock);
    let h = interaction_tensor(dicke, fock, coupling);
    let g = c(coupling, 0.0);

    let atom = |m: CMatrix| TensorOperator::atom(dicke, fock, m);
    let fld = |m: CMatrix| TensorOperator::field(dicke, fock, m);
    let a_phi = fld(field_direction(&field, phi));
    let a_perp = fld(field_direction(&field, phi + std::f64::consts::FRAC_PI_2));
    let s_conj = atom(spin_direction(&spin, std::f64::consts::FRAC_PI_2 - phi));
    let s_neg = atom(spin_direction(&spin, -phi));
    let sz = atom(spin.sz.clone());

    let heis = |op: &TensorOperator| h.commutator(op).scale(I);

    let n_max = fock.cutoff();
    let r_field = &heis(&a_phi) + &s_conj.clone().scale(g);
    let field_quadrature = r_field.max_abs_entry_where(|n, np| n < n_max && np < n_max);
    let field_edge_magnitude = r_field.max_abs_entry_where(|n, np| n == n_max || np == n_max);

    // [a, a†] − 1 vanishes except for −(n_max + 1) at the last level
    let mut edge = CMatrix::zeros(fock.dim(), fock.dim());
    edge[(n_max, n_max)] = c(-(n_max as f64 + 1.0), 0.0);
    let spin_part = (&spin.splus * cis(phi) - &spin.sminus * cis(-phi)) * (I * g * 0.5);
    let predicted = TensorOperator::product(dicke, fock, spin_part, edge);
    let field_edge_deviation = (&r_field - &predicted).max_abs_entry();

    let two_g = g * 2.0;
    let r_spin = &heis(&s_conj) + &a_phi.sym_product(&sz).scale(two_g);
    let spin_quadrature = r_spin.max_abs_entry();

    let rhs = &a_phi.sym_product(&s_conj) + &a_perp.sym_product(&s_neg);
    let r_inv = &heis(&sz) - &rhs.scale(two_g);
    let inversion = r_inv.max_abs_entry();

    IdentityReport {
        spin: dicke.spin(),
        cutoff: n_max,
        phi,
        coupling,
        field_quadrature,
        field_edge_magnitude,
        field_edge_deviation,
        spin_quadrature,
        inversion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{DickeSpace, FockSpace};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn joint(n: u32, n_max: usize) -> JointSpace {
        JointSpace::new(DickeSpace::new(n).unwrap(), FockSpace::new(n_max))
    }

    #[test]
    fn spin_half_small_cutoff() {
        let r = check_heisenberg_identities(&joint(1, 4), 0.0, 1.0);
        assert!(r.field_quadrature <= 1e-13, "{r:?}");
        // the truncation term is visible on the edge, with weight n_max + 1
        assert!((r.field_edge_magnitude - 2.5).abs() < 1e-12, "{r:?}");
        assert!(r.field_edge_deviation <= 1e-13);
    }

    #[test]
    fn quarter_turn_uses_sx() {
        let r = check_heisenberg_identities(&joint(2, 6), FRAC_PI_2, 1.0);
        assert!(r.field_quadrature <= 1e-13);
        assert!(r.max_interior() <= 1e-12, "{r:?}");
    }

    #[test]
    fn zero_coupling_is_trivial() {
        let r = check_heisenberg_identities(&joint(3, 5), FRAC_PI_4, 0.0);
        assert_eq!(r.field_quadrature, 0.0);
        assert_eq!(r.field_edge_magnitude, 0.0);
        assert_eq!(r.spin_quadrature, 0.0);
        assert_eq!(r.inversion, 0.0);
    }
}
