use serde::{Deserialize, Serialize};

use super::propagator::SpectralPropagator;
use super::series::{Moments, Observable};
use crate::error::{Error, Result};
use crate::hilbert::{
    build_field_matrices, build_spin_matrices, TensorOperator,
};
use crate::hilbert::field::directional_from as field_direction;
use crate::hilbert::spin::directional_from as spin_direction;
use crate::linalg::CVector;
use crate::squeezing::condition_field_squeeze;
use crate::states::{partial_trace, JointState, Keep};

pub const DEFAULT_DTAU: f64 = 1e-3;

/// Largest accepted Richardson error estimate, relative to `max(|D|, 1)`.
pub const RICHARDSON_TOL: f64 = 1e-4;

/// Finite-difference derivatives of `Var(a_φ)` against their moment expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDynamicsReport {
    pub tau: f64,
    pub dtau: f64,
    pub phi: f64,
    pub variance: f64,
    /// Richardson-extrapolated central difference.
    pub first_difference: f64,
    /// `−2 Cov(a_φ, S_{π/2−φ})`
    pub first_moment: f64,
    pub first_abs_error: f64,
    pub first_rel_error: f64,
    pub second_difference: f64,
    /// `4 Cov(a_φ, Sz a_φ) + 2 Var(S_{π/2−φ})`
    pub second_moment: f64,
    pub second_abs_error: f64,
    pub second_rel_error: f64,
    /// Error estimates `|D(h) − D(2h)| / 3` of the plain central differences.
    pub richardson_first: f64,
    pub richardson_second: f64,
    /// Sign predicted for the second derivative at τ = 0 by the squeezing
    /// condition on the reduced atomic state; `None` away from τ = 0.
    pub predicted_negative: Option<bool>,
}

impl VarianceDynamicsReport {
    pub fn second_difference_negative(&self) -> bool {
        self.second_difference < 0.0
    }
}

fn rel(err: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / reference.abs()
    }
}

/// Compare finite differences of `Var(a_φ)(τ)` with the moment expressions for
/// its first and second derivatives.
pub fn check_variance_dynamics(
    propagator: &SpectralPropagator,
    state0: &JointState,
    phi: f64,
    tau: f64,
    dtau: f64,
) -> Result<VarianceDynamicsReport> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(Error::invalid("dtau", "finite-difference step must be positive"));
    }
    propagator.check_state(state0)?;
    let (dicke, fock) = state0.spaces();
    let spin = build_spin_matrices(&dicke);
    let field = build_field_matrices(&fock);
    let a_mat = field_direction(&field, phi);
    let a_phi = TensorOperator::field(dicke, fock, a_mat.clone());
    let s_conj = TensorOperator::atom(dicke, fock, spin_direction(&spin, std::f64::consts::FRAC_PI_2 - phi));
    let sz_a = TensorOperator::product(dicke, fock, spin.sz.clone(), a_mat);

    let expansions = state0
        .components()
        .into_iter()
        .map(|(w, v)| Ok((w, propagator.expand(v)?)))
        .collect::<Result<Vec<_>>>()?;
    let at = |t: f64| -> Vec<(f64, CVector)> { expansions.iter().map(|(w, e)| (*w, e.at(t))).collect() };
    let var_at = |t: f64| -> f64 {
        let vs = at(t);
        let m = Moments::new(dicke, fock, vs.iter().map(|(w, v)| (*w, v)).collect());
        m.evaluate(&Observable::Variance(a_phi.clone())).re
    };

    let v0 = var_at(tau);
    let (p1, m1) = (var_at(tau + dtau), var_at(tau - dtau));
    let (p2, m2) = (var_at(tau + 2.0 * dtau), var_at(tau - 2.0 * dtau));
    let d1_h = (p1 - m1) / (2.0 * dtau);
    let d1_2h = (p2 - m2) / (4.0 * dtau);
    let d2_h = (p1 - 2.0 * v0 + m1) / (dtau * dtau);
    let d2_2h = (p2 - 2.0 * v0 + m2) / (4.0 * dtau * dtau);
    let first_difference = (4.0 * d1_h - d1_2h) / 3.0;
    let second_difference = (4.0 * d2_h - d2_2h) / 3.0;
    let richardson_first = (d1_h - d1_2h).abs() / 3.0;
    let richardson_second = (d2_h - d2_2h).abs() / 3.0;
    for (est, value) in [(richardson_first, first_difference), (richardson_second, second_difference)] {
        let tolerance = RICHARDSON_TOL * value.abs().max(1.0);
        if est > tolerance {
            return Err(Error::StepTooLarge {
                dtau,
                discrepancy: est,
                tolerance,
            });
        }
    }

    let now = at(tau);
    let m = Moments::new(dicke, fock, now.iter().map(|(w, v)| (*w, v)).collect());
    let first_moment = -2.0 * m.evaluate(&Observable::Covariance(a_phi.clone(), s_conj.clone())).re;
    let second_moment = 4.0 * m.evaluate(&Observable::Covariance(a_phi.clone(), sz_a)).re
        + 2.0 * m.evaluate(&Observable::Variance(s_conj)).re;

    let predicted_negative = if tau == 0.0 {
        let rho_atom = partial_trace(state0, Keep::Atom);
        Some(condition_field_squeeze(&rho_atom, phi)?.satisfied)
    } else {
        None
    };

    let first_abs_error = (first_difference - first_moment).abs();
    let second_abs_error = (second_difference - second_moment).abs();
    Ok(VarianceDynamicsReport {
        tau,
        dtau,
        phi,
        variance: v0,
        first_difference,
        first_moment,
        first_abs_error,
        first_rel_error: rel(first_abs_error, first_moment),
        second_difference,
        second_moment,
        second_abs_error,
        second_rel_error: rel(second_abs_error, second_moment),
        richardson_first,
        richardson_second,
        predicted_negative,
    })
}
