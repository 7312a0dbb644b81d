use serde::{Deserialize, Serialize};

use super::transverse::{min_transverse_variance, TransverseCovariance};
use crate::error::Result;
use crate::hilbert::{build_spin_matrices, directional_spin_op};
use crate::states::{expectation, variance, DensityMatrix};

/// Half-width of the band around `lhs = rhs` reported as a boundary case,
/// relative to `max(1, |rhs|)`.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Outcome of a strict inequality `lhs < rhs` (plus any side condition).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub lhs: f64,
    pub rhs: f64,
    /// Holds strictly and is not within roundoff of the boundary.
    pub satisfied: bool,
    /// `|lhs − rhs|` is at roundoff level; `satisfied` is then false.
    pub on_boundary: bool,
}

impl Condition {
    pub fn strict(lhs: f64, rhs: f64) -> Self {
        Self::strict_with(lhs, rhs, true)
    }

    /// `lhs < rhs` and `side`.
    pub fn strict_with(lhs: f64, rhs: f64, side: bool) -> Self {
        let on_boundary = (lhs - rhs).abs() <= BOUNDARY_TOL * rhs.abs().max(1.0);
        Condition {
            lhs,
            rhs,
            satisfied: side && lhs < rhs && !on_boundary,
            on_boundary,
        }
    }
}

/// Cartesian transverse axis for the popular criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// Negative initial curvature of `Var(a_φ)` under vacuum-field emission:
/// `Var(S_{π/2−φ}) < |<Sz>|/2` and `<Sz> < 0`.
pub fn condition_field_squeeze(rho_atom: &DensityMatrix, phi: f64) -> Result<Condition> {
    let space = rho_atom.space().as_dicke()?;
    let ops = build_spin_matrices(&space);
    let sz = expectation(&ops.sz, rho_atom)?.re;
    let conj = directional_spin_op(std::f64::consts::FRAC_PI_2 - phi, &space);
    let var = variance(&conj, rho_atom)?;
    Ok(Condition::strict_with(var, sz.abs() / 2.0, sz < 0.0))
}

/// `Var(S_i) < |<Sz>|/2` for `i = x` or `y`.
pub fn condition_popular(rho_atom: &DensityMatrix, axis: Axis) -> Result<Condition> {
    let space = rho_atom.space().as_dicke()?;
    let ops = build_spin_matrices(&space);
    let sz = expectation(&ops.sz, rho_atom)?.re;
    let op = match axis {
        Axis::X => &ops.sx,
        Axis::Y => &ops.sy,
    };
    Ok(Condition::strict(variance(op, rho_atom)?, sz.abs() / 2.0))
}

/// `λ_min < |<S>|/2`
pub fn condition_tailor_made(t: &TransverseCovariance) -> Condition {
    Condition::strict(t.lambda_min(), t.mean_length() / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCondition {
    pub phi: f64,
    pub condition: Condition,
}

/// All squeezing diagnostics of one atomic state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub transverse: TransverseCovariance,
    pub cond_field_squeeze: Vec<PhaseCondition>,
    pub cond_tailor_made: Condition,
    pub cond_popular_x: Condition,
    pub cond_popular_y: Condition,
    /// `λ_min / (|<S>|/2)`
    pub squeezing_ratio: f64,
}

/// Quadrature angles sampled by [`SqueezingReport::new`] when none are given.
pub fn default_phases() -> Vec<f64> {
    (0..8).map(|k| k as f64 * std::f64::consts::PI / 8.0).collect()
}

impl SqueezingReport {
    pub fn new(rho_atom: &DensityMatrix, phases: &[f64]) -> Result<Self> {
        let transverse = min_transverse_variance(rho_atom)?;
        let cond_field_squeeze = phases
            .iter()
            .map(|&phi| {
                Ok(PhaseCondition {
                    phi,
                    condition: condition_field_squeeze(rho_atom, phi)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let cond_tailor_made = condition_tailor_made(&transverse);
        Ok(SqueezingReport {
            squeezing_ratio: transverse.lambda_min().max(0.0) / (transverse.mean_length() / 2.0),
            transverse,
            cond_field_squeeze,
            cond_tailor_made,
            cond_popular_x: condition_popular(rho_atom, Axis::X)?,
            cond_popular_y: condition_popular(rho_atom, Axis::Y)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DickeSpace;
    use crate::states::{bloch_state, dicke_basis};
    use std::f64::consts::PI;

    fn space(n: u32) -> DickeSpace {
        DickeSpace::new(n).unwrap()
    }

    #[test]
    fn bottom_state_sits_on_boundary() {
        let d = space(50);
        let rho = DensityMatrix::from_pure(&dicke_basis(&d, 0).unwrap());
        let c = condition_field_squeeze(&rho, 0.3).unwrap();
        assert!(c.on_boundary);
        assert!(!c.satisfied);
    }

    #[test]
    fn top_state_fails_on_sign() {
        let d = space(10);
        let rho = DensityMatrix::from_pure(&dicke_basis(&d, d.top()).unwrap());
        for phi in [0.0, 1.0, 2.0] {
            assert!(!condition_field_squeeze(&rho, phi).unwrap().satisfied);
        }
        let p = condition_popular(&rho, Axis::X).unwrap();
        assert!(!p.satisfied && p.on_boundary);
    }

    #[test]
    fn tilted_bloch_state_separates_criteria() {
        let d = space(50);
        let rho = DensityMatrix::from_pure(&bloch_state(3.0 * PI / 4.0, 0.0, &d));
        let x = condition_popular(&rho, Axis::X).unwrap();
        let bound = 25.0 * 2f64.sqrt() / 4.0;
        assert!((x.lhs - 6.25).abs() < 1e-10);
        assert!((x.rhs - bound).abs() < 1e-10);
        assert!(x.satisfied);
        let report = SqueezingReport::new(&rho, &default_phases()).unwrap();
        assert!((report.transverse.lambda_min() - 12.5).abs() < 1e-10);
        assert!(!report.cond_tailor_made.satisfied);
        assert!(report.cond_tailor_made.on_boundary);
    }

    #[test]
    fn report_serializes() {
        let rho = DensityMatrix::from_pure(&bloch_state(2.5, 0.2, &space(6)));
        let r = SqueezingReport::new(&rho, &[0.0]).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("squeezing_ratio"));
        assert!(json.contains("cond_popular_x"));
    }
}
