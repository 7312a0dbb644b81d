use serde::{Deserialize, Serialize};

use crate::dynamics::{series, NamedObservable, SpectralPropagator};
use crate::error::{Error, Result};
use crate::hilbert::{directional_field_op, directional_spin_op, TensorOperator};
use crate::states::{partial_trace, spin_vector, variance, JointState, Keep};

/// Large-S, near-south-pole approximation of the field and spin variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxVariances {
    pub field_variance: f64,
    pub spin_variance: f64,
}

/// `s0` is the mean spin length, `var0` the initial `Var(S_{π/2−φ})`.
pub fn approx_variances(s0: f64, var0: f64, tau: f64) -> ApproxVariances {
    let omega = (2.0 * s0).sqrt();
    let (sin, cos) = (omega * tau).sin_cos();
    let (c2, s2) = (cos * cos, sin * sin);
    ApproxVariances {
        field_variance: 0.25 * c2 + var0 / (2.0 * s0) * s2,
        spin_variance: var0 * c2 + 0.5 * s0 * s2,
    }
}

/// `π / √(2 s0)`
pub fn approx_period(s0: f64) -> f64 {
    std::f64::consts::PI / (2.0 * s0).sqrt()
}

/// Exact against approximate variance dynamics from one prepared state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxComparison {
    pub phi: f64,
    pub s0: f64,
    pub var0: f64,
    /// Angle of the initial mean spin from −z.
    pub theta: f64,
    pub tau: Vec<f64>,
    pub exact_field: Vec<f64>,
    pub approx_field: Vec<f64>,
    pub exact_spin: Vec<f64>,
    pub approx_spin: Vec<f64>,
    /// Largest `|exact − approx| / approx` of the field variance within the first period.
    pub max_rel_deviation: f64,
    pub exact_min: f64,
    pub exact_min_tau: f64,
    pub predicted_min: f64,
    pub predicted_min_tau: f64,
    pub min_rel_deviation: f64,
    pub min_tau_rel_deviation: f64,
    /// First local maximum of the exact field variance after its minimum.
    pub exact_period: Option<f64>,
    pub predicted_period: f64,
    pub period_rel_deviation: Option<f64>,
}

/// Vertex of the parabola through three equally spaced samples.
fn parabolic_peak(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let h = x[i + 1] - x[i];
    let denom = y0 - 2.0 * y1 + y2;
    if denom == 0.0 {
        return x[i];
    }
    x[i] + 0.5 * h * (y0 - y2) / denom
}

pub fn compare_exact_vs_approx(
    propagator: &SpectralPropagator,
    state0: &JointState,
    phi: f64,
    tau_grid: &[f64],
) -> Result<ApproxComparison> {
    if tau_grid.len() < 3 {
        return Err(Error::GridMismatch("comparison needs at least three τ points".into()));
    }
    let (dicke, fock) = state0.spaces();
    let rho_atom = partial_trace(state0, Keep::Atom);
    let mean = spin_vector(&rho_atom)?;
    let s0 = mean.magnitude();
    let conj = directional_spin_op(std::f64::consts::FRAC_PI_2 - phi, &dicke);
    let var0 = variance(&conj, &rho_atom)?;

    let observables = [
        NamedObservable::variance("field", TensorOperator::field(dicke, fock, directional_field_op(phi, &fock))),
        NamedObservable::variance("spin", TensorOperator::atom(dicke, fock, conj)),
    ];
    let s = series(propagator, state0, &observables, tau_grid, "prepared")?;
    let exact_field = s.real("field").expect("field column");
    let exact_spin = s.real("spin").expect("spin column");
    let approx: Vec<ApproxVariances> = tau_grid.iter().map(|&t| approx_variances(s0, var0, t)).collect();
    let approx_field: Vec<f64> = approx.iter().map(|a| a.field_variance).collect();
    let approx_spin: Vec<f64> = approx.iter().map(|a| a.spin_variance).collect();

    let predicted_period = approx_period(s0);
    let max_rel_deviation = tau_grid
        .iter()
        .zip(exact_field.iter().zip(&approx_field))
        .filter(|(t, _)| **t <= predicted_period)
        .map(|(_, (e, a))| (e - a).abs() / a.abs())
        .fold(0.0, f64::max);

    let imin = exact_field
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let exact_min = exact_field[imin];
    let exact_min_tau = if imin > 0 && imin + 1 < tau_grid.len() {
        parabolic_peak(tau_grid, &exact_field, imin)
    } else {
        tau_grid[imin]
    };
    let predicted_min = var0 / (2.0 * s0);
    let predicted_min_tau = predicted_period / 2.0;

    let exact_period = (imin.max(1)..tau_grid.len().saturating_sub(1))
        .find(|&i| exact_field[i] >= exact_field[i - 1] && exact_field[i] > exact_field[i + 1])
        .map(|i| parabolic_peak(tau_grid, &exact_field, i));

    Ok(ApproxComparison {
        phi,
        s0,
        var0,
        theta: mean.angle_from_south(),
        tau: tau_grid.to_vec(),
        exact_field,
        approx_field,
        exact_spin,
        approx_spin,
        max_rel_deviation,
        exact_min,
        exact_min_tau,
        predicted_min,
        predicted_min_tau,
        min_rel_deviation: (exact_min - predicted_min).abs() / predicted_min,
        min_tau_rel_deviation: (exact_min_tau - predicted_min_tau).abs() / predicted_min_tau,
        exact_period,
        predicted_period,
        period_rel_deviation: exact_period.map(|p| (p - predicted_period).abs() / predicted_period),
    })
}
