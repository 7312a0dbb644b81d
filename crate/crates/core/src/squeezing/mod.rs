//! Spin-squeezing criteria, the approximate emission dynamics, and
//! experimental feasibility numbers.

pub mod approx;
pub mod criteria;
pub mod feasibility;
pub mod transverse;

pub use approx::{approx_period, approx_variances, compare_exact_vs_approx, ApproxComparison, ApproxVariances};
pub use criteria::{
    condition_field_squeeze, condition_popular, condition_tailor_made, default_phases, Axis, Condition,
    PhaseCondition, SqueezingReport, BOUNDARY_TOL,
};
pub use feasibility::{feasibility_report, thermal_occupancy, FeasibilityReport, BOLTZMANN, PLANCK};
pub use transverse::{
    min_transverse_variance, min_transverse_variance_in_frame, TransverseCovariance, DIRECTION_EPS,
};
