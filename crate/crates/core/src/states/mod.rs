//! Initial states, density matrices, partial traces and moments.

pub mod density;
pub mod joint;
pub mod moments;
pub mod pure;
pub mod serial;

pub use density::{DensityCheck, DensityMatrix};
pub use joint::{
    joint_from_grid, partial_trace, partial_trace_dense, product_state, JointEnsemble, JointState,
    Keep, LocalState,
};
pub use moments::{covariance_sym, expectation, spin_vector, variance, Observe, SpinMoments, SpinVector};
pub use pure::{
    bloch_state, coherent_state, coherent_tail_mass, dicke_basis, required_cutoff, vacuum,
    PureState, Space, DEFAULT_TAIL_TOL,
};
pub use serial::{DensityRecord, StateRecord};
