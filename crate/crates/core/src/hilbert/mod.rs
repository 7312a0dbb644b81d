//! Bases, collective spin and field operators, and the resonant interaction.
//!
//! Sign convention between the spin and field phase spaces: under
//! `H = a S+ + a† S-` the field amplitude obeys `d<a>/dτ = -i <S->`, so early
//! in the emission `Re <a> ∝ -<Sy>` and `Im <a> ∝ -<Sx>`. The test
//! `field_amplitude_follows_negative_spin_components` in `dynamics` checks this
//! against the exact evolution.

pub mod field;
pub mod operator;
pub mod space;
pub mod spin;

pub use field::{build_field_matrices, directional_field_op, number_operator, FieldMatrices};
pub use operator::{
    flatten_joint, interaction_hamiltonian, interaction_tensor, joint_matrix, BlockedOperator,
    TensorOperator, TensorTerm,
};
pub use space::{DickeSpace, ExcitationSector, FockSpace, JointLabel, JointSpace, SectorRecord};
pub use spin::{
    build_spin_matrices, directional_spin_op, ladder_coefficient, rotation_operator, zyz_angles,
    SpinMatrices, SpinRotator,
};
