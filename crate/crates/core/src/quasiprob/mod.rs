//! Field Q-function, spin Husimi distribution, and their profile comparison.

pub mod field;
pub mod husimi;
pub mod matching;
pub mod output;

pub use field::{field_q, field_q_state, QEllipse, QGrid, QGridSpec, EDGE_POPULATION_TOL};
pub use husimi::{spin_husimi, BlochGrid, BlochGridSpec};
pub use matching::{profile_match, southern_projection, ProfileMapping};
pub use output::{write_pgm, GridSidecar};
