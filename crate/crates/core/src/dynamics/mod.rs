//! Exact evolution under the resonant interaction, observable series, and
//! numerical checks of the Heisenberg equations of motion.

pub mod identities;
pub mod propagator;
pub mod series;
pub mod variance;

pub use identities::{check_heisenberg_identities, IdentityReport};
pub use propagator::{diagonalize, Expansion, SectorEigen, SpectralPropagator, EIGEN_TOL};
pub use series::{series, NamedObservable, Observable, ObservableSeries, Provenance, SeriesMetadata};
pub use variance::{check_variance_dynamics, VarianceDynamicsReport, DEFAULT_DTAU, RICHARDSON_TOL};
