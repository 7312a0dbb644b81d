//! Squeezed collective atomic states radiating few-photon fields through the
//! resonant collective Jaynes–Cummings interaction `a S+ + a† S-`.
//!
//! Time is dimensionless, `τ = g t`. Atoms live in the symmetric Dicke space of
//! collective spin `S = N/2`; the cavity is a single truncated Fock mode.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod quasiprob;
pub mod squeezing;
pub mod states;

pub use error::{Error, Result};
