//! Core library for `chiralcav`: a desk-scale simulator of two resonant
//! cavities exchanging photons through a non-reciprocal mirror.
//!
//! The mirror transmits the two directions with independent strengths
//! omega_ab (A -> B) and omega_ba (B -> A). Equal strengths recover an
//! ordinary hermitian beam-splitter model; unequal real strengths give a
//! non-hermitian but PT-symmetric Hamiltonian whose spectrum stays real as
//! long as omega_ab * omega_ba > 0, with photon exchange that is genuinely
//! asymmetric between the two directions.
//!
//! The crate deliberately carries every result along two independent routes:
//! closed-form Heisenberg dynamics ([`dynamics`]) and numeric propagation by
//! matrix exponentials and ODE integration ([`propagator`]). The
//! [`analysis`] module cross-checks the two and reports residuals.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod operators;
pub mod propagator;

pub use error::{Error, Result};
pub use fock::{FockBasis, FockState, SectorView};
pub use operators::{ModelParams, OperatorMatrix};
