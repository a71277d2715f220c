//! Numerical laboratory for the attractive relativistic Vlasov–Poisson
//! system in spherical symmetry.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod criticality;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod par;
pub mod phase_space;
pub mod profile;
pub mod quadrature;
pub mod radial_field;
pub mod special;
pub mod trial_families;

pub use criticality::c_three_halves;
pub use error::{Error, Result};
