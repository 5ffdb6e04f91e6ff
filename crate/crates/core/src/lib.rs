//! Hartree-Fock antiferromagnetic gap of the half-filled square-lattice
//! Hubbard model: density of states, gap equation, weak-coupling constants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dos;
pub mod error;
pub mod gap;
pub mod quad;
pub mod renorm;
pub mod specfun;

pub use error::{Error, Result};
pub use gap::{AsymptoticComparison, GapParams, GapSolution};
pub use quad::QuadratureConfig;
pub use renorm::{ConstantsReport, LaurentFit, MellinPair, RegularizedLimit};
