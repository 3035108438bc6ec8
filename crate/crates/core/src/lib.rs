//! Deformation spaces of special endomorphisms on supersingular K3 crystals,
//! their intersection multiplicities, and the lattice-counting side used to
//! bound local contributions.

pub mod admissible;
pub mod bump;
pub mod crystal;
pub mod curve;
pub mod deformation;
pub mod error;
pub mod intersection;
pub mod matrix;
pub mod qlattice;
pub mod samples;
pub mod series;
pub mod verify;
pub mod witness;
pub mod witt;

pub use error::{Error, Result};
