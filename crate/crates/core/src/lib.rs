//! Exact-arithmetic toolkit for tropical toric vector bundles.
//!
//! A bundle here is a simple valuated matroid together with, for every ray of
//! a rational fan, a descending filtration of flats of the underlying
//! matroid.  The crate computes compatibility certificates, global sections,
//! first Chern data, slopes, decompositions, fibers and total spaces, and
//! Jordan-Hölder / Harder-Narasimhan filtrations, all over exact rationals.

pub mod bundle;
pub mod cli;
pub mod fan;
pub mod fiber;
pub mod io;
pub mod lattice_embed;
pub mod linalg;
pub mod matroid;
pub mod rational;
pub mod sections;
pub mod stability;
#[cfg(test)]
pub(crate) mod testdata;
pub mod tropical;
pub mod valuated;

pub use matroid::{FlatLattice, Matroid};
pub use rational::Rat;
pub use tropical::{ExtRat, TropicalVector};
