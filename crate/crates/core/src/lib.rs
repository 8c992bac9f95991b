//! Parallel endomorphisms of pseudo-Riemannian metric germs.
//!
//! From a metric germ with polynomial coefficients, the library computes the
//! infinitesimal holonomy at the origin, the algebra of parallel
//! endomorphisms (its commutant), splits it into radical and semi-simple
//! part, classifies the semi-simple part and extracts the associated
//! complex, paracomplex and quaternionic structures. Everything is exact.

pub mod cartan;
pub mod endo;
pub mod generators;
pub mod geometry;
pub mod germ;
pub mod holonomy;
pub mod jet;
pub mod matrix;
pub mod pipeline;
pub mod poly;
pub mod scalar;
pub mod structures;
pub mod tables;
pub mod tensors;
pub mod verify;

pub use jet::{Jet, QJet};
pub use matrix::{Matrix, QMat};
pub use scalar::{Field, G, Q};
