//! Predimension constructions over finite structures.
//!
//! The crate evaluates integer predimension functions on finite labeled
//! structures, derives the dimension `∂` from them, builds free amalgams and
//! finite approximations of generic structures (optionally collapsed by a
//! `μ` bound), checks the resulting pregeometry, and classifies intersections
//! of torsion cosets of subtori with exact lattice arithmetic.
//!
//! Point sets are bitmasks ([`PointSet`]), so a single structure carries at
//! most 64 points.

pub mod amalgam;
pub mod budget;
pub mod cli;
pub mod collapse;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod matroid;
pub mod pointset;
pub mod predim;
pub mod structures;
pub mod toric;

pub use budget::Budget;
pub use error::{Error, Result};
pub use pointset::PointSet;
