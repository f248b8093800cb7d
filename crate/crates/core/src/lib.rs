//! Open-orbit classification for Fermi surfaces in a strong magnetic field.
//!
//! The surface `f(x) = E` lives on the three-torus; a rational field
//! direction `h` cuts it into plane sections whose closed and open leaves
//! are traced numerically. The homology of those leaves gives a stability
//! zone label `(a,b,c)` per direction, and scanning a grid of directions
//! maps out the zones, their areas and the fractal set between them.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod homology;
pub mod lattice;
pub mod scan;

pub use dynamics::{classify_direction, ClassifyOptions, DirectionRecord, RationalDirection, SectionOptions};
pub use error::*;
pub use geometry::{DispersionRelation, TorusPoint, Vec3};
pub use homology::{CycleLattice, UnresolvedReason, ZoneLabel};
pub use lattice::IVec3;
