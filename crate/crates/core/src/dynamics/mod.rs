//! Section dynamics for one field direction: critical points of the height,
//! separatrix graphs on critical levels, regular orbits, and the direction
//! classifier built on top of them.

pub mod carrier;
pub mod classify;
pub mod critical;
pub mod direction;
pub mod options;
pub mod orbits;
pub mod separatrix;
pub mod trace;

pub use classify::{classify_direction, ClassifyOptions, DirectionRecord, Diagnostics};
pub use critical::{classify_critical, find_critical_points, CriticalKind, CriticalPoint};
pub use direction::RationalDirection;
pub use options::SectionOptions;
pub use orbits::sample_regular_orbits;
pub use separatrix::{trace_separatrix_graph, SeparatrixEdge, SeparatrixGraph};
pub use trace::{characteristic_velocity, trace_level_orbit, trace_level_orbit_oriented, Orbit};
