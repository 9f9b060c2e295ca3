//! Consistency and obstruction analysis for distributed program models
//! built from relative execution traces over a finite variable topology.
//!
//! The crate provides: finite topologies of variable sets with their cover
//! lattice (`topology`), relative traces and monotone surjections
//! (`state_traces`), the information algebra of trace relations
//! (`relations`), presheaf specifications (`specifications`), local/global
//! agreement checking (`consistency`), sequential-composition laws
//! (`kleene`), nerve cohomology with exact integer arithmetic
//! (`cohomology`), the dining-philosophers scenario (`scenarios`), seeded
//! sampling and law suites (`sampling`, `laws`), and a JSON model format
//! (`spec_file`).

pub mod cohomology;
pub mod consistency;
pub mod error;
pub mod kleene;
pub mod laws;
pub mod relations;
pub mod sampling;
pub mod scenarios;
pub mod spec_file;
pub mod specifications;
pub mod state_traces;
pub mod topology;

pub use error::{Error, Result};
