//! Transfer-matrix engine for resonant tunneling through squeezed
//! barrier-well potentials and their zero-range limits.

pub mod cli;
pub mod format;
pub mod potential;
pub mod resonance;
pub mod scattering;
pub mod transfer;
pub mod zerolimit;

pub use potential::{realize, BwParams, Geometry, Kind, Segment, SegmentChain};
pub use resonance::{resonance_sets, ResonanceRoot, ResonanceSet, RootScan, SetLabel};
pub use scattering::{scatter, transmissivity, ScatteringResult};
pub use transfer::{chain_matrix, closed_form, TransferMatrix};
pub use zerolimit::{classify, converge_study, Transparency};
