//! Exhaustive verification of intersecting sets in GL(2,q) acting on the
//! nonzero vectors of GF(q)², with a GL(3,2) probe.

mod bitset;
pub mod cli;
pub mod ekr;
pub mod ff;
pub mod geometry;
pub mod group;
pub mod linalg;
pub mod search;

pub use bitset::BitSet;
