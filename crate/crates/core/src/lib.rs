//! Lattice-surgery compiler and verifier for inverted-ICM circuits.

pub mod canon;
pub mod circuit;
pub mod cli;
pub mod estimate;
pub mod fixtures;
pub mod icm;
pub mod pauli;
pub mod random;
pub mod render;
pub mod schedule;
pub mod stabilizer;
pub mod statevec;
