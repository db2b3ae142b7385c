#![no_std]
//! Quantum-circuit isometric tensor networks on 2D lattices.
//!
//! Every site tensor is the `t = 0` slice of a unitary circuit block, so the
//! network is isometric towards the corner site `(0, 0)` by construction.
//! The crate builds blocks and lattice networks, contracts them exactly with a
//! causal-cone-truncated frontier sweep, optimizes them variationally, and
//! simulates their noisy holographic execution.

extern crate alloc;

pub mod blocks;
pub mod circuit;
pub mod eigen;
pub mod error;
pub mod exact_sim;
pub mod frontier;
pub mod gates;
pub mod hamiltonians;
pub mod linalg;
pub mod network;
pub mod noise;
pub mod noise_bench;
pub mod optimize;
pub mod variance;

pub use error::{Error, Result};
