//! Quantum neural network force fields.
//!
//! Re-uploading parameterized quantum circuits, simulated exactly on a dense
//! statevector, regress molecular potential energy surfaces. Energies come
//! from the circuit output, forces from shift-rule input gradients chained
//! through an internal-coordinate descriptor pipeline.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line driver live in the `qff` crate.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adjoint;
pub mod baseline;
pub mod capacity;
pub mod circuit;
pub mod data;
pub mod descriptors;
pub mod dynamics;
mod error;
pub mod fft;
pub mod gradients;
pub mod linalg;
pub mod model;
pub mod presets;
pub mod statevec;
pub mod train;

pub use error::{Error, Result};
