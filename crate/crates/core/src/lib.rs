#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod ansatz;
pub mod bits;
pub mod distribution;
pub mod error;
pub mod fock;
pub mod gates;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod seed;

pub use bits::Bitstring;
pub use error::{Error, Result};
pub use linalg::{C64, ComplexMatrix, HybridState};
