//! Syndrome-extraction compilation, simulation and decoding for stabilizer
//! codes distributed over arrays of qubit modules connected by cyclic shifts.

pub mod catalog;
pub mod circuit;
pub mod code;
pub mod decoder;
pub mod dem;
pub mod error;
pub mod experiment;
pub mod gf2;
pub mod layout;
pub mod machine;
pub mod pauli;
pub mod poly;
pub mod sim;

pub use code::{BBCode, Basis, QubitLabel, StabilizerCode};
pub use error::{Error, Result};
pub use gf2::{BitVector, GF2Matrix};
pub use machine::{ArrayConfig, DepthReport, Instruction, MachineProgram, Parallelism, QubitAddr};
pub use pauli::{Pauli, PauliOperator};
pub use poly::{BivariatePolynomial, Monomial, RingParams};
