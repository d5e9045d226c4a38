//! The module-array machine: configuration, instruction set and programs.
//!
//! Row 0 is the fixed row; rows `1..=moving_rows` are moving rows whose
//! modules are shifted together. A module is identified by its row and its
//! home cell, so a qubit address never changes when modules move.

mod text;
mod validate;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::Basis;

pub use text::{parse_program, write_program};
pub use validate::{apply_shift, validate_program, DepthReport, Positions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parallelism {
    /// Any set of disjoint two-qubit gates runs in one step.
    Full,
    /// At most one two-qubit gate per module per step.
    ChainSequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub moving_rows: usize,
    pub cells: usize,
    pub module_size: usize,
    pub flat: bool,
    pub parallelism: Parallelism,
}

impl ArrayConfig {
    pub fn rows(&self) -> usize {
        self.moving_rows + 1
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }
}

/// `(row, home cell, slot)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitAddr {
    pub row: usize,
    pub module: usize,
    pub slot: usize,
}

impl QubitAddr {
    pub const fn new(row: usize, module: usize, slot: usize) -> Self {
        Self { row, module, slot }
    }

    pub fn module_id(&self) -> (usize, usize) {
        (self.row, self.module)
    }
}

impl fmt::Display for QubitAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.row, self.module, self.slot)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate1 {
    H,
    S,
    SDag,
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate2 {
    CX,
    CY,
    CZ,
}

impl Gate2 {
    pub fn name(self) -> &'static str {
        match self {
            Gate2::CX => "CX",
            Gate2::CY => "CY",
            Gate2::CZ => "CZ",
        }
    }
}

impl Gate1 {
    pub fn name(self) -> &'static str {
        match self {
            Gate1::H => "H",
            Gate1::S => "S",
            Gate1::SDag => "S_DAG",
            Gate1::X => "X",
            Gate1::Y => "Y",
            Gate1::Z => "Z",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instruction {
    /// Prepare in the +1 eigenstate of `basis`.
    Prep { basis: Basis, targets: Vec<QubitAddr> },
    /// Measure in `basis`; with `reset`, the qubit returns to the +1 eigenstate.
    Measure { basis: Basis, reset: bool, targets: Vec<QubitAddr> },
    Gate1 { kind: Gate1, target: QubitAddr },
    Gate2 { kind: Gate2, control: QubitAddr, target: QubitAddr },
    Shift { row: usize, s: i64 },
    /// Rotate the qubits of one flat module by `s` positions.
    IntraShift { row: usize, module: usize, s: i64 },
}

impl Instruction {
    pub fn is_shift(&self) -> bool {
        matches!(self, Instruction::Shift { .. })
    }
}

pub type Layer = Vec<Instruction>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineProgram {
    pub config: ArrayConfig,
    /// Declared qubits; the position in this list is the flat circuit index.
    pub qubits: Vec<QubitAddr>,
    pub layers: Vec<Layer>,
}

impl MachineProgram {
    pub fn new(config: ArrayConfig, qubits: Vec<QubitAddr>) -> Self {
        Self { config, qubits, layers: Vec::new() }
    }

    pub fn push_layer(&mut self, layer: Layer) {
        if !layer.is_empty() {
            self.layers.push(layer);
        }
    }

    pub fn index_map(&self) -> HashMap<QubitAddr, usize> {
        self.qubits.iter().enumerate().map(|(i, &a)| (a, i)).collect()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|i| matches!(i, Instruction::Gate2 { .. }))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("layer {layer}: address {addr} is not a declared qubit")]
    BadAddress { layer: usize, addr: QubitAddr },
    #[error("layer {layer}: row {row} does not exist or cannot move")]
    BadRow { layer: usize, row: usize },
    #[error("layer {layer}: gate between {control} and {target} acts on modules that are not aligned")]
    Misaligned { layer: usize, control: QubitAddr, target: QubitAddr },
    #[error("layer {layer}: gate between {control} and {target} acts on different intra-module positions")]
    FlatPosition { layer: usize, control: QubitAddr, target: QubitAddr },
    #[error("layer {layer}: qubit {addr} is used by more than one instruction")]
    Overlap { layer: usize, addr: QubitAddr },
    #[error("layer {layer}: row {row} is shifted twice")]
    DoubleShift { layer: usize, row: usize },
    #[error("layer {layer}: intra-module shift on a machine without flat modules")]
    IntraShiftNotFlat { layer: usize },
    #[error("layer {layer}: shifts share a layer with other instructions")]
    MixedShiftLayer { layer: usize },
    #[error("layer {layer}: module {row}:{module} runs more than one two-qubit gate")]
    Sequential { layer: usize, row: usize, module: usize },
    #[error("layer {layer}: the fixed row cannot be shifted")]
    FixedRowShift { layer: usize },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_display() {
        assert_eq!(QubitAddr::new(1, 2, 3).to_string(), "1:2:3");
    }
}
