//! Flat noisy Clifford circuits with detectors and observables.

mod lower;
mod memory;
mod text;

use crate::code::Basis;
use crate::machine::{Gate1, Gate2};

pub use lower::{lower_to_circuit, LoweredCircuit, NoiseModel};
pub use memory::{build_memory_experiment, memory_from_layout, MemoryCircuit};
pub use text::{parse_circuit, write_circuit};

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// Reset to the +1 eigenstate of `basis`.
    Reset { basis: Basis, targets: Vec<u32> },
    Gate1 { kind: Gate1, targets: Vec<u32> },
    Gate2 { kind: Gate2, pairs: Vec<(u32, u32)> },
    /// Measurement whose recorded result is flipped with probability `flip`.
    /// With `reset` the qubit is returned to the +1 eigenstate of `basis`.
    Measure { basis: Basis, reset: bool, flip: f64, targets: Vec<u32> },
    /// Uniform single-qubit depolarizing: X, Y or Z each with `p / 3`.
    Depolarize1 { p: f64, targets: Vec<u32> },
    /// Uniform two-qubit depolarizing over the 15 non-identity Paulis.
    Depolarize2 { p: f64, pairs: Vec<(u32, u32)> },
    XError { p: f64, targets: Vec<u32> },
    ZError { p: f64, targets: Vec<u32> },
    Tick,
}

impl Op {
    pub fn is_noise(&self) -> bool {
        matches!(self, Op::Depolarize1 { .. } | Op::Depolarize2 { .. } | Op::XError { .. } | Op::ZError { .. })
            || matches!(self, Op::Measure { flip, .. } if *flip > 0.0)
    }

    pub fn measurement_count(&self) -> usize {
        match self {
            Op::Measure { targets, .. } => targets.len(),
            _ => 0,
        }
    }
}

/// Detectors and observables are parities of measurement results, stored as
/// absolute indices into the measurement record.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoisyCircuit {
    pub num_qubits: usize,
    pub ops: Vec<Op>,
    pub detectors: Vec<Vec<usize>>,
    pub observables: Vec<Vec<usize>>,
}

impl NoisyCircuit {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, ..Default::default() }
    }

    pub fn num_measurements(&self) -> usize {
        self.ops.iter().map(Op::measurement_count).sum()
    }

    /// Number of ops carrying a nonzero error probability.
    pub fn noise_channel_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_noise()).count()
    }

    /// The same circuit with every noise process removed.
    pub fn without_noise(&self) -> Self {
        let ops = self
            .ops
            .iter()
            .filter_map(|o| match o {
                Op::Depolarize1 { .. } | Op::Depolarize2 { .. } | Op::XError { .. } | Op::ZError { .. } => None,
                Op::Measure { basis, reset, targets, .. } => {
                    Some(Op::Measure { basis: *basis, reset: *reset, flip: 0.0, targets: targets.clone() })
                }
                other => Some(other.clone()),
            })
            .collect();
        Self { num_qubits: self.num_qubits, ops, detectors: self.detectors.clone(), observables: self.observables.clone() }
    }

    /// Checks that detector and observable references exist.
    pub fn check_references(&self) -> crate::Result<()> {
        let m = self.num_measurements();
        for (kind, sets) in [("detector", &self.detectors), ("observable", &self.observables)] {
            for (k, set) in sets.iter().enumerate() {
                if let Some(&bad) = set.iter().find(|&&r| r >= m) {
                    return Err(crate::Error::Circuit(format!(
                        "{kind} {k} references measurement {bad} but only {m} exist"
                    )));
                }
            }
        }
        Ok(())
    }
}
