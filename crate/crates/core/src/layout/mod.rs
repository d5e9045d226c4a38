//! Syndrome-extraction compilers targeting the module-array machine.

mod cyclic;
mod depth;
mod interleaved;
mod mu;
mod sparse;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::code::BBCode;
use crate::error::{Error, Result};
use crate::machine::{Instruction, MachineProgram, Parallelism, QubitAddr};
use crate::pauli::PauliOperator;

pub use cyclic::{cyclic_depth_bound, cyclic_layout, cyclic_layout_code, CyclicPlacement};
pub use depth::{closed_form, depth_table, DepthRow, DepthTable};
pub use interleaved::interleaved_layout;
pub use mu::{mu_concurrent_rounds, mu_interleaved_gates, MuAction, MuSchedule, MuTuple};
pub use sparse::{flat_cyclic_layout, sparse_cyclic_layout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    Cyclic,
    Sparse,
    Flat,
    InterleavedGates,
    ConcurrentRounds,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 5] = [
        LayoutKind::Cyclic,
        LayoutKind::Sparse,
        LayoutKind::Flat,
        LayoutKind::InterleavedGates,
        LayoutKind::ConcurrentRounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Cyclic => "cyclic",
            LayoutKind::Sparse => "sparse",
            LayoutKind::Flat => "flat",
            LayoutKind::InterleavedGates => "interleaved-gates",
            LayoutKind::ConcurrentRounds => "concurrent-rounds",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownLayout { name: s.to_string(), valid: Self::valid_names() })
    }
}

/// Which generator, in which round, a measurement outcome belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeasTag {
    pub generator: usize,
    pub round: usize,
}

/// A compiled program together with the bookkeeping needed to turn its
/// measurement record into detectors.
#[derive(Clone, Debug)]
pub struct CompiledLayout {
    pub program: MachineProgram,
    /// Address of code qubit `q` is `data[q]`.
    pub data: Vec<QubitAddr>,
    /// The operators the ancilla measurements are meant to reveal.
    pub generators: Vec<PauliOperator>,
    /// One entry per measured qubit, in program order.
    pub measurements: Vec<Option<MeasTag>>,
}

impl CompiledLayout {
    /// Tags for the measurements of `program` obtained by mapping every
    /// measured ancilla address through `assign`, which is called in program
    /// order and must track rounds itself.
    fn tag_measurements(program: &MachineProgram, mut assign: impl FnMut(QubitAddr) -> Option<MeasTag>) -> Vec<Option<MeasTag>> {
        let mut tags = Vec::new();
        for ins in program.layers.iter().flatten() {
            if let Instruction::Measure { targets, .. } = ins {
                tags.extend(targets.iter().map(|&t| assign(t)));
            }
        }
        tags
    }

    /// Tags measurements of dedicated ancillas: the `k`-th measurement of the
    /// ancilla for generator `g` is round `k`.
    fn tag_dedicated(program: &MachineProgram, ancilla_of: &HashMap<QubitAddr, usize>) -> Vec<Option<MeasTag>> {
        let mut count: HashMap<usize, usize> = HashMap::new();
        Self::tag_measurements(program, |addr| {
            ancilla_of.get(&addr).map(|&g| {
                let c = count.entry(g).or_insert(0);
                *c += 1;
                MeasTag { generator: g, round: *c - 1 }
            })
        })
    }
}

/// Compiles `rounds` rounds of syndrome extraction of a BB code.
pub fn compile_code(code: &BBCode, kind: LayoutKind, rounds: usize) -> Result<CompiledLayout> {
    if rounds == 0 {
        return Err(Error::Layout("at least one round is required".into()));
    }
    match kind {
        LayoutKind::Cyclic => {
            let placement = CyclicPlacement::for_code(code);
            cyclic_layout_code(code, placement, rounds)
        }
        LayoutKind::Sparse => sparse::sparse_rounds(code, false, rounds),
        LayoutKind::Flat => sparse::flat_rounds(code, rounds),
        LayoutKind::InterleavedGates => interleaved_layout(code, &mu_interleaved_gates(code)?, rounds),
        LayoutKind::ConcurrentRounds => interleaved_layout(code, &mu_concurrent_rounds(code), rounds),
    }
}

/// Splits every gate layer so that each module takes part in at most one
/// two-qubit gate per layer. Gates keep their relative order per module.
pub fn serialize_chain(program: &MachineProgram) -> MachineProgram {
    let mut out = MachineProgram::new(program.config.with_parallelism(Parallelism::ChainSequential), program.qubits.clone());
    for layer in &program.layers {
        let has_gate2 = layer.iter().any(|i| matches!(i, Instruction::Gate2 { .. }));
        if !has_gate2 {
            out.push_layer(layer.clone());
            continue;
        }
        let mut sublayers: Vec<Vec<Instruction>> = Vec::new();
        let mut next_free: HashMap<(usize, usize), usize> = HashMap::new();
        let mut others = Vec::new();
        for ins in layer {
            if let Instruction::Gate2 { control, target, .. } = ins {
                let mods = [control.module_id(), target.module_id()];
                let slot = mods.iter().map(|m| next_free.get(m).copied().unwrap_or(0)).max().unwrap();
                for m in mods {
                    next_free.insert(m, slot + 1);
                }
                if sublayers.len() <= slot {
                    sublayers.resize_with(slot + 1, Vec::new);
                }
                sublayers[slot].push(ins.clone());
            } else {
                others.push(ins.clone());
            }
        }
        sublayers[0].extend(others);
        for s in sublayers {
            out.push_layer(s);
        }
    }
    out
}
