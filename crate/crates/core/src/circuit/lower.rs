use serde::{Deserialize, Serialize};

use super::{NoisyCircuit, Op};
use crate::code::Basis;
use crate::error::Result;
use crate::machine::{validate_program, DepthReport, Gate2, Instruction, MachineProgram};

/// Circuit-level noise parameterized by the two-qubit error rate `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    /// Idle rounds endured by unmeasured qubits during a measurement layer.
    pub tau_m: u32,
    /// Idle rounds equivalent to one shift.
    pub tau_s: u32,
}

impl NoiseModel {
    pub const DEFAULT_TAU_M: u32 = 30;
    pub const LONG_CHAIN_TAU_S: u32 = 30;
    pub const FLAT_TAU_S: u32 = 10;

    pub fn new(p: f64, tau_m: u32, tau_s: u32) -> Self {
        Self { p: p.clamp(0.0, 1.0), tau_m, tau_s }
    }

    pub fn long_chain(p: f64) -> Self {
        Self::new(p, Self::DEFAULT_TAU_M, Self::LONG_CHAIN_TAU_S)
    }

    pub fn flat(p: f64) -> Self {
        Self::new(p, Self::DEFAULT_TAU_M, Self::FLAT_TAU_S)
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, Self::DEFAULT_TAU_M, Self::LONG_CHAIN_TAU_S)
    }

    pub fn two_qubit_rate(&self) -> f64 {
        self.p
    }

    pub fn one_qubit_rate(&self) -> f64 {
        self.p / 10.0
    }

    pub fn idle_rate(&self) -> f64 {
        self.p / 100.0
    }

    /// `tau_m` consecutive idles folded into one channel.
    pub fn measurement_idle_rate(&self) -> f64 {
        (1.0 - (1.0 - self.idle_rate()).powi(self.tau_m as i32)).clamp(0.0, 1.0)
    }

    pub fn shift_rate(&self) -> f64 {
        (self.tau_s as f64 * self.idle_rate()).clamp(0.0, 1.0)
    }
}

/// A lowered program. `record_qubits[k]` is the flat qubit index measured by
/// measurement `k`.
#[derive(Clone, Debug)]
pub struct LoweredCircuit {
    pub circuit: NoisyCircuit,
    pub record_qubits: Vec<u32>,
    pub report: DepthReport,
    /// Depolarizing channels emitted for shift layers.
    pub shift_channels: usize,
}

fn push_dep1(ops: &mut Vec<Op>, p: f64, targets: Vec<u32>) {
    if p > 0.0 && !targets.is_empty() {
        ops.push(Op::Depolarize1 { p, targets });
    }
}

/// Flattens a validated program into a noisy circuit. Qubit `i` of the
/// circuit is `program.qubits[i]`; measurement records follow program order.
pub fn lower_to_circuit(program: &MachineProgram, noise: &NoiseModel) -> Result<LoweredCircuit> {
    let report = validate_program(program)?;
    let index = program.index_map();
    let idx = |a| index[&a] as u32;
    let n = program.qubits.len();
    let mut circuit = NoisyCircuit::new(n);
    let mut record_qubits = Vec::new();
    let mut shift_channels = 0;
    let ops = &mut circuit.ops;
    let cfg = &program.config;

    for layer in &program.layers {
        if layer.iter().all(|i| matches!(i, Instruction::Shift { .. } | Instruction::IntraShift { .. })) {
            let moves = layer.iter().any(|i| match *i {
                Instruction::Shift { s, .. } => s.rem_euclid(cfg.cells as i64) != 0,
                Instruction::IntraShift { s, .. } => s.rem_euclid(cfg.module_size as i64) != 0,
                _ => false,
            });
            if moves && noise.shift_rate() > 0.0 {
                push_dep1(ops, noise.shift_rate(), (0..n as u32).collect());
                shift_channels += 1;
                ops.push(Op::Tick);
            }
            continue;
        }

        let mut busy = vec![false; n];
        let mut mark = |q: u32| busy[q as usize] = true;
        let mut one_qubit_noise = Vec::new();
        let mut gate2: Vec<(Gate2, Vec<(u32, u32)>)> = Vec::new();
        let mut measured = false;
        let mut measure_ops = Vec::new();
        for ins in layer {
            match ins {
                Instruction::Prep { basis, targets } => {
                    let t: Vec<u32> = targets.iter().map(|&a| idx(a)).collect();
                    t.iter().for_each(|&q| mark(q));
                    one_qubit_noise.extend(&t);
                    ops.push(Op::Reset { basis: *basis, targets: t });
                }
                Instruction::Gate1 { kind, target } => {
                    let q = idx(*target);
                    mark(q);
                    one_qubit_noise.push(q);
                    ops.push(Op::Gate1 { kind: *kind, targets: vec![q] });
                }
                Instruction::Gate2 { kind, control, target } => {
                    let pair = (idx(*control), idx(*target));
                    mark(pair.0);
                    mark(pair.1);
                    match gate2.iter_mut().find(|(k, _)| k == kind) {
                        Some((_, pairs)) => pairs.push(pair),
                        None => gate2.push((*kind, vec![pair])),
                    }
                }
                Instruction::Measure { basis, reset, targets } => {
                    measured = true;
                    let t: Vec<u32> = targets.iter().map(|&a| idx(a)).collect();
                    t.iter().for_each(|&q| mark(q));
                    record_qubits.extend(&t);
                    measure_ops.push((*basis, *reset, t));
                }
                Instruction::Shift { .. } | Instruction::IntraShift { .. } => unreachable!("validated"),
            }
        }
        for (kind, pairs) in &gate2 {
            ops.push(Op::Gate2 { kind: *kind, pairs: pairs.clone() });
        }
        for (basis, reset, targets) in measure_ops {
            if reset {
                one_qubit_noise.extend(&targets);
            }
            ops.push(Op::Measure { basis, reset, flip: noise.one_qubit_rate(), targets });
        }
        push_dep1(ops, noise.one_qubit_rate(), one_qubit_noise);
        if noise.two_qubit_rate() > 0.0 {
            for (_, pairs) in gate2 {
                ops.push(Op::Depolarize2 { p: noise.two_qubit_rate(), pairs });
            }
        }
        let idle: Vec<u32> = (0..n as u32).filter(|&q| !busy[q as usize]).collect();
        let idle_rate = if measured { noise.measurement_idle_rate() } else { noise.idle_rate() };
        push_dep1(ops, idle_rate, idle);
        ops.push(Op::Tick);
    }
    Ok(LoweredCircuit { circuit, record_qubits, report, shift_channels })
}

/// Preparation-and-readout pair for one data basis, used to bracket a
/// syndrome-extraction program.
pub(crate) fn data_bracket(basis: Basis, data: &[crate::machine::QubitAddr]) -> (Instruction, Instruction) {
    (
        Instruction::Prep { basis, targets: data.to_vec() },
        Instruction::Measure { basis, reset: false, targets: data.to_vec() },
    )
}
