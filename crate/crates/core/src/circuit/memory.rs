use std::collections::BTreeMap;

use super::lower::{data_bracket, lower_to_circuit, LoweredCircuit, NoiseModel};
use crate::code::{BBCode, Basis};
use crate::error::{Error, Result};
use crate::layout::{compile_code, serialize_chain, CompiledLayout, LayoutKind, MeasTag};
use crate::machine::{Parallelism, QubitAddr};
use crate::pauli::PauliOperator;

/// A memory experiment: lowered circuit plus the layout it came from.
#[derive(Clone, Debug)]
pub struct MemoryCircuit {
    pub lowered: LoweredCircuit,
    pub basis: Basis,
    pub rounds: usize,
    /// Flat circuit index of code qubit `q`.
    pub data_qubits: Vec<u32>,
    /// Operators the ancilla measurements should reveal, on code qubits.
    pub generators: Vec<PauliOperator>,
    /// One entry per measurement record; data readouts are untagged.
    pub record_tags: Vec<Option<MeasTag>>,
}

impl MemoryCircuit {
    pub fn circuit(&self) -> &super::NoisyCircuit {
        &self.lowered.circuit
    }
}

/// Compiles `rounds` rounds of `kind` and wraps them into a memory
/// experiment in `basis`.
pub fn build_memory_experiment(
    code: &BBCode,
    kind: LayoutKind,
    basis: Basis,
    rounds: usize,
    noise: &NoiseModel,
    parallelism: Parallelism,
) -> Result<MemoryCircuit> {
    let compiled = compile_code(code, kind, rounds)?;
    memory_from_layout(&compiled, &code.logical_observables(basis), basis, noise, parallelism)
}

fn is_type(op: &PauliOperator, basis: Basis) -> bool {
    op.support().iter().all(|&(_, p)| p == basis.pauli())
}

/// Brackets `compiled` with data preparation and readout in `basis` and
/// defines detectors and observables.
///
/// Detectors: the first outcome of each `basis`-type generator, every pair
/// of consecutive outcomes of every generator, and the last outcome of each
/// `basis`-type generator against the final data readout on its support.
pub fn memory_from_layout(
    compiled: &CompiledLayout,
    logicals: &[PauliOperator],
    basis: Basis,
    noise: &NoiseModel,
    parallelism: Parallelism,
) -> Result<MemoryCircuit> {
    if let Some(bad) = logicals.iter().position(|l| !is_type(l, basis)) {
        return Err(Error::Circuit(format!("logical {bad} is not of {basis} type")));
    }
    let mut program = compiled.program.clone();
    let (prep, readout) = data_bracket(basis, &compiled.data);
    program.layers.insert(0, vec![prep]);
    program.layers.push(vec![readout]);
    if parallelism == Parallelism::ChainSequential {
        program = serialize_chain(&program);
    }
    let mut lowered = lower_to_circuit(&program, noise)?;

    let index = program.index_map();
    let data_qubits: Vec<u32> = compiled.data.iter().map(|a: &QubitAddr| index[a] as u32).collect();
    let ancilla_records = compiled.measurements.len();
    let total = lowered.record_qubits.len();
    if total != ancilla_records + compiled.data.len() {
        return Err(Error::Circuit(format!(
            "layout tags {ancilla_records} measurements but the program records {}",
            total - compiled.data.len()
        )));
    }
    let final_record = |q: usize| ancilla_records + q;

    let mut by_generator: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (k, tag) in compiled.measurements.iter().enumerate() {
        if let Some(t) = tag {
            by_generator.entry(t.generator).or_default().insert(t.round, k);
        }
    }

    let mut round_zero = Vec::new();
    let mut comparisons = Vec::new();
    let mut finals = Vec::new();
    for (g, gen) in compiled.generators.iter().enumerate() {
        let recs: Vec<usize> = by_generator.get(&g).map(|m| m.values().copied().collect()).unwrap_or_default();
        if recs.is_empty() {
            continue;
        }
        let same_type = is_type(gen, basis);
        if same_type {
            round_zero.push(vec![recs[0]]);
        }
        for w in recs.windows(2) {
            comparisons.push((g, vec![w[0], w[1]]));
        }
        if same_type {
            let mut d = vec![*recs.last().unwrap()];
            d.extend(gen.support().iter().map(|&(q, _)| final_record(q)));
            finals.push(d);
        }
    }
    comparisons.sort_by_key(|(_, d)| d[1]);
    let c = &mut lowered.circuit;
    c.detectors = round_zero;
    c.detectors.extend(comparisons.into_iter().map(|(_, d)| d));
    c.detectors.extend(finals);
    c.observables = logicals.iter().map(|l| l.support().iter().map(|&(q, _)| final_record(q)).collect()).collect();
    c.check_references()?;
    let mut record_tags = compiled.measurements.clone();
    record_tags.resize(total, None);
    Ok(MemoryCircuit {
        lowered,
        basis,
        rounds: compiled_rounds(compiled),
        data_qubits,
        generators: compiled.generators.clone(),
        record_tags,
    })
}

fn compiled_rounds(compiled: &CompiledLayout) -> usize {
    compiled.measurements.iter().flatten().map(|t| t.round + 1).max().unwrap_or(0)
}
