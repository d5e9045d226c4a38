//! Noiseless verification of circuits and memory experiments.

use serde::Serialize;

use super::tableau::{Affine, Tableau};
use crate::circuit::{MemoryCircuit, NoisyCircuit, Op};
use crate::code::Basis;
use crate::error::{Error, Result};
use crate::gf2::{BitVector, GF2Matrix};
use crate::machine::{Gate1, Gate2};
use crate::pauli::{Pauli, PauliOperator};

#[derive(Clone, Debug, Default, Serialize)]
pub struct DeterminismReport {
    pub detectors: usize,
    pub observables: usize,
    pub random_detectors: Vec<usize>,
    pub random_observables: Vec<usize>,
    /// Noiseless value of every detector, then every observable.
    pub reference: Vec<bool>,
}

impl DeterminismReport {
    pub fn is_deterministic(&self) -> bool {
        self.random_detectors.is_empty() && self.random_observables.is_empty()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} of {} detectors and {} of {} observables are not deterministic (first detectors: {:?})",
            self.random_detectors.len(),
            self.detectors,
            self.random_observables.len(),
            self.observables,
            &self.random_detectors[..self.random_detectors.len().min(8)]
        )
    }
}

fn parity(record: &[Affine], set: &[usize]) -> Affine {
    let mut a = Affine::default();
    for &r in set {
        a.xor_assign(&record[r]);
    }
    a
}

/// Simulates the noiseless circuit symbolically and reports which
/// detectors and observables are random.
pub fn check_determinism(circuit: &NoisyCircuit) -> Result<DeterminismReport> {
    circuit.check_references()?;
    let record = Tableau::new(circuit.num_qubits).run(circuit);
    let mut report = DeterminismReport {
        detectors: circuit.detectors.len(),
        observables: circuit.observables.len(),
        ..Default::default()
    };
    for (k, d) in circuit.detectors.iter().enumerate() {
        let a = parity(&record, d);
        if !a.is_constant() {
            report.random_detectors.push(k);
        }
        report.reference.push(a.constant);
    }
    for (k, o) in circuit.observables.iter().enumerate() {
        let a = parity(&record, o);
        if !a.is_constant() {
            report.random_observables.push(k);
        }
        report.reference.push(a.constant);
    }
    Ok(report)
}

/// Deterministic-or-error form of [`check_determinism`].
pub fn verify_noiseless(circuit: &NoisyCircuit) -> Result<DeterminismReport> {
    let r = check_determinism(circuit)?;
    if !r.is_deterministic() {
        return Err(Error::Verification(r.describe()));
    }
    Ok(r)
}

/// Pauli as `(x, z)` bits per qubit, propagated backwards in time.
struct BackOp {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl BackOp {
    /// Conjugates by one gate going backwards (`P ← U† P U`); signs are
    /// ignored. Every gate used here is self-inverse up to sign except S,
    /// whose inverse acts identically on the bits.
    fn gate1(&mut self, kind: Gate1, q: usize) {
        match kind {
            Gate1::H => std::mem::swap(&mut self.x[q], &mut self.z[q]),
            Gate1::S | Gate1::SDag => self.z[q] ^= self.x[q],
            Gate1::X | Gate1::Y | Gate1::Z => {}
        }
    }

    fn gate2(&mut self, kind: Gate2, c: usize, t: usize) {
        match kind {
            Gate2::CX => {
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Gate2::CZ => {
                self.z[t] ^= self.x[c];
                self.z[c] ^= self.x[t];
            }
            Gate2::CY => {
                let (xc, xt, zt) = (self.x[c], self.x[t], self.z[t]);
                self.x[t] ^= xc;
                self.z[t] ^= xc;
                self.z[c] ^= xt ^ zt;
            }
        }
    }

    /// Whether the component on `q` commutes with the `basis` Pauli.
    fn compatible(&self, q: usize, basis: Basis) -> bool {
        match basis {
            Basis::Z => !self.x[q],
            Basis::X => !self.z[q],
        }
    }
}

/// Position of every measurement record: op index and target index.
fn record_positions(circuit: &NoisyCircuit) -> Vec<(usize, usize)> {
    let mut pos = Vec::with_capacity(circuit.num_measurements());
    for (i, o) in circuit.ops.iter().enumerate() {
        if let Op::Measure { targets, .. } = o {
            pos.extend((0..targets.len()).map(|t| (i, t)));
        }
    }
    pos
}

/// Data-qubit operator revealed by the measurement at `at` (op index and
/// target index): the measured Pauli is propagated backwards past the
/// preparation of the measured qubit until it acts on `data` only.
/// Components on other qubits are absorbed by their measurements and resets
/// when they commute with them; `None` if one does not, or if the start is
/// reached first.
fn measured_operator(circuit: &NoisyCircuit, at: (usize, usize), data: &[bool]) -> Option<PauliOperator> {
    let n = circuit.num_qubits;
    let mut op = BackOp { x: vec![false; n], z: vec![false; n] };
    let (first, slot) = at;
    let Op::Measure { basis, targets, .. } = &circuit.ops[first] else { return None };
    let anc = targets[slot] as usize;
    match basis {
        Basis::X => op.x[anc] = true,
        Basis::Z => op.z[anc] = true,
    }
    // Number of non-data qubits in the support.
    let mut outside = usize::from(!data[anc]);
    let mut released = false;
    let live = |op: &BackOp, q: usize| usize::from(!data[q] && (op.x[q] || op.z[q]));
    for (i, o) in circuit.ops[..=first].iter().enumerate().rev() {
        match o {
            Op::Measure { basis, reset, targets, .. } => {
                let upto = if i == first { slot } else { targets.len() };
                for &q in targets[..upto].iter().rev() {
                    let q = q as usize;
                    if !op.compatible(q, *basis) {
                        return None;
                    }
                    if *reset {
                        released |= q == anc;
                        outside -= live(&op, q);
                        op.x[q] = false;
                        op.z[q] = false;
                    }
                }
            }
            Op::Reset { basis, targets } => {
                for &q in targets {
                    let q = q as usize;
                    if !op.compatible(q, *basis) {
                        return None;
                    }
                    released |= q == anc;
                    outside -= live(&op, q);
                    op.x[q] = false;
                    op.z[q] = false;
                }
            }
            Op::Gate1 { kind, targets } => targets.iter().for_each(|&q| op.gate1(*kind, q as usize)),
            Op::Gate2 { kind, pairs } => {
                for &(c, t) in pairs.iter().rev() {
                    let (c, t) = (c as usize, t as usize);
                    outside -= live(&op, c) + live(&op, t);
                    op.gate2(*kind, c, t);
                    outside += live(&op, c) + live(&op, t);
                }
            }
            _ => {}
        }
        if released && outside == 0 {
            return PauliOperator::from_xz(BitVector::from_bools(&op.x), BitVector::from_bools(&op.z)).ok();
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct MemoryVerification {
    pub determinism: DeterminismReport,
    pub tagged_measurements: usize,
    pub group_rank: usize,
}

fn restrict(op: &PauliOperator, data: &[u32]) -> PauliOperator {
    let support: Vec<(usize, Pauli)> =
        data.iter().enumerate().map(|(i, &q)| (i, op.get(q as usize))).filter(|&(_, p)| p != Pauli::I).collect();
    let mut out = PauliOperator::identity(data.len());
    for (i, p) in support {
        out.set(i, p);
    }
    out
}

/// Checks a memory experiment noiselessly: every detector and observable is
/// deterministic, every tagged ancilla measurement reveals exactly its
/// generator, every generator is measured in every round, and the measured
/// operators generate the code's stabilizer group.
pub fn verify_memory(memory: &MemoryCircuit) -> Result<MemoryVerification> {
    let determinism = verify_noiseless(memory.circuit())?;
    let circuit = memory.circuit();
    let mut data = vec![false; circuit.num_qubits];
    memory.data_qubits.iter().for_each(|&q| data[q as usize] = true);
    let positions = record_positions(circuit);
    let gens = &memory.generators;
    let mut seen = vec![vec![false; memory.rounds]; gens.len()];
    let mut measured = Vec::new();
    for (r, tag) in memory.record_tags.iter().enumerate() {
        let Some(tag) = tag else { continue };
        let op = measured_operator(circuit, positions[r], &data)
            .ok_or_else(|| Error::Verification(format!("measurement {r} does not reveal a clean data operator")))?;
        let got = restrict(&op, &memory.data_qubits);
        if got != gens[tag.generator] {
            return Err(Error::Verification(format!(
                "measurement {r} reveals {got} instead of generator {} ({})",
                tag.generator, gens[tag.generator]
            )));
        }
        if tag.round >= memory.rounds {
            return Err(Error::Verification(format!("measurement {r} is tagged with round {}", tag.round)));
        }
        seen[tag.generator][tag.round] = true;
        measured.push(got);
    }
    if let Some((g, r)) =
        seen.iter().enumerate().find_map(|(g, rounds)| rounds.iter().position(|&s| !s).map(|r| (g, r)))
    {
        return Err(Error::Verification(format!("generator {g} is not measured in round {r}")));
    }
    let sym = |ops: &[PauliOperator]| -> Result<GF2Matrix> {
        let rows: Vec<_> = ops.iter().map(PauliOperator::symplectic).collect();
        GF2Matrix::from_bit_rows(2 * memory.data_qubits.len(), &rows)
    };
    let code_rank = sym(gens)?.rank();
    let measured_rank = sym(&measured)?.rank();
    let mut all = measured.clone();
    all.extend(gens.iter().cloned());
    if measured_rank != code_rank || sym(&all)?.rank() != code_rank {
        return Err(Error::Verification(format!(
            "measured operators have rank {measured_rank}; the stabilizer group has rank {code_rank}"
        )));
    }
    Ok(MemoryVerification { determinism, tagged_measurements: measured.len(), group_rank: measured_rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_code;
    use crate::circuit::{build_memory_experiment, parse_circuit, NoiseModel};
    use crate::layout::LayoutKind;
    use crate::machine::Parallelism;

    #[test]
    fn empty_circuit_passes() {
        assert!(verify_noiseless(&NoisyCircuit::new(0)).is_ok());
    }

    #[test]
    fn random_detector_reported() {
        let c = parse_circuit("RX 0\nM 0\nDETECTOR rec[-1]").unwrap();
        let r = check_determinism(&c).unwrap();
        assert_eq!(r.random_detectors, vec![0]);
        assert!(verify_noiseless(&c).is_err());
    }

    #[test]
    fn bb72_sparse_memory_verifies() {
        let code = builtin_code("bb72").unwrap();
        let m = build_memory_experiment(&code, LayoutKind::Sparse, Basis::Z, 2, &NoiseModel::noiseless(), Parallelism::Full)
            .unwrap();
        let v = verify_memory(&m).unwrap();
        assert_eq!(v.group_rank, 60);
        assert_eq!(v.tagged_measurements, 144);
    }

    #[test]
    fn reused_ancillas_verify_across_rounds() {
        // Later rounds' operators pass through other ancillas' resets.
        let code = builtin_code("bb72").unwrap();
        for kind in [LayoutKind::InterleavedGates, LayoutKind::ConcurrentRounds, LayoutKind::Cyclic] {
            let m = build_memory_experiment(&code, kind, Basis::X, 2, &NoiseModel::noiseless(), Parallelism::ChainSequential)
                .unwrap();
            let v = verify_memory(&m).unwrap();
            assert_eq!((v.group_rank, v.tagged_measurements), (60, 144), "{kind}");
        }
    }

    #[test]
    fn misrouted_gate_fails() {
        let code = builtin_code("bb72").unwrap();
        let mut m =
            build_memory_experiment(&code, LayoutKind::Sparse, Basis::X, 1, &NoiseModel::noiseless(), Parallelism::Full)
                .unwrap();
        let data = m.data_qubits.clone();
        let ops = &mut m.lowered.circuit.ops;
        let gate = ops.iter_mut().find_map(|o| match o {
            Op::Gate2 { kind: Gate2::CX, pairs } => Some(pairs),
            _ => None,
        });
        let pairs = gate.unwrap();
        let old = pairs[0].1;
        pairs[0].1 = *data.iter().find(|&&q| q != old && pairs.iter().all(|p| p.1 != q)).unwrap();
        assert!(verify_memory(&m).is_err());
    }
}
