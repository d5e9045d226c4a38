//! Dense state-vector oracle for sequential Pauli measurements on a few
//! qubits, and its comparison with the cyclic layout.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use super::tableau::Tableau;
use crate::circuit::{lower_to_circuit, NoiseModel};
use crate::error::{Error, Result};
use crate::layout::cyclic_layout;
use crate::pauli::PauliOperator;

pub const MAX_ORACLE_QUBITS: usize = 6;
pub const MAX_ORACLE_OPERATORS: usize = 6;

/// One measurement history: outcome `true` means eigenvalue `-1`.
#[derive(Clone, Debug)]
pub struct OracleBranch {
    pub outcomes: Vec<bool>,
    pub probability: f64,
    /// Normalized post-measurement state; qubit `q` is bit `q` of the index.
    pub state: Vec<Complex64>,
}

/// `P |psi>` for a Pauli given as per-qubit `(x, z)` bits, with `(1, 1)`
/// meaning `Y`.
fn apply_pauli(x: &[bool], z: &[bool], psi: &[Complex64]) -> Vec<Complex64> {
    let xmask = x.iter().enumerate().filter(|(_, &b)| b).fold(0usize, |m, (q, _)| m | 1 << q);
    let zmask = z.iter().enumerate().filter(|(_, &b)| b).fold(0usize, |m, (q, _)| m | 1 << q);
    let ny = (xmask & zmask).count_ones();
    let i_pow = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];
    let global = i_pow[(ny % 4) as usize];
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (b, &a) in psi.iter().enumerate() {
        let sign = if (b & zmask).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        out[b ^ xmask] += global * a * sign;
    }
    out
}

fn bits(p: &PauliOperator) -> (Vec<bool>, Vec<bool>) {
    (0..p.num_qubits()).map(|q| p.get(q).bits()).unzip()
}

/// `(I + s P) / 2 |psi>` with `s = -1` when `minus`.
fn project(x: &[bool], z: &[bool], minus: bool, psi: &[Complex64]) -> Vec<Complex64> {
    let ppsi = apply_pauli(x, z, psi);
    let s = if minus { -1.0 } else { 1.0 };
    psi.iter().zip(&ppsi).map(|(a, b)| (a + b * s) * 0.5).collect()
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Measures `paulis` one after another on `|0...0>`, enumerating every
/// outcome history with nonzero probability.
pub fn dense_sequential_oracle(paulis: &[PauliOperator]) -> Result<Vec<OracleBranch>> {
    let n = paulis.first().map_or(0, PauliOperator::num_qubits);
    if n > MAX_ORACLE_QUBITS || paulis.len() > MAX_ORACLE_OPERATORS {
        return Err(Error::SizeGuard(format!(
            "dense oracle is limited to {MAX_ORACLE_QUBITS} qubits and {MAX_ORACLE_OPERATORS} operators"
        )));
    }
    if paulis.iter().any(|p| p.num_qubits() != n) {
        return Err(Error::Dimension("operators act on different numbers of qubits".into()));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); 1 << n];
    psi[0] = Complex64::new(1.0, 0.0);
    let mut branches = vec![OracleBranch { outcomes: Vec::new(), probability: 1.0, state: psi }];
    for p in paulis {
        let (x, z) = bits(p);
        let mut next = Vec::with_capacity(2 * branches.len());
        for b in branches {
            for minus in [false, true] {
                let v = project(&x, &z, minus, &b.state);
                let pr = norm_sqr(&v);
                if pr > 1e-12 {
                    let scale = 1.0 / pr.sqrt();
                    let mut outcomes = b.outcomes.clone();
                    outcomes.push(minus);
                    next.push(OracleBranch {
                        outcomes,
                        probability: b.probability * pr,
                        state: v.into_iter().map(|c| c * scale).collect(),
                    });
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EquivalenceReport {
    pub tv_distance: f64,
    pub min_fidelity: f64,
}

/// Compiles `paulis` with the cyclic layout, simulates the noiseless
/// circuit symbolically and compares the joint outcome distribution and the
/// conditional data states with [`dense_sequential_oracle`].
pub fn cyclic_oracle_equivalence(paulis: &[PauliOperator], module_size: usize, cells: usize) -> Result<EquivalenceReport> {
    let oracle = dense_sequential_oracle(paulis)?;
    let compiled = cyclic_layout(paulis, module_size, cells)?;
    let lowered = lower_to_circuit(&compiled.program, &NoiseModel::noiseless())?;
    let index = compiled.program.index_map();
    let data: Vec<usize> = compiled.data.iter().map(|a| index[a]).collect();

    let mut tab = Tableau::new(lowered.circuit.num_qubits);
    let record = tab.run(&lowered.circuit);
    let mut outcome_of = vec![None; paulis.len()];
    for (k, tag) in compiled.measurements.iter().enumerate() {
        if let Some(t) = tag {
            outcome_of[t.generator] = Some(record[k].clone());
        }
    }
    let outcome_of: Vec<_> = outcome_of
        .into_iter()
        .enumerate()
        .map(|(g, o)| o.ok_or_else(|| Error::Verification(format!("operator {g} is never measured"))))
        .collect::<Result<_>>()?;
    let v = tab.num_vars();
    if v > 20 {
        return Err(Error::SizeGuard(format!("{v} random outcomes are too many to enumerate")));
    }
    let stabs = tab.restricted_stabilizers(&data);
    if stabs.len() != data.len() {
        return Err(Error::Verification("data qubits remain entangled with ancillas".into()));
    }

    let by_outcome: HashMap<&[bool], &OracleBranch> = oracle.iter().map(|b| (b.outcomes.as_slice(), b)).collect();
    let weight = 1.0 / (1u64 << v) as f64;
    let mut dist: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut min_fidelity = 1.0f64;
    for a in 0..(1u64 << v) {
        let assignment: Vec<bool> = (0..v).map(|k| a >> k & 1 == 1).collect();
        let outcomes: Vec<bool> = outcome_of.iter().map(|o| o.eval(&assignment)).collect();
        let fidelity = match by_outcome.get(outcomes.as_slice()) {
            None => 0.0,
            Some(branch) => {
                let mut phi = branch.state.clone();
                for (x, z, sign) in &stabs {
                    phi = project(x, z, sign.eval(&assignment), &phi);
                }
                norm_sqr(&phi)
            }
        };
        min_fidelity = min_fidelity.min(fidelity);
        *dist.entry(outcomes).or_insert(0.0) += weight;
    }
    let mut tv = 0.0;
    for b in &oracle {
        tv += (b.probability - dist.remove(&b.outcomes).unwrap_or(0.0)).abs();
    }
    tv += dist.values().sum::<f64>();
    Ok(EquivalenceReport { tv_distance: tv / 2.0, min_fidelity })
}

/// Pauli list from a compact string form, one operator per string.
pub fn paulis_from_strs(ops: &[&str]) -> Result<Vec<PauliOperator>> {
    ops.iter().map(|s| s.parse()).collect()
}
