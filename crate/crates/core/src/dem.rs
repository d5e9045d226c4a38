//! Detector error models built by backward sensitivity propagation.
//!
//! Walking the circuit from the end, `sx[q]` (`sz[q]`) holds the set of
//! detectors and observables flipped by an X (Z) error on qubit `q` at the
//! current point. Every noise channel is split into independent Pauli
//! components whose signatures are read off these sets.

use std::collections::HashMap;

use serde::Serialize;

use crate::circuit::{NoisyCircuit, Op};
use crate::code::Basis;
use crate::error::{Error, Result};
use crate::machine::{Gate1, Gate2};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mechanism {
    pub probability: f64,
    pub detectors: Vec<u32>,
    pub observables: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DetectorErrorModel {
    pub num_detectors: usize,
    pub num_observables: usize,
    pub mechanisms: Vec<Mechanism>,
}

/// XOR of two independent events.
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

/// Probability of each of the three independent X, Y, Z components that
/// compose to uniform single-qubit depolarizing at rate `p`.
pub fn depolarize1_component(p: f64) -> f64 {
    let p = p.min(0.75);
    (1.0 - (1.0 - 4.0 * p / 3.0).sqrt()) / 2.0
}

/// Same for the 15 components of two-qubit depolarizing at rate `p`.
pub fn depolarize2_component(p: f64) -> f64 {
    let p = p.min(15.0 / 16.0);
    (1.0 - (1.0 - 16.0 * p / 15.0).powf(0.125)) / 2.0
}

struct Sensitivity {
    words: usize,
    sx: Vec<u64>,
    sz: Vec<u64>,
}

impl Sensitivity {
    fn new(qubits: usize, bits: usize) -> Self {
        let words = bits.div_ceil(64).max(1);
        Self { words, sx: vec![0; qubits * words], sz: vec![0; qubits * words] }
    }

    fn range(&self, q: u32) -> std::ops::Range<usize> {
        let s = q as usize * self.words;
        s..s + self.words
    }

    /// `dst[a] ^= src[b]` where the two sides may alias.
    fn xor(&mut self, dst_x: bool, a: u32, src_x: bool, b: u32) {
        let (ra, rb) = (self.range(a), self.range(b));
        if dst_x == src_x && a == b {
            let v = if dst_x { &mut self.sx } else { &mut self.sz };
            v[ra].fill(0);
            return;
        }
        for k in 0..self.words {
            let s = if src_x { self.sx[rb.start + k] } else { self.sz[rb.start + k] };
            let d = if dst_x { &mut self.sx } else { &mut self.sz };
            d[ra.start + k] ^= s;
        }
    }

    fn clear(&mut self, q: u32) {
        let r = self.range(q);
        self.sx[r.clone()].fill(0);
        self.sz[r].fill(0);
    }

    fn xor_words(v: &mut [u64], r: std::ops::Range<usize>, w: &[u64]) {
        for (d, s) in v[r].iter_mut().zip(w) {
            *d ^= s;
        }
    }

    /// Signature of Pauli `(x, z)` on `q`, accumulated into `out`.
    fn accumulate(&self, q: u32, x: bool, z: bool, out: &mut [u64]) {
        let r = self.range(q);
        if x {
            out.iter_mut().zip(&self.sx[r.clone()]).for_each(|(o, s)| *o ^= s);
        }
        if z {
            out.iter_mut().zip(&self.sz[r]).for_each(|(o, s)| *o ^= s);
        }
    }
}

/// Collects mechanisms, merging equal signatures in first-seen order.
struct Collector {
    index: HashMap<Vec<u64>, usize>,
    items: Vec<(Vec<u64>, f64)>,
}

impl Collector {
    fn add(&mut self, sig: &[u64], p: f64) {
        if p <= 0.0 || sig.iter().all(|&w| w == 0) {
            return;
        }
        match self.index.get(sig) {
            Some(&k) => self.items[k].1 = merge_probability(self.items[k].1, p),
            None => {
                self.index.insert(sig.to_vec(), self.items.len());
                self.items.push((sig.to_vec(), p));
            }
        }
    }
}

const PAULI_BITS: [(bool, bool); 4] = [(false, false), (true, false), (true, true), (false, true)];

/// Builds the error model without first checking that the noiseless circuit
/// is deterministic.
pub fn detector_error_model_unchecked(circuit: &NoisyCircuit) -> DetectorErrorModel {
    let nd = circuit.detectors.len();
    let no = circuit.observables.len();
    let bits = nd + no;
    let m = circuit.num_measurements();
    let mut sens = Sensitivity::new(circuit.num_qubits, bits);
    let w = sens.words;

    let mut rec_sig = vec![0u64; m * w];
    for (k, set) in circuit.detectors.iter().chain(&circuit.observables).enumerate() {
        for &r in set {
            rec_sig[r * w + k / 64] ^= 1 << (k % 64);
        }
    }

    let mut col = Collector { index: HashMap::new(), items: Vec::new() };
    let mut sig = vec![0u64; w];
    let mut next_rec = m;
    for op in circuit.ops.iter().rev() {
        match op {
            Op::Tick => {}
            Op::Reset { targets, .. } => targets.iter().for_each(|&q| sens.clear(q)),
            Op::Measure { basis, reset, flip, targets } => {
                for &q in targets.iter().rev() {
                    next_rec -= 1;
                    let rs = &rec_sig[next_rec * w..(next_rec + 1) * w];
                    if *reset {
                        sens.clear(q);
                    }
                    let r = sens.range(q);
                    match basis {
                        Basis::Z => {
                            sens.sz[r.clone()].fill(0);
                            Sensitivity::xor_words(&mut sens.sx, r, rs);
                        }
                        Basis::X => {
                            sens.sx[r.clone()].fill(0);
                            Sensitivity::xor_words(&mut sens.sz, r, rs);
                        }
                    }
                    col.add(rs, *flip);
                }
            }
            Op::Gate1 { kind, targets } => {
                for &q in targets {
                    match kind {
                        Gate1::H => {
                            let r = sens.range(q);
                            for k in r {
                                std::mem::swap(&mut sens.sx[k], &mut sens.sz[k]);
                            }
                        }
                        Gate1::S | Gate1::SDag => sens.xor(true, q, false, q),
                        Gate1::X | Gate1::Y | Gate1::Z => {}
                    }
                }
            }
            Op::Gate2 { kind, pairs } => {
                for &(c, t) in pairs.iter().rev() {
                    match kind {
                        Gate2::CX => {
                            sens.xor(true, c, true, t);
                            sens.xor(false, t, false, c);
                        }
                        Gate2::CZ => {
                            sens.xor(true, c, false, t);
                            sens.xor(true, t, false, c);
                        }
                        Gate2::CY => {
                            sens.xor(true, c, true, t);
                            sens.xor(true, c, false, t);
                            sens.xor(true, t, false, c);
                            sens.xor(false, t, false, c);
                        }
                    }
                }
            }
            Op::XError { p, targets } | Op::ZError { p, targets } => {
                let x = matches!(op, Op::XError { .. });
                for &q in targets {
                    sig.fill(0);
                    sens.accumulate(q, x, !x, &mut sig);
                    col.add(&sig, *p);
                }
            }
            Op::Depolarize1 { p, targets } => {
                let q1 = depolarize1_component(*p);
                for &q in targets {
                    for &(x, z) in &PAULI_BITS[1..] {
                        sig.fill(0);
                        sens.accumulate(q, x, z, &mut sig);
                        col.add(&sig, q1);
                    }
                }
            }
            Op::Depolarize2 { p, pairs } => {
                let q2 = depolarize2_component(*p);
                for &(a, b) in pairs {
                    for k in 1..16 {
                        let (xa, za) = PAULI_BITS[k / 4];
                        let (xb, zb) = PAULI_BITS[k % 4];
                        sig.fill(0);
                        sens.accumulate(a, xa, za, &mut sig);
                        sens.accumulate(b, xb, zb, &mut sig);
                        col.add(&sig, q2);
                    }
                }
            }
        }
    }

    let mechanisms = col
        .items
        .into_iter()
        .map(|(s, p)| {
            let ones = (0..bits).filter(|&k| s[k / 64] >> (k % 64) & 1 == 1);
            let (mut detectors, mut observables) = (Vec::new(), Vec::new());
            for k in ones {
                if k < nd {
                    detectors.push(k as u32);
                } else {
                    observables.push((k - nd) as u32);
                }
            }
            Mechanism { probability: p, detectors, observables }
        })
        .collect();
    DetectorErrorModel { num_detectors: nd, num_observables: no, mechanisms }
}

/// Error model of `circuit`, refusing circuits whose noiseless detectors or
/// observables are not deterministic.
pub fn detector_error_model(circuit: &NoisyCircuit) -> Result<DetectorErrorModel> {
    let report = crate::sim::check_determinism(circuit)?;
    if !report.is_deterministic() {
        return Err(Error::Verification(report.describe()));
    }
    Ok(detector_error_model_unchecked(circuit))
}

impl DetectorErrorModel {
    /// Detector-by-mechanism incidence, one sparse column per mechanism.
    pub fn detector_columns(&self) -> Vec<&[u32]> {
        self.mechanisms.iter().map(|m| m.detectors.as_slice()).collect()
    }

    pub fn max_detectors_per_mechanism(&self) -> usize {
        self.mechanisms.iter().map(|m| m.detectors.len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_code;
    use crate::circuit::{build_memory_experiment, parse_circuit, NoiseModel};
    use crate::layout::LayoutKind;
    use crate::machine::Parallelism;

    #[test]
    fn merge_rule() {
        assert!((merge_probability(0.1, 0.2) - 0.26).abs() < 1e-15);
    }

    #[test]
    fn components_recompose() {
        // Three independent components at q flip a Z measurement (X or Y) with
        // probability 2q(1-q), which must equal 2p/3.
        for p in [1e-4, 0.01, 0.3] {
            let q = depolarize1_component(p);
            assert!((2.0 * q * (1.0 - q) - 2.0 * p / 3.0).abs() < 1e-12);
        }
        // Any one qubit's X part is hit by 8 of 15 components: odd parity of
        // 8 independent events at q equals 8p/15.
        for p in [1e-3, 0.1] {
            let q = depolarize2_component(p);
            let odd = (1.0 - (1.0 - 2.0 * q).powi(8)) / 2.0;
            assert!((odd - 8.0 * p / 15.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_noise_gives_empty_model() {
        let c = parse_circuit("R 0\nM 0\nDETECTOR rec[-1]").unwrap();
        assert!(detector_error_model(&c).unwrap().mechanisms.is_empty());
    }

    #[test]
    fn hand_built_circuit() {
        // X error on qubit 0 before CX(0,1) flips both measurements.
        let c = parse_circuit(
            "R 0 1\nX_ERROR(0.1) 0\nCX 0 1\nZ_ERROR(0.2) 1\nM(0.05) 0 1\nDETECTOR rec[-2]\nDETECTOR rec[-1]\nOBSERVABLE_INCLUDE(0) rec[-1]",
        )
        .unwrap();
        let dem = detector_error_model(&c).unwrap();
        let find = |d: &[u32]| dem.mechanisms.iter().find(|m| m.detectors == d).map(|m| (m.probability, m.observables.clone()));
        assert_eq!(find(&[0, 1]), Some((0.1, vec![0])));
        assert_eq!(find(&[0]), Some((0.05, vec![])));
        assert_eq!(find(&[1]), Some((0.05, vec![0])));
        assert_eq!(dem.mechanisms.len(), 3);
    }

    #[test]
    fn nondeterministic_circuit_rejected() {
        let c = parse_circuit("RX 0\nDEPOLARIZE1(0.1) 0\nM 0\nDETECTOR rec[-1]").unwrap();
        assert!(detector_error_model(&c).is_err());
    }

    #[test]
    fn bb72_sparse_mechanisms_are_local() {
        let code = builtin_code("bb72").unwrap();
        let m = build_memory_experiment(&code, LayoutKind::Sparse, Basis::Z, 3, &NoiseModel::long_chain(1e-3), Parallelism::Full)
            .unwrap();
        let dem = detector_error_model(m.circuit()).unwrap();
        assert!(!dem.mechanisms.is_empty());
        // A fault on an ancilla spreads to at most three data qubits modulo
        // the generator being measured; each sits in three opposite checks.
        assert!(dem.max_detectors_per_mechanism() <= 9, "{}", dem.max_detectors_per_mechanism());
        assert!(dem.mechanisms.iter().all(|m| m.probability > 0.0 && m.probability < 1.0));
    }
}
