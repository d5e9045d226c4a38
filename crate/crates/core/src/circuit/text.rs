//! Stim-compatible text form of a [`NoisyCircuit`].
//!
//! ```text
//! QUBIT_COUNT <n>
//! <OP>[(<p>)] <targets>
//! DETECTOR rec[-k] ...
//! OBSERVABLE_INCLUDE(<i>) rec[-k] ...
//! ```
//!
//! `OP` is one of `R RX H S S_DAG X Y Z CX CY CZ M MX MR MRX DEPOLARIZE1
//! DEPOLARIZE2 X_ERROR Z_ERROR TICK`. Two-qubit ops list their pairs flat.
//! `rec[-k]` is the `k`-th most recent measurement at the point the line
//! appears; the writer emits detectors and observables after all ops, so
//! `rec[-k]` is absolute record `M - k`. Probabilities are printed with the
//! shortest representation that round-trips.

use std::fmt::Write as _;

use super::{NoisyCircuit, Op};
use crate::code::Basis;
use crate::error::{Error, Result};
use crate::machine::{Gate1, Gate2};

fn join(targets: &[u32]) -> String {
    targets.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn join_pairs(pairs: &[(u32, u32)]) -> String {
    pairs.iter().map(|(a, b)| format!("{a} {b}")).collect::<Vec<_>>().join(" ")
}

pub fn write_circuit(c: &NoisyCircuit) -> String {
    let mut out = String::new();
    writeln!(out, "QUBIT_COUNT {}", c.num_qubits).unwrap();
    for op in &c.ops {
        let line = match op {
            Op::Reset { basis: Basis::Z, targets } => format!("R {}", join(targets)),
            Op::Reset { basis: Basis::X, targets } => format!("RX {}", join(targets)),
            Op::Gate1 { kind, targets } => format!("{} {}", kind.name(), join(targets)),
            Op::Gate2 { kind, pairs } => format!("{} {}", kind.name(), join_pairs(pairs)),
            Op::Measure { basis, reset, flip, targets } => {
                let name = match (basis, reset) {
                    (Basis::Z, false) => "M",
                    (Basis::X, false) => "MX",
                    (Basis::Z, true) => "MR",
                    (Basis::X, true) => "MRX",
                };
                if *flip > 0.0 {
                    format!("{name}({flip}) {}", join(targets))
                } else {
                    format!("{name} {}", join(targets))
                }
            }
            Op::Depolarize1 { p, targets } => format!("DEPOLARIZE1({p}) {}", join(targets)),
            Op::Depolarize2 { p, pairs } => format!("DEPOLARIZE2({p}) {}", join_pairs(pairs)),
            Op::XError { p, targets } => format!("X_ERROR({p}) {}", join(targets)),
            Op::ZError { p, targets } => format!("Z_ERROR({p}) {}", join(targets)),
            Op::Tick => "TICK".to_string(),
        };
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let m = c.num_measurements();
    let recs = |set: &[usize]| set.iter().map(|&r| format!(" rec[-{}]", m - r)).collect::<String>();
    for d in &c.detectors {
        writeln!(out, "DETECTOR{}", recs(d)).unwrap();
    }
    for (i, o) in c.observables.iter().enumerate() {
        writeln!(out, "OBSERVABLE_INCLUDE({i}){}", recs(o)).unwrap();
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Splits `NAME(arg)` into name and argument.
fn split_arg(line: usize, head: &str) -> Result<(&str, Option<&str>)> {
    match head.split_once('(') {
        None => Ok((head, None)),
        Some((name, rest)) => {
            let arg = rest.strip_suffix(')').ok_or_else(|| perr(line, format!("unclosed argument in `{head}`")))?;
            Ok((name, Some(arg)))
        }
    }
}

pub fn parse_circuit(text: &str) -> Result<NoisyCircuit> {
    let mut circuit = NoisyCircuit::default();
    let mut measured = 0usize;
    let mut saw_count = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let l = raw.split('#').next().unwrap().trim();
        if l.is_empty() {
            continue;
        }
        let mut tok = l.split_whitespace();
        let (name, arg) = split_arg(ln, tok.next().unwrap())?;
        let rest: Vec<&str> = tok.collect();
        let prob = || -> Result<f64> {
            let p: f64 = arg.and_then(|a| a.parse().ok()).ok_or_else(|| perr(ln, format!("`{name}` needs a probability")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(perr(ln, format!("probability {p} outside [0, 1]")));
            }
            Ok(p)
        };
        let qubits = || -> Result<Vec<u32>> {
            rest.iter().map(|t| t.parse::<u32>().map_err(|_| perr(ln, format!("bad qubit `{t}`")))).collect()
        };
        let pairs = || -> Result<Vec<(u32, u32)>> {
            let q = qubits()?;
            if q.len() % 2 != 0 {
                return Err(perr(ln, "two-qubit op needs an even number of targets"));
            }
            Ok(q.chunks(2).map(|c| (c[0], c[1])).collect())
        };
        let recs = |m: usize| -> Result<Vec<usize>> {
            rest.iter()
                .map(|t| {
                    let k: usize = t
                        .strip_prefix("rec[-")
                        .and_then(|s| s.strip_suffix(']'))
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr(ln, format!("bad record reference `{t}`")))?;
                    if k == 0 || k > m {
                        return Err(perr(ln, format!("`{t}` is out of range")));
                    }
                    Ok(m - k)
                })
                .collect()
        };
        let gate1 = |kind| -> Result<Op> { Ok(Op::Gate1 { kind, targets: qubits()? }) };
        let gate2 = |kind| -> Result<Op> { Ok(Op::Gate2 { kind, pairs: pairs()? }) };
        let measure = |basis, reset| -> Result<Op> {
            let flip = if arg.is_some() { prob()? } else { 0.0 };
            Ok(Op::Measure { basis, reset, flip, targets: qubits()? })
        };
        let op = match name {
            "QUBIT_COUNT" => {
                circuit.num_qubits = rest.first().and_then(|t| t.parse().ok()).ok_or_else(|| perr(ln, "bad QUBIT_COUNT"))?;
                saw_count = true;
                continue;
            }
            "DETECTOR" => {
                circuit.detectors.push(recs(measured)?);
                continue;
            }
            "OBSERVABLE_INCLUDE" => {
                let k: usize = arg.and_then(|a| a.parse().ok()).ok_or_else(|| perr(ln, "bad observable index"))?;
                if circuit.observables.len() <= k {
                    circuit.observables.resize_with(k + 1, Vec::new);
                }
                let r = recs(measured)?;
                circuit.observables[k].extend(r);
                continue;
            }
            "R" => Op::Reset { basis: Basis::Z, targets: qubits()? },
            "RX" => Op::Reset { basis: Basis::X, targets: qubits()? },
            "H" => gate1(Gate1::H)?,
            "S" => gate1(Gate1::S)?,
            "S_DAG" => gate1(Gate1::SDag)?,
            "X" => gate1(Gate1::X)?,
            "Y" => gate1(Gate1::Y)?,
            "Z" => gate1(Gate1::Z)?,
            "CX" => gate2(Gate2::CX)?,
            "CY" => gate2(Gate2::CY)?,
            "CZ" => gate2(Gate2::CZ)?,
            "M" => measure(Basis::Z, false)?,
            "MX" => measure(Basis::X, false)?,
            "MR" => measure(Basis::Z, true)?,
            "MRX" => measure(Basis::X, true)?,
            "DEPOLARIZE1" => Op::Depolarize1 { p: prob()?, targets: qubits()? },
            "DEPOLARIZE2" => Op::Depolarize2 { p: prob()?, pairs: pairs()? },
            "X_ERROR" => Op::XError { p: prob()?, targets: qubits()? },
            "Z_ERROR" => Op::ZError { p: prob()?, targets: qubits()? },
            "TICK" => Op::Tick,
            other => return Err(perr(ln, format!("unknown operation `{other}`"))),
        };
        measured += op.measurement_count();
        circuit.ops.push(op);
    }
    if !saw_count {
        let max = circuit
            .ops
            .iter()
            .flat_map(|o| match o {
                Op::Gate2 { pairs, .. } | Op::Depolarize2 { pairs, .. } => pairs.iter().flat_map(|&(a, b)| [a, b]).collect(),
                Op::Reset { targets, .. }
                | Op::Gate1 { targets, .. }
                | Op::Measure { targets, .. }
                | Op::Depolarize1 { targets, .. }
                | Op::XError { targets, .. }
                | Op::ZError { targets, .. } => targets.clone(),
                Op::Tick => Vec::new(),
            })
            .max();
        circuit.num_qubits = max.map_or(0, |m| m as usize + 1);
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::super::{build_memory_experiment, NoiseModel};
    use super::*;
    use crate::catalog::builtin_code;
    use crate::layout::LayoutKind;
    use crate::machine::Parallelism;

    #[test]
    fn memory_circuit_round_trips() {
        let code = builtin_code("bb72").unwrap();
        for kind in [LayoutKind::Sparse, LayoutKind::InterleavedGates] {
            let m = build_memory_experiment(&code, kind, Basis::Z, 2, &NoiseModel::long_chain(1.234e-3), Parallelism::Full)
                .unwrap();
            let text = write_circuit(m.circuit());
            let back = parse_circuit(&text).unwrap();
            assert_eq!(&back, m.circuit());
            assert_eq!(write_circuit(&back), text);
        }
    }

    #[test]
    fn relative_records_resolve_mid_circuit() {
        let c = parse_circuit("M 0 1\nDETECTOR rec[-1]\nM(0.5) 2\nDETECTOR rec[-1] rec[-3]\nOBSERVABLE_INCLUDE(1) rec[-2]").unwrap();
        assert_eq!(c.detectors, vec![vec![1], vec![2, 0]]);
        assert_eq!(c.observables, vec![vec![], vec![1]]);
        assert_eq!(c.num_qubits, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_circuit("QUBIT_COUNT 2\nH 0\nFOO 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_circuit("M 0\nDETECTOR rec[-2]").is_err());
        assert!(parse_circuit("DEPOLARIZE1(1.5) 0").is_err());
    }
}
