//! Interleaved X/Z syndrome extraction on a machine with two moving rows.
//!
//! Row 1 holds the X-ancilla modules and row 2 the Z-ancilla modules, each
//! with `ell` qubits; both rows shift independently. A row offset of `j`
//! aligns ancilla module `w` with data module `w + j`.

use std::collections::HashMap;

use crate::code::{BBCode, Basis};
use crate::error::{Error, Result};
use crate::machine::{ArrayConfig, Gate2, Instruction, MachineProgram, Parallelism, QubitAddr};

use super::mu::{MuAction, MuSchedule};
use super::CompiledLayout;

const X_ROW: usize = 1;
const Z_ROW: usize = 2;

#[derive(Clone, Copy, Default)]
struct Step {
    z: Option<(MuAction, usize)>,
    x: Option<(MuAction, usize)>,
}

/// Number of trailing X-only tuples of one round that can run alongside the
/// leading Z-only tuples of the next.
fn overlap(mu: &MuSchedule) -> usize {
    let t = &mu.tuples;
    let lead = t.iter().take_while(|s| s.x.is_none()).count();
    let trail = t.iter().rev().take_while(|s| s.z.is_none()).count();
    (0..=lead.min(trail).min(t.len() / 2))
        .rev()
        .find(|&o| {
            (0..o).all(|k| {
                let tail = t[t.len() - o + k].x.map(|a| a.u);
                let head = t[k].z.map(|a| a.u);
                tail != head
            })
        })
        .unwrap_or(0)
}

fn build_steps(mu: &MuSchedule, rounds: usize) -> Vec<Step> {
    let o = overlap(mu);
    let mut steps: Vec<Step> = Vec::new();
    for r in 0..rounds {
        let skip = if r == 0 { 0 } else { o };
        let base = steps.len() - skip;
        for (k, t) in mu.tuples.iter().take(skip).enumerate() {
            steps[base + k].z = t.z.map(|a| (a, r));
        }
        for t in &mu.tuples[skip..] {
            steps.push(Step { z: t.z.map(|a| (a, r)), x: t.x.map(|a| (a, r)) });
        }
    }
    steps
}

/// `rounds` rounds of Algorithm-4 style extraction following `mu`.
pub fn interleaved_layout(code: &BBCode, mu: &MuSchedule, rounds: usize) -> Result<CompiledLayout> {
    mu.validate(code)?;
    if rounds == 0 {
        return Err(Error::Layout("at least one round is required".into()));
    }
    let p = code.params;
    let (ell, m) = (p.ell, p.m);
    let config = ArrayConfig { moving_rows: 2, cells: m, module_size: 2 * ell, flat: false, parallelism: Parallelism::Full };
    let data = |u: usize, v: usize, w: usize| QubitAddr::new(0, w, u * ell + v);
    let anc = |row: usize, g: usize| {
        let (v, w) = p.coords(g);
        QubitAddr::new(row, w, v)
    };
    let data_addrs: Vec<QubitAddr> = (0..code.n)
        .map(|q| {
            let (v, w) = p.coords(q % p.size());
            data(q / p.size(), v, w)
        })
        .collect();
    let x_anc: Vec<QubitAddr> = (0..p.size()).map(|g| anc(X_ROW, g)).collect();
    let z_anc: Vec<QubitAddr> = (0..p.size()).map(|g| anc(Z_ROW, g)).collect();
    let mut qubits = data_addrs.clone();
    qubits.extend(&x_anc);
    qubits.extend(&z_anc);
    let mut program = MachineProgram::new(config, qubits);

    let steps = build_steps(mu, rounds);
    let last_of = |side: fn(&Step) -> Option<(MuAction, usize)>| {
        let mut last: HashMap<usize, usize> = HashMap::new();
        for (k, s) in steps.iter().enumerate() {
            if let Some((_, r)) = side(s) {
                last.insert(r, k);
            }
        }
        last
    };
    let z_last = last_of(|s| s.z);
    let x_last = last_of(|s| s.x);

    let mut ancillas = x_anc.clone();
    ancillas.extend(&z_anc);
    program.push_layer(vec![Instruction::Prep { basis: Basis::X, targets: ancillas }]);

    let mut offset = [0usize; 3];
    for (k, step) in steps.iter().enumerate() {
        let mut shift = Vec::new();
        for (row, action) in [(X_ROW, step.x), (Z_ROW, step.z)] {
            if let Some((a, _)) = action {
                let s = (a.mono.j as i64 - offset[row] as i64).rem_euclid(m as i64);
                if s != 0 || !mu.merge_alignments {
                    shift.push(Instruction::Shift { row, s });
                }
                offset[row] = a.mono.j;
            }
        }
        program.push_layer(shift);

        let mut gates = Vec::with_capacity(2 * p.size());
        for (kind, row, action) in [(Gate2::CZ, Z_ROW, step.z), (Gate2::CX, X_ROW, step.x)] {
            if let Some((a, _)) = action {
                for g in 0..p.size() {
                    let (v, w) = p.coords(g);
                    gates.push(Instruction::Gate2 {
                        kind,
                        control: anc(row, g),
                        target: data(a.u, (v + a.mono.i) % ell, (w + a.mono.j) % m),
                    });
                }
            }
        }
        program.push_layer(gates);

        let mut meas = Vec::new();
        if z_last.values().any(|&s| s == k) {
            meas.push(Instruction::Measure { basis: Basis::X, reset: true, targets: z_anc.clone() });
        }
        if x_last.values().any(|&s| s == k) {
            meas.push(Instruction::Measure { basis: Basis::X, reset: true, targets: x_anc.clone() });
        }
        program.push_layer(meas);
    }

    let mut ancilla_of = HashMap::new();
    for g in 0..p.size() {
        ancilla_of.insert(x_anc[g], g);
        ancilla_of.insert(z_anc[g], p.size() + g);
    }
    let measurements = CompiledLayout::tag_dedicated(&program, &ancilla_of);
    Ok(CompiledLayout {
        program,
        data: data_addrs,
        generators: code.stabilizer_code().generators().to_vec(),
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::super::mu::{mu_concurrent_rounds, mu_interleaved_gates};
    use super::*;
    use crate::catalog::builtin_code;
    use crate::machine::validate_program;

    #[test]
    fn overlaps() {
        let code = builtin_code("bb72").unwrap();
        assert_eq!(overlap(&mu_interleaved_gates(&code).unwrap()), 1);
        assert_eq!(overlap(&mu_concurrent_rounds(&code)), 3);
    }

    #[test]
    fn interleaved_gates_counts() {
        let code = builtin_code("bb72").unwrap();
        let mu = mu_interleaved_gates(&code).unwrap();
        for t in [1, 2, 5] {
            let c = interleaved_layout(&code, &mu, t).unwrap();
            let r = validate_program(&c.program).unwrap();
            assert_eq!(r.two_qubit_layers, 6 * t + 1);
            assert_eq!(r.shift_layers, 6 * t + 1);
            assert_eq!(r.meas_reset_layers, 2 * t);
            assert_eq!(c.measurements.len(), 72 * t);
        }
    }

    #[test]
    fn concurrent_rounds_shift_count() {
        let code = builtin_code("bb144").unwrap();
        let mu = mu_concurrent_rounds(&code);
        for t in [1, 4] {
            let r = validate_program(&interleaved_layout(&code, &mu, t).unwrap().program).unwrap();
            assert_eq!(r.shift_layers, 4 * t + 3);
            assert_eq!(r.meas_reset_layers, 2 * t);
        }
    }
}
