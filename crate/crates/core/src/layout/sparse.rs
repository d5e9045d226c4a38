//! Sparse cyclic and flat cyclic layouts for BB codes.
//!
//! Data module `w` sits in fixed cell `w`; ancilla module `w` starts in
//! moving cell `w`. A row offset of `j` aligns ancilla module `w` with data
//! module `w + j`.

use std::collections::{BTreeSet, HashMap};

use crate::code::{BBCode, Basis};
use crate::error::Result;
use crate::machine::{ArrayConfig, Gate2, Instruction, MachineProgram, Parallelism, QubitAddr};
use crate::poly::{BivariatePolynomial, Monomial};

use super::CompiledLayout;

struct Builder<'a> {
    /// The code in the coordinates used for placement (axes possibly swapped).
    work: BBCode,
    original: &'a BBCode,
    swapped: bool,
    flat: bool,
    program: MachineProgram,
    offset: usize,
    intra: usize,
}

impl<'a> Builder<'a> {
    fn new(code: &'a BBCode, swapped: bool, flat: bool) -> Result<Self> {
        let work = if swapped { code.swap_axes()? } else { code.clone() };
        let (ell, m) = (work.params.ell, work.params.m);
        let config = ArrayConfig { moving_rows: 1, cells: m, module_size: 2 * ell, flat, parallelism: Parallelism::Full };
        let mut b = Self { work, original: code, swapped, flat, program: MachineProgram::new(config, Vec::new()), offset: 0, intra: 0 };
        let mut qubits: Vec<QubitAddr> = (0..code.n).map(|q| b.data_of_original(q)).collect();
        for basis in [Basis::X, Basis::Z] {
            for g in 0..code.params.size() {
                qubits.push(b.ancilla_of_original(basis, g));
            }
        }
        b.program.qubits = qubits;
        Ok(b)
    }

    fn ell(&self) -> usize {
        self.work.params.ell
    }

    fn data(&self, u: usize, v: usize, w: usize) -> QubitAddr {
        let slot = if self.flat { 2 * v + u } else { u * self.ell() + v };
        QubitAddr::new(0, w, slot)
    }

    fn ancilla(&self, basis: Basis, v: usize, w: usize) -> QubitAddr {
        let parity = usize::from(basis == Basis::Z);
        let slot = if self.flat { 2 * v + parity } else { parity * self.ell() + v };
        QubitAddr::new(1, w, slot)
    }

    /// Work coordinates `(v, w)` of original group element `g`.
    fn work_coords(&self, g: usize) -> (usize, usize) {
        let (v, w) = self.original.params.coords(g);
        if self.swapped {
            (w, v)
        } else {
            (v, w)
        }
    }

    fn data_of_original(&self, q: usize) -> QubitAddr {
        let lm = self.original.params.size();
        let (v, w) = self.work_coords(q % lm);
        self.data(q / lm, v, w)
    }

    fn ancilla_of_original(&self, basis: Basis, g: usize) -> QubitAddr {
        let (v, w) = self.work_coords(g);
        self.ancilla(basis, v, w)
    }

    /// Check polynomials of one basis with their data block and gate.
    fn parts(&self, basis: Basis) -> [(BivariatePolynomial, usize); 2] {
        match basis {
            Basis::X => [(self.work.a.clone(), 0), (self.work.b.clone(), 1)],
            Basis::Z => [(self.work.b.transpose(), 0), (self.work.a.transpose(), 1)],
        }
    }

    fn shift_to(&mut self, j: usize) {
        let m = self.work.params.m as i64;
        let s = (j as i64 - self.offset as i64).rem_euclid(m);
        self.offset = j;
        self.program.push_layer(vec![Instruction::Shift { row: 1, s }]);
    }

    fn intra_to(&mut self, r: usize) {
        let n = 2 * self.ell() as i64;
        let s = (r as i64 - self.intra as i64).rem_euclid(n);
        self.intra = r;
        let layer = (0..self.work.params.m).map(|w| Instruction::IntraShift { row: 1, module: w, s }).collect();
        self.program.push_layer(layer);
    }

    fn gate_layer(&mut self, basis: Basis, u: usize, mono: Monomial) {
        let kind = match basis {
            Basis::X => Gate2::CX,
            Basis::Z => Gate2::CZ,
        };
        let p = self.work.params;
        let mut layer = Vec::with_capacity(p.size());
        for v in 0..p.ell {
            for w in 0..p.m {
                layer.push(Instruction::Gate2 {
                    kind,
                    control: self.ancilla(basis, v, w),
                    target: self.data(u, (v + mono.i) % p.ell, (w + mono.j) % p.m),
                });
            }
        }
        self.program.push_layer(layer);
    }

    fn ancillas(&self, basis: Basis) -> Vec<QubitAddr> {
        (0..self.original.params.size()).map(|g| self.ancilla_of_original(basis, g)).collect()
    }

    fn sparse_pass(&mut self, basis: Basis) {
        self.program.push_layer(vec![Instruction::Prep { basis: Basis::X, targets: self.ancillas(basis) }]);
        let parts = self.parts(basis);
        let js: BTreeSet<usize> = parts.iter().flat_map(|(p, _)| p.terms().iter().map(|t| t.j)).collect();
        for j in js {
            self.shift_to(j);
            for (poly, u) in &parts {
                let mut monos: Vec<Monomial> = poly.terms().iter().copied().filter(|t| t.j == j).collect();
                monos.sort_by_key(|t| t.i);
                for mono in monos {
                    self.gate_layer(basis, *u, mono);
                }
            }
        }
        self.program.push_layer(vec![Instruction::Measure { basis: Basis::X, reset: false, targets: self.ancillas(basis) }]);
    }

    fn flat_pass(&mut self, basis: Basis) {
        self.program.push_layer(vec![Instruction::Prep { basis: Basis::X, targets: self.ancillas(basis) }]);
        let parity = usize::from(basis == Basis::Z);
        let two_ell = 2 * self.ell();
        for (poly, u) in self.parts(basis) {
            let mut monos: Vec<Monomial> = poly.terms().to_vec();
            monos.sort_by_key(|t| (t.j, t.i));
            for mono in monos {
                self.shift_to(mono.j);
                self.intra_to((2 * mono.i + u + two_ell - parity) % two_ell);
                self.gate_layer(basis, u, mono);
            }
        }
        self.program.push_layer(vec![Instruction::Measure { basis: Basis::X, reset: false, targets: self.ancillas(basis) }]);
    }

    fn finish(self) -> CompiledLayout {
        let lm = self.original.params.size();
        let mut ancilla_of = HashMap::new();
        for (bi, basis) in [Basis::X, Basis::Z].into_iter().enumerate() {
            for g in 0..lm {
                ancilla_of.insert(self.ancilla_of_original(basis, g), bi * lm + g);
            }
        }
        let measurements = CompiledLayout::tag_dedicated(&self.program, &ancilla_of);
        let data = (0..self.original.n).map(|q| self.data_of_original(q)).collect();
        CompiledLayout {
            program: self.program,
            data,
            generators: self.original.stabilizer_code().generators().to_vec(),
            measurements,
        }
    }
}

/// One pass of the sparse cyclic layout measuring the generators of `basis`.
pub fn sparse_cyclic_layout(code: &BBCode, basis: Basis, swap_axes: bool) -> Result<CompiledLayout> {
    let mut b = Builder::new(code, swap_axes, false)?;
    b.sparse_pass(basis);
    Ok(b.finish())
}

/// One pass of the flat cyclic layout measuring the generators of `basis`.
pub fn flat_cyclic_layout(code: &BBCode, basis: Basis) -> Result<CompiledLayout> {
    let mut b = Builder::new(code, false, true)?;
    b.flat_pass(basis);
    Ok(b.finish())
}

/// `rounds` rounds, each an X pass followed by a Z pass.
pub(crate) fn sparse_rounds(code: &BBCode, swap_axes: bool, rounds: usize) -> Result<CompiledLayout> {
    let mut b = Builder::new(code, swap_axes, false)?;
    for _ in 0..rounds {
        b.sparse_pass(Basis::X);
        b.sparse_pass(Basis::Z);
    }
    Ok(b.finish())
}

pub(crate) fn flat_rounds(code: &BBCode, rounds: usize) -> Result<CompiledLayout> {
    let mut b = Builder::new(code, false, true)?;
    for _ in 0..rounds {
        b.flat_pass(Basis::X);
        b.flat_pass(Basis::Z);
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_code;
    use crate::machine::validate_program;

    #[test]
    fn bb144_sparse_depth_twelve() {
        let code = builtin_code("bb144").unwrap();
        for basis in [Basis::X, Basis::Z] {
            let c = sparse_cyclic_layout(&code, basis, false).unwrap();
            let r = validate_program(&c.program).unwrap();
            assert_eq!((r.total_depth, r.shift_layers, r.two_qubit_layers), (12, 4, 6));
            assert_eq!(r.total_cx, 432);
        }
    }

    #[test]
    fn swapped_axes_validate() {
        let code = builtin_code("bb90").unwrap();
        let c = sparse_cyclic_layout(&code, Basis::X, true).unwrap();
        let r = validate_program(&c.program).unwrap();
        let (i_a, _) = code.a.exponent_sets();
        let (i_b, _) = code.b.exponent_sets();
        assert_eq!(r.total_depth, i_a.union(&i_b).count() + code.omega + 2);
    }

    #[test]
    fn flat_bb72_bounds() {
        let code = builtin_code("bb72").unwrap();
        let c = flat_cyclic_layout(&code, Basis::X).unwrap();
        assert_eq!(c.program.config.module_size, 12);
        let r = validate_program(&c.program).unwrap();
        assert_eq!(r.total_depth, 3 * 6 + 2);
        assert!(r.moving_shift_layers <= 5);
        assert_eq!(r.intra_shift_layers, 6);
    }

    #[test]
    fn dedicated_tags_count_rounds() {
        let code = builtin_code("bb72").unwrap();
        let c = sparse_rounds(&code, false, 3).unwrap();
        assert_eq!(c.measurements.len(), 3 * 72);
        assert!(c.measurements.iter().all(|t| t.is_some()));
        assert_eq!(c.measurements.last().unwrap().unwrap().round, 2);
    }
}
