//! CHP stabilizer tableau with symbolic measurement outcomes.
//!
//! Each random measurement introduces a fresh variable; every sign and every
//! recorded outcome is an affine function (constant bit plus a set of
//! variables) of these variables. An outcome is deterministic iff its
//! variable set is empty.

use crate::circuit::{NoisyCircuit, Op};
use crate::code::Basis;
use crate::machine::{Gate1, Gate2};

/// `constant ⊕ (⊕ of the variables in vars)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Affine {
    pub constant: bool,
    pub vars: Vec<u64>,
}

impl Affine {
    pub fn constant(c: bool) -> Self {
        Self { constant: c, vars: Vec::new() }
    }

    pub fn var(k: usize) -> Self {
        let mut vars = vec![0; k / 64 + 1];
        vars[k / 64] = 1 << (k % 64);
        Self { constant: false, vars }
    }

    pub fn xor_assign(&mut self, other: &Affine) {
        self.constant ^= other.constant;
        if self.vars.len() < other.vars.len() {
            self.vars.resize(other.vars.len(), 0);
        }
        for (a, b) in self.vars.iter_mut().zip(&other.vars) {
            *a ^= b;
        }
        while self.vars.last() == Some(&0) {
            self.vars.pop();
        }
    }

    pub fn is_constant(&self) -> bool {
        self.vars.iter().all(|&w| w == 0)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        let mut v = self.constant;
        for (k, &a) in assignment.iter().enumerate() {
            if a && self.vars.get(k / 64).is_some_and(|w| w >> (k % 64) & 1 == 1) {
                v = !v;
            }
        }
        v
    }
}

/// Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Destabilizer
/// signs are not tracked.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    w: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    sign: Vec<Affine>,
    num_vars: usize,
}

/// Exponent of `i` (mod 4) in the product of the Paulis `(x1, z1)` and
/// `(x2, z2)` over the given words.
fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u32 {
    let (mut plus, mut minus) = (0u32, 0u32);
    for k in 0..x1.len() {
        let (a, b, c, d) = (x1[k], z1[k], x2[k], z2[k]);
        plus += ((a & b & !c & d) | (a & !b & c & d) | (!a & b & c & !d)).count_ones();
        minus += ((a & b & c & !d) | (a & !b & !c & d) | (!a & b & c & d)).count_ones();
    }
    plus.wrapping_sub(minus) & 3
}

impl Tableau {
    /// The all-zero state on `n` qubits.
    pub fn new(n: usize) -> Self {
        let w = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Self { n, w, x: vec![0; rows * w], z: vec![0; rows * w], sign: vec![Affine::default(); rows], num_vars: 0 };
        for q in 0..n {
            t.x[q * w + q / 64] |= 1 << (q % 64);
            t.z[(n + q) * w + q / 64] |= 1 << (q % 64);
        }
        t
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    fn bit(v: &[u64], w: usize, row: usize, q: usize) -> bool {
        v[row * w + q / 64] >> (q % 64) & 1 == 1
    }

    fn xbit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.x, self.w, row, q)
    }

    fn zbit(&self, row: usize, q: usize) -> bool {
        Self::bit(&self.z, self.w, row, q)
    }

    fn for_rows(&mut self, mut f: impl FnMut(&mut [u64], &mut [u64], &mut bool)) {
        let w = self.w;
        for r in 0..2 * self.n {
            let (xs, zs) = (&mut self.x[r * w..(r + 1) * w], &mut self.z[r * w..(r + 1) * w]);
            f(xs, zs, &mut self.sign[r].constant);
        }
    }

    pub fn h(&mut self, q: usize) {
        let (k, b) = (q / 64, 1u64 << (q % 64));
        self.for_rows(|x, z, s| {
            let (xb, zb) = (x[k] & b != 0, z[k] & b != 0);
            *s ^= xb && zb;
            if xb != zb {
                x[k] ^= b;
                z[k] ^= b;
            }
        });
    }

    pub fn s(&mut self, q: usize) {
        let (k, b) = (q / 64, 1u64 << (q % 64));
        self.for_rows(|x, z, s| {
            let (xb, zb) = (x[k] & b != 0, z[k] & b != 0);
            *s ^= xb && zb;
            if xb {
                z[k] ^= b;
            }
        });
    }

    pub fn s_dag(&mut self, q: usize) {
        let (k, b) = (q / 64, 1u64 << (q % 64));
        self.for_rows(|x, z, s| {
            let (xb, zb) = (x[k] & b != 0, z[k] & b != 0);
            *s ^= xb && !zb;
            if xb {
                z[k] ^= b;
            }
        });
    }

    /// Pauli gate with components `(px, pz)`: flips the signs of rows that
    /// anticommute with it.
    pub fn pauli(&mut self, q: usize, px: bool, pz: bool) {
        let (k, b) = (q / 64, 1u64 << (q % 64));
        self.for_rows(|x, z, s| {
            let (xb, zb) = (x[k] & b != 0, z[k] & b != 0);
            *s ^= (px && zb) ^ (pz && xb);
        });
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        let (kc, bc, kt, bt) = (c / 64, 1u64 << (c % 64), t / 64, 1u64 << (t % 64));
        self.for_rows(|x, z, s| {
            let (xc, zc, xt, zt) = (x[kc] & bc != 0, z[kc] & bc != 0, x[kt] & bt != 0, z[kt] & bt != 0);
            *s ^= xc && zt && (xt == zc);
            if xc {
                x[kt] ^= bt;
            }
            if zt {
                z[kc] ^= bc;
            }
        });
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cx(a, b);
        self.h(b);
    }

    pub fn cy(&mut self, c: usize, t: usize) {
        self.s_dag(t);
        self.cx(c, t);
        self.s(t);
    }

    /// `row h ← row h · row i`, with the sign updated symbolically.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.w;
        let ph = product_phase(
            &self.x[i * w..(i + 1) * w],
            &self.z[i * w..(i + 1) * w],
            &self.x[h * w..(h + 1) * w],
            &self.z[h * w..(h + 1) * w],
        );
        if h >= self.n {
            let si = self.sign[i].clone();
            self.sign[h].xor_assign(&si);
            self.sign[h].constant ^= ph == 2;
        }
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    /// Measures `Z_q`; the returned outcome is `1` for eigenvalue `-1`.
    pub fn measure_z(&mut self, q: usize) -> Affine {
        let n = self.n;
        let w = self.w;
        if let Some(p) = (n..2 * n).find(|&r| self.xbit(r, q)) {
            for r in 0..2 * n {
                if r != p && self.xbit(r, q) {
                    self.rowsum(r, p);
                }
            }
            let d = p - n;
            self.x.copy_within(p * w..(p + 1) * w, d * w);
            self.z.copy_within(p * w..(p + 1) * w, d * w);
            self.x[p * w..(p + 1) * w].fill(0);
            self.z[p * w..(p + 1) * w].fill(0);
            self.z[p * w + q / 64] |= 1 << (q % 64);
            let v = Affine::var(self.num_vars);
            self.num_vars += 1;
            self.sign[p] = v.clone();
            v
        } else {
            let scratch = 2 * n;
            self.x[scratch * w..(scratch + 1) * w].fill(0);
            self.z[scratch * w..(scratch + 1) * w].fill(0);
            self.sign[scratch] = Affine::default();
            for d in 0..n {
                if self.xbit(d, q) {
                    self.rowsum(scratch, d + n);
                }
            }
            self.sign[scratch].clone()
        }
    }

    /// Returns qubit `q` to `|0>` after a Z measurement with outcome `o` by
    /// applying `X^o`.
    fn correct_z(&mut self, q: usize, o: &Affine) {
        for r in self.n..2 * self.n {
            if self.zbit(r, q) {
                self.sign[r].xor_assign(o);
            }
        }
    }

    pub fn measure(&mut self, q: usize, basis: Basis, reset: bool) -> Affine {
        if basis == Basis::X {
            self.h(q);
        }
        let o = self.measure_z(q);
        if reset {
            self.correct_z(q, &o);
        }
        if basis == Basis::X {
            self.h(q);
        }
        o
    }

    pub fn reset(&mut self, q: usize, basis: Basis) {
        self.measure(q, basis, true);
    }

    /// Stabilizer rows as `(x, z, sign)` with `x`, `z` as bool vectors.
    pub fn stabilizers(&self) -> Vec<(Vec<bool>, Vec<bool>, Affine)> {
        (self.n..2 * self.n)
            .map(|r| {
                let x = (0..self.n).map(|q| self.xbit(r, q)).collect();
                let z = (0..self.n).map(|q| self.zbit(r, q)).collect();
                (x, z, self.sign[r].clone())
            })
            .collect()
    }

    /// Generators of the subgroup of the stabilizer group supported on
    /// `keep`, with their signs. Valid when the state factorizes across
    /// `keep` and its complement.
    pub fn restricted_stabilizers(&self, keep: &[usize]) -> Vec<(Vec<bool>, Vec<bool>, Affine)> {
        let mut t = self.clone();
        let n = self.n;
        let mut alive: Vec<usize> = (n..2 * n).collect();
        let kept: std::collections::HashSet<usize> = keep.iter().copied().collect();
        for q in (0..n).filter(|q| !kept.contains(q)) {
            for use_x in [true, false] {
                let has = |t: &Tableau, r: usize| if use_x { t.xbit(r, q) } else { t.zbit(r, q) };
                if let Some(pi) = alive.iter().position(|&r| has(&t, r)) {
                    let p = alive.remove(pi);
                    for &r in &alive {
                        if has(&t, r) {
                            t.rowsum(r, p);
                        }
                    }
                }
            }
        }
        alive
            .into_iter()
            .map(|r| {
                let x = keep.iter().map(|&q| t.xbit(r, q)).collect();
                let z = keep.iter().map(|&q| t.zbit(r, q)).collect();
                (x, z, t.sign[r].clone())
            })
            .collect()
    }

    /// Runs the noiseless part of `circuit`, returning one symbolic outcome
    /// per measurement.
    pub fn run(&mut self, circuit: &NoisyCircuit) -> Vec<Affine> {
        let mut record = Vec::with_capacity(circuit.num_measurements());
        for op in &circuit.ops {
            match op {
                Op::Reset { basis, targets } => targets.iter().for_each(|&q| self.reset(q as usize, *basis)),
                Op::Gate1 { kind, targets } => {
                    for &q in targets {
                        let q = q as usize;
                        match kind {
                            Gate1::H => self.h(q),
                            Gate1::S => self.s(q),
                            Gate1::SDag => self.s_dag(q),
                            Gate1::X => self.pauli(q, true, false),
                            Gate1::Y => self.pauli(q, true, true),
                            Gate1::Z => self.pauli(q, false, true),
                        }
                    }
                }
                Op::Gate2 { kind, pairs } => {
                    for &(a, b) in pairs {
                        let (a, b) = (a as usize, b as usize);
                        match kind {
                            Gate2::CX => self.cx(a, b),
                            Gate2::CY => self.cy(a, b),
                            Gate2::CZ => self.cz(a, b),
                        }
                    }
                }
                Op::Measure { basis, reset, targets, .. } => {
                    for &q in targets {
                        record.push(self.measure(q as usize, *basis, *reset));
                    }
                }
                Op::Depolarize1 { .. } | Op::Depolarize2 { .. } | Op::XError { .. } | Op::ZError { .. } | Op::Tick => {}
            }
        }
        record
    }
}
