//! Stabilizer codes, bivariate bicycle codes and their qubit labelling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVector, GF2Matrix};
use crate::pauli::{Pauli, PauliOperator};
use crate::poly::{BivariatePolynomial, RingParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn pauli(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }

    pub fn dual(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "X" | "x" => Ok(Basis::X),
            "Z" | "z" => Ok(Basis::Z),
            other => Err(Error::Experiment(format!("unknown basis `{other}` (expected X or Z)"))),
        }
    }
}

/// A stabilizer code given by an ordered list of commuting generators.
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    num_qubits: usize,
    generators: Vec<PauliOperator>,
    k: usize,
    known_distance: Option<usize>,
}

impl StabilizerCode {
    pub fn new(generators: Vec<PauliOperator>, known_distance: Option<usize>) -> Result<Self> {
        let num_qubits = generators.first().map_or(0, |g| g.num_qubits());
        if generators.iter().any(|g| g.num_qubits() != num_qubits) {
            return Err(Error::Code("generators act on different numbers of qubits".into()));
        }
        for (a, ga) in generators.iter().enumerate() {
            for (b, gb) in generators.iter().enumerate().skip(a + 1) {
                if !ga.commutes_with(gb) {
                    return Err(Error::Code(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        let rank = symplectic_matrix(num_qubits, &generators).rank();
        Ok(Self { num_qubits, generators, k: num_qubits - rank, known_distance })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn known_distance(&self) -> Option<usize> {
        self.known_distance
    }

    pub fn symplectic_matrix(&self) -> GF2Matrix {
        symplectic_matrix(self.num_qubits, &self.generators)
    }
}

pub(crate) fn symplectic_matrix(n: usize, ops: &[PauliOperator]) -> GF2Matrix {
    let rows: Vec<BitVector> = ops.iter().map(|g| g.symplectic()).collect();
    GF2Matrix::from_bit_rows(2 * n, &rows).expect("symplectic rows have length 2n")
}

/// Minimum weight of a logical operator, by exhaustive search over weights.
///
/// With `only` set, candidate errors use that single Pauli type on every
/// qubit of their support.
pub fn brute_force_distance_restricted(code: &StabilizerCode, only: Option<Pauli>) -> Result<usize> {
    const MAX_QUBITS: usize = 20;
    let n = code.num_qubits();
    if n > MAX_QUBITS {
        return Err(Error::SizeGuard(format!("{n} qubits exceeds the exhaustive limit of {MAX_QUBITS}")));
    }
    if code.k() == 0 {
        return Err(Error::Code("code encodes no logical qubits".into()));
    }
    let stab = code.symplectic_matrix().transpose();
    let choices: Vec<Pauli> = match only {
        Some(p) => vec![p],
        None => vec![Pauli::X, Pauli::Y, Pauli::Z],
    };
    for w in 1..=n {
        let mut support: Vec<usize> = (0..w).collect();
        loop {
            let mut digits = vec![0usize; w];
            loop {
                let op = PauliOperator::from_support(
                    n,
                    support.iter().zip(&digits).map(|(&q, &d)| (q, choices[d])),
                )?;
                if code.generators().iter().all(|g| g.commutes_with(&op))
                    && stab.solve(&op.symplectic())?.is_none()
                {
                    return Ok(w);
                }
                if !next_digits(&mut digits, choices.len()) {
                    break;
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }
    Err(Error::Code("no logical operator found".into()))
}

pub fn brute_force_distance(code: &StabilizerCode) -> Result<usize> {
    brute_force_distance_restricted(code, None)
}

fn next_digits(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for pos in (0..k).rev() {
        if c[pos] < n - k + pos {
            c[pos] += 1;
            for q in pos + 1..k {
                c[q] = c[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Label of a data qubit `(0|1, v, w)` or an ancilla `(X|Z, v, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QubitLabel {
    Data { u: usize, v: usize, w: usize },
    Ancilla { basis: Basis, v: usize, w: usize },
}

impl QubitLabel {
    fn check(&self, params: RingParams) -> Result<()> {
        let (u, v, w) = match *self {
            QubitLabel::Data { u, v, w } => (u, v, w),
            QubitLabel::Ancilla { v, w, .. } => (0, v, w),
        };
        if u > 1 || v >= params.ell || w >= params.m {
            return Err(Error::Label(format!("{self:?} outside ell={}, m={}", params.ell, params.m)));
        }
        Ok(())
    }

    /// Data labels index `0..2*ell*m`; ancilla labels index a separate space
    /// of the same size with the X block first.
    pub fn to_index(&self, params: RingParams) -> Result<usize> {
        self.check(params)?;
        let lm = params.size();
        Ok(match *self {
            QubitLabel::Data { u, v, w } => u * lm + params.index(v, w),
            QubitLabel::Ancilla { basis: Basis::X, v, w } => params.index(v, w),
            QubitLabel::Ancilla { basis: Basis::Z, v, w } => lm + params.index(v, w),
        })
    }

    pub fn data_from_index(index: usize, params: RingParams) -> Result<Self> {
        let lm = params.size();
        if index >= 2 * lm {
            return Err(Error::Label(format!("data index {index} >= {}", 2 * lm)));
        }
        let (v, w) = params.coords(index % lm);
        Ok(QubitLabel::Data { u: index / lm, v, w })
    }

    pub fn ancilla_from_index(index: usize, params: RingParams) -> Result<Self> {
        let lm = params.size();
        if index >= 2 * lm {
            return Err(Error::Label(format!("ancilla index {index} >= {}", 2 * lm)));
        }
        let basis = if index < lm { Basis::X } else { Basis::Z };
        let (v, w) = params.coords(index % lm);
        Ok(QubitLabel::Ancilla { basis, v, w })
    }
}

/// A bivariate bicycle code `H_X = [A|B]`, `H_Z = [B^T|A^T]`.
#[derive(Clone, Debug)]
pub struct BBCode {
    pub name: String,
    pub params: RingParams,
    pub a: BivariatePolynomial,
    pub b: BivariatePolynomial,
    pub hx: GF2Matrix,
    pub hz: GF2Matrix,
    pub n: usize,
    pub k: usize,
    pub omega: usize,
    pub known_distance: Option<usize>,
}

impl BBCode {
    pub fn new(
        name: impl Into<String>,
        a: BivariatePolynomial,
        b: BivariatePolynomial,
        known_distance: Option<usize>,
    ) -> Result<Self> {
        if a.params() != b.params() {
            return Err(Error::Code("A and B live in different rings".into()));
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::Code("A and B must be nonzero".into()));
        }
        let params = a.params();
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let hx = ma.hstack(&mb)?;
        let hz = mb.transpose().hstack(&ma.transpose())?;
        assert!(hx.mul(&hz.transpose())?.is_zero(), "H_X H_Z^T must vanish for commuting A, B");
        let n = 2 * params.size();
        let k = n - hx.rank() - hz.rank();
        let omega = a.weight() + b.weight();
        Ok(Self { name: name.into(), params, a, b, hx, hz, n, k, omega, known_distance })
    }

    pub fn check_matrix(&self, basis: Basis) -> &GF2Matrix {
        match basis {
            Basis::X => &self.hx,
            Basis::Z => &self.hz,
        }
    }

    /// The same code over the ring with `x` and `y` exchanged. Data qubit
    /// `(u, v, w)` of `self` becomes `(u, w, v)` of the result.
    pub fn swap_axes(&self) -> Result<Self> {
        Self::new(self.name.clone(), self.a.swap_axes(), self.b.swap_axes(), self.known_distance)
    }

    /// X generators in `(X, v, w)` order followed by Z generators.
    pub fn stabilizer_code(&self) -> StabilizerCode {
        let mut gens = Vec::with_capacity(2 * self.params.size());
        for (basis, h) in [(Basis::X, &self.hx), (Basis::Z, &self.hz)] {
            for r in 0..h.rows() {
                gens.push(PauliOperator::uniform(self.n, basis.pauli(), h.row_support(r)));
            }
        }
        StabilizerCode::new(gens, self.known_distance).expect("CSS generators commute")
    }

    /// `k` independent logical operators of type `basis`. Z-type logicals
    /// span `ker H_X / rowspace H_Z`, and dually for X.
    pub fn logical_observables(&self, basis: Basis) -> Vec<PauliOperator> {
        let (kernel_of, quotient_by) = match basis {
            Basis::Z => (&self.hx, &self.hz),
            Basis::X => (&self.hz, &self.hx),
        };
        let mut span = quotient_by.clone();
        let mut rank = span.rank();
        let mut out = Vec::new();
        for v in kernel_of.kernel_basis() {
            if out.len() == self.k {
                break;
            }
            let candidate = span.vstack(&GF2Matrix::from_bit_rows(self.n, std::slice::from_ref(&v)).unwrap()).unwrap();
            let r = candidate.rank();
            if r > rank {
                rank = r;
                span = candidate;
                out.push(PauliOperator::uniform(self.n, basis.pauli(), v.iter_ones()));
            }
        }
        out
    }
}
