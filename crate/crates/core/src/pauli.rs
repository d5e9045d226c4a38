//! Unsigned multi-qubit Pauli operators in symplectic form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A Pauli operator on `num_qubits` qubits, ignoring the phase.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitVector,
    z: BitVector,
}

impl PauliOperator {
    pub fn identity(num_qubits: usize) -> Self {
        Self { x: BitVector::zeros(num_qubits), z: BitVector::zeros(num_qubits) }
    }

    pub fn from_xz(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension(format!("x part {} vs z part {}", x.len(), z.len())));
        }
        Ok(Self { x, z })
    }

    /// Operator with `pauli` on each qubit of `support`.
    pub fn uniform(num_qubits: usize, pauli: Pauli, support: impl IntoIterator<Item = usize>) -> Self {
        let mut op = Self::identity(num_qubits);
        for q in support {
            op.set(q, pauli);
        }
        op
    }

    pub fn from_support(num_qubits: usize, support: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut op = Self::identity(num_qubits);
        for (q, p) in support {
            if q >= num_qubits {
                return Err(Error::Label(format!("qubit {q} on a {num_qubits}-qubit operator")));
            }
            op.set(q, p);
        }
        Ok(op)
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    /// Non-identity positions in ascending order.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        (0..self.num_qubits())
            .filter_map(|q| match self.get(q) {
                Pauli::I => None,
                p => Some((q, p)),
            })
            .collect()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits()).filter(|&q| self.x.get(q) || self.z.get(q)).count()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Symplectic inner product is zero.
    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        self.x.dot(&other.z) == self.z.dot(&other.x)
    }

    /// Product up to phase.
    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        let mut out = self.clone();
        out.x.xor_assign(&other.x);
        out.z.xor_assign(&other.z);
        out
    }

    /// Row `[x | z]` of length `2n`.
    pub fn symplectic(&self) -> BitVector {
        let n = self.num_qubits();
        BitVector::from_indices(2 * n, self.x.iter_ones().chain(self.z.iter_ones().map(|q| q + n)))
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().filter(|c| !c.is_whitespace()).collect();
        let mut op = Self::identity(chars.len());
        for (q, c) in chars.into_iter().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' | '_' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Label(format!("invalid Pauli character `{other}`"))),
            };
            op.set(q, p);
        }
        Ok(op)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let op: PauliOperator = "XIZY".parse().unwrap();
        assert_eq!(op.to_string(), "XIZY");
        assert_eq!(op.weight(), 3);
        assert_eq!(op.support(), vec![(0, Pauli::X), (2, Pauli::Z), (3, Pauli::Y)]);
    }

    #[test]
    fn commutation() {
        let xx: PauliOperator = "XX".parse().unwrap();
        let zz: PauliOperator = "ZZ".parse().unwrap();
        let zi: PauliOperator = "ZI".parse().unwrap();
        let yy: PauliOperator = "YY".parse().unwrap();
        assert!(xx.commutes_with(&zz));
        assert!(!xx.commutes_with(&zi));
        assert!(yy.commutes_with(&xx));
        assert!(!"Y".parse::<PauliOperator>().unwrap().commutes_with(&"Z".parse().unwrap()));
    }

    #[test]
    fn bad_character_rejected() {
        assert!("XQ".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn out_of_range_support_rejected() {
        assert!(PauliOperator::from_support(2, [(2, Pauli::X)]).is_err());
    }
}
