//! The bivariate quotient ring `F2[x,y] / (x^ell - 1, y^m - 1)`.
//!
//! Matrix indices follow the bijection `(v, w) <-> v*m + w`, so the monomial
//! `x^i y^j` is the permutation sending row `(v, w)` to column `(v+i, w+j)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::GF2Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingParams {
    pub ell: usize,
    pub m: usize,
}

impl RingParams {
    pub fn new(ell: usize, m: usize) -> Result<Self> {
        if ell == 0 || m == 0 {
            return Err(Error::Polynomial(format!("ring periods must be positive, got ell={ell}, m={m}")));
        }
        Ok(Self { ell, m })
    }

    /// Number of group elements, `ell * m`.
    pub fn size(&self) -> usize {
        self.ell * self.m
    }

    #[inline]
    pub fn index(&self, v: usize, w: usize) -> usize {
        v * self.m + w
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k / self.m, k % self.m)
    }

    /// Swaps the roles of `x` and `y`.
    pub fn swapped(&self) -> Self {
        Self { ell: self.m, m: self.ell }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub i: usize,
    pub j: usize,
}

impl Monomial {
    pub fn new(params: RingParams, i: i64, j: i64) -> Self {
        Self {
            i: i.rem_euclid(params.ell as i64) as usize,
            j: j.rem_euclid(params.m as i64) as usize,
        }
    }

    pub fn transpose(self, params: RingParams) -> Self {
        Self::new(params, -(self.i as i64), -(self.j as i64))
    }

    pub fn mul(self, other: Monomial, params: RingParams) -> Self {
        Self { i: (self.i + other.i) % params.ell, j: (self.j + other.j) % params.m }
    }

    pub fn swapped(self) -> Self {
        Self { i: self.j, j: self.i }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.i, self.j) {
            (0, 0) => write!(f, "1"),
            (i, 0) => write!(f, "x^{i}"),
            (0, j) => write!(f, "y^{j}"),
            (i, j) => write!(f, "x^{i}y^{j}"),
        }
    }
}

/// `x^i y^j` as an `(ell*m) x (ell*m)` permutation matrix.
pub fn monomial_matrix(params: RingParams, mono: Monomial) -> GF2Matrix {
    let n = params.size();
    let mut mat = GF2Matrix::zeros(n, n);
    for v in 0..params.ell {
        for w in 0..params.m {
            let col = params.index((v + mono.i) % params.ell, (w + mono.j) % params.m);
            mat.set(params.index(v, w), col, true);
        }
    }
    mat
}

/// A polynomial with GF(2) coefficients.
///
/// Terms keep their first-insertion order (schedules index monomials by
/// catalog position); equality and hashing ignore that order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BivariatePolynomial {
    params: RingParams,
    terms: Vec<Monomial>,
}

impl BivariatePolynomial {
    pub fn zero(params: RingParams) -> Self {
        Self { params, terms: Vec::new() }
    }

    pub fn one(params: RingParams) -> Self {
        Self { params, terms: vec![Monomial { i: 0, j: 0 }] }
    }

    /// Builds the polynomial from exponent pairs; repeated terms cancel.
    pub fn from_terms(params: RingParams, terms: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut p = Self::zero(params);
        for (i, j) in terms {
            p.toggle(Monomial::new(params, i, j));
        }
        p
    }

    fn toggle(&mut self, mono: Monomial) {
        if let Some(pos) = self.terms.iter().position(|&t| t == mono) {
            self.terms.remove(pos);
        } else {
            self.terms.push(mono);
        }
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn weight(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_params(&self, other: &Self) -> Result<()> {
        if self.params != other.params {
            return Err(Error::Polynomial(format!(
                "ring mismatch: {:?} vs {:?}",
                self.params, other.params
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let mut out = self.clone();
        for &t in &other.terms {
            out.toggle(t);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_params(other)?;
        let mut out = Self::zero(self.params);
        for &a in &self.terms {
            for &b in &other.terms {
                out.toggle(a.mul(b, self.params));
            }
        }
        Ok(out)
    }

    /// The polynomial whose matrix is the transpose: `x^i y^j -> x^-i y^-j`.
    pub fn transpose(&self) -> Self {
        Self {
            params: self.params,
            terms: self.terms.iter().map(|t| t.transpose(self.params)).collect(),
        }
    }

    /// The same polynomial over the ring with `x` and `y` exchanged.
    pub fn swap_axes(&self) -> Self {
        Self {
            params: self.params.swapped(),
            terms: self.terms.iter().map(|t| t.swapped()).collect(),
        }
    }

    /// Distinct x-exponents `I(P)` and y-exponents `J(P)`.
    pub fn exponent_sets(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        (
            self.terms.iter().map(|t| t.i).collect(),
            self.terms.iter().map(|t| t.j).collect(),
        )
    }

    pub fn to_matrix(&self) -> GF2Matrix {
        let n = self.params.size();
        let mut mat = GF2Matrix::zeros(n, n);
        for v in 0..self.params.ell {
            for w in 0..self.params.m {
                let row = self.params.index(v, w);
                for t in &self.terms {
                    let col = self.params.index((v + t.i) % self.params.ell, (w + t.j) % self.params.m);
                    mat.flip(row, col);
                }
            }
        }
        mat
    }

    fn sorted_terms(&self) -> Vec<Monomial> {
        let mut t = self.terms.clone();
        t.sort();
        t
    }
}

impl PartialEq for BivariatePolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params && self.sorted_terms() == other.sorted_terms()
    }
}

impl Eq for BivariatePolynomial {}

impl std::hash::Hash for BivariatePolynomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.params.hash(state);
        self.sorted_terms().hash(state);
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circulant(n: usize, s: usize) -> Vec<Vec<u8>> {
        (0..n).map(|r| (0..n).map(|c| u8::from(c == (r + s) % n)).collect()).collect()
    }

    // Independent Kronecker product on dense u8 arrays.
    fn kron(a: &[Vec<u8>], b: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![0u8; ra * rb]; ra * rb];
        for (i, arow) in a.iter().enumerate() {
            for (j, &av) in arow.iter().enumerate() {
                for (k, brow) in b.iter().enumerate() {
                    for (l, &bv) in brow.iter().enumerate() {
                        out[i * rb + k][j * rb + l] = av * bv;
                    }
                }
            }
        }
        out
    }

    fn p(ell: usize, m: usize, terms: &[(i64, i64)]) -> BivariatePolynomial {
        BivariatePolynomial::from_terms(RingParams::new(ell, m).unwrap(), terms.iter().copied())
    }

    #[test]
    fn unit_monomial_is_identity() {
        let rp = RingParams::new(2, 2).unwrap();
        assert_eq!(monomial_matrix(rp, Monomial { i: 0, j: 0 }), GF2Matrix::identity(4));
    }

    #[test]
    fn x_entry_follows_index_convention() {
        let rp = RingParams::new(2, 2).unwrap();
        let mat = monomial_matrix(rp, Monomial { i: 1, j: 0 });
        assert!(mat.get(0, 2));
        assert_eq!(mat.row_weight(0), 1);
    }

    #[test]
    fn monomial_matches_kronecker_product() {
        let rp = RingParams::new(3, 2).unwrap();
        let expected = GF2Matrix::from_rows_u8(6, &kron(&circulant(3, 1), &circulant(2, 1))).unwrap();
        assert_eq!(monomial_matrix(rp, Monomial { i: 1, j: 1 }), expected);
    }

    #[test]
    fn zero_and_one() {
        let rp = RingParams::new(3, 4).unwrap();
        assert!(BivariatePolynomial::zero(rp).to_matrix().is_zero());
        assert_eq!(BivariatePolynomial::one(rp).to_matrix(), GF2Matrix::identity(12));
    }

    #[test]
    fn weight_three_rows_and_columns() {
        let a = p(6, 6, &[(3, 0), (0, 1), (0, 2)]);
        // sum of three disjoint permutation matrices built independently
        let mut acc = GF2Matrix::zeros(36, 36);
        for (i, j) in [(3usize, 0usize), (0, 1), (0, 2)] {
            let d = kron(&circulant(6, i), &circulant(6, j));
            acc = acc.add(&GF2Matrix::from_rows_u8(36, &d).unwrap()).unwrap();
        }
        let mat = a.to_matrix();
        assert_eq!(mat, acc);
        for k in 0..36 {
            assert_eq!(mat.row_weight(k), 3);
            assert_eq!(mat.col_weight(k), 3);
        }
    }

    #[test]
    fn transpose_negates_exponents() {
        assert_eq!(p(6, 6, &[(1, 0), (0, 2)]).transpose(), p(6, 6, &[(5, 0), (0, 4)]));
        assert_eq!(p(6, 6, &[(0, 0)]).transpose(), p(6, 6, &[(0, 0)]));
    }

    #[test]
    fn repeated_terms_cancel() {
        assert!(p(3, 3, &[(1, 1), (4, 1)]).is_zero());
    }

    #[test]
    fn exponent_sets_read_off() {
        let a = p(6, 6, &[(3, 0), (0, 1), (0, 2)]);
        let (i, j) = a.exponent_sets();
        assert_eq!(i.into_iter().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(j.into_iter().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn union_of_j_for_catalog_pair() {
        let a = p(12, 6, &[(3, 0), (0, 1), (0, 2)]);
        let b = p(12, 6, &[(0, 3), (1, 0), (2, 0)]);
        let mut j = a.exponent_sets().1;
        j.extend(b.exponent_sets().1);
        assert_eq!(j.len(), 4);
    }

    fn arb_poly(ell: usize, m: usize) -> impl Strategy<Value = BivariatePolynomial> {
        prop::collection::vec((0..ell as i64, 0..m as i64), 0..6).prop_map(move |t| p(ell, m, &t))
    }

    proptest! {
        #[test]
        fn transpose_matches_matrix_transpose(a in arb_poly(4, 5)) {
            prop_assert_eq!(a.transpose().to_matrix(), a.to_matrix().transpose());
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            let neg: BTreeSet<usize> = a.exponent_sets().0.iter().map(|&i| (4 - i) % 4).collect();
            prop_assert_eq!(a.transpose().exponent_sets().0, neg);
        }

        #[test]
        fn matrix_map_is_ring_homomorphism(a in arb_poly(3, 4), b in arb_poly(3, 4)) {
            prop_assert_eq!(a.add(&b).unwrap().to_matrix(), a.to_matrix().add(&b.to_matrix()).unwrap());
            let ab = a.mul(&b).unwrap();
            prop_assert_eq!(ab.to_matrix(), a.to_matrix().mul(&b.to_matrix()).unwrap());
            prop_assert_eq!(ab, b.mul(&a).unwrap());
        }

        #[test]
        fn swapped_axes_is_a_relabelling(a in arb_poly(3, 5)) {
            prop_assert_eq!(a.swap_axes().swap_axes(), a.clone());
            prop_assert_eq!(a.swap_axes().weight(), a.weight());
        }
    }
}
