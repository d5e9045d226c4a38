//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words so that row additions are word-parallel
//! XORs. Rank, solve and kernel computations all run on a reduced row-echelon
//! form obtained by Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector of length `len` with ones at `indices` (repeated indices cancel).
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

/// A dense `rows x cols` matrix over GF(2), stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row-echelon form together with the pivot column of each nonzero row.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: GF2Matrix,
    pub pivots: Vec<usize>,
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 rows. All rows must have length `cols`.
    pub fn from_rows_u8(cols: usize, rows: &[Vec<u8>]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {r} has length {} but {cols} columns were declared",
                    row.len()
                )));
            }
            for (c, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        Ok(m)
    }

    pub fn from_bit_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {r} has length {} but {cols} columns were declared",
                    row.len()
                )));
            }
            m.row_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_vector(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row(r).to_vec())
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        (0..self.rows).filter(|&r| self.get(r, c)).count()
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row_vector(r).iter_ones().collect()
    }

    /// `row[dst] ^= row[src]`.
    #[inline]
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s], &mut lo[dst * s..(dst + 1) * s])
        };
        for (d, x) in b.iter_mut().zip(a) {
            *d ^= x;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn add(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a ^= b;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = GF2Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let ones: Vec<usize> = self.row_vector(r).iter_ones().collect();
            let dst = r * out.stride;
            for k in ones {
                let src = other.row(k);
                for (w, x) in src.iter().enumerate() {
                    out.data[dst + w] ^= x;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>();
            if parity % 2 == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> GF2Matrix {
        let mut t = GF2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_vector(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let mut out = GF2Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row_vector(r).iter_ones() {
                out.set(r, c, true);
            }
            for c in other.row_vector(r).iter_ones() {
                out.set(r, self.cols + c, true);
            }
        }
        Ok(out)
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &GF2Matrix) -> Result<GF2Matrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(GF2Matrix { rows: self.rows + other.rows, cols: self.cols, stride: self.stride, data })
    }

    /// Reduced row-echelon form by Gauss-Jordan elimination.
    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let word = col / WORD;
            let bit = 1u64 << (col % WORD);
            let Some(p) = (row..m.rows).find(|&r| m.data[r * m.stride + word] & bit != 0) else {
                continue;
            };
            m.swap_rows(row, p);
            for r in 0..m.rows {
                if r != row && m.data[r * m.stride + word] & bit != 0 {
                    m.xor_row_into(row, r);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// Solves `self * x = b`. Returns `None` when `b` is outside the column
    /// space. Free variables are set to zero, so `b = 0` yields `x = 0`.
    pub fn solve(&self, b: &BitVector) -> Result<Option<BitVector>> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let aug = self.hstack(&GF2Matrix::from_bit_rows(1, &column_as_rows(b))?)?;
        let ech = aug.echelon();
        if ech.pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &c) in ech.pivots.iter().enumerate() {
            if ech.matrix.get(r, self.cols) {
                x.set(c, true);
            }
        }
        Ok(Some(x))
    }

    /// A basis of the right kernel `{x : self * x = 0}`.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        let ech = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &c in &ech.pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::zeros(self.cols);
                v.set(f, true);
                for (r, &c) in ech.pivots.iter().enumerate() {
                    if ech.matrix.get(r, f) {
                        v.set(c, true);
                    }
                }
                v
            })
            .collect()
    }
}

fn column_as_rows(b: &BitVector) -> Vec<BitVector> {
    (0..b.len()).map(|i| BitVector::from_bools(&[b.get(i)])).collect()
}

impl fmt::Debug for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF2Matrix {}x{}", self.rows, self.cols)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> GF2Matrix {
        let mut m = GF2Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, rng.gen_bool(0.5));
            }
        }
        m
    }

    // Independent rank: elimination on Vec<Vec<bool>> with no bit packing.
    fn naive_rank(m: &GF2Matrix) -> usize {
        let mut a: Vec<Vec<bool>> =
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect()).collect();
        let mut rank = 0;
        for c in 0..m.cols() {
            if let Some(p) = (rank..a.len()).find(|&r| a[r][c]) {
                a.swap(rank, p);
                let pivot = a[rank].clone();
                for (r, row) in a.iter_mut().enumerate() {
                    if r != rank && row[c] {
                        row.iter_mut().zip(&pivot).for_each(|(x, &v)| *x ^= v);
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn identity_and_zero_rank() {
        assert_eq!(GF2Matrix::identity(7).rank(), 7);
        assert_eq!(GF2Matrix::zeros(5, 9).rank(), 0);
        assert_eq!(GF2Matrix::identity(130).rank(), 130);
    }

    #[test]
    fn self_sum_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 6, 70);
        assert!(m.add(&m).unwrap().is_zero());
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = BitVector::from_bools(&[true, false, true, true, false]);
        let x = GF2Matrix::identity(5).solve(&b).unwrap().unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 8, 12);
        let x = m.solve(&BitVector::zeros(8)).unwrap().unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn random_system_solution_checks_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 10, 14);
        // right-hand side drawn from the column space
        let x0 = BitVector::from_bools(&(0..14).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
        let b = m.mul_vec(&x0).unwrap();
        let x = m.solve(&b).unwrap().expect("consistent system");
        assert_eq!(m.mul_vec(&x).unwrap(), b);
    }

    #[test]
    fn inconsistent_system_is_none() {
        let m = GF2Matrix::from_rows_u8(2, &[vec![1, 1], vec![1, 1]]).unwrap();
        let b = BitVector::from_bools(&[true, false]);
        assert!(m.solve(&b).unwrap().is_none());
    }

    #[test]
    fn solve_dimension_mismatch() {
        let m = GF2Matrix::identity(3);
        assert!(matches!(m.solve(&BitVector::zeros(4)), Err(Error::Dimension(_))));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 9, 20);
        let ker = m.kernel_basis();
        assert_eq!(ker.len(), 20 - m.rank());
        for v in &ker {
            assert!(m.mul_vec(v).unwrap().is_zero());
        }
        let k = GF2Matrix::from_bit_rows(20, &ker).unwrap();
        assert_eq!(k.rank(), ker.len());
    }

    proptest! {
        #[test]
        fn rank_matches_naive_and_transpose(seed in any::<u64>(), rows in 1usize..40, cols in 1usize..90) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, rows, cols);
            let r = m.rank();
            prop_assert_eq!(r, naive_rank(&m));
            prop_assert_eq!(r, m.transpose().rank());
            prop_assert!(r <= rows.min(cols));
        }

        #[test]
        fn product_is_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 5, 7);
            let b = random_matrix(&mut rng, 7, 66);
            let c = random_matrix(&mut rng, 66, 3);
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
