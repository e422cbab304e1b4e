//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored contiguously as `u64` words, least significant bit first.
//! Every entropy, negativity and overlap computation in this crate reduces to
//! a rank or an affine solve on one of these.

use std::fmt;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], index: usize) -> bool {
    (words[index / WORD_BITS] >> (index % WORD_BITS)) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], index: usize, value: bool) {
    let mask = 1u64 << (index % WORD_BITS);
    if value {
        words[index / WORD_BITS] |= mask;
    } else {
        words[index / WORD_BITS] &= !mask;
    }
}

#[inline]
pub(crate) fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// A row-major bit matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols).max(1);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of booleans. All rows must have equal length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        get_bit(self.row(row), col)
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let stride = self.stride;
        set_bit(&mut self.data[row * stride..(row + 1) * stride], col, value);
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.stride..(row + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.data[row * self.stride..(row + 1) * self.stride]
    }

    /// Appends a row given as packed words (extra high bits must be zero).
    pub fn push_row(&mut self, words: &[u64]) {
        assert!(words.len() >= self.stride);
        self.data.extend_from_slice(&words[..self.stride]);
        self.rows += 1;
    }

    /// `rows[dst] ^= rows[src]`.
    pub fn add_row(&mut self, dst: usize, src: usize) {
        if dst == src {
            self.row_mut(dst).fill(0);
            return;
        }
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        xor_into(a, b);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let s = self.stride;
        for w in 0..s {
            self.data.swap(a * s + w, b * s + w);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let s = out.stride;
                    xor_into(&mut out.data[i * s..(i + 1) * s], other.row(k));
                }
            }
        }
        out
    }

    /// Rank over GF(2). The receiver is left untouched.
    pub fn rank(&self) -> usize {
        self.clone().row_reduce()
    }

    /// In-place Gaussian elimination to reduced row echelon form.
    /// Returns the rank; the first `rank` rows hold the reduced basis.
    pub fn row_reduce(&mut self) -> usize {
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot) = (rank..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(rank, pivot);
            for r in 0..self.rows {
                if r != rank && self.get(r, col) {
                    self.add_row(r, rank);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right null space `{v : M v = 0}`, one vector per row of the result.
    pub fn kernel(&self) -> BitMatrix {
        let mut reduced = self.clone();
        let rank = reduced.row_reduce();
        let mut pivot_cols = Vec::with_capacity(rank);
        let mut col = 0;
        for r in 0..rank {
            while !reduced.get(r, col) {
                col += 1;
            }
            pivot_cols.push(col);
            col += 1;
        }
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            basis.set(k, f, true);
            for (r, &pc) in pivot_cols.iter().enumerate() {
                if reduced.get(r, f) {
                    basis.set(k, pc, true);
                }
            }
        }
        basis
    }

    /// Solves `M x = b` for some `x`, or returns `None` when inconsistent.
    pub fn solve(&self, rhs: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            aug.set(i, self.cols, rhs[i]);
        }
        let rank = aug.row_reduce();
        let mut x = vec![false; self.cols];
        for r in 0..rank {
            let lead = (0..=self.cols).find(|&c| aug.get(r, c)).unwrap();
            if lead == self.cols {
                return None;
            }
            x[lead] = aug.get(r, self.cols);
        }
        Some(x)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Rank of a bit matrix over GF(2).
pub fn gf2_rank(matrix: &BitMatrix) -> usize {
    matrix.rank()
}
