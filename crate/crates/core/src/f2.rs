//! Bit-packed dense matrices over F2.
//!
//! Rows are stored contiguously as `u64` words, least-significant bit first.
//! Everything here is phase-free; signed Pauli algebra lives in [`crate::pauli`].

use std::fmt;

pub const WORD_BITS: usize = 64;

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[inline]
pub fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
}

#[inline]
pub fn set_bit(words: &mut [u64], i: usize, value: bool) {
    let mask = 1u64 << (i % WORD_BITS);
    if value {
        words[i / WORD_BITS] |= mask;
    } else {
        words[i / WORD_BITS] &= !mask;
    }
}

#[inline]
pub fn flip_bit(words: &mut [u64], i: usize) {
    words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
}

#[inline]
pub fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Parity of the bitwise AND of two rows.
#[inline]
pub fn dot(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

#[inline]
pub fn is_zero(words: &[u64]) -> bool {
    words.iter().all(|&w| w == 0)
}

/// Row-major F2 matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    nrows: usize,
    ncols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        let stride = words_for(ncols);
        Self {
            nrows,
            ncols,
            stride,
            data: vec![0; nrows * stride],
        }
    }

    pub fn from_rows<I, R>(ncols: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[u64]>,
    {
        let stride = words_for(ncols);
        let mut data = Vec::new();
        let mut nrows = 0;
        for row in rows {
            let row = row.as_ref();
            assert!(row.len() >= stride, "row too short for {ncols} columns");
            data.extend_from_slice(&row[..stride]);
            nrows += 1;
        }
        Self {
            nrows,
            ncols,
            stride,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        get_bit(self.row(i), j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let stride = self.stride;
        set_bit(&mut self.data[i * stride..(i + 1) * stride], j, value);
    }

    pub fn push_row(&mut self, row: &[u64]) {
        self.data.extend_from_slice(&row[..self.stride]);
        self.nrows += 1;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (head, tail) = self.data.split_at_mut(hi * self.stride);
        head[lo * self.stride..(lo + 1) * self.stride].swap_with_slice(&mut tail[..self.stride]);
    }

    // dst ^= src, for dst != src
    fn add_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let s = self.stride;
        if dst < src {
            let (head, tail) = self.data.split_at_mut(src * s);
            xor_into(&mut head[dst * s..(dst + 1) * s], &tail[..s]);
        } else {
            let (head, tail) = self.data.split_at_mut(dst * s);
            xor_into(&mut tail[..s], &head[src * s..(src + 1) * s]);
        }
    }

    /// Reduce in place to reduced row-echelon form; returns the pivot column
    /// of each of the leading `rank` rows.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut top = 0;
        for col in 0..self.ncols {
            if top == self.nrows {
                break;
            }
            let Some(found) = (top..self.nrows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(top, found);
            for r in 0..self.nrows {
                if r != top && self.get(r, col) {
                    self.add_row(r, top);
                }
            }
            pivots.push(col);
            top += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right null space {v : M v = 0}.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u64; self.stride];
            set_bit(&mut v, free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, free) {
                    set_bit(&mut v, p, true);
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Incremental row space with reduced pivots, for repeated membership tests.
#[derive(Clone, Debug, Default)]
pub struct RowSpace {
    ncols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl RowSpace {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [u64]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if get_bit(v, p) {
                xor_into(v, row);
            }
        }
    }

    /// Adds `v` to the space; returns `false` if it was already contained.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut w = v[..words_for(self.ncols)].to_vec();
        self.reduce(&mut w);
        let Some(p) = (0..self.ncols).find(|&c| get_bit(&w, c)) else {
            return false;
        };
        for row in &mut self.rows {
            if get_bit(row, p) {
                xor_into(row, &w);
            }
        }
        self.rows.push(w);
        self.pivots.push(p);
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v[..words_for(self.ncols)].to_vec();
        self.reduce(&mut w);
        is_zero(&w)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.nrows, self.ncols)?;
        for i in 0..self.nrows {
            let line: String = (0..self.ncols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}
