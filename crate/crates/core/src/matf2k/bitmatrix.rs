//! Bit-packed matrices over `F_2`: each row is a slice of `u64` words and
//! elimination is word-wide XOR.

/// Dense `rows x cols` matrix over `F_2`, row-major, 64 columns per word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
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
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        let w = &mut self.data[i * self.words + j / 64];
        if bit {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.words);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// `row[dst] ^= row[src]`.
    fn xor_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let (d, s) = (dst * self.words, src * self.words);
        for w in 0..self.words {
            let v = self.data[s + w];
            self.data[d + w] ^= v;
        }
    }

    /// Reduce in place to reduced row-echelon form; returns pivot columns.
    /// Zero rows end up at the bottom.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Drop rows beyond `n`.
    pub fn truncate_rows(&mut self, n: usize) {
        self.rows = self.rows.min(n);
        self.data.truncate(self.rows * self.words);
    }

    /// Basis of `{v : A v = 0}` as the rows of the returned matrix.
    pub fn kernel(&self) -> BitMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = BitMatrix::zeros(0, self.cols);
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitMatrix::zeros(1, self.cols);
            v.set(0, free, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m.get(r, free) {
                    v.set(0, p, true);
                }
            }
            out.push_row(v.row(0));
        }
        out
    }

    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.get(i, k) {
                    let (o, s) = (i * out.words, k * rhs.words);
                    for w in 0..out.words {
                        out.data[o + w] ^= rhs.data[s + w];
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent rank oracle: elimination on rows stored as `Vec<bool>`.
    fn naive_rank(rows: &[Vec<bool>]) -> usize {
        let mut m: Vec<Vec<bool>> = rows.to_vec();
        let cols = m.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..m.len()).find(|&i| m[i][c]) {
                m.swap(rank, p);
                for i in 0..m.len() {
                    if i != rank && m[i][c] {
                        for j in 0..cols {
                            let v = m[rank][j];
                            m[i][j] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn rank_nullity_random_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let density = 0.05 + 0.045 * trial as f64;
            let mut m = BitMatrix::zeros(64, 64);
            let mut plain = vec![vec![false; 64]; 64];
            for i in 0..64 {
                for j in 0..64 {
                    let b = rng.gen_bool(density.min(0.95));
                    m.set(i, j, b);
                    plain[i][j] = b;
                }
            }
            let rank = m.rank();
            assert_eq!(rank, naive_rank(&plain));
            let ker = m.kernel();
            assert_eq!(ker.rows() + rank, 64);
            // every kernel vector is annihilated
            for r in 0..ker.rows() {
                for i in 0..64 {
                    let mut acc = false;
                    for j in 0..64 {
                        acc ^= m.get(i, j) & ker.get(r, j);
                    }
                    assert!(!acc);
                }
            }
        }
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut m = BitMatrix::zeros(3, 130);
        m.set(0, 0, true);
        m.set(0, 129, true);
        m.set(1, 64, true);
        m.set(2, 129, true);
        assert_eq!(m.rank(), 3);
        assert_eq!(m.kernel().rows(), 127);
    }

    #[test]
    fn identity_and_zero() {
        assert_eq!(BitMatrix::identity(5).kernel().rows(), 0);
        assert_eq!(BitMatrix::zeros(3, 3).kernel().rows(), 3);
        let i = BitMatrix::identity(70);
        assert_eq!(i.mul(&i), i);
    }
}
