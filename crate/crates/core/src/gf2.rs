//! Dense GF(2) linear algebra on bit-packed rows.

/// Row-major bit matrix with rows packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / 64] ^= 1 << (c % 64);
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for w in 0..self.words {
                self.data.swap(a * self.words + w, b * self.words + w);
            }
        }
    }

    /// `row[dst] ^= row[src]`, touching only words from `from_word` on.
    fn xor_row_into(&mut self, src: usize, dst: usize, from_word: usize) {
        let (s, d) = (src * self.words, dst * self.words);
        for w in from_word..self.words {
            let v = self.data[s + w];
            self.data[d + w] ^= v;
        }
    }

    /// Bitwise parity of `row & v`.
    #[inline]
    pub fn row_dot(&self, r: usize, v: &[u64]) -> bool {
        self.row_words(r)
            .iter()
            .zip(v)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    /// Reduces `self` to reduced row echelon form over the given column order.
    ///
    /// Returns the pivot column of each of the first `rank` rows.
    pub fn reduce(&mut self, column_order: &[usize]) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut rank = 0;
        for &c in column_order {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(rank, p);
            for r in 0..self.rows {
                if r != rank && self.get(r, c) {
                    self.xor_row_into(rank, r, 0);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        pivots
    }

    /// Rank over GF(2) (consumes a copy).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let order: Vec<usize> = (0..self.cols).collect();
        m.reduce_forward(&order)
    }

    /// Forward elimination only; returns the rank.
    fn reduce_forward(&mut self, column_order: &[usize]) -> usize {
        let mut rank = 0;
        for &c in column_order {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(rank, p);
            for r in rank + 1..self.rows {
                if self.get(r, c) {
                    self.xor_row_into(rank, r, c / 64);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Packs a bit slice into `u64` words.
pub fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity_and_dependent_rows() {
        let mut m = BitMatrix::zeros(3, 70);
        m.set(0, 0, true);
        m.set(1, 65, true);
        m.set(2, 0, true);
        m.set(2, 65, true);
        assert_eq!(m.rank(), 2);
        m.flip(2, 3);
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn reduce_yields_unit_pivot_columns() {
        let mut m = BitMatrix::zeros(2, 4);
        for (r, c) in [(0, 0), (0, 1), (1, 1), (1, 2), (1, 3)] {
            m.set(r, c, true);
        }
        let order: Vec<usize> = (0..4).collect();
        let piv = m.reduce(&order);
        assert_eq!(piv, vec![0, 1]);
        assert!(m.get(0, 0) && !m.get(1, 0));
        assert!(m.get(1, 1) && !m.get(0, 1));
    }

    #[test]
    fn dot_parity() {
        let mut m = BitMatrix::zeros(1, 130);
        m.set(0, 1, true);
        m.set(0, 129, true);
        let v = pack(&{
            let mut b = vec![0u8; 130];
            b[129] = 1;
            b
        });
        assert!(m.row_dot(0, &v));
    }
}
