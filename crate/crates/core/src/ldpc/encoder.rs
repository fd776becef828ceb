use crate::error::{Error, Result};
use crate::gf2::{pack, BitMatrix};
use crate::protograph::SparseMatrix;

/// Systematic encoder obtained from one Gaussian elimination of `H`.
///
/// Columns that end up without a pivot carry the information bits verbatim;
/// pivot columns are parity bits computed as `p = A * u`. When `H` is rank
/// deficient (as for lifts of the all-ones regular protographs, where every
/// block row sums to the all-ones word) the surplus free columns are frozen
/// to zero so the code keeps exactly `k` information bits.
#[derive(Debug, Clone)]
pub struct Encoder {
    info_cols: Vec<usize>,
    parity_cols: Vec<usize>,
    parity_rows: BitMatrix,
    n: usize,
}

impl Encoder {
    /// Fails when `H` has fewer than `k` free columns.
    pub fn new(h: &SparseMatrix, k: usize) -> Result<Self> {
        let (m, n) = (h.rows(), h.cols());
        let mut dense = BitMatrix::zeros(m, n);
        for r in 0..m {
            for &c in h.row(r) {
                dense.flip(r, c as usize);
            }
        }
        // Pivot preferentially on the highest-index columns.
        let order: Vec<usize> = (0..n).rev().collect();
        let pivots = dense.reduce(&order);
        let rank = pivots.len();
        if n - rank < k {
            return Err(Error::Length { expected: k, actual: n - rank });
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        // Surplus free columns (lowest indices) stay zero.
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let info_cols = free[free.len() - k..].to_vec();
        let mut parity_rows = BitMatrix::zeros(rank, k);
        for r in 0..rank {
            for (t, &c) in info_cols.iter().enumerate() {
                if dense.get(r, c) {
                    parity_rows.set(r, t, true);
                }
            }
        }
        Ok(Self { info_cols, parity_cols: pivots, parity_rows, n })
    }

    pub fn k(&self) -> usize {
        self.info_cols.len()
    }

    /// Codeword positions holding the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_cols
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::Length { expected: self.k(), actual: info.len() });
        }
        let u = pack(info);
        let mut cw = vec![0u8; self.n];
        for (&c, &b) in self.info_cols.iter().zip(info) {
            cw[c] = b & 1;
        }
        for (r, &c) in self.parity_cols.iter().enumerate() {
            cw[c] = self.parity_rows.row_dot(r, &u) as u8;
        }
        Ok(cw)
    }

    /// Extracts the information bits from a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_cols.iter().map(|&c| codeword[c]).collect()
    }
}
