//! Copy-and-permute lifting of a protograph.
//!
//! Lifting runs in two stages. A small pre-lift (factor 4 when the lift size
//! allows it) turns every multiplicity-`b` entry into `b` distinct 4x4
//! circulant permutations, which removes parallel edges. The resulting simple
//! graph is then lifted by circulants of size `Z / 4`. In both stages the
//! circulant offset of each edge is chosen greedily, PEG style: the offset
//! creating the fewest 4-cycles, then the fewest 6-cycles, then the smallest
//! offset value wins. The seed only permutes the order in which edges are
//! placed.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BaseMatrix;
use crate::error::{Error, Result};
use crate::ldpc::Encoder;

/// Binary sparse matrix with both row-major and column-major edge indexes.
///
/// Edges are numbered in row-major order; `col_edges(j)` lists the ids of
/// the edges incident to column `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    edge_col: Vec<u32>,
    edge_row: Vec<u32>,
    col_ptr: Vec<usize>,
    col_edge: Vec<u32>,
}

impl SparseMatrix {
    /// Builds the matrix from `(row, col)` positions. Duplicates are kept,
    /// so callers that need a binary matrix must not pass any.
    pub fn from_positions(rows: usize, cols: usize, mut pos: Vec<(usize, usize)>) -> Self {
        pos.sort_unstable();
        let mut row_ptr = vec![0usize; rows + 1];
        for &(r, _) in &pos {
            row_ptr[r + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let edge_col: Vec<u32> = pos.iter().map(|&(_, c)| c as u32).collect();
        let edge_row: Vec<u32> = pos.iter().map(|&(r, _)| r as u32).collect();

        let mut col_ptr = vec![0usize; cols + 1];
        for &(_, c) in &pos {
            col_ptr[c + 1] += 1;
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut fill = col_ptr.clone();
        let mut col_edge = vec![0u32; pos.len()];
        for (e, &(_, c)) in pos.iter().enumerate() {
            col_edge[fill[c]] = e as u32;
            fill[c] += 1;
        }
        Self { rows, cols, row_ptr, edge_col, edge_row, col_ptr, col_edge }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.edge_col.len()
    }

    /// Column indices of row `r`.
    pub fn row(&self, r: usize) -> &[u32] {
        &self.edge_col[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Edge-id range of row `r`.
    pub fn row_edges(&self, r: usize) -> std::ops::Range<usize> {
        self.row_ptr[r]..self.row_ptr[r + 1]
    }

    /// Edge ids incident to column `c`.
    pub fn col_edges(&self, c: usize) -> &[u32] {
        &self.col_edge[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn edge_row(&self, e: usize) -> usize {
        self.edge_row[e] as usize
    }

    pub fn edge_col(&self, e: usize) -> usize {
        self.edge_col[e] as usize
    }

    pub fn row_degree(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn col_degree(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    /// True when `H * bits = 0` over GF(2).
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        (0..self.rows).all(|r| self.row(r).iter().fold(0u8, |acc, &c| acc ^ bits[c as usize]) & 1 == 0)
    }
}

/// A protograph lifted to a full parity-check matrix, with its encoder.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    base: BaseMatrix,
    lift_factor: usize,
    seed: u64,
    h: SparseMatrix,
    punctured_bits: Vec<usize>,
    transmitted: Vec<usize>,
    encoder: Encoder,
}

impl LiftedCode {
    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn lift_factor(&self) -> usize {
        self.lift_factor
    }

    /// Seed of the attempt that produced this code.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn parity_check(&self) -> &SparseMatrix {
        &self.h
    }

    /// Codeword length including punctured bits.
    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn m(&self) -> usize {
        self.h.rows()
    }

    pub fn k(&self) -> usize {
        self.lift_factor * (self.base.cols() - self.base.rows())
    }

    pub fn transmitted_len(&self) -> usize {
        self.transmitted.len()
    }

    /// Codeword positions that are sent over the channel, ascending.
    pub fn transmitted_positions(&self) -> &[usize] {
        &self.transmitted
    }

    pub fn punctured_bits(&self) -> &[usize] {
        &self.punctured_bits
    }

    #[inline]
    pub fn proto_col_of(&self, col: usize) -> usize {
        col / self.lift_factor
    }

    #[inline]
    pub fn proto_row_of(&self, row: usize) -> usize {
        row / self.lift_factor
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.transmitted_len() as f64
    }
}

/// Knobs for [`lift_with`].
#[derive(Debug, Clone, Copy)]
pub struct LiftOptions {
    /// Reject lifts that contain 4-cycles.
    pub require_no_four_cycles: bool,
    /// Number of seeds tried before giving up.
    pub attempts: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        Self { require_no_four_cycles: true, attempts: 16 }
    }
}

/// Lifts `base` by `z` with default options (4-cycle free, 16 attempts).
pub fn lift(base: &BaseMatrix, z: usize, seed: u64) -> Result<LiftedCode> {
    lift_with(base, z, seed, LiftOptions::default())
}

pub fn lift_with(base: &BaseMatrix, z: usize, seed: u64, opts: LiftOptions) -> Result<LiftedCode> {
    let pre = prelift_factor(base, z)?;
    let mut last_err = Error::ShortCycles { z, attempts: opts.attempts };
    for attempt in 0..opts.attempts.max(1) as u64 {
        let s = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let h = build_lifted(base, z, pre, s);
        if opts.require_no_four_cycles && has_four_cycle(&h) {
            continue;
        }
        match Encoder::new(&h, z * (base.cols() - base.rows())) {
            Ok(encoder) => {
                let punctured_bits: Vec<usize> = base
                    .punctured()
                    .iter()
                    .flat_map(|&p| p * z..(p + 1) * z)
                    .collect();
                let transmitted = (0..h.cols()).filter(|c| !base.is_punctured(c / z)).collect();
                return Ok(LiftedCode {
                    base: base.clone(),
                    lift_factor: z,
                    seed: s,
                    h,
                    punctured_bits,
                    transmitted,
                    encoder,
                });
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn prelift_factor(base: &BaseMatrix, z: usize) -> Result<usize> {
    let mult = base.max_multiplicity();
    let err = || Error::LiftTooSmall { z, multiplicity: mult };
    if z == 0 {
        return Err(err());
    }
    if mult <= 1 {
        return Ok(1);
    }
    if z % 4 == 0 && mult <= 4 {
        return Ok(4);
    }
    (mult as usize..=z).find(|d| z % d == 0).ok_or_else(err)
}

fn build_lifted(base: &BaseMatrix, z: usize, pre: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Stage 1: base multigraph -> simple graph of size (pre*n_c) x (pre*n_v).
    let mut proto_edges = Vec::new();
    for i in 0..base.rows() {
        for j in 0..base.cols() {
            for _ in 0..base.get(i, j) {
                proto_edges.push((i, j));
            }
        }
    }
    let stage1 = assign_shifts(base.rows(), base.cols(), &proto_edges, pre, &mut rng);
    let mut simple_edges = Vec::with_capacity(proto_edges.len() * pre);
    for (&(i, j), &s) in proto_edges.iter().zip(&stage1) {
        for a in 0..pre {
            simple_edges.push((i * pre + a, j * pre + (a + s) % pre));
        }
    }

    // Stage 2: circulant lift of the simple graph.
    let l = z / pre;
    let stage2 = assign_shifts(base.rows() * pre, base.cols() * pre, &simple_edges, l, &mut rng);
    let mut pos = Vec::with_capacity(simple_edges.len() * l);
    for (&(r, c), &s) in simple_edges.iter().zip(&stage2) {
        // row r of the pre-lifted graph is proto row r / pre, copy r % pre
        let row0 = (r / pre) * z + (r % pre) * l;
        let col0 = (c / pre) * z + (c % pre) * l;
        for t in 0..l {
            pos.push((row0 + t, col0 + (t + s) % l));
        }
    }
    SparseMatrix::from_positions(base.rows() * z, base.cols() * z, pos)
}

/// Greedy circulant offset selection over a (multi)graph given as an edge list.
///
/// Lifted edge `(r, c)` with offset `s` joins check copy `t` to variable copy
/// `t + s mod l`. A closed non-backtracking walk `e1 e2 .. e2k` lifts to a
/// cycle exactly when `s1 - s2 + s3 - ... - s2k = 0 mod l`.
fn assign_shifts(
    n_checks: usize,
    n_vars: usize,
    edges: &[(usize, usize)],
    l: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    if l <= 1 {
        return vec![0; edges.len()];
    }
    let mut check_edges = vec![Vec::new(); n_checks];
    let mut var_edges = vec![Vec::new(); n_vars];
    for (e, &(r, c)) in edges.iter().enumerate() {
        check_edges[r].push(e);
        var_edges[c].push(e);
    }
    let mut shift: Vec<Option<usize>> = vec![None; edges.len()];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);

    let li = l as i64;
    let md = |x: i64| x.rem_euclid(li) as usize;
    let mut c4 = vec![0u32; l];
    let mut c6 = vec![0u32; l];
    for &e in &order {
        let (r, c) = edges[e];
        c4.iter_mut().for_each(|x| *x = 0);
        c6.iter_mut().for_each(|x| *x = 0);
        let mut taken = vec![false; l];
        for &e2 in &var_edges[c] {
            let Some(s2) = shift[e2].filter(|_| e2 != e) else { continue };
            let r2 = edges[e2].0;
            if r2 == r {
                // parallel sibling: equal offsets would duplicate edges
                taken[s2] = true;
            }
            for &e3 in &check_edges[r2] {
                let Some(s3) = shift[e3].filter(|_| e3 != e2 && e3 != e) else { continue };
                let c2 = edges[e3].1;
                for &e4 in &var_edges[c2] {
                    let Some(s4) = shift[e4].filter(|_| e4 != e3 && e4 != e) else { continue };
                    let r3 = edges[e4].0;
                    let acc = s2 as i64 - s3 as i64 + s4 as i64;
                    if r3 == r {
                        c4[md(acc)] += 1;
                    }
                    for &e5 in &check_edges[r3] {
                        let Some(s5) = shift[e5].filter(|_| e5 != e4 && e5 != e) else { continue };
                        let c3 = edges[e5].1;
                        for &e6 in &var_edges[c3] {
                            if e6 == e5 || e6 == e || edges[e6].0 != r {
                                continue;
                            }
                            if let Some(s6) = shift[e6] {
                                c6[md(acc - s5 as i64 + s6 as i64)] += 1;
                            }
                        }
                    }
                }
            }
        }
        let best = (0..l)
            .filter(|&s| !taken[s])
            .min_by_key(|&s| (c4[s], c6[s], s))
            .unwrap_or(0);
        shift[e] = Some(best);
    }
    shift.into_iter().map(|s| s.unwrap_or(0)).collect()
}

/// True when two columns share two or more rows (a length-4 cycle), or a
/// row lists the same column twice.
pub fn has_four_cycle(h: &SparseMatrix) -> bool {
    let mut seen = HashSet::new();
    for r in 0..h.rows() {
        let row = h.row(r);
        for a in 0..row.len() {
            for b in a + 1..row.len() {
                let (x, y) = (row[a].min(row[b]), row[a].max(row[b]));
                if x == y || !seen.insert((x, y)) {
                    return true;
                }
            }
        }
    }
    false
}
