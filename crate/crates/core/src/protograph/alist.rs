use std::fmt::Write;

use super::SparseMatrix;

/// Renders `h` in MacKay's alist format (1-based indices, zero padded).
pub fn write_alist(h: &SparseMatrix) -> String {
    let mut out = String::new();
    let col_deg: Vec<usize> = (0..h.cols()).map(|c| h.col_degree(c)).collect();
    let row_deg: Vec<usize> = (0..h.rows()).map(|r| h.row_degree(r)).collect();
    let max_c = col_deg.iter().copied().max().unwrap_or(0);
    let max_r = row_deg.iter().copied().max().unwrap_or(0);

    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    writeln!(out, "{} {}", h.cols(), h.rows()).unwrap();
    writeln!(out, "{max_c} {max_r}").unwrap();
    writeln!(out, "{}", join(&mut col_deg.iter().copied())).unwrap();
    writeln!(out, "{}", join(&mut row_deg.iter().copied())).unwrap();
    for c in 0..h.cols() {
        let mut rows: Vec<usize> = h.col_edges(c).iter().map(|&e| h.edge_row(e as usize) + 1).collect();
        rows.resize(max_c, 0);
        writeln!(out, "{}", join(&mut rows.into_iter())).unwrap();
    }
    for r in 0..h.rows() {
        let mut cols: Vec<usize> = h.row(r).iter().map(|&c| c as usize + 1).collect();
        cols.resize(max_r, 0);
        writeln!(out, "{}", join(&mut cols.into_iter())).unwrap();
    }
    out
}
