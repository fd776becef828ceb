//! Protograph base matrices and their lifted parity-check codes.
//!
//! A [`BaseMatrix`] stores the edge multiplicities `b_ij` between check row
//! `i` and variable column `j`, together with the set of punctured columns.
//! Column indices are 0-based throughout: the punctured degree-6 node of the
//! AR4JA protograph and the degree-1 node of the EARA protograph are both
//! column `1`.

mod alist;
mod lift;

pub use alist::write_alist;
pub use lift::{has_four_cycle, lift, LiftedCode, SparseMatrix};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge-multiplicity matrix of a protograph plus its puncturing mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
    punctured: BTreeSet<usize>,
    extension_count: usize,
}

/// JSON form: `{"rows", "cols", "entries": [[..]], "punctured", "e"}`.
#[derive(Serialize, Deserialize)]
struct BaseMatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<u8>>,
    punctured: Vec<usize>,
    e: usize,
}

impl BaseMatrix {
    /// Builds and validates a base matrix from its rows.
    pub fn new(entries: Vec<Vec<u8>>, punctured: &[usize], extension_count: usize) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidBaseMatrix("ragged rows".into()));
        }
        let m = Self {
            rows,
            cols,
            entries: entries.into_iter().flatten().collect(),
            punctured: punctured.iter().copied().collect(),
            extension_count,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidBaseMatrix("empty matrix".into()));
        }
        if let Some(i) = (0..self.rows).find(|&i| self.row_degree(i) == 0) {
            return Err(Error::InvalidBaseMatrix(format!("row {i} has no edges")));
        }
        if let Some(j) = (0..self.cols).find(|&j| self.col_degree(j) == 0) {
            return Err(Error::InvalidBaseMatrix(format!("column {j} has no edges")));
        }
        if let Some(&p) = self.punctured.iter().find(|&&p| p >= self.cols) {
            return Err(Error::InvalidBaseMatrix(format!("punctured column {p} out of range")));
        }
        if self.cols <= self.rows || self.punctured.len() >= self.cols {
            return Err(Error::InvalidBaseMatrix("design rate outside (0,1)".into()));
        }
        let r = self.rate();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidBaseMatrix(format!("design rate {r} outside (0,1)")));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn extension_count(&self) -> usize {
        self.extension_count
    }

    pub fn punctured(&self) -> &BTreeSet<usize> {
        &self.punctured
    }

    pub fn is_punctured(&self, col: usize) -> bool {
        self.punctured.contains(&col)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_degree(&self, row: usize) -> usize {
        self.row(row).iter().map(|&b| b as usize).sum()
    }

    pub fn col_degree(&self, col: usize) -> usize {
        (0..self.rows).map(|i| self.get(i, col) as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().map(|&b| b as usize).sum()
    }

    pub fn max_multiplicity(&self) -> u8 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    /// Number of transmitted (non-punctured) columns.
    pub fn transmitted_cols(&self) -> usize {
        self.cols - self.punctured.len()
    }

    /// Design rate `(n_v - n_c) / (n_v - |punctured|)` as a reduced fraction.
    pub fn rate_fraction(&self) -> (usize, usize) {
        let num = self.cols - self.rows;
        let den = self.transmitted_cols();
        let g = gcd(num, den);
        (num / g, den / g)
    }

    pub fn rate(&self) -> f64 {
        let (n, d) = self.rate_fraction();
        n as f64 / d as f64
    }

    /// Copy of this matrix with a different puncturing set.
    pub fn with_punctured(&self, punctured: &[usize]) -> Result<Self> {
        let mut m = self.clone();
        m.punctured = punctured.iter().copied().collect();
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        let j = BaseMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
            punctured: self.punctured.iter().copied().collect(),
            e: self.extension_count,
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: BaseMatrixJson = serde_json::from_str(s)?;
        let m = Self::new(j.entries, &j.punctured, j.e)?;
        if m.rows != j.rows || m.cols != j.cols {
            return Err(Error::InvalidBaseMatrix("declared shape does not match entries".into()));
        }
        Ok(m)
    }
}

impl fmt::Display for BaseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(u8::to_string).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        write!(f, "punctured: {:?}", self.punctured)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn extended(prefix: [[u8; 5]; 3], ext: [[u8; 2]; 3], e: usize, punctured: usize) -> BaseMatrix {
    let entries = (0..3)
        .map(|i| {
            let mut row = prefix[i].to_vec();
            for _ in 0..e {
                row.extend_from_slice(&ext[i]);
            }
            row
        })
        .collect();
    BaseMatrix::new(entries, &[punctured], e).expect("family matrices are valid")
}

/// Rate-`(e+1)/(e+2)` AR4JA protograph; column 1 (degree 6) punctured.
pub fn make_ar4ja(e: usize) -> BaseMatrix {
    extended(
        [[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 2, 1]],
        [[0, 0], [1, 3], [3, 1]],
        e,
        1,
    )
}

/// Rate-`(e+1)/(e+2)` AR4A protograph: AR4JA without the jagged edge, so the
/// accumulator has two degree-2 columns. Column 1 punctured.
pub fn make_ar4a(e: usize) -> BaseMatrix {
    extended(
        [[1, 2, 0, 0, 0], [0, 3, 1, 1, 1], [0, 1, 2, 1, 1]],
        [[0, 0], [1, 3], [3, 1]],
        e,
        1,
    )
}

/// Rate-`(e+1)/(e+2)` EARA protograph; column 1 (degree 1) punctured.
pub fn make_eara(e: usize) -> BaseMatrix {
    extended(
        [[1, 1, 1, 0, 0], [3, 0, 2, 1, 1], [1, 0, 1, 2, 1]],
        [[0, 0], [2, 1], [1, 2]],
        e,
        1,
    )
}

/// `(dv, dc)`-regular protograph with `cols` variable nodes and
/// `cols * dv / dc` check nodes.
///
/// Edges are dealt to rows round-robin in column order, so every row receives
/// exactly `dc` edges and every column `dv`. With `cols == dc` and `dv` rows
/// this is the all-ones `dv x dc` matrix.
pub fn make_regular(dv: usize, dc: usize, cols: usize) -> Result<BaseMatrix> {
    let bad = || Error::InconsistentRegular { dv, dc, cols };
    if dv == 0 || dc == 0 || cols == 0 || (dv * cols) % dc != 0 {
        return Err(bad());
    }
    let rows = dv * cols / dc;
    if rows >= cols {
        return Err(bad());
    }
    let mut entries = vec![vec![0u8; cols]; rows];
    for t in 0..dv * cols {
        let (row, col) = (t % rows, t / dv);
        entries[row][col] = entries[row][col].checked_add(1).ok_or_else(bad)?;
    }
    BaseMatrix::new(entries, &[], 0)
}

/// Same matrix with the puncture moved to the lowest-degree column
/// (lowest index on ties).
pub fn make_improved_variant(base: &BaseMatrix) -> BaseMatrix {
    let col = (0..base.cols())
        .min_by_key(|&j| (base.col_degree(j), j))
        .expect("base matrix has columns");
    let mut m = base.clone();
    m.punctured = std::iter::once(col).collect();
    m
}

/// Outcome of the structural design rules for a rate-1/2 mother matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    /// (a) there is a punctured column and every punctured column has degree 1.
    pub punctured_degree_one: bool,
    /// (b) exactly one column of degree 2.
    pub single_degree_two: bool,
    /// (c) no entry exceeds 3 parallel edges.
    pub max_parallel_three: bool,
    /// (d) column 0 has strictly larger degree than columns 2 and 3.
    pub first_column_dominant: bool,
}

impl DesignReport {
    pub fn all_pass(&self) -> bool {
        self.punctured_degree_one
            && self.single_degree_two
            && self.max_parallel_three
            && self.first_column_dominant
    }
}

pub fn check_design_constraints(base: &BaseMatrix) -> DesignReport {
    let nonzero = base.edge_count() > 0;
    let deg: Vec<usize> = (0..base.cols()).map(|j| base.col_degree(j)).collect();
    DesignReport {
        punctured_degree_one: !base.punctured().is_empty()
            && base.punctured().iter().all(|&p| deg.get(p) == Some(&1)),
        single_degree_two: deg.iter().filter(|&&d| d == 2).count() == 1,
        max_parallel_three: nonzero && base.max_multiplicity() <= 3,
        first_column_dominant: deg.len() >= 4 && deg[0] > deg[2] && deg[0] > deg[3],
    }
}

/// Named code families used by experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeFamily {
    Ar4ja,
    /// AR4JA with the lowest-degree column punctured instead.
    Iar4ja,
    Ar4a,
    Iar4a,
    Eara,
    /// `(dv, dc)`-regular, realized as the all-ones `dv x dc` protograph.
    Regular { dv: usize, dc: usize },
}

impl CodeFamily {
    /// Base matrix for this family. `e` is ignored for regular codes.
    pub fn base_matrix(&self, e: usize) -> Result<BaseMatrix> {
        match *self {
            Self::Ar4ja => Ok(make_ar4ja(e)),
            Self::Iar4ja => Ok(make_improved_variant(&make_ar4ja(e))),
            Self::Ar4a => Ok(make_ar4a(e)),
            Self::Iar4a => Ok(make_improved_variant(&make_ar4a(e))),
            Self::Eara => Ok(make_eara(e)),
            Self::Regular { dv, dc } => make_regular(dv, dc, dc),
        }
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ar4ja => f.write_str("ar4ja"),
            Self::Iar4ja => f.write_str("iar4ja"),
            Self::Ar4a => f.write_str("ar4a"),
            Self::Iar4a => f.write_str("iar4a"),
            Self::Eara => f.write_str("eara"),
            Self::Regular { dv, dc } => write!(f, "regular-{dv}-{dc}"),
        }
    }
}

impl FromStr for CodeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ar4ja" => Ok(Self::Ar4ja),
            "iar4ja" => Ok(Self::Iar4ja),
            "ar4a" => Ok(Self::Ar4a),
            "iar4a" => Ok(Self::Iar4a),
            "eara" => Ok(Self::Eara),
            other => {
                let parts: Vec<&str> = other.split('-').collect();
                match parts.as_slice() {
                    ["regular", dv, dc] => {
                        let parse = |x: &str| {
                            x.parse::<usize>()
                                .map_err(|_| Error::InvalidBaseMatrix(format!("bad degree '{x}'")))
                        };
                        Ok(Self::Regular { dv: parse(dv)?, dc: parse(dc)? })
                    }
                    _ => Err(Error::InvalidBaseMatrix(format!("unknown code family '{s}'"))),
                }
            }
        }
    }
}

impl Serialize for CodeFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
