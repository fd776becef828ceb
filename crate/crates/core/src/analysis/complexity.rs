//! Real-addition / real-multiplication counts of the iterative receiver.

use serde::{Deserialize, Serialize};

use crate::protograph::LiftedCode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityInputs {
    /// Variable nodes.
    pub n: f64,
    /// Check nodes.
    pub m: f64,
    /// Punctured variable nodes.
    pub p: f64,
    pub avg_vn_degree: f64,
    pub avg_cn_degree: f64,
    /// Average inner iterations.
    pub t1: f64,
    /// Average outer iterations.
    pub t2: f64,
    pub rho: u32,
    pub n_t: f64,
    pub n_r: f64,
}

impl ComplexityInputs {
    /// Graph quantities taken from a lifted code.
    pub fn for_code(code: &LiftedCode, t1: f64, t2: f64, rho: u32, n_t: usize, n_r: usize) -> Self {
        let h = code.parity_check();
        let edges = h.nnz() as f64;
        Self {
            n: code.n() as f64,
            m: code.m() as f64,
            p: code.punctured_bits().len() as f64,
            avg_vn_degree: edges / code.n() as f64,
            avg_cn_degree: edges / code.m() as f64,
            t1,
            t2,
            rho,
            n_t: n_t as f64,
            n_r: n_r as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityEstimate {
    pub demap_ra: f64,
    pub demap_rm: f64,
    pub decode_ra: f64,
    pub decode_rm: f64,
    pub ra: f64,
    pub rm: f64,
    pub inputs: ComplexityInputs,
}

pub fn estimate_complexity(x: &ComplexityInputs) -> ComplexityEstimate {
    let q = 2f64.powi(x.rho as i32);
    let rho = x.rho as f64;
    let demap_ra = (x.n - x.p) * (q * ((x.n_t + 1.0) * x.n_r + 2.0 * rho - 4.0) + 2.0) * x.t2;
    let demap_rm = q * (x.n - x.p) * ((x.n_t + 1.0) * x.n_r + rho + 2.0) * x.t2;
    let decode_ra = x.m * (x.avg_vn_degree - 1.0) * x.t1;
    let decode_rm = 2.0 * x.n * x.avg_cn_degree * x.t1;
    ComplexityEstimate {
        demap_ra,
        demap_rm,
        decode_ra,
        decode_rm,
        ra: demap_ra + decode_ra,
        rm: demap_rm + decode_rm,
        inputs: *x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(t1: f64, t2: f64) -> ComplexityInputs {
        ComplexityInputs {
            n: 6300.0,
            m: 2700.0,
            p: 900.0,
            avg_vn_degree: 3.0,
            avg_cn_degree: 7.0,
            t1,
            t2,
            rho: 4,
            n_t: 4.0,
            n_r: 4.0,
        }
    }

    #[test]
    fn zero_iterations_cost_nothing() {
        let e = estimate_complexity(&inputs(0.0, 0.0));
        assert_eq!((e.ra, e.rm), (0.0, 0.0));
    }

    #[test]
    fn coefficients() {
        let e = estimate_complexity(&inputs(1.0, 1.0));
        // (n - p) [16 (5*4 + 8 - 4) + 2] and 16 (n - p) [5*4 + 4 + 2]
        assert_eq!(e.demap_ra, 5400.0 * 386.0);
        assert_eq!(e.demap_rm, 16.0 * 5400.0 * 26.0);
        assert_eq!(e.decode_ra, 2700.0 * 2.0);
        assert_eq!(e.decode_rm, 2.0 * 6300.0 * 7.0);
    }

    #[test]
    fn linear_in_each_iteration_count() {
        let base = estimate_complexity(&inputs(3.0, 2.0));
        let t1 = estimate_complexity(&inputs(6.0, 2.0));
        let t2 = estimate_complexity(&inputs(3.0, 4.0));
        assert_eq!(t1.decode_ra, 2.0 * base.decode_ra);
        assert_eq!(t1.demap_ra, base.demap_ra);
        assert_eq!(t2.demap_rm, 2.0 * base.demap_rm);
        assert_eq!(t2.decode_rm, base.decode_rm);
    }
}
