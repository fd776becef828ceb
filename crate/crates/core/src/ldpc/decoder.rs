use super::{hard_decision, LLR_CLIP};
use crate::protograph::LiftedCode;

/// Outcome of a belief-propagation run.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderResult {
    pub hard_bits: Vec<u8>,
    /// Natural-log a-posteriori LLRs, positive favours bit 0.
    pub aposteriori_llrs: Vec<f64>,
    pub iterations_used: usize,
    pub syndrome_ok: bool,
}

/// Flooding sum-product decoder with tanh-rule check updates.
///
/// Check-to-variable messages persist between [`BpDecoder::run`] calls until
/// [`BpDecoder::reset`], so an outer demapping loop can resume decoding with
/// fresh channel LLRs.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    app: Vec<f64>,
    hard: Vec<u8>,
    scratch: Vec<f64>,
}

impl BpDecoder {
    pub fn new(code: &LiftedCode) -> Self {
        let h = code.parity_check();
        let max_row = (0..h.rows()).map(|r| h.row_degree(r)).max().unwrap_or(0);
        Self {
            c2v: vec![0.0; h.nnz()],
            v2c: vec![0.0; h.nnz()],
            app: vec![0.0; h.cols()],
            hard: vec![0; h.cols()],
            scratch: vec![0.0; max_row],
        }
    }

    pub fn reset(&mut self) {
        self.c2v.iter_mut().for_each(|x| *x = 0.0);
    }

    /// A-posteriori LLRs of the last run.
    pub fn aposteriori(&self) -> &[f64] {
        &self.app
    }

    pub fn hard_bits(&self) -> &[u8] {
        &self.hard
    }

    /// Sum of incoming check messages for column `c`, i.e. the decoder
    /// extrinsic LLR of that bit.
    pub fn extrinsic(&self, code: &LiftedCode, c: usize) -> f64 {
        code.parity_check().col_edges(c).iter().map(|&e| self.c2v[e as usize]).sum()
    }

    /// Runs up to `max_iter` iterations; returns `(iterations, syndrome_ok)`.
    pub fn run(&mut self, code: &LiftedCode, channel: &[f64], max_iter: usize) -> (usize, bool) {
        let h = code.parity_check();
        assert_eq!(channel.len(), h.cols());
        self.update_app(code, channel);
        if max_iter == 0 {
            return (0, h.syndrome_ok(&self.hard));
        }
        for it in 1..=max_iter {
            // variable -> check
            for c in 0..h.cols() {
                let total = self.app[c];
                for &e in h.col_edges(c) {
                    let e = e as usize;
                    self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
            }
            // check -> variable, tanh rule with prefix/suffix products
            for r in 0..h.rows() {
                let edges = h.row_edges(r);
                let deg = edges.len();
                let t = &mut self.scratch[..deg];
                for (k, e) in edges.clone().enumerate() {
                    t[k] = (0.5 * self.v2c[e]).tanh();
                }
                let mut prefix = 1.0;
                for (k, e) in edges.clone().enumerate() {
                    // store prefix product, fold suffix in the second pass
                    let tk = t[k];
                    self.c2v[e] = prefix;
                    prefix *= tk;
                }
                let mut suffix = 1.0;
                for (k, e) in edges.clone().enumerate().rev() {
                    let p = (self.c2v[e] * suffix).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                    self.c2v[e] = (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                    suffix *= t[k];
                }
            }
            self.update_app(code, channel);
            if h.syndrome_ok(&self.hard) {
                return (it, true);
            }
        }
        (max_iter, false)
    }

    fn update_app(&mut self, code: &LiftedCode, channel: &[f64]) {
        let h = code.parity_check();
        for c in 0..h.cols() {
            let s: f64 = h.col_edges(c).iter().map(|&e| self.c2v[e as usize]).sum();
            self.app[c] = channel[c] + s;
            self.hard[c] = hard_decision(self.app[c]);
        }
    }

    pub fn result(&self, iterations_used: usize, syndrome_ok: bool) -> DecoderResult {
        DecoderResult {
            hard_bits: self.hard.clone(),
            aposteriori_llrs: self.app.clone(),
            iterations_used,
            syndrome_ok,
        }
    }
}
