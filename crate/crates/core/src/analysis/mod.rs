//! Information-theoretic analysis: AMI, demapper transfer, MPEXIT thresholds
//! and operation counts.

pub mod ami;
pub mod complexity;
pub mod jfunc;
pub mod pexit;

pub use ami::{demapper_transfer, estimate_ami, AmiEstimate, PriorMix, TransferPoint};
pub use complexity::{estimate_complexity, ComplexityEstimate, ComplexityInputs};
pub use jfunc::{j, j_inv};
pub use pexit::{find_threshold, mpexit_converges, mpexit_run, PexitConfig, PexitOutcome, ThresholdResult};

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rng::stream_rng;

/// Samples per random stream. Fixed so results do not depend on thread count.
pub(crate) const CHUNK: usize = 4096;

/// Runs `f(rng, n)` over fixed-size chunks of `samples`, chunk `i` drawing
/// from stream `i` of `seed`. Results come back in chunk order.
pub(crate) fn chunked<T: Send>(samples: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng, usize) -> T + Sync) -> Vec<T> {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let n = CHUNK.min(samples - i * CHUNK);
            f(&mut stream_rng(seed, i as u64), n)
        })
        .collect()
}

/// `log2(1 + e^{-x})` without overflow.
#[inline]
pub(crate) fn softplus_neg_log2(x: f64) -> f64 {
    let v = if x > 0.0 { (-x).exp().ln_1p() } else { -x + x.exp().ln_1p() };
    v / std::f64::consts::LN_2
}

/// Running mean and standard error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, o: &Self) -> Self {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0.0 {
            0.0
        } else {
            self.sum / self.n
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        let m = self.mean();
        let var = ((self.sum_sq / self.n - m * m) * self.n / (self.n - 1.0)).max(0.0);
        (var / self.n).sqrt()
    }
}
