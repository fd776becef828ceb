//! Monte Carlo AMI of a GSM constellation and the demapper transfer function.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::jfunc::j_inv;
use super::{chunked, softplus_neg_log2, Moments};
use crate::demapper::Demapper;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmiEstimate {
    pub i_spd: f64,
    pub i_sid: f64,
    pub i_bicgsm: f64,
    pub samples: usize,
    pub se_spd: f64,
    pub se_sid: f64,
    pub se_bicgsm: f64,
}

#[inline]
fn log_sum_exp(vals: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + vals.map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[inline]
fn received<R: Rng>(dem: &Demapper, label: usize, sigma: f64, rng: &mut R, y: &mut [f64]) {
    for (yi, p) in y.iter_mut().zip(dem.point(label)) {
        let n: f64 = rng.sample(StandardNormal);
        *yi = p + sigma * n;
    }
}

/// Per-bit AMI of the SpD bits (first `rho_d`) and SiD bits (the rest).
pub fn estimate_ami(dem: &Demapper, rho_d: usize, sigma: f64, samples: usize, seed: u64) -> AmiEstimate {
    let rho = dem.rho();
    let parts = chunked(samples, seed, |rng, n| {
        let mut y = vec![0.0; dem.n_r()];
        let mut metric = vec![0.0; dem.size()];
        let (mut md, mut ms, mut mt) = (Moments::default(), Moments::default(), Moments::default());
        let scale = 2.0 * sigma * sigma;
        for _ in 0..n {
            let label = rng.random_range(0..dem.size());
            received(dem, label, sigma, rng, &mut y);
            for (c, m) in metric.iter_mut().enumerate() {
                let d: f64 = y.iter().zip(dem.point(c)).map(|(a, b)| (a - b) * (a - b)).sum();
                *m = -d / scale;
            }
            let all = log_sum_exp(metric.iter().copied());
            let (mut ld, mut ls) = (0.0, 0.0);
            for t in 0..rho {
                let b = dem.label_bit(label, t);
                let part = log_sum_exp(
                    metric.iter().enumerate().filter(|&(c, _)| dem.label_bit(c, t) == b).map(|(_, &m)| m),
                );
                let loss = (all - part) / std::f64::consts::LN_2;
                if t < rho_d {
                    ld += loss;
                } else {
                    ls += loss;
                }
            }
            md.push(rho_d as f64 - ld);
            ms.push((rho - rho_d) as f64 - ls);
            mt.push(rho as f64 - ld - ls);
        }
        (md, ms, mt)
    });
    let (md, ms, mt) = parts
        .iter()
        .fold(Default::default(), |(a, b, c): (Moments, Moments, Moments), (x, y, z)| {
            (a.merge(x), b.merge(y), c.merge(z))
        });
    let (i_spd, i_sid) = (md.mean(), ms.mean());
    AmiEstimate {
        i_spd,
        i_sid,
        i_bicgsm: i_spd + i_sid,
        samples,
        se_spd: md.std_err(),
        se_sid: ms.std_err(),
        se_bicgsm: mt.std_err(),
    }
}

/// A-priori LLR model: each coded bit takes its prior from one component,
/// chosen uniformly, with component `k` a consistent Gaussian of width
/// `sigmas[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMix {
    sigmas: Vec<f64>,
}

impl PriorMix {
    pub fn uniform(mi: f64) -> Self {
        Self { sigmas: vec![j_inv(mi)] }
    }

    pub fn from_mis(mis: &[f64]) -> Self {
        assert!(!mis.is_empty(), "prior mixture needs a component");
        Self { sigmas: mis.iter().map(|&m| j_inv(m)).collect() }
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    #[inline]
    fn draw<R: Rng>(&self, bit: u8, rng: &mut R) -> f64 {
        let s = if self.sigmas.len() == 1 { self.sigmas[0] } else { self.sigmas[rng.random_range(0..self.sigmas.len())] };
        let n: f64 = rng.sample(StandardNormal);
        let sign = 1.0 - 2.0 * bit as f64;
        sign * s * s / 2.0 + s * n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferPoint {
    /// Extrinsic MI per SpD bit.
    pub i_d: f64,
    /// Extrinsic MI per SiD bit.
    pub i_s: f64,
    pub se_d: f64,
    pub se_s: f64,
}

impl TransferPoint {
    /// Average extrinsic MI per coded bit.
    pub fn per_bit(&self, rho_d: usize, rho_s: usize) -> f64 {
        (self.i_d * rho_d as f64 + self.i_s * rho_s as f64) / (rho_d + rho_s) as f64
    }
}

/// Extrinsic MI at the demapper output for random balanced labels and
/// a-priori LLRs drawn from `prior`.
pub fn demapper_transfer(dem: &Demapper, rho_d: usize, sigma: f64, prior: &PriorMix, samples: usize, seed: u64) -> TransferPoint {
    let rho = dem.rho();
    let parts = chunked(samples, seed, |rng, n| {
        let mut y = vec![0.0; dem.n_r()];
        let mut metric = vec![0.0; dem.size()];
        let mut la = vec![0.0; rho];
        let mut le = vec![0.0; rho];
        let (mut md, mut ms) = (Moments::default(), Moments::default());
        for _ in 0..n {
            let label = rng.random_range(0..dem.size());
            received(dem, label, sigma, rng, &mut y);
            for (t, l) in la.iter_mut().enumerate() {
                *l = prior.draw(dem.label_bit(label, t), rng);
            }
            dem.extrinsic_into(&y, sigma, &la, &mut metric, &mut le);
            let (mut sd, mut ss) = (0.0, 0.0);
            for t in 0..rho {
                let sign = 1.0 - 2.0 * dem.label_bit(label, t) as f64;
                let mi = 1.0 - softplus_neg_log2(sign * le[t]);
                if t < rho_d {
                    sd += mi;
                } else {
                    ss += mi;
                }
            }
            md.push(sd / rho_d.max(1) as f64);
            ms.push(ss / (rho - rho_d).max(1) as f64);
        }
        (md, ms)
    });
    let (md, ms) = parts
        .iter()
        .fold(Default::default(), |(a, b): (Moments, Moments), (x, y)| (a.merge(x), b.merge(y)));
    TransferPoint {
        i_d: md.mean().clamp(0.0, 1.0),
        i_s: ms.mean().clamp(0.0, 1.0),
        se_d: md.std_err(),
        se_s: ms.std_err(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_gain_matrix, osnr_to_sigma, Geometry};
    use crate::gsm::{ConstellationKind, GsmConfig, GsmConstellation};

    fn setup(kind: ConstellationKind) -> (GsmConstellation, Demapper, f64) {
        let c = GsmConstellation::build(GsmConfig::new(4, 2, 2, 1.0).unwrap(), kind).unwrap();
        let h = build_gain_matrix(&Geometry::default()).unwrap();
        let d = Demapper::new(&c, &h);
        let s = osnr_to_sigma(&h, &c, 0.5, 0.0);
        (c, d, s)
    }

    #[test]
    fn ami_limits() {
        let (_, d, s0) = setup(ConstellationKind::SserGsm);
        let lo = estimate_ami(&d, 2, s0 * 1e4, 20_000, 1);
        assert!(lo.i_bicgsm.abs() < 3.0 * lo.se_bicgsm + 1e-3, "{lo:?}");
        let hi = estimate_ami(&d, 2, s0 * 1e-3, 20_000, 1);
        assert!((hi.i_bicgsm - 4.0).abs() < 3.0 * hi.se_bicgsm + 1e-9, "{hi:?}");
        assert_eq!(hi.i_bicgsm, hi.i_spd + hi.i_sid);
        assert!(hi.i_spd <= 2.0 + 1e-12 && hi.i_sid <= 2.0 + 1e-12);
    }

    #[test]
    fn ami_is_reproducible() {
        let (_, d, s0) = setup(ConstellationKind::ConGsm);
        assert_eq!(estimate_ami(&d, 2, s0, 5000, 9), estimate_ami(&d, 2, s0, 5000, 9));
    }

    #[test]
    fn transfer_grows_with_prior() {
        let (_, d, s0) = setup(ConstellationKind::SserGsm);
        let sigma = s0 / 10f64.powf(0.45);
        let mut prev: Option<TransferPoint> = None;
        for mi in [0.0, 0.25, 0.5, 0.75, 0.999] {
            let t = demapper_transfer(&d, 2, sigma, &PriorMix::uniform(mi), 20_000, 3);
            if let Some(p) = prev {
                let a = t.per_bit(2, 2);
                let b = p.per_bit(2, 2);
                assert!(a >= b - 2.0 * (t.se_d + t.se_s), "{a} < {b}");
            }
            prev = Some(t);
        }
    }

    #[test]
    fn perfect_prior_at_high_snr() {
        let (_, d, s0) = setup(ConstellationKind::SserGsm);
        let t = demapper_transfer(&d, 2, s0 / 100.0, &PriorMix::uniform(1.0), 10_000, 4);
        assert!(t.per_bit(2, 2) >= 0.99, "{t:?}");
    }
}
