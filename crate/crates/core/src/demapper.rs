//! Soft GSM demapper (max-log, optionally log-MAP) and a brute-force oracle.

use serde::{Deserialize, Serialize};

use crate::channel::GainMatrix;
use crate::error::{Error, Result};
use crate::gsm::GsmConstellation;
use crate::ldpc::LLR_CLIP;

/// Largest `rho` the brute-force oracle accepts.
pub const ORACLE_MAX_RHO: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemapMode {
    #[default]
    MaxLog,
    LogMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    pub apriori: Vec<f64>,
    pub aposteriori: Vec<f64>,
    pub extrinsic: Vec<f64>,
}

#[inline]
fn noise_scale(sigma: f64) -> f64 {
    let s = if sigma.is_finite() { sigma.max(1e-150) } else { sigma };
    2.0 * s * s
}

#[inline]
fn finish(diff: f64) -> f64 {
    if diff.is_nan() {
        0.0
    } else {
        diff.clamp(-LLR_CLIP, LLR_CLIP)
    }
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Demapper bound to one constellation and one gain matrix, with the noiseless
/// received points `H x` and label bits precomputed.
#[derive(Debug, Clone)]
pub struct Demapper {
    rho: usize,
    n_r: usize,
    mode: DemapMode,
    points: Vec<f64>,
    bits: Vec<u8>,
}

impl Demapper {
    pub fn new(constellation: &GsmConstellation, h: &GainMatrix) -> Self {
        Self::with_mode(constellation, h, DemapMode::MaxLog)
    }

    pub fn with_mode(constellation: &GsmConstellation, h: &GainMatrix, mode: DemapMode) -> Self {
        let rho = constellation.rho();
        let n_r = h.n_r();
        let size = constellation.size();
        let mut points = vec![0.0; size * n_r];
        let mut bits = vec![0u8; size * rho];
        for c in 0..size {
            h.apply_into(constellation.vector(c), &mut points[c * n_r..(c + 1) * n_r]);
            for t in 0..rho {
                bits[c * rho + t] = constellation.label_bit(c, t);
            }
        }
        Self { rho, n_r, mode, points, bits }
    }

    pub fn rho(&self) -> usize {
        self.rho
    }

    pub fn mode(&self) -> DemapMode {
        self.mode
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Number of candidate labels, `2^rho`.
    pub fn size(&self) -> usize {
        1 << self.rho
    }

    #[inline]
    pub fn label_bit(&self, c: usize, t: usize) -> u8 {
        self.bits[c * self.rho + t]
    }

    /// Noiseless received point of label `c`.
    pub fn point(&self, c: usize) -> &[f64] {
        &self.points[c * self.n_r..(c + 1) * self.n_r]
    }

    /// Extrinsic LLRs of one symbol. `metric` is scratch of length `2^rho`.
    pub fn extrinsic_into(&self, y: &[f64], sigma: f64, apriori: &[f64], metric: &mut [f64], out: &mut [f64]) {
        let scale = noise_scale(sigma);
        let size = metric.len();
        for (c, m) in metric.iter_mut().enumerate() {
            let p = &self.points[c * self.n_r..(c + 1) * self.n_r];
            let mut d = 0.0;
            for (yi, pi) in y.iter().zip(p) {
                let e = yi - pi;
                d += e * e;
            }
            *m = -d / scale;
        }
        for t in 0..self.rho {
            let (mut best0, mut best1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for c in 0..size {
                let b = &self.bits[c * self.rho..(c + 1) * self.rho];
                let mut q = 0.0;
                for tau in 0..self.rho {
                    if tau != t {
                        q += (1.0 - b[tau] as f64) * apriori[tau];
                    }
                }
                let v = metric[c] + q;
                let slot = if b[t] == 0 { &mut best0 } else { &mut best1 };
                *slot = match self.mode {
                    DemapMode::MaxLog => slot.max(v),
                    DemapMode::LogMap => log_add(*slot, v),
                };
            }
            out[t] = finish(best0 - best1);
        }
    }

    pub fn demap_symbol(&self, y: &[f64], sigma: f64, apriori: &[f64]) -> Result<LlrFrame> {
        if apriori.len() != self.rho {
            return Err(Error::Length { expected: self.rho, actual: apriori.len() });
        }
        if y.len() != self.n_r {
            return Err(Error::Length { expected: self.n_r, actual: y.len() });
        }
        let mut metric = vec![0.0; 1 << self.rho];
        let mut extrinsic = vec![0.0; self.rho];
        self.extrinsic_into(y, sigma, apriori, &mut metric, &mut extrinsic);
        Ok(frame(apriori, extrinsic))
    }
}

fn frame(apriori: &[f64], extrinsic: Vec<f64>) -> LlrFrame {
    let aposteriori = apriori.iter().zip(&extrinsic).map(|(a, e)| a + e).collect();
    LlrFrame { apriori: apriori.to_vec(), aposteriori, extrinsic }
}

/// Literal enumeration of every label for every bit, recomputing `H x` and
/// the label bits from the table each time.
pub fn brute_force_map(
    constellation: &GsmConstellation,
    h: &GainMatrix,
    y: &[f64],
    sigma: f64,
    apriori: &[f64],
    mode: DemapMode,
) -> Result<LlrFrame> {
    let rho = constellation.rho();
    if rho > ORACLE_MAX_RHO {
        return Err(Error::OracleTooLarge(rho));
    }
    if apriori.len() != rho {
        return Err(Error::Length { expected: rho, actual: apriori.len() });
    }
    let scale = noise_scale(sigma);
    let mut extrinsic = Vec::with_capacity(rho);
    for l in 0..rho {
        let mut best = [f64::NEG_INFINITY; 2];
        for label in 0..constellation.size() {
            let x = constellation.vector(label);
            let mut d = 0.0;
            for i in 0..h.n_r() {
                let mut hx = 0.0;
                for j in 0..h.n_t() {
                    hx += h.get(i, j) * x[j];
                }
                let e = y[i] - hx;
                d += e * e;
            }
            let mut q = 0.0;
            for tau in 0..rho {
                if tau != l {
                    q += (1.0 - constellation.label_bit(label, tau) as f64) * apriori[tau];
                }
            }
            let v = -d / scale + q;
            let b = constellation.label_bit(label, l) as usize;
            best[b] = match mode {
                DemapMode::MaxLog => best[b].max(v),
                DemapMode::LogMap => log_add(best[b], v),
            };
        }
        extrinsic.push(finish(best[0] - best[1]));
    }
    Ok(frame(apriori, extrinsic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_gain_matrix, Geometry};
    use crate::gsm::{ConstellationKind, GsmConfig};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn setup(m: usize, kind: ConstellationKind) -> (GsmConstellation, GainMatrix) {
        let c = GsmConstellation::build(GsmConfig::new(4, 2, m, 1.0).unwrap(), kind).unwrap();
        let h = build_gain_matrix(&Geometry::default()).unwrap();
        (c, h)
    }

    #[test]
    fn noiseless_point_recovers_label() {
        let (c, h) = setup(2, ConstellationKind::SserGsm);
        let d = Demapper::new(&c, &h);
        for label in 0..c.size() {
            let y = d.point(label).to_vec();
            let f = d.demap_symbol(&y, 1e-9, &[0.0; 4]).unwrap();
            for t in 0..4 {
                let bit = c.label_bit(label, t);
                assert_eq!(f.aposteriori[t] > 0.0, bit == 0);
                assert_eq!(f.extrinsic[t].abs(), LLR_CLIP);
            }
        }
    }

    #[test]
    fn huge_sigma_flattens() {
        let (c, h) = setup(2, ConstellationKind::ConGsm);
        let d = Demapper::new(&c, &h);
        let f = d.demap_symbol(&[1e-6; 4], 1e6, &[0.0; 4]).unwrap();
        assert!(f.extrinsic.iter().all(|l| l.abs() < 1e-9));
    }

    #[test]
    fn extrinsic_ignores_own_prior() {
        let (c, h) = setup(2, ConstellationKind::SserGsm);
        let d = Demapper::new(&c, &h);
        let y = [2e-6, 1e-6, 1.5e-6, 3e-6];
        let sigma = 1e-6;
        let mut prior = vec![0.7, -1.2, 0.3, 2.0];
        let a = d.demap_symbol(&y, sigma, &prior).unwrap();
        prior[2] += 5.0;
        let b = d.demap_symbol(&y, sigma, &prior).unwrap();
        assert_eq!(a.extrinsic[2], b.extrinsic[2]);
        for t in 0..4 {
            assert!((a.aposteriori[t] - a.apriori[t] - a.extrinsic[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_agrees_exactly() {
        let mut rng = stream_rng(11, 0);
        for (m, kind) in [
            (2, ConstellationKind::ConGsm),
            (2, ConstellationKind::SserGsm),
            (4, ConstellationKind::ConGsm),
            (4, ConstellationKind::SserGsm),
        ] {
            let (c, h) = setup(m, kind);
            for mode in [DemapMode::MaxLog, DemapMode::LogMap] {
                let d = Demapper::with_mode(&c, &h, mode);
                for _ in 0..200 {
                    let label = rng.random_range(0..c.size());
                    let sigma = rng.random_range(1e-7..2e-6);
                    let mut y = d.point(label).to_vec();
                    y.iter_mut().for_each(|v| *v += rng.random_range(-3.0..3.0) * sigma);
                    let prior: Vec<f64> = (0..c.rho()).map(|_| rng.random_range(-8.0..8.0)).collect();
                    let fast = d.demap_symbol(&y, sigma, &prior).unwrap();
                    let slow = brute_force_map(&c, &h, &y, sigma, &prior, mode).unwrap();
                    assert_eq!(fast, slow);
                }
            }
        }
    }

    #[test]
    fn log_map_within_max_log_bound() {
        let (c, h) = setup(2, ConstellationKind::ConGsm);
        let a = Demapper::with_mode(&c, &h, DemapMode::MaxLog);
        let b = Demapper::with_mode(&c, &h, DemapMode::LogMap);
        let bound = ((c.size() / 2) as f64).ln();
        let mut rng = stream_rng(5, 1);
        for _ in 0..500 {
            let sigma = rng.random_range(1e-7..5e-6);
            let mut y = a.point(rng.random_range(0..c.size())).to_vec();
            y.iter_mut().for_each(|v| *v += rng.random_range(-2.0..2.0) * sigma);
            let prior: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let fa = a.demap_symbol(&y, sigma, &prior).unwrap();
            let fb = b.demap_symbol(&y, sigma, &prior).unwrap();
            for t in 0..4 {
                if fa.extrinsic[t].abs() < LLR_CLIP {
                    assert!((fa.extrinsic[t] - fb.extrinsic[t]).abs() <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn oracle_guard() {
        let c = GsmConstellation::build(GsmConfig::new(8, 4, 8, 1.0).unwrap(), ConstellationKind::ConGsm).unwrap();
        assert!(c.rho() > ORACLE_MAX_RHO);
        let h8 = GainMatrix::from_rows(vec![vec![1.0; 8]; 2]).unwrap();
        let r = brute_force_map(&c, &h8, &[0.0; 2], 1.0, &vec![0.0; c.rho()], DemapMode::MaxLog);
        assert!(matches!(r, Err(Error::OracleTooLarge(_))));
    }
}
