//! Protograph EXIT analysis with the GSM demapper in the loop.

use serde::{Deserialize, Serialize};

use super::ami::{demapper_transfer, PriorMix};
use super::jfunc::{j, j_inv};
use crate::channel::{osnr_to_sigma, GainMatrix};
use crate::demapper::Demapper;
use crate::error::{Error, Result};
use crate::gsm::GsmConstellation;
use crate::protograph::BaseMatrix;
use crate::rng::derive_seed;

/// A-posteriori MI every variable node must reach.
pub const CONVERGED_MI: f64 = 1.0 - 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PexitConfig {
    /// Inner (decoder) iterations per outer round.
    pub g1: usize,
    /// Outer demapper/decoder rounds after the first pass.
    pub g2: usize,
    /// Symbols per demapper transfer probe.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PexitConfig {
    fn default() -> Self {
        Self { g1: 20, g2: 4, samples: 200_000, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PexitOutcome {
    pub converged: bool,
    /// A-posteriori MI per protograph column when the run stopped.
    pub app: Vec<f64>,
    /// Channel MI handed to the transmitted columns in the last round.
    pub i_ch: f64,
    pub outer_rounds: usize,
}

/// Runs the demapper/decoder MI loop at one noise level.
pub fn mpexit_run(base: &BaseMatrix, dem: &Demapper, rho_d: usize, sigma: f64, cfg: &PexitConfig, seed: u64) -> PexitOutcome {
    let (nc, nv) = (base.rows(), base.cols());
    let b = |i: usize, jj: usize| base.get(i, jj) as f64;
    let transmitted: Vec<usize> = (0..nv).filter(|c| !base.punctured().contains(c)).collect();
    let rho_s = dem.rho() - rho_d;
    // CN -> VN MI per protograph edge class
    let mut cv = vec![0.0; nc * nv];
    let mut vc = vec![0.0; nc * nv];
    let mut prior = vec![0.0; nv];
    let mut app = vec![0.0; nv];
    let mut i_ch = 0.0;

    for round in 0..=cfg.g2 {
        let mis: Vec<f64> = transmitted.iter().map(|&c| prior[c]).collect();
        let t = demapper_transfer(dem, rho_d, sigma, &PriorMix::from_mis(&mis), cfg.samples, derive_seed(seed, round as u64));
        i_ch = t.per_bit(rho_d, rho_s);
        let ch: Vec<f64> = (0..nv).map(|c| if base.punctured().contains(&c) { 0.0 } else { j_inv(i_ch) }).collect();

        for _ in 0..cfg.g1 {
            for jj in 0..nv {
                let total: f64 = (0..nc).map(|i| b(i, jj) * j_inv(cv[i * nv + jj]).powi(2)).sum::<f64>() + ch[jj].powi(2);
                for i in 0..nc {
                    if base.get(i, jj) > 0 {
                        let own = j_inv(cv[i * nv + jj]).powi(2);
                        vc[i * nv + jj] = j((total - own).max(0.0).sqrt());
                    }
                }
            }
            for i in 0..nc {
                let total: f64 = (0..nv).map(|jj| b(i, jj) * j_inv(1.0 - vc[i * nv + jj]).powi(2)).sum();
                for jj in 0..nv {
                    if base.get(i, jj) > 0 {
                        let own = j_inv(1.0 - vc[i * nv + jj]).powi(2);
                        cv[i * nv + jj] = 1.0 - j((total - own).max(0.0).sqrt());
                    }
                }
            }
            for (jj, a) in app.iter_mut().enumerate() {
                let s: f64 = (0..nc).map(|i| b(i, jj) * j_inv(cv[i * nv + jj]).powi(2)).sum::<f64>() + ch[jj].powi(2);
                *a = j(s.sqrt());
            }
            if app.iter().all(|&a| a >= CONVERGED_MI) {
                return PexitOutcome { converged: true, app, i_ch, outer_rounds: round };
            }
        }
        for (jj, p) in prior.iter_mut().enumerate() {
            let s: f64 = (0..nc).map(|i| b(i, jj) * j_inv(cv[i * nv + jj]).powi(2)).sum();
            *p = j(s.sqrt()).clamp(0.0, 1.0);
        }
    }
    PexitOutcome { converged: false, app, i_ch, outer_rounds: cfg.g2 }
}

fn probe_seed(seed: u64, osnr_db: f64, rep: u64) -> u64 {
    let key = (osnr_db * 1000.0).round() as i64 as u64;
    derive_seed(derive_seed(seed, key), rep)
}

/// Whether the MI loop converges at `osnr_db`. The code rate entering the
/// OSNR normalisation is the design rate of `base`.
pub fn mpexit_converges(base: &BaseMatrix, constellation: &GsmConstellation, h: &GainMatrix, osnr_db: f64, cfg: &PexitConfig) -> bool {
    let dem = Demapper::new(constellation, h);
    converges_with(base, constellation, &dem, h, osnr_db, cfg, 0)
}

fn converges_with(
    base: &BaseMatrix,
    constellation: &GsmConstellation,
    dem: &Demapper,
    h: &GainMatrix,
    osnr_db: f64,
    cfg: &PexitConfig,
    rep: u64,
) -> bool {
    let sigma = osnr_to_sigma(h, constellation, base.rate(), osnr_db);
    mpexit_run(base, dem, constellation.rho_d(), sigma, cfg, probe_seed(cfg.seed, osnr_db, rep)).converged
}

/// Majority of three independent evaluations (the third only when needed).
fn majority(base: &BaseMatrix, constellation: &GsmConstellation, dem: &Demapper, h: &GainMatrix, osnr_db: f64, cfg: &PexitConfig) -> bool {
    let a = converges_with(base, constellation, dem, h, osnr_db, cfg, 0);
    let b = converges_with(base, constellation, dem, h, osnr_db, cfg, 1);
    if a == b {
        return a;
    }
    converges_with(base, constellation, dem, h, osnr_db, cfg, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub threshold_db: f64,
    /// `(osnr_db, converged)` for every majority probe, in order.
    pub probes: Vec<(f64, bool)>,
}

/// Bisection on a 0.01 dB grid for the lowest converging OSNR.
pub fn find_threshold(
    base: &BaseMatrix,
    constellation: &GsmConstellation,
    h: &GainMatrix,
    cfg: &PexitConfig,
    osnr_lo: f64,
    osnr_hi: f64,
) -> Result<ThresholdResult> {
    let dem = Demapper::new(constellation, h);
    let mut probes = Vec::new();
    let probe = |k: i64, probes: &mut Vec<(f64, bool)>| {
        let db = k as f64 / 100.0;
        let ok = majority(base, constellation, &dem, h, db, cfg);
        probes.push((db, ok));
        ok
    };
    let (mut lo, mut hi) = ((osnr_lo * 100.0).round() as i64, (osnr_hi * 100.0).round() as i64);
    let lo_ok = probe(lo, &mut probes);
    let hi_ok = probe(hi, &mut probes);
    if lo >= hi || lo_ok || !hi_ok {
        return Err(Error::InvalidBracket { lo: osnr_lo, hi: osnr_hi, lo_ok, hi_ok });
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if probe(mid, &mut probes) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult { threshold_db: hi as f64 / 100.0, probes })
}
