//! Coded GSM link: encode, interleave, map, channel, iterative demap/decode.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_gain_matrix, osnr_to_sigma, ChannelModel, GainMatrix, Geometry};
use crate::demapper::{DemapMode, Demapper};
use crate::error::{Error, Result};
use crate::gsm::{ConstellationKind, GsmConfig, GsmConstellation};
use crate::ldpc::{encode, BpDecoder, LLR_CLIP};
use crate::protograph::{lift, CodeFamily, LiftedCode};
use crate::rng::{derive_seed, stream_rng};

const LIFT_LABEL: u64 = 0x6c69_6674;
const INTERLEAVER_LABEL: u64 = 0x696e_746c;
/// Frames evaluated in parallel before the stop rule is checked.
const BATCH: usize = 32;

/// Random permutation with its inverse. `interleave` reads `out[i] = x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl Interleaver {
    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inv
    }

    pub fn interleave<T: Copy>(&self, x: &[T], out: &mut [T]) {
        for (o, &p) in out.iter_mut().zip(&self.perm) {
            *o = x[p];
        }
    }

    pub fn deinterleave<T: Copy>(&self, y: &[T], out: &mut [T]) {
        for (o, &q) in out.iter_mut().zip(&self.inv) {
            *o = y[q];
        }
    }
}

/// Lift seed a link derives from its master seed.
pub fn lift_seed(master: u64) -> u64 {
    derive_seed(master, LIFT_LABEL)
}

pub fn make_interleaver(length: usize, seed: u64) -> Interleaver {
    let mut perm: Vec<usize> = (0..length).collect();
    perm.shuffle(&mut stream_rng(seed, 0));
    let mut inv = vec![0; length];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Interleaver { perm, inv }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub family: CodeFamily,
    /// Extension count (rate `(e+1)/(e+2)` for the AR families).
    #[serde(default)]
    pub e: usize,
    /// Lift factor.
    pub z: usize,
    /// Expected information length, checked against `z`.
    #[serde(default)]
    pub info_bits: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub max_frames: u64,
    pub min_frame_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_frames: 10_000, min_frame_errors: 100, max_bits: 10_000_000 }
    }
}

impl StopRule {
    fn done(&self, s: &ErrorStats) -> bool {
        s.frames >= self.max_frames || s.frame_errors >= self.min_frame_errors || s.bits >= self.max_bits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub code: CodeSpec,
    pub kind: ConstellationKind,
    pub gsm: GsmConfig,
    #[serde(default)]
    pub geometry: Geometry,
    #[serde(default)]
    pub demap_mode: DemapMode,
    pub osnr_db: Vec<f64>,
    pub g1: usize,
    pub g2: usize,
    #[serde(default)]
    pub stop: StopRule,
    pub seed: u64,
}

impl LinkConfig {
    /// Every static problem of the configuration, empty when valid.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if let Err(e) = self.gsm.validate() {
            errs.push(e.to_string());
        }
        if self.gsm.n_t != self.geometry.n_t {
            errs.push(format!("gsm N_t={} differs from geometry N_t={}", self.gsm.n_t, self.geometry.n_t));
        }
        if let Err(e) = self.geometry.validate() {
            errs.push(e.to_string());
        }
        if self.code.z == 0 {
            errs.push("lift factor Z must be positive".into());
        }
        match self.code.family.base_matrix(self.code.e) {
            Err(e) => errs.push(e.to_string()),
            Ok(base) => {
                let k = self.code.z * (base.cols() - base.rows());
                if let Some(info) = self.code.info_bits {
                    if info != k {
                        errs.push(format!(
                            "info length {info} does not match Z={} x {} information columns = {k}",
                            self.code.z,
                            base.cols() - base.rows()
                        ));
                    }
                }
                let tx = self.code.z * base.transmitted_cols();
                if self.gsm.validate().is_ok() && tx % self.gsm.rho() != 0 {
                    errs.push(format!("transmitted length {tx} is not divisible by rho={}", self.gsm.rho()));
                }
            }
        }
        if self.osnr_db.is_empty() {
            errs.push("OSNR grid is empty".into());
        }
        if self.osnr_db.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("OSNR grid must be strictly increasing".into());
        }
        if self.osnr_db.iter().any(|x| !x.is_finite()) {
            errs.push("OSNR grid contains a non-finite value".into());
        }
        if self.stop.max_frames == 0 {
            errs.push("frame budget must be positive".into());
        }
        errs
    }
}

/// Everything a frame needs, built once per configuration and shared.
#[derive(Debug, Clone)]
pub struct LinkSystem {
    code: LiftedCode,
    constellation: GsmConstellation,
    h: GainMatrix,
    demapper: Demapper,
    interleaver: Interleaver,
    g1: usize,
    g2: usize,
}

/// Outcome of one frame through the receiver loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    pub info_hat: Vec<u8>,
    pub bit_errors: usize,
    pub syndrome_ok: bool,
    /// Decoder iterations summed over all outer passes.
    pub inner_iterations: usize,
    /// Demapper passes, `1..=G2+1`.
    pub outer_iterations: usize,
}

impl DecodedFrame {
    pub fn frame_error(&self) -> bool {
        self.bit_errors > 0
    }
}

impl LinkSystem {
    pub fn new(cfg: &LinkConfig) -> Result<Self> {
        let errs = cfg.validate();
        if !errs.is_empty() {
            return Err(Error::InvalidLink(errs.join("; ")));
        }
        let base = cfg.code.family.base_matrix(cfg.code.e)?;
        let code = lift(&base, cfg.code.z, lift_seed(cfg.seed))?;
        let constellation = GsmConstellation::build(cfg.gsm, cfg.kind)?;
        let h = build_gain_matrix(&cfg.geometry)?;
        let demapper = Demapper::with_mode(&constellation, &h, cfg.demap_mode);
        let interleaver = make_interleaver(code.transmitted_len(), derive_seed(cfg.seed, INTERLEAVER_LABEL));
        Ok(Self { code, constellation, h, demapper, interleaver, g1: cfg.g1, g2: cfg.g2 })
    }

    pub fn code(&self) -> &LiftedCode {
        &self.code
    }

    pub fn constellation(&self) -> &GsmConstellation {
        &self.constellation
    }

    pub fn gain_matrix(&self) -> &GainMatrix {
        &self.h
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn sigma(&self, osnr_db: f64) -> f64 {
        osnr_to_sigma(&self.h, &self.constellation, self.code.rate(), osnr_db)
    }

    /// Sends `info` once at noise level `sigma` and runs the receiver loop.
    pub fn run_frame<R: Rng + ?Sized>(&self, info: &[u8], sigma: f64, rng: &mut R) -> Result<DecodedFrame> {
        let code = &self.code;
        let rho = self.constellation.rho();
        let tx_pos = code.transmitted_positions();
        let cw = encode(code, info)?;
        let mut coded = vec![0u8; tx_pos.len()];
        self.interleaver.interleave(&cw.transmitted_bits, &mut coded);

        let channel = ChannelModel::new(self.h.clone(), sigma);
        let n_r = self.h.n_r();
        let symbols = coded.len() / rho;
        let mut y = vec![0.0; symbols * n_r];
        for (s, ys) in y.chunks_exact_mut(n_r).enumerate() {
            let x = self.constellation.map_bits(&coded[s * rho..(s + 1) * rho])?;
            channel.transmit_into(x, rng, ys);
        }

        let mut dec = BpDecoder::new(code);
        let mut la_dem = vec![0.0; tx_pos.len()];
        let mut le_dem = vec![0.0; tx_pos.len()];
        let mut le_tx = vec![0.0; tx_pos.len()];
        let mut ch = vec![0.0; code.n()];
        let mut metric = vec![0.0; self.demapper.size()];
        let (mut inner, mut outer, mut ok) = (0, 0, false);
        for round in 0..=self.g2 {
            outer += 1;
            for (s, ys) in y.chunks_exact(n_r).enumerate() {
                let r = s * rho..(s + 1) * rho;
                self.demapper.extrinsic_into(ys, sigma, &la_dem[r.clone()], &mut metric, &mut le_dem[r]);
            }
            self.interleaver.deinterleave(&le_dem, &mut le_tx);
            for (&c, &l) in tx_pos.iter().zip(&le_tx) {
                ch[c] = l;
            }
            let (it, done) = dec.run(code, &ch, self.g1);
            inner += it;
            ok = done;
            if ok || round == self.g2 {
                break;
            }
            for (l, &c) in le_tx.iter_mut().zip(tx_pos) {
                *l = dec.extrinsic(code, c).clamp(-LLR_CLIP, LLR_CLIP);
            }
            self.interleaver.interleave(&le_tx, &mut la_dem);
        }
        let info_hat = code.encoder().extract_info(dec.hard_bits());
        let bit_errors = info_hat.iter().zip(info).filter(|(a, b)| a != b).count();
        Ok(DecodedFrame { info_hat, bit_errors, syndrome_ok: ok, inner_iterations: inner, outer_iterations: outer })
    }

    fn frame_at(&self, sigma: f64, osnr_seed: u64, frame: u64) -> Result<DecodedFrame> {
        let mut rng: ChaCha8Rng = stream_rng(osnr_seed, frame);
        let info: Vec<u8> = (0..self.code.k()).map(|_| rng.random_range(0..2u8)).collect();
        self.run_frame(&info, sigma, &mut rng)
    }
}

/// Counts accumulated at one OSNR.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ErrorStats {
    pub osnr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    pub inner_iterations: u64,
    pub outer_iterations: u64,
}

impl ErrorStats {
    pub const CSV_HEADER: &'static str = "osnr_db,bits,bit_errors,frames,frame_errors,ber,fer,avg_T1,avg_T2";

    fn ratio(a: u64, b: u64) -> f64 {
        if b == 0 {
            0.0
        } else {
            a as f64 / b as f64
        }
    }

    pub fn ber(&self) -> f64 {
        Self::ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        Self::ratio(self.frame_errors, self.frames)
    }

    /// Average decoder iterations per frame.
    pub fn avg_t1(&self) -> f64 {
        Self::ratio(self.inner_iterations, self.frames)
    }

    /// Average demapper passes per frame.
    pub fn avg_t2(&self) -> f64 {
        Self::ratio(self.outer_iterations, self.frames)
    }

    fn push(&mut self, f: &DecodedFrame, k: usize) {
        self.bits += k as u64;
        self.bit_errors += f.bit_errors as u64;
        self.frames += 1;
        self.frame_errors += f.frame_error() as u64;
        self.inner_iterations += f.inner_iterations as u64;
        self.outer_iterations += f.outer_iterations as u64;
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e},{},{}",
            self.osnr_db,
            self.bits,
            self.bit_errors,
            self.frames,
            self.frame_errors,
            self.ber(),
            self.fer(),
            self.avg_t1(),
            self.avg_t2()
        )
    }
}

/// Seed of the frame streams at one OSNR; depends on the point, not on the grid.
fn osnr_seed(seed: u64, osnr_db: f64) -> u64 {
    derive_seed(seed, (osnr_db * 1000.0).round() as i64 as u64)
}

/// Simulates one OSNR point until the stop rule fires. Frames run in
/// fixed-size batches and are folded in frame order, so the result does not
/// depend on the thread count.
pub fn simulate_point(sys: &LinkSystem, osnr_db: f64, stop: &StopRule, seed: u64) -> Result<ErrorStats> {
    let sigma = sys.sigma(osnr_db);
    let oseed = osnr_seed(seed, osnr_db);
    let mut stats = ErrorStats { osnr_db, ..Default::default() };
    let mut next = 0u64;
    while !stop.done(&stats) {
        let frames: Vec<Result<DecodedFrame>> =
            (next..next + BATCH as u64).into_par_iter().map(|f| sys.frame_at(sigma, oseed, f)).collect();
        next += BATCH as u64;
        for f in frames {
            stats.push(&f?, sys.code.k());
            if stop.done(&stats) {
                break;
            }
        }
    }
    Ok(stats)
}

/// BER/FER at every OSNR of the configured grid.
pub fn sweep_ber(cfg: &LinkConfig) -> Result<Vec<ErrorStats>> {
    let sys = LinkSystem::new(cfg)?;
    cfg.osnr_db.iter().map(|&o| simulate_point(&sys, o, &cfg.stop, cfg.seed)).collect()
}

/// OSNR where the BER curve crosses `target`, interpolating log10(BER)
/// linearly between the bracketing grid points. `None` when not bracketed.
pub fn osnr_at_ber(stats: &[ErrorStats], target: f64) -> Option<f64> {
    stats.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        let (pa, pb) = (a.ber(), b.ber());
        if !(pa >= target && pb < target) {
            return None;
        }
        if pb == 0.0 {
            return Some(b.osnr_db);
        }
        let (la, lb, lt) = (pa.log10(), pb.log10(), target.log10());
        Some(a.osnr_db + (b.osnr_db - a.osnr_db) * (la - lt) / (la - lb))
    })
}

/// Walks a `step_db` grid from `start_db` until the BER curve brackets
/// `target`, then interpolates the crossing. Gives up after `max_points`.
pub fn search_ber_crossing(
    sys: &LinkSystem,
    start_db: f64,
    step_db: f64,
    target: f64,
    stop: &StopRule,
    seed: u64,
    max_points: usize,
) -> Result<(Option<f64>, Vec<ErrorStats>)> {
    let at = |k: i64| ((start_db + k as f64 * step_db) * 1e6).round() / 1e6;
    let mut pts = vec![simulate_point(sys, at(0), stop, seed)?];
    let dir: i64 = if pts[0].ber() >= target { 1 } else { -1 };
    let mut k = 0;
    while pts.len() < max_points {
        let last = pts.last().unwrap();
        if (dir == 1 && last.ber() < target) || (dir == -1 && last.ber() >= target) {
            break;
        }
        k += dir;
        pts.push(simulate_point(sys, at(k), stop, seed)?);
    }
    pts.sort_by(|a, b| a.osnr_db.total_cmp(&b.osnr_db));
    Ok((osnr_at_ber(&pts, target), pts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ConstellationKind, g2: usize) -> LinkConfig {
        LinkConfig {
            code: CodeSpec { family: CodeFamily::Ar4ja, e: 0, z: 64, info_bits: Some(128) },
            kind,
            gsm: GsmConfig::new(4, 2, 2, 1.0).unwrap(),
            geometry: Geometry::default(),
            demap_mode: DemapMode::MaxLog,
            osnr_db: vec![0.0, 40.0],
            g1: 20,
            g2,
            stop: StopRule { max_frames: 40, ..Default::default() },
            seed: 5,
        }
    }

    #[test]
    fn interleaver_round_trip() {
        let il = make_interleaver(7200, 3);
        let x: Vec<usize> = (0..7200).collect();
        let mut a = vec![0; 7200];
        let mut b = vec![0; 7200];
        il.interleave(&x, &mut a);
        il.deinterleave(&a, &mut b);
        assert_eq!(b, x);
        assert_ne!(a, x);
        assert_ne!(make_interleaver(7200, 4).permutation(), il.permutation());
    }

    #[test]
    fn eara_block_length_fits_rho_four() {
        let mut cfg = small(ConstellationKind::SserGsm, 4);
        cfg.code = CodeSpec { family: CodeFamily::Eara, e: 0, z: 1800, info_bits: Some(3600) };
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        let base = cfg.code.family.base_matrix(0).unwrap();
        assert_eq!(1800 * base.transmitted_cols(), 7200);
    }

    #[test]
    fn validation_names_the_problem() {
        let mut cfg = small(ConstellationKind::SserGsm, 4);
        cfg.code.info_bits = Some(100);
        assert!(cfg.validate()[0].contains("info length 100"));
        cfg.gsm = GsmConfig { n_t: 4, n_a: 2, m: 8, i_a: 1.0 };
        cfg.code.z = 63;
        cfg.code.info_bits = None;
        let errs = cfg.validate();
        assert!(errs.iter().any(|e| e.contains("252") && e.contains("rho=8")), "{errs:?}");
        cfg.gsm = GsmConfig { n_t: 4, n_a: 5, m: 2, i_a: 1.0 };
        assert!(cfg.validate().iter().any(|e| e.contains("exceeds")));
        cfg = small(ConstellationKind::SserGsm, 4);
        cfg.osnr_db = vec![3.0, 2.0];
        assert_eq!(cfg.validate().len(), 1);
    }

    #[test]
    fn noiseless_frame_is_clean_after_one_pass() {
        let sys = LinkSystem::new(&small(ConstellationKind::SserGsm, 4)).unwrap();
        let mut rng = stream_rng(1, 1);
        let info: Vec<u8> = (0..sys.code().k()).map(|_| rng.random_range(0..2u8)).collect();
        let f = sys.run_frame(&info, 1e-9, &mut rng).unwrap();
        assert_eq!(f.bit_errors, 0);
        assert!(f.syndrome_ok);
        assert_eq!(f.outer_iterations, 1);
        assert_eq!(f.info_hat, info);
    }

    #[test]
    fn frames_are_deterministic() {
        let sys = LinkSystem::new(&small(ConstellationKind::ConGsm, 2)).unwrap();
        let s = sys.sigma(12.0);
        assert_eq!(sys.frame_at(s, 9, 3).unwrap(), sys.frame_at(s, 9, 3).unwrap());
    }

    #[test]
    fn low_osnr_fails_high_osnr_succeeds() {
        let stats = sweep_ber(&small(ConstellationKind::SserGsm, 4)).unwrap();
        assert_eq!(stats[0].frame_errors, stats[0].frames);
        assert!(stats[0].ber() > 0.2);
        assert_eq!(stats[1].bit_errors, 0);
        assert_eq!(stats[1].avg_t2(), 1.0);
        for s in &stats {
            assert!(s.fer() >= s.ber());
        }
    }

    #[test]
    fn stop_rule_caps_frame_errors() {
        let mut cfg = small(ConstellationKind::ConGsm, 0);
        cfg.osnr_db = vec![0.0];
        cfg.stop = StopRule { max_frames: 1000, min_frame_errors: 7, max_bits: u64::MAX };
        let s = sweep_ber(&cfg).unwrap();
        assert_eq!((s[0].frames, s[0].frame_errors), (7, 7));
    }

    #[test]
    fn ber_crossing_interpolates_in_log_domain() {
        let mk = |osnr_db, bit_errors| ErrorStats { osnr_db, bits: 1_000_000, bit_errors, frames: 1, ..Default::default() };
        let s = [mk(1.0, 1000), mk(2.0, 10)];
        assert!((osnr_at_ber(&s, 1e-4).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(osnr_at_ber(&s, 1e-7), None);
    }

    #[test]
    fn crossing_search_brackets_the_waterfall() {
        let sys = LinkSystem::new(&small(ConstellationKind::SserGsm, 2)).unwrap();
        let stop = StopRule { max_frames: 20, ..Default::default() };
        let (x, pts) = search_ber_crossing(&sys, 0.0, 4.0, 1e-3, &stop, 1, 12).unwrap();
        let x = x.unwrap();
        assert!(pts.len() >= 2);
        assert!(pts.first().unwrap().osnr_db <= x && x <= pts.last().unwrap().osnr_db);
    }
}
