//! Experiment configuration: TOML sections, flag overrides and validation.

use std::fmt;
use std::str::FromStr;

use gsmvlc::channel::Geometry;
use gsmvlc::demapper::DemapMode;
use gsmvlc::gsm::{ConstellationKind, GsmConfig};
use gsmvlc::link::{CodeSpec, LinkConfig, StopRule};
use serde::{Deserialize, Serialize};

/// Line separating the embedded config from the column header in every CSV.
pub const CONFIG_END: &str = "# ---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    BerSweep,
    AmiSweep,
    ExitTransfer,
    Threshold,
    TableDump,
    Complexity,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Mode::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| format!("unknown mode '{s}'"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::BerSweep => "ber-sweep",
            Self::AmiSweep => "ami-sweep",
            Self::ExitTransfer => "exit-transfer",
            Self::Threshold => "threshold",
            Self::TableDump => "table-dump",
            Self::Complexity => "complexity",
        })
    }
}

/// Artifact written by `table-dump`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DumpTarget {
    /// Mapping table as CSV.
    #[default]
    Constellation,
    /// Channel gain matrix as CSV.
    Gain,
    /// Base matrix as JSON.
    BaseMatrix,
    /// Lifted parity-check matrix in alist format.
    Alist,
    /// Resolved geometry as JSON.
    Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub mode: Mode,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsmSection {
    pub kind: ConstellationKind,
    #[serde(rename = "N_a")]
    pub n_a: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "I_a", default = "default_ia")]
    pub i_a: f64,
}

fn default_ia() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub osnr_db: Vec<f64>,
    pub g1: usize,
    pub g2: usize,
    pub demap_mode: DemapMode,
    pub max_frames: u64,
    pub min_frame_errors: u64,
    pub max_bits: u64,
}

impl Default for LinkSection {
    fn default() -> Self {
        let s = StopRule::default();
        Self {
            osnr_db: Vec::new(),
            g1: 20,
            g2: 4,
            demap_mode: DemapMode::MaxLog,
            max_frames: s.max_frames,
            min_frame_errors: s.min_frame_errors,
            max_bits: s.max_bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Symbols per Monte Carlo estimate.
    pub samples: usize,
    /// Threshold bracket.
    pub osnr_lo: Option<f64>,
    pub osnr_hi: Option<f64>,
    /// A-priori MI grid of `exit-transfer`.
    pub prior_mi: Vec<f64>,
    /// Code rate entering the OSNR normalisation when no `[code]` is given.
    pub rate: Option<f64>,
    /// Fixed iteration counts for `complexity`; measured when absent.
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub dump: DumpTarget,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            samples: 200_000,
            osnr_lo: None,
            osnr_hi: None,
            prior_mi: (0..=10).map(|i| i as f64 / 10.0).collect(),
            rate: None,
            t1: None,
            t2: None,
            dump: DumpTarget::Constellation,
        }
    }
}

/// One experiment: everything needed to reproduce one output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub code: Option<CodeSpec>,
    #[serde(default)]
    pub gsm: Option<GsmSection>,
    #[serde(default)]
    pub channel: Geometry,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub osnr: Option<OsnrGrid>,
    pub frames: Option<u64>,
    pub g1: Option<usize>,
    pub g2: Option<usize>,
}

/// `lo:hi:step` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OsnrGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for OsnrGrid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("expected lo:hi:step, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
        let g = OsnrGrid { lo: num(lo)?, hi: num(hi)?, step: num(step)? };
        if !(g.step > 0.0) || !(g.hi >= g.lo) || !g.lo.is_finite() || !g.hi.is_finite() {
            return Err(format!("grid '{s}' needs lo <= hi and step > 0"));
        }
        Ok(g)
    }
}

impl OsnrGrid {
    /// Grid points rounded to 1e-6 dB so repeated steps do not drift.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| ((self.lo + i as f64 * self.step) * 1e6).round() / 1e6).collect()
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a config file, or the config embedded in an output CSV.
    pub fn from_file_text(text: &str) -> Result<Self, String> {
        if text.starts_with('#') {
            Self::from_toml(&embedded_config(text))
        } else {
            Self::from_toml(text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.mode {
            self.experiment.mode = m;
        }
        if let Some(s) = o.seed {
            self.experiment.seed = s;
        }
        if let Some(g) = o.osnr {
            if self.experiment.mode == Mode::Threshold {
                self.analysis.osnr_lo = Some(g.lo);
                self.analysis.osnr_hi = Some(g.hi);
            } else {
                self.link.osnr_db = g.points();
            }
        }
        if let Some(f) = o.frames {
            self.link.max_frames = f;
        }
        if let Some(g) = o.g1 {
            self.link.g1 = g;
        }
        if let Some(g) = o.g2 {
            self.link.g2 = g;
        }
    }

    pub fn gsm_config(&self) -> Option<GsmConfig> {
        self.gsm.map(|g| GsmConfig { n_t: self.channel.n_t, n_a: g.n_a, m: g.m, i_a: g.i_a })
    }

    pub fn link_config(&self) -> Option<LinkConfig> {
        let (code, gsm) = (self.code?, self.gsm?);
        Some(LinkConfig {
            code,
            kind: gsm.kind,
            gsm: self.gsm_config()?,
            geometry: self.channel.clone(),
            demap_mode: self.link.demap_mode,
            osnr_db: self.link.osnr_db.clone(),
            g1: self.link.g1,
            g2: self.link.g2,
            stop: StopRule {
                max_frames: self.link.max_frames,
                min_frame_errors: self.link.min_frame_errors,
                max_bits: self.link.max_bits,
            },
            seed: self.experiment.seed,
        })
    }

    /// Every problem with the spec for its mode; empty when runnable.
    pub fn validate(&self) -> Vec<String> {
        let mode = self.experiment.mode;
        let mut errs = Vec::new();
        let mut need = |ok: bool, what: &str| {
            if !ok {
                errs.push(format!("mode {mode} requires {what}"));
            }
        };
        let needs_code = matches!(mode, Mode::BerSweep | Mode::Threshold | Mode::Complexity)
            || (mode == Mode::TableDump && matches!(self.analysis.dump, DumpTarget::BaseMatrix | DumpTarget::Alist));
        let needs_gsm = mode != Mode::TableDump || self.analysis.dump == DumpTarget::Constellation;
        need(!needs_code || self.code.is_some(), "a [code] section");
        need(!needs_gsm || self.gsm.is_some(), "a [gsm] section");
        let needs_grid = matches!(mode, Mode::BerSweep | Mode::AmiSweep | Mode::ExitTransfer)
            || (mode == Mode::Complexity && (self.analysis.t1.is_none() || self.analysis.t2.is_none()));
        need(!needs_grid || !self.link.osnr_db.is_empty(), "link.osnr_db (or --osnr)");
        if mode == Mode::Threshold {
            need(self.analysis.osnr_lo.is_some() && self.analysis.osnr_hi.is_some(), "analysis.osnr_lo and analysis.osnr_hi");
        }
        if matches!(mode, Mode::AmiSweep | Mode::ExitTransfer) {
            need(self.code.is_some() || self.analysis.rate.is_some(), "a [code] section or analysis.rate");
        }
        if let Err(e) = self.channel.validate() {
            errs.push(e.to_string());
        }
        if let Some(g) = self.gsm_config() {
            if let Err(e) = g.validate() {
                errs.push(e.to_string());
            }
        }
        if self.link.osnr_db.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("link.osnr_db must be strictly increasing".into());
        }
        if let (Some(lo), Some(hi)) = (self.analysis.osnr_lo, self.analysis.osnr_hi) {
            if lo >= hi {
                errs.push(format!("threshold bracket [{lo}, {hi}] is empty"));
            }
        }
        if self.analysis.samples == 0 {
            errs.push("analysis.samples must be positive".into());
        }
        if self.analysis.prior_mi.iter().any(|m| !(0.0..=1.0).contains(m)) {
            errs.push("analysis.prior_mi values must lie in [0, 1]".into());
        }
        if let Some(r) = self.analysis.rate {
            if !(r > 0.0 && r <= 1.0) {
                errs.push(format!("analysis.rate={r} must lie in (0, 1]"));
            }
        }
        if mode == Mode::BerSweep || (mode == Mode::Complexity && !self.link.osnr_db.is_empty()) {
            if let Some(lc) = self.link_config() {
                for e in lc.validate() {
                    if !errs.contains(&e) {
                        errs.push(e);
                    }
                }
            }
        } else if let (Some(code), Some(g)) = (self.code, self.gsm_config()) {
            if let Ok(base) = code.family.base_matrix(code.e) {
                let k = code.z * (base.cols() - base.rows());
                if let Some(info) = code.info_bits.filter(|&i| i != k) {
                    errs.push(format!("info length {info} does not match Z={} (k={k})", code.z));
                }
                let tx = code.z * base.transmitted_cols();
                if g.validate().is_ok() && tx % g.rho() != 0 && mode != Mode::Threshold {
                    errs.push(format!("transmitted length {tx} is not divisible by rho={}", g.rho()));
                }
            }
        }
        errs
    }
}

/// The TOML carried by the `#` lines above [`CONFIG_END`].
pub fn embedded_config(csv: &str) -> String {
    let mut out = String::new();
    for line in csv.lines() {
        if line == CONFIG_END {
            break;
        }
        let body = line.strip_prefix("# ").or_else(|| line.strip_prefix('#')).unwrap_or(line);
        out.push_str(body);
        out.push('\n');
    }
    out
}
