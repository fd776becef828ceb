//! Generalized spatial modulation constellations.
//!
//! A GSM label of `rho = rho_d + rho_s` bits is split in order: the first
//! `rho_d` bits pick one of `2^rho_d` LED activation patterns (natural binary
//! over the pattern list), the remaining `rho_s = N_a log2 M` bits pick one
//! intensity per active LED, `log2 M` bits each, Gray labelled onto the
//! ascending levels available to that pattern.
//!
//! Intensities are kept as exact rational multiples of the average LED
//! intensity `I_a` and only converted to `f64` when the table is built.

use std::fmt::Write;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact intensity in units of `I_a`.
pub type Level = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsmConfig {
    /// Transmit LEDs.
    #[serde(rename = "N_t")]
    pub n_t: usize,
    /// Simultaneously active LEDs.
    #[serde(rename = "N_a")]
    pub n_a: usize,
    /// UPAM order, a power of two.
    #[serde(rename = "M")]
    pub m: usize,
    /// Average intensity per LED.
    #[serde(rename = "I_a")]
    pub i_a: f64,
}

impl GsmConfig {
    pub fn new(n_t: usize, n_a: usize, m: usize, i_a: f64) -> Result<Self> {
        let c = Self { n_t, n_a, m, i_a };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidGsm(s));
        if self.n_a < 2 {
            return bad(format!("N_a={} must be at least 2", self.n_a));
        }
        if self.n_a > self.n_t {
            return bad(format!("N_a={} exceeds N_t={}", self.n_a, self.n_t));
        }
        if self.m < 2 || !self.m.is_power_of_two() {
            return bad(format!("M={} must be a power of two >= 2", self.m));
        }
        if !(self.i_a > 0.0 && self.i_a.is_finite()) {
            return bad(format!("I_a={} must be positive", self.i_a));
        }
        if self.delta() < 2 {
            return bad(format!("only {} activation pattern(s)", self.delta()));
        }
        if self.rho() > 20 {
            return bad(format!("rho={} too large for a full table", self.rho()));
        }
        Ok(())
    }

    /// Number of possible activation patterns, `N_t choose N_a`.
    pub fn delta(&self) -> u64 {
        binomial(self.n_t as u64, self.n_a as u64)
    }

    pub fn rho_d(&self) -> usize {
        63 - self.delta().leading_zeros() as usize
    }

    pub fn bits_per_level(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    pub fn rho_s(&self) -> usize {
        self.n_a * self.bits_per_level()
    }

    pub fn rho(&self) -> usize {
        self.rho_d() + self.rho_s()
    }

    pub fn pattern_count(&self) -> usize {
        1 << self.rho_d()
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstellationKind {
    /// Every pattern shares the same `M`-UPAM levels.
    #[serde(rename = "congsm")]
    ConGsm,
    /// Expanded level set re-allocated so every pattern owns disjoint levels.
    #[serde(rename = "ssergsm")]
    SserGsm,
}

impl std::fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ConGsm => "congsm",
            Self::SserGsm => "ssergsm",
        })
    }
}

impl std::str::FromStr for ConstellationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "congsm" => Ok(Self::ConGsm),
            "ssergsm" => Ok(Self::SserGsm),
            _ => Err(Error::InvalidGsm(format!("unknown constellation '{s}'"))),
        }
    }
}

/// `M`-UPAM levels `2 t / (M + 1)`, `t = 1..=M`, in units of `I_a`.
pub fn upam_levels(m: usize) -> Vec<Level> {
    let m = m as i64;
    (1..=m).map(|t| Ratio::new(2 * t, m + 1)).collect()
}

/// First `2^rho_d` activation patterns in lexicographic order (0-based LEDs).
pub fn select_patterns(n_t: usize, n_a: usize) -> Vec<Vec<usize>> {
    let count = {
        let d = binomial(n_t as u64, n_a as u64);
        if d == 0 {
            return Vec::new();
        }
        1usize << (63 - d.leading_zeros())
    };
    let mut out = Vec::with_capacity(count);
    let mut idx: Vec<usize> = (0..n_a).collect();
    loop {
        out.push(idx.clone());
        if out.len() == count {
            return out;
        }
        // next combination
        let mut i = n_a;
        while i > 0 && idx[i - 1] == n_t - n_a + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..n_a {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Expanded level set: `M` levels inside each of the `beta` equal subspaces
/// of `(0, 2 I_a]`, listed by subspace then by position (already ascending).
pub fn sser_symbol_set(m: usize, beta: usize) -> Vec<Level> {
    let (m, b) = (m as i64, beta as i64);
    let mut out = Vec::with_capacity((m * b) as usize);
    for tau in 0..b {
        for n in 1..=m {
            out.push(Ratio::new(2 * n, b * (m + 1)) + Ratio::new(2 * tau, b));
        }
    }
    out
}

/// Deals the sorted expanded levels to `beta` patterns: pattern `p` receives
/// indices `p, p + beta, ..., p + (M - 1) beta`.
pub fn sser_allocate(levels: &[Level], beta: usize) -> Vec<Vec<Level>> {
    let mut sorted = levels.to_vec();
    sorted.sort();
    let m = sorted.len() / beta;
    (0..beta).map(|p| (0..m).map(|k| sorted[p + k * beta]).collect()).collect()
}

#[inline]
fn gray_to_index(g: usize) -> usize {
    let mut i = g;
    let mut s = g >> 1;
    while s != 0 {
        i ^= s;
        s >>= 1;
    }
    i
}

/// Full GSM mapping table.
#[derive(Debug, Clone, PartialEq)]
pub struct GsmConstellation {
    config: GsmConfig,
    kind: ConstellationKind,
    patterns: Vec<Vec<usize>>,
    symbol_sets: Vec<Vec<Level>>,
    exact: Vec<Vec<Level>>,
    vectors: Vec<f64>,
}

impl GsmConstellation {
    pub fn build(config: GsmConfig, kind: ConstellationKind) -> Result<Self> {
        config.validate()?;
        let patterns = select_patterns(config.n_t, config.n_a);
        let beta = patterns.len();
        let symbol_sets = match kind {
            ConstellationKind::ConGsm => vec![upam_levels(config.m); beta],
            ConstellationKind::SserGsm => sser_allocate(&sser_symbol_set(config.m, beta), beta),
        };
        let (rho, rho_s, q) = (config.rho(), config.rho_s(), config.bits_per_level());
        let mut exact = Vec::with_capacity(1 << rho);
        for label in 0..1usize << rho {
            let p = label >> rho_s;
            let mut x = vec![Level::from_integer(0); config.n_t];
            for (a, &led) in patterns[p].iter().enumerate() {
                let shift = rho_s - (a + 1) * q;
                let g = (label >> shift) & (config.m - 1);
                x[led] = symbol_sets[p][gray_to_index(g)];
            }
            exact.push(x);
        }
        let vectors = exact
            .iter()
            .flatten()
            .map(|l| *l.numer() as f64 / *l.denom() as f64 * config.i_a)
            .collect();
        Ok(Self { config, kind, patterns, symbol_sets, exact, vectors })
    }

    pub fn config(&self) -> &GsmConfig {
        &self.config
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn rho(&self) -> usize {
        self.config.rho()
    }

    pub fn rho_d(&self) -> usize {
        self.config.rho_d()
    }

    pub fn rho_s(&self) -> usize {
        self.config.rho_s()
    }

    pub fn n_t(&self) -> usize {
        self.config.n_t
    }

    /// Number of table entries, `2^rho`.
    pub fn size(&self) -> usize {
        self.exact.len()
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    /// Per-pattern ascending level sets in units of `I_a`.
    pub fn symbol_sets(&self) -> &[Vec<Level>] {
        &self.symbol_sets
    }

    /// Exact transmit vector of `label` in units of `I_a`.
    pub fn exact_vector(&self, label: usize) -> &[Level] {
        &self.exact[label]
    }

    /// Transmit vector of `label` in absolute intensity.
    #[inline]
    pub fn vector(&self, label: usize) -> &[f64] {
        let n = self.config.n_t;
        &self.vectors[label * n..(label + 1) * n]
    }

    /// Bit `t` (0 = first, most significant) of `label`.
    #[inline]
    pub fn label_bit(&self, label: usize, t: usize) -> u8 {
        ((label >> (self.rho() - 1 - t)) & 1) as u8
    }

    pub fn label_of(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.rho() {
            return Err(Error::Length { expected: self.rho(), actual: bits.len() });
        }
        Ok(bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize))
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<&[f64]> {
        Ok(self.vector(self.label_of(bits)?))
    }

    /// Same table with every intensity multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.config.i_a *= c;
        s.vectors.iter_mut().for_each(|v| *v *= c);
        s
    }

    /// CSV rows `label,pattern,x_over_ia` with 1-based LED indices and exact
    /// intensities, preceded by a column header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,pattern,x_over_ia\n");
        let rho_s = self.rho_s();
        for (label, x) in self.exact.iter().enumerate() {
            let bits: String =
                (0..self.rho()).map(|t| if self.label_bit(label, t) == 1 { '1' } else { '0' }).collect();
            let pattern: Vec<String> =
                self.patterns[label >> rho_s].iter().map(|l| (l + 1).to_string()).collect();
            let xs: Vec<String> = x.iter().map(|l| l.to_string()).collect();
            writeln!(out, "{bits},{},{}", pattern.join(" "), xs.join(" ")).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Level {
        Ratio::new(n, d)
    }

    fn cfg(n_t: usize, n_a: usize, m: usize) -> GsmConfig {
        GsmConfig::new(n_t, n_a, m, 1.0).unwrap()
    }

    #[test]
    fn upam() {
        assert_eq!(upam_levels(2), vec![r(2, 3), r(4, 3)]);
        assert_eq!(upam_levels(4), vec![r(2, 5), r(4, 5), r(6, 5), r(8, 5)]);
        for m in [2, 4, 8, 16] {
            let lv = upam_levels(m);
            let mean = lv.iter().sum::<Level>() / Ratio::from_integer(m as i64);
            assert_eq!(mean, r(1, 1));
        }
    }

    #[test]
    fn patterns() {
        assert_eq!(select_patterns(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]]);
        let c = cfg(4, 2, 2);
        assert_eq!((c.delta(), c.rho_d(), c.rho()), (6, 2, 4));
        let c = cfg(4, 3, 2);
        assert_eq!((c.delta(), c.rho_d()), (4, 2));
        assert_eq!(
            select_patterns(4, 3),
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(select_patterns(5, 2).len(), 8);
    }

    #[test]
    fn config_rejects() {
        assert!(GsmConfig::new(2, 3, 2, 1.0).is_err());
        assert!(GsmConfig::new(4, 1, 2, 1.0).is_err());
        assert!(GsmConfig::new(4, 2, 3, 1.0).is_err());
        assert!(GsmConfig::new(2, 2, 2, 1.0).is_err());
        assert!(GsmConfig::new(4, 2, 2, 0.0).is_err());
    }

    #[test]
    fn sser_set_m2() {
        let s = sser_symbol_set(2, 4);
        let expected: Vec<Level> = [1, 2, 4, 5, 7, 8, 10, 11].iter().map(|&n| r(n, 6)).collect();
        assert_eq!(s, expected);
    }

    #[test]
    fn sser_set_m4_per_subspace() {
        let s = sser_symbol_set(4, 4);
        assert_eq!(s.len(), 16);
        for tau in 0..4 {
            let lo = r(2 * tau, 4);
            let hi = r(2 * (tau + 1), 4);
            let inside = s.iter().filter(|&&l| l > lo && l <= hi).count();
            assert_eq!(inside, 4);
        }
        // n'=1, tau=0: 2/(4*5) = 1/10
        assert_eq!(s[0], r(1, 10));
        assert_eq!(s[15], r(4, 10) + r(3, 2));
    }

    #[test]
    fn sser_allocation() {
        let sets = sser_allocate(&sser_symbol_set(2, 4), 4);
        assert_eq!(sets[0], vec![r(1, 6), r(7, 6)]);
        assert_eq!(sets[1], vec![r(2, 6), r(8, 6)]);
        assert_eq!(sets[2], vec![r(4, 6), r(10, 6)]);
        assert_eq!(sets[3], vec![r(5, 6), r(11, 6)]);
        for s in &sets {
            assert_eq!(s[1] - s[0], r(1, 1));
        }
    }

    #[test]
    fn table_rows_match_reference() {
        let con = GsmConstellation::build(cfg(4, 2, 2), ConstellationKind::ConGsm).unwrap();
        let z = r(0, 1);
        assert_eq!(con.exact_vector(0b0001), &[r(2, 3), r(4, 3), z, z]);
        assert_eq!(con.exact_vector(0b1111), &[z, r(4, 3), r(4, 3), z]);
        let sser = GsmConstellation::build(cfg(4, 2, 2), ConstellationKind::SserGsm).unwrap();
        assert_eq!(sser.exact_vector(0b1110), &[z, r(11, 6), r(5, 6), z]);
        assert_eq!(sser.map_bits(&[0, 0, 0, 0]).unwrap(), &[1.0 / 6.0, 1.0 / 6.0, 0.0, 0.0]);
    }

    #[test]
    fn gray_labelling_for_m4() {
        let con = GsmConstellation::build(cfg(4, 2, 4), ConstellationKind::ConGsm).unwrap();
        assert_eq!(con.rho(), 6);
        // second LED bits 00,01,11,10 -> ascending levels
        let levels: Vec<Level> = [0b00, 0b01, 0b11, 0b10].iter().map(|&g| con.exact_vector(g)[1]).collect();
        assert_eq!(levels, upam_levels(4));
    }

    #[test]
    fn tables_are_bijective_and_bounded() {
        for (n_t, n_a, m) in [(4, 2, 2), (4, 2, 4), (4, 3, 2), (5, 2, 4), (6, 3, 2)] {
            for kind in [ConstellationKind::ConGsm, ConstellationKind::SserGsm] {
                let c = GsmConstellation::build(cfg(n_t, n_a, m), kind).unwrap();
                assert_eq!(c.size(), 1 << c.rho());
                assert_eq!(c.rho(), c.rho_d() + n_a * m.trailing_zeros() as usize);
                let mut seen = std::collections::HashSet::new();
                for label in 0..c.size() {
                    let x = c.exact_vector(label);
                    assert!(seen.insert(x.to_vec()));
                    let p = &c.patterns()[label >> c.rho_s()];
                    for (led, l) in x.iter().enumerate() {
                        if p.contains(&led) {
                            assert!(*l > r(0, 1) && *l <= r(2, 1));
                        } else {
                            assert_eq!(*l, r(0, 1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn csv_layout() {
        let c = GsmConstellation::build(cfg(4, 2, 2), ConstellationKind::SserGsm).unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "label,pattern,x_over_ia");
        assert_eq!(lines[1], "0000,1 2,1/6 1/6 0 0");
        assert_eq!(lines[15], "1110,2 3,0 11/6 5/6 0");
    }
}
