//! Indoor MIMO-VLC line-of-sight channel and AWGN.

use std::fmt::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsm::GsmConstellation;

/// Room and front-end geometry. Lengths in metres, angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub room: [f64; 3],
    #[serde(rename = "N_t")]
    pub n_t: usize,
    #[serde(rename = "N_r")]
    pub n_r: usize,
    /// LED spacing.
    pub d_tx: f64,
    /// PD spacing.
    pub d_rx: f64,
    pub led_height: f64,
    pub pd_height: f64,
    /// LED semi-angle at half power.
    #[serde(rename = "phi_half")]
    pub phi_half_deg: f64,
    /// PD field of view.
    #[serde(rename = "psi_half")]
    pub fov_deg: f64,
    /// PD responsivity (A/W).
    #[serde(rename = "epsilon")]
    pub responsivity: f64,
    /// PD physical area (m^2).
    #[serde(rename = "area")]
    pub pd_area: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            room: [5.0, 5.0, 3.0],
            n_t: 4,
            n_r: 4,
            d_tx: 0.5,
            d_rx: 0.1,
            led_height: 3.0,
            pd_height: 0.75,
            phi_half_deg: 8.0,
            fov_deg: 55.0,
            responsivity: 0.434,
            pd_area: 7e-6,
        }
    }
}

impl Geometry {
    pub fn with_d_tx(mut self, d_tx: f64) -> Self {
        self.d_tx = d_tx;
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("geometry serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidGeometry(s));
        for n in [self.n_t, self.n_r] {
            let k = (n as f64).sqrt().round() as usize;
            if n == 0 || k * k != n {
                return bad(format!("array size {n} is not a square grid"));
            }
        }
        if self.led_height <= self.pd_height {
            return bad("LED plane must lie above the PD plane".into());
        }
        if !(self.phi_half_deg > 0.0 && self.phi_half_deg < 90.0) {
            return bad(format!("semi-angle {} outside (0, 90)", self.phi_half_deg));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg <= 90.0) {
            return bad(format!("FOV {} outside (0, 90]", self.fov_deg));
        }
        if self.d_tx < 0.0 || self.d_rx < 0.0 {
            return bad("negative spacing".into());
        }
        if self.responsivity <= 0.0 || self.pd_area <= 0.0 {
            return bad("responsivity and PD area must be positive".into());
        }
        Ok(())
    }

    /// Square grid of `n` points at spacing `d`, centred in the room, row-major.
    fn grid(&self, n: usize, d: f64, z: f64) -> Vec<[f64; 3]> {
        let k = (n as f64).sqrt().round() as usize;
        let (cx, cy) = (self.room[0] / 2.0, self.room[1] / 2.0);
        let off = (k as f64 - 1.0) / 2.0;
        (0..n)
            .map(|i| {
                let (row, col) = ((i / k) as f64, (i % k) as f64);
                [cx + (col - off) * d, cy + (row - off) * d, z]
            })
            .collect()
    }

    pub fn led_positions(&self) -> Vec<[f64; 3]> {
        self.grid(self.n_t, self.d_tx, self.led_height)
    }

    pub fn pd_positions(&self) -> Vec<[f64; 3]> {
        self.grid(self.n_r, self.d_rx, self.pd_height)
    }
}

/// Lambertian order `-ln 2 / ln cos(phi_half)`.
pub fn lambertian_order(phi_half_deg: f64) -> f64 {
    -std::f64::consts::LN_2 / phi_half_deg.to_radians().cos().ln()
}

/// `N_r x N_t` real channel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    n_r: usize,
    n_t: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_r = rows.len();
        let n_t = rows.first().map_or(0, Vec::len);
        if n_r == 0 || n_t == 0 || rows.iter().any(|r| r.len() != n_t) {
            return Err(Error::InvalidGeometry("ragged or empty gain matrix".into()));
        }
        Ok(Self { n_r, n_t, data: rows.concat() })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_t + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_t..(i + 1) * self.n_t]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `H x` written into `out`, each entry summed over LEDs in index order.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for (h, v) in self.row(i).iter().zip(x) {
                s += h * v;
            }
            *o = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_r];
        self.apply_into(x, &mut out);
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { n_r: self.n_r, n_t: self.n_t, data: self.data.iter().map(|h| h * c).collect() }
    }

    /// One row per PD, comma separated, in `{:e}` form.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n_r {
            let cells: Vec<String> = self.row(i).iter().map(|h| format!("{h:e}")).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }
}

/// Line-of-sight gains between every PD (rows) and LED (columns).
pub fn build_gain_matrix(g: &Geometry) -> Result<GainMatrix> {
    g.validate()?;
    let eta = lambertian_order(g.phi_half_deg);
    let fov = g.fov_deg.to_radians();
    let leds = g.led_positions();
    let pds = g.pd_positions();
    let mut data = Vec::with_capacity(g.n_r * g.n_t);
    for p in &pds {
        for l in &leds {
            let dx = l[0] - p[0];
            let dy = l[1] - p[1];
            let dz = l[2] - p[2];
            let d2 = dx * dx + dy * dy + dz * dz;
            let cos = dz / d2.sqrt();
            // both normals vertical, so emission and incidence angles coincide
            let h = if cos.acos() <= fov {
                g.responsivity * (eta + 1.0) * g.pd_area / (2.0 * std::f64::consts::PI * d2)
                    * cos.powf(eta)
                    * cos
            } else {
                0.0
            };
            data.push(h);
        }
    }
    Ok(GainMatrix { n_r: g.n_r, n_t: g.n_t, data })
}

/// Average received optical power `(1/N_r) sum_ij h_ij I_a`.
pub fn received_power(h: &GainMatrix, i_a: f64) -> f64 {
    h.sum() * i_a / h.n_r() as f64
}

/// Noise standard deviation for an optical SNR given in dB:
/// `sigma = P_rx / (sqrt(2 R rho) * OSNR)`.
pub fn osnr_to_sigma(h: &GainMatrix, constellation: &GsmConstellation, rate: f64, osnr_db: f64) -> f64 {
    let p_rx = received_power(h, constellation.config().i_a);
    let osnr = 10f64.powf(osnr_db / 10.0);
    p_rx / ((2.0 * rate * constellation.rho() as f64).sqrt() * osnr)
}

/// Channel instance used by the link: gains plus the noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pub h: GainMatrix,
    pub sigma: f64,
}

impl ChannelModel {
    pub fn new(h: GainMatrix, sigma: f64) -> Self {
        Self { h, sigma }
    }

    /// `y = H x + n` written into `out`.
    pub fn transmit_into<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        self.h.apply_into(x, out);
        for y in out.iter_mut() {
            let n: f64 = rng.sample(StandardNormal);
            *y += self.sigma * n;
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.h.n_r()];
        self.transmit_into(x, rng, &mut out);
        out
    }
}
