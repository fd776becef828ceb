//! Protograph-LDPC-coded generalized spatial modulation (GSM) for MIMO
//! visible light links.
//!
//! The crate covers the whole bit-interleaved coded GSM chain with iterative
//! demapping and decoding:
//!
//! - [`protograph`]: base matrices (AR4JA, EARA, regular) and PEG-style lifting
//! - [`ldpc`]: systematic encoder and sum-product decoder
//! - [`gsm`]: ConGSM and SSERGSM constellations
//! - [`channel`]: line-of-sight Lambertian channel and OSNR scaling
//! - [`demapper`]: max-log (and log-MAP) soft demapper with a brute-force oracle
//! - [`link`]: Monte Carlo BER/FER simulation with outer demapper iterations
//! - [`analysis`]: AMI estimation, modified PEXIT thresholds, complexity counts

pub mod analysis;
pub mod channel;
pub mod demapper;
pub mod error;
pub mod gf2;
pub mod gsm;
pub mod ldpc;
pub mod link;
pub mod protograph;
pub mod rng;

pub use error::{Error, Result};
