//! Linear encoding and LLR belief-propagation decoding over a [`LiftedCode`].
//!
//! LLRs are natural-log ratios `ln P(b=0)/P(b=1)`: positive values favour 0.

mod decoder;
mod encoder;

pub use decoder::{BpDecoder, DecoderResult};
pub use encoder::Encoder;

use crate::error::Result;
use crate::protograph::LiftedCode;

/// Magnitude bound applied to every LLR exchanged between blocks.
pub const LLR_CLIP: f64 = 30.0;

#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

/// A full codeword and the part of it that goes over the channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub bits: Vec<u8>,
    pub transmitted_bits: Vec<u8>,
}

pub fn encode(code: &LiftedCode, info: &[u8]) -> Result<Codeword> {
    let bits = code.encoder().encode(info)?;
    let transmitted_bits = code.transmitted_positions().iter().map(|&c| bits[c]).collect();
    Ok(Codeword { bits, transmitted_bits })
}

/// Fresh decode of `channel_llrs` (length `n`, zeros on punctured bits).
pub fn decode(code: &LiftedCode, channel_llrs: &[f64], max_iter: usize) -> DecoderResult {
    let mut dec = BpDecoder::new(code);
    let (it, ok) = dec.run(code, channel_llrs, max_iter);
    dec.result(it, ok)
}
