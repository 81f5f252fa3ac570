//! Classical error correction applied to the message before encoding, so
//! the receiver can repair bit flips in the decoded stream.

use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::invalid_arg;
use crate::Result;

/// Supported coding schemes. `Repetition3` and `Hamming74` correct any
/// single bit flip per block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EccScheme {
    Identity,
    Repetition3,
    Hamming74,
}

impl EccScheme {
    pub fn id(self) -> &'static str {
        match self {
            EccScheme::Identity => "identity",
            EccScheme::Repetition3 => "repetition-3",
            EccScheme::Hamming74 => "hamming-7-4",
        }
    }

    pub fn parse(s: &str) -> Result<EccScheme> {
        match s {
            "identity" => Ok(EccScheme::Identity),
            "repetition-3" => Ok(EccScheme::Repetition3),
            "hamming-7-4" => Ok(EccScheme::Hamming74),
            other => Err(invalid_arg!("unknown ecc scheme: {other}")),
        }
    }

    /// (data bits, code bits) per block.
    pub fn block(self) -> (usize, usize) {
        match self {
            EccScheme::Identity => (1, 1),
            EccScheme::Repetition3 => (1, 3),
            EccScheme::Hamming74 => (4, 7),
        }
    }
}

impl fmt::Display for EccScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Encode a bit string. Hamming blocks are zero-padded on the input side;
/// the caller carries the true data length out of band (the transcript
/// header does).
pub fn ecc_encode(bits: &[u8], scheme: EccScheme) -> Vec<u8> {
    match scheme {
        EccScheme::Identity => bits.to_vec(),
        EccScheme::Repetition3 => bits.iter().flat_map(|&b| [b, b, b]).collect(),
        EccScheme::Hamming74 => {
            let mut out = Vec::with_capacity(bits.len().div_ceil(4) * 7);
            for chunk in bits.chunks(4) {
                let mut d = [0u8; 4];
                d[..chunk.len()].copy_from_slice(chunk);
                out.extend_from_slice(&hamming_encode_block(d));
            }
            out
        }
    }
}

/// Decode a bit string; inverse of [`ecc_encode`] on clean input and on any
/// input with at most one flipped bit per block.
pub fn ecc_decode(bits: &[u8], scheme: EccScheme) -> Result<Vec<u8>> {
    let (_, code) = scheme.block();
    if bits.len() % code != 0 {
        return Err(invalid_arg!(
            "input length {} is not a multiple of the {}-bit block",
            bits.len(),
            code
        ));
    }
    Ok(match scheme {
        EccScheme::Identity => bits.to_vec(),
        EccScheme::Repetition3 => bits
            .chunks(3)
            .map(|c| if c[0] as u32 + c[1] as u32 + c[2] as u32 >= 2 { 1 } else { 0 })
            .collect(),
        EccScheme::Hamming74 => {
            let mut out = Vec::with_capacity(bits.len() / 7 * 4);
            for chunk in bits.chunks(7) {
                let mut block = [0u8; 7];
                block.copy_from_slice(chunk);
                out.extend_from_slice(&hamming_decode_block(block));
            }
            out
        }
    })
}

/// Hamming(7,4) with parity bits at positions 1, 2, 4 (1-indexed):
/// codeword = [p1, p2, d1, p3, d2, d3, d4].
fn hamming_encode_block(d: [u8; 4]) -> [u8; 7] {
    let p1 = d[0] ^ d[1] ^ d[3];
    let p2 = d[0] ^ d[2] ^ d[3];
    let p3 = d[1] ^ d[2] ^ d[3];
    [p1, p2, d[0], p3, d[1], d[2], d[3]]
}

fn hamming_decode_block(mut c: [u8; 7]) -> [u8; 4] {
    let s1 = c[0] ^ c[2] ^ c[4] ^ c[6];
    let s2 = c[1] ^ c[2] ^ c[5] ^ c[6];
    let s3 = c[3] ^ c[4] ^ c[5] ^ c[6];
    let syndrome = (s3 << 2 | s2 << 1 | s1) as usize;
    if syndrome != 0 {
        c[syndrome - 1] ^= 1;
    }
    [c[2], c[4], c[5], c[6]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_passthrough() {
        let bits = vec![1, 0, 1, 1];
        assert_eq!(ecc_encode(&bits, EccScheme::Identity), bits);
        assert_eq!(ecc_decode(&bits, EccScheme::Identity).unwrap(), bits);
    }

    #[test]
    fn repetition_majority_vote() {
        assert_eq!(ecc_encode(&[1, 0], EccScheme::Repetition3), vec![1, 1, 1, 0, 0, 0]);
        assert_eq!(
            ecc_decode(&[1, 1, 0, 0, 0, 0], EccScheme::Repetition3).unwrap(),
            vec![1, 0]
        );
        assert!(ecc_decode(&[1, 1], EccScheme::Repetition3).is_err());
    }

    #[test]
    fn hamming_corrects_every_single_flip() {
        // brute force: all 16 data words x all 7 single-bit flips
        for word in 0u8..16 {
            let d = [word >> 3 & 1, word >> 2 & 1, word >> 1 & 1, word & 1];
            let code = hamming_encode_block(d);
            assert_eq!(hamming_decode_block(code), d);
            for flip in 0..7 {
                let mut corrupted = code;
                corrupted[flip] ^= 1;
                assert_eq!(hamming_decode_block(corrupted), d, "word {word} flip {flip}");
            }
        }
    }

    #[test]
    fn hamming_round_trip_with_padding() {
        let bits = vec![1, 0, 1, 1, 0, 1];
        let coded = ecc_encode(&bits, EccScheme::Hamming74);
        assert_eq!(coded.len(), 14);
        let decoded = ecc_decode(&coded, EccScheme::Hamming74).unwrap();
        assert_eq!(&decoded[..6], &bits[..]);
        assert_eq!(&decoded[6..], &[0, 0]);
    }

    #[test]
    fn scheme_ids_round_trip() {
        for s in [EccScheme::Identity, EccScheme::Repetition3, EccScheme::Hamming74] {
            assert_eq!(EccScheme::parse(s.id()).unwrap(), s);
        }
        assert!(EccScheme::parse("turbo").is_err());
    }
}
