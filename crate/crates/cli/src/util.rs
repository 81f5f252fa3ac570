use std::fs;
use std::io::Write;
use std::path::Path;

use rand_core::TryRngCore;

/// Parse a message argument: a binary string like `0110`, or hex with an
/// `0x` prefix (`0x4f` = 01001111).
pub fn parse_bits(s: &str) -> Result<Vec<u8>, String> {
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        if hex.is_empty() {
            return Err(String::from("empty hex message"));
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| format!("invalid hex digit {ch:?}"))?;
            for shift in (0..4).rev() {
                bits.push((nibble >> shift & 1) as u8);
            }
        }
        Ok(bits)
    } else if !s.is_empty() && s.bytes().all(|b| b == b'0' || b == b'1') {
        Ok(s.bytes().map(|b| b - b'0').collect())
    } else {
        Err(format!(
            "message must be a binary string or 0x-prefixed hex, got {s:?}"
        ))
    }
}

/// Resolve the run seed: the flag, then $QDC_SIM_SEED, then OS entropy.
/// The chosen seed is always echoed in the output so runs can be replayed.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    if let Ok(var) = std::env::var("QDC_SIM_SEED") {
        return var
            .parse()
            .map_err(|_| format!("QDC_SIM_SEED must be a u64, got {var:?}"));
    }
    rand_core::OsRng
        .try_next_u64()
        .map_err(|e| format!("no entropy source available: {e}"))
}

/// Write `json` (plus a trailing newline) to `--out` or stdout.
pub fn emit(out: Option<&Path>, json: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n")),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{json}")
        }
    }
}
