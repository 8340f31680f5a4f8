//! Key material as hexadecimal text.
//!
//! The first line is `bits <N>`; the bits follow packed most-significant
//! first, 32 bytes per line. Blank lines and lines starting with `#` are
//! ignored.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};

use photonkd_core::postproc::BitString;

const BYTES_PER_LINE: usize = 32;

pub fn encode(key: &BitString) -> String {
    let mut out = format!("bits {}\n", key.len());
    for chunk in key.to_bytes().chunks(BYTES_PER_LINE) {
        out.push_str(&hex::encode(chunk));
        out.push('\n');
    }
    out
}

pub fn decode(text: &str) -> anyhow::Result<BitString> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| anyhow!("empty key file"))?;
    let len: usize = header
        .strip_prefix("bits ")
        .ok_or_else(|| anyhow!("expected `bits <N>` header, found {header:?}"))?
        .trim()
        .parse()
        .context("bit count")?;
    if len == 0 {
        bail!("key holds no bits");
    }
    let digits: String = lines.collect();
    let bytes = hex::decode(&digits).context("hex payload")?;
    Ok(BitString::from_bytes(&bytes, len)?)
}

pub fn read(path: &Path) -> anyhow::Result<BitString> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    decode(&text).with_context(|| format!("decoding {}", path.display()))
}

/// Bits of a raw sifted key; an empty key is written as `bits 0`.
pub fn encode_raw(bits: &[u8]) -> String {
    match BitString::new(bits.to_vec()) {
        Ok(k) => encode(&k),
        Err(_) => "bits 0\n".to_string(),
    }
}
