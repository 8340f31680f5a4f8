//! Machine-readable run outputs: the stats JSON document and the per-round
//! CSV.

use std::fmt::Write as _;

use serde::Serialize;

use photonkd_core::protocol::{Eavesdropper, ProtocolConfig, ProtocolStats, RoundRecord};

#[derive(Debug, Clone, Serialize)]
pub struct StatsDocument {
    pub seed: u64,
    pub bases: Vec<String>,
    pub eve_bases: Option<Vec<String>>,
    pub n_rounds: u64,
    pub n_lost: u64,
    pub n_sifted: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub symbol_error_rate: f64,
    pub bit_error_rate: f64,
    pub sifted_fraction: f64,
    pub raw_key_bits_per_photon: f64,
    pub qber_abort_threshold: Option<f64>,
    pub aborted: bool,
}

fn names(bases: &[photonkd_core::mub::BasisId]) -> Vec<String> {
    bases.iter().map(|b| b.to_string()).collect()
}

impl StatsDocument {
    pub fn new(config: &ProtocolConfig, s: &ProtocolStats) -> Self {
        Self {
            seed: config.seed,
            bases: names(&config.bases),
            eve_bases: match &config.eve {
                Eavesdropper::None => None,
                Eavesdropper::InterceptResend(b) => Some(names(b)),
            },
            n_rounds: s.n_rounds,
            n_lost: s.n_lost,
            n_sifted: s.n_sifted,
            symbol_errors: s.symbol_errors,
            bit_errors: s.bit_errors,
            symbol_error_rate: s.symbol_error_rate,
            bit_error_rate: s.bit_error_rate,
            sifted_fraction: s.sifted_fraction,
            raw_key_bits_per_photon: s.raw_key_bits_per_photon,
            qber_abort_threshold: config.qber_abort_threshold,
            aborted: s.aborted,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }
}

/// Text with at least six significant digits; fixed-point down to 1e-4,
/// scientific below.
pub fn rate(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.6}");
    }
    if x.abs() < 1e-4 {
        return format!("{x:.5e}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(6) as usize;
    format!("{x:.decimals$}")
}

pub const RECORD_HEADER: &str =
    "round,alice_basis,alice_label,depolarized,eve_basis,eve_outcome,photon_lost,bob_basis,bob_detector,bob_label,sifted";

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One header line and one line per round; absent values are empty fields.
pub fn records_csv(records: &[RoundRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{},{},{}",
            r.alice_basis,
            r.alice_label,
            r.depolarized as u8,
            opt(r.eve.map(|e| e.basis)),
            opt(r.eve.map(|e| e.outcome)),
            r.photon_lost as u8,
            r.bob_basis,
            opt(r.bob_detector),
            opt(r.bob_label),
            r.sifted as u8,
        )
        .expect("writing to a String");
    }
    out
}
