//! Monte Carlo BB84 in dimension four.
//!
//! Each round Alice picks a basis and a 2-bit label, prepares the state with
//! the optical circuit, and sends it through a lossy, depolarizing channel.
//! An optional intercept-resend eavesdropper measures in a random basis and
//! resends what she saw. Bob picks a basis, maps it onto the canonical basis
//! and detects with the MZEM. Rounds where the two bases agree are kept.
//!
//! Rounds are grouped in blocks of [`ROUNDS_PER_BLOCK`]; block `i` draws from
//! stream `i` of the root seed, so blocks can run in any order or in parallel
//! and still merge into the same result.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{born_sample, PureState4};
use crate::mub::{BasisId, MubCircuits};
use crate::mzem::{detect, MzemSettings};
use crate::rng::RandomStream;

pub const ROUNDS_PER_BLOCK: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum Eavesdropper {
    None,
    /// Measures every photon in a basis drawn uniformly from the set and
    /// resends the projected state.
    InterceptResend(Vec<BasisId>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    /// Probability a photon reaches Bob, in `(0, 1]`.
    pub transmission: f64,
    /// Probability the state is replaced by a uniformly random canonical state.
    pub depolarizing: f64,
}

impl Default for Channel {
    fn default() -> Self {
        Self { transmission: 1.0, depolarizing: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub bases: Vec<BasisId>,
    pub n_rounds: u64,
    pub eve: Eavesdropper,
    pub channel: Channel,
    pub mzem: MzemSettings,
    pub seed: u64,
    /// Flag the run as aborted when the bit error rate exceeds this.
    pub qber_abort_threshold: Option<f64>,
}

impl ProtocolConfig {
    /// Ideal devices, no eavesdropper, lossless channel.
    pub fn ideal(bases: Vec<BasisId>, n_rounds: u64, seed: u64) -> Self {
        Self {
            bases,
            n_rounds,
            eve: Eavesdropper::None,
            channel: Channel::default(),
            mzem: MzemSettings::ideal(),
            seed,
            qber_abort_threshold: None,
        }
    }

    /// Same as [`ProtocolConfig::ideal`] with Eve intercepting in Alice's bases.
    pub fn with_intercept_resend(mut self) -> Self {
        self.eve = Eavesdropper::InterceptResend(self.bases.clone());
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_basis_set(&self.bases, 2, "basis set")?;
        if let Eavesdropper::InterceptResend(eve) = &self.eve {
            check_basis_set(eve, 1, "eavesdropper basis set")?;
        }
        if self.n_rounds == 0 {
            return Err(Error::invalid("n_rounds must be positive"));
        }
        let t = self.channel.transmission;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::invalid(format!("transmission {t} not in (0, 1]")));
        }
        let p = self.channel.depolarizing;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("depolarizing probability {p} not in [0, 1]")));
        }
        if let Some(th) = self.qber_abort_threshold {
            if !(0.0..=1.0).contains(&th) {
                return Err(Error::invalid(format!("abort threshold {th} not in [0, 1]")));
            }
        }
        self.mzem.validate()
    }
}

fn check_basis_set(set: &[BasisId], min: usize, what: &str) -> Result<()> {
    if set.len() < min || set.len() > 5 {
        return Err(Error::invalid(format!("{what} must hold {min}..=5 bases, got {}", set.len())));
    }
    for (i, b) in set.iter().enumerate() {
        if set[..i].contains(b) {
            return Err(Error::invalid(format!("{what} lists {b} twice")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EveRecord {
    pub basis: BasisId,
    pub outcome: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub alice_basis: BasisId,
    /// `2·pol_bit + tm_bit`.
    pub alice_label: u8,
    pub depolarized: bool,
    pub eve: Option<EveRecord>,
    pub photon_lost: bool,
    pub bob_basis: BasisId,
    pub bob_detector: Option<u8>,
    pub bob_label: Option<u8>,
    pub sifted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolStats {
    pub n_rounds: u64,
    pub n_lost: u64,
    pub n_sifted: u64,
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub symbol_error_rate: f64,
    pub bit_error_rate: f64,
    pub sifted_fraction: f64,
    /// Two key bits per sifted photon, over all photons sent.
    pub raw_key_bits_per_photon: f64,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOutcome {
    pub stats: ProtocolStats,
    pub records: Vec<RoundRecord>,
    /// Sifted key bits, two per sifted round, pol bit first.
    pub alice_bits: Vec<u8>,
    pub bob_bits: Vec<u8>,
}

fn label_bits(label: u8) -> [u8; 2] {
    [(label >> 1) & 1, label & 1]
}

/// Validated config plus compiled circuits; runs blocks of rounds.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ProtocolConfig,
    circuits: MubCircuits,
}

impl Simulator {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, circuits: MubCircuits::build()? })
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    pub fn circuits(&self) -> &MubCircuits {
        &self.circuits
    }

    pub fn block_count(&self) -> u64 {
        self.config.n_rounds.div_ceil(ROUNDS_PER_BLOCK)
    }

    /// Rounds of block `block`, drawn from stream `block` of the root seed.
    pub fn run_block(&self, block: u64) -> Vec<RoundRecord> {
        let start = block * ROUNDS_PER_BLOCK;
        let end = (start + ROUNDS_PER_BLOCK).min(self.config.n_rounds);
        let mut rng = RandomStream::derive(self.config.seed, block);
        (start..end).map(|_| self.round(&mut rng)).collect()
    }

    fn pick(&self, set: &[BasisId], rng: &mut RandomStream) -> BasisId {
        set[rng.below(set.len() as u64) as usize]
    }

    fn round(&self, rng: &mut RandomStream) -> RoundRecord {
        let cfg = &self.config;
        let table = self.circuits.table();
        let alice_basis = self.pick(&cfg.bases, rng);
        let alice_label = rng.below(4) as u8;
        let mut psi = *self.circuits.prepared(alice_basis, alice_label as usize);

        let photon_lost = !rng.chance(cfg.channel.transmission);
        let mut depolarized = false;
        let mut eve = None;
        if !photon_lost {
            if rng.chance(cfg.channel.depolarizing) {
                depolarized = true;
                psi = PureState4::basis(rng.below(4) as usize);
            }
            if let Eavesdropper::InterceptResend(eve_bases) = &cfg.eve {
                let basis = self.pick(eve_bases, rng);
                let outcome = born_sample(&psi, table.basis(basis), rng).expect("table bases are orthonormal");
                psi = *table.state(basis, outcome);
                eve = Some(EveRecord { basis, outcome: outcome as u8 });
            }
        }

        let bob_basis = self.pick(&cfg.bases, rng);
        let (bob_detector, bob_label) = if photon_lost {
            (None, None)
        } else {
            let canonical = self.circuits.to_canonical_frame(bob_basis, &psi);
            let ev = detect(&canonical, &cfg.mzem, rng);
            let k = cfg.mzem.canonical_index(ev);
            let label = self.circuits.label_of_canonical(bob_basis)[k];
            (Some(ev.detector_index() as u8), Some(label as u8))
        };
        RoundRecord {
            alice_basis,
            alice_label,
            depolarized,
            eve,
            photon_lost,
            bob_basis,
            bob_detector,
            bob_label,
            sifted: !photon_lost && alice_basis == bob_basis,
        }
    }

    /// Concatenates blocks (in block order) and computes the statistics.
    pub fn finish(&self, records: Vec<RoundRecord>) -> ProtocolOutcome {
        let mut alice_bits = Vec::new();
        let mut bob_bits = Vec::new();
        for i in sift(&records) {
            let r = &records[i];
            alice_bits.extend_from_slice(&label_bits(r.alice_label));
            bob_bits.extend_from_slice(&label_bits(r.bob_label.expect("sifted rounds are detected")));
        }
        let n_rounds = records.len() as u64;
        let n_lost = records.iter().filter(|r| r.photon_lost).count() as u64;
        let n_sifted = (alice_bits.len() / 2) as u64;
        let (symbol_errors, bit_errors) = count_errors(&alice_bits, &bob_bits);
        let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let sifted_fraction = rate(n_sifted, n_rounds);
        let bit_error_rate = rate(bit_errors, 2 * n_sifted);
        let aborted = self.config.qber_abort_threshold.is_some_and(|t| n_sifted > 0 && bit_error_rate > t);
        ProtocolOutcome {
            stats: ProtocolStats {
                n_rounds,
                n_lost,
                n_sifted,
                symbol_errors,
                bit_errors,
                symbol_error_rate: rate(symbol_errors, n_sifted),
                bit_error_rate,
                sifted_fraction,
                raw_key_bits_per_photon: 2.0 * sifted_fraction,
                aborted,
            },
            records,
            alice_bits,
            bob_bits,
        }
    }

    /// All blocks in order on the current thread.
    pub fn run(&self) -> ProtocolOutcome {
        let records = (0..self.block_count()).flat_map(|b| self.run_block(b)).collect();
        self.finish(records)
    }
}

/// Validates `config` and runs it single-threaded.
pub fn run(config: ProtocolConfig) -> Result<ProtocolOutcome> {
    Ok(Simulator::new(config)?.run())
}

/// Indices of sifted rounds, in order.
pub fn sift(records: &[RoundRecord]) -> Vec<usize> {
    records.iter().enumerate().filter(|(_, r)| r.sifted).map(|(i, _)| i).collect()
}

fn count_errors(a: &[u8], b: &[u8]) -> (u64, u64) {
    let mut symbols = 0;
    let mut bits = 0;
    for (x, y) in a.chunks(2).zip(b.chunks(2)) {
        let diff = x.iter().zip(y).filter(|(p, q)| p != q).count() as u64;
        bits += diff;
        symbols += (diff > 0) as u64;
    }
    (symbols, bits)
}

/// `(symbol_error_rate, bit_error_rate)` between two sifted bit strings of
/// 2-bit symbols.
pub fn qber(alice_bits: &[u8], bob_bits: &[u8]) -> Result<(f64, f64)> {
    if alice_bits.len() != bob_bits.len() {
        return Err(Error::LengthMismatch { left: alice_bits.len(), right: bob_bits.len() });
    }
    if alice_bits.is_empty() || !alice_bits.len().is_multiple_of(2) {
        return Err(Error::invalid("key strings must hold a positive even number of bits"));
    }
    let (s, b) = count_errors(alice_bits, bob_bits);
    let n = alice_bits.len() as f64;
    Ok((s as f64 / (n / 2.0), b as f64 / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackRates {
    pub symbol: f64,
    pub bit: f64,
}

/// Error rates of an intercept-resend attack over `m` mutually unbiased bases
/// in dimension four: Eve guesses wrong with probability `1 − 1/m`, after which
/// Bob's outcome is uniform over four labels.
pub fn analytic_attack_rates(m: usize, unbiased: bool) -> Result<AttackRates> {
    if !(1..=5).contains(&m) {
        return Err(Error::invalid(format!("basis count {m} not in 1..=5")));
    }
    if !unbiased {
        return Err(Error::invalid("closed form holds only for mutually unbiased bases"));
    }
    let wrong = 1.0 - 1.0 / m as f64;
    Ok(AttackRates { symbol: wrong * 0.75, bit: wrong * 0.5 })
}
