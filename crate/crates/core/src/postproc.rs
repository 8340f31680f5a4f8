//! Classical post-processing of the sifted key.
//!
//! Reconciliation is blocked parity comparison with a binary search inside
//! every block whose parities disagree, repeated over several passes with a
//! fresh random permutation before each pass after the first. There is no
//! back-propagation of corrections into earlier passes. Every parity Alice
//! discloses counts as one leaked bit.
//!
//! Privacy amplification hashes the reconciled key with a random Toeplitz
//! matrix over GF(2), drawn from a seed both parties share.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Nonempty string of bits stored one per byte (`0` or `1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("bit string must be nonempty"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid("bit values must be 0 or 1"));
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    /// Bits packed most-significant first, zero padded to whole bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
            .collect()
    }

    /// Inverse of [`BitString::to_bytes`] for a known bit length.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 || len + 8 <= bytes.len() * 8 {
            return Err(Error::invalid("byte count does not match bit length"));
        }
        let bits = (0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect();
        Self::new(bits)
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect()))
    }

    /// Number of positions where the strings differ.
    pub fn hamming(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    fn packed(&self) -> Vec<u64> {
        pack_lsb(&self.0)
    }
}

fn pack_lsb(bits: &[u8]) -> Vec<u64> {
    let mut words = alloc::vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        words[i / 64] |= (b as u64) << (i % 64);
    }
    words
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconcileReport {
    pub corrected: BitString,
    pub parity_bits_leaked: usize,
    /// Fraction of positions still differing from Alice's string.
    pub residual_error_estimate: f64,
    pub passes: usize,
}

fn parity(bits: &[u8], idx: &[usize]) -> u8 {
    idx.iter().fold(0, |p, &i| p ^ bits[i])
}

/// Corrects Bob's string toward Alice's. Alice's string is never modified.
pub fn reconcile(
    alice: &BitString,
    bob: &BitString,
    block_size: usize,
    passes: usize,
    rng: &mut RandomStream,
) -> Result<ReconcileReport> {
    if alice.len() != bob.len() {
        return Err(Error::LengthMismatch { left: alice.len(), right: bob.len() });
    }
    if block_size < 2 {
        return Err(Error::invalid("block size must be at least 2"));
    }
    let a = alice.bits();
    let mut corrected = bob.0.clone();
    let mut order: Vec<usize> = (0..a.len()).collect();
    let mut leaked = 0;
    for pass in 0..passes {
        if pass > 0 {
            rng.shuffle(&mut order);
        }
        for block in order.chunks(block_size) {
            leaked += 1;
            if parity(a, block) == parity(&corrected, block) {
                continue;
            }
            let mut window = block;
            while window.len() > 1 {
                let (left, right) = window.split_at(window.len() / 2);
                leaked += 1;
                window = if parity(a, left) != parity(&corrected, left) { left } else { right };
            }
            corrected[window[0]] ^= 1;
        }
    }
    let corrected = BitString(corrected);
    let residual = alice.hamming(&corrected) as f64 / alice.len() as f64;
    Ok(ReconcileReport { corrected, parity_bits_leaked: leaked, residual_error_estimate: residual, passes })
}

/// Output length `len − leaked − margin`, or an error when not positive.
pub fn amplified_length(len: usize, leaked: usize, security_margin: usize) -> Result<usize> {
    len.checked_sub(leaked)
        .and_then(|r| r.checked_sub(security_margin))
        .filter(|&r| r > 0)
        .ok_or_else(|| {
            Error::invalid(alloc::format!(
                "nothing left to distill: length {len}, leaked {leaked}, margin {security_margin}"
            ))
        })
}

/// Seed bits `r` of the Toeplitz matrix `T[i][j] = r[i − j + n − 1]`.
pub fn toeplitz_seed_bits(n: usize, out: usize, seed: u64) -> Vec<u8> {
    let mut rng = RandomStream::new(seed);
    let total = n + out - 1;
    let mut bits = Vec::with_capacity(total);
    while bits.len() < total {
        let w = rng.next_u64();
        bits.extend((0..64).map(|k| ((w >> k) & 1) as u8).take(total - bits.len()));
    }
    bits
}

/// Hashes `key` down to `len − leaked − margin` bits with the Toeplitz matrix
/// generated from `seed`.
pub fn privacy_amplify(key: &BitString, leaked: usize, seed: u64, security_margin: usize) -> Result<BitString> {
    let n = key.len();
    let out = amplified_length(n, leaked, security_margin)?;
    let r = toeplitz_seed_bits(n, out, seed);
    // Row i of T is the window q[out−1−i .. out−1−i+n] of the reversed seed.
    let q: Vec<u8> = r.iter().rev().copied().collect();
    let qw = pack_lsb(&q);
    let kw = key.packed();
    let window = |bit: usize| -> u64 {
        let (idx, sh) = (bit / 64, bit % 64);
        let lo = qw.get(idx).copied().unwrap_or(0);
        if sh == 0 {
            lo
        } else {
            (lo >> sh) | (qw.get(idx + 1).copied().unwrap_or(0) << (64 - sh))
        }
    };
    let bits = (0..out)
        .map(|i| {
            let off = out - 1 - i;
            let acc = kw.iter().enumerate().fold(0u32, |acc, (w, &k)| acc ^ (window(off + 64 * w) & k).count_ones());
            (acc & 1) as u8
        })
        .collect();
    BitString::new(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn random_bits(n: usize, rng: &mut RandomStream) -> BitString {
        BitString::new((0..n).map(|_| rng.below(2) as u8).collect()).unwrap()
    }

    /// Direct evaluation of the Toeplitz product.
    fn toeplitz_naive(key: &BitString, out: usize, seed: u64) -> Vec<u8> {
        let n = key.len();
        let r = toeplitz_seed_bits(n, out, seed);
        (0..out)
            .map(|i| (0..n).fold(0u8, |acc, j| acc ^ (r[i + n - 1 - j] & key.bits()[j])))
            .collect()
    }

    #[test]
    fn bitstring_validation_and_bytes() {
        assert!(BitString::new(vec![]).is_err());
        assert!(BitString::new(vec![0, 2]).is_err());
        let b = BitString::new(vec![1, 0, 1, 1, 0, 0, 0, 0, 1, 1]).unwrap();
        assert_eq!(b.to_bytes(), vec![0b1011_0000, 0b1100_0000]);
        assert_eq!(BitString::from_bytes(&b.to_bytes(), 10).unwrap(), b);
        assert!(BitString::from_bytes(&b.to_bytes(), 17).is_err());
        assert!(BitString::from_bytes(&b.to_bytes(), 8).is_err());
    }

    #[test]
    fn identical_inputs_leak_only_block_parities() {
        let mut rng = RandomStream::new(1);
        let a = random_bits(1000, &mut rng);
        let rep = reconcile(&a, &a, 8, 3, &mut rng).unwrap();
        assert_eq!(rep.corrected, a);
        assert_eq!(rep.parity_bits_leaked, 1000 / 8 * 3);
        assert_eq!(rep.residual_error_estimate, 0.0);
    }

    #[test]
    fn single_flip_is_found_by_binary_search() {
        let mut rng = RandomStream::new(2);
        let a = random_bits(800, &mut rng);
        for pos in [0, 7, 8, 399, 799] {
            let mut b = a.clone().into_bits();
            b[pos] ^= 1;
            let b = BitString::new(b).unwrap();
            let rep = reconcile(&a, &b, 8, 1, &mut rng).unwrap();
            assert_eq!(rep.corrected, a);
            assert_eq!(rep.parity_bits_leaked, 800 / 8 + 3);
        }
    }

    #[test]
    fn reconcile_rejects_bad_input() {
        let mut rng = RandomStream::new(3);
        let a = random_bits(10, &mut rng);
        let b = random_bits(11, &mut rng);
        assert!(matches!(reconcile(&a, &b, 4, 1, &mut rng), Err(Error::LengthMismatch { .. })));
        assert!(reconcile(&a, &a, 1, 1, &mut rng).is_err());
    }

    #[test]
    fn amplification_length_and_errors() {
        let mut rng = RandomStream::new(4);
        let k = random_bits(100, &mut rng);
        assert_eq!(privacy_amplify(&k, 30, 9, 10).unwrap().len(), 60);
        assert!(privacy_amplify(&k, 90, 9, 10).is_err());
        assert!(privacy_amplify(&k, 200, 9, 0).is_err());
    }

    #[test]
    fn amplification_matches_naive_product() {
        let mut rng = RandomStream::new(5);
        for n in [1usize, 63, 64, 65, 130, 300] {
            let k = random_bits(n.max(2), &mut rng);
            let out = k.len() / 2;
            let fast = privacy_amplify(&k, k.len() - out, 77, 0).unwrap();
            assert_eq!(fast.bits(), toeplitz_naive(&k, out, 77).as_slice(), "n = {n}");
        }
    }

    #[test]
    fn amplification_replays() {
        let mut rng = RandomStream::new(6);
        let k = random_bits(500, &mut rng);
        assert_eq!(privacy_amplify(&k, 100, 42, 50).unwrap(), privacy_amplify(&k, 100, 42, 50).unwrap());
        assert_ne!(privacy_amplify(&k, 100, 42, 50).unwrap(), privacy_amplify(&k, 100, 43, 50).unwrap());
    }
}
