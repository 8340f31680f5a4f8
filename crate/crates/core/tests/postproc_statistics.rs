use photonkd_core::postproc::{privacy_amplify, reconcile, BitString};
use photonkd_core::RandomStream;
use rand_core::RngCore;

fn random_key(n: usize, rng: &mut RandomStream) -> BitString {
    BitString::new((0..n).map(|_| rng.below(2) as u8).collect()).unwrap()
}

fn with_errors(key: &BitString, rate: f64, rng: &mut RandomStream) -> BitString {
    BitString::new(key.bits().iter().map(|&b| b ^ rng.chance(rate) as u8).collect()).unwrap()
}

#[test]
fn five_percent_errors_are_corrected() {
    let mut rng = RandomStream::new(2024);
    let mut worst = 0.0f64;
    let mut total = 0.0;
    for _ in 0..100 {
        let alice = random_key(10_000, &mut rng);
        let bob = with_errors(&alice, 0.05, &mut rng);
        let rep = reconcile(&alice, &bob, 8, 4, &mut rng).unwrap();
        assert_eq!(rep.residual_error_estimate, alice.hamming(&rep.corrected) as f64 / 10_000.0);
        worst = worst.max(rep.residual_error_estimate);
        total += rep.residual_error_estimate;
    }
    assert!(total / 100.0 < 1e-3, "mean residual {}", total / 100.0);
    assert!(worst < 1e-3, "worst residual {worst}");
}

#[test]
fn single_error_costs_three_search_parities() {
    let mut rng = RandomStream::new(8);
    let alice = random_key(4096, &mut rng);
    for pos in [0, 1, 2048, 4095] {
        let mut b = alice.clone().into_bits();
        b[pos] ^= 1;
        let rep = reconcile(&alice, &BitString::new(b).unwrap(), 8, 1, &mut rng).unwrap();
        assert_eq!(rep.corrected, alice);
        assert!(rep.parity_bits_leaked <= 4096 / 8 + 3);
    }
}

#[test]
fn amplified_bits_are_unbiased() {
    let n = 256;
    let out = 64;
    let trials = 10_000;
    let mut rng = RandomStream::new(55);
    let mut ones = vec![0u32; out];
    for _ in 0..trials {
        let seed = rng.next_u64();
        let key = random_key(n, &mut rng);
        let h = privacy_amplify(&key, n - out, seed, 0).unwrap();
        for (c, &b) in ones.iter_mut().zip(h.bits()) {
            *c += b as u32;
        }
    }
    let sigma = (0.25 / trials as f64).sqrt();
    // 64 simultaneous checks; allow four sigma so a fair hash passes reliably.
    for (i, &c) in ones.iter().enumerate() {
        let f = c as f64 / trials as f64;
        assert!((f - 0.5).abs() < 4.0 * sigma, "bit {i}: {f}");
    }
}

#[test]
fn output_length_is_exact() {
    let mut rng = RandomStream::new(1);
    let key = random_key(1000, &mut rng);
    for (leaked, margin) in [(0, 0), (100, 50), (998, 1), (0, 999)] {
        assert_eq!(privacy_amplify(&key, leaked, 3, margin).unwrap().len(), 1000 - leaked - margin);
    }
    assert!(privacy_amplify(&key, 500, 3, 500).is_err());
}
