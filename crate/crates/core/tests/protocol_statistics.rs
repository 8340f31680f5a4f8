mod support;

use photonkd_core::mub::{verify_unbiasedness, BasisId, MubCircuits};
use photonkd_core::mzem::MzemSettings;
use photonkd_core::protocol::{analytic_attack_rates, run, Channel, Eavesdropper, ProtocolConfig, Simulator};

use support::oracle::{self, Exits};

const N: u64 = 100_000;

fn ids(set: &[BasisId]) -> Vec<usize> {
    set.iter().map(|b| b.index()).collect()
}

fn measured_exits() -> Exits {
    use photonkd_core::mzem::{MEASURED_PORT_A, MEASURED_PORT_B};
    Exits { va: MEASURED_PORT_A, vb: MEASURED_PORT_B, bs: 0.5 }
}

#[test]
fn oracle_bases_are_mutually_unbiased() {
    for a in 0..5 {
        for b in 0..5 {
            for (i, x) in oracle::listed(a).iter().enumerate() {
                for (j, y) in oracle::listed(b).iter().enumerate() {
                    let p = oracle::prob(x, y);
                    let want = if a != b { 0.25 } else if i == j { 1.0 } else { 0.0 };
                    assert!((p - want).abs() < 1e-12, "({a},{i}) vs ({b},{j}): {p}");
                }
            }
        }
    }
}

#[test]
fn library_decoding_matches_oracle() {
    let circuits = MubCircuits::build().unwrap();
    for b in BasisId::ALL {
        assert_eq!(circuits.label_of_canonical(b), oracle::decode(b.index()), "{b}");
    }
    // The entangled bases come back relabelled by (p, t) -> (p xor t, t).
    assert_eq!(oracle::decode(3), [0, 3, 2, 1]);
    assert_eq!(oracle::decode(4), [0, 3, 2, 1]);
}

#[test]
fn enumeration_reproduces_closed_form_attack_rates() {
    let subsets: [&[usize]; 5] = [&[4], &[0, 3], &[1, 2, 4], &[0, 1, 3, 4], &[0, 1, 2, 3, 4]];
    for set in subsets {
        let (sym, bit) = oracle::sifted_error_rates(set, Some(set), &Exits::ideal());
        let closed = analytic_attack_rates(set.len(), true).unwrap();
        assert!((sym - closed.symbol).abs() < 1e-12, "m = {}: {sym}", set.len());
        assert!((bit - closed.bit).abs() < 1e-12, "m = {}: {bit}", set.len());
    }
    let (s2, b2) = oracle::sifted_error_rates(&[0, 1], Some(&[0, 1]), &Exits::ideal());
    let (s5, b5) = oracle::sifted_error_rates(&[0, 1, 2, 3, 4], Some(&[0, 1, 2, 3, 4]), &Exits::ideal());
    assert!((s2 - 0.375).abs() < 1e-12 && (b2 - 0.25).abs() < 1e-12);
    assert!((s5 - 0.6).abs() < 1e-12 && (b5 - 0.4).abs() < 1e-12);
    assert!(verify_unbiasedness(MubCircuits::build().unwrap().table()).passes(1e-10));
}

#[test]
fn intercept_resend_matches_enumeration_for_every_basis_count() {
    let subsets: [&[BasisId]; 4] = [
        &[BasisId::B1, BasisId::B4],
        &[BasisId::B2, BasisId::B3, BasisId::B5],
        &[BasisId::B1, BasisId::B2, BasisId::B4, BasisId::B5],
        &BasisId::ALL,
    ];
    for (i, set) in subsets.into_iter().enumerate() {
        let m = set.len();
        let cfg = ProtocolConfig::ideal(set.to_vec(), N, 1000 + i as u64).with_intercept_resend();
        let out = run(cfg).unwrap();
        let (sym, bit) = oracle::sifted_error_rates(&ids(set), Some(&ids(set)), &Exits::ideal());
        let s = &out.stats;
        // Bits of one symbol are correlated, so the bit rate uses the symbol count.
        assert!(oracle::within_sigma(s.symbol_error_rate, sym, s.n_sifted, 3.0), "m = {m}: {s:?}");
        assert!(oracle::within_sigma(s.bit_error_rate, bit, s.n_sifted, 3.0), "m = {m}: {s:?}");
        assert!(oracle::within_sigma(s.sifted_fraction, 1.0 / m as f64, N, 3.0), "m = {m}: {s:?}");
    }
}

#[test]
fn ideal_devices_without_eve_make_no_errors() {
    for seed in 0..3 {
        let out = run(ProtocolConfig::ideal(BasisId::ALL.to_vec(), 20_000, seed)).unwrap();
        assert_eq!(out.stats.symbol_errors, 0);
        assert_eq!(out.stats.bit_errors, 0);
        assert_eq!(out.alice_bits, out.bob_bits);
    }
}

#[test]
fn measured_visibilities_match_enumeration() {
    for (i, set) in [vec![BasisId::B1, BasisId::B2], BasisId::ALL.to_vec()].into_iter().enumerate() {
        let mut cfg = ProtocolConfig::ideal(set.clone(), N, 77 + i as u64);
        cfg.mzem = MzemSettings::measured();
        let out = run(cfg).unwrap();
        let (sym, bit) = oracle::sifted_error_rates(&ids(&set), None, &measured_exits());
        let s = &out.stats;
        assert!(sym > 0.05, "preset should misroute noticeably: {sym}");
        assert!(oracle::within_sigma(s.symbol_error_rate, sym, s.n_sifted, 3.0), "{s:?} vs {sym}");
        assert!(oracle::within_sigma(s.bit_error_rate, bit, s.n_sifted, 3.0), "{s:?} vs {bit}");
    }
}

#[test]
fn depolarizing_channel_errs_three_quarters_of_the_time_it_fires() {
    let p = 0.2;
    let mut cfg = ProtocolConfig::ideal(BasisId::ALL.to_vec(), N, 5);
    cfg.channel = Channel { transmission: 1.0, depolarizing: p };
    let s = run(cfg).unwrap().stats;
    assert!(oracle::within_sigma(s.symbol_error_rate, 0.75 * p, s.n_sifted, 3.0), "{s:?}");
}

#[test]
fn half_transmission_halves_the_sifted_fraction() {
    let set = vec![BasisId::B1, BasisId::B3, BasisId::B5];
    let lossless = run(ProtocolConfig::ideal(set.clone(), N, 9)).unwrap().stats;
    let mut cfg = ProtocolConfig::ideal(set, N, 9);
    cfg.channel.transmission = 0.5;
    let lossy = run(cfg).unwrap().stats;
    // Thinning a Bernoulli(1/3) round by an independent Bernoulli(1/2).
    assert!(oracle::within_sigma(lossy.sifted_fraction, 1.0 / 6.0, N, 3.0), "{lossy:?}");
    assert!(oracle::within_sigma(lossless.sifted_fraction, 1.0 / 3.0, N, 3.0), "{lossless:?}");
    assert!(oracle::within_sigma(lossy.n_lost as f64 / N as f64, 0.5, N, 3.0));
    assert_eq!(lossy.symbol_errors, 0);
}

#[test]
fn eve_with_a_subset_of_bases_is_predicted_too() {
    let set = BasisId::ALL.to_vec();
    let mut cfg = ProtocolConfig::ideal(set.clone(), N, 31);
    cfg.eve = Eavesdropper::InterceptResend(vec![BasisId::B4]);
    let s = run(cfg).unwrap().stats;
    let (sym, _) = oracle::sifted_error_rates(&ids(&set), Some(&[3]), &Exits::ideal());
    assert!((sym - 0.6).abs() < 1e-12);
    assert!(oracle::within_sigma(s.symbol_error_rate, sym, s.n_sifted, 3.0), "{s:?}");
}

#[test]
fn replay_and_block_order_do_not_change_records() {
    let mut cfg = ProtocolConfig::ideal(BasisId::ALL.to_vec(), 3 * 4096 + 100, 123).with_intercept_resend();
    cfg.channel = Channel { transmission: 0.8, depolarizing: 0.05 };
    cfg.mzem = MzemSettings::measured();
    let a = run(cfg.clone()).unwrap();
    let b = run(cfg.clone()).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.stats, b.stats);

    let sim = Simulator::new(cfg).unwrap();
    let mut blocks: Vec<_> = (0..sim.block_count()).rev().map(|i| (i, sim.run_block(i))).collect();
    blocks.sort_by_key(|(i, _)| *i);
    let merged = sim.finish(blocks.into_iter().flat_map(|(_, r)| r).collect());
    assert_eq!(merged.records, a.records);
}

#[test]
fn abort_flag_follows_the_bit_error_rate() {
    let mut cfg = ProtocolConfig::ideal(vec![BasisId::B1, BasisId::B2], 20_000, 4).with_intercept_resend();
    cfg.qber_abort_threshold = Some(0.11);
    assert!(run(cfg.clone()).unwrap().stats.aborted);
    cfg.eve = Eavesdropper::None;
    assert!(!run(cfg).unwrap().stats.aborted);
}
