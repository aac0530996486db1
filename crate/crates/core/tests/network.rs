mod common;

use common::gf;
use netcode_mp::galois::{rref, FMatrix, FVector, Gf, OpCount};
use netcode_mp::network::topology::{self, coef_by_name};
use netcode_mp::network::{ChannelTable, Input, Network};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn v(x: &[u32]) -> FVector {
    FVector::from_reprs(x)
}

#[test]
fn butterfly_all_ones_gf2() {
    let f = gf(2, 1);
    let net = topology::butterfly(&f);
    let sym = net.encode(&[v(&[1]), v(&[0])]).unwrap();
    let y = |id: &str| sym.links[net.link_index(id).unwrap()].clone();
    assert_eq!(y("y7"), v(&[1]));
    assert_eq!(y("y5"), v(&[1]));
    assert_eq!(y("y8"), v(&[1]));
    let sink = net.sink_by_name("t1").unwrap();
    let a = net.global_transfer_matrix(&sink.observes).unwrap();
    assert_eq!(a, FMatrix::from_reprs(&f, &[&[1, 0], &[1, 1]]).unwrap());
    // every pattern agrees with A
    for p in 0..4u32 {
        let src = [v(&[p & 1]), v(&[p >> 1])];
        let sym = net.encode(&src).unwrap();
        let x = FVector(vec![src[0].0[0], src[1].0[0]]);
        let ax = a.mul_vec(&x, &mut OpCount::default()).unwrap();
        let obs: Vec<Gf> = sink.observes.iter().map(|&l| sym.links[l].0[0]).collect();
        assert_eq!(ax.0, obs);
    }
}

#[test]
fn direct_links_give_identity() {
    let f = gf(5, 1);
    let mut net = Network::new(&f, 1);
    net.add_node("a").unwrap();
    net.add_node("t").unwrap();
    for i in 0..3 {
        net.add_source(&format!("s{i}"), "a").unwrap();
        net.add_link(&format!("l{i}"), "a", "t").unwrap();
        net.set_coef(&format!("l{i}"), &format!("s{i}"), Gf::ONE).unwrap();
    }
    let a = net.global_transfer_matrix(&[0, 1, 2]).unwrap();
    assert_eq!(a, FMatrix::identity(&f, 3));
}

#[test]
fn chain_k3_gf5_matches_transfer_matrix() {
    let f = gf(5, 1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for seed in 0..20 {
        let net = topology::chain(&f, 3).random_code(&f, seed);
        let src = common::random_sources(&mut rng, &net);
        let sym = net.encode(&src).unwrap();
        let obs = &net.sinks()[0].observes;
        let a = net.global_transfer_matrix(obs).unwrap();
        let x = FVector(src.iter().map(|s| s.0[0]).collect());
        let ax = a.mul_vec(&x, &mut OpCount::default()).unwrap();
        let got: Vec<Gf> = obs.iter().map(|&l| sym.links[l].0[0]).collect();
        assert_eq!(ax.0, got);
    }
}

/// The transfer matrix of the chain as a product of K-1 local stages, each
/// acting on two adjacent coordinates.
#[test]
fn chain_transfer_is_product_of_sparse_stages() {
    let f = gf(2, 4);
    for k in [3, 4, 6] {
        let net = topology::chain(&f, k).random_code(&f, k as u64);
        let c = |l: &str, e: &str| coef_by_name(&net, l, e);
        let mut ops = OpCount::default();
        let mut acc = FMatrix::identity(&f, k);
        // coordinate i carries o_i (i < stage) or the stage-i carry
        for i in 1..k {
            let mut b = FMatrix::identity(&f, k);
            let (a, bi) = (i - 1, i);
            let carry_in = if i == 1 { "y1".to_string() } else { format!("c{}", i - 1) };
            let here = format!("y{}", i + 1);
            let out_a = format!("o{i}");
            let out_b = if i + 1 < k { format!("c{i}") } else { format!("o{k}") };
            b.set(a, a, c(&out_a, &carry_in));
            b.set(a, bi, c(&out_a, &here));
            b.set(bi, a, c(&out_b, &carry_in));
            b.set(bi, bi, c(&out_b, &here));
            assert!(b.nonzero_count() <= k + 2);
            acc = b.mul(&acc, &mut ops).unwrap();
        }
        let a = net.global_transfer_matrix(&net.sinks()[0].observes).unwrap();
        assert_eq!(a, acc, "K={k}");
    }
}

#[test]
fn gf16_butterfly_codes_mostly_invertible() {
    let f = gf(2, 4);
    let base = topology::butterfly(&f);
    let mut ok = 0;
    for seed in 0..100 {
        let net = base.random_code(&f, seed);
        let full = net.sinks().iter().all(|s| {
            let a = net.global_transfer_matrix(&s.observes).unwrap();
            rref(&a, &mut OpCount::default()).rank == 2
        });
        ok += full as usize;
    }
    assert!(ok >= 85, "{ok} of 100 codes invertible at both sinks");
}

#[test]
fn random_code_is_deterministic_and_gf2_is_all_ones() {
    let f = gf(3, 1);
    let base = topology::chain(&f, 4);
    assert_eq!(base.random_code(&f, 9).coefficients(), base.random_code(&f, 9).coefficients());
    let g2 = gf(2, 1);
    let net = topology::chain(&g2, 2).random_code(&g2, 5);
    assert!(net.coefficients().values().all(|&c| c == Gf::ONE));
}

#[test]
fn stochastic_degenerate_and_zero_flip_match_encode() {
    let f = gf(3, 1);
    let base = topology::butterfly(&f).random_code(&f, 1);
    let src = [v(&[2]), v(&[1])];
    let want = base.encode(&src).unwrap();
    let mut a = base.clone();
    let mut b = base.clone();
    for l in 0..base.links().len() {
        a.set_channel(ChannelTable::degenerate(&base, l).unwrap());
        b.set_channel(ChannelTable::symmetric(&base, l, 0.0).unwrap());
    }
    for seed in 0..5 {
        assert_eq!(a.encode_stochastic(&src, seed).unwrap(), want);
        assert_eq!(b.encode_stochastic(&src, seed).unwrap(), want);
    }
}

#[test]
fn half_flip_rate() {
    let f = gf(2, 1);
    let mut net = Network::new(&f, 1);
    net.add_node("a").unwrap();
    net.add_node("b").unwrap();
    net.add_source("s", "a").unwrap();
    net.add_link("l", "a", "b").unwrap();
    net.set_coef("l", "s", Gf::ONE).unwrap();
    net.set_channel(ChannelTable::symmetric(&net, 0, 0.5).unwrap());
    let flips = (0..10_000u64).filter(|&seed| net.encode_stochastic(&[v(&[0])], seed).unwrap().links[0] != v(&[0])).count();
    let rate = flips as f64 / 10_000.0;
    assert!((rate - 0.5).abs() <= 0.02, "rate {rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Encoding is linear in the sources.
    #[test]
    fn encode_is_linear(seed in any::<u64>(), a in 0u32..16) {
        let f = gf(2, 4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let net = topology::butterfly(&f).random_code(&f, seed);
        let x = common::random_sources(&mut rng, &net);
        let y = common::random_sources(&mut rng, &net);
        let mut ops = OpCount::default();
        let c = Gf(a);
        let z: Vec<FVector> = x.iter().zip(&y).map(|(p, q)| p.scale(&f, c, &mut ops).add(&f, q, &mut ops)).collect();
        let ex = net.encode(&x).unwrap();
        let ey = net.encode(&y).unwrap();
        let ez = net.encode(&z).unwrap();
        for l in 0..net.links().len() {
            let want = ex.links[l].scale(&f, c, &mut ops).add(&f, &ey.links[l], &mut ops);
            prop_assert_eq!(&ez.links[l], &want);
        }
    }

    /// Every key of a random code lies in inc(l).
    #[test]
    fn random_code_keys_are_incident(seed in any::<u64>()) {
        let f = gf(3, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = topology::RandomParams { nodes: rng.gen_range(3..7), sources: 2, links: rng.gen_range(2..9), dim: 1 };
        if let Some(net) = topology::random_network(&mut rng, &f, p) {
            for &(l, e) in net.coefficients().keys() {
                prop_assert!(net.inc(l).contains(&e));
                if let Input::Link(e) = e {
                    prop_assert_eq!(net.links()[e].head, net.links()[l].tail);
                }
            }
            prop_assert!(net.validate().iter().all(|d| !d.is_error()));
        }
    }
}
