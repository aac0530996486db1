//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use netcode_mp::factorgraph::{build_ncfg, find_cycles};
use netcode_mp::galois::{Alphabet, FVector, Field, Gf};
use netcode_mp::network::topology::{random_network, RandomParams};
use netcode_mp::network::{ChannelTable, Network, Observation};
use netcode_mp::support::SupportMessage;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn gf(p: u32, m: u32) -> Field {
    Field::gf(p, m).unwrap()
}

/// One of GF(2), GF(3), GF(4), GF(16).
pub fn small_field<R: Rng>(rng: &mut R) -> Field {
    let (p, m) = [(2, 1), (3, 1), (2, 2), (2, 4)][rng.gen_range(0..4)];
    gf(p, m)
}

pub fn random_sources<R: Rng>(rng: &mut R, net: &Network) -> Vec<FVector> {
    let q = net.field().order();
    (0..net.sources().len())
        .map(|_| FVector((0..net.dim()).map(|_| Gf(rng.gen_range(0..q))).collect()))
        .collect()
}

/// A nonempty subset of the declared sink's links, in declaration order.
pub fn observe_some<R: Rng>(rng: &mut R, net: &Network, sym: &netcode_mp::network::SymbolAssignment) -> Observation {
    let sink = &net.sinks()[0];
    let mut links: Vec<usize> = sink.observes.iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
    if links.is_empty() {
        links.push(*sink.observes.choose(rng).unwrap());
    }
    Observation::from_assignment(sink.node, &links, sym)
}

/// log2 of the number of source assignments.
pub fn assignments_log2(net: &Network) -> f64 {
    (net.field().order() as f64).log2() * (net.dim() * net.sources().len()) as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Acyclic,
    Cyclic,
    Any,
}

/// A random deterministic instance over a random small field with
/// n in {1, 2} and at most 10 links, whose NCFG has the requested shape and
/// whose brute-force oracle stays below `2^max_log2` assignments.
pub fn deterministic_instance<R: Rng>(
    rng: &mut R,
    shape: Shape,
    max_log2: f64,
) -> (Network, Observation, Vec<FVector>) {
    loop {
        let field = small_field(rng);
        let p = RandomParams {
            nodes: rng.gen_range(3..=6),
            sources: rng.gen_range(1..=3),
            links: rng.gen_range(2..=10),
            dim: rng.gen_range(1..=2),
        };
        let Some(net) = random_network(rng, &field, p) else { continue };
        if assignments_log2(&net) > max_log2 || !net.is_valid() {
            continue;
        }
        let src = random_sources(rng, &net);
        let sym = net.encode(&src).unwrap();
        let obs = observe_some(rng, &net, &sym);
        let tree = find_cycles(&build_ncfg(&net, &obs).unwrap()).is_forest;
        match shape {
            Shape::Acyclic if !tree => continue,
            Shape::Cyclic if tree => continue,
            _ => return (net, obs, src),
        }
    }
}

/// Random row-stochastic channel tables on a random subset of links (at
/// least one), some rows with exact zeros.
pub fn make_stochastic<R: Rng>(rng: &mut R, net: &mut Network) {
    let links = net.links().len();
    let mut chosen: Vec<usize> = (0..links).filter(|_| rng.gen_bool(0.5)).collect();
    if chosen.is_empty() {
        chosen.push(rng.gen_range(0..links));
    }
    for l in chosen {
        let table = if rng.gen_bool(0.3) {
            ChannelTable::symmetric(net, l, rng.gen_range(0.05..0.5)).unwrap()
        } else {
            ChannelTable::from_rows_fn(net, l, |_, _| {
                let q = Alphabet::new(net.field(), net.dim()).unwrap().size();
                let mut row: Vec<f64> =
                    (0..q).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.01..1.0) }).collect();
                if row.iter().all(|&x| x == 0.0) {
                    row[0] = 1.0;
                }
                let z: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= z);
                row
            })
            .unwrap()
        };
        net.set_channel(table);
    }
}

pub fn as_vectors(msg: &SupportMessage, alphabet: &Alphabet) -> BTreeSet<FVector> {
    msg.to_vectors(alphabet, usize::MAX).unwrap()
}
