//! Instances for timing the decoders on the chain network.

use netcode_mp::galois::{rref, FVector, Field, Gf, OpCount};
use netcode_mp::network::{topology, Network, Observation};

/// A chain code with an invertible transfer matrix, with the sink's
/// observation of deterministic source values. The first code seed at or
/// after `seed` that is invertible is used.
pub fn chain_instance(k: usize, field: &Field, seed: u64) -> (Network, Observation, Vec<FVector>) {
    let base = topology::chain(field, k);
    let net = (seed..)
        .map(|s| base.random_code(field, s))
        .find(|net| {
            let a = net.global_transfer_matrix(&net.sinks()[0].observes).expect("chain is valid");
            rref(&a, &mut OpCount::default()).rank == k
        })
        .expect("some code is invertible");
    let src: Vec<FVector> = (0..k as u32).map(|i| FVector(vec![Gf((i * 7 + 1) % field.order())])).collect();
    let sym = net.encode(&src).expect("deterministic code");
    let sink = &net.sinks()[0];
    let obs = Observation::from_assignment(sink.node, &sink.observes, &sym);
    (net, obs, src)
}
