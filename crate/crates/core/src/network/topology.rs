//! Stock network topologies and a random DAG generator.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Input, Network};
use crate::galois::{Field, Gf};

fn all_ones(net: &mut Network) {
    for l in 0..net.links().len() {
        for e in net.inc(l) {
            net.set_coef_at(l, e, Gf::ONE);
        }
    }
}

fn build(field: &Field, nodes: &[&str], sources: &[(&str, &str)], links: &[(&str, &str, &str)]) -> Network {
    let mut net = Network::new(field, 1);
    for n in nodes {
        net.add_node(n).expect("fresh node id");
    }
    for (id, at) in sources {
        net.add_source(id, at).expect("known node");
    }
    for (id, tail, head) in links {
        net.add_link(id, tail, head).expect("known nodes");
    }
    all_ones(&mut net);
    net
}

/// The two-source butterfly with bottleneck `y7`, every coefficient 1.
/// Sink `t1` observes `y5, y8`; sink `t2` observes `y6, y9`.
pub fn butterfly(field: &Field) -> Network {
    let mut net = build(
        field,
        &["a", "b", "c", "d", "t1", "t2"],
        &[("y1", "a"), ("y2", "b")],
        &[
            ("y3", "a", "c"),
            ("y4", "b", "c"),
            ("y5", "a", "t1"),
            ("y6", "b", "t2"),
            ("y7", "c", "d"),
            ("y8", "d", "t1"),
            ("y9", "d", "t2"),
        ],
    );
    net.add_sink("t1", &["y5", "y8"]).unwrap();
    net.add_sink("t2", &["y6", "y9"]).unwrap();
    net
}

/// Two sources at `s` and a relay `r`; the sink `t` observes `y4` (via the
/// relay) and `y5` (direct). Links `y6`, `y7` feed a second receiver `u`.
pub fn relay(field: &Field) -> Network {
    let mut net = build(
        field,
        &["s", "r", "t", "u"],
        &[("y1", "s"), ("y2", "s")],
        &[("y3", "s", "r"), ("y4", "r", "t"), ("y5", "s", "t"), ("y6", "r", "u"), ("y7", "s", "u")],
    );
    net.add_sink("t", &["y4", "y5"]).unwrap();
    net
}

/// The K-source chain. Node `n_i` holds source `y_{i+1}` (and `y1` at
/// `n1`), mixes it with the carry from `n_{i-1}` and emits `o_i` to the
/// receiver `t` and the carry `c_i` to `n_{i+1}`; the last node emits
/// `o_{K-1}` and `o_K`. The transfer matrix at `t` factors as a product of
/// K-1 matrices each touching two adjacent coordinates.
///
/// Panics if `k < 2`.
pub fn chain(field: &Field, k: usize) -> Network {
    assert!(k >= 2, "chain needs at least two sources");
    let mut net = Network::new(field, 1);
    for i in 1..k {
        net.add_node(&format!("n{i}")).unwrap();
    }
    net.add_node("t").unwrap();
    net.add_source("y1", "n1").unwrap();
    for i in 1..k {
        net.add_source(&format!("y{}", i + 1), &format!("n{i}")).unwrap();
    }
    for i in 1..k {
        let here = format!("n{i}");
        net.add_link(&format!("o{i}"), &here, "t").unwrap();
        if i + 1 < k {
            net.add_link(&format!("c{i}"), &here, &format!("n{}", i + 1)).unwrap();
        } else {
            net.add_link(&format!("o{k}"), &here, "t").unwrap();
        }
    }
    all_ones(&mut net);
    let obs: Vec<String> = (1..=k).map(|i| format!("o{i}")).collect();
    let obs: Vec<&str> = obs.iter().map(String::as_str).collect();
    net.add_sink("t", &obs).unwrap();
    net
}

/// Shape of a random network from [`random_network`].
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    pub nodes: usize,
    pub sources: usize,
    pub links: usize,
    pub dim: usize,
}

/// A random DAG: nodes are numbered in topological order, sources sit on
/// the first half of the nodes, and each link leaves a node that already
/// has an input for some later node. Coefficients are uniform nonzero.
/// One sink is declared at the node with the most incoming links, observing
/// all of them; `None` if no link was placeable.
pub fn random_network<R: Rng>(rng: &mut R, field: &Field, p: RandomParams) -> Option<Network> {
    let n = p.nodes.max(2);
    let mut net = Network::new(field, p.dim.max(1));
    for i in 0..n {
        net.add_node(&format!("v{i}")).unwrap();
    }
    let mut active = vec![false; n];
    for s in 0..p.sources.max(1) {
        let at = rng.gen_range(0..(n / 2).max(1));
        active[at] = true;
        net.add_source(&format!("s{}", s + 1), &format!("v{at}")).unwrap();
    }
    for l in 0..p.links {
        let tails: Vec<usize> = (0..n - 1).filter(|&v| active[v]).collect();
        let &tail = tails.choose(rng)?;
        let head = rng.gen_range(tail + 1..n);
        active[head] = true;
        net.add_link(&format!("l{}", l + 1), &format!("v{tail}"), &format!("v{head}")).unwrap();
    }
    for l in 0..net.links().len() {
        for e in net.inc(l) {
            net.set_coef_at(l, e, Gf(rng.gen_range(1..field.order())));
        }
    }
    let mut indeg = vec![Vec::new(); n];
    for (i, l) in net.links().iter().enumerate() {
        indeg[l.head].push(i);
    }
    let sink = (0..n).rev().max_by_key(|&v| indeg[v].len())?;
    if indeg[sink].is_empty() {
        return None;
    }
    let ids: Vec<String> = indeg[sink].iter().map(|&l| net.links()[l].id.clone()).collect();
    let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
    net.add_sink(&format!("v{sink}"), &ids).unwrap();
    Some(net)
}

/// Convenience: the coefficient on `(link, input)` given by names.
pub fn coef_by_name(net: &Network, link: &str, input: &str) -> Gf {
    let l = net.link_index(link).expect("known link");
    let e: Input = net.input_index(input).expect("known input");
    net.coef(l, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn chain_shape() {
        let f = Field::gf(2, 1).unwrap();
        for k in 2..6 {
            let net = chain(&f, k);
            assert_eq!(net.sources().len(), k);
            assert_eq!(net.links().len(), 2 * (k - 1));
            assert_eq!(net.sinks()[0].observes.len(), k);
            assert!(net.is_valid(), "{:?}", net.validate());
        }
    }

    #[test]
    fn relay_shape() {
        let f = Field::gf(3, 1).unwrap();
        let net = relay(&f);
        assert_eq!(net.sources().len() + net.links().len(), 7);
        assert!(net.is_valid());
        assert_eq!(coef_by_name(&net, "y3", "y2"), Gf::ONE);
    }

    #[test]
    fn random_networks_are_valid() {
        let f = Field::gf(3, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let params = RandomParams { nodes: 5, sources: 2, links: 6, dim: 1 };
        for _ in 0..50 {
            let net = random_network(&mut rng, &f, params).unwrap();
            assert!(net.validate().iter().all(|d| !d.is_error()), "{:?}", net.validate());
        }
    }
}
