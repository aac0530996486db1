//! Brute-force references: enumerate every source assignment.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::galois::{Alphabet, FVector, OpCount};
use crate::network::{Input, Network, Observation};

/// Largest number of assignments the oracles will enumerate.
pub const ORACLE_GUARD: u64 = 1 << 20;

fn target_inputs(net: &Network, targets: &[&str]) -> Result<Vec<Input>> {
    targets.iter().map(|t| net.input_index(t)).collect()
}

fn count(alphabet: &Alphabet, k: usize) -> Result<usize> {
    let total = (alphabet.size() as u64).checked_pow(k as u32).filter(|&x| x <= ORACLE_GUARD);
    total
        .map(|t| t as usize)
        .ok_or_else(|| Error::Capacity(format!("{}^{k} source assignments", alphabet.size())))
}

fn sources_at(alphabet: &Alphabet, k: usize, mut idx: usize) -> Vec<FVector> {
    let q = alphabet.size();
    (0..k)
        .map(|_| {
            let v = alphabet.vector(idx % q);
            idx /= q;
            v
        })
        .collect()
}

/// Exact marginal support of each target (a source or link) given the
/// observation of a deterministic network.
pub fn oracle_marginal_support(
    net: &Network,
    obs: &Observation,
    targets: &[&str],
) -> Result<Vec<(String, BTreeSet<FVector>)>> {
    net.check_observation(obs)?;
    let field = net.field();
    let alphabet = Alphabet::new(field, net.dim())?;
    let k = net.sources().len();
    let total = count(&alphabet, k)?;
    let gcv = net.global_coding_vectors()?;
    let inputs = target_inputs(net, targets)?;
    let mut ops = OpCount::default();
    let link_value = |src: &[FVector], l: usize, ops: &mut OpCount| {
        let mut acc = FVector::zeros(net.dim());
        for (s, y) in src.iter().enumerate() {
            acc = acc.add(field, &y.scale(field, gcv[l].0[s], ops), ops);
        }
        acc
    };
    let mut out = vec![BTreeSet::new(); targets.len()];
    for idx in 0..total {
        let src = sources_at(&alphabet, k, idx);
        if obs.values.iter().any(|(l, v)| link_value(&src, *l, &mut ops) != *v) {
            continue;
        }
        for (i, input) in inputs.iter().enumerate() {
            let v = match *input {
                Input::Source(s) => src[s].clone(),
                Input::Link(l) => link_value(&src, l, &mut ops),
            };
            out[i].insert(v);
        }
    }
    Ok(targets.iter().map(|t| t.to_string()).zip(out).collect())
}

/// Exact posterior marginal of each target under uniform independent
/// sources, by depth-first enumeration over the sources and the outputs of
/// unobserved stochastic links. Fails with a contradiction when the
/// observation has probability zero.
pub fn oracle_posterior(net: &Network, obs: &Observation, targets: &[&str]) -> Result<Vec<(String, Vec<f64>)>> {
    net.check_observation(obs)?;
    let alphabet = Alphabet::new(net.field(), net.dim())?;
    let k = net.sources().len();
    let order = net.topo_order()?;
    let inputs = target_inputs(net, targets)?;
    let mut observed: Vec<Option<usize>> = vec![None; net.links().len()];
    for (l, v) in &obs.values {
        observed[*l] = Some(alphabet.index(v));
    }
    let branching = order.iter().filter(|&&l| net.channels().contains_key(&l) && observed[l].is_none()).count();
    count(&alphabet, k + branching)?;

    struct Walk<'a> {
        net: &'a Network,
        alphabet: &'a Alphabet,
        order: &'a [usize],
        observed: &'a [Option<usize>],
        inputs: &'a [Input],
        src: Vec<usize>,
        links: Vec<usize>,
        acc: Vec<Vec<f64>>,
    }

    impl Walk<'_> {
        fn value(&self, e: Input) -> usize {
            match e {
                Input::Source(s) => self.src[s],
                Input::Link(l) => self.links[l],
            }
        }

        fn go(&mut self, step: usize, weight: f64) {
            if weight == 0.0 {
                return;
            }
            let Some(&l) = self.order.get(step) else {
                for (i, &t) in self.inputs.iter().enumerate() {
                    let v = self.value(t);
                    self.acc[i][v] += weight;
                }
                return;
            };
            match self.net.channels().get(&l) {
                None => {
                    let mut y = 0;
                    for e in self.net.inc(l) {
                        let c = self.net.coef(l, e);
                        y = self.alphabet.add(y, self.alphabet.scale(c, self.value(e)));
                    }
                    if self.observed[l].is_some_and(|o| o != y) {
                        return;
                    }
                    self.links[l] = y;
                    self.go(step + 1, weight);
                }
                Some(table) => {
                    let ins: Vec<usize> = table.inputs().iter().map(|&e| self.value(e)).collect();
                    let row = table.row(&ins).to_vec();
                    let outs: Vec<usize> = match self.observed[l] {
                        Some(o) => vec![o],
                        None => (0..row.len()).collect(),
                    };
                    for y in outs {
                        self.links[l] = y;
                        self.go(step + 1, weight * row[y]);
                    }
                }
            }
        }
    }

    let q = alphabet.size();
    let mut walk = Walk {
        net,
        alphabet: &alphabet,
        order: &order,
        observed: &observed,
        inputs: &inputs,
        src: vec![0; k],
        links: vec![0; net.links().len()],
        acc: vec![vec![0.0; q]; inputs.len()],
    };
    let total = q.pow(k as u32);
    let prior = 1.0 / total as f64;
    for idx in 0..total {
        let mut r = idx;
        for s in 0..k {
            walk.src[s] = r % q;
            r /= q;
        }
        walk.go(0, prior);
    }
    let mut out = Vec::new();
    for (t, mut m) in targets.iter().zip(walk.acc) {
        let z: f64 = m.iter().sum();
        if z == 0.0 {
            return Err(Error::Contradiction("observation has probability zero".into()));
        }
        m.iter_mut().for_each(|x| *x /= z);
        out.push((t.to_string(), m));
    }
    Ok(out)
}
