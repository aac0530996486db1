//! Sum-product message passing with dense probability tables.

pub mod engine;

use engine::{Direction, Edges, MessageRules};

use crate::error::{Error, Result};
use crate::factorgraph::{ClusterPayload, FactorGraph, Payload, Slot};
use crate::galois::Alphabet;

/// Default cap on the number of configurations a factor update may visit.
pub const TABLE_GUARD: usize = 1_000_000;

/// A message: nonnegative weights over the alphabet, summing to 1 unless
/// every weight is zero.
pub type TableMessage = Vec<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    TwoPass,
    Flooding,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub mode: Mode,
    pub max_iterations: usize,
    /// Fixpoint threshold on the max-norm change of table messages.
    pub tolerance: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { mode: Mode::Flooding, max_iterations: 1000, tolerance: 1e-12 }
    }
}

impl Schedule {
    pub fn two_pass() -> Self {
        Schedule { mode: Mode::TwoPass, ..Schedule::default() }
    }

    pub fn flooding(max_iterations: usize) -> Self {
        Schedule { mode: Mode::Flooding, max_iterations: max_iterations.max(1), ..Schedule::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SumProdReport {
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
    pub contradiction: bool,
    pub messages: usize,
}

/// Scale to sum 1. Returns false, leaving `m` untouched, if it is all zero.
pub fn normalize(m: &mut [f64]) -> bool {
    let s: f64 = m.iter().sum();
    if s <= 0.0 {
        return false;
    }
    m.iter_mut().for_each(|x| *x /= s);
    true
}

/// Pointwise product of the incoming messages, normalized; uniform when
/// there are none.
pub fn var_update(size: usize, incoming: &[&[f64]]) -> Result<TableMessage> {
    let mut out = vec![1.0; size];
    for m in incoming {
        if m.len() != size {
            return Err(Error::Usage(format!("message over {} symbols, expected {size}", m.len())));
        }
        out.iter_mut().zip(m.iter()).for_each(|(o, x)| *o *= x);
    }
    normalize(&mut out);
    Ok(out)
}

/// Visit every point of the product `choices[0] × choices[1] × …`.
pub(crate) fn for_each_config(choices: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if choices.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; choices.len()];
    let mut vals: Vec<usize> = choices.iter().map(|c| c[0]).collect();
    loop {
        f(&vals);
        let mut i = 0;
        loop {
            if i == choices.len() {
                return;
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                vals[i] = choices[i][idx[i]];
                break;
            }
            idx[i] = 0;
            vals[i] = choices[i][0];
            i += 1;
        }
    }
}

pub(crate) fn check_guard(choices: &[Vec<usize>], guard: usize, what: &str) -> Result<()> {
    let total = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()).filter(|&t| t <= guard));
    if total.is_none() {
        return Err(Error::Capacity(format!("{what} would enumerate more than {guard} configurations")));
    }
    Ok(())
}

impl ClusterPayload {
    /// Product of the parts at the given external and internal symbols.
    pub fn weight(&self, alphabet: &Alphabet, ext: &[usize], int: &[usize]) -> f64 {
        let mut w = 1.0;
        let mut vals = Vec::new();
        for part in &self.parts {
            vals.clear();
            vals.extend(part.slots.iter().map(|s| match *s {
                Slot::External(i) => ext[i],
                Slot::Internal(j) => int[j],
            }));
            w *= part.payload.weight(alphabet, &vals);
            if w == 0.0 {
                break;
            }
        }
        w
    }
}

/// Unnormalized message from `factor` to its variable at `pos`.
pub fn factor_update(
    g: &FactorGraph,
    factor: usize,
    pos: usize,
    incoming: &[Option<&[f64]>],
    guard: usize,
) -> Result<TableMessage> {
    let alphabet = g.alphabet()?;
    let a = alphabet.size();
    let fac = &g.factors()[factor];
    let mut out = vec![0.0; a];
    match &fac.payload {
        Payload::Delta(v) => out[alphabet.index(v)] = 1.0,
        Payload::Linear { coefs } => {
            if a.saturating_mul(a) > guard {
                return Err(Error::Capacity(format!("convolution over {a} symbols exceeds the table guard")));
            }
            // distribution of s = Σ_{i≠pos} c_i y_i
            let mut dist = vec![0.0; a];
            dist[0] = 1.0;
            for (i, m) in incoming.iter().enumerate() {
                if i == pos {
                    continue;
                }
                let m = m.expect("incoming message");
                let scaled: Vec<usize> = (0..a).map(|x| alphabet.scale(coefs[i], x)).collect();
                let mut next = vec![0.0; a];
                for (s, &ps) in dist.iter().enumerate() {
                    if ps == 0.0 {
                        continue;
                    }
                    for (x, &px) in m.iter().enumerate() {
                        if px != 0.0 {
                            next[alphabet.add(s, scaled[x])] += ps * px;
                        }
                    }
                }
                dist = next;
            }
            let cj = coefs[pos];
            if cj.is_zero() {
                out.fill(dist[0]);
            } else {
                let field = g.field();
                let k = field.neg(field.inv(cj)?);
                for (s, &ps) in dist.iter().enumerate() {
                    out[alphabet.scale(k, s)] += ps;
                }
            }
        }
        Payload::Table(_) => {
            let choices: Vec<Vec<usize>> = (0..fac.vars.len()).map(|_| (0..a).collect()).collect();
            check_guard(&choices, guard, &format!("factor {}", fac.id))?;
            for_each_config(&choices, |vals| {
                let mut w = fac.payload.weight(&alphabet, vals);
                for (i, m) in incoming.iter().enumerate() {
                    if let Some(m) = m {
                        w *= m[vals[i]];
                    }
                }
                out[vals[pos]] += w;
            });
        }
        Payload::Cluster(c) => {
            let ne = fac.vars.len();
            let choices: Vec<Vec<usize>> = (0..ne + c.internal.len()).map(|_| (0..a).collect()).collect();
            check_guard(&choices, guard, &format!("factor {}", fac.id))?;
            for_each_config(&choices, |vals| {
                let mut w = 1.0;
                for (i, m) in incoming.iter().enumerate() {
                    if let Some(m) = m {
                        w *= m[vals[i]];
                    }
                }
                if w != 0.0 {
                    w *= c.weight(&alphabet, &vals[..ne], &vals[ne..]);
                }
                out[vals[pos]] += w;
            });
        }
    }
    Ok(out)
}

/// Sum-product rules over dense tables.
pub struct TableRules {
    size: usize,
    guard: usize,
    tolerance: f64,
    pub contradiction: bool,
}

impl TableRules {
    pub fn new(g: &FactorGraph, guard: usize, tolerance: f64) -> Result<Self> {
        let size = g.alphabet()?.size();
        if size > guard {
            return Err(Error::Capacity(format!("alphabet of {size} symbols exceeds the table guard")));
        }
        Ok(TableRules { size, guard, tolerance, contradiction: false })
    }

    fn finish(&mut self, mut m: TableMessage) -> TableMessage {
        if !normalize(&mut m) {
            self.contradiction = true;
        }
        m
    }
}

impl MessageRules for TableRules {
    type Msg = TableMessage;

    fn initial(&mut self, _: &FactorGraph) -> TableMessage {
        vec![1.0 / self.size as f64; self.size]
    }

    fn var_to_factor(&mut self, _: &FactorGraph, _: usize, incoming: &[&TableMessage]) -> Result<TableMessage> {
        let inc: Vec<&[f64]> = incoming.iter().map(|m| m.as_slice()).collect();
        let m = var_update(self.size, &inc)?;
        if m.iter().all(|&x| x == 0.0) {
            self.contradiction = true;
        }
        Ok(m)
    }

    fn factor_to_var(
        &mut self,
        g: &FactorGraph,
        factor: usize,
        pos: usize,
        incoming: &[Option<&TableMessage>],
    ) -> Result<TableMessage> {
        let inc: Vec<Option<&[f64]>> = incoming.iter().map(|m| m.map(|m| m.as_slice())).collect();
        let m = factor_update(g, factor, pos, &inc, self.guard)?;
        Ok(self.finish(m))
    }

    fn belief(&mut self, g: &FactorGraph, var: usize, incoming: &[&TableMessage]) -> Result<TableMessage> {
        self.var_to_factor(g, var, incoming)
    }

    fn unchanged(&mut self, old: &TableMessage, new: &TableMessage) -> bool {
        max_diff(old, new) <= self.tolerance
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Beliefs (normalized marginals) of every variable.
#[derive(Clone, Debug)]
pub struct SumProdResult {
    pub beliefs: Vec<TableMessage>,
    pub report: SumProdReport,
}

pub fn run(g: &FactorGraph, schedule: &Schedule) -> Result<SumProdResult> {
    run_guarded(g, schedule, TABLE_GUARD)
}

pub fn run_guarded(g: &FactorGraph, schedule: &Schedule, guard: usize) -> Result<SumProdResult> {
    let edges = Edges::new(g);
    let mut rules = TableRules::new(g, guard, schedule.tolerance)?;
    let mut report = SumProdReport::default();
    let state = match schedule.mode {
        Mode::TwoPass => {
            let (state, msgs) = engine::two_pass(g, &edges, &mut rules)?;
            report.iterations = 1;
            report.converged = true;
            report.messages = msgs;
            state
        }
        Mode::Flooding => {
            let mut state = engine::initial_state(g, &edges, &mut rules);
            for it in 1..=schedule.max_iterations {
                let mut residual = 0.0f64;
                let changed = engine::flood_step(g, &edges, &mut rules, &mut state, &mut |_: Direction, _, old: &TableMessage, new: &TableMessage| {
                    residual = residual.max(max_diff(old, new));
                })?;
                report.iterations = it;
                report.max_residual = residual;
                report.messages += 2 * edges.len();
                if !changed {
                    report.converged = true;
                    break;
                }
            }
            state
        }
    };
    let beliefs = engine::beliefs(g, &edges, &mut rules, &state)?;
    report.contradiction = rules.contradiction || beliefs.iter().any(|b| b.iter().all(|&x| x == 0.0));
    Ok(SumProdResult { beliefs, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::{build_ncfg, find_cycles, Origin};
    use crate::galois::{FVector, Field, Gf};
    use crate::network::{topology, ChannelTable, Network, Observation};
    use rand::{Rng, SeedableRng};

    fn gf(p: u32, m: u32) -> Field {
        Field::gf(p, m).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        max_diff(a, b) <= 1e-12
    }

    #[test]
    fn var_update_rules() {
        assert!(close(&var_update(2, &[]).unwrap(), &[0.5, 0.5]));
        assert!(close(&var_update(2, &[&[0.3, 0.7]]).unwrap(), &[0.3, 0.7]));
        assert!(close(&var_update(2, &[&[0.8, 0.2], &[0.5, 0.5]]).unwrap(), &[0.8, 0.2]));
        assert!(var_update(3, &[&[0.5, 0.5]]).is_err());
    }

    fn parity_graph(f: &Field) -> FactorGraph {
        let mut g = FactorGraph::new(f, 1);
        for v in ["y", "a", "b"] {
            g.add_variable(v, None).unwrap();
        }
        let coefs = vec![Gf::ONE, f.neg(Gf::ONE), f.neg(Gf::ONE)];
        g.add_factor("phi", Payload::Linear { coefs }, vec![0, 1, 2], Origin::Cluster).unwrap();
        g
    }

    #[test]
    fn parity_of_point_masses() {
        let f = gf(2, 1);
        let g = parity_graph(&f);
        let one = [0.0, 1.0];
        let out = factor_update(&g, 0, 0, &[None, Some(&one), Some(&one)], TABLE_GUARD).unwrap();
        assert!(close(&out, &[1.0, 0.0]));
    }

    #[test]
    fn delta_is_point_mass() {
        let f = gf(3, 1);
        let mut g = FactorGraph::new(&f, 1);
        g.add_variable("y", None).unwrap();
        g.add_factor("psi", Payload::Delta(FVector::from_reprs(&[2])), vec![0], Origin::Cluster).unwrap();
        let r = run(&g, &Schedule::two_pass()).unwrap();
        assert!(close(&r.beliefs[0], &[0.0, 0.0, 1.0]));
    }

    #[test]
    fn linear_convolution_matches_enumeration() {
        let f = gf(3, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let coefs: Vec<Gf> = (0..3).map(|_| Gf(rng.gen_range(1..3))).collect();
            let mut g = FactorGraph::new(&f, 1);
            for v in ["x", "y", "z"] {
                g.add_variable(v, None).unwrap();
            }
            g.add_factor("phi", Payload::Linear { coefs: coefs.clone() }, vec![0, 1, 2], Origin::Cluster).unwrap();
            let m1: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let m2: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let got = factor_update(&g, 0, 0, &[None, Some(&m1), Some(&m2)], TABLE_GUARD).unwrap();
            let mut want = vec![0.0; 3];
            for x in 0..3u32 {
                for y in 0..3u32 {
                    for z in 0..3u32 {
                        let s = [(coefs[0], x), (coefs[1], y), (coefs[2], z)]
                            .iter()
                            .fold(Gf::ZERO, |acc, &(c, v)| f.add(acc, f.mul(c, Gf(v))));
                        if s.is_zero() {
                            want[x as usize] += m1[y as usize] * m2[z as usize];
                        }
                    }
                }
            }
            assert!(close(&got, &want), "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn random_table_factor_matches_triple_loop() {
        let f = gf(3, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut net = Network::new(&f, 1);
        for n in ["a", "b"] {
            net.add_node(n).unwrap();
        }
        net.add_source("u", "a").unwrap();
        net.add_source("w", "a").unwrap();
        net.add_link("l", "a", "b").unwrap();
        let table = ChannelTable::from_rows_fn(&net, 0, |_, _| {
            let mut row: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 0.01).collect();
            normalize(&mut row);
            row
        })
        .unwrap();
        net.set_channel(table.clone());
        let g = build_ncfg(&net, &Observation { sink: 1, values: vec![] }).unwrap();
        let phi = g.factor_index("phi_l").unwrap();
        let mu_w = [0.6, 0.1, 0.3];
        let mu_l = [0.1, 0.1, 0.8];
        // toward u: sum over l, w of C(l | u, w) mu_l(l) mu_w(w)
        let got = factor_update(&g, phi, 1, &[Some(&mu_l), None, Some(&mu_w)], TABLE_GUARD).unwrap();
        let mut want = [0.0; 3];
        for (u, slot) in want.iter_mut().enumerate() {
            for w in 0..3 {
                for l in 0..3 {
                    *slot += table.prob(l, &[u, w]) * mu_l[l] * mu_w[w];
                }
            }
        }
        assert!(close(&got, &want));
    }

    #[test]
    fn butterfly_beliefs_are_point_masses() {
        let f = gf(2, 1);
        let net = topology::butterfly(&f);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let src = [FVector::from_reprs(&[a]), FVector::from_reprs(&[b])];
            let sym = net.encode(&src).unwrap();
            let s = net.sink_by_name("t1").unwrap();
            let g = build_ncfg(&net, &Observation::from_assignment(s.node, &s.observes, &sym)).unwrap();
            assert!(find_cycles(&g).is_forest);
            let r = run(&g, &Schedule::two_pass()).unwrap();
            let mut want = [0.0, 0.0];
            want[a as usize] = 1.0;
            assert!(close(&r.beliefs[0], &want));
            want = [0.0, 0.0];
            want[b as usize] = 1.0;
            assert!(close(&r.beliefs[1], &want));
            // flooding reaches the same beliefs
            let fl = run(&g, &Schedule::flooding(100)).unwrap();
            assert!(fl.report.converged);
            for (x, y) in fl.beliefs.iter().zip(&r.beliefs) {
                assert!(max_diff(x, y) <= 1e-9);
            }
        }
    }

    #[test]
    fn two_pass_rejects_cycles() {
        let f = gf(2, 1);
        let net = topology::chain(&f, 3);
        let g = build_ncfg(&net, &Observation { sink: net.sinks()[0].node, values: vec![] }).unwrap();
        assert!(run(&g, &Schedule::two_pass()).is_err());
    }

    #[test]
    fn two_pass_computes_each_message_once() {
        let f = gf(2, 1);
        let net = topology::butterfly(&f);
        let g = build_ncfg(&net, &Observation { sink: net.sinks()[0].node, values: vec![] }).unwrap();
        let r = run(&g, &Schedule::two_pass()).unwrap();
        assert_eq!(r.report.messages, 2 * g.edge_count());
    }

    #[test]
    fn inconsistent_evidence_is_a_contradiction() {
        let f = gf(2, 1);
        let mut g = FactorGraph::new(&f, 1);
        g.add_variable("y", None).unwrap();
        g.add_factor("p0", Payload::Delta(FVector::from_reprs(&[0])), vec![0], Origin::Cluster).unwrap();
        g.add_factor("p1", Payload::Delta(FVector::from_reprs(&[1])), vec![0], Origin::Cluster).unwrap();
        let r = run(&g, &Schedule::two_pass()).unwrap();
        assert!(r.report.contradiction);
        assert!(r.beliefs[0].iter().all(|&x| x == 0.0));
    }
}
