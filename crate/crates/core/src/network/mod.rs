//! Directed acyclic communication networks carrying a scalar linear (or
//! per-link stochastic) network code.
//!
//! Every link `l` transmits `y_l = sum_{e in inc(l)} c_{l,e} y_e`, where
//! `inc(l)` holds the links entering `tail(l)` and the sources located there.
//! Links listed in [`Network::channels`] instead draw `y_l` from a
//! conditional distribution given their inputs.

mod channel;
mod format;
pub mod topology;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use channel::ChannelTable;
pub use format::{parse_network, parse_observation, parse_sources};

use crate::error::{Error, Result};
use crate::galois::{FMatrix, FVector, Field, Gf, OpCount};

/// A symbol feeding a link encoder: a source or an upstream link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Input {
    Source(usize),
    Link(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub id: String,
    pub node: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

/// A receiver declared in the network description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sink {
    pub node: usize,
    pub observes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Network {
    field: Field,
    dim: usize,
    nodes: Vec<String>,
    sources: Vec<Source>,
    links: Vec<Link>,
    coefs: BTreeMap<(usize, Input), Gf>,
    channels: BTreeMap<usize, ChannelTable>,
    sinks: Vec<Sink>,
}

/// Values of every source and link symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolAssignment {
    pub sources: Vec<FVector>,
    pub links: Vec<FVector>,
}

impl SymbolAssignment {
    pub fn get(&self, input: Input) -> &FVector {
        match input {
            Input::Source(s) => &self.sources[s],
            Input::Link(l) => &self.links[l],
        }
    }
}

/// What a receiver saw: the values on some links entering its node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub sink: usize,
    pub values: Vec<(usize, FVector)>,
}

impl Observation {
    /// Observation of `links` taken from an encoded assignment.
    pub fn from_assignment(sink: usize, links: &[usize], symbols: &SymbolAssignment) -> Self {
        Observation { sink, values: links.iter().map(|&l| (l, symbols.links[l].clone())).collect() }
    }

    pub fn links(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().map(|(l, _)| *l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    Cycle { links: Vec<String> },
    CoefficientNotIncident { link: String, input: String },
    NoInputs { link: String },
    ConstantZero { link: String },
    SinkMismatch { sink: String, link: String },
    UnreachableFromSources { link: String },
    BadChannel { link: String, reason: String },
}

impl Diagnostic {
    pub fn severity(&self) -> Severity {
        match self {
            Diagnostic::ConstantZero { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Cycle { links } => write!(f, "error: links form a cycle: {}", links.join(" -> ")),
            Diagnostic::CoefficientNotIncident { link, input } => {
                write!(f, "error: coefficient on {link} keyed by {input}, which is not in inc({link})")
            }
            Diagnostic::NoInputs { link } => write!(f, "error: link {link} has no inputs"),
            Diagnostic::ConstantZero { link } => {
                write!(f, "warning: link {link} has only zero coefficients and always carries 0")
            }
            Diagnostic::SinkMismatch { sink, link } => {
                write!(f, "error: sink {sink} observes {link}, which does not end at {sink}")
            }
            Diagnostic::UnreachableFromSources { link } => {
                write!(f, "error: observed link {link} is not connected to any source")
            }
            Diagnostic::BadChannel { link, reason } => write!(f, "error: channel on {link}: {reason}"),
        }
    }
}

impl Network {
    pub fn new(field: &Field, dim: usize) -> Self {
        Network {
            field: field.clone(),
            dim,
            nodes: Vec::new(),
            sources: Vec::new(),
            links: Vec::new(),
            coefs: BTreeMap::new(),
            channels: BTreeMap::new(),
            sinks: Vec::new(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn sinks(&self) -> &[Sink] {
        &self.sinks
    }

    pub fn channels(&self) -> &BTreeMap<usize, ChannelTable> {
        &self.channels
    }

    pub fn is_deterministic(&self) -> bool {
        self.channels.is_empty()
    }

    fn check_fresh(&self, id: &str) -> Result<()> {
        if self.nodes.iter().any(|n| n == id)
            || self.sources.iter().any(|s| s.id == id)
            || self.links.iter().any(|l| l.id == id)
        {
            return Err(Error::Usage(format!("duplicate id `{id}`")));
        }
        Ok(())
    }

    pub fn add_node(&mut self, id: &str) -> Result<usize> {
        self.check_fresh(id)?;
        self.nodes.push(id.to_string());
        Ok(self.nodes.len() - 1)
    }

    pub fn add_source(&mut self, id: &str, node: &str) -> Result<usize> {
        self.check_fresh(id)?;
        let node = self.node_index(node)?;
        self.sources.push(Source { id: id.to_string(), node });
        Ok(self.sources.len() - 1)
    }

    pub fn add_link(&mut self, id: &str, tail: &str, head: &str) -> Result<usize> {
        self.check_fresh(id)?;
        let (tail, head) = (self.node_index(tail)?, self.node_index(head)?);
        self.links.push(Link { id: id.to_string(), tail, head });
        Ok(self.links.len() - 1)
    }

    /// Set `c_{link,input}`. Incidence is checked by [`Network::validate`],
    /// not here, so that malformed descriptions can still be reported on.
    pub fn set_coef(&mut self, link: &str, input: &str, value: Gf) -> Result<()> {
        let l = self.link_index(link)?;
        let e = self.input_index(input)?;
        self.field.elem(value.0)?;
        self.coefs.insert((l, e), value);
        Ok(())
    }

    pub fn set_coef_at(&mut self, link: usize, input: Input, value: Gf) {
        self.coefs.insert((link, input), value);
    }

    pub fn add_sink(&mut self, node: &str, observes: &[&str]) -> Result<()> {
        let node = self.node_index(node)?;
        let observes = observes.iter().map(|l| self.link_index(l)).collect::<Result<_>>()?;
        self.sinks.push(Sink { node, observes });
        Ok(())
    }

    pub fn set_channel(&mut self, table: ChannelTable) {
        self.channels.insert(table.link(), table);
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n == id)
            .ok_or_else(|| Error::Usage(format!("unknown node `{id}`")))
    }

    pub fn link_index(&self, id: &str) -> Result<usize> {
        self.links
            .iter()
            .position(|l| l.id == id)
            .ok_or_else(|| Error::Usage(format!("unknown link `{id}`")))
    }

    pub fn source_index(&self, id: &str) -> Result<usize> {
        self.sources
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::Usage(format!("unknown source `{id}`")))
    }

    pub fn input_index(&self, id: &str) -> Result<Input> {
        self.source_index(id)
            .map(Input::Source)
            .or_else(|_| self.link_index(id).map(Input::Link))
            .map_err(|_| Error::Usage(format!("unknown source or link `{id}`")))
    }

    pub fn input_name(&self, input: Input) -> &str {
        match input {
            Input::Source(s) => &self.sources[s].id,
            Input::Link(l) => &self.links[l].id,
        }
    }

    pub fn sink_by_name(&self, id: &str) -> Result<&Sink> {
        let node = self.node_index(id)?;
        self.sinks
            .iter()
            .find(|s| s.node == node)
            .ok_or_else(|| Error::Usage(format!("no sink declared at node `{id}`")))
    }

    /// `inc(l)`: sources at `tail(l)` then links ending at `tail(l)`.
    pub fn inc(&self, link: usize) -> Vec<Input> {
        let tail = self.links[link].tail;
        let srcs = self.sources.iter().enumerate().filter(|(_, s)| s.node == tail).map(|(i, _)| Input::Source(i));
        let links = self.links.iter().enumerate().filter(|(_, e)| e.head == tail).map(|(i, _)| Input::Link(i));
        srcs.chain(links).collect()
    }

    /// `c_{l,e}`, zero when unset.
    pub fn coef(&self, link: usize, input: Input) -> Gf {
        self.coefs.get(&(link, input)).copied().unwrap_or(Gf::ZERO)
    }

    pub fn coefficients(&self) -> &BTreeMap<(usize, Input), Gf> {
        &self.coefs
    }

    /// Links in an order where every link comes after all of its inputs.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        self.topo_or_cycle().map_err(|cycle| {
            let names: Vec<&str> = cycle.iter().map(|&l| self.links[l].id.as_str()).collect();
            Error::Usage(format!("network has a directed cycle: {}", names.join(" -> ")))
        })
    }

    fn topo_or_cycle(&self) -> std::result::Result<Vec<usize>, Vec<usize>> {
        let n = self.links.len();
        // successor lists: e -> l when head(e) == tail(l)
        let mut indeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (l, link) in self.links.iter().enumerate() {
            for (e, pred) in self.links.iter().enumerate() {
                if pred.head == link.tail {
                    succ[e].push(l);
                    indeg[l] += 1;
                }
            }
        }
        let mut ready: Vec<usize> = (0..n).rev().filter(|&l| indeg[l] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(l) = ready.pop() {
            order.push(l);
            for &s in succ[l].iter().rev() {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    ready.push(s);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        // Every unprocessed link has an unprocessed predecessor; walk back
        // until a link repeats.
        let done: BTreeSet<usize> = order.into_iter().collect();
        let start = (0..n).find(|l| !done.contains(l)).unwrap();
        let mut path = vec![start];
        let mut cur = start;
        loop {
            let pred = (0..n)
                .find(|&e| !done.contains(&e) && self.links[e].head == self.links[cur].tail)
                .unwrap();
            if let Some(pos) = path.iter().position(|&x| x == pred) {
                let mut cycle = path[pos..].to_vec();
                cycle.reverse();
                return Err(cycle);
            }
            path.push(pred);
            cur = pred;
        }
    }

    /// Structural checks. Never fails; problems come back as diagnostics.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if let Err(cycle) = self.topo_or_cycle() {
            out.push(Diagnostic::Cycle { links: cycle.iter().map(|&l| self.links[l].id.clone()).collect() });
        }
        for &(l, e) in self.coefs.keys() {
            if !self.inc(l).contains(&e) {
                out.push(Diagnostic::CoefficientNotIncident {
                    link: self.links[l].id.clone(),
                    input: self.input_name(e).to_string(),
                });
            }
        }
        for (l, link) in self.links.iter().enumerate() {
            let inc = self.inc(l);
            if inc.is_empty() {
                out.push(Diagnostic::NoInputs { link: link.id.clone() });
            } else if !self.channels.contains_key(&l) && inc.iter().all(|&e| self.coef(l, e).is_zero()) {
                out.push(Diagnostic::ConstantZero { link: link.id.clone() });
            }
        }
        for (&l, table) in &self.channels {
            if let Err(e) = table.check(self) {
                out.push(Diagnostic::BadChannel { link: self.links[l].id.clone(), reason: e.to_string() });
            }
        }
        let fed = self.fed_by_sources();
        for sink in &self.sinks {
            for &l in &sink.observes {
                if self.links[l].head != sink.node {
                    out.push(Diagnostic::SinkMismatch {
                        sink: self.nodes[sink.node].clone(),
                        link: self.links[l].id.clone(),
                    });
                }
                if !fed[l] {
                    out.push(Diagnostic::UnreachableFromSources { link: self.links[l].id.clone() });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        !self.validate().iter().any(Diagnostic::is_error)
    }

    /// Which links have some source upstream of them.
    fn fed_by_sources(&self) -> Vec<bool> {
        let mut fed = vec![false; self.links.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for l in 0..self.links.len() {
                if !fed[l]
                    && self.inc(l).iter().any(|e| match *e {
                        Input::Source(_) => true,
                        Input::Link(e) => fed[e],
                    })
                {
                    fed[l] = true;
                    changed = true;
                }
            }
        }
        fed
    }

    pub fn check_observation(&self, obs: &Observation) -> Result<()> {
        if obs.sink >= self.nodes.len() {
            return Err(Error::Usage(format!("observation at unknown node #{}", obs.sink)));
        }
        for (l, v) in &obs.values {
            let link = self
                .links
                .get(*l)
                .ok_or_else(|| Error::Usage(format!("observation of unknown link #{l}")))?;
            if link.head != obs.sink {
                return Err(Error::Usage(format!(
                    "link {} does not end at sink {}",
                    link.id, self.nodes[obs.sink]
                )));
            }
            if v.len() != self.dim {
                return Err(Error::Usage(format!("observed value on {} has length {}", link.id, v.len())));
            }
        }
        Ok(())
    }

    fn check_sources(&self, src: &[FVector]) -> Result<()> {
        if src.len() != self.sources.len() {
            return Err(Error::Usage(format!(
                "{} source values supplied for {} sources",
                src.len(),
                self.sources.len()
            )));
        }
        for (s, v) in self.sources.iter().zip(src) {
            if v.len() != self.dim || v.0.iter().any(|x| x.0 >= self.field.order()) {
                return Err(Error::Usage(format!("value for source {} is not in {}^{}", s.id, self.field, self.dim)));
            }
        }
        Ok(())
    }

    pub(crate) fn combine(&self, link: usize, values: &[Option<FVector>], src: &[FVector]) -> FVector {
        let mut acc = FVector::zeros(self.dim);
        let mut ops = OpCount::default();
        for e in self.inc(link) {
            let c = self.coef(link, e);
            if c.is_zero() {
                continue;
            }
            let v = match e {
                Input::Source(s) => &src[s],
                Input::Link(e) => values[e].as_ref().expect("topological order reads an assigned symbol"),
            };
            acc = acc.add(&self.field, &v.scale(&self.field, c, &mut ops), &mut ops);
        }
        acc
    }

    /// Deterministic encoding of every link in topological order.
    pub fn encode(&self, src: &[FVector]) -> Result<SymbolAssignment> {
        if !self.channels.is_empty() {
            return Err(Error::Unsupported("network has stochastic links; use encode_stochastic".into()));
        }
        self.check_sources(src)?;
        let mut values: Vec<Option<FVector>> = vec![None; self.links.len()];
        for l in self.topo_order()? {
            values[l] = Some(self.combine(l, &values, src));
        }
        Ok(SymbolAssignment { sources: src.to_vec(), links: values.into_iter().map(Option::unwrap).collect() })
    }

    /// Global coding vectors: row `l` gives `y_l` as a combination of the
    /// sources (scalar coefficients acting on F^n).
    pub fn global_coding_vectors(&self) -> Result<Vec<FVector>> {
        if !self.channels.is_empty() {
            return Err(Error::Unsupported("transfer matrix of a stochastic network".into()));
        }
        let k = self.sources.len();
        let mut ops = OpCount::default();
        let mut g: Vec<Option<FVector>> = vec![None; self.links.len()];
        for l in self.topo_order()? {
            let mut acc = FVector::zeros(k);
            for e in self.inc(l) {
                let c = self.coef(l, e);
                let v = match e {
                    Input::Source(s) => FVector::unit(k, s),
                    Input::Link(e) => g[e].clone().expect("topological order"),
                };
                acc = acc.add(&self.field, &v.scale(&self.field, c, &mut ops), &mut ops);
            }
            g[l] = Some(acc);
        }
        Ok(g.into_iter().map(Option::unwrap).collect())
    }

    /// The matrix `A` with `y_obs = A * y_sources`, rows in `obs_links` order.
    pub fn global_transfer_matrix(&self, obs_links: &[usize]) -> Result<FMatrix> {
        let g = self.global_coding_vectors()?;
        let rows = obs_links
            .iter()
            .map(|&l| g.get(l).cloned().ok_or_else(|| Error::Usage(format!("unknown link #{l}"))))
            .collect::<Result<Vec<_>>>()?;
        FMatrix::from_rows(&self.field, self.sources.len(), &rows)
    }

    /// Sample every link in topological order: stochastic links from their
    /// channel table, the rest deterministically.
    pub fn encode_stochastic(&self, src: &[FVector], seed: u64) -> Result<SymbolAssignment> {
        use rand::{Rng, SeedableRng};
        self.check_sources(src)?;
        for table in self.channels.values() {
            table.check(self)?;
        }
        let alphabet = crate::galois::Alphabet::new(&self.field, self.dim)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<Option<FVector>> = vec![None; self.links.len()];
        for l in self.topo_order()? {
            let v = match self.channels.get(&l) {
                None => self.combine(l, &values, src),
                Some(table) => {
                    let inputs: Vec<usize> = table
                        .inputs()
                        .iter()
                        .map(|&e| {
                            let v = match e {
                                Input::Source(s) => &src[s],
                                Input::Link(e) => values[e].as_ref().expect("topological order"),
                            };
                            alphabet.index(v)
                        })
                        .collect();
                    let row = table.row(&inputs);
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut pick = row.len() - 1;
                    for (i, &p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    alphabet.vector(pick)
                }
            };
            values[l] = Some(v);
        }
        Ok(SymbolAssignment { sources: src.to_vec(), links: values.into_iter().map(Option::unwrap).collect() })
    }

    /// Same topology and dimension, fresh uniformly random nonzero
    /// coefficients over `field` on every `(l, e)` with `e` in `inc(l)`.
    /// Channel tables are dropped.
    pub fn random_code(&self, field: &Field, seed: u64) -> Network {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut net = self.clone();
        net.field = field.clone();
        net.coefs.clear();
        net.channels.clear();
        for l in 0..net.links.len() {
            for e in net.inc(l) {
                let c = Gf(rng.gen_range(1..field.order()));
                net.coefs.insert((l, e), c);
            }
        }
        net
    }
}
