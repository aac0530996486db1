//! Network code factor graphs: construction from a network and one sink's
//! observations, structural transforms, and cycle detection.
//!
//! Every variable ranges over the same alphabet F^n. Clustering never merges
//! variables; it only bundles factors and hides variables that no longer
//! touch anything outside the bundle.

mod transform;

use std::fmt::Write as _;

pub use transform::{cluster, cluster_until_acyclic, default_clustering, prune, simplify, Pruned};

use crate::error::{Error, Result};
use crate::galois::{Alphabet, FVector, Field, Gf};
use crate::network::{ChannelTable, Input, Network, Observation};

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub id: String,
    /// The network symbol this variable stands for.
    pub origin: Option<Input>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    /// `phi_l`, the encoder of a link.
    Link(usize),
    /// `psi_j`, the observation of a link.
    Observation(usize),
    Cluster,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Slot {
    External(usize),
    Internal(usize),
}

/// One constituent of a clustered factor.
#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub id: String,
    pub payload: Payload,
    pub slots: Vec<Slot>,
}

/// Product of constituent payloads with the internal variables summed out.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPayload {
    pub parts: Vec<Part>,
    /// Ids of the eliminated variables, indexed by [`Slot::Internal`].
    pub internal: Vec<String>,
}

/// Local function of a factor, positional with respect to its variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// `Σ coefs[i] · y_i = 0`. For link factors position 0 is the output,
    /// with coefficient 1, and the rest are `-c_{l,e}`.
    Linear { coefs: Vec<Gf> },
    /// Conditional table; variables are `[output, inc(l)...]`.
    Table(ChannelTable),
    /// `δ(y − value)`, always degree 1.
    Delta(FVector),
    Cluster(ClusterPayload),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Linear { .. } => "linear",
            Payload::Table(_) => "table",
            Payload::Delta(_) => "delta",
            Payload::Cluster(_) => "cluster",
        }
    }

    /// True when the payload is a 0/1 indicator of an affine set, which is
    /// what the coset messages need.
    pub fn is_linear(&self) -> bool {
        match self {
            Payload::Linear { .. } | Payload::Delta(_) => true,
            Payload::Table(_) => false,
            Payload::Cluster(c) => c.parts.iter().all(|p| p.payload.is_linear()),
        }
    }

    /// Value of a non-cluster payload at the given symbol indices.
    pub fn weight(&self, alphabet: &Alphabet, values: &[usize]) -> f64 {
        match self {
            Payload::Linear { coefs } => {
                let mut acc = 0usize;
                for (&c, &x) in coefs.iter().zip(values) {
                    acc = alphabet.add(acc, alphabet.scale(c, x));
                }
                if acc == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Payload::Table(t) => t.prob(values[0], &values[1..]),
            Payload::Delta(v) => {
                if values[0] == alphabet.index(v) {
                    1.0
                } else {
                    0.0
                }
            }
            Payload::Cluster(_) => panic!("cluster payloads are evaluated part by part"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub id: String,
    pub payload: Payload,
    pub vars: Vec<usize>,
    pub origin: Origin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorGraph {
    field: Field,
    dim: usize,
    pub(crate) vars: Vec<Variable>,
    pub(crate) factors: Vec<Factor>,
}

/// Outcome of [`find_cycles`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCheck {
    pub is_forest: bool,
    /// Alternating variable and factor ids; the last node connects back to
    /// the first.
    pub witness: Option<Vec<String>>,
}

impl FactorGraph {
    pub fn new(field: &Field, dim: usize) -> Self {
        FactorGraph { field: field.clone(), dim, vars: Vec::new(), factors: Vec::new() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(&self.field, self.dim)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn add_variable(&mut self, id: &str, origin: Option<Input>) -> Result<usize> {
        if self.var_index(id).is_some() {
            return Err(Error::Usage(format!("duplicate variable `{id}`")));
        }
        self.vars.push(Variable { id: id.to_string(), origin });
        Ok(self.vars.len() - 1)
    }

    pub fn add_factor(&mut self, id: &str, payload: Payload, vars: Vec<usize>, origin: Origin) -> Result<usize> {
        if self.factor_index(id).is_some() {
            return Err(Error::Usage(format!("duplicate factor `{id}`")));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= self.vars.len()) {
            return Err(Error::Usage(format!("factor `{id}` refers to unknown variable #{v}")));
        }
        let mut seen = vars.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != vars.len() {
            return Err(Error::Usage(format!("factor `{id}` touches a variable twice")));
        }
        let arity = match &payload {
            Payload::Linear { coefs } => Some(coefs.len()),
            Payload::Table(t) => Some(t.inputs().len() + 1),
            Payload::Delta(_) => Some(1),
            Payload::Cluster(_) => None,
        };
        if arity.is_some_and(|a| a != vars.len()) {
            return Err(Error::Usage(format!("factor `{id}` payload does not match its {} variables", vars.len())));
        }
        self.factors.push(Factor { id: id.to_string(), payload, vars, origin });
        Ok(self.factors.len() - 1)
    }

    pub fn var_index(&self, id: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.id == id)
    }

    pub fn factor_index(&self, id: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.id == id)
    }

    pub fn edge_count(&self) -> usize {
        self.factors.iter().map(|f| f.vars.len()).sum()
    }

    /// `(factor, position)` pairs for each variable.
    pub fn incidence(&self) -> Vec<Vec<(usize, usize)>> {
        let mut inc = vec![Vec::new(); self.vars.len()];
        for (f, factor) in self.factors.iter().enumerate() {
            for (p, &v) in factor.vars.iter().enumerate() {
                inc[v].push((f, p));
            }
        }
        inc
    }

    /// Variables touched by an observation factor.
    pub fn observed(&self) -> Vec<bool> {
        let mut obs = vec![false; self.vars.len()];
        for f in &self.factors {
            if matches!(f.payload, Payload::Delta(_)) {
                obs[f.vars[0]] = true;
            }
        }
        obs
    }

    pub fn is_deterministic(&self) -> bool {
        self.factors.iter().all(|f| f.payload.is_linear())
    }

    /// Keep the marked nodes, renumbering variables. Factors must only
    /// touch kept variables.
    pub(crate) fn retain(&self, keep_var: &[bool], keep_factor: &[bool]) -> FactorGraph {
        let mut map = vec![usize::MAX; self.vars.len()];
        let mut g = FactorGraph::new(&self.field, self.dim);
        for (i, v) in self.vars.iter().enumerate() {
            if keep_var[i] {
                map[i] = g.vars.len();
                g.vars.push(v.clone());
            }
        }
        for (i, f) in self.factors.iter().enumerate() {
            if keep_factor[i] {
                let mut f = f.clone();
                f.vars = f.vars.iter().map(|&v| map[v]).collect();
                debug_assert!(f.vars.iter().all(|&v| v != usize::MAX));
                g.factors.push(f);
            }
        }
        g
    }

    /// Plain-text adjacency listing, in insertion order.
    pub fn export(&self) -> String {
        let mut s = String::new();
        for v in &self.vars {
            let _ = writeln!(s, "var {} {}^{}", v.id, self.field, self.dim);
        }
        for f in &self.factors {
            let _ = writeln!(s, "factor {} {}", f.id, f.payload.kind());
        }
        for f in &self.factors {
            for &v in &f.vars {
                let _ = writeln!(s, "edge {} {}", f.id, self.vars[v].id);
            }
        }
        s
    }
}

/// Build the factor graph of `net` as seen by the receiver in `obs`.
///
/// One variable per source and per link; one factor `phi_<link>` per link
/// over the link and its inputs; one factor `psi_<link>` per observed link.
/// Zero coefficients are kept as edges; [`simplify`] removes them.
pub fn build_ncfg(net: &Network, obs: &Observation) -> Result<FactorGraph> {
    if let Some(d) = net.validate().into_iter().find(|d| d.is_error()) {
        return Err(Error::Usage(format!("invalid network: {d}")));
    }
    net.check_observation(obs)?;
    let mut g = FactorGraph::new(net.field(), net.dim());
    for (i, s) in net.sources().iter().enumerate() {
        g.add_variable(&s.id, Some(Input::Source(i)))?;
    }
    let k = net.sources().len();
    for (l, link) in net.links().iter().enumerate() {
        g.add_variable(&link.id, Some(Input::Link(l)))?;
    }
    let var_of = |e: Input| match e {
        Input::Source(s) => s,
        Input::Link(l) => k + l,
    };
    let field = net.field();
    for (l, link) in net.links().iter().enumerate() {
        let inc = net.inc(l);
        let mut vars = vec![k + l];
        vars.extend(inc.iter().map(|&e| var_of(e)));
        let payload = match net.channels().get(&l) {
            Some(table) => Payload::Table(table.clone()),
            None => {
                let mut coefs = vec![Gf::ONE];
                coefs.extend(inc.iter().map(|&e| field.neg(net.coef(l, e))));
                Payload::Linear { coefs }
            }
        };
        g.add_factor(&format!("phi_{}", link.id), payload, vars, Origin::Link(l))?;
    }
    for (l, v) in &obs.values {
        let id = format!("psi_{}", net.links()[*l].id);
        g.add_factor(&id, Payload::Delta(v.clone()), vec![k + l], Origin::Observation(*l))?;
    }
    Ok(g)
}

/// Cycle check on the undirected bipartite graph.
pub fn find_cycles(g: &FactorGraph) -> CycleCheck {
    let nv = g.vars.len();
    let n = nv + g.factors.len();
    let mut adj = vec![Vec::new(); n];
    for (f, factor) in g.factors.iter().enumerate() {
        for &v in &factor.vars {
            adj[v].push(nv + f);
            adj[nv + f].push(v);
        }
    }
    let name = |x: usize| if x < nv { g.vars[x].id.clone() } else { g.factors[x - nv].id.clone() };
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if w == parent[u] {
                    continue;
                }
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = u;
                    stack.push(w);
                    continue;
                }
                // non-tree edge u-w closes a cycle
                let (mut a, mut b) = (u, w);
                let (mut left, mut right) = (vec![a], vec![b]);
                while a != b {
                    if depth[a] >= depth[b] {
                        a = parent[a];
                        left.push(a);
                    } else {
                        b = parent[b];
                        right.push(b);
                    }
                }
                right.pop();
                right.reverse();
                left.extend(right);
                // start at a variable for a stable alternation
                let start = left.iter().position(|&x| x < nv).unwrap_or(0);
                left.rotate_left(start);
                return CycleCheck { is_forest: false, witness: Some(left.into_iter().map(name).collect()) };
            }
        }
    }
    CycleCheck { is_forest: true, witness: None }
}

/// Apply `Σ coefs[i] y_i = 0` solved for position `j`: the coefficient
/// `-coefs[j]^{-1}` each other term is scaled by.
pub(crate) fn solve_coef(field: &Field, coefs: &[Gf], j: usize) -> Result<Gf> {
    let cj = coefs[j];
    if cj.is_zero() {
        return Err(Error::Internal("message toward a variable with a zero coefficient".into()));
    }
    Ok(field.neg(field.inv(cj)?))
}
