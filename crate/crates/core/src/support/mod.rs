//! Support passing: the sum-product algorithm run on the supports of the
//! messages only. On linear graphs every support is a coset and updates are
//! exact linear algebra; otherwise supports are explicit symbol sets.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::factorgraph::{solve_coef, FactorGraph, Payload, Slot};
use crate::galois::{solve, Alphabet, Coset, FMatrix, FVector, Field, Gf, OpCount, Subspace};
use crate::sumprod::engine::{self, Direction, Edges, MessageRules, State};
use crate::sumprod::{check_guard, for_each_config, Mode, Schedule, TableMessage, TableRules};

/// Largest coset enumerated when it has to be mixed with an explicit set.
pub const SET_GUARD: usize = 4096;

#[derive(Clone, PartialEq, Eq)]
pub enum SupportMessage {
    /// Symbol indices (see [`Alphabet`]); never empty.
    Set(BTreeSet<usize>),
    Coset(Coset),
    Empty,
}

impl SupportMessage {
    pub fn is_empty(&self) -> bool {
        matches!(self, SupportMessage::Empty)
    }

    /// Explicit symbol set, enumerating a coset if needed.
    pub fn to_set(&self, alphabet: &Alphabet, guard: usize) -> Result<BTreeSet<usize>> {
        match self {
            SupportMessage::Empty => Ok(BTreeSet::new()),
            SupportMessage::Set(s) => Ok(s.clone()),
            SupportMessage::Coset(c) => {
                if c.size().is_none_or(|s| s > guard as u64) {
                    return Err(Error::Capacity(format!("coset of dimension {} is too large to enumerate", c.dim())));
                }
                Ok(c.enumerate().iter().map(|v| alphabet.index(v)).collect())
            }
        }
    }

    pub fn to_vectors(&self, alphabet: &Alphabet, guard: usize) -> Result<BTreeSet<FVector>> {
        Ok(self.to_set(alphabet, guard)?.into_iter().map(|i| alphabet.vector(i)).collect())
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &SupportMessage, alphabet: Option<&Alphabet>, ops: &mut OpCount) -> Result<bool> {
        use SupportMessage::*;
        Ok(match (self, other) {
            (Empty, _) => true,
            (_, Empty) => false,
            (Coset(a), Coset(b)) => a.is_subset_of(b, ops),
            (Set(a), Set(b)) => a.is_subset(b),
            (Set(a), Coset(b)) => {
                let alphabet = alphabet.ok_or_else(|| Error::Capacity("alphabet too large to index".into()))?;
                a.iter().all(|&x| b.contains(&alphabet.vector(x), ops))
            }
            (Coset(_), Set(b)) => {
                let alphabet = alphabet.ok_or_else(|| Error::Capacity("alphabet too large to index".into()))?;
                self.to_set(alphabet, SET_GUARD)?.is_subset(b)
            }
        })
    }
}

impl fmt::Debug for SupportMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SupportMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportMessage::Set(s) => write!(f, "set{s:?}"),
            SupportMessage::Coset(c) => write!(f, "{c}"),
            SupportMessage::Empty => f.write_str("empty"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SupportReport {
    pub iterations: usize,
    pub converged: bool,
    pub messages: usize,
    /// Messages that became a strict subset of their previous value.
    pub strict_shrinks: usize,
    /// Messages that were not a subset of their previous value.
    pub monotonicity_violations: usize,
    /// No message was ever an explicit set.
    pub coset_closed: bool,
    pub contradiction: bool,
    pub ops: OpCount,
}

/// Intersection of supports; the full alphabet when `msgs` is empty.
pub fn intersect_all(
    field: &Field,
    n: usize,
    msgs: &[&SupportMessage],
    alphabet: Option<&Alphabet>,
    ops: &mut OpCount,
) -> Result<SupportMessage> {
    let mut coset = Coset::full(field, n);
    let mut set: Option<BTreeSet<usize>> = None;
    for m in msgs {
        match m {
            SupportMessage::Empty => return Ok(SupportMessage::Empty),
            SupportMessage::Coset(c) => match coset.intersect(c, ops)? {
                Some(x) => coset = x,
                None => return Ok(SupportMessage::Empty),
            },
            SupportMessage::Set(s) => {
                set = Some(match set {
                    None => s.clone(),
                    Some(prev) => prev.intersection(s).copied().collect(),
                })
            }
        }
    }
    let Some(set) = set else {
        return Ok(SupportMessage::Coset(coset));
    };
    let alphabet = alphabet.ok_or_else(|| Error::Capacity("alphabet too large to index".into()))?;
    let kept: BTreeSet<usize> = set.into_iter().filter(|&x| coset.contains(&alphabet.vector(x), ops)).collect();
    Ok(if kept.is_empty() { SupportMessage::Empty } else { SupportMessage::Set(kept) })
}

/// Support-passing rules. Linear factors fed cosets produce cosets in
/// closed form; everything else is enumerated.
pub struct SupportRules {
    field: Field,
    n: usize,
    alphabet: Option<Alphabet>,
    table_guard: usize,
    cluster_sets: HashMap<usize, Option<Coset>>,
    pub ops: OpCount,
    pub coset_closed: bool,
    pub contradiction: bool,
}

impl SupportRules {
    pub fn new(g: &FactorGraph) -> Self {
        SupportRules {
            field: g.field().clone(),
            n: g.dim(),
            alphabet: g.alphabet().ok(),
            table_guard: crate::sumprod::TABLE_GUARD,
            cluster_sets: HashMap::new(),
            ops: OpCount::default(),
            coset_closed: true,
            contradiction: false,
        }
    }

    fn note(&mut self, m: SupportMessage) -> SupportMessage {
        match m {
            SupportMessage::Set(_) => self.coset_closed = false,
            SupportMessage::Empty => self.contradiction = true,
            SupportMessage::Coset(_) => {}
        }
        m
    }

    /// `y_pos = -c_pos^{-1} Σ c_i y_i`: representative from the incoming
    /// representatives, subspace the sum of the incoming subspaces.
    fn linear(&mut self, coefs: &[Gf], pos: usize, incoming: &[Option<&SupportMessage>]) -> Result<SupportMessage> {
        let k = solve_coef(&self.field, coefs, pos)?;
        let mut rep = FVector::zeros(self.n);
        let mut spaces: Vec<&Subspace> = Vec::new();
        for (i, m) in incoming.iter().enumerate() {
            let c = coefs[i];
            if i == pos || c.is_zero() {
                continue;
            }
            let Some(SupportMessage::Coset(m)) = m else {
                return Err(Error::Internal("closed form needs coset inputs".into()));
            };
            let a = self.field.mul(k, c);
            self.ops.mul += 1;
            rep = rep.add(&self.field, &m.rep().scale(&self.field, a, &mut self.ops), &mut self.ops);
            spaces.push(m.space());
        }
        let space = Subspace::sum_all(&self.field, self.n, spaces, &mut self.ops)?;
        Ok(SupportMessage::Coset(Coset::new(rep, space, &mut self.ops)?))
    }

    /// Solution set of a linear cluster in F^{n·(externals + internals)},
    /// variable-major.
    fn cluster_solutions(&mut self, g: &FactorGraph, f: usize) -> Result<Option<Coset>> {
        if let Some(s) = self.cluster_sets.get(&f) {
            return Ok(s.clone());
        }
        let fac = &g.factors()[f];
        let Payload::Cluster(c) = &fac.payload else {
            return Err(Error::Internal("not a cluster".into()));
        };
        let n = self.n;
        let ne = fac.vars.len();
        let big = (ne + c.internal.len()) * n;
        let at = |s: &Slot| match *s {
            Slot::External(i) => i,
            Slot::Internal(j) => ne + j,
        };
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for part in &c.parts {
            match &part.payload {
                Payload::Linear { coefs } => {
                    for t in 0..n {
                        let mut row = FVector::zeros(big);
                        for (k, s) in part.slots.iter().enumerate() {
                            row.0[at(s) * n + t] = coefs[k];
                        }
                        rows.push(row);
                        rhs.push(Gf::ZERO);
                    }
                }
                Payload::Delta(v) => {
                    for t in 0..n {
                        rows.push(FVector::unit(big, at(&part.slots[0]) * n + t));
                        rhs.push(v.0[t]);
                    }
                }
                _ => return Err(Error::Internal("coset path on a non-linear cluster".into())),
            }
        }
        let sol = if rows.is_empty() {
            Some(Coset::full(&self.field, big))
        } else {
            let a = FMatrix::from_rows(&self.field, big, &rows)?;
            solve(&a, &FVector(rhs), &mut self.ops)?
        };
        self.cluster_sets.insert(f, sol.clone());
        Ok(sol)
    }

    /// Project (solutions ∩ product of incoming cosets) onto the recipient.
    fn linear_cluster(
        &mut self,
        g: &FactorGraph,
        f: usize,
        pos: usize,
        incoming: &[Option<&SupportMessage>],
    ) -> Result<SupportMessage> {
        let Some(sol) = self.cluster_solutions(g, f)? else {
            return Ok(SupportMessage::Empty);
        };
        let n = self.n;
        let big = sol.ambient();
        let ne = incoming.len();
        let mut rep = FVector::zeros(big);
        let mut gens = Vec::new();
        for (i, m) in incoming.iter().enumerate() {
            match m {
                None => gens.extend((0..n).map(|t| FVector::unit(big, i * n + t))),
                Some(SupportMessage::Coset(c)) => {
                    rep.0[i * n..(i + 1) * n].copy_from_slice(&c.rep().0);
                    for b in c.space().basis() {
                        let mut v = FVector::zeros(big);
                        v.0[i * n..(i + 1) * n].copy_from_slice(&b.0);
                        gens.push(v);
                    }
                }
                Some(_) => return Err(Error::Internal("closed form needs coset inputs".into())),
            }
        }
        gens.extend((ne * n..big).map(|x| FVector::unit(big, x)));
        let product = Coset::new(rep, Subspace::span(&self.field, big, &gens, &mut self.ops)?, &mut self.ops)?;
        let Some(meet) = sol.intersect(&product, &mut self.ops)? else {
            return Ok(SupportMessage::Empty);
        };
        let mut proj = FMatrix::zeros(&self.field, n, big);
        for t in 0..n {
            proj.set(t, pos * n + t, Gf::ONE);
        }
        Ok(SupportMessage::Coset(meet.map(&proj, &mut self.ops)?))
    }

    /// Union over all configurations drawn from the incoming supports.
    fn enumerate(
        &mut self,
        g: &FactorGraph,
        f: usize,
        pos: usize,
        incoming: &[Option<&SupportMessage>],
    ) -> Result<SupportMessage> {
        let alphabet =
            self.alphabet.clone().ok_or_else(|| Error::Capacity("alphabet too large to enumerate".into()))?;
        let a = alphabet.size();
        let fac = &g.factors()[f];
        let internal = match &fac.payload {
            Payload::Cluster(c) => c.internal.len(),
            _ => 0,
        };
        let mut choices = Vec::new();
        for m in incoming {
            choices.push(match m {
                None => (0..a).collect(),
                Some(m) => m.to_set(&alphabet, SET_GUARD)?.into_iter().collect(),
            });
        }
        choices.extend((0..internal).map(|_| (0..a).collect::<Vec<_>>()));
        check_guard(&choices, self.table_guard, &format!("support of factor {}", fac.id))?;
        let ne = incoming.len();
        let mut out = BTreeSet::new();
        for_each_config(&choices, |vals| {
            let w = match &fac.payload {
                Payload::Cluster(c) => c.weight(&alphabet, &vals[..ne], &vals[ne..]),
                p => p.weight(&alphabet, vals),
            };
            if w > 0.0 {
                out.insert(vals[pos]);
            }
        });
        Ok(if out.is_empty() { SupportMessage::Empty } else { SupportMessage::Set(out) })
    }
}

impl MessageRules for SupportRules {
    type Msg = SupportMessage;

    fn initial(&mut self, _: &FactorGraph) -> SupportMessage {
        SupportMessage::Coset(Coset::full(&self.field, self.n))
    }

    fn var_to_factor(&mut self, _: &FactorGraph, _: usize, incoming: &[&SupportMessage]) -> Result<SupportMessage> {
        let m = intersect_all(&self.field, self.n, incoming, self.alphabet.as_ref(), &mut self.ops)?;
        Ok(self.note(m))
    }

    fn factor_to_var(
        &mut self,
        g: &FactorGraph,
        f: usize,
        pos: usize,
        incoming: &[Option<&SupportMessage>],
    ) -> Result<SupportMessage> {
        if incoming.iter().any(|m| m.is_some_and(SupportMessage::is_empty)) {
            return Ok(self.note(SupportMessage::Empty));
        }
        let all_cosets = incoming.iter().all(|m| m.is_none_or(|m| matches!(m, SupportMessage::Coset(_))));
        let fac = &g.factors()[f];
        let m = match &fac.payload {
            Payload::Delta(v) => SupportMessage::Coset(Coset::point(&self.field, v.clone())),
            Payload::Linear { coefs } if all_cosets => self.linear(coefs, pos, incoming)?,
            p @ Payload::Cluster(_) if all_cosets && p.is_linear() => self.linear_cluster(g, f, pos, incoming)?,
            _ => self.enumerate(g, f, pos, incoming)?,
        };
        Ok(self.note(m))
    }

    fn belief(&mut self, g: &FactorGraph, var: usize, incoming: &[&SupportMessage]) -> Result<SupportMessage> {
        self.var_to_factor(g, var, incoming)
    }

    fn unchanged(&mut self, old: &SupportMessage, new: &SupportMessage) -> bool {
        old == new
    }
}

#[derive(Clone, Debug)]
pub struct SupportResult {
    /// Final support of every variable, in graph order.
    pub beliefs: Vec<SupportMessage>,
    pub report: SupportReport,
}

/// Run support passing from full-alphabet messages.
pub fn run_support(g: &FactorGraph, schedule: &Schedule) -> Result<SupportResult> {
    let edges = Edges::new(g);
    let mut rules = SupportRules::new(g);
    let mut report = SupportReport::default();
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
            let alphabet = g.alphabet().ok();
            let mut check_ops = OpCount::default();
            let mut check_err = None;
            for it in 1..=schedule.max_iterations {
                let (mut shrinks, mut bad) = (0, 0);
                let changed = engine::flood_step(g, &edges, &mut rules, &mut state, &mut |_, _, old, new| {
                    if old == new {
                        return;
                    }
                    match new.is_subset_of(old, alphabet.as_ref(), &mut check_ops) {
                        Ok(true) => shrinks += 1,
                        Ok(false) => bad += 1,
                        Err(e) => check_err = Some(e),
                    }
                })?;
                if let Some(e) = check_err.take() {
                    return Err(e);
                }
                report.iterations = it;
                report.messages += 2 * edges.len();
                report.strict_shrinks += shrinks;
                report.monotonicity_violations += bad;
                if !changed {
                    report.converged = true;
                    break;
                }
            }
            state
        }
    };
    let beliefs = engine::beliefs(g, &edges, &mut rules, &state)?;
    report.coset_closed = rules.coset_closed && beliefs.iter().all(|b| !matches!(b, SupportMessage::Set(_)));
    report.contradiction = rules.contradiction || beliefs.iter().any(SupportMessage::is_empty);
    report.ops = rules.ops;
    Ok(SupportResult { beliefs, report })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub steps: usize,
    /// First disagreement between the two runs.
    pub divergence: Option<String>,
}

/// Does the table message have exactly `support` as its support and a
/// constant value on it?
fn table_matches(t: &TableMessage, support: &BTreeSet<usize>) -> bool {
    if support.is_empty() {
        return t.iter().all(|&x| x == 0.0);
    }
    let level = 1.0 / support.len() as f64;
    t.iter().enumerate().all(|(x, &p)| {
        if support.contains(&x) {
            (p - level).abs() <= 1e-9
        } else {
            p == 0.0
        }
    })
}

fn compare_states(
    g: &FactorGraph,
    edges: &Edges,
    alphabet: &Alphabet,
    tables: &State<TableMessage>,
    supports: &State<SupportMessage>,
) -> Result<Option<String>> {
    for (e, &(f, _, v)) in edges.list.iter().enumerate() {
        let pairs = [
            ("var->factor", &tables.v2f[e], &supports.v2f[e]),
            ("factor->var", &tables.f2v[e], &supports.f2v[e]),
        ];
        for (dir, t, s) in pairs {
            if !matches!(s, SupportMessage::Coset(_) | SupportMessage::Empty) {
                return Ok(Some(format!("{dir} message on {}-{} left the coset form", g.factors()[f].id, g.variables()[v].id)));
            }
            let set = s.to_set(alphabet, usize::MAX)?;
            if !table_matches(t, &set) {
                return Ok(Some(format!(
                    "{dir} message on {}-{}: table {t:?} vs support {s}",
                    g.factors()[f].id,
                    g.variables()[v].id
                )));
            }
        }
    }
    Ok(None)
}

/// Run table sum-product and coset support passing side by side with the
/// same flooding schedule and compare every message after every step.
pub fn equivalence_check(g: &FactorGraph, max_iterations: usize) -> Result<EquivalenceReport> {
    if !g.is_deterministic() {
        return Err(Error::Usage("equivalence check needs a deterministic linear graph".into()));
    }
    let alphabet = g.alphabet()?;
    let edges = Edges::new(g);
    let mut trules = TableRules::new(g, crate::sumprod::TABLE_GUARD, 1e-12)?;
    let mut srules = SupportRules::new(g);
    let mut ts = engine::initial_state(g, &edges, &mut trules);
    let mut ss = engine::initial_state(g, &edges, &mut srules);
    let mut steps = 0;
    if let Some(d) = compare_states(g, &edges, &alphabet, &ts, &ss)? {
        return Ok(EquivalenceReport { pass: false, steps, divergence: Some(d) });
    }
    for _ in 0..max_iterations.max(1) {
        let tc = engine::flood_step(g, &edges, &mut trules, &mut ts, &mut |_: Direction, _, _, _| {})?;
        let sc = engine::flood_step(g, &edges, &mut srules, &mut ss, &mut |_: Direction, _, _, _| {})?;
        steps += 1;
        if let Some(d) = compare_states(g, &edges, &alphabet, &ts, &ss)? {
            return Ok(EquivalenceReport { pass: false, steps, divergence: Some(format!("step {steps}: {d}")) });
        }
        if !tc && !sc {
            break;
        }
    }
    let tb = engine::beliefs(g, &edges, &mut trules, &ts)?;
    let sb = engine::beliefs(g, &edges, &mut srules, &ss)?;
    for (v, (t, s)) in tb.iter().zip(&sb).enumerate() {
        if !table_matches(t, &s.to_set(&alphabet, usize::MAX)?) {
            let d = format!("belief of {}: table {t:?} vs support {s}", g.variables()[v].id);
            return Ok(EquivalenceReport { pass: false, steps, divergence: Some(d) });
        }
    }
    Ok(EquivalenceReport { pass: true, steps, divergence: None })
}

/// What support passing says about one target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Decoded(FVector),
    /// Every member of the coset is consistent with the observations.
    Ambiguous(Coset),
    AmbiguousSet(Vec<FVector>),
}

impl Outcome {
    /// Number of undetermined symbol dimensions; sets report 0 unless a
    /// coset form is known.
    pub fn ambiguity_dim(&self) -> usize {
        match self {
            Outcome::Ambiguous(c) => c.dim(),
            _ => 0,
        }
    }
}

/// Read off decoded values for the named targets.
pub fn extract_decode(g: &FactorGraph, beliefs: &[SupportMessage], targets: &[&str]) -> Result<Vec<(String, Outcome)>> {
    let alphabet = g.alphabet().ok();
    targets
        .iter()
        .map(|t| {
            let v = g.var_index(t).ok_or_else(|| Error::Usage(format!("unknown target `{t}`")))?;
            let out = match &beliefs[v] {
                SupportMessage::Empty => {
                    return Err(Error::Contradiction(format!("no value of {t} is consistent with the observations")))
                }
                SupportMessage::Coset(c) if c.is_point() => Outcome::Decoded(c.rep().clone()),
                SupportMessage::Coset(c) => Outcome::Ambiguous(c.clone()),
                SupportMessage::Set(s) => {
                    let alphabet = alphabet.as_ref().expect("sets only arise over indexable alphabets");
                    let vs: Vec<FVector> = s.iter().map(|&x| alphabet.vector(x)).collect();
                    if vs.len() == 1 {
                        Outcome::Decoded(vs[0].clone())
                    } else {
                        Outcome::AmbiguousSet(vs)
                    }
                }
            };
            Ok((t.to_string(), out))
        })
        .collect()
}

/// Support of a table message, for comparing the two algorithms.
pub fn table_support(t: &[f64]) -> BTreeSet<usize> {
    t.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(i, _)| i).collect()
}
