//! Message-passing skeleton shared by the table and support algorithms.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::factorgraph::FactorGraph;

/// Local update rules of one message-passing algorithm.
pub trait MessageRules {
    type Msg: Clone;

    /// Message every edge starts from in flooding.
    fn initial(&mut self, g: &FactorGraph) -> Self::Msg;

    /// Combine the messages from all other factors of `var`.
    fn var_to_factor(&mut self, g: &FactorGraph, var: usize, incoming: &[&Self::Msg]) -> Result<Self::Msg>;

    /// Message from `factor` to its variable at `pos`; `incoming` is aligned
    /// with the factor's variables and is `None` at `pos`.
    fn factor_to_var(
        &mut self,
        g: &FactorGraph,
        factor: usize,
        pos: usize,
        incoming: &[Option<&Self::Msg>],
    ) -> Result<Self::Msg>;

    /// Combine every message into `var`.
    fn belief(&mut self, g: &FactorGraph, var: usize, incoming: &[&Self::Msg]) -> Result<Self::Msg>;

    fn unchanged(&mut self, old: &Self::Msg, new: &Self::Msg) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    VarToFactor,
    FactorToVar,
}

/// Edge `e` joins `factor` and the variable at `pos` in its list.
#[derive(Clone, Debug)]
pub struct Edges {
    pub list: Vec<(usize, usize, usize)>,
    pub by_var: Vec<Vec<usize>>,
    pub by_factor: Vec<Vec<usize>>,
}

impl Edges {
    pub fn new(g: &FactorGraph) -> Self {
        let mut list = Vec::new();
        let mut by_var = vec![Vec::new(); g.variables().len()];
        let mut by_factor = vec![Vec::new(); g.factors().len()];
        for (f, factor) in g.factors().iter().enumerate() {
            for (p, &v) in factor.vars.iter().enumerate() {
                by_var[v].push(list.len());
                by_factor[f].push(list.len());
                list.push((f, p, v));
            }
        }
        Edges { list, by_var, by_factor }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }
}

/// Current message on every directed edge.
#[derive(Clone, Debug)]
pub struct State<M> {
    pub v2f: Vec<M>,
    pub f2v: Vec<M>,
}

fn v2f_msg<R: MessageRules>(
    g: &FactorGraph,
    edges: &Edges,
    rules: &mut R,
    f2v: &[Option<R::Msg>],
    e: usize,
) -> Result<R::Msg> {
    let v = edges.list[e].2;
    let incoming: Vec<&R::Msg> =
        edges.by_var[v].iter().filter(|&&x| x != e).map(|&x| f2v[x].as_ref().expect("dependency computed")).collect();
    rules.var_to_factor(g, v, &incoming)
}

fn f2v_msg<R: MessageRules>(
    g: &FactorGraph,
    edges: &Edges,
    rules: &mut R,
    v2f: &[Option<R::Msg>],
    e: usize,
) -> Result<R::Msg> {
    let (f, pos, _) = edges.list[e];
    let incoming: Vec<Option<&R::Msg>> = edges.by_factor[f]
        .iter()
        .map(|&x| if x == e { None } else { Some(v2f[x].as_ref().expect("dependency computed")) })
        .collect();
    rules.factor_to_var(g, f, pos, &incoming)
}

/// Compute each directed message exactly once, as soon as everything it
/// depends on is known. Fails on graphs with cycles.
pub fn two_pass<R: MessageRules>(g: &FactorGraph, edges: &Edges, rules: &mut R) -> Result<(State<R::Msg>, usize)> {
    let m = edges.len();
    let mut v2f: Vec<Option<R::Msg>> = vec![None; m];
    let mut f2v: Vec<Option<R::Msg>> = vec![None; m];
    // ids 0..m are var->factor, m..2m factor->var
    let mut pending = vec![0usize; 2 * m];
    for (e, &(f, _, v)) in edges.list.iter().enumerate() {
        pending[e] = edges.by_var[v].len() - 1;
        pending[m + e] = edges.by_factor[f].len() - 1;
    }
    let mut ready: VecDeque<usize> = (0..2 * m).filter(|&i| pending[i] == 0).collect();
    let mut computed = 0;
    while let Some(id) = ready.pop_front() {
        if id < m {
            let e = id;
            v2f[e] = Some(v2f_msg(g, edges, rules, &f2v, e)?);
            let f = edges.list[e].0;
            for &x in &edges.by_factor[f] {
                if x != e {
                    pending[m + x] -= 1;
                    if pending[m + x] == 0 {
                        ready.push_back(m + x);
                    }
                }
            }
        } else {
            let e = id - m;
            f2v[e] = Some(f2v_msg(g, edges, rules, &v2f, e)?);
            let v = edges.list[e].2;
            for &x in &edges.by_var[v] {
                if x != e {
                    pending[x] -= 1;
                    if pending[x] == 0 {
                        ready.push_back(x);
                    }
                }
            }
        }
        computed += 1;
    }
    if computed != 2 * m {
        return Err(Error::Usage("the two-pass schedule needs a cycle-free graph".into()));
    }
    let state = State {
        v2f: v2f.into_iter().map(Option::unwrap).collect(),
        f2v: f2v.into_iter().map(Option::unwrap).collect(),
    };
    Ok((state, computed))
}

/// All edges carry the initial message.
pub fn initial_state<R: MessageRules>(g: &FactorGraph, edges: &Edges, rules: &mut R) -> State<R::Msg> {
    let init = rules.initial(g);
    State { v2f: vec![init.clone(); edges.len()], f2v: vec![init; edges.len()] }
}

/// One flooding iteration: every variable-to-factor message from the
/// current factor-to-variable messages, then every factor-to-variable
/// message from those. `observe` sees each `(direction, edge, old, new)`.
/// Returns whether any message changed.
pub fn flood_step<R: MessageRules>(
    g: &FactorGraph,
    edges: &Edges,
    rules: &mut R,
    state: &mut State<R::Msg>,
    observe: &mut dyn FnMut(Direction, usize, &R::Msg, &R::Msg),
) -> Result<bool> {
    let m = edges.len();
    let f2v: Vec<Option<R::Msg>> = state.f2v.iter().cloned().map(Some).collect();
    let mut new_v2f = Vec::with_capacity(m);
    for e in 0..m {
        new_v2f.push(v2f_msg(g, edges, rules, &f2v, e)?);
    }
    let mut changed = false;
    for (e, new) in new_v2f.iter().enumerate() {
        observe(Direction::VarToFactor, e, &state.v2f[e], new);
        changed |= !rules.unchanged(&state.v2f[e], new);
    }
    let v2f: Vec<Option<R::Msg>> = new_v2f.iter().cloned().map(Some).collect();
    state.v2f = new_v2f;
    let mut new_f2v = Vec::with_capacity(m);
    for e in 0..m {
        new_f2v.push(f2v_msg(g, edges, rules, &v2f, e)?);
    }
    for (e, new) in new_f2v.iter().enumerate() {
        observe(Direction::FactorToVar, e, &state.f2v[e], new);
        changed |= !rules.unchanged(&state.f2v[e], new);
    }
    state.f2v = new_f2v;
    Ok(changed)
}

/// Beliefs of every variable from the factor-to-variable messages.
pub fn beliefs<R: MessageRules>(
    g: &FactorGraph,
    edges: &Edges,
    rules: &mut R,
    state: &State<R::Msg>,
) -> Result<Vec<R::Msg>> {
    (0..g.variables().len())
        .map(|v| {
            let incoming: Vec<&R::Msg> = edges.by_var[v].iter().map(|&e| &state.f2v[e]).collect();
            rules.belief(g, v, &incoming)
        })
        .collect()
}
