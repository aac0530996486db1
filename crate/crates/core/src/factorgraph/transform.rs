use std::collections::{BTreeMap, VecDeque};

use super::{find_cycles, ClusterPayload, Factor, FactorGraph, Origin, Part, Payload, Slot};
use crate::error::{Error, Result};
use crate::network::Network;

/// Drop zero-coefficient edges of linear factors. A linear factor left with
/// no variables is the constant 1 and is dropped as well.
pub fn simplify(g: &FactorGraph) -> FactorGraph {
    let mut out = g.clone();
    out.factors.retain_mut(|f| {
        if let Payload::Linear { coefs } = &mut f.payload {
            let keep: Vec<bool> = coefs.iter().map(|c| !c.is_zero()).collect();
            let mut i = 0;
            f.vars.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            coefs.retain(|c| !c.is_zero());
            return !coefs.is_empty();
        }
        true
    });
    out
}

/// Result of [`prune`].
#[derive(Clone, Debug)]
pub struct Pruned {
    pub graph: FactorGraph,
    /// Targets left without any observation in their component.
    pub disconnected: Vec<String>,
}

/// Repeatedly remove unprotected leaf variables together with their factor
/// whenever summing the variable out turns that factor into a constant: a
/// linear factor where it has a nonzero coefficient, or a table where it is
/// the output. Targets and observed variables are protected.
pub fn prune(g: &FactorGraph, targets: &[&str]) -> Result<Pruned> {
    let mut protected = g.observed();
    for t in targets {
        let v = g.var_index(t).ok_or_else(|| Error::Usage(format!("unknown target `{t}`")))?;
        protected[v] = true;
    }
    let inc = g.incidence();
    let mut alive_v = vec![true; g.vars.len()];
    let mut alive_f = vec![true; g.factors.len()];
    let mut deg: Vec<usize> = inc.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..g.vars.len()).filter(|&v| !protected[v] && deg[v] <= 1).collect();
    while let Some(v) = queue.pop_front() {
        if !alive_v[v] || protected[v] {
            continue;
        }
        if deg[v] == 0 {
            alive_v[v] = false;
            continue;
        }
        let &(f, p) = inc[v].iter().find(|(f, _)| alive_f[*f]).expect("degree counts alive factors");
        let constant = match &g.factors[f].payload {
            Payload::Linear { coefs } => !coefs[p].is_zero(),
            Payload::Table(_) => p == 0,
            Payload::Delta(_) | Payload::Cluster(_) => false,
        };
        if !constant {
            continue;
        }
        alive_v[v] = false;
        alive_f[f] = false;
        for &w in &g.factors[f].vars {
            if w != v {
                deg[w] -= 1;
                if !protected[w] && deg[w] <= 1 {
                    queue.push_back(w);
                }
            }
        }
    }
    let graph = g.retain(&alive_v, &alive_f);
    let disconnected = unobserved_components(&graph)
        .into_iter()
        .filter(|&v| targets.contains(&graph.vars[v].id.as_str()))
        .map(|v| graph.vars[v].id.clone())
        .collect();
    Ok(Pruned { graph, disconnected })
}

/// Variables whose connected component has no observation factor.
fn unobserved_components(g: &FactorGraph) -> Vec<usize> {
    let nv = g.vars.len();
    let mut comp = vec![usize::MAX; nv];
    let inc = g.incidence();
    let mut seen_f = vec![false; g.factors.len()];
    let mut observed = Vec::new();
    for start in 0..nv {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = observed.len();
        observed.push(false);
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &(f, _) in &inc[v] {
                if seen_f[f] {
                    continue;
                }
                seen_f[f] = true;
                if matches!(g.factors[f].payload, Payload::Delta(_)) {
                    observed[id] = true;
                }
                for &w in &g.factors[f].vars {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
        }
    }
    (0..nv).filter(|&v| !observed[comp[v]]).collect()
}

/// Merge each group of factors into one cluster factor. Variables touched
/// only by one group, not listed in `keep` and not observed, become
/// internal to that cluster. Groups of one factor are left as they are.
pub fn cluster(g: &FactorGraph, partition: &[Vec<String>], keep: &[&str]) -> Result<FactorGraph> {
    let mut group_of = vec![usize::MAX; g.factors.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for group in partition {
        let mut members = Vec::new();
        for id in group {
            let f = g.factor_index(id).ok_or_else(|| Error::Usage(format!("unknown factor `{id}`")))?;
            if group_of[f] != usize::MAX {
                return Err(Error::Usage(format!("factor `{id}` appears in more than one group")));
            }
            group_of[f] = groups.len();
            members.push(f);
        }
        if members.len() > 1 {
            if let Some(&f) = members.iter().find(|&&f| matches!(g.factors[f].payload, Payload::Cluster(_))) {
                return Err(Error::Usage(format!("factor `{}` is already a cluster", g.factors[f].id)));
            }
        }
        groups.push(members);
    }
    let observed = g.observed();
    let inc = g.incidence();
    let mut internal_to = vec![usize::MAX; g.vars.len()];
    for (v, touching) in inc.iter().enumerate() {
        if observed[v] || keep.contains(&g.vars[v].id.as_str()) || touching.is_empty() {
            continue;
        }
        let gi = group_of[touching[0].0];
        if gi != usize::MAX && groups[gi].len() > 1 && touching.iter().all(|&(f, _)| group_of[f] == gi) {
            internal_to[v] = gi;
        }
    }

    let mut map = vec![usize::MAX; g.vars.len()];
    let mut out = FactorGraph::new(g.field(), g.dim());
    for (v, var) in g.vars.iter().enumerate() {
        if internal_to[v] == usize::MAX {
            map[v] = out.vars.len();
            out.vars.push(var.clone());
        }
    }
    let mut emitted = vec![false; groups.len()];
    for (f, factor) in g.factors.iter().enumerate() {
        let gi = group_of[f];
        if gi == usize::MAX || groups[gi].len() == 1 {
            let mut factor = factor.clone();
            factor.vars = factor.vars.iter().map(|&v| map[v]).collect();
            out.factors.push(factor);
            continue;
        }
        if emitted[gi] {
            continue;
        }
        emitted[gi] = true;
        let mut ext: Vec<usize> = Vec::new();
        let mut int: BTreeMap<usize, usize> = BTreeMap::new();
        let mut internal = Vec::new();
        let mut parts = Vec::new();
        for &m in &groups[gi] {
            let member = &g.factors[m];
            let slots = member
                .vars
                .iter()
                .map(|&v| {
                    if internal_to[v] == gi {
                        let next = int.len();
                        let j = *int.entry(v).or_insert_with(|| {
                            internal.push(g.vars[v].id.clone());
                            next
                        });
                        Slot::Internal(j)
                    } else {
                        let i = ext.iter().position(|&x| x == v).unwrap_or_else(|| {
                            ext.push(v);
                            ext.len() - 1
                        });
                        Slot::External(i)
                    }
                })
                .collect();
            parts.push(Part { id: member.id.clone(), payload: member.payload.clone(), slots });
        }
        let ids: Vec<&str> = groups[gi].iter().map(|&m| g.factors[m].id.as_str()).collect();
        out.factors.push(Factor {
            id: format!("cluster:{}", ids.join("+")),
            payload: Payload::Cluster(ClusterPayload { parts, internal }),
            vars: ext.iter().map(|&v| map[v]).collect(),
            origin: Origin::Cluster,
        });
    }
    Ok(out)
}

/// Cluster with `partition`, then, while a cycle remains, merge every group
/// on the cycle witness into one and recluster. Ends with a forest: at
/// worst all link factors form a single cluster. Returns the final graph
/// and partition.
pub fn cluster_until_acyclic(
    g: &FactorGraph,
    partition: &[Vec<String>],
    keep: &[&str],
) -> Result<(FactorGraph, Vec<Vec<String>>)> {
    let mut groups: Vec<Vec<String>> = partition.to_vec();
    loop {
        let c = cluster(g, &groups, keep)?;
        let Some(witness) = find_cycles(&c).witness else {
            return Ok((c, groups));
        };
        let mut merged = Vec::new();
        let mut hit = vec![false; groups.len()];
        for id in witness.iter().filter(|id| c.factor_index(id).is_some()) {
            match groups.iter().position(|grp| cluster_id(grp) == *id) {
                Some(i) => hit[i] = true,
                None => merged.push(id.clone()),
            }
        }
        for (i, grp) in groups.iter().enumerate() {
            if hit[i] {
                merged.extend(grp.iter().cloned());
            }
        }
        let mut next: Vec<Vec<String>> = groups.into_iter().zip(hit).filter(|(_, h)| !h).map(|(grp, _)| grp).collect();
        next.push(merged);
        groups = next;
    }
}

fn cluster_id(group: &[String]) -> String {
    if group.len() == 1 {
        group[0].clone()
    } else {
        format!("cluster:{}", group.join("+"))
    }
}

/// Group the link factors of `g` by the node their link leaves from.
pub fn default_clustering(net: &Network, g: &FactorGraph) -> Vec<Vec<String>> {
    let mut order: Vec<usize> = Vec::new();
    let mut by_tail: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for f in &g.factors {
        if let Origin::Link(l) = f.origin {
            let tail = net.links()[l].tail;
            if !by_tail.contains_key(&tail) {
                order.push(tail);
            }
            by_tail.entry(tail).or_default().push(f.id.clone());
        }
    }
    order.into_iter().map(|t| by_tail.remove(&t).unwrap()).collect()
}
