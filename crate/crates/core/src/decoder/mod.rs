//! End-to-end decoding: the message-passing pipeline, the Gaussian
//! elimination baseline, brute-force oracles and the chain benchmark.

mod bench;
mod oracle;

pub use bench::{bench_chain, log_log_slope, BenchRow};
pub use oracle::{oracle_marginal_support, oracle_posterior, ORACLE_GUARD};

use crate::error::{Error, Result};
use crate::factorgraph::{self, build_ncfg, find_cycles, FactorGraph};
use crate::galois::{solve_many, Coset, FMatrix, FVector, OpCount, Subspace};
use crate::network::{Input, Network, Observation};
use crate::sumprod::{self, Schedule};
use crate::support::{self, Outcome, SupportMessage};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClusterMode {
    /// Only when the graph has cycles: group link factors by tail node, then
    /// merge groups along any remaining cycle.
    Auto,
    Off,
    /// Groups of factor ids.
    Explicit(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOptions {
    pub simplify: bool,
    pub prune: bool,
    pub cluster: ClusterMode,
    pub max_iterations: usize,
    pub table_guard: usize,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            simplify: true,
            prune: true,
            cluster: ClusterMode::Auto,
            max_iterations: 1000,
            table_guard: sumprod::TABLE_GUARD,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub mul: u64,
    pub add: u64,
    pub messages: u64,
    pub iterations: u64,
}

impl Counters {
    pub fn field_ops(&self) -> u64 {
        self.mul + self.add
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TargetOutcome {
    Decoded(FVector),
    Ambiguous(Coset),
    AmbiguousSet(Vec<FVector>),
    /// Posterior marginal over the alphabet, from a stochastic network.
    Posterior(Vec<f64>),
    Contradiction,
}

impl TargetOutcome {
    pub fn status(&self) -> &'static str {
        match self {
            TargetOutcome::Decoded(_) => "decoded",
            TargetOutcome::Ambiguous(_) | TargetOutcome::AmbiguousSet(_) => "ambiguous",
            TargetOutcome::Posterior(_) => "posterior",
            TargetOutcome::Contradiction => "contradiction",
        }
    }

    pub fn ambiguity_dim(&self) -> usize {
        match self {
            TargetOutcome::Ambiguous(c) => c.dim(),
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecodeResult {
    pub targets: Vec<(String, TargetOutcome)>,
    pub counters: Counters,
    /// One line per pipeline stage.
    pub log: Vec<String>,
    pub warnings: Vec<String>,
    /// Cycles remained, so supports may be larger than the true ones.
    pub superset_possible: bool,
    pub converged: bool,
}

impl DecodeResult {
    pub fn contradiction(&self) -> bool {
        self.targets.iter().any(|(_, o)| *o == TargetOutcome::Contradiction)
    }

    pub fn outcome(&self, target: &str) -> Option<&TargetOutcome> {
        self.targets.iter().find(|(t, _)| t == target).map(|(_, o)| o)
    }
}

fn default_targets(net: &Network, targets: &[&str]) -> Vec<String> {
    if targets.is_empty() {
        net.sources().iter().map(|s| s.id.clone()).collect()
    } else {
        targets.iter().map(|t| t.to_string()).collect()
    }
}

/// The factor graph `decode_mp` runs on, with its transform log.
pub fn prepare_graph(
    net: &Network,
    obs: &Observation,
    targets: &[&str],
    opts: &DecodeOptions,
) -> Result<(FactorGraph, Vec<String>, Vec<String>)> {
    let mut log = Vec::new();
    let mut warnings = Vec::new();
    let mut g = build_ncfg(net, obs)?;
    for t in targets {
        if g.var_index(t).is_none() {
            return Err(Error::Usage(format!("unknown target `{t}`")));
        }
    }
    log.push(format!("build variables={} factors={} edges={}", g.variables().len(), g.factors().len(), g.edge_count()));
    if opts.simplify {
        g = factorgraph::simplify(&g);
        log.push(format!("simplify edges={}", g.edge_count()));
    }
    if opts.prune {
        let p = factorgraph::prune(&g, targets)?;
        g = p.graph;
        for t in p.disconnected {
            warnings.push(format!("target {t} is not connected to any observation"));
        }
        log.push(format!("prune variables={} factors={}", g.variables().len(), g.factors().len()));
    }
    let clustered = match &opts.cluster {
        ClusterMode::Off => None,
        ClusterMode::Auto if find_cycles(&g).is_forest => None,
        ClusterMode::Auto => Some(factorgraph::cluster_until_acyclic(&g, &factorgraph::default_clustering(net, &g), targets)?),
        ClusterMode::Explicit(p) => Some((factorgraph::cluster(&g, p, targets)?, p.clone())),
    };
    if let Some((c, p)) = clustered {
        g = c;
        log.push(format!("cluster groups={} factors={}", p.iter().filter(|x| x.len() > 1).count(), g.factors().len()));
    }
    Ok((g, log, warnings))
}

/// Decode by message passing: build, simplify, prune, cluster if cyclic,
/// then support passing (deterministic codes) or sum-product (stochastic).
/// Empty `targets` means all sources.
pub fn decode_mp(net: &Network, obs: &Observation, targets: &[&str], opts: &DecodeOptions) -> Result<DecodeResult> {
    let owned = default_targets(net, targets);
    let targets: Vec<&str> = owned.iter().map(String::as_str).collect();
    let (g, mut log, warnings) = prepare_graph(net, obs, &targets, opts)?;
    let cycles = find_cycles(&g);
    let schedule = if cycles.is_forest { Schedule::two_pass() } else { Schedule::flooding(opts.max_iterations) };
    let mut counters = Counters::default();
    let mut out = Vec::new();
    let converged;
    if net.is_deterministic() {
        let r = support::run_support(&g, &schedule)?;
        log.push(format!(
            "support schedule={} iterations={} messages={}",
            if cycles.is_forest { "two-pass" } else { "flooding" },
            r.report.iterations,
            r.report.messages
        ));
        counters = Counters {
            mul: r.report.ops.mul,
            add: r.report.ops.add,
            messages: r.report.messages as u64,
            iterations: r.report.iterations as u64,
        };
        converged = r.report.converged;
        for t in &targets {
            let v = g.var_index(t).expect("targets survive every transform");
            let o = match &r.beliefs[v] {
                SupportMessage::Empty => TargetOutcome::Contradiction,
                _ => match &support::extract_decode(&g, &r.beliefs, &[t])?[0].1 {
                    Outcome::Decoded(x) => TargetOutcome::Decoded(x.clone()),
                    Outcome::Ambiguous(c) => TargetOutcome::Ambiguous(c.clone()),
                    Outcome::AmbiguousSet(s) => TargetOutcome::AmbiguousSet(s.clone()),
                },
            };
            out.push((t.to_string(), o));
        }
    } else {
        let r = sumprod::run_guarded(&g, &schedule, opts.table_guard)?;
        log.push(format!(
            "sumprod schedule={} iterations={} residual={:e}",
            if cycles.is_forest { "two-pass" } else { "flooding" },
            r.report.iterations,
            r.report.max_residual
        ));
        counters.messages = r.report.messages as u64;
        counters.iterations = r.report.iterations as u64;
        converged = r.report.converged;
        for t in &targets {
            let b = &r.beliefs[g.var_index(t).expect("targets survive every transform")];
            let o = if b.iter().all(|&x| x == 0.0) {
                TargetOutcome::Contradiction
            } else {
                TargetOutcome::Posterior(b.clone())
            };
            out.push((t.to_string(), o));
        }
    }
    Ok(DecodeResult {
        targets: out,
        counters,
        log,
        warnings,
        superset_possible: !cycles.is_forest,
        converged,
    })
}

/// Solve `A x = y` for the sources directly. Only the elimination is
/// counted; building `A` is bookkeeping shared with the network model.
pub fn decode_gaussian(net: &Network, obs: &Observation, targets: &[&str]) -> Result<DecodeResult> {
    net.check_observation(obs)?;
    let owned = default_targets(net, targets);
    let field = net.field();
    let n = net.dim();
    let links: Vec<usize> = obs.links().collect();
    let a = net.global_transfer_matrix(&links)?;
    let rows: Vec<FVector> = obs.values.iter().map(|(_, v)| v.clone()).collect();
    let y = FMatrix::from_rows(field, n, &rows)?;
    let mut ops = OpCount::default();
    let sol = solve_many(&a, &y, &mut ops)?;
    let mut scratch = OpCount::default();
    let mut out = Vec::new();
    for t in &owned {
        let s = match net.input_index(t)? {
            Input::Source(s) => s,
            Input::Link(_) => return Err(Error::Usage("the Gaussian baseline decodes sources only".into())),
        };
        let o = match &sol {
            None => TargetOutcome::Contradiction,
            Some(sol) => {
                let rep = sol.particular.row_vector(s);
                // the kernel acts coordinate-wise on F^n
                let free = sol.kernel.iter().any(|kv| !kv.0[s].is_zero());
                if free {
                    let space = Subspace::full(field, n);
                    TargetOutcome::Ambiguous(Coset::new(rep, space, &mut scratch)?)
                } else {
                    TargetOutcome::Decoded(rep)
                }
            }
        };
        out.push((t.clone(), o));
    }
    Ok(DecodeResult {
        targets: out,
        counters: Counters { mul: ops.mul, add: ops.add, messages: 0, iterations: 0 },
        log: vec![format!("gaussian rows={} cols={}", a.rows(), a.cols())],
        warnings: Vec::new(),
        superset_possible: false,
        converged: true,
    })
}

/// Joint solution set of the sources as a coset of F^{K·n}, source-major.
pub fn gaussian_solution_set(net: &Network, obs: &Observation) -> Result<Option<Coset>> {
    let field = net.field();
    let n = net.dim();
    let k = net.sources().len();
    let links: Vec<usize> = obs.links().collect();
    let a = net.global_transfer_matrix(&links)?;
    let rows: Vec<FVector> = obs.values.iter().map(|(_, v)| v.clone()).collect();
    let y = FMatrix::from_rows(field, n, &rows)?;
    let mut ops = OpCount::default();
    let Some(sol) = solve_many(&a, &y, &mut ops)? else {
        return Ok(None);
    };
    let mut rep = FVector::zeros(k * n);
    for s in 0..k {
        for t in 0..n {
            rep.0[s * n + t] = sol.particular.get(s, t);
        }
    }
    let mut gens = Vec::new();
    for kv in &sol.kernel {
        for t in 0..n {
            let mut g = FVector::zeros(k * n);
            for s in 0..k {
                g.0[s * n + t] = kv.0[s];
            }
            gens.push(g);
        }
    }
    let space = Subspace::span(field, k * n, &gens, &mut ops)?;
    Ok(Some(Coset::new(rep, space, &mut ops)?))
}
