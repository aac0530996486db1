//! Acceptance gate. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::io::Write as _;

use common::{deterministic_instance, gf, Shape};
use netcode_mp::decoder::{
    bench_chain, decode_gaussian, decode_mp, log_log_slope, oracle_marginal_support, oracle_posterior, DecodeOptions,
    TargetOutcome,
};
use netcode_mp::factorgraph::{build_ncfg, cluster, default_clustering, find_cycles, prune, simplify};
use netcode_mp::galois::{rref, FVector, OpCount};
use netcode_mp::network::{topology, Observation};
use netcode_mp::sumprod::{self, Schedule};
use netcode_mp::support::{equivalence_check, run_support};
use netcode_mp::Error;
use rand::{Rng, SeedableRng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Coset closure is accumulated across criteria 1 to 3.
#[derive(Default)]
struct Closure {
    runs: usize,
    broken: usize,
}

fn tree_exactness(closure: &mut Closure) -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
    let (mut instances, mut mismatches) = (0, 0);
    let mut fields = BTreeSet::new();
    let mut dims = BTreeSet::new();
    while instances < 200 {
        let (net, obs, _) = deterministic_instance(&mut rng, Shape::Acyclic, 16.0);
        let g = build_ncfg(&net, &obs).unwrap();
        let alphabet = g.alphabet().unwrap();
        let r = run_support(&g, &Schedule::two_pass()).unwrap();
        let ids: Vec<&str> = g.variables().iter().map(|v| v.id.as_str()).collect();
        let oracle = oracle_marginal_support(&net, &obs, &ids).unwrap();
        for (i, (_, want)) in oracle.iter().enumerate() {
            if common::as_vectors(&r.beliefs[i], &alphabet) != *want {
                mismatches += 1;
            }
        }
        closure.runs += 1;
        closure.broken += !r.report.coset_closed as usize;
        fields.insert(net.field().order());
        dims.insert(net.dim());
        instances += 1;
    }
    verdict(
        mismatches == 0,
        format!("{instances} acyclic instances, q in {fields:?}, n in {dims:?}, {mismatches} support mismatches"),
    )
}

fn convergence_and_soundness(closure: &mut Closure) -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(102);
    let (mut instances, mut violations, mut over_budget, mut unsound, mut unconverged) = (0, 0, 0, 0, 0);
    while instances < 100 {
        let (net, obs, _) = deterministic_instance(&mut rng, Shape::Cyclic, 16.0);
        let g = build_ncfg(&net, &obs).unwrap();
        let alphabet = g.alphabet().unwrap();
        let directed = 2 * g.edge_count();
        let r = run_support(&g, &Schedule::flooding(10 * directed + 10)).unwrap();
        violations += r.report.monotonicity_violations;
        over_budget += (r.report.strict_shrinks > net.dim() * directed) as usize;
        unconverged += !r.report.converged as usize;
        let ids: Vec<&str> = g.variables().iter().map(|v| v.id.as_str()).collect();
        let oracle = oracle_marginal_support(&net, &obs, &ids).unwrap();
        for (i, (_, want)) in oracle.iter().enumerate() {
            if !want.is_subset(&common::as_vectors(&r.beliefs[i], &alphabet)) {
                unsound += 1;
            }
        }
        closure.runs += 1;
        closure.broken += !r.report.coset_closed as usize;
        instances += 1;
    }
    verdict(
        violations + over_budget + unsound + unconverged == 0,
        format!(
            "{instances} cyclic instances: {violations} monotonicity violations, {over_budget} over the shrink \
             budget, {unconverged} not converged, {unsound} supports missing oracle values"
        ),
    )
}

fn equivalence(closure: &mut Closure) -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(103);
    let (mut instances, mut divergences, mut skipped) = (0, 0, 0);
    let mut first = None;
    while instances < 100 {
        let (net, obs, _) = deterministic_instance(&mut rng, Shape::Any, 16.0);
        let g = build_ncfg(&net, &obs).unwrap();
        match equivalence_check(&g, 200) {
            Ok(rep) => {
                if !rep.pass {
                    divergences += 1;
                    first.get_or_insert(rep.divergence);
                }
                // every compared message was checked to be a coset
                closure.runs += 1;
                closure.broken += !rep.pass as usize;
                instances += 1;
            }
            Err(Error::Capacity(_)) => skipped += 1,
            Err(e) => panic!("equivalence check failed: {e}"),
        }
    }
    verdict(
        divergences == 0,
        format!("{instances} instances ({skipped} over the table guard skipped), {divergences} divergences {first:?}"),
    )
}

fn coset_closure(closure: &Closure) -> Verdict {
    verdict(closure.broken == 0, format!("{} linear runs, {} left the coset form", closure.runs, closure.broken))
}

fn butterfly_golden() -> Verdict {
    let f = gf(2, 1);
    let net = topology::butterfly(&f);
    let mut problems = Vec::new();
    let mut export = String::new();
    for p in 0..4u32 {
        let src = [FVector::from_reprs(&[p & 1]), FVector::from_reprs(&[p >> 1])];
        let sym = net.encode(&src).unwrap();
        for sink in ["t1", "t2"] {
            let s = net.sink_by_name(sink).unwrap();
            let obs = Observation::from_assignment(s.node, &s.observes, &sym);
            let g = build_ncfg(&net, &obs).unwrap();
            if !find_cycles(&g).is_forest {
                problems.push(format!("{sink}: NCFG has a cycle"));
            }
            let r = decode_mp(&net, &obs, &[], &DecodeOptions::default()).unwrap();
            for (i, (_, o)) in r.targets.iter().enumerate() {
                if *o != TargetOutcome::Decoded(src[i].clone()) {
                    problems.push(format!("{sink} pattern {p}: {o:?}"));
                }
            }
            if sink == "t1" {
                export = prune(&simplify(&g), &["y1", "y2"]).unwrap().graph.export();
            }
        }
    }
    let golden = include_str!("golden/butterfly_t1_pruned.txt");
    if export != golden {
        problems.push("pruned t1 export differs from the golden file".into());
    }
    verdict(problems.is_empty(), format!("cycle-free, 4 patterns x 2 sinks, golden export; problems: {problems:?}"))
}

fn clustering_correctness() -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(106);
    let fields = [gf(5, 1), gf(2, 4)];
    let (mut instances, mut problems) = (0, Vec::new());
    while instances < 50 {
        let k = rng.gen_range(2..=16);
        let f = &fields[instances % 2];
        let net = topology::chain(f, k).random_code(f, rng.gen());
        let sink = &net.sinks()[0];
        let a = net.global_transfer_matrix(&sink.observes).unwrap();
        if rref(&a, &mut OpCount::default()).rank < k {
            continue;
        }
        let src = common::random_sources(&mut rng, &net);
        let obs = Observation::from_assignment(sink.node, &sink.observes, &net.encode(&src).unwrap());
        let g = build_ncfg(&net, &obs).unwrap();
        let keep: Vec<&str> = net.sources().iter().map(|s| s.id.as_str()).collect();
        let clustered = cluster(&g, &default_clustering(&net, &g), &keep).unwrap();
        if find_cycles(&g).is_forest {
            problems.push(format!("K={k}: raw NCFG is cycle-free"));
        }
        if !find_cycles(&clustered).is_forest {
            problems.push(format!("K={k}: clustered NCFG has a cycle"));
        }
        let mp = decode_mp(&net, &obs, &[], &DecodeOptions::default()).unwrap();
        let ge = decode_gaussian(&net, &obs, &[]).unwrap();
        let truth: Vec<TargetOutcome> = src.iter().cloned().map(TargetOutcome::Decoded).collect();
        let mp_vals: Vec<TargetOutcome> = mp.targets.iter().map(|(_, o)| o.clone()).collect();
        if mp.targets != ge.targets || mp_vals != truth {
            problems.push(format!("K={k}: decoders disagree"));
        }
        instances += 1;
    }
    verdict(problems.is_empty(), format!("{instances} invertible chain codes, K <= 16; problems: {problems:?}"))
}

fn complexity_separation() -> Verdict {
    let rows = bench_chain(&[4, 8, 16, 32], &gf(2, 4), 107, 1).unwrap();
    let mp = log_log_slope(&rows.iter().map(|r| (r.k, r.mp_ops())).collect::<Vec<_>>());
    let ge = log_log_slope(&rows.iter().map(|r| (r.k, r.ge_ops())).collect::<Vec<_>>());
    let last = rows.last().unwrap();
    let pass = (0.8..=1.3).contains(&mp) && (2.5..=3.3).contains(&ge) && last.mp_ops() < last.ge_ops();
    verdict(
        pass,
        format!(
            "mp slope {mp:.3} (want [0.8, 1.3]), gaussian slope {ge:.3} (want [2.5, 3.3]), K=32 ops mp {} vs gaussian {}",
            last.mp_ops(),
            last.ge_ops()
        ),
    )
}

fn stochastic_posteriors() -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(108);
    let (mut instances, mut worst) = (0, 0.0f64);
    while instances < 50 {
        let (mut net, _, src) = deterministic_instance(&mut rng, Shape::Acyclic, 16.0);
        common::make_stochastic(&mut rng, &mut net);
        let sym = net.encode_stochastic(&src, rng.gen()).unwrap();
        let obs = common::observe_some(&mut rng, &net, &sym);
        let branching = net.channels().keys().filter(|l| !obs.links().any(|o| o == **l)).count();
        let q = (net.field().order() as f64).powi(net.dim() as i32);
        if q.powi((net.sources().len() + branching) as i32) > (1u64 << 16) as f64 {
            continue;
        }
        let g = build_ncfg(&net, &obs).unwrap();
        let Ok(r) = sumprod::run(&g, &Schedule::two_pass()) else { continue };
        let ids: Vec<&str> = g.variables().iter().map(|v| v.id.as_str()).collect();
        for (i, (_, p)) in oracle_posterior(&net, &obs, &ids).unwrap().iter().enumerate() {
            for (a, b) in r.beliefs[i].iter().zip(p) {
                worst = worst.max((a - b).abs());
            }
        }
        instances += 1;
    }
    verdict(worst <= 1e-9, format!("{instances} stochastic trees, max |belief - posterior| = {worst:.2e} (want <= 1e-9)"))
}

fn singular_baseline() -> Verdict {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(109);
    let (mut instances, mut ambiguous_targets, mut problems) = (0, 0, Vec::new());
    while instances < 50 {
        let (net, obs, _) = deterministic_instance(&mut rng, Shape::Any, 16.0);
        let links: Vec<usize> = obs.links().collect();
        let a = net.global_transfer_matrix(&links).unwrap();
        if rref(&a, &mut OpCount::default()).rank == net.sources().len() {
            continue;
        }
        let mp = decode_mp(&net, &obs, &[], &DecodeOptions::default()).unwrap();
        let ge = decode_gaussian(&net, &obs, &[]).unwrap();
        ambiguous_targets += ge.targets.iter().filter(|(_, o)| matches!(o, TargetOutcome::Ambiguous(_))).count();
        if mp.targets != ge.targets {
            problems.push(format!("{:?} vs {:?}", mp.targets, ge.targets));
        }
        instances += 1;
    }
    verdict(
        problems.is_empty(),
        format!("{instances} singular codes, {ambiguous_targets} ambiguous targets, {} mismatches {problems:?}", problems.len()),
    )
}

#[test]
fn acceptance() {
    let mut closure = Closure::default();
    let results = [
        ("1 tree exactness", tree_exactness(&mut closure)),
        ("2 convergence and soundness on cyclic graphs", convergence_and_soundness(&mut closure)),
        ("3 sum-product / support equivalence", equivalence(&mut closure)),
        ("4 coset closure", coset_closure(&closure)),
        ("5 butterfly golden", butterfly_golden()),
        ("6 clustering correctness on the chain", clustering_correctness()),
        ("7 complexity separation", complexity_separation()),
        ("8 stochastic posterior exactness", stochastic_posteriors()),
        ("9 baseline agreement on singular codes", singular_baseline()),
    ];
    // written to the stdout handle directly so the lines survive output capture
    let mut out = std::io::stdout().lock();
    for (name, v) in &results {
        let _ = writeln!(out, "{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    drop(out);
    let failed: Vec<&str> = results.iter().filter(|(_, v)| !v.pass).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
