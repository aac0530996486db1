use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use netcode_mp::decoder::{
    self, bench_chain, decode_gaussian, decode_mp, oracle_marginal_support, oracle_posterior, BenchRow, ClusterMode,
    DecodeOptions, DecodeResult, TargetOutcome,
};
use netcode_mp::factorgraph::{self, build_ncfg, FactorGraph};
use netcode_mp::galois::{Alphabet, FVector, Field};
use netcode_mp::network::{parse_network, parse_observation, parse_sources, Network, Observation};
use netcode_mp::Error;

use crate::{BenchArgs, Common, DecodeArgs, EncodeArgs, GraphArgs, PipelineArgs, Stage};

pub enum Failure {
    Usage(String),
    Failed(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Failed(m) => m,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Failed(_) => ExitCode::from(1),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(_) => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_net(c: &Common) -> Result<Network, Failure> {
    let text = read(&c.net)?;
    let net = parse_network(&text).map_err(|e| Failure::Failed(format!("{}: {e}", c.net.display())))?;
    match &c.field {
        Some(f) => Ok(net.random_code(&Field::parse(f)?, c.seed)),
        None => Ok(net),
    }
}

pub fn validate(c: &Common) -> Outcome {
    let net = load_net(c)?;
    let diags = net.validate();
    let mut s = String::new();
    for d in &diags {
        let _ = writeln!(s, "{d}");
    }
    let valid = diags.iter().all(|d| !d.is_error());
    if valid {
        let _ = writeln!(
            s,
            "ok sources={} links={} sinks={}",
            net.sources().len(),
            net.links().len(),
            net.sinks().len()
        );
    }
    emit(c.out.as_deref(), &s)?;
    Ok(if valid { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn encode(a: &EncodeArgs) -> Outcome {
    let net = load_net(&a.common)?;
    let text = match (&a.sources, &a.sources_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => return Err(Failure::Usage("give --sources or --sources-file".into())),
    };
    let src = parse_sources(&net, &text)?;
    let sym = if net.is_deterministic() { net.encode(&src)? } else { net.encode_stochastic(&src, a.common.seed)? };
    let mut s = String::new();
    for (l, link) in net.links().iter().enumerate() {
        let _ = writeln!(s, "link={} value={}", link.id, sym.links[l]);
    }
    emit(a.common.out.as_deref(), &s)?;
    Ok(ExitCode::SUCCESS)
}

fn options(p: &PipelineArgs) -> Result<DecodeOptions, Failure> {
    let cluster = match p.cluster.as_str() {
        "auto" => ClusterMode::Auto,
        "off" => ClusterMode::Off,
        path => {
            let groups = read(Path::new(path))?
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").split_whitespace().map(String::from).collect::<Vec<_>>())
                .filter(|g| !g.is_empty())
                .collect();
            ClusterMode::Explicit(groups)
        }
    };
    Ok(DecodeOptions {
        simplify: !p.no_simplify,
        prune: !p.no_prune,
        cluster,
        max_iterations: p.max_iterations,
        ..DecodeOptions::default()
    })
}

fn target_line(s: &mut String, alphabet: &Alphabet, id: &str, o: &TargetOutcome) {
    let (value, dim) = match o {
        TargetOutcome::Decoded(v) => (v.to_string(), 0),
        TargetOutcome::Ambiguous(c) => (c.rep().to_string(), c.dim()),
        TargetOutcome::AmbiguousSet(vs) => (vs[0].to_string(), 0),
        TargetOutcome::Posterior(p) => {
            let (best, _) = p.iter().enumerate().fold((0, -1.0), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
            (alphabet.vector(best).to_string(), 0)
        }
        TargetOutcome::Contradiction => ("-".into(), 0),
    };
    let _ = write!(s, "target={id} status={} value={value} ambiguity_dim={dim}", o.status());
    match o {
        TargetOutcome::AmbiguousSet(vs) => {
            let _ = write!(s, " candidates={}", vs.len());
        }
        TargetOutcome::Posterior(p) => {
            let probs: Vec<String> = p.iter().map(|x| format!("{x:.6}")).collect();
            let _ = write!(s, " posterior={}", probs.join(","));
        }
        _ => {}
    }
    s.push('\n');
}

fn support_of(o: &TargetOutcome) -> BTreeSet<FVector> {
    match o {
        TargetOutcome::Decoded(v) => [v.clone()].into(),
        TargetOutcome::Ambiguous(c) => c.enumerate().into_iter().collect(),
        TargetOutcome::AmbiguousSet(vs) => vs.iter().cloned().collect(),
        TargetOutcome::Posterior(_) | TargetOutcome::Contradiction => BTreeSet::new(),
    }
}

fn oracle_check(net: &Network, obs: &Observation, r: &DecodeResult) -> Result<Option<bool>, Failure> {
    let ids: Vec<&str> = r.targets.iter().map(|(t, _)| t.as_str()).collect();
    if net.is_deterministic() {
        let want = match oracle_marginal_support(net, obs, &ids) {
            Ok(w) => w,
            Err(Error::Capacity(_)) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(Some(r.targets.iter().zip(&want).all(|((_, o), (_, w))| support_of(o) == *w)))
    } else {
        let want = match oracle_posterior(net, obs, &ids) {
            Ok(w) => w,
            Err(Error::Capacity(_)) => return Ok(None),
            Err(Error::Contradiction(_)) => return Ok(Some(r.contradiction())),
            Err(e) => return Err(e.into()),
        };
        Ok(Some(r.targets.iter().zip(&want).all(|((_, o), (_, w))| match o {
            TargetOutcome::Posterior(p) => p.iter().zip(w).all(|(a, b)| (a - b).abs() <= 1e-9),
            _ => false,
        })))
    }
}

pub fn decode(a: &DecodeArgs) -> Outcome {
    let net = load_net(&a.common)?;
    let obs = parse_observation(&net, &read(&a.obs)?).map_err(|e| match e {
        Error::Parse { .. } => Failure::Failed(format!("{}: {e}", a.obs.display())),
        e => e.into(),
    })?;
    let targets: Vec<&str> = a.pipeline.targets.iter().map(String::as_str).collect();
    let r = decode_mp(&net, &obs, &targets, &options(&a.pipeline)?)?;
    for line in r.log.iter() {
        eprintln!("# {line}");
    }
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    let alphabet = Alphabet::new(net.field(), net.dim())?;
    let mut s = String::new();
    for (id, o) in &r.targets {
        target_line(&mut s, &alphabet, id, o);
    }
    let c = r.counters;
    let _ = writeln!(
        s,
        "counters mul={} add={} messages={} iterations={} superset_possible={}",
        c.mul, c.add, c.messages, c.iterations, r.superset_possible
    );
    let mut ok = !r.contradiction();
    if a.baseline {
        let ge = decode_gaussian(&net, &obs, &targets)?;
        let agree = ge.targets == r.targets;
        ok &= agree;
        let _ = writeln!(s, "baseline agree={agree} mul={} add={}", ge.counters.mul, ge.counters.add);
    }
    if a.oracle {
        match oracle_check(&net, &obs, &r)? {
            Some(agree) => {
                ok &= agree;
                let _ = writeln!(s, "oracle agree={agree}");
            }
            None => {
                let _ = writeln!(s, "oracle skipped=capacity");
            }
        }
    }
    emit(a.common.out.as_deref(), &s)?;
    if r.contradiction() {
        eprintln!("error: observations are inconsistent with the code");
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn graph_observation(net: &Network, a: &GraphArgs) -> Result<Observation, Failure> {
    if let Some(p) = &a.obs {
        return Ok(parse_observation(net, &read(p)?)?);
    }
    let sink = match &a.sink {
        Some(id) => net.sink_by_name(id)?,
        None => net.sinks().first().ok_or_else(|| Failure::Usage("network declares no sink".into()))?,
    };
    // values do not appear in the export
    let values = sink.observes.iter().map(|&l| (l, FVector::zeros(net.dim()))).collect();
    Ok(Observation { sink: sink.node, values })
}

pub fn graph(a: &GraphArgs) -> Outcome {
    let net = load_net(&a.common)?;
    let obs = graph_observation(&net, a)?;
    let owned: Vec<String> = if a.pipeline.targets.is_empty() {
        net.sources().iter().map(|s| s.id.clone()).collect()
    } else {
        a.pipeline.targets.clone()
    };
    let targets: Vec<&str> = owned.iter().map(String::as_str).collect();
    let g: FactorGraph = match a.stage {
        Stage::Raw => build_ncfg(&net, &obs)?,
        Stage::Simplified => factorgraph::simplify(&build_ncfg(&net, &obs)?),
        Stage::Pruned => {
            let mut g = build_ncfg(&net, &obs)?;
            if !a.pipeline.no_simplify {
                g = factorgraph::simplify(&g);
            }
            factorgraph::prune(&g, &targets)?.graph
        }
        Stage::Clustered => decoder::prepare_graph(&net, &obs, &targets, &options(&a.pipeline)?)?.0,
    };
    emit(a.common.out.as_deref(), &g.export())?;
    Ok(ExitCode::SUCCESS)
}

pub fn bench(a: &BenchArgs) -> Outcome {
    if a.topology != "chain" {
        return Err(Failure::Usage(format!("unknown topology `{}`; only `chain` is available", a.topology)));
    }
    if let Some(&k) = a.k.iter().find(|&&k| k < 2) {
        return Err(Failure::Usage(format!("chain needs K >= 2, got {k}")));
    }
    let field = Field::parse(&a.field)?;
    let rows = bench_chain(&a.k, &field, a.seed, a.reps)?;
    let mut s = String::new();
    let _ = writeln!(s, "{}", BenchRow::CSV_HEADER);
    for r in &rows {
        let _ = writeln!(s, "{}", r.to_csv());
    }
    emit(a.out.as_deref(), &s)?;
    Ok(ExitCode::SUCCESS)
}
