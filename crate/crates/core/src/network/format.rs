//! Line-oriented text formats for networks, observations and source values.
//!
//! ```text
//! field GF(2)
//! dim 1
//! node a b c d t1 t2
//! source y1 @ a
//! link y3 a c
//! coef y3 y1 1
//! noise y3 0.1
//! sink t1 observes y5 y8
//! ```
//!
//! Directives must appear in the order shown; `#` starts a comment.

use std::fmt::Write as _;

use super::{ChannelTable, Network, Observation};
use crate::error::{Error, Result};
use crate::galois::{FVector, Field, Gf};

const ORDER: [&str; 8] = ["field", "dim", "node", "source", "link", "coef", "noise", "sink"];

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_network(text: &str) -> Result<Network> {
    let mut field: Option<Field> = None;
    let mut net: Option<Network> = None;
    let mut stage = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip(raw);
        if line.is_empty() {
            continue;
        }
        let mut words = line.split_whitespace();
        let directive = words.next().unwrap();
        let args: Vec<&str> = words.collect();
        let pos = ORDER
            .iter()
            .position(|d| *d == directive)
            .ok_or_else(|| Error::parse(lineno, format!("unknown directive `{directive}`")))?;
        if pos < stage {
            return Err(Error::parse(lineno, format!("`{directive}` after `{}`", ORDER[stage])));
        }
        stage = pos;
        let at = |e: Error| match e {
            Error::Parse { .. } => e,
            other => Error::parse(lineno, other.to_string()),
        };
        match directive {
            "field" => {
                if field.is_some() || args.len() != 1 {
                    return Err(Error::parse(lineno, "expected exactly one `field GF(...)` line"));
                }
                field = Some(Field::parse(args[0]).map_err(at)?);
            }
            "dim" => {
                let f = field.as_ref().ok_or_else(|| Error::parse(lineno, "`dim` before `field`"))?;
                if net.is_some() || args.len() != 1 {
                    return Err(Error::parse(lineno, "expected exactly one `dim N` line"));
                }
                let n: usize = args[0]
                    .parse()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::parse(lineno, format!("bad dimension `{}`", args[0])))?;
                net = Some(Network::new(f, n));
            }
            _ => {
                let net = net.as_mut().ok_or_else(|| Error::parse(lineno, "`field` and `dim` must come first"))?;
                match directive {
                    "node" => {
                        if args.is_empty() {
                            return Err(Error::parse(lineno, "`node` needs at least one id"));
                        }
                        for id in args {
                            net.add_node(id).map_err(at)?;
                        }
                    }
                    "source" => match args.as_slice() {
                        [id, "@", node] => {
                            net.add_source(id, node).map_err(at)?;
                        }
                        _ => return Err(Error::parse(lineno, "expected `source <id> @ <node>`")),
                    },
                    "link" => match args.as_slice() {
                        [id, tail, head] => {
                            net.add_link(id, tail, head).map_err(at)?;
                        }
                        _ => return Err(Error::parse(lineno, "expected `link <id> <tail> <head>`")),
                    },
                    "coef" => match args.as_slice() {
                        [link, input, value] => {
                            let v: u32 = value
                                .parse()
                                .map_err(|_| Error::parse(lineno, format!("bad coefficient `{value}`")))?;
                            net.set_coef(link, input, Gf(v)).map_err(at)?;
                        }
                        _ => return Err(Error::parse(lineno, "expected `coef <link> <input> <value>`")),
                    },
                    "noise" => match args.as_slice() {
                        [link, flip] => {
                            let l = net.link_index(link).map_err(at)?;
                            let p: f64 = flip
                                .parse()
                                .map_err(|_| Error::parse(lineno, format!("bad probability `{flip}`")))?;
                            let table = ChannelTable::symmetric(net, l, p).map_err(at)?;
                            net.set_channel(table);
                        }
                        _ => return Err(Error::parse(lineno, "expected `noise <link> <flip-probability>`")),
                    },
                    "sink" => match args.as_slice() {
                        [node, "observes", links @ ..] if !links.is_empty() => {
                            net.add_sink(node, links).map_err(at)?;
                        }
                        _ => return Err(Error::parse(lineno, "expected `sink <node> observes <link>...`")),
                    },
                    _ => unreachable!(),
                }
            }
        }
    }
    net.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing `field`/`dim` header"))
}

impl Network {
    /// Serialize in the format accepted by [`parse_network`]. Channel tables
    /// other than the ones produced by `noise` cannot be written and are
    /// skipped.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "field {}", self.field.spec());
        let _ = writeln!(s, "dim {}", self.dim);
        if !self.nodes.is_empty() {
            let _ = writeln!(s, "node {}", self.nodes.join(" "));
        }
        for src in &self.sources {
            let _ = writeln!(s, "source {} @ {}", src.id, self.nodes[src.node]);
        }
        for l in &self.links {
            let _ = writeln!(s, "link {} {} {}", l.id, self.nodes[l.tail], self.nodes[l.head]);
        }
        for (&(l, e), c) in &self.coefs {
            let _ = writeln!(s, "coef {} {} {}", self.links[l].id, self.input_name(e), c);
        }
        for sink in &self.sinks {
            let obs: Vec<&str> = sink.observes.iter().map(|&l| self.links[l].id.as_str()).collect();
            let _ = writeln!(s, "sink {} observes {}", self.nodes[sink.node], obs.join(" "));
        }
        s
    }
}

/// Parse `obs <link> = <vector>` lines, optionally preceded by `sink <node>`.
/// Without a `sink` line the sink is the head of the first observed link.
pub fn parse_observation(net: &Network, text: &str) -> Result<Observation> {
    let mut sink: Option<usize> = None;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip(raw);
        if line.is_empty() {
            continue;
        }
        let at = |e: Error| Error::parse(lineno, e.to_string());
        if let Some(rest) = line.strip_prefix("sink ") {
            if sink.is_some() || !values.is_empty() {
                return Err(Error::parse(lineno, "`sink` must be the first directive"));
            }
            sink = Some(net.node_index(rest.trim()).map_err(at)?);
        } else if let Some(rest) = line.strip_prefix("obs ") {
            let (link, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected `obs <link> = <value>`"))?;
            let l = net.link_index(link.trim()).map_err(at)?;
            let v = FVector::parse(net.field(), net.dim(), value.trim()).map_err(at)?;
            if values.iter().any(|(x, _)| *x == l) {
                return Err(Error::parse(lineno, format!("link {} observed twice", link.trim())));
            }
            values.push((l, v));
        } else {
            return Err(Error::parse(lineno, format!("unknown directive in `{line}`")));
        }
    }
    let sink = match (sink, values.first()) {
        (Some(s), _) => s,
        (None, Some((l, _))) => net.links()[*l].head,
        (None, None) => return Err(Error::Usage("observation file has no `obs` lines".into())),
    };
    let obs = Observation { sink, values };
    net.check_observation(&obs)?;
    Ok(obs)
}

/// Source values, either `y1=1,0;y2=0,1` inline or one `source y1 = 1,0`
/// per line. Every source must be given exactly once.
pub fn parse_sources(net: &Network, text: &str) -> Result<Vec<FVector>> {
    let mut vals: Vec<Option<FVector>> = vec![None; net.sources().len()];
    let items: Vec<(usize, String)> = if text.contains('\n') || text.trim_start().starts_with("source ") {
        text.lines()
            .enumerate()
            .map(|(i, l)| (i + 1, strip(l).trim_start_matches("source ").to_string()))
            .filter(|(_, l)| !l.is_empty())
            .collect()
    } else {
        text.split(';').map(|s| (1, s.trim().to_string())).filter(|(_, s)| !s.is_empty()).collect()
    };
    for (lineno, item) in items {
        let (id, value) = item
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected `<source>=<value>` in `{item}`")))?;
        let s = net.source_index(id.trim()).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if vals[s].is_some() {
            return Err(Error::parse(lineno, format!("source {} given twice", id.trim())));
        }
        vals[s] = Some(FVector::parse(net.field(), net.dim(), value.trim()).map_err(|e| Error::parse(lineno, e.to_string()))?);
    }
    vals.into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Usage(format!("missing value for source {}", net.sources()[i].id))))
        .collect()
}
