//! The `.wgr` text format: `c` comment lines, a `p wvc <n> <m>` header,
//! `v <id> <weight>` lines with 1-based ids and `e <u> <v>` lines with `u < v`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Graph;
use crate::weight::{format_decimal, parse_decimal, Rational, WeightMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WgrError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p wvc` header")]
    MissingHeader,
    #[error("header declares {declared} {what} but body has {found}")]
    CountMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WgrFile {
    pub comments: Vec<String>,
    pub graph: Graph,
    pub weights: WeightMap,
}

pub fn parse(text: &str) -> Result<WgrFile, WgrError> {
    let mut comments = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut weights: Vec<Option<Rational>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| WgrError::Syntax { line, msg };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let tag = toks.next().unwrap();
        let rest: Vec<&str> = toks.collect();
        if tag == "c" {
            comments.push(trimmed.strip_prefix('c').unwrap().trim_start().to_string());
            continue;
        }
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad integer `{s}`")))
        };
        match tag {
            "p" => {
                if header.is_some() {
                    return Err(err("duplicate header".into()));
                }
                if rest.len() != 3 || rest[0] != "wvc" {
                    return Err(err("expected `p wvc <n> <m>`".into()));
                }
                let (n, m) = (count(rest[1])?, count(rest[2])?);
                header = Some((n, m));
                weights = vec![None; n];
            }
            "v" | "e" => {
                let (n, _) = header.ok_or_else(|| err("body line before header".into()))?;
                if rest.len() != 2 {
                    return Err(err(format!("expected `{tag} <a> <b>`")));
                }
                let id = |s: &str| -> Result<usize, WgrError> {
                    let i = count(s)?;
                    if i == 0 || i > n {
                        return Err(err(format!("vertex id {i} outside 1..={n}")));
                    }
                    Ok(i - 1)
                };
                if tag == "v" {
                    let v = id(rest[0])?;
                    let w = parse_decimal(rest[1]).map_err(|e| err(e.to_string()))?;
                    if weights[v].replace(w).is_some() {
                        return Err(err(format!("duplicate weight for vertex {}", v + 1)));
                    }
                } else {
                    let (a, b) = (id(rest[0])?, id(rest[1])?);
                    if a >= b {
                        return Err(err("edge endpoints must satisfy u < v".into()));
                    }
                    edges.push((a, b));
                }
            }
            _ => return Err(err(format!("unknown line tag `{tag}`"))),
        }
    }
    let (n, m) = header.ok_or(WgrError::MissingHeader)?;
    let found = weights.iter().filter(|w| w.is_some()).count();
    if found != n {
        return Err(WgrError::CountMismatch {
            what: "weights",
            declared: n,
            found,
        });
    }
    if edges.len() != m {
        return Err(WgrError::CountMismatch {
            what: "edges",
            declared: m,
            found: edges.len(),
        });
    }
    let graph = Graph::build(n, &edges).map_err(|e| WgrError::Syntax {
        line: 0,
        msg: e.to_string(),
    })?;
    let weights = WeightMap::new(weights.into_iter().map(Option::unwrap).collect());
    Ok(WgrFile {
        comments,
        graph,
        weights,
    })
}

pub fn emit(comments: &[String], graph: &Graph, weights: &WeightMap) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "c {c}").unwrap();
    }
    let edges = graph.edges();
    writeln!(out, "p wvc {} {}", graph.n_total(), edges.len()).unwrap();
    for v in graph.vertices() {
        writeln!(out, "v {} {}", v.index() + 1, format_decimal(&weights[v])).unwrap();
    }
    for (a, b) in edges {
        writeln!(out, "e {} {}", a.index() + 1, b.index() + 1).unwrap();
    }
    out
}
