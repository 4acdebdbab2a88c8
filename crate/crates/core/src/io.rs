//! File formats.
//!
//! Chain JSON: `{"n": 2, "convention": "column", "P": [[0.9, 0.1], [0.1, 0.9]]}`
//! with rows listed in order. Under `"column"` the entry in row `i`, column
//! `j` is `Pr[next = i | current = j]`; `"row"` input (`Pr[next = j | current
//! = i]`) is transposed on load.
//!
//! Weighted graph TSV: one `u<TAB>v<TAB>w` line per undirected edge, 0-based
//! vertex ids and positive weights. Blank lines and `#` comments are skipped.

use serde::{Deserialize, Serialize};

use crate::chain::{ReversibleChain, TransitionMatrix};
use crate::error::{Error, Result};
use crate::generators::WeightedEdge;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Column,
    Row,
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Column => "column",
            Convention::Row => "row",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub n: usize,
    pub convention: Convention,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

impl ChainFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain file serializes")
    }

    /// Column-convention file for a chain.
    pub fn from_chain<T: Scalar>(chain: &ReversibleChain<T>) -> Self {
        let p = chain.matrix();
        Self {
            n: p.n(),
            convention: Convention::Column,
            p: (0..p.n())
                .map(|i| p.row(i).iter().map(|x| x.as_f64()).collect())
                .collect(),
        }
    }

    /// Validated column-stochastic matrix, transposing row-convention input.
    pub fn to_matrix<T: Scalar>(&self, tol_stochastic: f64) -> Result<TransitionMatrix<T>> {
        if self.p.len() != self.n {
            return Err(Error::Parse(format!(
                "\"n\" is {} but \"P\" has {} rows",
                self.n,
                self.p.len()
            )));
        }
        let n = self.n;
        for (row, r) in self.p.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NonSquare { row, len: r.len(), n });
            }
        }
        let raw: Vec<Vec<T>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match self.convention {
                        Convention::Column => self.p[i][j],
                        Convention::Row => self.p[j][i],
                    })
                    .map(T::lit)
                    .collect()
            })
            .collect();
        TransitionMatrix::validate(&raw, tol_stochastic)
    }
}

pub fn parse_graph_tsv(text: &str) -> Result<Vec<WeightedEdge>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
        if fields.len() != 3 {
            return Err(bad("expected u<TAB>v<TAB>w"));
        }
        let u = fields[0].parse().map_err(|_| bad("bad vertex id"))?;
        let v = fields[1].parse().map_err(|_| bad("bad vertex id"))?;
        let w: f64 = fields[2].parse().map_err(|_| bad("bad weight"))?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(bad("weight must be positive"));
        }
        edges.push(WeightedEdge { u, v, w });
    }
    if edges.is_empty() {
        return Err(Error::Parse("graph has no edges".into()));
    }
    Ok(edges)
}

pub fn write_graph_tsv(edges: &[WeightedEdge]) -> String {
    edges.iter().map(|e| format!("{}\t{}\t{}\n", e.u, e.v, e.w)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainInput {
    Matrix(ChainFile),
    Graph(Vec<WeightedEdge>),
}

/// JSON when the first non-blank character is `{`, TSV otherwise.
pub fn parse_input(text: &str) -> Result<ChainInput> {
    if text.trim_start().starts_with('{') {
        ChainFile::parse(text).map(ChainInput::Matrix)
    } else {
        parse_graph_tsv(text).map(ChainInput::Graph)
    }
}
