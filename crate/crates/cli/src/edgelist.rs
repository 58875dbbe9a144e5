//! Whitespace-separated edge-list files.
//!
//! One edge per line as `u v` with arbitrary string labels; `#` starts a
//! comment line. Loading collapses duplicate edges, drops self-loops (with a
//! count), and assigns dense indices in first-appearance order.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use privmix_core::model::AdjacencyMatrix;

use crate::{HarnessError, Result};

/// An undirected simple graph with its label map.
#[derive(Debug, Clone)]
pub struct EdgeListGraph {
    labels: Vec<String>,
    adjacency: AdjacencyMatrix,
    edge_count: usize,
    self_loops_dropped: usize,
}

impl EdgeListGraph {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    /// Dense index -> external label, in first-appearance order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn adjacency(&self) -> &AdjacencyMatrix {
        &self.adjacency
    }

    /// Build from an in-memory adjacency matrix with node indices as labels.
    pub fn from_adjacency(adjacency: AdjacencyMatrix) -> Self {
        let n = adjacency.n();
        let edge_count = adjacency.edge_count();
        Self {
            labels: (0..n).map(|i| i.to_string()).collect(),
            adjacency,
            edge_count,
            self_loops_dropped: 0,
        }
    }

    /// Build from an adjacency matrix, keeping an existing label map.
    pub fn from_adjacency_with_labels(adjacency: AdjacencyMatrix, labels: &[String]) -> Self {
        assert_eq!(labels.len(), adjacency.n(), "one label per node");
        let edge_count = adjacency.edge_count();
        Self {
            labels: labels.to_vec(),
            adjacency,
            edge_count,
            self_loops_dropped: 0,
        }
    }
}

/// Load an edge-list file.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeListGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_edge_list(&text, &path.display().to_string())
}

/// Parse edge-list text (exposed for tests and in-memory use).
pub fn parse_edge_list(text: &str, path: &str) -> Result<EdgeListGraph> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut self_loops = 0usize;

    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(HarnessError::Parse {
                path: path.to_string(),
                line: line_no + 1,
                message: format!("expected 2 tokens, found {}", tokens.len()),
            });
        }
        let mut id_of = |label: &str| -> usize {
            if let Some(&i) = index.get(label) {
                i
            } else {
                let i = labels.len();
                index.insert(label.to_string(), i);
                labels.push(label.to_string());
                i
            }
        };
        let u = id_of(tokens[0]);
        let v = id_of(tokens[1]);
        if u == v {
            self_loops += 1;
            continue;
        }
        edges.push((u.min(v), u.max(v)));
    }

    let n = labels.len();
    let mut a = Array2::<u8>::zeros((n, n));
    let mut edge_count = 0usize;
    for (u, v) in edges {
        if a[[u, v]] == 0 {
            a[[u, v]] = 1;
            a[[v, u]] = 1;
            edge_count += 1;
        }
    }
    Ok(EdgeListGraph {
        labels,
        adjacency: AdjacencyMatrix::from_dense(a)?,
        edge_count,
        self_loops_dropped: self_loops,
    })
}

/// Write the graph back out, one `u v` line per edge in index order.
pub fn write_edge_list(graph: &EdgeListGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    let n = graph.n();
    let a = graph.adjacency.matrix();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[[i, j]] == 1 {
                writeln!(out, "{} {}", graph.labels[i], graph.labels[j]).expect("vec write");
            }
        }
    }
    std::fs::write(path, out).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}
