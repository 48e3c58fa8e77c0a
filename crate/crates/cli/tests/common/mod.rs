#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use potgraph::graph::{VertexId, WeightedGraph};
use rand::Rng;

pub const BIN: &str = env!("CARGO_BIN_EXE_potgraph");

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Run {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.stdout).expect("stdout is JSON")
    }
}

pub fn run(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(BIN).current_dir(dir).args(args).output().expect("spawn cli");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Random spanning tree plus extra edges; weights drawn by `weight`.
pub fn random_connected<R: Rng>(
    rng: &mut R,
    n: usize,
    extra: usize,
    mut weight: impl FnMut(&mut R) -> f64,
) -> WeightedGraph<f64> {
    let mut edges = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        seen.insert((u, v));
        let w = weight(rng);
        edges.push((u as VertexId, v as VertexId, w));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let (u, v) = (a.min(b), a.max(b));
        if u != v && seen.insert((u, v)) {
            let w = weight(rng);
            edges.push((u as VertexId, v as VertexId, w));
        }
    }
    WeightedGraph::from_edges(0..n as VertexId, edges).expect("valid random graph")
}

/// Random tree: vertex `v` hangs below a uniformly chosen earlier vertex.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, mut weight: impl FnMut(&mut R) -> f64) -> WeightedGraph<f64> {
    let edges: Vec<_> = (1..n)
        .map(|v| (rng.gen_range(0..v) as VertexId, v as VertexId, weight(rng)))
        .collect();
    WeightedGraph::from_edges(0..n as VertexId, edges).expect("valid random tree")
}
