//! Deterministic graph families.
//!
//! Labeling:
//! - `lattice(d, R)`: points of `Z^d` with `|x|_1 <= R`, ordered by shell
//!   (`|x|_1`) and lexicographically inside a shell. The origin is `0` and
//!   the labels of `lattice(d, R)` are a prefix of those of `lattice(d, R+1)`.
//! - `tree(k, D)`: breadth-first order, root `0`, children of `v` are
//!   `k*v + 1 ..= k*v + k`.
//! - `path(n)`: vertices `0..=n` with edges `(i, i+1)`, so `n` edges.
//! - `cycle(n)`: vertices `0..n`, edges `(i, i+1 mod n)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::scalar::Scalar;

pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

/// A graph family with its size parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Lattice { dim: usize, radius: usize },
    Tree { branching: usize, depth: usize },
    Path { len: usize },
    Cycle { len: usize },
}

/// A family without its size parameter; `at(r)` fixes the size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Lattice { dim: usize },
    Tree { branching: usize },
    Path,
    Cycle,
}

impl Family {
    /// The member whose combinatorial radius around vertex `0` is `r`.
    pub fn at(self, r: usize) -> FamilySpec {
        match self {
            Family::Lattice { dim } => FamilySpec::Lattice { dim, radius: r },
            Family::Tree { branching } => FamilySpec::Tree { branching, depth: r },
            Family::Path => FamilySpec::Path { len: r },
            Family::Cycle => FamilySpec::Cycle { len: 2 * r + 1 },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lattice { dim } => write!(f, "lattice:{dim}"),
            Family::Tree { branching } => write!(f, "tree:{branching}"),
            Family::Path => write!(f, "path"),
            Family::Cycle => write!(f, "cycle"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `lattice:D`, `tree:K`, `path`, `cycle`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let param = |default: Option<usize>| -> Result<usize> {
            match param {
                Some(p) => p
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad family parameter in {s:?}"))),
                None => default.ok_or_else(|| Error::InvalidParameter(format!("family {s:?} needs a parameter"))),
            }
        };
        let fam = match name.trim() {
            "lattice" => Family::Lattice { dim: param(None)? },
            "tree" => Family::Tree { branching: param(None)? },
            "path" => Family::Path,
            "cycle" => Family::Cycle,
            other => return Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        };
        match fam {
            Family::Lattice { dim: 0 } | Family::Tree { branching: 0 } => {
                Err(Error::InvalidParameter("family parameter must be positive".into()))
            }
            _ => Ok(fam),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GeneratorConfig {
    pub vertex_cap: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

/// Number of vertices `spec` would produce, without overflow.
pub fn vertex_count(spec: FamilySpec) -> u128 {
    match spec {
        FamilySpec::Lattice { dim, radius } => lattice_ball_size(dim, radius),
        FamilySpec::Tree { branching, depth } => {
            let k = branching as u128;
            let mut total: u128 = 0;
            let mut level: u128 = 1;
            for _ in 0..=depth {
                total = total.saturating_add(level);
                level = level.saturating_mul(k);
            }
            total
        }
        FamilySpec::Path { len } => len as u128 + 1,
        FamilySpec::Cycle { len } => len as u128,
    }
}

/// `|{x ∈ Z^d : |x|_1 <= r}|`.
pub fn lattice_ball_size(dim: usize, radius: usize) -> u128 {
    // table[d][s] = number of points with |x|_1 <= s in Z^d
    let mut prev: Vec<u128> = vec![1; radius + 1];
    for _ in 0..dim {
        let mut cur = vec![0u128; radius + 1];
        for s in 0..=radius {
            let mut acc = prev[s];
            for t in 1..=s {
                acc = acc.saturating_add(prev[s - t].saturating_mul(2));
            }
            cur[s] = acc;
        }
        prev = cur;
    }
    prev[radius]
}

pub fn generate<T: Scalar>(spec: FamilySpec, weight: T) -> Result<WeightedGraph<T>> {
    generate_with(spec, weight, GeneratorConfig::default())
}

pub fn generate_with<T: Scalar>(spec: FamilySpec, weight: T, config: GeneratorConfig) -> Result<WeightedGraph<T>> {
    if !(weight > T::zero()) {
        return Err(Error::InvalidParameter("edge weight must be positive".into()));
    }
    let count = vertex_count(spec);
    if count > config.vertex_cap as u128 {
        return Err(Error::VertexCap {
            requested: count,
            cap: config.vertex_cap,
        });
    }
    match spec {
        FamilySpec::Lattice { dim, radius } => {
            if dim == 0 {
                return Err(Error::InvalidParameter("lattice dimension must be positive".into()));
            }
            let points = lattice_points(dim, radius);
            let lookup: HashMap<&[i64], usize> =
                points.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
            let mut edges = Vec::with_capacity(points.len() * dim);
            let mut probe = vec![0i64; dim];
            for (i, p) in points.iter().enumerate() {
                for axis in 0..dim {
                    probe.copy_from_slice(p);
                    probe[axis] += 1;
                    if let Some(&j) = lookup.get(probe.as_slice()) {
                        edges.push((i.min(j), i.max(j), weight));
                    }
                }
            }
            edges.sort_by_key(|a| (a.0, a.1));
            WeightedGraph::from_sorted_index_edges((0..points.len() as VertexId).collect(), edges)
        }
        FamilySpec::Tree { branching, .. } => {
            if branching == 0 {
                return Err(Error::InvalidParameter("branching must be positive".into()));
            }
            let n = count as usize;
            let edges = (1..n).map(|v| ((v - 1) / branching, v, weight)).collect();
            WeightedGraph::from_sorted_index_edges((0..n as VertexId).collect(), edges)
        }
        FamilySpec::Path { len } => {
            let edges = (0..len).map(|i| (i, i + 1, weight)).collect();
            WeightedGraph::from_sorted_index_edges((0..=len as VertexId).collect(), edges)
        }
        FamilySpec::Cycle { len } => {
            if len < 3 {
                return Err(Error::InvalidParameter("cycle needs at least 3 vertices".into()));
            }
            let mut edges: Vec<_> = (0..len - 1).map(|i| (i, i + 1, weight)).collect();
            edges.push((0, len - 1, weight));
            edges.sort_by_key(|a| (a.0, a.1));
            WeightedGraph::from_sorted_index_edges((0..len as VertexId).collect(), edges)
        }
    }
}

/// Coordinates of `lattice(dim, radius)` in label order.
pub fn lattice_points(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(dim);
    for shell in 0..=radius as i64 {
        shell_points(dim, shell, &mut buf, &mut out);
    }
    out
}

fn shell_points(dim: usize, remaining: i64, buf: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if dim == 1 {
        if remaining == 0 {
            buf.push(0);
            out.push(buf.clone());
            buf.pop();
        } else {
            for x in [-remaining, remaining] {
                buf.push(x);
                out.push(buf.clone());
                buf.pop();
            }
        }
        return;
    }
    for x in -remaining..=remaining {
        buf.push(x);
        shell_points(dim - 1, remaining - x.abs(), buf, out);
        buf.pop();
    }
}

/// The `k`-ary tree of depth `D` with each level collapsed to one vertex.
///
/// Vertex `j` stands for level `j`; the edge `(j, j+1)` carries the total
/// weight `k^(j+1) * b` of the edges between the two levels. Functions
/// that are constant on levels have the same energy on both graphs, so
/// root-to-level capacities agree.
pub fn tree_radial_quotient<T: Scalar>(branching: usize, depth: usize, weight: T) -> Result<WeightedGraph<T>> {
    if branching == 0 || !(weight > T::zero()) {
        return Err(Error::InvalidParameter("branching and weight must be positive".into()));
    }
    let k = T::from_usize_lossy(branching);
    let mut level_weight = weight;
    let edges = (0..depth)
        .map(|j| {
            level_weight *= k;
            (j, j + 1, level_weight)
        })
        .collect();
    WeightedGraph::from_sorted_index_edges((0..=depth as VertexId).collect(), edges)
}

/// Depth of a vertex in the breadth-first labeling of a `k`-ary tree.
pub fn tree_depth(branching: usize, v: VertexId) -> usize {
    let mut v = v as u128;
    let k = branching as u128;
    let mut d = 0;
    while v > 0 {
        v = (v - 1) / k;
        d += 1;
    }
    d
}
