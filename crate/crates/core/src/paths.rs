//! Paths, path lengths and null-set witnesses.
//!
//! Checks on path families are always evidence on finite samples: a
//! family is null when *every* path in it has infinite length, which no
//! finite computation can establish.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{Float, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::{level_capacity, schedule_exhaustion, Classification, Verdict};
use crate::energy::energy_value;
use crate::error::{Error, Result};
use crate::generate::lattice_points;
use crate::graph::{EdgeFunction, Potential, VertexId, WeightedGraph};
use crate::linalg::SolverConfig;
use crate::metrics::{perturb_with_budgets, single_source};
use crate::scalar::{csum, Scalar};

/// A finite path with consecutive vertices adjacent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathSample {
    pub vertices: Vec<VertexId>,
    #[serde(skip)]
    edges: Vec<usize>,
}

impl PathSample {
    pub fn new<T: Scalar>(graph: &WeightedGraph<T>, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptySet("path"));
        }
        let idx = vertices.iter().map(|&v| graph.require(v)).collect::<Result<Vec<_>>>()?;
        let edges = idx
            .windows(2)
            .zip(vertices.windows(2))
            .map(|(w, ids)| graph.edge_index(w[0], w[1]).ok_or(Error::NotAdjacent(ids[0], ids[1])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { vertices, edges })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_indices(&self) -> &[usize] {
        &self.edges
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut edges = self.edges.clone();
        edges.reverse();
        Self { vertices, edges }
    }

    /// `self` followed by `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.vertices.last() != other.vertices.first() {
            return Err(Error::InvalidParameter("paths do not meet".into()));
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Self { vertices, edges })
    }
}

/// `L_w(γ) = Σ w(x_i, x_{i+1})`.
pub fn path_length<T: Scalar>(w: &EdgeFunction<T>, path: &PathSample) -> T {
    csum(path.edges.iter().map(|&e| w.on_edge(e)))
}

/// A strictly positive edge weight with finite `Σ_{x,y} b w²`.
#[derive(Clone, Debug, Serialize)]
pub struct NullWitness<T> {
    #[serde(skip)]
    pub w: EdgeFunction<T>,
    /// `Σ_{x,y} b(x,y) w(x,y)²` over ordered pairs.
    pub total: T,
    pub provenance: String,
}

/// `Σ_{x,y} b w²` over ordered pairs, i.e. twice the edge sum.
pub fn witness_total<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>) -> T {
    let two = T::lit(2.0);
    two * csum(graph.edges().iter().zip(w.values()).map(|(&(_, _, b), &v)| b * v * v))
}

/// Default perturbation size `1e-9 · max(1, Q(f))`.
pub fn default_witness_eps<T: Scalar>(q: T) -> T {
    T::lit(1e-9) * q.max(T::one())
}

/// `w = |∇f_ε|` for an injective perturbation `f_ε` of `f`, with
/// `Σ b w² <= 2 Q(f) + ε`.
pub fn null_witness_from_potential<T: Scalar>(
    graph: &WeightedGraph<T>,
    f: &Potential<T>,
    eps: Option<T>,
    seed: u64,
) -> Result<NullWitness<T>> {
    let q = energy_value(graph, f.values());
    if !q.is_finite() {
        return Err(Error::InvalidParameter("potential has infinite energy".into()));
    }
    let eps = eps.unwrap_or_else(|| default_witness_eps(q));
    // 2 Q(f + t) <= 2 (√Q(f) + √Q(t))² <= 2 Q(f) + ε once Q(t) <= ε² / (64 max(1, Q(f)))
    let inner = eps * eps / (T::lit(64.0) * q.max(T::one()));
    let inner = inner.min(eps);
    let fe = perturb_with_budgets(graph, f, eps, inner, seed)?;
    let w = EdgeFunction::gradient_magnitude(graph, &fe);
    if w.values().iter().any(|v| !(*v > T::zero())) {
        return Err(Error::Invariant("perturbed gradient vanishes on an edge".into()));
    }
    let total = witness_total(graph, &w);
    Ok(NullWitness {
        w,
        total,
        provenance: format!("|grad f| of an injective perturbation (eps = {eps})"),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NullReport<T> {
    pub lengths: Vec<T>,
    pub reaches_threshold: Vec<bool>,
    pub all_reach: bool,
    pub note: &'static str,
}

pub fn verify_null_witness<T: Scalar>(witness: &NullWitness<T>, paths: &[PathSample], threshold: T) -> NullReport<T> {
    let lengths: Vec<T> = paths.iter().map(|p| path_length(&witness.w, p)).collect();
    let reaches_threshold: Vec<bool> = lengths.iter().map(|l| *l >= threshold).collect();
    NullReport {
        all_reach: reaches_threshold.iter().all(|b| *b),
        lengths,
        reaches_threshold,
        note: "lengths on finite samples are evidence, not a proof of nullity",
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct YamasakiWitness<T> {
    pub witness: NullWitness<T>,
    /// `Q(f)` of the certificate `f = Σ_n (1 − e_n)`.
    pub certificate_energy: T,
    /// `(Σ_n sqrt(cap_n))²`, an a priori bound on `Q(f)`.
    pub energy_bound: T,
    /// `(ρ, |B_ρ|)` for `d_w`-balls around the seed.
    pub ball_sizes: Vec<(f64, usize)>,
    #[serde(skip)]
    pub certificate: Potential<T>,
}

/// Edge weight making escaping paths long, built from a recurrent verdict.
///
/// With `e_n` the equilibrium potential of level `n` (1 at the seed, 0 on
/// the grounded sphere, extended by 0), `f = Σ_n (1 − e_n)` grows by one
/// across every level and has `Q(f) <= (Σ_n sqrt(cap_n))²`; the witness
/// is `|∇f|` made strictly positive, with perturbation budget `eps`
/// (default as in [`null_witness_from_potential`]).
pub fn yamasaki_witness<T: Scalar>(
    graph: &WeightedGraph<T>,
    seed: VertexId,
    verdict: &Verdict<T>,
    config: &SolverConfig,
    eps: Option<T>,
    rng_seed: u64,
) -> Result<YamasakiWitness<T>> {
    if verdict.classification != Classification::Recurrent {
        return Err(Error::NotRecurrent(verdict.classification.to_string()));
    }
    let radii: Vec<usize> = verdict.levels.iter().map(|l| l.n).collect();
    let ex = schedule_exhaustion(graph, seed, &radii)?;
    let mut f = vec![T::zero(); graph.len()];
    let mut root_sum = Vec::new();
    for level in &ex.levels {
        let (sub, cap) = level_capacity(graph, seed, &level.interior, config)?
            .ok_or_else(|| Error::InvalidParameter("verdict level exhausts this graph".into()))?;
        root_sum.push(cap.value.sqrt());
        let mut e = vec![T::zero(); graph.len()];
        for (k, &id) in sub.ids().iter().enumerate() {
            e[graph.require(id)?] = cap.optimizer.get(k);
        }
        for (fx, ex) in f.iter_mut().zip(e) {
            *fx += T::one() - ex;
        }
    }
    let s = csum(root_sum);
    let certificate = Potential::new(f);
    let certificate_energy = energy_value(graph, certificate.values());
    let witness = null_witness_from_potential(graph, &certificate, eps, rng_seed)?;
    let dist = single_source(graph, &witness.w, graph.require(seed)?);
    let far = dist.iter().fold(T::zero(), |m, d| m.max(*d)).as_f64();
    let mut ball_sizes = Vec::new();
    let mut rho = 1.0;
    loop {
        ball_sizes.push((rho, dist.iter().filter(|d| d.as_f64() <= rho).count()));
        if rho >= far {
            break;
        }
        rho *= 2.0;
    }
    Ok(YamasakiWitness {
        witness,
        certificate_energy,
        energy_bound: s * s,
        ball_sizes,
        certificate,
    })
}

/// Parent pointers and depths of a tree rooted at `root`.
#[derive(Clone, Debug)]
pub struct Ancestry {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// Vertices in breadth-first order from the root.
    pub order: Vec<usize>,
}

impl Ancestry {
    pub fn new<T: Scalar>(graph: &WeightedGraph<T>, root: VertexId) -> Result<Self> {
        if graph.edge_count() + 1 != graph.len() {
            return Err(Error::NotATree {
                edges: graph.edge_count(),
                vertices: graph.len(),
            });
        }
        let r = graph.require(root)?;
        let mut parent = vec![None; graph.len()];
        let mut depth = vec![usize::MAX; graph.len()];
        let mut order = Vec::with_capacity(graph.len());
        let mut queue = VecDeque::from([r]);
        depth[r] = 0;
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for (y, _) in graph.neighbors(x) {
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some(x);
                    queue.push_back(y);
                }
            }
        }
        Ok(Self { root: r, parent, depth, order })
    }

    /// Greatest common ancestor of two vertices (indices).
    pub fn gca(&self, mut x: usize, mut y: usize) -> usize {
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap();
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap();
        }
        while x != y {
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
        }
        x
    }
}

/// Exact dyadic number `mantissa · 2^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub mantissa: BigInt,
    pub exponent: i32,
}

fn decode<T: Scalar>(x: T) -> (BigInt, i32) {
    let (m, e, sign) = Float::integer_decode(x);
    let v = BigInt::from(m);
    (if sign < 0 { -v } else { v }, e as i32)
}

/// `2^k` for any `k` representable after scaling, in steps that avoid
/// intermediate overflow.
fn scale_pow2(mut v: f64, mut k: i32) -> f64 {
    while k > 0 {
        let s = k.min(1000);
        v *= 2f64.powi(s);
        k -= s;
    }
    while k < 0 {
        let s = k.max(-1000);
        v *= 2f64.powi(s);
        k -= s;
    }
    v
}

impl Dyadic {
    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits() as i32;
        let shift = (bits - 64).max(0);
        let top = (&self.mantissa >> shift as usize).to_f64().unwrap_or(f64::NAN);
        scale_pow2(top, self.exponent + shift)
    }
}

/// `f(x) = L_w(γ_x)` along the unique root path, with exact increments.
#[derive(Clone, Debug)]
pub struct TreePotential<T> {
    /// Values rounded to the scalar type.
    pub values: Potential<T>,
    /// Exact root-path lengths as integer multiples of `2^exponent`.
    pub exact: Vec<BigInt>,
    pub exponent: i32,
    pub ancestry: Ancestry,
}

impl<T: Scalar> TreePotential<T> {
    /// `|f(x) − f(y)|` computed exactly and rounded once.
    pub fn exact_increment(&self, x: usize, y: usize) -> T {
        let d = Dyadic {
            mantissa: (&self.exact[x] - &self.exact[y]).abs(),
            exponent: self.exponent,
        };
        T::lit(d.to_f64())
    }
}

/// Root-path potential of an edge weight on a tree.
pub fn tree_boundary_potential<T: Scalar>(
    graph: &WeightedGraph<T>,
    w: &EdgeFunction<T>,
    root: VertexId,
) -> Result<TreePotential<T>> {
    let ancestry = Ancestry::new(graph, root)?;
    let decoded: Vec<(BigInt, i32)> = w.values().iter().map(|&v| decode(v)).collect();
    let exponent = decoded
        .iter()
        .filter(|(m, _)| !m.is_zero())
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let scaled: Vec<BigInt> = decoded
        .into_iter()
        .map(|(m, e)| m << (e - exponent) as usize)
        .collect();
    let mut exact = vec![BigInt::zero(); graph.len()];
    for &x in &ancestry.order {
        if let Some(p) = ancestry.parent[x] {
            let e = graph.edge_index(x, p).expect("tree edge");
            exact[x] = &exact[p] + &scaled[e];
        }
    }
    for (e, &(i, j, _)) in graph.edges().iter().enumerate() {
        if (&exact[i] - &exact[j]).abs() != scaled[e] {
            return Err(Error::Invariant(format!("edge increment mismatch at edge {e}")));
        }
    }
    let values = exact
        .iter()
        .map(|m| T::lit(Dyadic { mantissa: m.clone(), exponent }.to_f64()))
        .collect();
    Ok(TreePotential {
        values: Potential::new(values),
        exact,
        exponent,
        ancestry,
    })
}

/// Straight rays from the origin of `lattice(dim, radius)`: one per
/// signed axis, and in two dimensions also the four diagonal staircases.
pub fn lattice_rays<T: Scalar>(graph: &WeightedGraph<T>, dim: usize, radius: usize) -> Result<Vec<PathSample>> {
    let points = lattice_points(dim, radius);
    let lookup: HashMap<Vec<i64>, VertexId> = points
        .into_iter()
        .enumerate()
        .map(|(i, p)| (p, i as VertexId))
        .collect();
    let mut steps: Vec<Vec<Vec<i64>>> = Vec::new();
    for axis in 0..dim {
        for sign in [1, -1] {
            let mut s = vec![0; dim];
            s[axis] = sign;
            steps.push(vec![s]);
        }
    }
    if dim == 2 {
        for (sx, sy) in [(1, 1), (-1, 1), (-1, -1), (1, -1)] {
            steps.push(vec![vec![sx, 0], vec![0, sy]]);
        }
    }
    steps
        .into_iter()
        .map(|pattern| {
            let mut p = vec![0i64; dim];
            let mut ids = vec![lookup[&p]];
            for k in 0..radius {
                for (a, d) in p.iter_mut().zip(&pattern[k % pattern.len()]) {
                    *a += d;
                }
                ids.push(lookup[&p]);
            }
            PathSample::new(graph, ids)
        })
        .collect()
}

/// Random walks of `steps` steps that avoid their own past when possible.
pub fn random_paths<T: Scalar>(
    graph: &WeightedGraph<T>,
    start: VertexId,
    steps: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<PathSample>> {
    let s = graph.require(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut seen = vec![false; graph.len()];
            let mut x = s;
            seen[x] = true;
            let mut ids = vec![graph.id(x)];
            for _ in 0..steps {
                let fresh: Vec<usize> = graph.neighbors(x).map(|(y, _)| y).filter(|&y| !seen[y]).collect();
                let pool: Vec<usize> = if fresh.is_empty() {
                    graph.neighbors(x).map(|(y, _)| y).collect()
                } else {
                    fresh
                };
                if pool.is_empty() {
                    break;
                }
                x = pool[rng.gen_range(0..pool.len())];
                seen[x] = true;
                ids.push(graph.id(x));
            }
            PathSample::new(graph, ids)
        })
        .collect()
}
