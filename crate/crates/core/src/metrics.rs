//! Pseudometrics on finite graphs and truncations.
//!
//! A [`MetricObject`] is either an explicit dense matrix (at most
//! [`DENSE_METRIC_CAP`] vertices) or the path pseudometric `d_w` of an
//! edge function, evaluated on demand by Dijkstra's algorithm.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{energy_value, local_energy};
use crate::error::{Error, Result};
use crate::graph::{EdgeFunction, Potential, VertexId, WeightedGraph};
use crate::scalar::{csum, CompensatedSum, Scalar};

pub const DENSE_METRIC_CAP: usize = 4096;
/// Up to this size the triangle inequality is checked on every triple.
pub const EXHAUSTIVE_TRIANGLE_CAP: usize = 512;
pub const SAMPLED_TRIPLES: usize = 100_000;

/// Symmetric matrix of distances over a labeled vertex set.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMetric<T> {
    ids: Vec<VertexId>,
    data: Vec<T>,
}

impl<T: Scalar> DenseMetric<T> {
    /// Wraps a row-major `n × n` matrix without validation.
    pub fn from_matrix(ids: Vec<VertexId>, data: Vec<T>) -> Result<Self> {
        let n = ids.len();
        if n > DENSE_METRIC_CAP {
            return Err(Error::MetricTooLarge { n, cap: DENSE_METRIC_CAP });
        }
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!("expected {} entries, got {}", n * n, data.len())));
        }
        Ok(Self { ids, data })
    }

    pub fn from_fn(ids: Vec<VertexId>, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let n = ids.len();
        if n > DENSE_METRIC_CAP {
            return Err(Error::MetricTooLarge { n, cap: DENSE_METRIC_CAP });
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Ok(Self { ids, data })
    }

    /// Euclidean distances between points of the plane.
    pub fn euclidean(ids: Vec<VertexId>, points: &[[T; 2]]) -> Result<Self> {
        Self::from_fn(ids, |i, j| {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            dx.hypot(dy)
        })
    }

    /// Builds and rejects anything that fails [`is_pseudometric`]; with
    /// `metric` set, distinct points must also be at positive distance.
    pub fn checked(ids: Vec<VertexId>, data: Vec<T>, metric: bool) -> Result<Self> {
        let m = Self::from_matrix(ids, data)?;
        let check = is_pseudometric(&m);
        if let Some(v) = check.violation {
            return Err(Error::InvalidParameter(format!("not a pseudometric: {v:?}")));
        }
        if metric && !m.is_metric() {
            return Err(Error::InvalidParameter("distinct points at distance zero".into()));
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let n = self.ids.len();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn is_metric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) > T::zero()))
    }
}

/// A pseudometric on the vertices of a finite graph.
#[derive(Clone, Debug)]
pub enum MetricObject<'g, T> {
    Explicit(DenseMetric<T>),
    Path {
        graph: &'g WeightedGraph<T>,
        w: EdgeFunction<T>,
    },
}

impl<'g, T: Scalar> MetricObject<'g, T> {
    pub fn len(&self) -> usize {
        match self {
            MetricObject::Explicit(m) => m.len(),
            MetricObject::Path { graph, .. } => graph.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Distances from `i` to every vertex.
    pub fn row(&self, i: usize) -> Vec<T> {
        match self {
            MetricObject::Explicit(m) => m.row(i).to_vec(),
            MetricObject::Path { graph, w } => single_source(graph, w, i),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        match self {
            MetricObject::Explicit(m) => m.get(i, j),
            MetricObject::Path { .. } => self.row(i)[j],
        }
    }

    /// Distance from every vertex to the set `targets`.
    pub fn distance_to_set(&self, targets: &[usize]) -> Vec<T> {
        match self {
            MetricObject::Explicit(m) => (0..m.len())
                .map(|x| {
                    targets
                        .iter()
                        .map(|&u| m.get(x, u))
                        .fold(T::infinity(), T::min)
                })
                .collect(),
            MetricObject::Path { graph, w } => multi_source(graph, w, targets),
        }
    }

    /// Values of the metric on the edges of `graph`, one per unordered edge.
    pub fn edge_values(&self, graph: &WeightedGraph<T>) -> Vec<T> {
        match self {
            MetricObject::Explicit(m) => graph.edges().iter().map(|&(i, j, _)| m.get(i, j)).collect(),
            MetricObject::Path { graph: g, w } => {
                let mut out = vec![T::zero(); graph.edge_count()];
                for i in 0..graph.len() {
                    let row = single_source(g, w, i);
                    for (j, _, e) in graph.neighbor_edges(i) {
                        if i < j {
                            out[e] = row[j];
                        }
                    }
                }
                out
            }
        }
    }

    /// Materializes the metric as a dense matrix.
    pub fn to_dense(&self, ids: Vec<VertexId>) -> Result<DenseMetric<T>> {
        match self {
            MetricObject::Explicit(m) => Ok(m.clone()),
            MetricObject::Path { graph, w } => all_pairs(graph, w).map(|mut d| {
                d.ids = ids;
                d
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation<T> {
    NonzeroDiagonal { x: VertexId, value: T },
    Negative { x: VertexId, y: VertexId, value: T },
    Asymmetric { x: VertexId, y: VertexId },
    Triangle { x: VertexId, y: VertexId, z: VertexId },
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudometricCheck<T> {
    pub ok: bool,
    pub exhaustive: bool,
    pub triples_checked: u64,
    pub violation: Option<MetricViolation<T>>,
}

/// Zero diagonal, symmetry, nonnegativity and the triangle inequality.
///
/// Triples are checked exhaustively up to [`EXHAUSTIVE_TRIANGLE_CAP`]
/// points and sampled ([`SAMPLED_TRIPLES`], fixed seed) above. A relative
/// slack of a few ulps absorbs rounding in computed distances.
pub fn is_pseudometric<T: Scalar>(m: &DenseMetric<T>) -> PseudometricCheck<T> {
    let n = m.len();
    let id = |i: usize| m.ids[i];
    let fail = |v, exhaustive, triples_checked| PseudometricCheck {
        ok: false,
        exhaustive,
        triples_checked,
        violation: Some(v),
    };
    for x in 0..n {
        if m.get(x, x) != T::zero() {
            return fail(MetricViolation::NonzeroDiagonal { x: id(x), value: m.get(x, x) }, true, 0);
        }
        for y in 0..n {
            let v = m.get(x, y);
            if v < T::zero() || v.is_nan() {
                return fail(MetricViolation::Negative { x: id(x), y: id(y), value: v }, true, 0);
            }
            if v != m.get(y, x) {
                return fail(MetricViolation::Asymmetric { x: id(x), y: id(y) }, true, 0);
            }
        }
    }
    let slack = T::epsilon() * T::lit(8.0);
    let violated = |x: usize, y: usize, z: usize| {
        let lhs = m.get(x, z);
        let rhs = m.get(x, y) + m.get(y, z);
        lhs > rhs + slack * (lhs + rhs)
    };
    if n <= EXHAUSTIVE_TRIANGLE_CAP {
        let mut count = 0u64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    count += 1;
                    if violated(x, y, z) {
                        return fail(MetricViolation::Triangle { x: id(x), y: id(y), z: id(z) }, true, count);
                    }
                }
            }
        }
        return PseudometricCheck { ok: true, exhaustive: true, triples_checked: count, violation: None };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_7415);
    for k in 0..SAMPLED_TRIPLES {
        let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        if violated(x, y, z) {
            return fail(MetricViolation::Triangle { x: id(x), y: id(y), z: id(z) }, false, k as u64 + 1);
        }
    }
    PseudometricCheck { ok: true, exhaustive: false, triples_checked: SAMPLED_TRIPLES as u64, violation: None }
}

/// Per-vertex loads of a pseudometric against a measure.
#[derive(Clone, Debug, Serialize)]
pub struct IntrinsicReport<T> {
    /// `ℓ(x) = ½ Σ_y b(x,y) σ(x,y)²`; also the smallest intrinsic measure `m_σ`.
    pub load: Vec<T>,
    /// `m(x) − ℓ(x)`
    pub slack: Vec<T>,
    pub intrinsic: bool,
    /// `Σ_x ℓ(x) = ½ Σ b σ²` over the truncation.
    pub total_load: T,
}

/// `m` is any nonnegative vertex weight, e.g. a load vector that may vanish.
pub fn is_intrinsic<T: Scalar>(graph: &WeightedGraph<T>, sigma: &MetricObject<'_, T>, m: &[T]) -> IntrinsicReport<T> {
    let load = edge_load(graph, &sigma.edge_values(graph));
    intrinsic_report(load, m)
}

pub(crate) fn intrinsic_report<T: Scalar>(load: Vec<T>, m: &[T]) -> IntrinsicReport<T> {
    let slack: Vec<T> = m.iter().zip(&load).map(|(&mx, &l)| mx - l).collect();
    IntrinsicReport {
        intrinsic: slack.iter().all(|s| *s >= T::zero()),
        total_load: csum(load.iter().copied()),
        load,
        slack,
    }
}

/// `½ Σ_y b(x,y) w(x,y)²` for an edge-indexed function.
pub fn edge_load<T: Scalar>(graph: &WeightedGraph<T>, w: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    (0..graph.len())
        .map(|x| {
            let mut acc = CompensatedSum::new();
            for (_, b, e) in graph.neighbor_edges(x) {
                acc.add(b * w[e] * w[e]);
            }
            half * acc.value()
        })
        .collect()
}

/// The pseudometric `σ_f(x,y) = |f(x) − f(y)|` and the vertex map `m_f`.
pub fn sigma_from_potential<'g, T: Scalar>(
    graph: &'g WeightedGraph<T>,
    f: &Potential<T>,
) -> Result<(MetricObject<'g, T>, Vec<T>)> {
    let v = f.values();
    let dense = DenseMetric::from_fn(graph.ids().to_vec(), |i, j| (v[i] - v[j]).abs())?;
    Ok((MetricObject::Explicit(dense), local_energy(graph, v)))
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry<T> {
    dist: T,
    vertex: usize,
}

impl<T: Scalar> Eq for HeapEntry<T> {}

impl<T: Scalar> Ord for HeapEntry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: Scalar> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source` for nonnegative edge lengths `w`.
pub fn single_source<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>, source: usize) -> Vec<T> {
    multi_source(graph, w, &[source])
}

/// Dijkstra from a set of sources (distance to the set).
pub fn multi_source<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>, sources: &[usize]) -> Vec<T> {
    let mut dist = vec![T::infinity(); graph.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = T::zero();
        heap.push(HeapEntry { dist: T::zero(), vertex: s });
    }
    while let Some(HeapEntry { dist: d, vertex: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for (v, _, e) in graph.neighbor_edges(u) {
            let nd = d + w.on_edge(e);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, vertex: v });
            }
        }
    }
    dist
}

/// Path pseudometric `d_w` from one source, by identifier.
pub fn path_metric<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>, source: VertexId) -> Result<Vec<T>> {
    let s = graph.require(source)?;
    let d = single_source(graph, w, s);
    if let Some(i) = d.iter().position(|v| !v.is_finite()) {
        return Err(Error::Invariant(format!("vertex {} unreachable on a connected graph", graph.id(i))));
    }
    Ok(d)
}

/// `d_w` on all pairs, by repeated single-source runs.
pub fn all_pairs<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>) -> Result<DenseMetric<T>> {
    let n = graph.len();
    if n > DENSE_METRIC_CAP {
        return Err(Error::MetricTooLarge { n, cap: DENSE_METRIC_CAP });
    }
    let mut data = Vec::with_capacity(n * n);
    for s in 0..n {
        data.extend(single_source(graph, w, s));
    }
    // The two directions may sum the same path in different orders.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = data[i * n + j].min(data[j * n + i]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    DenseMetric::from_matrix(graph.ids().to_vec(), data)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdempotenceReport<T> {
    pub holds: bool,
    pub max_abs_diff: T,
}

/// Compares `d_σ` with `σ = d_w` on all pairs.
pub fn idempotence_check<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>) -> Result<IdempotenceReport<T>> {
    let d = all_pairs(graph, w)?;
    let restricted = EdgeFunction::new(graph, graph.edges().iter().map(|&(i, j, _)| d.get(i, j)).collect())?;
    let dd = all_pairs(graph, &restricted)?;
    let mut max_abs_diff = T::zero();
    let mut holds = true;
    let slack = T::epsilon() * T::lit(16.0);
    for (a, b) in d.data.iter().zip(&dd.data) {
        let diff = (*a - *b).abs();
        max_abs_diff = max_abs_diff.max(diff);
        if diff > slack * a.abs().max(b.abs()) {
            holds = false;
        }
    }
    Ok(IdempotenceReport { holds, max_abs_diff })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscTopCertificate<T> {
    /// `f(x_n) = (2^n deg(x_n))^{-1/2}` in enumeration order, `n` from 1.
    pub weights: Vec<T>,
    /// `2 Σ_x deg(x) f(x)²`, bounded by 2.
    pub load_bound: T,
    /// `Σ_{x,y} b(x,y) σ(x,y)²`
    pub pair_sum: T,
    pub all_positive: bool,
}

/// The ultrametric `σ(x,y) = max{f(x), f(y)}` with geometric weights.
pub fn disc_top_metric<T: Scalar>(
    graph: &WeightedGraph<T>,
    enumeration: &[VertexId],
) -> Result<(DenseMetric<T>, DiscTopCertificate<T>)> {
    let n = graph.len();
    let order = graph.indices_of(enumeration)?;
    if order.len() != n || enumeration.len() != n {
        return Err(Error::InvalidParameter("enumeration must list every vertex exactly once".into()));
    }
    let mut f = vec![T::zero(); n];
    for (k, &id) in enumeration.iter().enumerate() {
        let x = graph.require(id)?;
        let deg = graph.degree(x);
        let deg = if deg > T::zero() { deg } else { T::one() };
        let exponent = T::from_usize_lossy(k + 1) * T::lit(-0.5);
        f[x] = exponent.exp2() / deg.sqrt();
    }
    let sigma = DenseMetric::from_fn(graph.ids().to_vec(), |i, j| if i == j { T::zero() } else { f[i].max(f[j]) })?;
    let two = T::lit(2.0);
    let load_bound = two * csum((0..n).map(|x| graph.degree(x) * f[x] * f[x]));
    let pair_sum = two * csum(graph.edges().iter().map(|&(i, j, b)| {
        let s = sigma.get(i, j);
        b * s * s
    }));
    let all_positive = f.iter().all(|v| *v > T::zero());
    let weights = enumeration.iter().map(|&id| f[graph.require(id).unwrap()]).collect();
    Ok((sigma, DiscTopCertificate { weights, load_bound, pair_sum, all_positive }))
}

/// Per-vertex perturbation budgets `s_x` with `Σ s_x sqrt(deg x) < sqrt(ε_Q)`
/// and `s_x < ε_sup / 2`.
pub fn perturbation_budgets<T: Scalar>(graph: &WeightedGraph<T>, eps_sup: T, eps_q: T) -> Vec<T> {
    let n = T::from_usize_lossy(graph.len().max(1));
    let half = T::lit(0.5);
    (0..graph.len())
        .map(|x| {
            let deg = graph.degree(x).max(T::one());
            (half * eps_q.sqrt() / (n * deg.sqrt())).min(half * eps_sup)
        })
        .collect()
}

/// An injective potential within `ε` of `f` in sup norm and energy.
pub fn perturb_injective<T: Scalar>(graph: &WeightedGraph<T>, f: &Potential<T>, eps: T, seed: u64) -> Result<Potential<T>> {
    perturb_with_budgets(graph, f, eps, eps, seed)
}

/// Injective `f + t` with `sup |t| < ε_sup` and `Q(t) < ε_Q`.
pub fn perturb_with_budgets<T: Scalar>(
    graph: &WeightedGraph<T>,
    f: &Potential<T>,
    eps_sup: T,
    eps_q: T,
    seed: u64,
) -> Result<Potential<T>> {
    if !(eps_sup > T::zero() && eps_q > T::zero()) {
        return Err(Error::InvalidParameter("perturbation size must be positive".into()));
    }
    let budgets = perturbation_budgets(graph, eps_sup, eps_q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = T::lit(0.999);
    for _attempt in 0..64 {
        let values: Vec<T> = f
            .values()
            .iter()
            .zip(&budgets)
            .map(|(&v, &s)| {
                let u = T::lit(rng.gen_range(-1.0..1.0));
                v + u * s * shrink
            })
            .collect();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let diff: Vec<T> = values.iter().zip(f.values()).map(|(&a, &b)| a - b).collect();
        let sup = diff.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        if sup < eps_sup && energy_value(graph, &diff) < eps_q {
            return Ok(Potential::new(values));
        }
    }
    Err(Error::Invariant("could not find an injective perturbation at this precision; increase eps".into()))
}

/// `σ_U(x) = min_{u ∈ U} σ(x, u)`.
pub fn dist_to_set<T: Scalar>(sigma: &MetricObject<'_, T>, targets: &[usize]) -> Result<Potential<T>> {
    if targets.is_empty() {
        return Err(Error::EmptySet("distance target"));
    }
    Ok(Potential::new(sigma.distance_to_set(targets)))
}

#[derive(Clone, Debug, Serialize)]
pub struct DistBoundReport<T> {
    pub energy: T,
    pub mass_total: T,
    pub mass_outside: T,
    /// `min{m(X), 2 m(X∖U)}`
    pub bound: T,
    pub intrinsic: bool,
    pub holds: bool,
}

/// Evaluates `Q(σ_U)` against `min{m(X), 2 m(X∖U)}`.
pub fn dist_bound_check<T: Scalar>(
    graph: &WeightedGraph<T>,
    sigma: &MetricObject<'_, T>,
    targets: &[usize],
    m: &[T],
) -> Result<DistBoundReport<T>> {
    let su = dist_to_set(sigma, targets)?;
    let energy = energy_value(graph, su.values());
    let mut inside = vec![false; graph.len()];
    for &u in targets {
        inside[u] = true;
    }
    let mass_total = csum(m.iter().copied());
    let mass_outside = csum((0..m.len()).filter(|&x| !inside[x]).map(|x| m[x]));
    let bound = mass_total.min(T::lit(2.0) * mass_outside);
    let intrinsic = is_intrinsic(graph, sigma, m).intrinsic;
    let slack = T::epsilon() * T::lit(64.0) * bound.max(T::one());
    Ok(DistBoundReport {
        energy,
        mass_total,
        mass_outside,
        bound,
        intrinsic,
        holds: energy <= bound + slack,
    })
}

/// `B_r(x) = {y : σ(x,y) <= r}` as indices.
pub fn ball<T: Scalar>(sigma: &MetricObject<'_, T>, x: usize, r: T) -> Vec<usize> {
    sigma
        .row(x)
        .iter()
        .enumerate()
        .filter(|(_, d)| **d <= r)
        .map(|(i, _)| i)
        .collect()
}

pub fn diameter<T: Scalar>(sigma: &MetricObject<'_, T>) -> T {
    (0..sigma.len())
        .map(|i| sigma.row(i).into_iter().fold(T::zero(), T::max))
        .fold(T::zero(), T::max)
}

/// Size of a greedy `ε`-net: points are scanned in index order and kept
/// when no kept point lies within distance `ε`.
pub fn greedy_net_size<T: Scalar>(sigma: &MetricObject<'_, T>, eps: T) -> usize {
    let mut centers: Vec<usize> = Vec::new();
    for x in 0..sigma.len() {
        let row = sigma.row(x);
        if !centers.iter().any(|&c| row[c] <= eps) {
            centers.push(x);
        }
    }
    centers.len()
}

/// Whether `|f(x) − f(y)| <= L σ(x,y)` on all pairs (with rounding slack).
pub fn is_lipschitz<T: Scalar>(sigma: &MetricObject<'_, T>, f: &[T], lip: T) -> bool {
    let slack = T::epsilon() * T::lit(16.0);
    (0..sigma.len()).all(|x| {
        let row = sigma.row(x);
        (0..row.len()).all(|y| {
            let lhs = (f[x] - f[y]).abs();
            let rhs = lip * row[y];
            lhs <= rhs + slack * (lhs + rhs + f[x].abs() + f[y].abs())
        })
    })
}
