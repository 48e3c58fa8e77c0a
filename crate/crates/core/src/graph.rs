//! Weighted graphs, measures, potentials and edge functions.
//!
//! A [`WeightedGraph`] is immutable once built. Vertices carry opaque
//! non-negative identifiers; internally every routine works with dense
//! indices `0..n` in ascending identifier order, and all per-vertex data
//! ([`Measure`], [`Potential`]) is stored aligned with that order.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::scalar::{csum, Scalar};

/// Opaque vertex identifier.
pub type VertexId = u64;

/// Set of vertex identifiers with deterministic iteration order.
pub type VertexSet = BTreeSet<VertexId>;

/// Symmetric, diagonal-free, connected weighted graph stored in CSR form.
#[derive(Clone, Debug)]
pub struct WeightedGraph<T> {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
    slot_edge: Vec<usize>,
    edges: Vec<(usize, usize, T)>,
    degree: Vec<T>,
    max_degree: T,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds a graph from an explicit vertex list and an edge list.
    ///
    /// Edges may be listed in either or both orientations; repeated
    /// entries must carry identical weights. Vertices mentioned only by
    /// edges are added implicitly.
    pub fn from_edges<V, E>(vertices: V, edges: E) -> Result<Self>
    where
        V: IntoIterator<Item = VertexId>,
        E: IntoIterator<Item = (VertexId, VertexId, T)>,
    {
        let mut ids: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut canonical: HashMap<(VertexId, VertexId), T> = HashMap::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { u, v, w: w.as_f64() });
            }
            ids.insert(u);
            ids.insert(v);
            let key = (u.min(v), u.max(v));
            match canonical.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::Asymmetric {
                        u: key.0,
                        v: key.1,
                        a: prev.as_f64(),
                        b: w.as_f64(),
                    })
                }
                Some(_) => {}
                None => {
                    canonical.insert(key, w);
                }
            }
        }
        if ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let ids: Vec<VertexId> = ids.into_iter().collect();
        let index: HashMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut edges: Vec<(usize, usize, T)> = canonical
            .into_iter()
            .map(|((u, v), w)| (index[&u], index[&v], w))
            .collect();
        edges.sort_by_key(|a| (a.0, a.1));
        Self::assemble(ids, index, edges)
    }

    /// Builds from dense indices; `edges` must be sorted, with `i < j`
    /// and no duplicates.
    pub(crate) fn from_sorted_index_edges(
        ids: Vec<VertexId>,
        edges: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        Self::assemble(ids, index, edges)
    }

    fn assemble(
        ids: Vec<VertexId>,
        index: HashMap<VertexId, usize>,
        edges: Vec<(usize, usize, T)>,
    ) -> Result<Self> {
        let n = ids.len();
        let mut counts = vec![0usize; n];
        for &(i, j, _) in &edges {
            counts[i] += 1;
            counts[j] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let total = *offsets.last().unwrap();
        let mut targets = vec![0usize; total];
        let mut weights = vec![T::zero(); total];
        let mut slot_edge = vec![0usize; total];
        let mut cursor = offsets[..n].to_vec();
        for (e, &(i, j, w)) in edges.iter().enumerate() {
            for (a, b) in [(i, j), (j, i)] {
                let s = cursor[a];
                targets[s] = b;
                weights[s] = w;
                slot_edge[s] = e;
                cursor[a] += 1;
            }
        }
        // rows sorted by target index
        for v in 0..n {
            let range = offsets[v]..offsets[v + 1];
            let mut row: Vec<(usize, T, usize)> = range
                .clone()
                .map(|s| (targets[s], weights[s], slot_edge[s]))
                .collect();
            row.sort_by_key(|r| r.0);
            for (k, s) in range.enumerate() {
                targets[s] = row[k].0;
                weights[s] = row[k].1;
                slot_edge[s] = row[k].2;
            }
        }
        let degree: Vec<T> = (0..n)
            .map(|v| csum(weights[offsets[v]..offsets[v + 1]].iter().copied()))
            .collect();
        let max_degree = degree.iter().copied().fold(T::zero(), T::max);
        let graph = Self {
            ids,
            index,
            offsets,
            targets,
            weights,
            slot_edge,
            edges,
            degree,
            max_degree,
        };
        let components = graph.component_count();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
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

    pub fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn require(&self, id: VertexId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownVertex(id))
    }

    /// Dense indices of a set of identifiers, in ascending order.
    pub fn indices_of<'a, I>(&self, set: I) -> Result<Vec<usize>>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let mut out: Vec<usize> = set
            .into_iter()
            .map(|&id| self.require(id))
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Membership mask for a set of identifiers.
    pub fn mask_of<'a, I>(&self, set: I) -> Result<Vec<bool>>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let mut mask = vec![false; self.len()];
        for i in self.indices_of(set)? {
            mask[i] = true;
        }
        Ok(mask)
    }

    pub fn set_of(&self, indices: impl IntoIterator<Item = usize>) -> VertexSet {
        indices.into_iter().map(|i| self.ids[i]).collect()
    }

    pub fn slots(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Neighbors of `i` as `(index, weight)`, ascending by index.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.slots(i).map(move |s| (self.targets[s], self.weights[s]))
    }

    /// Neighbors of `i` as `(index, weight, unordered edge index)`.
    pub fn neighbor_edges(&self, i: usize) -> impl Iterator<Item = (usize, T, usize)> + '_ {
        self.slots(i)
            .map(move |s| (self.targets[s], self.weights[s], self.slot_edge[s]))
    }

    pub fn degree(&self, i: usize) -> T {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[T] {
        &self.degree
    }

    /// Maximal weighted degree.
    pub fn max_degree(&self) -> T {
        self.max_degree
    }

    /// Unordered edges `(i, j, b)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.slots(i);
        let row = &self.targets[range.clone()];
        row.binary_search(&j)
            .ok()
            .map(|k| self.slot_edge[range.start + k])
    }

    /// `b(i, j)`, zero for non-adjacent pairs.
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.edge_index(i, j)
            .map(|e| self.edges[e].2)
            .unwrap_or_else(T::zero)
    }

    pub fn is_locally_finite(&self) -> bool {
        true
    }

    /// Hop distances from a set of sources; `None` if unreachable.
    pub fn hop_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for (u, _) in self.neighbors(v) {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for (u, _) in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        count
    }

    /// Vertices outside `inner` adjacent to some vertex of `inner`.
    pub fn ring_of(&self, inner: &[bool]) -> Vec<usize> {
        let mut ring = Vec::new();
        for v in 0..self.len() {
            if !inner[v] && self.neighbors(v).any(|(u, _)| inner[u]) {
                ring.push(v);
            }
        }
        ring
    }
}

/// Strictly positive vertex weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure<T> {
    values: Vec<T>,
    total: T,
}

impl<T: Scalar> Measure<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > T::zero()) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "measure must be strictly positive, got {v} at index {i}"
            )));
        }
        let total = csum(values.iter().copied());
        Ok(Self { values, total })
    }

    pub fn unit(n: usize) -> Self {
        Self {
            values: vec![T::one(); n],
            total: T::from_usize_lossy(n),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> T {
        self.total
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }

    /// `m(A)` for a set given by a membership predicate.
    pub fn mass_where(&self, mut pred: impl FnMut(usize) -> bool) -> T {
        csum((0..self.len()).filter(|&i| pred(i)).map(|i| self.values[i]))
    }

    /// Restriction to a subgraph, matching vertex identifiers.
    pub fn restrict(&self, from: &WeightedGraph<T>, to: &WeightedGraph<T>) -> Result<Self> {
        let values = to
            .ids()
            .iter()
            .map(|&id| from.require(id).map(|i| self.values[i]))
            .collect::<Result<_>>()?;
        Self::new(values)
    }
}

/// Real-valued vertex function aligned with a graph's index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<T> {
    values: Vec<T>,
    support: Option<Vec<usize>>,
}

impl<T: Scalar> Potential<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self {
            values,
            support: None,
        }
    }

    /// A potential flagged as finitely supported in `support`.
    pub fn with_support(values: Vec<T>, mut support: Vec<usize>) -> Result<Self> {
        support.sort_unstable();
        support.dedup();
        for (i, v) in values.iter().enumerate() {
            if *v != T::zero() && support.binary_search(&i).is_err() {
                return Err(Error::InvalidParameter(format!(
                    "nonzero value at index {i} outside the declared support"
                )));
            }
        }
        Ok(Self {
            values,
            support: Some(support),
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![T::zero(); n])
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self::new(vec![c; n])
    }

    pub fn from_fn(graph: &WeightedGraph<T>, f: impl FnMut(VertexId) -> T) -> Self {
        Self::new(graph.ids().iter().copied().map(f).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Self {
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Values on `to`, read by identifier from `from`; vertices of `to`
    /// missing in `from` receive `fill`.
    pub fn transfer(&self, from: &WeightedGraph<T>, to: &WeightedGraph<T>, fill: T) -> Self {
        Self::new(
            to.ids()
                .iter()
                .map(|&id| from.index_of(id).map_or(fill, |i| self.values[i]))
                .collect(),
        )
    }
}

/// Symmetric function on the edges of a graph, one value per unordered edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeFunction<T> {
    values: Vec<T>,
}

impl<T: Scalar> EdgeFunction<T> {
    pub fn new(graph: &WeightedGraph<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::InvalidParameter(format!(
                "edge function has {} values for {} edges",
                values.len(),
                graph.edge_count()
            )));
        }
        if values.iter().any(|v| *v < T::zero() || v.is_nan()) {
            return Err(Error::InvalidParameter(
                "edge function values must be nonnegative".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Evaluates `f(i, j, b(i, j))` on each unordered edge `i < j`.
    pub fn from_fn(graph: &WeightedGraph<T>, mut f: impl FnMut(usize, usize, T) -> T) -> Result<Self> {
        let values = graph.edges().iter().map(|&(i, j, b)| f(i, j, b)).collect();
        Self::new(graph, values)
    }

    pub fn constant(graph: &WeightedGraph<T>, c: T) -> Result<Self> {
        Self::new(graph, vec![c; graph.edge_count()])
    }

    /// `|f(x) - f(y)|` on every edge.
    pub fn gradient_magnitude(graph: &WeightedGraph<T>, f: &Potential<T>) -> Self {
        Self {
            values: graph
                .edges()
                .iter()
                .map(|&(i, j, _)| (f.get(i) - f.get(j)).abs())
                .collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn on_edge(&self, e: usize) -> T {
        self.values[e]
    }

    pub fn get(&self, graph: &WeightedGraph<T>, i: usize, j: usize) -> Option<T> {
        graph.edge_index(i, j).map(|e| self.values[e])
    }

    /// Whether the function is strictly positive on every edge.
    pub fn is_edge_weight(&self) -> bool {
        self.values.iter().all(|&v| v > T::zero())
    }
}

/// One level of an exhaustion: a finite set and its outer ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustionLevel {
    pub radius: usize,
    pub interior: VertexSet,
    pub ring: VertexSet,
}

/// Nested finite sets `F_1 ⊆ F_2 ⊆ …` given by combinatorial balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exhaustion {
    pub seed: VertexId,
    pub levels: Vec<ExhaustionLevel>,
}

impl Exhaustion {
    /// Combinatorial balls of the given radii around `seed`.
    pub fn balls<T: Scalar>(graph: &WeightedGraph<T>, seed: VertexId, radii: &[usize]) -> Result<Self> {
        let s = graph.require(seed)?;
        if radii.is_empty() {
            return Err(Error::InvalidParameter("exhaustion needs at least one radius".into()));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
        }
        let dist = graph.hop_distances(&[s]);
        let levels = radii
            .iter()
            .map(|&r| {
                let inner: Vec<bool> = dist.iter().map(|d| d.is_some_and(|d| d <= r)).collect();
                let ring = graph.ring_of(&inner);
                ExhaustionLevel {
                    radius: r,
                    interior: graph.set_of((0..graph.len()).filter(|&i| inner[i])),
                    ring: graph.set_of(ring),
                }
            })
            .collect();
        Ok(Self { seed, levels })
    }

    /// Arbitrary nested sets; rings are recomputed and nesting is checked.
    pub fn from_sets<T: Scalar>(graph: &WeightedGraph<T>, seed: VertexId, sets: Vec<VertexSet>) -> Result<Self> {
        graph.require(seed)?;
        let mut levels = Vec::with_capacity(sets.len());
        for (n, set) in sets.into_iter().enumerate() {
            if let Some(prev) = levels.last() {
                let prev: &ExhaustionLevel = prev;
                if !prev.interior.is_subset(&set) {
                    return Err(Error::InvalidParameter(format!("level {n} does not contain level {}", n - 1)));
                }
            }
            let mask = graph.mask_of(&set)?;
            let ring = graph.set_of(graph.ring_of(&mask));
            levels.push(ExhaustionLevel {
                radius: n,
                interior: set,
                ring,
            });
        }
        Ok(Self { seed, levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Whether the nesting and ring-disjointness invariants hold.
    pub fn check(&self) -> bool {
        self.levels
            .windows(2)
            .all(|w| w[0].interior.is_subset(&w[1].interior))
            && self.levels.iter().all(|l| l.ring.is_disjoint(&l.interior))
    }
}

/// A finite set together with its ring, as a standalone graph.
#[derive(Clone, Debug)]
pub struct Truncation<T> {
    pub graph: WeightedGraph<T>,
    pub interior: VertexSet,
    pub ring: VertexSet,
}

impl<T: Scalar> Truncation<T> {
    /// Membership mask of the ring in `self.graph`'s index order.
    pub fn ring_mask(&self) -> Vec<bool> {
        self.graph.mask_of(&self.ring).expect("ring vertices belong to the truncation")
    }
}

/// Subgraph on `F ∪ ring(F)` keeping only edges with an endpoint in `F`.
pub fn induced_truncation<T: Scalar>(graph: &WeightedGraph<T>, interior: &VertexSet) -> Result<Truncation<T>> {
    if interior.is_empty() {
        return Err(Error::EmptySet("truncation interior"));
    }
    let inner = graph.mask_of(interior)?;
    let ring = graph.ring_of(&inner);
    let mut keep: Vec<usize> = (0..graph.len()).filter(|&i| inner[i]).collect();
    keep.extend(&ring);
    keep.sort_unstable();
    let mut local = vec![usize::MAX; graph.len()];
    for (k, &v) in keep.iter().enumerate() {
        local[v] = k;
    }
    let edges: Vec<(usize, usize, T)> = graph
        .edges()
        .iter()
        .filter(|&&(i, j, _)| inner[i] || inner[j])
        .map(|&(i, j, b)| (local[i], local[j], b))
        .collect();
    let ids = keep.iter().map(|&v| graph.id(v)).collect();
    let sub = WeightedGraph::from_sorted_index_edges(ids, edges)?;
    Ok(Truncation {
        graph: sub,
        interior: interior.clone(),
        ring: graph.set_of(ring),
    })
}

/// Diagnostics reported by [`validate_graph`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct GraphReport<T> {
    pub vertices: usize,
    pub edges: usize,
    pub symmetric: bool,
    pub zero_diagonal: bool,
    pub connected: bool,
    pub degrees_finite: bool,
    pub max_degree: T,
    pub min_degree: T,
}

pub fn validate_graph<T: Scalar>(graph: &WeightedGraph<T>) -> GraphReport<T> {
    let mut symmetric = true;
    let mut zero_diagonal = true;
    for i in 0..graph.len() {
        for (j, w) in graph.neighbors(i) {
            if i == j {
                zero_diagonal = false;
            }
            if graph.weight(j, i) != w {
                symmetric = false;
            }
        }
    }
    let min_degree = graph.degrees().iter().copied().fold(T::infinity(), T::min);
    GraphReport {
        vertices: graph.len(),
        edges: graph.edge_count(),
        symmetric,
        zero_diagonal,
        connected: graph.component_count() == 1,
        degrees_finite: graph.degrees().iter().all(|d| d.is_finite()),
        max_degree: graph.max_degree(),
        min_degree: if graph.is_empty() { T::zero() } else { min_degree },
    }
}
