//! Capacities of vertex sets, tails and boundary targets, Thomson flow
//! bounds, and the recurrence classifier.
//!
//! Schedules are given by radii around a seed vertex. Radius `r` means:
//! the domain is the combinatorial ball `B_r`, the source is the seed and
//! the sphere at distance `r` is grounded. In exhaustion terms this is
//! `F = B_{r-1}` with ring `R = S_r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::solve_dirichlet;
use crate::energy::{energy_value, Contraction};
use crate::error::{Error, Result};
use crate::generate::{generate_with, Family, GeneratorConfig};
use crate::graph::{induced_truncation, Exhaustion, Measure, Potential, VertexId, VertexSet, WeightedGraph};
use crate::linalg::{Method, SolverConfig};
use crate::metrics::{dist_to_set, is_intrinsic, MetricObject};
use crate::scalar::{csum, Scalar};

/// Value and optimizer of a constrained quadratic minimization.
#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult<T> {
    /// Recomputed from the optimizer by direct summation.
    pub value: T,
    #[serde(skip)]
    pub optimizer: Potential<T>,
    pub residual: T,
    pub iterations: usize,
    pub method: Method,
    /// Objective reported through the reduced quadratic form.
    pub objective: T,
    pub constraint: String,
}

impl<T: Scalar> CapacityResult<T> {
    /// `|value − objective| / value`.
    pub fn discrepancy(&self) -> T {
        let d = (self.value - self.objective).abs();
        if self.value > T::zero() {
            d / self.value
        } else {
            d
        }
    }

    fn empty(n: usize, constraint: &str) -> Self {
        Self {
            value: T::zero(),
            optimizer: Potential::zeros(n),
            residual: T::zero(),
            iterations: 0,
            method: Method::Trivial,
            objective: T::zero(),
            constraint: constraint.into(),
        }
    }
}

fn mass_norm_sq<T: Scalar>(f: &[T], m: &[T]) -> T {
    csum(f.iter().zip(m).map(|(&v, &w)| w * v * v))
}

fn check_unit_range<T: Scalar>(f: &[T]) -> Result<()> {
    let slack = T::tol(1e-9);
    match f.iter().find(|v| !(**v >= -slack && **v <= T::one() + slack)) {
        Some(v) => Err(Error::Invariant(format!("capacity optimizer leaves [0, 1]: {v}"))),
        None => Ok(()),
    }
}

/// `cap_m(U) = min { Q(f) + ‖f‖²_m : f = 1 on U }` on a finite graph.
pub fn cap_finite<T: Scalar>(
    graph: &WeightedGraph<T>,
    m: &Measure<T>,
    u: &VertexSet,
    config: &SolverConfig,
) -> Result<CapacityResult<T>> {
    let mask = graph.mask_of(u)?;
    cap_finite_mask(graph, m, &mask, config)
}

pub fn cap_finite_mask<T: Scalar>(
    graph: &WeightedGraph<T>,
    m: &Measure<T>,
    u: &[bool],
    config: &SolverConfig,
) -> Result<CapacityResult<T>> {
    if m.len() != graph.len() {
        return Err(Error::InvalidParameter("measure does not match graph".into()));
    }
    let size = u.iter().filter(|b| **b).count();
    if size == 0 {
        return Ok(CapacityResult::empty(graph.len(), "U = ∅"));
    }
    let fixed: Vec<Option<T>> = u.iter().map(|&inside| inside.then_some(T::one())).collect();
    let sol = solve_dirichlet(graph, &fixed, Some(m.values()), config)?;
    check_unit_range(&sol.values)?;
    let value = energy_value(graph, &sol.values) + mass_norm_sq(&sol.values, m.values());
    Ok(CapacityResult {
        value,
        residual: sol.residual,
        iterations: sol.iterations,
        method: sol.method,
        objective: sol.objective,
        optimizer: Potential::new(sol.values),
        constraint: format!("f = 1 on {size} vertices"),
    })
}

/// `min { Q(f) : f = 1 on U, f = 0 on R }`, the effective conductance.
pub fn effective_cap<T: Scalar>(
    graph: &WeightedGraph<T>,
    u: &VertexSet,
    r: &VertexSet,
    config: &SolverConfig,
) -> Result<CapacityResult<T>> {
    if !u.is_disjoint(r) {
        return Err(Error::InvalidParameter("source and grounded sets overlap".into()));
    }
    effective_cap_idx(graph, &graph.indices_of(u)?, &graph.indices_of(r)?, config)
}

pub fn effective_cap_idx<T: Scalar>(
    graph: &WeightedGraph<T>,
    u: &[usize],
    r: &[usize],
    config: &SolverConfig,
) -> Result<CapacityResult<T>> {
    if u.is_empty() {
        return Err(Error::EmptySet("source set"));
    }
    if r.is_empty() {
        return Err(Error::EmptySet("grounded set"));
    }
    let mut fixed = vec![None; graph.len()];
    for &x in r {
        fixed[x] = Some(T::zero());
    }
    for &x in u {
        if fixed[x].is_some() {
            return Err(Error::InvalidParameter("source and grounded sets overlap".into()));
        }
        fixed[x] = Some(T::one());
    }
    let sol = solve_dirichlet(graph, &fixed, None, config)?;
    check_unit_range(&sol.values)?;
    Ok(CapacityResult {
        value: energy_value(graph, &sol.values),
        residual: sol.residual,
        iterations: sol.iterations,
        method: sol.method,
        objective: sol.objective,
        optimizer: Potential::new(sol.values),
        constraint: format!("f = 1 on {} vertices, f = 0 on {} vertices", u.len(), r.len()),
    })
}

/// Exhaustion realizing a radius schedule (see the module docs).
pub fn schedule_exhaustion<T: Scalar>(graph: &WeightedGraph<T>, seed: VertexId, radii: &[usize]) -> Result<Exhaustion> {
    if radii.first() == Some(&0) {
        return Err(Error::InvalidParameter("schedule radii must be at least 1".into()));
    }
    let inner: Vec<usize> = radii.iter().map(|r| r - 1).collect();
    let mut ex = Exhaustion::balls(graph, seed, &inner)?;
    for (level, &r) in ex.levels.iter_mut().zip(radii) {
        level.radius = r;
    }
    Ok(ex)
}

/// Effective capacity between the seed and the ring of one exhaustion
/// level, solved on the truncation `F ∪ R`. `None` when the ring is empty.
pub fn level_capacity<T: Scalar>(
    graph: &WeightedGraph<T>,
    seed: VertexId,
    interior: &VertexSet,
    config: &SolverConfig,
) -> Result<Option<(WeightedGraph<T>, CapacityResult<T>)>> {
    let trunc = induced_truncation(graph, interior)?;
    if trunc.ring.is_empty() {
        return Ok(None);
    }
    let src = vec![trunc.graph.require(seed)?];
    let sinks = trunc.graph.indices_of(&trunc.ring)?;
    let cap = effective_cap_idx(&trunc.graph, &src, &sinks, config)?;
    Ok(Some((trunc.graph, cap)))
}

#[derive(Clone, Debug, Serialize)]
pub struct TailLevel<T> {
    pub n: usize,
    pub radius: usize,
    /// `cap_m(X_N ∖ F_n)`, absent when the tail is empty.
    pub tail: Option<T>,
    /// `effective_cap(F_0; R_n)`, absent when the ring is empty.
    pub effective: Option<T>,
    pub residual: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailSequence<T> {
    pub levels: Vec<TailLevel<T>>,
}

fn non_increasing<T: Scalar>(values: impl Iterator<Item = T>) -> bool {
    let v: Vec<T> = values.collect();
    let slack = T::tol(1e-9);
    v.windows(2).all(|w| w[1] <= w[0] + slack * w[0].abs().max(T::one()))
}

/// Tail capacities and seed-to-ring capacities over an exhaustion of a
/// finite graph `X_N`.
pub fn cap_tail_sequence<T: Scalar>(
    graph: &WeightedGraph<T>,
    m: &Measure<T>,
    exhaustion: &Exhaustion,
    config: &SolverConfig,
) -> Result<TailSequence<T>> {
    if exhaustion.len() < 2 {
        return Err(Error::InvalidParameter("tail sequence needs at least two levels".into()));
    }
    let levels = exhaustion
        .levels
        .par_iter()
        .enumerate()
        .map(|(n, level)| {
            let inside = graph.mask_of(&level.interior)?;
            let tail_mask: Vec<bool> = inside.iter().map(|b| !b).collect();
            let tail = if tail_mask.iter().any(|b| *b) {
                Some(cap_finite_mask(graph, m, &tail_mask, config)?)
            } else {
                None
            };
            let eff = level_capacity(graph, exhaustion.seed, &level.interior, config)?;
            let residual = [tail.as_ref().map(|c| c.residual), eff.as_ref().map(|e| e.1.residual)]
                .into_iter()
                .flatten()
                .fold(T::zero(), T::max);
            Ok(TailLevel {
                n: n + 1,
                radius: level.radius,
                tail: tail.map(|c| c.value),
                effective: eff.map(|e| e.1.value),
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if !non_increasing(levels.iter().filter_map(|l| l.tail)) {
        return Err(Error::Invariant("tail capacities increased along the exhaustion".into()));
    }
    if !non_increasing(levels.iter().filter_map(|l| l.effective)) {
        return Err(Error::Invariant("effective capacities increased along the exhaustion".into()));
    }
    Ok(TailSequence { levels })
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroCapCertificate<T> {
    /// `‖f_n‖²_{Q,m}` for the slices `f_n = (f − n)_+ ∧ 1`, `n = 0..N`.
    pub slice_norms: Vec<T>,
    pub slice_energies: Vec<T>,
    /// `Q(C_[0,N] ∘ f)` for `N = 1..=n_max`.
    pub clamp_energies: Vec<T>,
    /// Whether `Σ_{n<N} Q(f_n) <= Q(C_[0,N] ∘ f)` held for every `N`.
    pub partial_sums_hold: bool,
}

/// Slice norms of `|f|` as a capacity upper-bound sequence for `{liminf f = ∞}`.
pub fn zero_cap_certificate<T: Scalar>(
    graph: &WeightedGraph<T>,
    m: &Measure<T>,
    f: &Potential<T>,
    n_max: usize,
) -> ZeroCapCertificate<T> {
    let f = f.map(|v| v.abs());
    let mut slice_norms = Vec::with_capacity(n_max);
    let mut slice_energies = Vec::with_capacity(n_max);
    let mut clamp_energies = Vec::with_capacity(n_max);
    let mut partial = Vec::new();
    let mut partial_sums_hold = true;
    for n in 0..n_max {
        let s = f.map(|v| Contraction::Slice(T::from_usize_lossy(n)).apply_scalar(v));
        let q = energy_value(graph, s.values());
        slice_energies.push(q);
        slice_norms.push(q + mass_norm_sq(s.values(), m.values()));
        partial.push(q);
        let c = f.map(|v| v.max(T::zero()).min(T::from_usize_lossy(n + 1)));
        let qc = energy_value(graph, c.values());
        clamp_energies.push(qc);
        let lhs = csum(partial.iter().copied());
        if lhs > qc + T::tol(1e-12) * qc.max(T::one()) {
            partial_sums_hold = false;
        }
    }
    ZeroCapCertificate {
        slice_norms,
        slice_energies,
        clamp_energies,
        partial_sums_hold,
    }
}

/// Decreasing open sets `U_1 ⊇ U_2 ⊇ …` around a boundary target,
/// materialized as membership masks on one graph.
#[derive(Clone, Debug)]
pub struct NeighborhoodBasis {
    pub label: String,
    pub sets: Vec<Vec<bool>>,
}

impl NeighborhoodBasis {
    /// `U_k = {x : |p(x) − w| < ρ_k}` for decreasing `ρ_k`.
    pub fn euclidean<T: Scalar>(points: &[[T; 2]], center: [T; 2], radii: &[T]) -> Result<Self> {
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidParameter("basis radii must decrease".into()));
        }
        let sets = radii
            .iter()
            .map(|&rho| {
                points
                    .iter()
                    .map(|p| (p[0] - center[0]).hypot(p[1] - center[1]) < rho)
                    .collect()
            })
            .collect();
        Ok(Self {
            label: format!("euclidean({}, {})", center[0], center[1]),
            sets,
        })
    }

    /// `U_n = X ∖ F_n`.
    pub fn complements<T: Scalar>(graph: &WeightedGraph<T>, exhaustion: &Exhaustion) -> Result<Self> {
        let sets = exhaustion
            .levels
            .iter()
            .map(|l| graph.mask_of(&l.interior).map(|m| m.into_iter().map(|b| !b).collect()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            label: "complements of exhaustion".into(),
            sets,
        })
    }

    pub fn from_sets<T: Scalar>(graph: &WeightedGraph<T>, sets: &[VertexSet]) -> Result<Self> {
        let basis = Self {
            label: "explicit".into(),
            sets: sets.iter().map(|s| graph.mask_of(s)).collect::<Result<Vec<_>>>()?,
        };
        if !basis.is_nested() {
            return Err(Error::InvalidParameter("basis sets must decrease".into()));
        }
        Ok(basis)
    }

    pub fn is_nested(&self) -> bool {
        self.sets
            .windows(2)
            .all(|w| w[1].iter().zip(&w[0]).all(|(&inner, &outer)| !inner || outer))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCapEntry<T> {
    pub k: usize,
    pub size: usize,
    /// Absent when `U_k` has no vertex on the truncation.
    pub value: Option<T>,
}

/// Upper bounds `cap_m(U_k ∩ X)` for a boundary target.
pub fn boundary_cap_upper<T: Scalar>(
    graph: &WeightedGraph<T>,
    m: &Measure<T>,
    basis: &NeighborhoodBasis,
    config: &SolverConfig,
) -> Result<Vec<BoundaryCapEntry<T>>> {
    if !basis.is_nested() {
        return Err(Error::InvalidParameter("basis sets must decrease".into()));
    }
    let entries = basis
        .sets
        .par_iter()
        .enumerate()
        .map(|(k, set)| {
            let size = set.iter().filter(|b| **b).count();
            let value = if size == 0 {
                None
            } else {
                Some(cap_finite_mask(graph, m, set, config)?.value)
            };
            Ok(BoundaryCapEntry { k: k + 1, size, value })
        })
        .collect::<Result<Vec<_>>>()?;
    if !non_increasing(entries.iter().filter_map(|e| e.value)) {
        return Err(Error::Invariant("boundary capacity bounds increased along the basis".into()));
    }
    Ok(entries)
}

pub enum LiminfTarget<'a> {
    Infinity(&'a Exhaustion),
    Basis(&'a NeighborhoodBasis),
}

/// Truncation proxies `inf { f on X_N ∖ F_n }` or `inf { f on U_k }`;
/// `None` where the set is empty.
pub fn liminf_eval<T: Scalar>(graph: &WeightedGraph<T>, f: &[T], target: LiminfTarget<'_>) -> Result<Vec<Option<T>>> {
    let inf_over = |mask: &[bool]| {
        mask.iter()
            .zip(f)
            .filter(|(m, _)| **m)
            .map(|(_, v)| *v)
            .reduce(T::min)
    };
    match target {
        LiminfTarget::Infinity(ex) => ex
            .levels
            .iter()
            .map(|l| {
                let inside = graph.mask_of(&l.interior)?;
                let tail: Vec<bool> = inside.iter().map(|b| !b).collect();
                Ok(inf_over(&tail))
            })
            .collect(),
        LiminfTarget::Basis(b) => Ok(b.sets.iter().map(|s| inf_over(s)).collect()),
    }
}

/// Edge flow, stored per edge in the direction `i → j` of `graph.edges()`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeFlow<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> EdgeFlow<T> {
    pub fn new(graph: &WeightedGraph<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::InvalidParameter("flow length does not match edge count".into()));
        }
        Ok(Self { values })
    }

    /// Net outflow at each vertex.
    pub fn divergence(&self, graph: &WeightedGraph<T>) -> Vec<T> {
        let mut out = vec![Vec::new(); graph.len()];
        for (e, &(i, j, _)) in graph.edges().iter().enumerate() {
            out[i].push(self.values[e]);
            out[j].push(-self.values[e]);
        }
        out.into_iter().map(csum).collect()
    }

    /// `Σ_e flow(e)² / b(e)`.
    pub fn energy(&self, graph: &WeightedGraph<T>) -> T {
        csum(graph.edges().iter().zip(&self.values).map(|(&(_, _, b), &v)| v * v / b))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowBound<T> {
    /// `flux² / energy`, a lower bound on the effective capacity.
    pub value: T,
    pub flux: T,
    pub energy: T,
    pub max_imbalance: T,
    pub kind: String,
}

/// Thomson's principle: any flow conserved off `sources ∪ sinks` gives
/// `effective_cap(sources; sinks) >= flux² / Σ flow²/b`.
pub fn flow_lower_bound<T: Scalar>(
    graph: &WeightedGraph<T>,
    sources: &[usize],
    sinks: &[usize],
    flow: &EdgeFlow<T>,
) -> Result<FlowBound<T>> {
    let div = flow.divergence(graph);
    let mut terminal = vec![false; graph.len()];
    for &x in sources.iter().chain(sinks) {
        terminal[x] = true;
    }
    let flux = csum(sources.iter().map(|&s| div[s]));
    let tol = T::tol(1e-10) * flux.abs().max(T::one());
    let mut max_imbalance = T::zero();
    for x in (0..graph.len()).filter(|&x| !terminal[x]) {
        max_imbalance = max_imbalance.max(div[x].abs());
        if div[x].abs() > tol {
            return Err(Error::Conservation {
                vertex: graph.id(x),
                divergence: div[x].as_f64(),
            });
        }
    }
    if flux == T::zero() {
        return Err(Error::ZeroFlux);
    }
    let energy = flow.energy(graph);
    Ok(FlowBound {
        value: flux * flux / energy,
        flux,
        energy,
        max_imbalance,
        kind: "explicit".into(),
    })
}

fn signed_add<T: Scalar>(graph: &WeightedGraph<T>, values: &mut [T], from: usize, to: usize, amount: T) {
    let e = graph.edge_index(from, to).expect("adjacent vertices");
    if from < to {
        values[e] += amount;
    } else {
        values[e] -= amount;
    }
}

/// Unit flow pushed outward by hop distance from the sources, split at
/// each vertex in proportion to the weights of its outward edges.
pub fn radial_flow<T: Scalar>(graph: &WeightedGraph<T>, sources: &[usize], sinks: &[usize]) -> Result<EdgeFlow<T>> {
    if sources.is_empty() {
        return Err(Error::EmptySet("flow sources"));
    }
    let dist = graph.hop_distances(sources);
    let mut is_sink = vec![false; graph.len()];
    for &s in sinks {
        is_sink[s] = true;
    }
    let mut order: Vec<usize> = (0..graph.len()).filter(|&x| dist[x].is_some()).collect();
    order.sort_by_key(|&x| (dist[x], x));
    let mut mass = vec![T::zero(); graph.len()];
    let share = T::one() / T::from_usize_lossy(sources.len());
    for &s in sources {
        mass[s] = share;
    }
    let mut values = vec![T::zero(); graph.edge_count()];
    for &x in &order {
        if is_sink[x] || mass[x] == T::zero() {
            continue;
        }
        let d = dist[x].unwrap();
        let outward: Vec<(usize, T)> = graph.neighbors(x).filter(|&(y, _)| dist[y] == Some(d + 1)).collect();
        let total = csum(outward.iter().map(|&(_, b)| b));
        if outward.is_empty() {
            return Err(Error::Invariant(format!("radial flow is stuck at vertex {}", graph.id(x))));
        }
        for (y, b) in outward {
            let amount = mass[x] * b / total;
            mass[y] += amount;
            signed_add(graph, &mut values, x, y, amount);
        }
    }
    EdgeFlow::new(graph, values)
}

/// Current `b(x,y)(f(x) − f(y))` of a potential, with any residual
/// imbalance off the terminals routed along a shortest-path tree into the
/// sinks so that conservation holds to rounding.
pub fn current_flow<T: Scalar>(
    graph: &WeightedGraph<T>,
    potential: &[T],
    sources: &[usize],
    sinks: &[usize],
) -> Result<EdgeFlow<T>> {
    if sinks.is_empty() {
        return Err(Error::EmptySet("flow sinks"));
    }
    let mut values: Vec<T> = graph
        .edges()
        .iter()
        .map(|&(i, j, b)| b * (potential[i] - potential[j]))
        .collect();
    let flow = EdgeFlow { values: values.clone() };
    let mut div = flow.divergence(graph);
    let mut terminal = vec![false; graph.len()];
    for &x in sources.iter().chain(sinks) {
        terminal[x] = true;
    }
    let dist = graph.hop_distances(sinks);
    let mut order: Vec<usize> = (0..graph.len()).filter(|&x| !terminal[x]).collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(dist[x]), x));
    for x in order {
        let d = match dist[x] {
            Some(d) => d,
            None => continue,
        };
        let parent = graph
            .neighbors(x)
            .map(|(y, _)| y)
            .find(|&y| dist[y] == Some(d - 1))
            .expect("hop distances give a parent");
        let excess = div[x];
        signed_add(graph, &mut values, x, parent, -excess);
        div[x] -= excess;
        div[parent] += excess;
    }
    EdgeFlow::new(graph, values)
}

/// The better of the radial and current flow bounds for `seed → sinks`.
pub fn best_flow_bound<T: Scalar>(
    graph: &WeightedGraph<T>,
    sources: &[usize],
    sinks: &[usize],
    potential: Option<&[T]>,
) -> Result<FlowBound<T>> {
    let mut best: Option<FlowBound<T>> = None;
    if let Ok(flow) = radial_flow(graph, sources, sinks) {
        if let Ok(mut b) = flow_lower_bound(graph, sources, sinks, &flow) {
            b.kind = "radial".into();
            best = Some(b);
        }
    }
    if let Some(p) = potential {
        let flow = current_flow(graph, p, sources, sinks)?;
        let mut b = flow_lower_bound(graph, sources, sinks, &flow)?;
        b.kind = "current".into();
        if best.as_ref().is_none_or(|prev| b.value > prev.value) {
            best = Some(b);
        }
    }
    best.ok_or_else(|| Error::Invariant("no admissible flow found".into()))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassifierConfig {
    pub zero_threshold: f64,
    pub stabilization_tol: f64,
    /// Largest relative RMS accepted for a decay fit.
    pub fit_tol: f64,
    /// Smallest accepted ratio between the last two increments of the
    /// resistance `1/cap` per unit of `ln radius`.
    pub resistance_growth_min: f64,
    pub certify_flow: bool,
    pub solver: SolverConfig,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            zero_threshold: 1e-3,
            stabilization_tol: 0.05,
            fit_tol: 0.05,
            resistance_growth_min: 0.8,
            certify_flow: true,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    Recurrent,
    Transient,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Recurrent => "Recurrent",
            Classification::Transient => "Transient",
            Classification::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelRecord<T> {
    /// Grounding radius.
    pub n: usize,
    pub value: T,
    pub residual: T,
    pub vertices: usize,
    pub iterations: usize,
}

/// Least-squares fit of a capacity sequence.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    /// `power`: `c = a n^{-α}`; `inverse_log`: `c = a (ln n)^{-α}`;
    /// `saturating`: `c = c∞ + a/n`.
    pub model: String,
    pub params: Vec<f64>,
    /// Residual sum of squares of the relative errors.
    pub rss: f64,
}

impl Fit {
    pub fn rel_rms(&self, points: usize) -> f64 {
        (self.rss / points.max(1) as f64).sqrt()
    }
}

fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Fits `c = a·g(n)^{-α}` on a log scale for `g = n` and `g = ln n`, and
/// the saturating model `c = c∞ + a/n`.
pub fn fit_models(points: &[(f64, f64)]) -> Vec<Fit> {
    let mut fits = Vec::new();
    if points.len() < 2 || points.iter().any(|&(n, c)| !(n > 0.0 && c > 0.0)) {
        return fits;
    }
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let decaying = |name: &str, g: &dyn Fn(f64) -> f64| -> Option<Fit> {
        let xs: Vec<f64> = points.iter().map(|p| g(p.0)).collect();
        if xs.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let (b0, b1) = linear_fit(&xs, &ys)?;
        let rss = points
            .iter()
            .zip(&xs)
            .map(|(&(_, c), &x)| {
                let model = (b0 + b1 * x).exp();
                ((model - c) / c).powi(2)
            })
            .sum();
        Some(Fit { model: name.into(), params: vec![b0.exp(), -b1], rss })
    };
    fits.extend(decaying("power", &|n: f64| n.ln()));
    if points.iter().all(|p| p.0 > 1.0) {
        fits.extend(decaying("inverse_log", &|n: f64| n.ln().ln()));
    }
    let inv: Vec<f64> = points.iter().map(|p| 1.0 / p.0).collect();
    let cs: Vec<f64> = points.iter().map(|p| p.1).collect();
    if let Some((c_inf, a)) = linear_fit(&inv, &cs) {
        let rss = points
            .iter()
            .map(|&(n, c)| ((c_inf + a / n - c) / c).powi(2))
            .sum();
        fits.push(Fit { model: "saturating".into(), params: vec![c_inf, a], rss });
    }
    fits
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict<T> {
    pub problem: String,
    pub levels: Vec<LevelRecord<T>>,
    /// Best decaying model.
    pub fit: Option<Fit>,
    pub saturating: Option<Fit>,
    #[serde(rename = "verdict")]
    pub classification: Classification,
    pub flow: Option<FlowBound<T>>,
    /// `ln` of the radius where the fitted decay reaches `zero_threshold`.
    pub projected_log_radius: Option<f64>,
    /// Ratio of the last two resistance increments per unit `ln radius`.
    pub resistance_growth: Option<f64>,
    pub notes: Vec<String>,
    pub config: ClassifierConfig,
}

/// Classifies a family by materializing its largest schedule level.
pub fn recurrence_classifier<T: Scalar>(
    family: Family,
    radii: &[usize],
    weight: T,
    config: &ClassifierConfig,
    gen: GeneratorConfig,
) -> Result<Verdict<T>> {
    let r_max = *radii.iter().max().ok_or(Error::EmptySet("radius schedule"))?;
    let graph = generate_with(family.at(r_max), weight, gen)?;
    classify_graph(&graph, 0, radii, config, format!("recurrence of {family}"))
}

/// Classifier on an explicit graph with seed and radius schedule.
pub fn classify_graph<T: Scalar>(
    graph: &WeightedGraph<T>,
    seed: VertexId,
    radii: &[usize],
    config: &ClassifierConfig,
    problem: String,
) -> Result<Verdict<T>> {
    let ex = schedule_exhaustion(graph, seed, radii)?;
    let solved = ex
        .levels
        .par_iter()
        .map(|level| level_capacity(graph, seed, &level.interior, &config.solver))
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    let mut levels = Vec::new();
    let mut last = None;
    for (level, s) in ex.levels.iter().zip(solved) {
        match s {
            None => notes.push(format!("radius {} exhausts the graph: no vertices left to ground", level.radius)),
            Some((g, cap)) => {
                levels.push(LevelRecord {
                    n: level.radius,
                    value: cap.value,
                    residual: cap.residual,
                    vertices: g.len(),
                    iterations: cap.iterations,
                });
                last = Some((g, cap));
            }
        }
    }
    if !non_increasing(levels.iter().map(|l| l.value)) {
        return Err(Error::Invariant("effective capacities increased with the radius".into()));
    }
    let points: Vec<(f64, f64)> = levels.iter().map(|l| (l.n as f64, l.value.as_f64())).collect();
    let fits = fit_models(&points);
    let saturating = fits.iter().find(|f| f.model == "saturating").cloned();
    let fit = fits
        .iter()
        .filter(|f| f.model != "saturating")
        .min_by(|a, b| a.rss.total_cmp(&b.rss))
        .cloned();
    let mut verdict = Verdict {
        problem,
        levels,
        fit,
        saturating,
        classification: Classification::Inconclusive,
        flow: None,
        projected_log_radius: None,
        resistance_growth: None,
        notes,
        config: *config,
    };
    let k = verdict.levels.len();
    if k < 2 {
        verdict.notes.push("fewer than two usable levels".into());
        return Ok(verdict);
    }
    let values: Vec<f64> = verdict.levels.iter().map(|l| l.value.as_f64()).collect();
    let change = (values[k - 2] - values[k - 1]).abs() / values[k - 2];
    if change < config.stabilization_tol {
        if config.certify_flow {
            let (g, cap) = last.expect("at least one level");
            let src = vec![g.require(seed)?];
            let ring: Vec<usize> = {
                let dist = g.hop_distances(&src);
                let r = verdict.levels[k - 1].n;
                (0..g.len()).filter(|&x| dist[x] == Some(r)).collect()
            };
            match best_flow_bound(&g, &src, &ring, Some(cap.optimizer.values())) {
                Ok(b) if b.value > T::zero() => {
                    verdict.flow = Some(b);
                    verdict.classification = Classification::Transient;
                }
                Ok(_) | Err(_) => verdict.notes.push("capacities stabilized but no positive flow bound".into()),
            }
        } else {
            verdict.classification = Classification::Transient;
        }
        return Ok(verdict);
    }
    let strictly_decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if values[k - 1] < config.zero_threshold && strictly_decreasing {
        verdict.classification = Classification::Recurrent;
        verdict.notes.push("capacity fell below the zero threshold".into());
        return Ok(verdict);
    }
    if k >= 3 {
        let density = |i: usize| {
            let (a, b) = (&verdict.levels[i], &verdict.levels[i + 1]);
            (1.0 / b.value.as_f64() - 1.0 / a.value.as_f64()) / ((b.n as f64).ln() - (a.n as f64).ln())
        };
        verdict.resistance_growth = Some(density(k - 2) / density(k - 3));
    }
    let resistance_keeps_growing = verdict
        .resistance_growth
        .is_some_and(|g| g >= config.resistance_growth_min);
    if k >= 3 && strictly_decreasing && resistance_keeps_growing {
        if let Some(fit) = verdict.fit.clone() {
            let (a, alpha) = (fit.params[0], fit.params[1]);
            let decaying_rms = fit.rel_rms(k);
            let saturates = verdict.saturating.as_ref().is_some_and(|s| {
                s.params[0] > config.zero_threshold && s.rss < fit.rss
            });
            if alpha > 0.0 && decaying_rms < config.fit_tol && !saturates {
                let ln_g = (a / config.zero_threshold).ln() / alpha;
                let log_radius = if fit.model == "power" { ln_g } else { ln_g.exp() };
                verdict.projected_log_radius = Some(log_radius);
                verdict.classification = Classification::Recurrent;
                verdict.notes.push(format!(
                    "{} decay fit projects the capacity below the zero threshold at radius e^{:.3}",
                    fit.model, log_radius
                ));
                return Ok(verdict);
            }
        }
    }
    verdict.notes.push("neither stabilized nor decaying to zero".into());
    Ok(verdict)
}

#[derive(Clone, Debug, Serialize)]
pub struct MetricCertificate<T> {
    pub n: usize,
    /// `Q(g_F)` for `g_F = (1 − σ_F)_+`.
    pub energy: T,
    /// `2 m(X ∖ F)`
    pub bound: T,
    pub support_ok: bool,
    pub holds: bool,
    #[serde(skip)]
    pub g: Potential<T>,
}

/// Finitely supported `g_F = (1 − σ_F)_+` with `Q(g_F) <= 2 m(X ∖ F)`.
pub fn recurrence_certificate_from_metric<T: Scalar>(
    graph: &WeightedGraph<T>,
    sigma: &MetricObject<'_, T>,
    m: &Measure<T>,
    exhaustion: &Exhaustion,
) -> Result<Vec<MetricCertificate<T>>> {
    let report = is_intrinsic(graph, sigma, m.values());
    if let Some((x, s)) = report.slack.iter().enumerate().find(|(_, s)| **s < T::zero()) {
        return Err(Error::NotIntrinsic {
            vertex: graph.id(x),
            excess: (-*s).as_f64(),
        });
    }
    exhaustion
        .levels
        .iter()
        .enumerate()
        .map(|(n, level)| {
            let f_idx = graph.indices_of(&level.interior)?;
            let sf = dist_to_set(sigma, &f_idx)?;
            let g = sf.map(|v| (T::one() - v).max(T::zero()));
            let inside = graph.mask_of(&level.interior)?;
            let support_ok = (0..graph.len()).all(|x| {
                let on_f = !inside[x] || g.get(x) == T::one();
                let supp = g.get(x) == T::zero() || sf.get(x) < T::one();
                on_f && supp
            });
            let energy = energy_value(graph, g.values());
            let bound = T::lit(2.0) * m.mass_where(|x| !inside[x]);
            let holds = energy <= bound + T::tol(1e-12) * bound.max(T::one());
            Ok(MetricCertificate { n: n + 1, energy, bound, support_ok, holds, g })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, tree_radial_quotient, FamilySpec};

    fn set(v: &[VertexId]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn cap_finite_examples() {
        let single = WeightedGraph::from_edges([0], []).unwrap();
        let c = cap_finite(&single, &Measure::unit(1), &set(&[0]), &SolverConfig::default()).unwrap();
        assert_eq!((c.value, c.optimizer.values()), (1.0, &[1.0][..]));
        let edge = WeightedGraph::from_edges([], [(0, 1, 1.0f64)]).unwrap();
        let c = cap_finite(&edge, &Measure::unit(2), &set(&[0]), &SolverConfig::default()).unwrap();
        assert!((c.value - 1.5).abs() < 1e-15);
        assert!((c.optimizer.get(1) - 0.5).abs() < 1e-15);
        assert!(c.discrepancy() < 1e-12);
        let c = cap_finite(&edge, &Measure::unit(2), &set(&[]), &SolverConfig::default()).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn effective_cap_examples() {
        let n = 10;
        let path = generate(FamilySpec::Path { len: n }, 1.0f64).unwrap();
        let c = effective_cap(&path, &set(&[0]), &set(&[n as u64]), &SolverConfig::default()).unwrap();
        assert!((c.value - 0.1).abs() < 1e-14);
        assert!(effective_cap(&path, &set(&[0]), &set(&[0]), &SolverConfig::default()).is_err());
        let q = tree_radial_quotient(2, 5, 1.0f64).unwrap();
        let c = effective_cap(&q, &set(&[0]), &set(&[5]), &SolverConfig::default()).unwrap();
        assert!((c.value - 1.0 / (1.0 - 2f64.powi(-5))).abs() < 1e-13);
    }

    #[test]
    fn schedule_on_z1_gives_two_over_n() {
        let g = generate(FamilySpec::Lattice { dim: 1, radius: 6 }, 1.0f64).unwrap();
        let ex = schedule_exhaustion(&g, 0, &[1, 2, 3, 6]).unwrap();
        let t = cap_tail_sequence(&g, &Measure::unit(g.len()), &ex, &SolverConfig::default()).unwrap();
        for l in &t.levels {
            let e = l.effective.unwrap();
            assert!((e - 2.0 / l.radius as f64).abs() < 1e-13, "{l:?}");
        }
        assert!(t.levels.last().unwrap().tail.is_some());
    }

    #[test]
    fn flow_examples() {
        let n = 7;
        let path = generate(FamilySpec::Path { len: n }, 1.0f64).unwrap();
        let flow = EdgeFlow::new(&path, vec![1.0; n]).unwrap();
        let b = flow_lower_bound(&path, &[0], &[n], &flow).unwrap();
        assert!((b.value - 1.0 / n as f64).abs() < 1e-15);
        let bad = EdgeFlow::new(&path, (0..n).map(|k| k as f64).collect()).unwrap();
        assert!(matches!(flow_lower_bound(&path, &[0], &[n], &bad), Err(Error::Conservation { .. })));
        let zero = EdgeFlow::new(&path, vec![0.0; n]).unwrap();
        assert!(matches!(flow_lower_bound(&path, &[0], &[n], &zero), Err(Error::ZeroFlux)));
    }

    #[test]
    fn equal_splitting_on_a_tree() {
        let depth = 6;
        let t = generate(FamilySpec::Tree { branching: 2, depth }, 1.0f64).unwrap();
        let leaves: Vec<usize> = (0..t.len()).filter(|&x| crate::generate::tree_depth(2, x as u64) == depth).collect();
        let flow = radial_flow(&t, &[0], &leaves).unwrap();
        let b = flow_lower_bound(&t, &[0], &leaves, &flow).unwrap();
        let exact = 1.0 / (1.0 - 2f64.powi(-(depth as i32)));
        assert!((b.value - exact).abs() < 1e-12);
    }

    #[test]
    fn current_flow_attains_the_capacity() {
        let g = generate(FamilySpec::Lattice { dim: 2, radius: 5 }, 1.0f64).unwrap();
        let ex = schedule_exhaustion(&g, 0, &[5]).unwrap();
        let (trunc, cap) = level_capacity(&g, 0, &ex.levels[0].interior, &SolverConfig::default())
            .unwrap()
            .unwrap();
        let dist = trunc.hop_distances(&[0]);
        let ring: Vec<usize> = (0..trunc.len()).filter(|&x| dist[x] == Some(5)).collect();
        let b = best_flow_bound(&trunc, &[0], &ring, Some(cap.optimizer.values())).unwrap();
        assert!(b.value <= cap.value * (1.0 + 1e-12));
        assert!(b.value >= cap.value * (1.0 - 1e-9));
    }

    #[test]
    fn zero_cap_certificate_on_bounded_potential() {
        let g = generate(FamilySpec::Path { len: 4 }, 1.0f64).unwrap();
        let f = Potential::new(vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let c = zero_cap_certificate(&g, &Measure::unit(5), &f, 5);
        assert!(c.partial_sums_hold);
        assert_eq!(&c.slice_norms[2..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn liminf_of_distance_on_z1() {
        let g = generate(FamilySpec::Lattice { dim: 1, radius: 10 }, 1.0f64).unwrap();
        let pts = crate::generate::lattice_points(1, 10);
        let f: Vec<f64> = pts.iter().map(|p| p[0].abs() as f64).collect();
        let ex = Exhaustion::balls(&g, 0, &[0, 1, 2, 3]).unwrap();
        let s = liminf_eval(&g, &f, LiminfTarget::Infinity(&ex)).unwrap();
        assert_eq!(s, vec![Some(1.0), Some(2.0), Some(3.0), Some(4.0)]);
        let s = liminf_eval(&g, &vec![2.5; g.len()], LiminfTarget::Infinity(&ex)).unwrap();
        assert!(s.iter().all(|v| *v == Some(2.5)));
    }

    #[test]
    fn fits_recover_exact_models() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&n| (n, 3.0 / n)).collect();
        let fits = fit_models(&pts);
        let p = fits.iter().find(|f| f.model == "power").unwrap();
        assert!((p.params[1] - 1.0).abs() < 1e-12 && p.rss < 1e-20);
        let s = fits.iter().find(|f| f.model == "saturating").unwrap();
        assert!(s.params[0].abs() < 1e-12);
    }

    #[test]
    fn finite_graph_is_inconclusive() {
        let g = WeightedGraph::from_edges([], [(0, 1, 1.0)]).unwrap();
        let v = classify_graph(&g, 0, &[1, 2, 3], &ClassifierConfig::default(), "edge".into()).unwrap();
        assert_eq!(v.classification, Classification::Inconclusive);
        assert!(v.notes.iter().any(|n| n.contains("exhausts")));
    }
}
