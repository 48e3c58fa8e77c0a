//! Circle packings, contact graphs and capacity decay at boundary points.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::NeighborhoodBasis;
use crate::energy::{bilinear_values, energy_value};
use crate::error::{Error, Result};
use crate::graph::{Exhaustion, Potential, VertexId, VertexSet, WeightedGraph};
use crate::io::{expect_fields, field, fmt_scalar, records, scalar};
use crate::metrics::{edge_load, DenseMetric, MetricObject};
use crate::scalar::{csum, Scalar};

/// Gaps within this multiple of the tangency tolerance are ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Disc<T> {
    pub id: VertexId,
    pub center: [T; 2],
    pub radius: T,
}

/// Closed discs with pairwise disjoint interiors, sorted by identifier.
#[derive(Clone, Debug, Serialize)]
pub struct CirclePacking<T> {
    discs: Vec<Disc<T>>,
    pub overlap_tol: T,
}

fn dist<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl<T: Scalar> CirclePacking<T> {
    /// Validates radii, identifiers and disjointness; `overlap_tol`
    /// defaults to `1e-9 · min r`.
    pub fn new(mut discs: Vec<Disc<T>>, overlap_tol: Option<T>) -> Result<Self> {
        if discs.is_empty() {
            return Err(Error::EmptySet("packing"));
        }
        for d in &discs {
            if !(d.radius > T::zero()) || !d.radius.is_finite() || !d.center[0].is_finite() || !d.center[1].is_finite() {
                return Err(Error::InvalidParameter(format!("disc {} must have finite center and positive radius", d.id)));
            }
        }
        discs.sort_by_key(|d| d.id);
        if let Some(w) = discs.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Duplicate(w[0].id));
        }
        let min_r = discs.iter().map(|d| d.radius).fold(T::infinity(), T::min);
        let tol = overlap_tol.unwrap_or(T::lit(1e-9) * min_r);
        let packing = Self { discs, overlap_tol: tol };
        let mut violation = None;
        packing.for_close_pairs(tol, |i, j, gap| {
            if violation.is_none() && gap < -tol {
                violation = Some((i, j, gap));
            }
        });
        if let Some((i, j, gap)) = violation {
            return Err(Error::Overlap {
                a: packing.discs[i].id,
                b: packing.discs[j].id,
                overlap: -gap.as_f64(),
            });
        }
        Ok(packing)
    }

    /// Calls `visit(i, j, gap)` for every pair with `gap <= slack`, where
    /// `gap = |c_i − c_j| − r_i − r_j`; sweeps in `x`.
    fn for_close_pairs(&self, slack: T, mut visit: impl FnMut(usize, usize, T)) {
        let mut order: Vec<usize> = (0..self.discs.len()).collect();
        order.sort_by(|&a, &b| self.discs[a].center[0].partial_cmp(&self.discs[b].center[0]).unwrap());
        let r_max = self.max_radius();
        for (k, &i) in order.iter().enumerate() {
            let di = &self.discs[i];
            let reach = di.center[0] + di.radius + r_max + slack;
            for &j in &order[k + 1..] {
                let dj = &self.discs[j];
                if dj.center[0] > reach {
                    break;
                }
                let gap = dist(di.center, dj.center) - di.radius - dj.radius;
                if gap <= slack {
                    visit(i.min(j), i.max(j), gap);
                }
            }
        }
    }

    pub fn discs(&self) -> &[Disc<T>] {
        &self.discs
    }

    pub fn len(&self) -> usize {
        self.discs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.discs.is_empty()
    }

    pub fn ids(&self) -> Vec<VertexId> {
        self.discs.iter().map(|d| d.id).collect()
    }

    pub fn centers(&self) -> Vec<[T; 2]> {
        self.discs.iter().map(|d| d.center).collect()
    }

    pub fn min_radius(&self) -> T {
        self.discs.iter().map(|d| d.radius).fold(T::infinity(), T::min)
    }

    pub fn max_radius(&self) -> T {
        self.discs.iter().map(|d| d.radius).fold(T::zero(), T::max)
    }

    /// `[x_min, y_min, x_max, y_max]` of the union of discs.
    pub fn bounding_box(&self) -> [T; 4] {
        let mut b = [T::infinity(), T::infinity(), T::neg_infinity(), T::neg_infinity()];
        for d in &self.discs {
            b[0] = b[0].min(d.center[0] - d.radius);
            b[1] = b[1].min(d.center[1] - d.radius);
            b[2] = b[2].max(d.center[0] + d.radius);
            b[3] = b[3].max(d.center[1] + d.radius);
        }
        b
    }

    /// Whether the union of discs is bounded; always the case for finite packings.
    pub fn is_bounded(&self) -> bool {
        self.bounding_box().iter().all(|v| v.is_finite())
    }

    /// Center and radius of a disk containing every disc, centered at
    /// the middle of the bounding box.
    pub fn bounding_disk(&self) -> ([T; 2], T) {
        let b = self.bounding_box();
        let half = T::lit(0.5);
        let c = [half * (b[0] + b[2]), half * (b[1] + b[3])];
        let r = self.discs.iter().map(|d| dist(c, d.center) + d.radius).fold(T::zero(), T::max);
        (c, r)
    }

    /// Index of the disc whose center is closest to `p`.
    pub fn nearest(&self, p: [T; 2]) -> usize {
        (0..self.discs.len())
            .min_by(|&a, &b| dist(self.discs[a].center, p).partial_cmp(&dist(self.discs[b].center, p)).unwrap())
            .expect("packing is nonempty")
    }

    /// Pairs with `|gap| <= tol`; a gap in `(tol, AMBIGUITY_FACTOR · tol]`
    /// is an error.
    pub fn tangent_pairs(&self, tol: T) -> Result<Vec<(usize, usize)>> {
        let band = tol * T::lit(AMBIGUITY_FACTOR);
        let mut pairs = Vec::new();
        let mut ambiguous = None;
        self.for_close_pairs(band, |i, j, gap| {
            if gap.abs() <= tol {
                pairs.push((i, j));
            } else if gap > tol && ambiguous.is_none() {
                ambiguous = Some((i, j, gap));
            }
        });
        if let Some((i, j, gap)) = ambiguous {
            return Err(Error::AmbiguousTangency {
                a: self.discs[i].id,
                b: self.discs[j].id,
                gap: gap.as_f64(),
            });
        }
        pairs.sort_unstable();
        Ok(pairs)
    }

    pub fn default_tangency_tol(&self) -> T {
        T::lit(1e-9) * self.min_radius()
    }
}

/// Parses lines `id x y r`.
pub fn parse_packing<T: Scalar>(text: &str) -> Result<CirclePacking<T>> {
    let mut discs = Vec::new();
    let mut seen = HashSet::new();
    for (line, fields) in records(text) {
        expect_fields(&fields, 4, line)?;
        let id: VertexId = field(&fields, 0, line, "disc id")?;
        if !seen.insert(id) {
            return Err(Error::Duplicate(id));
        }
        let x = scalar(&fields, 1, line, "x")?;
        let y = scalar(&fields, 2, line, "y")?;
        let radius: T = scalar(&fields, 3, line, "radius")?;
        if !(radius > T::zero()) {
            return Err(Error::Parse {
                line,
                msg: "radius must be positive".into(),
            });
        }
        discs.push(Disc { id, center: [x, y], radius });
    }
    CirclePacking::new(discs, None)
}

pub fn load_packing<T: Scalar>(path: impl AsRef<std::path::Path>) -> Result<CirclePacking<T>> {
    parse_packing(&std::fs::read_to_string(path)?)
}

pub fn write_packing<T: Scalar>(packing: &CirclePacking<T>) -> String {
    let mut out = String::new();
    for d in &packing.discs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            d.id,
            fmt_scalar(d.center[0]),
            fmt_scalar(d.center[1]),
            fmt_scalar(d.radius)
        );
    }
    out
}

#[derive(Clone, Debug)]
pub enum ContactWeights<T> {
    Unit,
    /// Explicit weights; every listed pair must be tangent.
    Custom(Vec<(VertexId, VertexId, T)>),
}

/// Graph with an edge between tangent discs; must be connected.
pub fn contact_graph<T: Scalar>(packing: &CirclePacking<T>, tangency_tol: Option<T>, weights: &ContactWeights<T>) -> Result<WeightedGraph<T>> {
    let tol = tangency_tol.unwrap_or_else(|| packing.default_tangency_tol());
    let pairs = packing.tangent_pairs(tol)?;
    let ids = packing.ids();
    let edges: Vec<(VertexId, VertexId, T)> = match weights {
        ContactWeights::Unit => pairs.iter().map(|&(i, j)| (ids[i], ids[j], T::one())).collect(),
        ContactWeights::Custom(list) => {
            let tangent: HashSet<(VertexId, VertexId)> = pairs.iter().map(|&(i, j)| (ids[i], ids[j])).collect();
            for &(u, v, _) in list {
                if !tangent.contains(&(u.min(v), u.max(v))) {
                    let (a, b) = (packing_index(packing, u)?, packing_index(packing, v)?);
                    let da = &packing.discs[a];
                    let db = &packing.discs[b];
                    return Err(Error::NotSubordinate {
                        u,
                        v,
                        gap: (dist(da.center, db.center) - da.radius - db.radius).as_f64(),
                    });
                }
            }
            list.clone()
        }
    };
    let graph = WeightedGraph::from_edges(ids, edges)?;
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(graph)
}

fn packing_index<T: Scalar>(packing: &CirclePacking<T>, id: VertexId) -> Result<usize> {
    packing.discs.binary_search_by_key(&id, |d| d.id).map_err(|_| Error::UnknownVertex(id))
}

/// Hexagonal penny packing of radius `ρ` with centers in `|c| <= 1 − ρ`,
/// for `0 < ρ < 1/2`.
pub fn hex_packing<T: Scalar>(rho: T) -> Result<CirclePacking<T>> {
    if !(rho > T::zero() && rho < T::lit(0.5)) {
        return Err(Error::InvalidParameter(format!("disc radius {rho} outside (0, 1/2)")));
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let row_height = rho * T::lit(3.0).sqrt();
    let limit = T::one() - rho;
    let span = (limit / row_height).ceil().to_i64().unwrap_or(0) + 1;
    let mut discs = Vec::new();
    for j in -span..=span {
        let shift = if j.rem_euclid(2) == 1 { half } else { T::zero() };
        let y = T::lit(j as f64) * row_height;
        for i in -2 * span..=2 * span {
            let x = two * rho * (T::lit(i as f64) + shift);
            if x.hypot(y) <= limit {
                discs.push(Disc {
                    id: discs.len() as VertexId,
                    center: [x, y],
                    radius: rho,
                });
            }
        }
    }
    CirclePacking::new(discs, None)
}

/// Image under inversion in the circle `|z − c| = R`: a disc `(p, r)`
/// maps to center `c + R²(p − c)/(d² − r²)`, radius `R² r/(d² − r²)`
/// with `d = |p − c|`. Tangencies are checked to survive.
pub fn invert_packing<T: Scalar>(packing: &CirclePacking<T>, center: [T; 2], radius: T) -> Result<CirclePacking<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidParameter("inversion radius must be positive".into()));
    }
    let r2 = radius * radius;
    let mut discs = Vec::with_capacity(packing.len());
    for d in &packing.discs {
        let dx = d.center[0] - center[0];
        let dy = d.center[1] - center[1];
        let denom = dx * dx + dy * dy - d.radius * d.radius;
        if !(denom > T::zero()) {
            return Err(Error::PointInsideDisc {
                id: d.id,
                x: center[0].as_f64(),
                y: center[1].as_f64(),
            });
        }
        let s = r2 / denom;
        discs.push(Disc {
            id: d.id,
            center: [center[0] + s * dx, center[1] + s * dy],
            radius: s * d.radius,
        });
    }
    let image = CirclePacking::new(discs, None)?;
    let before = packing.tangent_pairs(packing.default_tangency_tol())?;
    let after = image.tangent_pairs(image.default_tangency_tol())?;
    if before != after {
        return Err(Error::Invariant("inversion changed the contact graph".into()));
    }
    Ok(image)
}

/// `σ(x,y) = |φ(x) − φ(y)|`, `m = m_σ` and the bounds on `m(X)`.
#[derive(Clone, Debug, Serialize)]
pub struct PackingMetric<T> {
    /// `σ` on the edges of the graph.
    pub edge_sigma: Vec<T>,
    /// `m_σ(x) = ½ Σ_y b(x,y) σ(x,y)²`.
    pub m: Vec<T>,
    /// Largest weighted degree.
    pub omega: T,
    pub total: T,
    /// `(2Ω/π) · area of the bounding disk`.
    pub area_bound: T,
    /// `max |σ(x,y) − r(x) − r(y)|` over edges.
    pub tangency_defect: T,
}

impl<T: Scalar> PackingMetric<T> {
    /// Dense `σ` on all pairs (small packings only).
    pub fn sigma(&self, packing: &CirclePacking<T>) -> Result<DenseMetric<T>> {
        DenseMetric::euclidean(packing.ids(), &packing.centers())
    }
}

pub fn packing_metric_measure<T: Scalar>(packing: &CirclePacking<T>, graph: &WeightedGraph<T>) -> Result<PackingMetric<T>> {
    if graph.ids() != packing.ids().as_slice() {
        return Err(Error::InvalidParameter("graph vertices differ from the packing".into()));
    }
    let tol = packing.default_tangency_tol();
    let mut edge_sigma = Vec::with_capacity(graph.edge_count());
    let mut defect = T::zero();
    for &(i, j, _) in graph.edges() {
        let (a, b) = (&packing.discs[i], &packing.discs[j]);
        let s = dist(a.center, b.center);
        let gap = s - a.radius - b.radius;
        if gap.abs() > tol {
            return Err(Error::NotSubordinate {
                u: a.id,
                v: b.id,
                gap: gap.as_f64(),
            });
        }
        defect = defect.max(gap.abs());
        edge_sigma.push(s);
    }
    let m = edge_load(graph, &edge_sigma);
    let omega = graph.max_degree();
    let (_, r) = packing.bounding_disk();
    let area = T::lit(std::f64::consts::PI) * r * r;
    Ok(PackingMetric {
        total: csum(m.iter().copied()),
        area_bound: T::lit(2.0) * omega / T::lit(std::f64::consts::PI) * area,
        omega,
        m,
        edge_sigma,
        tangency_defect: defect,
    })
}

/// Exhaustion by the discs with centers in `|c − origin| <= R_k`.
pub fn euclidean_exhaustion<T: Scalar>(
    packing: &CirclePacking<T>,
    graph: &WeightedGraph<T>,
    origin: [T; 2],
    radii: &[T],
) -> Result<Exhaustion> {
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("radii must increase".into()));
    }
    let seed = packing.discs[packing.nearest(origin)].id;
    let sets: Vec<VertexSet> = radii
        .iter()
        .map(|&r| packing.discs.iter().filter(|d| dist(d.center, origin) <= r).map(|d| d.id).collect())
        .collect();
    if sets.first().is_none_or(|s| !s.contains(&seed)) {
        return Err(Error::InvalidParameter("first level must contain the disc nearest the origin".into()));
    }
    Exhaustion::from_sets(graph, seed, sets)
}

/// `levels` Euclidean balls around the origin, evenly spaced up to the
/// farthest disc of full degree `Ω`; the ring of the last level is the
/// outer layer of the packing.
pub fn layered_exhaustion<T: Scalar>(packing: &CirclePacking<T>, graph: &WeightedGraph<T>, origin: [T; 2], levels: usize) -> Result<Exhaustion> {
    if levels == 0 {
        return Err(Error::InvalidParameter("at least one level is needed".into()));
    }
    let omega = graph.max_degree();
    let outer = (0..packing.len())
        .filter(|&x| graph.degree(x) == omega)
        .map(|x| dist(packing.discs[x].center, origin))
        .fold(T::zero(), T::max);
    let k = T::from_usize_lossy(levels);
    let radii: Vec<T> = (1..=levels).map(|j| outer * T::from_usize_lossy(j) / k).collect();
    euclidean_exhaustion(packing, graph, origin, &radii)
}

/// A Euclidean point not interior to any disc.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryAnchor<T> {
    pub w: [T; 2],
}

impl<T: Scalar> BoundaryAnchor<T> {
    pub fn new(packing: &CirclePacking<T>, w: [T; 2]) -> Result<Self> {
        if let Some(d) = packing.discs.iter().find(|d| dist(d.center, w) < d.radius) {
            return Err(Error::PointInsideDisc {
                id: d.id,
                x: w[0].as_f64(),
                y: w[1].as_f64(),
            });
        }
        Ok(Self { w })
    }

    /// `U_k = {x : |φ(x) − w| < ρ_k}`.
    pub fn basis(&self, packing: &CirclePacking<T>, radii: &[T]) -> Result<NeighborhoodBasis> {
        NeighborhoodBasis::euclidean(&packing.centers(), self.w, radii)
    }

    /// Distance from `w` to the nearest center.
    pub fn nearest_distance(&self, packing: &CirclePacking<T>) -> T {
        packing.discs.iter().map(|d| dist(d.center, self.w)).fold(T::infinity(), T::min)
    }

    /// Indices with `|φ(x) − w| <= r`.
    pub fn closed_ball(&self, packing: &CirclePacking<T>, r: T) -> Vec<usize> {
        (0..packing.len()).filter(|&i| dist(packing.discs[i].center, self.w) <= r).collect()
    }
}

/// `k` points evenly spaced on the unit circle, starting at `(1, 0)`.
pub fn circle_anchors<T: Scalar>(k: usize) -> Vec<[T; 2]> {
    (0..k)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / k as f64;
            [T::lit(t.cos()), T::lit(t.sin())]
        })
        .collect()
}

/// `f_r(x) = (2 − |φ(x) − w|/r)_+ ∧ 1`.
pub fn bump<T: Scalar>(packing: &CirclePacking<T>, w: [T; 2], r: T) -> Potential<T> {
    let two = T::lit(2.0);
    Potential::new(
        packing
            .discs
            .iter()
            .map(|d| (two - dist(d.center, w) / r).max(T::zero()).min(T::one()))
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScaleSchedule<T> {
    /// `r_k = r_1 · ratio^{k−1}`.
    Geometric { r1: T, ratio: T },
    /// Geometric from `r1` down to the distance of the nearest center,
    /// so that the innermost ball holds exactly the closest discs.
    Fitted { r1: T },
}

impl<T: Scalar> ScaleSchedule<T> {
    pub fn halving(r1: T) -> Self {
        ScaleSchedule::Geometric { r1, ratio: T::lit(0.5) }
    }

    pub fn scales(&self, packing: &CirclePacking<T>, anchor: &BoundaryAnchor<T>, n: usize) -> Result<Vec<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("at least one scale is needed".into()));
        }
        let (r1, ratio, last) = match *self {
            ScaleSchedule::Geometric { r1, ratio } => (r1, ratio, None),
            ScaleSchedule::Fitted { r1 } => {
                let d = anchor.nearest_distance(packing);
                let ratio = if n == 1 {
                    T::one()
                } else {
                    (d / r1).powf(T::one() / T::from_usize_lossy(n - 1))
                };
                (r1, ratio, Some(d))
            }
        };
        if !(r1 > T::zero() && ratio > T::zero() && (n == 1 || ratio < T::one())) {
            return Err(Error::InvalidParameter(format!("scales must decrease from a positive r1 (ratio {ratio})")));
        }
        let mut out: Vec<T> = (0..n).map(|k| r1 * ratio.powi(k as i32)).collect();
        if let Some(d) = last {
            out[n - 1] = d;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScaleEntry<T> {
    pub r: T,
    /// `Q(f_r)`
    pub qf: T,
    /// `‖f_r‖²_m`
    pub mf: T,
    /// Vertices with `|φ(x) − w| <= r`.
    pub inner: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroEntry<T> {
    pub n: usize,
    /// `‖g_n‖²_{Q,m}` after rescaling.
    pub value: T,
    /// `1 / min g_n` over the innermost ball.
    pub rescale: T,
    pub low_confidence: bool,
    /// `(1/n²)(Σ_k ‖f_{r_k}‖_{Q,m})²`, before rescaling.
    pub triangle_bound: T,
    pub within_triangle_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CesaroReport<T> {
    pub anchor: [T; 2],
    pub scales: Vec<T>,
    pub per_scale: Vec<ScaleEntry<T>>,
    pub cesaro: Vec<CesaroEntry<T>>,
    /// `⟨f_{r_j}, f_{r_k}⟩_{Q,m}`.
    pub cross_terms: Vec<Vec<T>>,
    /// First scale whose ball holds no vertex, if any.
    pub truncated_at: Option<usize>,
}

/// Capacity upper bounds at `w` from `g_n = (1/n) Σ_{k<=n} f_{r_k}`.
pub fn cesaro_boundary_capacity<T: Scalar>(
    packing: &CirclePacking<T>,
    graph: &WeightedGraph<T>,
    m: &[T],
    anchor: &BoundaryAnchor<T>,
    scales: &[T],
) -> Result<CesaroReport<T>> {
    if scales.is_empty() || scales.windows(2).any(|w| !(w[1] < w[0])) || !(scales[scales.len() - 1] > T::zero()) {
        return Err(Error::InvalidParameter("scales must be positive and strictly decreasing".into()));
    }
    if m.len() != graph.len() || graph.len() != packing.len() {
        return Err(Error::InvalidParameter("measure, graph and packing sizes differ".into()));
    }
    let inner: Vec<Vec<usize>> = scales.iter().map(|&r| anchor.closed_ball(packing, r)).collect();
    let truncated_at = inner.iter().position(|b| b.is_empty());
    let depth = truncated_at.unwrap_or(scales.len());
    let bumps: Vec<Potential<T>> = scales[..depth].iter().map(|&r| bump(packing, anchor.w, r)).collect();
    let inner_product = |a: &[T], b: &[T]| bilinear_values(graph, a, b) + csum(m.iter().zip(a.iter().zip(b)).map(|(&w, (&x, &y))| w * x * y));
    let cross_terms: Vec<Vec<T>> = bumps
        .iter()
        .map(|a| bumps.iter().map(|b| inner_product(a.values(), b.values())).collect())
        .collect();
    let per_scale: Vec<ScaleEntry<T>> = bumps
        .iter()
        .zip(scales)
        .zip(&inner)
        .map(|((f, &r), ball)| ScaleEntry {
            r,
            qf: energy_value(graph, f.values()),
            mf: csum(m.iter().zip(f.values()).map(|(&w, &v)| w * v * v)),
            inner: ball.len(),
        })
        .collect();
    let mut cesaro = Vec::with_capacity(depth);
    let mut sum = vec![T::zero(); packing.len()];
    let mut norm_sum = T::zero();
    for n in 1..=depth {
        for (s, v) in sum.iter_mut().zip(bumps[n - 1].values()) {
            *s += *v;
        }
        norm_sum += cross_terms[n - 1][n - 1].sqrt();
        let nn = T::from_usize_lossy(n);
        let g: Vec<T> = sum.iter().map(|&s| s / nn).collect();
        let raw = energy_value(graph, &g) + csum(m.iter().zip(&g).map(|(&w, &v)| w * v * v));
        let min_inner = inner[n - 1].iter().map(|&x| g[x]).fold(T::infinity(), T::min);
        let rescale = T::one() / min_inner;
        let triangle_bound = norm_sum * norm_sum / (nn * nn);
        cesaro.push(CesaroEntry {
            n,
            value: raw * rescale * rescale,
            rescale,
            low_confidence: min_inner < T::lit(0.5),
            within_triangle_bound: raw <= triangle_bound * (T::one() + T::tol(1e-12)),
            triangle_bound,
        });
    }
    Ok(CesaroReport {
        anchor: anchor.w,
        scales: scales.to_vec(),
        per_scale,
        cesaro,
        cross_terms,
        truncated_at,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorVerdict {
    Decaying,
    NotDecaying,
    /// Fewer than two populated scales.
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnchorReport<T> {
    pub anchor: [T; 2],
    pub verdict: AnchorVerdict,
    pub report: Option<CesaroReport<T>>,
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolvabilityConfig<T> {
    pub schedule: ScaleSchedule<T>,
    pub depth: usize,
    /// Decaying requires `last <= decay_ratio · first`.
    pub decay_ratio: f64,
    pub omega_cap: f64,
}

impl<T: Scalar> Default for ResolvabilityConfig<T> {
    fn default() -> Self {
        Self {
            schedule: ScaleSchedule::Fitted { r1: T::one() },
            depth: 8,
            decay_ratio: 0.5,
            omega_cap: 1e6,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolvabilityReport<T> {
    pub anchors: Vec<AnchorReport<T>>,
    pub omega: T,
    pub bounded_geometry: bool,
    pub consistent_with_strong_resolvability: bool,
    pub note: &'static str,
}

/// Decay test: last entry at most `ratio` times the first and at least
/// as many decreasing steps as increasing ones.
pub fn is_decaying<T: Scalar>(values: &[T], ratio: f64) -> bool {
    if values.len() < 2 {
        return false;
    }
    let down = values.windows(2).filter(|w| w[1] < w[0]).count();
    let up = values.windows(2).filter(|w| w[1] > w[0]).count();
    values[values.len() - 1] <= T::lit(ratio) * values[0] && down >= up
}

pub fn resolvability_report<T: Scalar>(
    packing: &CirclePacking<T>,
    graph: &WeightedGraph<T>,
    anchors: &[[T; 2]],
    config: &ResolvabilityConfig<T>,
) -> Result<ResolvabilityReport<T>> {
    let metric = packing_metric_measure(packing, graph)?;
    let anchors: Vec<AnchorReport<T>> = anchors
        .par_iter()
        .map(|&w| {
            let anchor = BoundaryAnchor::new(packing, w)?;
            let scales = match config.schedule.scales(packing, &anchor, config.depth) {
                Ok(s) => s,
                Err(e) => {
                    return Ok(AnchorReport {
                        anchor: w,
                        verdict: AnchorVerdict::Degenerate,
                        report: None,
                        note: Some(e.to_string()),
                    })
                }
            };
            let report = cesaro_boundary_capacity(packing, graph, &metric.m, &anchor, &scales)?;
            let values: Vec<T> = report.cesaro.iter().map(|c| c.value).collect();
            let verdict = if values.len() < 2 {
                AnchorVerdict::Degenerate
            } else if is_decaying(&values, config.decay_ratio) {
                AnchorVerdict::Decaying
            } else {
                AnchorVerdict::NotDecaying
            };
            let note = report
                .truncated_at
                .map(|k| format!("no vertex within scale {} (index {k}); sequence truncated", scales[k]));
            Ok(AnchorReport {
                anchor: w,
                verdict,
                report: Some(report),
                note,
            })
        })
        .collect::<Result<_>>()?;
    let bounded_geometry = metric.omega.as_f64() <= config.omega_cap;
    Ok(ResolvabilityReport {
        consistent_with_strong_resolvability: bounded_geometry && anchors.iter().all(|a| a.verdict == AnchorVerdict::Decaying),
        anchors,
        omega: metric.omega,
        bounded_geometry,
        note: "evidence on sampled anchors only",
    })
}

/// The packing metric as a [`MetricObject`] (small packings only).
pub fn packing_sigma<T: Scalar>(packing: &CirclePacking<T>) -> Result<MetricObject<'static, T>> {
    Ok(MetricObject::Explicit(DenseMetric::euclidean(packing.ids(), &packing.centers())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::is_intrinsic;

    fn discs(spec: &[(f64, f64, f64)]) -> Vec<Disc<f64>> {
        spec.iter()
            .enumerate()
            .map(|(i, &(x, y, r))| Disc {
                id: i as VertexId,
                center: [x, y],
                radius: r,
            })
            .collect()
    }

    fn triangle() -> CirclePacking<f64> {
        CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (2.0, 0.0, 1.0), (1.0, 3f64.sqrt(), 1.0)]), None).unwrap()
    }

    #[test]
    fn validation() {
        assert!(CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (2.0, 0.0, 1.0)]), None).is_ok());
        assert!(matches!(
            CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (1.0, 0.0, 1.0)]), None),
            Err(Error::Overlap { .. })
        ));
        assert!(matches!(parse_packing::<f64>("0 0 0 1\n0 2 0 1\n"), Err(Error::Duplicate(0))));
        let p: CirclePacking<f64> = parse_packing("# id x y r\n3\t0\t0\t1\n7\t2\t0\t1\n").unwrap();
        assert_eq!(p.ids(), vec![3, 7]);
        let again: CirclePacking<f64> = parse_packing(&write_packing(&p)).unwrap();
        assert_eq!(again.discs(), p.discs());
    }

    #[test]
    fn triangle_contact_graph_and_measure() {
        let p = triangle();
        let g = contact_graph(&p, None, &ContactWeights::Unit).unwrap();
        assert_eq!(g.edge_count(), 3);
        let pm = packing_metric_measure(&p, &g).unwrap();
        for &m in &pm.m {
            assert!((m - 4.0).abs() < 1e-12);
        }
        let sigma = MetricObject::Explicit(pm.sigma(&p).unwrap());
        let rep = is_intrinsic(&g, &sigma, &pm.m);
        assert!(rep.slack.iter().all(|s| *s == 0.0));
        assert!(pm.total <= pm.area_bound);
    }

    #[test]
    fn chain_is_a_path_and_gaps_are_checked() {
        let p = CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (2.0, 0.0, 1.0), (4.0, 0.0, 1.0)]), None).unwrap();
        let g = contact_graph(&p, None, &ContactWeights::Unit).unwrap();
        assert_eq!(g.edge_count(), 2);
        let near = CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (2.0 + 1e-7, 0.0, 1.0)]), None).unwrap();
        assert!(matches!(contact_graph(&near, None, &ContactWeights::Unit), Err(Error::AmbiguousTangency { .. })));
        let apart = CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (3.0, 0.0, 1.0)]), None).unwrap();
        assert!(matches!(contact_graph(&apart, None, &ContactWeights::Unit), Err(Error::Disconnected { .. })));
        let custom = ContactWeights::Custom(vec![(0, 2, 1.0)]);
        assert!(matches!(contact_graph(&p, None, &custom), Err(Error::NotSubordinate { .. })));
    }

    #[test]
    fn hex_counts() {
        assert_eq!(hex_packing(0.3f64).unwrap().len(), 7);
        let n = hex_packing(0.05f64).unwrap().len() as f64;
        assert!((n - 326.0).abs() <= 32.6, "{n}");
        assert!(hex_packing(0.5f64).is_err());
        assert!(hex_packing(0.0f64).is_err());
        let p = hex_packing(0.1f64).unwrap();
        let g = contact_graph(&p, None, &ContactWeights::Unit).unwrap();
        assert!(g.max_degree() <= 6.0);
    }

    #[test]
    fn inversion() {
        let p = CirclePacking::new(discs(&[(3.0, 0.0, 1.0)]), None).unwrap();
        let q = invert_packing(&p, [0.0, 0.0], 1.0).unwrap();
        let d = q.discs()[0];
        assert!((d.center[0] - 0.375).abs() < 1e-15 && d.center[1] == 0.0);
        assert!((d.radius - 0.125).abs() < 1e-15);
        // the image disc passes through the images of boundary points
        for (x, y) in [(2.0, 0.0), (4.0, 0.0), (3.0, 1.0)] {
            let s = 1.0 / (x * x + y * y);
            assert!(((s * x - d.center[0]).hypot(s * y - d.center[1]) - d.radius).abs() < 1e-15);
        }
        let pair = CirclePacking::new(discs(&[(3.0, 0.0, 1.0), (5.0, 0.0, 1.0), (4.0, 3f64.sqrt(), 1.0)]), None).unwrap();
        let img = invert_packing(&pair, [0.0, 0.0], 1.0).unwrap();
        for d in img.discs() {
            assert!(dist(d.center, [0.0, 0.0]) + d.radius <= 1.0);
        }
        assert_eq!(contact_graph(&img, None, &ContactWeights::Unit).unwrap().edge_count(), 3);
        assert!(invert_packing(&pair, [3.0, 0.5], 1.0).is_err());
    }

    #[test]
    fn bump_values() {
        let p = CirclePacking::new(discs(&[(0.5, 0.0, 0.1), (1.5, 0.0, 0.1), (3.0, 0.0, 0.1)]), None).unwrap();
        let f = bump(&p, [0.0, 0.0], 1.0);
        assert_eq!(f.values(), &[1.0, 0.5, 0.0]);
    }

    #[test]
    fn anchors_inside_discs_are_rejected() {
        let p = triangle();
        assert!(BoundaryAnchor::new(&p, [0.5, 0.0]).is_err());
        assert!(BoundaryAnchor::new(&p, [1.0, 0.0]).is_ok());
    }

    #[test]
    fn tiny_packing_is_degenerate() {
        let p = CirclePacking::new(discs(&[(0.0, 0.0, 1.0), (2.0, 0.0, 1.0)]), None).unwrap();
        let g = contact_graph(&p, None, &ContactWeights::Unit).unwrap();
        let config = ResolvabilityConfig {
            schedule: ScaleSchedule::halving(1.0),
            ..Default::default()
        };
        let rep = resolvability_report(&p, &g, &[[1.0, 0.0]], &config).unwrap();
        assert_eq!(rep.anchors[0].verdict, AnchorVerdict::Degenerate);
        assert_eq!(rep.anchors[0].report.as_ref().unwrap().truncated_at, Some(1));
        assert!(!rep.consistent_with_strong_resolvability);
    }
}
