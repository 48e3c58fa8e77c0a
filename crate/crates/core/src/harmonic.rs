//! Laplacian, harmonic extension and the Royden split on truncations.
//!
//! Sign convention: `Δf(x) = f(x) − (1/deg x) Σ_y b(x,y) f(y)`, so `f` is
//! superharmonic at `x` iff `Δf(x) >= 0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::solve_dirichlet;
use crate::energy::{bilinear_values, energy_value};
use crate::error::{Error, Result};
use crate::graph::{induced_truncation, Exhaustion, Potential, VertexId, VertexSet, WeightedGraph};
use crate::linalg::{symmetric_eigenvalues, SolverConfig};
use crate::metrics::MetricObject;
use crate::scalar::{csum, Scalar};

#[derive(Clone, Copy, Debug)]
pub enum Normalization<'a, T> {
    Degree,
    /// `Δ_m f(x) = (1/m(x)) Σ_y b(x,y)(f(x) − f(y))`.
    Measure(&'a [T]),
}

pub fn laplacian_apply<T: Scalar>(graph: &WeightedGraph<T>, f: &Potential<T>, normalization: Normalization<'_, T>) -> Potential<T> {
    let fv = f.values();
    Potential::new(
        (0..graph.len())
            .map(|x| {
                let flux = csum(graph.neighbors(x).map(|(y, b)| b * (fv[x] - fv[y])));
                let scale = match normalization {
                    Normalization::Degree => graph.degree(x),
                    Normalization::Measure(m) => m[x],
                };
                if scale > T::zero() {
                    flux / scale
                } else {
                    T::zero()
                }
            })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Harmonicity {
    Harmonic,
    Superharmonic,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicityReport<T> {
    pub class: Harmonicity,
    /// `max |Δf|` over the interior.
    pub max_residual: T,
    pub min_laplacian: T,
    pub max_laplacian: T,
}

/// Classifies `f` on `interior` by the sign of `Δf` (degree normalization).
pub fn harmonicity_check<T: Scalar>(graph: &WeightedGraph<T>, f: &Potential<T>, interior: &[usize], tol: T) -> HarmonicityReport<T> {
    let lap = laplacian_apply(graph, f, Normalization::Degree);
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for &x in interior {
        lo = lo.min(lap.get(x));
        hi = hi.max(lap.get(x));
    }
    if interior.is_empty() {
        lo = T::zero();
        hi = T::zero();
    }
    let max_residual = lo.abs().max(hi.abs());
    let class = if max_residual <= tol {
        Harmonicity::Harmonic
    } else if lo >= -tol {
        Harmonicity::Superharmonic
    } else {
        Harmonicity::Neither
    };
    HarmonicityReport {
        class,
        max_residual,
        min_laplacian: lo,
        max_laplacian: hi,
    }
}

/// Harmonic extension of `g` (indexed by vertex, `None` off the boundary).
/// The maximum principle is asserted on the result.
pub fn harmonic_extension_idx<T: Scalar>(graph: &WeightedGraph<T>, g: &[Option<T>], config: &SolverConfig) -> Result<Potential<T>> {
    let sol = solve_dirichlet(graph, g, None, config)?;
    let (lo, hi) = g
        .iter()
        .flatten()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let slack = T::tol(1e-8) * (lo.abs().max(hi.abs()).max(T::one()));
    if let Some(v) = sol.values.iter().find(|v| **v < lo - slack || **v > hi + slack) {
        return Err(Error::Invariant(format!("maximum principle violated: {v} outside [{lo}, {hi}]")));
    }
    Ok(Potential::new(sol.values))
}

/// Harmonic extension of boundary data given by vertex identifier.
pub fn harmonic_extension<T: Scalar>(
    graph: &WeightedGraph<T>,
    boundary: &[(VertexId, T)],
    config: &SolverConfig,
) -> Result<Potential<T>> {
    if boundary.is_empty() {
        return Err(Error::EmptySet("boundary"));
    }
    let mut g = vec![None; graph.len()];
    for &(id, v) in boundary {
        g[graph.require(id)?] = Some(v);
    }
    harmonic_extension_idx(graph, &g, config)
}

/// `f = f_0 + f_h` on one truncation.
#[derive(Clone, Debug, Serialize)]
pub struct RoydenSplit<T> {
    #[serde(skip)]
    pub f0: Potential<T>,
    #[serde(skip)]
    pub fh: Potential<T>,
    pub level: usize,
    /// Empty ring: `f_0 = f`, `f_h = 0`.
    pub degenerate: bool,
    pub q: T,
    pub q0: T,
    pub qh: T,
    /// `Q(f_0, f_h)`.
    pub cross: T,
    /// `max |Δf_h|` over the interior.
    pub harmonic_residual: T,
}

impl<T: Scalar> RoydenSplit<T> {
    /// `|Q(f) − Q(f_0) − Q(f_h)| / Q(f)`, zero when `Q(f) = 0`.
    pub fn orthogonality_defect(&self) -> T {
        let d = (self.q - self.q0 - self.qh).abs();
        if self.q > T::zero() {
            d / self.q
        } else {
            d
        }
    }
}

/// Splits `f` on `graph` with `f_h` the harmonic extension of `f|_ring`.
/// Vertices outside `ring` are the interior.
pub fn royden_split<T: Scalar>(
    graph: &WeightedGraph<T>,
    ring: &[bool],
    f: &Potential<T>,
    level: usize,
    config: &SolverConfig,
) -> Result<RoydenSplit<T>> {
    if ring.len() != graph.len() || f.len() != graph.len() {
        return Err(Error::InvalidParameter("ring or potential does not match graph".into()));
    }
    let interior: Vec<usize> = (0..graph.len()).filter(|&x| !ring[x]).collect();
    let q = energy_value(graph, f.values());
    if interior.len() == graph.len() {
        return Ok(RoydenSplit {
            f0: f.clone(),
            fh: Potential::zeros(graph.len()),
            level,
            degenerate: true,
            q,
            q0: q,
            qh: T::zero(),
            cross: T::zero(),
            harmonic_residual: T::zero(),
        });
    }
    let g: Vec<Option<T>> = (0..graph.len()).map(|x| ring[x].then(|| f.get(x))).collect();
    let fh = harmonic_extension_idx(graph, &g, config)?;
    let f0 = f.zip_with(&fh, |a, b| a - b);
    let harmonic_residual = harmonicity_check(graph, &fh, &interior, T::zero()).max_residual;
    Ok(RoydenSplit {
        level,
        degenerate: false,
        q,
        q0: energy_value(graph, f0.values()),
        qh: energy_value(graph, fh.values()),
        cross: bilinear_values(graph, f0.values(), fh.values()),
        harmonic_residual,
        f0,
        fh,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RoydenLevel<T> {
    pub n: usize,
    pub vertices: usize,
    pub degenerate: bool,
    pub qh: T,
    /// `max |f_h^{(n)} − f_h^{(n−1)}|` on the window.
    pub sup_diff: Option<T>,
    /// `|Q(f_h^{(n)}) − Q(f_h^{(n−1)})|`.
    pub energy_diff: Option<T>,
    /// `max − min` of `f_h^{(n)}` on the window.
    pub window_oscillation: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoydenLimitReport<T> {
    pub levels: Vec<RoydenLevel<T>>,
    pub tol: f64,
    pub stabilized: bool,
    /// Not stabilized while the window oscillation keeps shrinking: the
    /// harmonic parts drift toward constants.
    pub drifts_to_constant: bool,
    /// Final `f_h` on the window.
    pub window: Vec<(VertexId, T)>,
    #[serde(skip)]
    pub last: Option<(WeightedGraph<T>, RoydenSplit<T>)>,
}

/// Royden splits on every level of `exhaustion` and their convergence on
/// a fixed window; stabilized when the last sup and energy differences
/// are both below `tol`.
pub fn royden_limit<T: Scalar>(
    graph: &WeightedGraph<T>,
    exhaustion: &Exhaustion,
    f: &Potential<T>,
    window: &VertexSet,
    tol: f64,
    config: &SolverConfig,
) -> Result<RoydenLimitReport<T>> {
    if f.len() != graph.len() {
        return Err(Error::InvalidParameter("potential does not match graph".into()));
    }
    if window.is_empty() {
        return Err(Error::EmptySet("observation window"));
    }
    let splits: Vec<(WeightedGraph<T>, RoydenSplit<T>)> = exhaustion
        .levels
        .par_iter()
        .map(|level| {
            let trunc = induced_truncation(graph, &level.interior)?;
            let local = f.transfer(graph, &trunc.graph, T::zero());
            let split = royden_split(&trunc.graph, &trunc.ring_mask(), &local, level.radius, config)?;
            Ok((trunc.graph, split))
        })
        .collect::<Result<_>>()?;

    let mut levels = Vec::with_capacity(splits.len());
    let mut prev: Option<(Vec<T>, T)> = None;
    for (g, split) in &splits {
        let on_window = window
            .iter()
            .map(|&id| {
                g.index_of(id)
                    .map(|i| split.fh.get(i))
                    .ok_or(Error::InvalidParameter(format!("window vertex {id} missing at level {}", split.level)))
            })
            .collect::<Result<Vec<T>>>()?;
        let (lo, hi) = on_window
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let (sup_diff, energy_diff) = match &prev {
            Some((w, q)) => (
                Some(on_window.iter().zip(w).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))),
                Some((split.qh - *q).abs()),
            ),
            None => (None, None),
        };
        levels.push(RoydenLevel {
            n: split.level,
            vertices: g.len(),
            degenerate: split.degenerate,
            qh: split.qh,
            sup_diff,
            energy_diff,
            window_oscillation: hi - lo,
        });
        prev = Some((on_window, split.qh));
    }
    let t = T::lit(tol);
    let stabilized = levels
        .last()
        .is_some_and(|l| l.sup_diff.is_some_and(|s| s < t) && l.energy_diff.is_some_and(|e| e < t));
    let drifts_to_constant = !stabilized
        && levels.len() >= 2
        && levels.windows(2).all(|w| w[1].window_oscillation < w[0].window_oscillation);
    let last = splits.into_iter().last();
    let window = match (&last, &prev) {
        (Some(_), Some((w, _))) => window.iter().copied().zip(w.iter().copied()).collect(),
        _ => Vec::new(),
    };
    Ok(RoydenLimitReport {
        levels,
        tol,
        stabilized,
        drifts_to_constant,
        window,
        last,
    })
}

/// Prescribed value on a boundary region, given as the finest set of a
/// neighborhood basis.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryTarget<T> {
    pub label: String,
    pub value: T,
    pub region: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzCertificate<T> {
    pub lipschitz: T,
    /// `Q(f)` of the extension.
    pub energy: T,
    /// `L² m(X)`.
    pub bound: T,
    pub holds: bool,
    /// `|f(x) − f(y)| <= L σ(x, y)` on all pairs.
    pub pairwise: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PhiHarmonic<T> {
    #[serde(skip)]
    pub extension: Potential<T>,
    pub certificate: LipschitzCertificate<T>,
    pub report: RoydenLimitReport<T>,
}

impl<T: Scalar> PhiHarmonic<T> {
    /// Graph and harmonic part of the last level.
    pub fn harmonic(&self) -> Option<(&WeightedGraph<T>, &Potential<T>)> {
        self.report.last.as_ref().map(|(g, s)| (g, &s.fh))
    }
}

/// `f(x) = min_j (φ_j + L σ(x, T_j))`; errors when the data violate
/// `|φ_i − φ_j| <= L σ(T_i, T_j)`. With `lipschitz = None` the smallest
/// consistent constant is used.
pub fn lipschitz_extension<T: Scalar>(
    sigma: &MetricObject<'_, T>,
    targets: &[BoundaryTarget<T>],
    lipschitz: Option<T>,
) -> Result<(Potential<T>, T)> {
    if targets.is_empty() {
        return Err(Error::EmptySet("boundary targets"));
    }
    if let Some(t) = targets.iter().find(|t| t.region.is_empty()) {
        return Err(Error::InvalidParameter(format!("target {} has an empty region", t.label)));
    }
    let dist: Vec<Vec<T>> = targets.iter().map(|t| sigma.distance_to_set(&t.region)).collect();
    let mut required = T::zero();
    let mut pairs = Vec::new();
    for i in 0..targets.len() {
        for j in (i + 1)..targets.len() {
            let sep = targets[j].region.iter().map(|&x| dist[i][x]).fold(T::infinity(), T::min);
            let gap = (targets[i].value - targets[j].value).abs();
            pairs.push((i, j, sep, gap));
            if gap > T::zero() {
                required = required.max(gap / sep);
            }
        }
    }
    let l = lipschitz.unwrap_or(required);
    let slack = T::one() + T::tol(1e-12);
    for &(i, j, sep, gap) in &pairs {
        if gap > l * sep * slack {
            return Err(Error::LipschitzInconsistent {
                a: targets[i].value.as_f64(),
                b: targets[j].value.as_f64(),
                dist: sep.as_f64(),
            });
        }
    }
    let values = (0..sigma.len())
        .map(|x| {
            targets
                .iter()
                .zip(&dist)
                .map(|(t, d)| t.value + l * d[x])
                .fold(T::infinity(), T::min)
        })
        .collect();
    Ok((Potential::new(values), l))
}

/// Harmonic function with boundary values `φ` on the targets: the
/// Lipschitz extension of `φ` followed by [`royden_limit`].
///
/// Returns the full evidence; see [`phi_boundary_to_harmonic`] for the
/// variant that fails when the harmonic parts do not stabilize.
#[allow(clippy::too_many_arguments)]
pub fn phi_pipeline<T: Scalar>(
    graph: &WeightedGraph<T>,
    sigma: &MetricObject<'_, T>,
    m: &[T],
    targets: &[BoundaryTarget<T>],
    lipschitz: Option<T>,
    exhaustion: &Exhaustion,
    window: &VertexSet,
    tol: f64,
    config: &SolverConfig,
) -> Result<PhiHarmonic<T>> {
    if m.len() != graph.len() || sigma.len() != graph.len() {
        return Err(Error::InvalidParameter("metric or measure does not match graph".into()));
    }
    let (extension, l) = lipschitz_extension(sigma, targets, lipschitz)?;
    let energy = energy_value(graph, extension.values());
    let bound = l * l * csum(m.iter().copied());
    let slack = T::one() + T::tol(1e-12);
    let pairwise = (0..graph.len()).all(|x| {
        let row = sigma.row(x);
        (0..graph.len()).all(|y| (extension.get(x) - extension.get(y)).abs() <= l * row[y] * slack)
    });
    let report = royden_limit(graph, exhaustion, &extension, window, tol, config)?;
    Ok(PhiHarmonic {
        certificate: LipschitzCertificate {
            lipschitz: l,
            energy,
            bound,
            holds: energy <= bound * slack,
            pairwise,
        },
        extension,
        report,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn phi_boundary_to_harmonic<T: Scalar>(
    graph: &WeightedGraph<T>,
    sigma: &MetricObject<'_, T>,
    m: &[T],
    targets: &[BoundaryTarget<T>],
    lipschitz: Option<T>,
    exhaustion: &Exhaustion,
    window: &VertexSet,
    tol: f64,
    config: &SolverConfig,
) -> Result<PhiHarmonic<T>> {
    let out = phi_pipeline(graph, sigma, m, targets, lipschitz, exhaustion, window, tol, config)?;
    if !out.report.stabilized {
        let last = out.report.levels.last();
        return Err(Error::NotStabilized {
            sup_diff: last.and_then(|l| l.sup_diff).map_or(f64::NAN, T::as_f64),
            energy_diff: last.and_then(|l| l.energy_diff).map_or(f64::NAN, T::as_f64),
        });
    }
    Ok(out)
}

/// Potentials on one graph with Gram matrix `Q(h_i, h_j) + h_i(o) h_j(o)`.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicFamily<T> {
    #[serde(skip)]
    pub members: Vec<Potential<T>>,
    pub origin: VertexId,
    pub gram: Vec<Vec<T>>,
}

impl<T: Scalar> HarmonicFamily<T> {
    pub fn new(graph: &WeightedGraph<T>, members: Vec<Potential<T>>, origin: VertexId) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptySet("harmonic family"));
        }
        if members.iter().any(|h| h.len() != graph.len()) {
            return Err(Error::InvalidParameter("family member does not match graph".into()));
        }
        let o = graph.require(origin)?;
        let k = members.len();
        let mut gram = vec![vec![T::zero(); k]; k];
        for i in 0..k {
            for j in i..k {
                let g = bilinear_values(graph, members[i].values(), members[j].values()) + members[i].get(o) * members[j].get(o);
                gram[i][j] = g;
                gram[j][i] = g;
            }
        }
        Ok(Self { members, origin, gram })
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        symmetric_eigenvalues(&self.gram)
    }
}

/// Number of Gram eigenvalues above `tol · λ_max`.
pub fn harmonic_rank<T: Scalar>(family: &HarmonicFamily<T>, tol: T) -> usize {
    let ev = family.eigenvalues();
    let top = ev.iter().fold(T::zero(), |m, v| m.max(*v));
    if top <= T::zero() {
        return 0;
    }
    ev.iter().filter(|v| **v > tol * top).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, FamilySpec};
    use crate::graph::Exhaustion;

    fn path(n: u64) -> WeightedGraph<f64> {
        WeightedGraph::from_edges([], (0..n).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn star() -> WeightedGraph<f64> {
        WeightedGraph::from_edges([], [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap()
    }

    #[test]
    fn laplacian_of_an_indicator_on_a_triangle() {
        let g = WeightedGraph::from_edges([], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let lap = laplacian_apply(&g, &Potential::new(vec![1.0, 0.0, 0.0]), Normalization::Degree);
        assert_eq!(lap.values(), &[1.0, -0.5, -0.5]);
        let lap = laplacian_apply(&g, &Potential::new(vec![1.0, 0.0, 0.0]), Normalization::Measure(&[2.0, 1.0, 1.0]));
        assert_eq!(lap.values(), &[1.0, -1.0, -1.0]);
    }

    #[test]
    fn linear_functions_are_harmonic_on_a_path() {
        let g = path(10);
        let f = Potential::new((0..11).map(|k| k as f64).collect());
        let r = harmonicity_check(&g, &f, &(1..10).collect::<Vec<_>>(), 1e-14);
        assert_eq!(r.class, Harmonicity::Harmonic);
        let sq = Potential::new((0..11).map(|k| (k * k) as f64).collect());
        let r = harmonicity_check(&g, &sq, &(1..10).collect::<Vec<_>>(), 1e-14);
        assert_eq!(r.class, Harmonicity::Neither);
        assert_eq!(r.max_laplacian, -1.0);
        let neg = sq.map(|v| -v);
        assert_eq!(harmonicity_check(&g, &neg, &(1..10).collect::<Vec<_>>(), 1e-14).class, Harmonicity::Superharmonic);
    }

    #[test]
    fn star_extension_takes_the_mean() {
        let h = harmonic_extension(&star(), &[(1, 1.0), (2, 2.0), (3, 3.0)], &SolverConfig::default()).unwrap();
        assert!((h.get(0) - 2.0).abs() < 1e-15);
        let h = harmonic_extension(&path(7), &[(0, 0.0), (7, 1.0)], &SolverConfig::default()).unwrap();
        for k in 0..8 {
            assert!((h.get(k) - k as f64 / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn star_split() {
        let g = star();
        let f = Potential::new(vec![0.0, 1.0, 2.0, 3.0]);
        let s = royden_split(&g, &[false, true, true, true], &f, 0, &SolverConfig::default()).unwrap();
        for (a, b) in s.fh.values().iter().zip([2.0, 1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((s.f0.get(0) + 2.0).abs() < 1e-14);
        assert!((s.q - 14.0).abs() < 1e-13);
        assert!((s.q0 - 12.0).abs() < 1e-13);
        assert!((s.qh - 2.0).abs() < 1e-13);
        assert!(s.cross.abs() < 1e-13);
    }

    #[test]
    fn empty_ring_is_degenerate() {
        let g = star();
        let f = Potential::new(vec![0.0, 1.0, 2.0, 3.0]);
        let s = royden_split(&g, &[false; 4], &f, 0, &SolverConfig::default()).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.fh.values(), &[0.0; 4]);
    }

    #[test]
    fn tree_subtree_indicator_stabilizes_at_one_half() {
        let g = generate(FamilySpec::Tree { branching: 2, depth: 13 }, 1.0).unwrap();
        // vertex 1 and its descendants form one depth-1 subtree
        let mut in_left = vec![false; g.len()];
        for (i, &id) in g.ids().iter().enumerate() {
            let mut v = id;
            while v > 2 {
                v = (v - 1) / 2;
            }
            in_left[i] = v == 1;
        }
        let f = Potential::new(in_left.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        let ex = Exhaustion::balls(&g, 0, &[4, 6, 8, 10, 12]).unwrap();
        let window: VertexSet = [0].into();
        let rep = royden_limit(&g, &ex, &f, &window, 1e-3, &SolverConfig::default()).unwrap();
        assert!(rep.stabilized);
        assert!(rep.levels.iter().all(|l| l.sup_diff.map_or(true, |d| d < 1e-12)));
        let diffs: Vec<f64> = rep.levels.iter().filter_map(|l| l.energy_diff).collect();
        assert!(diffs.windows(2).all(|w| w[1] < 0.3 * w[0]));
        assert!((rep.levels.last().unwrap().qh - 0.25).abs() < 1e-4);
        assert!((rep.window[0].1 - 0.5f64).abs() < 1e-12);
    }

    #[test]
    fn clamp_on_the_line_drifts_to_constants() {
        let g = generate(FamilySpec::Lattice { dim: 1, radius: 200 }, 1.0).unwrap();
        let points = crate::generate::lattice_points(1, 200);
        let f = Potential::from_fn(&g, |id| (points[id as usize][0] as f64).clamp(-5.0, 5.0));
        let seed = 0;
        let ex = Exhaustion::balls(&g, seed, &[10, 20, 40, 80, 160]).unwrap();
        let window: VertexSet = Exhaustion::balls(&g, seed, &[2]).unwrap().levels[0].interior.clone();
        let rep = royden_limit(&g, &ex, &f, &window, 1e-6, &SolverConfig::default()).unwrap();
        assert!(!rep.stabilized);
        assert!(rep.drifts_to_constant);
    }

    #[test]
    fn ranks() {
        let g = path(5);
        let one = Potential::constant(6, 1.0);
        let lin = Potential::new((0..6).map(|k| k as f64).collect());
        assert_eq!(harmonic_rank(&HarmonicFamily::new(&g, vec![one.clone()], 0).unwrap(), 1e-8), 1);
        assert_eq!(harmonic_rank(&HarmonicFamily::new(&g, vec![one.clone(), lin.clone()], 0).unwrap(), 1e-8), 2);
        assert_eq!(harmonic_rank(&HarmonicFamily::new(&g, vec![one, lin.clone(), lin], 0).unwrap(), 1e-8), 2);
    }

    #[test]
    fn inconsistent_boundary_data_is_rejected() {
        let g = path(4);
        let sigma = MetricObject::Path {
            graph: &g,
            w: crate::graph::EdgeFunction::constant(&g, 1.0).unwrap(),
        };
        let targets = vec![
            BoundaryTarget { label: "a".into(), value: 0.0, region: vec![0] },
            BoundaryTarget { label: "b".into(), value: 1.0, region: vec![4] },
        ];
        assert!(lipschitz_extension(&sigma, &targets, Some(0.1)).is_err());
        let (f, l) = lipschitz_extension(&sigma, &targets, None).unwrap();
        assert!((l - 0.25).abs() < 1e-15);
        assert!((f.get(2) - 0.5).abs() < 1e-15);
    }
}
