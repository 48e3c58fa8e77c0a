//! Dirichlet energy, its polarization, normal contractions and norms.
//!
//! Conventions: `Q(f) = ½ Σ_{x,y} b(x,y)(f(x) − f(y))²`, the sum running
//! over ordered pairs, which equals the sum over unordered edges of
//! `b·(Δf)²`. All sums are compensated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeFunction, Measure, Potential, VertexId, WeightedGraph};
use crate::scalar::{csum, CompensatedSum, Scalar};

/// `Q(f)` together with the per-vertex split `m_f`.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport<T> {
    pub value: T,
    /// `m_f(x) = ½ Σ_y b(x,y)(f(x) − f(y))²`
    pub local: Vec<T>,
    /// Set when the sum overflowed to `+∞`.
    pub overflow: bool,
}

pub fn energy<T: Scalar>(graph: &WeightedGraph<T>, f: &Potential<T>) -> EnergyReport<T> {
    let local = local_energy(graph, f.values());
    let value = csum(local.iter().copied());
    EnergyReport {
        overflow: !value.is_finite(),
        value,
        local,
    }
}

/// `Q(f)` summed over unordered edges; agrees with [`energy`] up to rounding.
pub fn energy_value<T: Scalar>(graph: &WeightedGraph<T>, f: &[T]) -> T {
    csum(graph.edges().iter().map(|&(i, j, b)| {
        let d = f[i] - f[j];
        b * d * d
    }))
}

pub(crate) fn local_energy<T: Scalar>(graph: &WeightedGraph<T>, f: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    (0..graph.len())
        .map(|x| {
            let mut acc = CompensatedSum::new();
            for (y, b) in graph.neighbors(x) {
                let d = f[x] - f[y];
                acc.add(b * d * d);
            }
            half * acc.value()
        })
        .collect()
}

/// `Q(f, g) = ½ Σ b(x,y)(f(x) − f(y))(g(x) − g(y))`.
pub fn energy_bilinear<T: Scalar>(graph: &WeightedGraph<T>, f: &Potential<T>, g: &Potential<T>) -> T {
    bilinear_values(graph, f.values(), g.values())
}

pub(crate) fn bilinear_values<T: Scalar>(graph: &WeightedGraph<T>, f: &[T], g: &[T]) -> T {
    csum(
        graph
            .edges()
            .iter()
            .map(|&(i, j, b)| b * (f[i] - f[j]) * (g[i] - g[j])),
    )
}

/// `Q̃(w) = ½ Σ b w²` and the induced vertex map `m_w(x) = ½ Σ_y b(x,y) w(x,y)²`.
pub fn tilde_energy<T: Scalar>(graph: &WeightedGraph<T>, w: &EdgeFunction<T>) -> (T, Vec<T>) {
    let half = T::lit(0.5);
    let local: Vec<T> = (0..graph.len())
        .map(|x| {
            let mut acc = CompensatedSum::new();
            for (_, b, e) in graph.neighbor_edges(x) {
                let v = w.on_edge(e);
                acc.add(b * v * v);
            }
            half * acc.value()
        })
        .collect();
    (csum(local.iter().copied()), local)
}

/// A 1-Lipschitz map `R → R` applied pointwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Contraction<T> {
    /// `(x ∧ hi) ∨ lo`
    Clamp(T, T),
    /// `(x − c)_+ ∧ 1`
    Slice(T),
    Abs,
    Table(LipschitzTable<T>),
}

/// Piecewise-linear function through sorted breakpoints, extended
/// constantly outside the first and last breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzTable<T> {
    points: Vec<(T, T)>,
}

impl<T: Scalar> LipschitzTable<T> {
    /// Validates strictly increasing abscissae and slopes bounded by 1.
    pub fn new(points: Vec<(T, T)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("contraction table is empty".into()));
        }
        for w in points.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if !(x1 > x0) {
                return Err(Error::InvalidParameter("table abscissae must increase".into()));
            }
            if (y1 - y0).abs() > (x1 - x0) {
                return Err(Error::InvalidParameter(format!(
                    "table slope between {x0} and {x1} exceeds 1"
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn eval(&self, x: T) -> T {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let k = pts.partition_point(|p| p.0 <= x);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

impl<T: Scalar> Contraction<T> {
    pub fn clamp(lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("clamp bounds {lo} > {hi}")));
        }
        Ok(Contraction::Clamp(lo, hi))
    }

    pub fn apply_scalar(&self, x: T) -> T {
        match self {
            Contraction::Clamp(lo, hi) => x.min(*hi).max(*lo),
            Contraction::Slice(c) => (x - *c).max(T::zero()).min(T::one()),
            Contraction::Abs => x.abs(),
            Contraction::Table(t) => t.eval(x),
        }
    }
}

/// Pointwise `C ∘ f`.
pub fn contraction_apply<T: Scalar>(f: &Potential<T>, c: &Contraction<T>) -> Result<Potential<T>> {
    if let Contraction::Clamp(lo, hi) = c {
        if !(*lo <= *hi) {
            return Err(Error::InvalidParameter(format!("clamp bounds {lo} > {hi}")));
        }
    }
    Ok(f.map(|x| c.apply_scalar(x)))
}

/// `‖f‖_o`, `‖f‖_m` and `‖f‖_{Q,m}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms<T> {
    pub anchored: T,
    pub l2: Option<T>,
    pub h1: Option<T>,
}

pub fn norms<T: Scalar>(
    graph: &WeightedGraph<T>,
    f: &Potential<T>,
    o: VertexId,
    m: Option<&Measure<T>>,
) -> Result<Norms<T>> {
    let oi = graph.require(o)?;
    let q = energy_value(graph, f.values());
    let fo = f.get(oi);
    let anchored = (q + fo * fo).sqrt();
    let l2sq = m.map(|m| csum(f.values().iter().zip(m.values()).map(|(&v, &w)| w * v * v)));
    Ok(Norms {
        anchored,
        l2: l2sq.map(|s| s.sqrt()),
        h1: l2sq.map(|s| (s + q).sqrt()),
    })
}

/// `‖f‖²_{Q,m} = Q(f) + Σ m f²`.
pub fn h1_norm_sq<T: Scalar>(graph: &WeightedGraph<T>, f: &[T], m: &Measure<T>) -> T {
    energy_value(graph, f) + csum(f.iter().zip(m.values()).map(|(&v, &w)| w * v * v))
}

/// Constant `C` with `‖f‖_{o'} <= C ‖f‖_o` for all `f`.
///
/// Follows a resistance-shortest path `γ` from `o` to `o'`: with
/// `r = Σ_γ 1/b`, `|f(o')| <= |f(o)| + sqrt(r Q(f))` and hence
/// `C = sqrt(max(2, 1 + 2r))`.
pub fn norm_equivalence_constant<T: Scalar>(graph: &WeightedGraph<T>, o: VertexId, o2: VertexId) -> Result<T> {
    let s = graph.require(o)?;
    let t = graph.require(o2)?;
    let resistance = EdgeFunction::from_fn(graph, |_, _, b| T::one() / b)?;
    let r = crate::metrics::single_source(graph, &resistance, s)[t];
    let two = T::lit(2.0);
    Ok(two.max(T::one() + two * r).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> WeightedGraph<f64> {
        WeightedGraph::from_edges([], [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn edge() -> WeightedGraph<f64> {
        WeightedGraph::from_edges([], [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn energy_examples() {
        let e = energy(&edge(), &Potential::new(vec![0.0, 1.0]));
        assert_eq!(e.value, 1.0);
        let e = energy(&unit_triangle(), &Potential::new(vec![5.0; 3]));
        assert_eq!(e.value, 0.0);
        let e = energy(&unit_triangle(), &Potential::new(vec![0.0, 1.0, 2.0]));
        assert_eq!(e.value, 6.0);
        assert_eq!(e.local.iter().sum::<f64>(), 6.0);
    }

    #[test]
    fn bilinear_examples() {
        let g = unit_triangle();
        let f = Potential::new(vec![0.0, 1.0, 2.0]);
        let h = Potential::new(vec![0.0, 1.0, 0.0]);
        assert_eq!(energy_bilinear(&g, &f, &h), 0.0);
        assert_eq!(energy_bilinear(&g, &f, &Potential::constant(3, 4.0)), 0.0);
        let e = edge();
        let f = Potential::new(vec![0.0, 1.0]);
        assert_eq!(energy_bilinear(&e, &f, &f), 1.0);
    }

    #[test]
    fn tilde_energy_examples() {
        let e = edge();
        let (q, m) = tilde_energy(&e, &EdgeFunction::constant(&e, 0.0).unwrap());
        assert_eq!(q, 0.0);
        assert_eq!(m, vec![0.0, 0.0]);
        let (q, m) = tilde_energy(&e, &EdgeFunction::constant(&e, 2.0).unwrap());
        assert_eq!(q, 4.0);
        assert_eq!(m, vec![2.0, 2.0]);
        let g = unit_triangle();
        let f = Potential::new(vec![0.0, 1.0, 2.0]);
        let (q, _) = tilde_energy(&g, &EdgeFunction::gradient_magnitude(&g, &f));
        assert_eq!(q, 6.0);
    }

    #[test]
    fn contraction_examples() {
        let f = Potential::new(vec![-1.0, 0.5, 2.0]);
        let c = contraction_apply(&f, &Contraction::clamp(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(c.values(), &[0.0, 0.5, 1.0]);
        let f = Potential::new(vec![0.0, 1.5, 3.0]);
        let s = contraction_apply(&f, &Contraction::Slice(1.0)).unwrap();
        assert_eq!(s.values(), &[0.0, 0.5, 1.0]);
        assert!(Contraction::clamp(1.0, 0.0).is_err());
        assert!(contraction_apply(&f, &Contraction::Clamp(2.0, 1.0)).is_err());
    }

    #[test]
    fn slices_sum_back_to_the_function() {
        let f = Potential::new(vec![0.0, 0.3, 1.7, 4.25, 2.0]);
        let mut total = vec![0.0; f.len()];
        for n in 0..6 {
            let s = contraction_apply(&f, &Contraction::Slice(n as f64)).unwrap();
            for (t, v) in total.iter_mut().zip(s.values()) {
                *t += v;
            }
        }
        for (t, v) in total.iter().zip(f.values()) {
            assert!((t - v).abs() < 1e-15);
        }
    }

    #[test]
    fn lipschitz_table_validation() {
        assert!(LipschitzTable::new(vec![(0.0, 0.0), (1.0, 2.0)]).is_err());
        assert!(LipschitzTable::new(vec![(0.0, 0.0), (0.0, 0.0)]).is_err());
        let t = LipschitzTable::new(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 0.0)]).unwrap();
        assert_eq!(t.eval(-5.0), 0.0);
        assert_eq!(t.eval(2.0), 0.5);
        assert_eq!(t.eval(9.0), 0.0);
    }

    #[test]
    fn norm_examples() {
        let e = edge();
        let m = Measure::unit(2);
        let n = norms(&e, &Potential::zeros(2), 0, Some(&m)).unwrap();
        assert_eq!((n.anchored, n.l2.unwrap(), n.h1.unwrap()), (0.0, 0.0, 0.0));
        let n = norms(&e, &Potential::new(vec![0.0, 1.0]), 0, Some(&m)).unwrap();
        assert_eq!(n.anchored, 1.0);
        assert_eq!(n.l2.unwrap(), 1.0);
        assert!((n.h1.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let n = norms(&unit_triangle(), &Potential::constant(3, -3.0), 2, None).unwrap();
        assert_eq!(n.anchored, 3.0);
        assert!(norms(&e, &Potential::zeros(2), 9, None).is_err());
    }

    #[test]
    fn norm_equivalence_on_a_path() {
        let g = WeightedGraph::from_edges([], [(0, 1, 1.0), (1, 2, 0.5)]).unwrap();
        let c = norm_equivalence_constant(&g, 0, 2).unwrap();
        assert!((c - 7f64.sqrt()).abs() < 1e-14);
    }
}
