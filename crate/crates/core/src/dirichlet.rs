//! Constrained quadratic minimization on a finite graph.
//!
//! Minimizes `Q(f) + Σ m f²` (the mass term is optional) subject to
//! `f = g` on a fixed set. The minimizer satisfies `(L + M) f = 0` on the
//! free vertices, where `L` is the combinatorial Laplacian
//! `(Lf)(x) = Σ_y b(x,y)(f(x) − f(y))`.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Method, SolverConfig, SparseSym};
use crate::scalar::{cdot, csum, CompensatedSum, Scalar};
use crate::graph::WeightedGraph;

#[derive(Clone, Debug)]
pub struct DirichletSolution<T> {
    pub values: Vec<T>,
    /// Relative residual of the reduced linear system.
    pub residual: T,
    pub iterations: usize,
    pub method: Method,
    /// Objective evaluated through the reduced quadratic form.
    pub objective: T,
}

/// Solves the constrained problem; `fixed[x] = Some(g)` pins `f(x) = g`.
pub fn solve_dirichlet<T: Scalar>(
    graph: &WeightedGraph<T>,
    fixed: &[Option<T>],
    mass: Option<&[T]>,
    config: &SolverConfig,
) -> Result<DirichletSolution<T>> {
    let n = graph.len();
    if fixed.len() != n {
        return Err(Error::InvalidParameter("boundary data length mismatch".into()));
    }
    if mass.is_none() && fixed.iter().all(Option::is_none) {
        return Err(Error::EmptySet("pinned vertices of an energy-only problem"));
    }
    let mut slot = vec![usize::MAX; n];
    let mut free = Vec::new();
    for x in 0..n {
        if fixed[x].is_none() {
            slot[x] = free.len();
            free.push(x);
        }
    }
    let mass_at = |x: usize| mass.map_or(T::zero(), |m| m[x]);
    let mut rows = Vec::with_capacity(free.len());
    let mut rhs = Vec::with_capacity(free.len());
    for &x in &free {
        let mut row = vec![(slot[x], graph.degree(x) + mass_at(x))];
        let mut b_acc = CompensatedSum::new();
        for (y, b) in graph.neighbors(x) {
            match fixed[y] {
                Some(g) => b_acc.add(b * g),
                None => row.push((slot[y], -b)),
            }
        }
        rows.push(row);
        rhs.push(b_acc.value());
    }
    let a = SparseSym::from_rows(rows);
    let sol = solve_spd(&a, &rhs, config)?;

    let mut constant = CompensatedSum::new();
    for &(i, j, b) in graph.edges() {
        match (fixed[i], fixed[j]) {
            (Some(gi), Some(gj)) => {
                let d = gi - gj;
                constant.add(b * d * d);
            }
            (Some(g), None) | (None, Some(g)) => constant.add(b * g * g),
            (None, None) => {}
        }
    }
    for x in 0..n {
        if let Some(g) = fixed[x] {
            constant.add(mass_at(x) * g * g);
        }
    }
    let two = T::lit(2.0);
    let objective = csum([a.quadratic_form(&sol.x), -two * cdot(&sol.x, &rhs), constant.value()]);

    let mut values = vec![T::zero(); n];
    for x in 0..n {
        values[x] = match fixed[x] {
            Some(g) => g,
            None => sol.x[slot[x]],
        };
    }
    Ok(DirichletSolution {
        values,
        residual: sol.residual,
        iterations: sol.iterations,
        method: sol.method,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_value;

    #[test]
    fn path_interpolates_linearly() {
        let g = WeightedGraph::from_edges([], (0..6u64).map(|i| (i, i + 1, 1.0))).unwrap();
        let mut fixed = vec![None; 7];
        fixed[0] = Some(0.0);
        fixed[6] = Some(1.0);
        let s = solve_dirichlet(&g, &fixed, None, &SolverConfig::default()).unwrap();
        for k in 0..7 {
            assert!((s.values[k] - k as f64 / 6.0).abs() < 1e-14);
        }
        let q = energy_value(&g, &s.values);
        assert!((q - 1.0 / 6.0).abs() < 1e-14);
        assert!((s.objective - q).abs() < 1e-14);
    }

    #[test]
    fn mass_term_single_edge() {
        // min (1 - t)^2 + 1 + t^2 at t = 1/2
        let g = WeightedGraph::from_edges([], [(0, 1, 1.0)]).unwrap();
        let s = solve_dirichlet(&g, &[Some(1.0), None], Some(&[1.0f64, 1.0]), &SolverConfig::default()).unwrap();
        assert!((s.values[1] - 0.5).abs() < 1e-15);
        assert!((s.objective - 1.5).abs() < 1e-15);
    }

    #[test]
    fn unpinned_energy_problem_is_rejected() {
        let g = WeightedGraph::from_edges([], [(0, 1, 1.0)]).unwrap();
        assert!(solve_dirichlet(&g, &[None, None], None, &SolverConfig::default()).is_err());
    }
}
