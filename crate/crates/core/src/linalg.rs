//! Symmetric positive definite solves for Laplacian-type systems.
//!
//! Systems below [`SolverConfig::direct_below`] unknowns are factored
//! densely (Cholesky); larger ones go through conjugate gradients with a
//! diagonal preconditioner.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{cdot, csum, Scalar};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolverConfig {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub direct_below: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 200_000,
            direct_below: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trivial,
    Cholesky,
    Cg,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub x: Vec<T>,
    /// Relative residual, recomputed from `x`.
    pub residual: T,
    pub iterations: usize,
    pub method: Method,
}

/// Square symmetric matrix in CSR form (both triangles stored).
#[derive(Clone, Debug)]
pub struct SparseSym<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> SparseSym<T> {
    /// Builds from per-row entries; rows are sorted and duplicates summed.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).find(|&(c, _)| c == i).map_or(T::zero(), |e| e.1))
            .collect()
    }

    pub fn mul_into(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn mul(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        self.mul_into(x, &mut out);
        out
    }

    /// `xᵀAx` with compensated accumulation.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        csum((0..self.n).flat_map(|i| self.row(i).map(move |(c, v)| x[i] * v * x[c])))
    }

    fn to_dense(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n * self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                d[i * self.n + c] = v;
            }
        }
        d
    }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    cdot(v, v).sqrt()
}

/// Relative residual `‖b − Ax‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_residual<T: Scalar>(a: &SparseSym<T>, x: &[T], b: &[T]) -> T {
    let ax = a.mul(x);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
    let bn = norm(b);
    let rn = norm(&r);
    if bn > T::zero() {
        rn / bn
    } else {
        rn
    }
}

pub fn solve_spd<T: Scalar>(a: &SparseSym<T>, b: &[T], config: &SolverConfig) -> Result<Solution<T>> {
    let n = a.n();
    if n == 0 || b.iter().all(|v| *v == T::zero()) {
        return Ok(Solution {
            x: vec![T::zero(); n],
            residual: T::zero(),
            iterations: 0,
            method: Method::Trivial,
        });
    }
    let tol = T::tol(config.rel_tol);
    if n < config.direct_below {
        let x = cholesky_solve(a, b)?;
        let residual = relative_residual(a, &x, b);
        return Ok(Solution {
            x,
            residual,
            iterations: 1,
            method: Method::Cholesky,
        });
    }
    let (x, iterations) = pcg(a, b, tol, config.max_iter)?;
    let residual = relative_residual(a, &x, b);
    if !(residual <= tol * T::lit(10.0)) {
        return Err(Error::SolverDiverged {
            residual: residual.as_f64(),
            iterations,
        });
    }
    Ok(Solution {
        x,
        residual,
        iterations,
        method: Method::Cg,
    })
}

/// Dense Cholesky factorization and solve.
pub fn cholesky_solve<T: Scalar>(a: &SparseSym<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.n();
    let mut l = a.to_dense();
    for j in 0..n {
        let row_j = &l[j * n..j * n + j];
        let mut d = l[j * n + j];
        for &v in row_j {
            d -= v * v;
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                row: j,
                pivot: d.as_f64(),
            });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        let row_j: Vec<T> = l[j * n..j * n + j].to_vec();
        for i in (j + 1)..n {
            let row_i = &mut l[i * n..(i + 1) * n];
            let mut s = row_i[j];
            for k in 0..j {
                s -= row_i[k] * row_j[k];
            }
            row_i[j] = s / d;
        }
    }
    // forward: L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let mut s = y[i];
        for (k, &lik) in row.iter().enumerate() {
            s -= lik * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // backward: Lᵀ x = y
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Ok(y)
}

/// Jacobi-preconditioned conjugate gradients from `x = 0`.
pub fn pcg<T: Scalar>(a: &SparseSym<T>, b: &[T], tol: T, max_iter: usize) -> Result<(Vec<T>, usize)> {
    let n = a.n();
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d > T::zero() {
                Ok(T::one() / d)
            } else {
                Err(Error::NotPositiveDefinite { row, pivot: d.as_f64() })
            }
        })
        .collect::<Result<_>>()?;
    let bn = norm(b);
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![T::zero(); n];
    let mut rz = cdot(&r, &z);
    let mut iter = 0;
    while iter < max_iter {
        if norm(&r) <= tol * bn {
            break;
        }
        a.mul_into(&p, &mut ap);
        let pap = cdot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotPositiveDefinite { row: iter, pivot: pap.as_f64() });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        // periodic residual refresh against drift
        if iter % 50 == 49 {
            let ax = a.mul(&x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = cdot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iter += 1;
    }
    if norm(&r) > tol * bn {
        return Err(Error::SolverDiverged {
            residual: (norm(&r) / bn).as_f64(),
            iterations: iter,
        });
    }
    Ok((x, iter))
}

/// Symmetric eigenvalues by cyclic Jacobi rotations (small dense matrices).
pub fn symmetric_eigenvalues<T: Scalar>(matrix: &[Vec<T>]) -> Vec<T> {
    let n = matrix.len();
    let mut a: Vec<Vec<T>> = matrix.to_vec();
    for _sweep in 0..100 {
        let off = csum((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]));
        let scale = csum((0..n).map(|i| a[i][i] * a[i][i]));
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseSym<f64> {
        // Dirichlet Laplacian of a path with both ends grounded
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        SparseSym::from_rows(rows)
    }

    #[test]
    fn cholesky_and_cg_agree_on_a_path() {
        let n = 300;
        let a = path_laplacian(n);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let x = cholesky_solve(&a, &b).unwrap();
        let (y, _) = pcg(&a, &b, 1e-12, 10_000).unwrap();
        for k in 0..n {
            let exact = (n - k) as f64 / (n + 1) as f64;
            assert!((x[k] - exact).abs() < 1e-12);
            assert!((y[k] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_spd_switches_method_on_size() {
        let a = path_laplacian(50);
        let mut b = vec![0.0; 50];
        b[49] = 1.0;
        let s = solve_spd(&a, &b, &SolverConfig::default()).unwrap();
        assert_eq!(s.method, Method::Cholesky);
        let s = solve_spd(&a, &b, &SolverConfig { direct_below: 10, ..Default::default() }).unwrap();
        assert_eq!(s.method, Method::Cg);
        assert!(s.residual <= 1e-9);
        let s = solve_spd(&a, &vec![0.0; 50], &SolverConfig::default()).unwrap();
        assert_eq!(s.method, Method::Trivial);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseSym::from_rows(vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 2.0), (1, 1.0)]]);
        assert!(matches!(cholesky_solve(&a, &[1.0, 0.0]), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn jacobi_eigenvalues() {
        let m = vec![vec![2.0f64, 1.0], vec![1.0, 2.0]];
        let ev = symmetric_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
