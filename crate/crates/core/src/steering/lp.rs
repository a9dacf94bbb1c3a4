//! Feasibility of `A μ = b, μ ≥ 0` where the columns of `A` come from a
//! pricing oracle, so `A` never has to be stored.
//!
//! The solver is Lawson-Hanson non-negative least squares with column
//! generation: it minimizes `|A μ - b|` over `μ ≥ 0`, entering the column
//! that maximizes `a·r` for the current residual `r` and solving the
//! least-squares problem on the active columns with an updated QR
//! factorization.
//!
//! Both answers carry a checkable certificate. A feasible answer reports the
//! primal residual of the returned non-negative weights. An infeasible one
//! reports the final residual `y = r` with `y·b > max_a y·a`; since every
//! column has first entry 1 and so does `b`, no probability vector can then
//! reproduce `b`. When neither certificate verifies the status is
//! [`LpStatus::Inconclusive`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Supplies the columns of the constraint matrix.
pub trait ColumnOracle {
    fn rows(&self) -> usize;
    /// Writes a column maximizing `y·a` into `out` and returns that maximum.
    fn best_column(&self, y: &[f64], out: &mut [f64]) -> f64;
}

/// Oracle over an explicit list of columns.
#[derive(Debug, Clone)]
pub struct ExplicitColumns {
    pub rows: usize,
    pub columns: Vec<Vec<f64>>,
}

impl ColumnOracle for ExplicitColumns {
    fn rows(&self) -> usize {
        self.rows
    }

    fn best_column(&self, y: &[f64], out: &mut [f64]) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0);
        for (k, col) in self.columns.iter().enumerate() {
            let v = dot(col, y);
            if v > best.0 {
                best = (v, k);
            }
        }
        out.copy_from_slice(&self.columns[best.1]);
        best.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    /// Columns with `a·r` at or below this do not enter.
    pub pricing_tol: f64,
    /// Largest residual `max |A μ - b|` accepted as feasible.
    pub feasibility_tol: f64,
    /// Smallest margin `y·b - max_a y·a` accepted as an infeasibility proof.
    pub certificate_tol: f64,
    /// Limit on least-squares solves.
    pub max_iterations: usize,
    /// Called with `(iteration, residual norm)` after every entering column.
    pub progress: Option<fn(usize, f64)>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pricing_tol: 1e-13,
            feasibility_tol: 1e-9,
            certificate_tol: 1e-12,
            max_iterations: 100_000,
            progress: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Feasible,
    Infeasible,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Least-squares solves performed.
    pub iterations: usize,
    /// `max |A μ - b|` of the returned weights.
    pub residual: f64,
    /// Active columns with their weights.
    pub support: Vec<(Vec<f64>, f64)>,
    /// Final residual `b - A μ`, the candidate infeasibility certificate.
    pub dual: Vec<f64>,
    /// `y·b - max_a y·a` for `y = dual`; positive proves infeasibility.
    pub margin: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least squares on a growing and shrinking set of columns, kept as
/// `Qᵀ A_P = R` with `Qᵀ` stored explicitly.
struct ActiveSet {
    m: usize,
    /// Row-major `m x m`.
    qt: Vec<f64>,
    /// Column `j` of the upper-triangular factor, entries `0..=j`.
    r: Vec<Vec<f64>>,
    qtb: Vec<f64>,
    cols: Vec<Vec<f64>>,
}

impl ActiveSet {
    fn new(b: &[f64]) -> Self {
        let m = b.len();
        let mut qt = vec![0.0; m * m];
        for i in 0..m {
            qt[i * m + i] = 1.0;
        }
        ActiveSet { m, qt, r: Vec::new(), qtb: b.to_vec(), cols: Vec::new() }
    }

    fn len(&self) -> usize {
        self.cols.len()
    }

    /// Appends a column; returns false (leaving the set unchanged) if it is
    /// numerically dependent on the active ones.
    fn push(&mut self, col: &[f64]) -> bool {
        let (m, p) = (self.m, self.len());
        if p == m {
            return false;
        }
        let mut u: Vec<f64> = (0..m).map(|i| dot(&self.qt[i * m..(i + 1) * m], col)).collect();
        let tail = libm::sqrt(u[p..].iter().map(|x| x * x).sum::<f64>());
        let scale = libm::sqrt(dot(col, col));
        if tail <= 1e-10 * scale {
            return false;
        }
        // Householder reflection mapping u[p..] to alpha e_p.
        let alpha = if u[p] >= 0.0 { -tail } else { tail };
        let mut v: Vec<f64> = u[p..].to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        if vv > 0.0 {
            for c in 0..m {
                let s: f64 = (p..m).map(|i| v[i - p] * self.qt[i * m + c]).sum();
                let f = 2.0 * s / vv;
                for i in p..m {
                    self.qt[i * m + c] -= f * v[i - p];
                }
            }
            let s: f64 = (p..m).map(|i| v[i - p] * self.qtb[i]).sum();
            let f = 2.0 * s / vv;
            for i in p..m {
                self.qtb[i] -= f * v[i - p];
            }
        }
        u[p] = alpha;
        u.truncate(p + 1);
        self.r.push(u);
        self.cols.push(col.to_vec());
        true
    }

    /// Removes active column `k`, restoring triangularity with Givens rotations.
    fn remove(&mut self, k: usize) {
        let m = self.m;
        self.r.remove(k);
        self.cols.remove(k);
        for j in k..self.len() {
            // Column j now reaches row j + 1; rotate rows j and j + 1 to clear it.
            let (a, b) = (self.r[j][j], self.r[j][j + 1]);
            let h = libm::hypot(a, b);
            let (c, s) = if h == 0.0 { (1.0, 0.0) } else { (a / h, b / h) };
            for col in self.r[j..].iter_mut() {
                let (x, y) = (col[j], col[j + 1]);
                col[j] = c * x + s * y;
                col[j + 1] = -s * x + c * y;
            }
            self.r[j].truncate(j + 1);
            for t in 0..m {
                let (x, y) = (self.qt[j * m + t], self.qt[(j + 1) * m + t]);
                self.qt[j * m + t] = c * x + s * y;
                self.qt[(j + 1) * m + t] = -s * x + c * y;
            }
            let (x, y) = (self.qtb[j], self.qtb[j + 1]);
            self.qtb[j] = c * x + s * y;
            self.qtb[j + 1] = -s * x + c * y;
        }
    }

    /// Unconstrained least-squares coefficients on the active columns.
    fn solve(&self) -> Vec<f64> {
        let p = self.len();
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let s: f64 = (i + 1..p).map(|j| self.r[j][i] * z[j]).sum();
            z[i] = (self.qtb[i] - s) / self.r[i][i];
        }
        z
    }

    fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = b.to_vec();
        for (col, w) in self.cols.iter().zip(x) {
            for (ri, ci) in r.iter_mut().zip(col) {
                *ri -= w * ci;
            }
        }
        r
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    dot(v, v)
}

/// Decides feasibility of `Σ μ_a a = rhs`, `μ ≥ 0`, over the oracle's columns.
///
/// # Errors
/// [`Error::SolverFailure`] when the iteration limit is reached.
pub fn solve<O: ColumnOracle>(oracle: &O, rhs: &[f64], opts: LpOptions) -> Result<LpSolution> {
    let m = oracle.rows();
    if rhs.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: rhs.len() });
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut set = ActiveSet::new(rhs);
    let mut x: Vec<f64> = Vec::new();
    let mut r = rhs.to_vec();
    let mut col = vec![0.0; m];
    let mut iterations = 0;
    loop {
        if r.iter().all(|v| libm::fabs(*v) <= 1e-3 * opts.feasibility_tol) {
            break;
        }
        let w = oracle.best_column(&r, &mut col);
        if !w.is_finite() {
            return Err(Error::NonFinite);
        }
        if w <= opts.pricing_tol || !set.push(&col) {
            break;
        }
        x.push(0.0);
        let mut entered = Some(x.len() - 1);
        loop {
            if iterations >= opts.max_iterations {
                return Err(Error::SolverFailure("iteration limit reached"));
            }
            iterations += 1;
            let z = set.solve();
            if z.iter().all(|&v| v > 0.0) {
                x = z;
                break;
            }
            if let Some(e) = entered.filter(|&e| z[e] <= 0.0 && x[e] == 0.0) {
                // The entering column cannot take a positive weight in floating point.
                set.remove(e);
                x.remove(e);
                entered = None;
                break;
            }
            let alpha = (0..z.len())
                .filter(|&i| z[i] <= 0.0)
                .map(|i| x[i] / (x[i] - z[i]))
                .fold(f64::INFINITY, f64::min);
            for (xi, zi) in x.iter_mut().zip(&z) {
                *xi += alpha * (zi - *xi);
            }
            for i in (0..x.len()).rev() {
                if x[i] <= 0.0 {
                    set.remove(i);
                    x.remove(i);
                    entered = match entered {
                        Some(e) if e == i => None,
                        Some(e) if e > i => Some(e - 1),
                        other => other,
                    };
                }
            }
            if x.is_empty() {
                break;
            }
        }
        let before = norm_sq(&r);
        r = set.residual(rhs, &x);
        let after = norm_sq(&r);
        if let Some(report) = opts.progress {
            report(iterations, libm::sqrt(after));
        }
        if entered.is_none() && after >= before {
            break;
        }
    }

    let residual = r.iter().map(|v| libm::fabs(*v)).fold(0.0, f64::max);
    let best = oracle.best_column(&r, &mut col);
    let margin = dot(&r, rhs) - best;
    let status = if residual <= opts.feasibility_tol && x.iter().all(|&v| v >= 0.0) {
        LpStatus::Feasible
    } else if margin > opts.certificate_tol {
        LpStatus::Infeasible
    } else {
        LpStatus::Inconclusive
    };
    let support = set.cols.into_iter().zip(x).collect();
    Ok(LpSolution { status, iterations, residual, support, dual: r, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex_columns(points: &[[f64; 2]]) -> ExplicitColumns {
        ExplicitColumns { rows: 3, columns: points.iter().map(|p| vec![1.0, p[0], p[1]]).collect() }
    }

    #[test]
    fn point_inside_triangle_is_feasible() {
        let cols = simplex_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let sol = solve(&cols, &[1.0, 0.2, 0.3], LpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Feasible);
        let mut w: Vec<f64> = sol.support.iter().map(|s| s.1).collect();
        w.sort_by(f64::total_cmp);
        assert!((w[0] - 0.2).abs() < 1e-12 && (w[1] - 0.3).abs() < 1e-12 && (w[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn point_outside_triangle_has_farkas_certificate() {
        let cols = simplex_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let b = [1.0, 0.6, -0.1];
        let sol = solve(&cols, &b, LpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let yb = dot(&b, &sol.dual);
        for c in &cols.columns {
            assert!(dot(c, &sol.dual) < yb);
        }
    }

    #[test]
    fn vertex_and_edge_points_are_feasible() {
        let cols = simplex_columns(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        for p in [[1.0, 1.0], [0.5, 1.0], [0.0, 0.0], [0.25, 0.75]] {
            let sol = solve(&cols, &[1.0, p[0], p[1]], LpOptions::default()).unwrap();
            assert_eq!(sol.status, LpStatus::Feasible, "{p:?}");
        }
    }

    #[test]
    fn active_set_removal_keeps_least_squares_exact() {
        let cols: Vec<Vec<f64>> =
            (0..5).map(|k| (0..6).map(|i| libm::sin(((1 + i * 7 + k * 3) * (2 + i + k)) as f64)).collect()).collect();
        let b: Vec<f64> = (0..6).map(|i| libm::cos(i as f64)).collect();
        let mut set = ActiveSet::new(&b);
        for c in &cols {
            assert!(set.push(c));
        }
        set.remove(1);
        set.remove(2);
        let z = set.solve();
        // Normal equations hold for the remaining columns.
        let r = set.residual(&b, &z);
        for c in &set.cols {
            assert!(dot(c, &r).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_rhs_length_is_rejected() {
        let cols = simplex_columns(&[[0.0, 0.0]]);
        assert!(solve(&cols, &[1.0], LpOptions::default()).is_err());
    }
}
