//! Dense two-phase tableau simplex with Bland's pivot rule.
//!
//! Bland's rule (lowest eligible index enters, ties in the ratio test broken
//! by lowest basic variable index) makes every solve a deterministic function
//! of the input, which is what the gauge and decomposition code relies on for
//! reproducibility. Problems here are small and well scaled (entries O(1)),
//! so a dense tableau is adequate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const REDUCED_COST_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

/// Optimal solution of `min c.x  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: DVector<f64>,
}

struct Tableau {
    rows: usize,
    cols: usize,
    body: DMatrix<f64>,
    rhs: DVector<f64>,
    cost: DVector<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.body[(row, col)];
        for j in 0..self.cols {
            self.body[(row, j)] /= p;
        }
        self.rhs[row] /= p;
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.body[(i, col)];
            if f != 0.0 {
                for j in 0..self.cols {
                    self.body[(i, j)] -= f * self.body[(row, j)];
                }
                self.rhs[i] -= f * self.rhs[row];
                if self.rhs[i].abs() < 1e-300 {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for j in 0..self.cols {
                self.cost[j] -= f * self.body[(row, j)];
            }
        }
        self.basis[row] = col;
    }

    /// Bland iterations until no reduced cost is negative. Returns Err on
    /// an unbounded ray.
    fn run(&mut self) -> Result<()> {
        let max_iter = 10_000 + 200 * (self.rows + self.cols);
        for _ in 0..max_iter {
            let entering = (0..self.cols).find(|&j| self.cost[j] < -REDUCED_COST_TOL);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.body[(r, col)];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio <= lratio + PIVOT_TOL
                                    && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return Err(Error::LpUnbounded),
            }
        }
        Err(Error::InvalidParameter(
            "simplex iteration cap exceeded".into(),
        ))
    }
}

/// Solve `min c.x  s.t.  A x = b, x >= 0`.
///
/// Returns `Ok(None)` when the constraints are infeasible.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<Option<LpSolution>> {
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);

    // Phase 1: artificial columns n..n+m, minimize their sum.
    let mut body = DMatrix::zeros(m, n + m);
    let mut rhs = DVector::zeros(m);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            body[(i, j)] = flip * a[(i, j)];
        }
        body[(i, n + i)] = 1.0;
        rhs[i] = flip * b[i];
    }
    // Reduced costs for basis = artificials: cbar_j = -sum_i body[i][j].
    let mut cost = DVector::zeros(n + m);
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..m {
            s += body[(i, j)];
        }
        cost[j] = -s;
    }
    let mut t = Tableau {
        rows: m,
        cols: n + m,
        body,
        rhs,
        cost,
        basis: (n..n + m).collect(),
    };
    t.run()?;

    let phase1_obj: f64 = (0..m)
        .filter(|&i| t.basis[i] >= n)
        .map(|i| t.rhs[i])
        .sum();
    if phase1_obj > FEAS_TOL {
        return Ok(None);
    }

    // Drive remaining artificials out of the basis where possible.
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.body[(r, j)].abs() > 1e-9) {
                t.pivot(r, j);
            }
        }
    }

    // Rebuild a phase-2 tableau over the original columns, dropping rows that
    // are still artificial-basic (redundant constraints).
    let keep: Vec<usize> = (0..m).filter(|&r| t.basis[r] < n).collect();
    let k = keep.len();
    let mut body2 = DMatrix::zeros(k, n);
    let mut rhs2 = DVector::zeros(k);
    let mut basis2 = Vec::with_capacity(k);
    for (ri, &r) in keep.iter().enumerate() {
        for j in 0..n {
            body2[(ri, j)] = t.body[(r, j)];
        }
        rhs2[ri] = t.rhs[r];
        basis2.push(t.basis[r]);
    }
    let mut cost2 = DVector::zeros(n);
    for j in 0..n {
        let mut s = c[j];
        for (ri, &bj) in basis2.iter().enumerate() {
            s -= c[bj] * body2[(ri, j)];
        }
        cost2[j] = s;
    }
    // Basic columns must carry zero reduced cost exactly.
    for &bj in &basis2 {
        cost2[bj] = 0.0;
    }
    let mut t2 = Tableau {
        rows: k,
        cols: n,
        body: body2,
        rhs: rhs2,
        cost: cost2,
        basis: basis2,
    };
    t2.run()?;

    let mut x = DVector::zeros(n);
    for (r, &bj) in t2.basis.iter().enumerate() {
        x[bj] = t2.rhs[r].max(0.0);
    }
    let objective = c.dot(&x);
    Ok(Some(LpSolution { objective, x }))
}

/// Signed vertex weights realizing a point of a symmetric hull.
#[derive(Debug, Clone)]
pub struct GaugeSolution {
    /// Minkowski gauge of the target, `min sum |w|` over representations.
    pub gauge: f64,
    /// `(vertex index, signed weight)` pairs with nonzero weight.
    pub weights: Vec<(usize, f64)>,
}

/// Gauge of `target` in the symmetric hull of `vertices`:
/// `min sum (l_i + u_i)  s.t.  sum (l_i - u_i) v_i = target, l, u >= 0`.
///
/// `None` means the target is outside the span of the vertices.
pub fn gauge_lp(vertices: &[DVector<f64>], target: &DVector<f64>) -> Result<Option<GaugeSolution>> {
    let m = target.len();
    let k = vertices.len();
    let mut a = DMatrix::zeros(m, 2 * k);
    for (j, v) in vertices.iter().enumerate() {
        for i in 0..m {
            a[(i, j)] = v[i];
            a[(i, k + j)] = -v[i];
        }
    }
    let c = DVector::from_element(2 * k, 1.0);
    let Some(sol) = solve(&a, target, &c)? else {
        return Ok(None);
    };
    let mut weights = Vec::new();
    for j in 0..k {
        let w = sol.x[j] - sol.x[k + j];
        if w != 0.0 {
            weights.push((j, w));
        }
    }
    Ok(Some(GaugeSolution {
        gauge: sol.objective,
        weights,
    }))
}
