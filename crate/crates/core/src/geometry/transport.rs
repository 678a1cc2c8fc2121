//! Exact balanced transportation problem by the primal simplex method on
//! the transportation polytope (northwest-corner start, block pricing with
//! Bland's rule as the anti-cycling fallback).

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Serialize;

use super::StateCloud;
use crate::error::{Error, Result};

const MARGINAL_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct TransportPlan {
    /// `coupling[(i, j)]` is the mass moved from point `i` to point `j`.
    #[serde(serialize_with = "serialize_rows")]
    pub coupling: DMatrix<f64>,
    pub cost: f64,
}

/// An optimal basic solution together with its optimality certificate.
#[derive(Debug, Clone, Serialize)]
pub struct TransportSolution {
    pub plan: TransportPlan,
    /// Dual potentials with `u_i + v_j = c_ij` on the basis.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub dual_objective: f64,
    /// `|primal - dual|`.
    pub duality_gap: f64,
    /// Most negative reduced cost `c_ij - u_i - v_j` (0 when dual feasible).
    pub min_reduced_cost: f64,
    pub marginal_residual: f64,
    pub pivots: usize,
}

fn serialize_rows<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

struct Simplex<'a> {
    supply: &'a [f64],
    demand: &'a [f64],
    cost: &'a DMatrix<f64>,
    flow: DMatrix<f64>,
    basis: Vec<(usize, usize)>,
    in_basis: DMatrix<bool>,
}

impl<'a> Simplex<'a> {
    fn northwest(supply: &'a [f64], demand: &'a [f64], cost: &'a DMatrix<f64>) -> Self {
        let (m, n) = (supply.len(), demand.len());
        let mut flow = DMatrix::zeros(m, n);
        let mut in_basis = DMatrix::from_element(m, n, false);
        let mut basis = Vec::with_capacity(m + n - 1);
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0, 0);
        while i < m && j < n {
            let x = s[i].min(d[j]).max(0.0);
            flow[(i, j)] = x;
            in_basis[(i, j)] = true;
            basis.push((i, j));
            s[i] -= x;
            d[j] -= x;
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || s[i] <= d[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            supply,
            demand,
            cost,
            flow,
            basis,
            in_basis,
        }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // Nodes 0..m are rows, m..m+n columns; edges carry the basis index.
        let m = self.supply.len();
        let mut adj = vec![Vec::new(); m + self.demand.len()];
        for (e, &(i, j)) in self.basis.iter().enumerate() {
            adj[i].push((m + j, e));
            adj[m + j].push((i, e));
        }
        adj
    }

    fn potentials(&self) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.supply.len(), self.demand.len());
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &adj[x] {
                if pot[y].is_nan() {
                    let (i, j) = self.basis[e];
                    pot[y] = self.cost[(i, j)] - pot[x];
                    queue.push_back(y);
                }
            }
        }
        (pot[..m].to_vec(), pot[m..].to_vec())
    }

    /// Basis cells on the tree path from column `j` to row `i`, in order.
    fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let m = self.supply.len();
        let adj = self.adjacency();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
        let mut seen = vec![false; adj.len()];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(x) = queue.pop_front() {
            if x == m + j {
                break;
            }
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        let mut cells = Vec::new();
        let mut x = m + j;
        while x != i {
            let (p, e) = parent[x].expect("basis is a spanning tree");
            cells.push(e);
            x = p;
        }
        cells
    }

    /// Most negative reduced cost in the first block (in cyclic order from
    /// `cursor`) that has any; `None` when the basis is optimal.
    fn block_search(&self, u: &[f64], v: &[f64], tol: f64, cursor: &mut usize) -> Option<(usize, usize)> {
        let n = self.demand.len();
        let cells = self.supply.len() * n;
        let block = ((cells as f64).sqrt() as usize).max(16);
        let mut best = None;
        let mut best_rc = -tol;
        for step in 0..cells {
            let c = (*cursor + step) % cells;
            let (i, j) = (c / n, c % n);
            if !self.in_basis[(i, j)] {
                let rc = self.cost[(i, j)] - u[i] - v[j];
                if rc < best_rc {
                    best_rc = rc;
                    best = Some((i, j));
                }
            }
            if best.is_some() && (step + 1) % block == 0 {
                *cursor = (c + 1) % cells;
                return best;
            }
        }
        best
    }

    /// First cell in row-major order with negative reduced cost.
    fn bland_search(&self, u: &[f64], v: &[f64], tol: f64) -> Option<(usize, usize)> {
        let (m, n) = (self.supply.len(), self.demand.len());
        (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| !self.in_basis[(i, j)] && self.cost[(i, j)] - u[i] - v[j] < -tol)
    }

    /// Block pricing while the objective decreases; Bland's rule after a
    /// run of degenerate pivots, until the next nondegenerate one.
    fn solve(&mut self, tol: f64) -> Result<usize> {
        let (m, n) = (self.supply.len(), self.demand.len());
        let limit = 50 * (m + n) * (m + n) + 1000;
        let degenerate_limit = m + n;
        let mut degenerate_run = 0;
        let mut cursor = 0;
        for pivot in 0..limit {
            let (u, v) = self.potentials();
            let entering = if degenerate_run > degenerate_limit {
                self.bland_search(&u, &v, tol)
            } else {
                self.block_search(&u, &v, tol, &mut cursor)
            };
            let Some((ei, ej)) = entering else {
                return Ok(pivot);
            };
            let cycle = self.path(ei, ej);
            // Cells at even positions of the path lose mass.
            let mut leave = None;
            let mut theta = f64::INFINITY;
            for &e in cycle.iter().step_by(2) {
                let (i, j) = self.basis[e];
                let x = self.flow[(i, j)];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        let (li, lj) = self.basis[l];
                        x < theta - 1e-15 || (x <= theta + 1e-15 && (i, j) < (li, lj))
                    }
                };
                if better {
                    theta = theta.min(x);
                    leave = Some(e);
                }
            }
            let leave = leave.expect("cycle has a decreasing cell");
            let theta = theta.max(0.0);
            if theta <= 1e-15 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.flow[(ei, ej)] = theta;
            for (k, &e) in cycle.iter().enumerate() {
                let (i, j) = self.basis[e];
                if k % 2 == 0 {
                    self.flow[(i, j)] = (self.flow[(i, j)] - theta).max(0.0);
                } else {
                    self.flow[(i, j)] += theta;
                }
            }
            let (li, lj) = self.basis[leave];
            self.flow[(li, lj)] = 0.0;
            self.in_basis[(li, lj)] = false;
            self.in_basis[(ei, ej)] = true;
            self.basis[leave] = (ei, ej);
        }
        Err(Error::Transport(format!("no optimum after {limit} pivots")))
    }
}

/// Solves `min sum c_ij x_ij` over couplings of `supply` and `demand`.
pub fn transport(supply: &[f64], demand: &[f64], cost: &DMatrix<f64>) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::EmptyCloud);
    }
    if cost.nrows() != m || cost.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: cost.nrows() * cost.ncols(),
        });
    }
    let imbalance = (supply.iter().sum::<f64>() - demand.iter().sum::<f64>()).abs();
    if imbalance > 1e-9 {
        return Err(Error::Transport(format!("unbalanced marginals (difference {imbalance:e})")));
    }
    let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-13 * scale;
    let mut simplex = Simplex::northwest(supply, demand, cost);
    let pivots = simplex.solve(tol)?;
    let (u, v) = simplex.potentials();

    let flow = simplex.flow;
    let primal: f64 = flow.iter().zip(cost.iter()).map(|(x, c)| x * c).sum();
    let dual_objective: f64 =
        supply.iter().zip(&u).map(|(a, x)| a * x).sum::<f64>() + demand.iter().zip(&v).map(|(b, y)| b * y).sum::<f64>();
    let mut min_reduced_cost = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            min_reduced_cost = min_reduced_cost.min(cost[(i, j)] - u[i] - v[j]);
        }
    }
    let row_residual = (0..m).map(|i| (flow.row(i).sum() - supply[i]).abs()).fold(0.0, f64::max);
    let col_residual = (0..n).map(|j| (flow.column(j).sum() - demand[j]).abs()).fold(0.0, f64::max);
    let marginal_residual = row_residual.max(col_residual);
    let duality_gap = (primal - dual_objective).abs();
    if duality_gap > DUALITY_TOL || marginal_residual > MARGINAL_TOL || min_reduced_cost < -DUALITY_TOL {
        return Err(Error::Transport(format!(
            "certificate failed: gap {duality_gap:e}, marginals {marginal_residual:e}, reduced cost {min_reduced_cost:e}"
        )));
    }
    Ok(TransportSolution {
        plan: TransportPlan {
            coupling: flow,
            cost: primal.max(0.0),
        },
        u,
        v,
        dual_objective,
        duality_gap,
        min_reduced_cost,
        marginal_residual,
        pivots,
    })
}

/// Squared HS distances between the points of two clouds.
pub fn cost_matrix(a: &StateCloud, b: &StateCloud) -> Result<DMatrix<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let mut cost = DMatrix::zeros(a.len(), b.len());
    for (i, p) in a.points().iter().enumerate() {
        for (j, q) in b.points().iter().enumerate() {
            cost[(i, j)] = p.point.hs_distance(&q.point)?.powi(2);
        }
    }
    Ok(cost)
}

/// Quadratic Wasserstein distance between two clouds and an optimal coupling.
pub fn wasserstein(a: &StateCloud, b: &StateCloud) -> Result<(f64, TransportSolution)> {
    let cost = cost_matrix(a, b)?;
    let solution = transport(&a.weights(), &b.weights(), &cost)?;
    Ok((solution.plan.cost.sqrt(), solution))
}
