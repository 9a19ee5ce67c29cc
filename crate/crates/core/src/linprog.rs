//! Dense two-phase primal simplex for max/min k·x subject to A·x ≤ b with
//! free x.
//!
//! Free variables are split as x = x⁺ − x⁻. Rows with negative right-hand
//! side get an artificial variable; phase one drives the artificials to
//! zero, phase two optimizes the real objective. Bland's rule is used for
//! both entering and leaving variables, so the solver cannot cycle and is
//! deterministic.

use crate::error::{Error, Result};
use crate::operators::dot_product;
use crate::polytope::{HalfSpace, Polyhedron};

/// Reduced-cost optimality tolerance.
const OPTIMALITY_TOL: f64 = 1e-9;
/// Phase-one residual above which the problem is declared infeasible.
const FEASIBILITY_TOL: f64 = 1e-9;
/// Smallest admissible pivot magnitude.
const PIVOT_TOL: f64 = 1e-11;
/// Constraint violation tolerated in a returned optimal point.
const CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct LpProblem<'a> {
    pub objective: Vec<f64>,
    pub poly: &'a Polyhedron,
    pub sense: Sense,
}

impl<'a> LpProblem<'a> {
    pub fn new(objective: Vec<f64>, poly: &'a Polyhedron, sense: Sense) -> Result<Self> {
        if objective.len() != poly.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "LP objective",
                expected: poly.ambient_dim(),
                found: objective.len(),
            });
        }
        Ok(Self {
            objective,
            poly,
            sense,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value at `point`; NaN unless optimal.
    pub value: f64,
    /// Optimal point; empty unless optimal.
    pub point: Vec<f64>,
    pub iterations: usize,
}

pub fn solve(problem: &LpProblem<'_>) -> Result<LpSolution> {
    solve_constraints(&problem.objective, problem.poly.halfspaces(), problem.sense)
}

/// Optimize over an explicit list of half-spaces.
pub fn solve_constraints(
    objective: &[f64],
    constraints: &[HalfSpace],
    sense: Sense,
) -> Result<LpSolution> {
    let n = objective.len();
    if let Some(h) = constraints.iter().find(|h| h.normal.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "LP constraint",
            expected: n,
            found: h.normal.len(),
        });
    }
    let mut tableau = Tableau::new(constraints, n);
    let mut iterations = 0;

    // Phase one: maximize −Σ artificials.
    if tableau.num_artificial > 0 {
        let mut cost = vec![0.0; tableau.width()];
        for c in cost.iter_mut().skip(tableau.first_artificial()) {
            *c = -1.0;
        }
        tableau.set_objective(&cost);
        let limit = tableau.width();
        match tableau.run(limit, &mut iterations)? {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => {
                return Err(Error::Numerical("phase one reported unbounded".into()))
            }
        }
        if -tableau.objective_value() > FEASIBILITY_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                point: Vec::new(),
                iterations,
            });
        }
        tableau.evict_artificials();
    }

    // Phase two over structural and slack columns only.
    let sign = match sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cost = vec![0.0; tableau.width()];
    for j in 0..n {
        cost[j] = sign * objective[j];
        cost[n + j] = -sign * objective[j];
    }
    tableau.set_objective(&cost);
    let limit = tableau.first_artificial();
    if tableau.run(limit, &mut iterations)? == PhaseOutcome::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: f64::NAN,
            point: Vec::new(),
            iterations,
        });
    }

    let point = tableau.structural_point();
    for (i, h) in constraints.iter().enumerate() {
        let slack = h.slack(&point);
        if slack < -CERTIFICATE_TOL {
            return Err(Error::Numerical(format!(
                "optimal point violates constraint {i} by {:e}",
                -slack
            )));
        }
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: dot_product(objective, &point),
        point,
        iterations,
    })
}

#[derive(Debug, PartialEq, Eq)]
enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Canonical-form tableau. Columns: x⁺ (n), x⁻ (n), slacks (m), artificials.
struct Tableau {
    n: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs c_j − c_B·B⁻¹A_j, maximization convention.
    reduced: Vec<f64>,
    /// −c_B·B⁻¹b.
    reduced_rhs: f64,
    num_slack: usize,
    num_artificial: usize,
}

impl Tableau {
    fn new(constraints: &[HalfSpace], n: usize) -> Self {
        let m = constraints.len();
        let num_artificial = constraints.iter().filter(|h| h.offset < 0.0).count();
        let width = 2 * n + m + num_artificial;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_artificial = 2 * n + m;
        for (i, h) in constraints.iter().enumerate() {
            let sign = if h.offset < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for (j, &a) in h.normal.iter().enumerate() {
                row[j] = sign * a;
                row[n + j] = -sign * a;
            }
            row[2 * n + i] = sign;
            if sign < 0.0 {
                row[next_artificial] = 1.0;
                basis.push(next_artificial);
                next_artificial += 1;
            } else {
                basis.push(2 * n + i);
            }
            rows.push(row);
            rhs.push(sign * h.offset);
        }
        Self {
            n,
            rows,
            rhs,
            basis,
            reduced: vec![0.0; width],
            reduced_rhs: 0.0,
            num_slack: m,
            num_artificial,
        }
    }

    fn width(&self) -> usize {
        2 * self.n + self.num_slack + self.num_artificial
    }

    fn first_artificial(&self) -> usize {
        2 * self.n + self.num_slack
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.reduced = cost.to_vec();
        self.reduced_rhs = 0.0;
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            for (red, &t) in self.reduced.iter_mut().zip(&self.rows[r]) {
                *red -= cb * t;
            }
            self.reduced_rhs -= cb * self.rhs[r];
        }
    }

    fn objective_value(&self) -> f64 {
        -self.reduced_rhs
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][q];
        for t in self.rows[r].iter_mut() {
            *t /= p;
        }
        self.rhs[r] /= p;
        self.rows[r][q] = 1.0;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][q];
            if f == 0.0 {
                continue;
            }
            for (t, &pr) in self.rows[i].iter_mut().zip(&pivot_row) {
                *t -= f * pr;
            }
            self.rows[i][q] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (t, &pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *t -= f * pr;
            }
            self.reduced[q] = 0.0;
            self.reduced_rhs -= f * pivot_rhs;
        }
        self.basis[r] = q;
    }

    /// Simplex iterations with Bland's rule over columns `0..limit`.
    fn run(&mut self, limit: usize, iterations: &mut usize) -> Result<PhaseOutcome> {
        let cap = 50_000 + 100 * (self.rows.len() + self.width());
        loop {
            let Some(q) = (0..limit).find(|&j| self.reduced[j] > OPTIMALITY_TOL) else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[q];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[i].max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return Ok(PhaseOutcome::Unbounded);
            };
            self.pivot(r, q);
            *iterations += 1;
            if *iterations > cap {
                return Err(Error::Numerical(format!(
                    "simplex exceeded {cap} iterations"
                )));
            }
        }
    }

    /// Pivot zero-level artificials out of the basis; drop rows that are
    /// linear combinations of others.
    fn evict_artificials(&mut self) {
        let first = self.first_artificial();
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < first {
                r += 1;
                continue;
            }
            let replacement = (0..first).find(|&j| self.rows[r][j].abs() > 1e-9);
            match replacement {
                Some(q) => {
                    self.pivot(r, q);
                    r += 1;
                }
                None => {
                    self.rows.remove(r);
                    self.rhs.remove(r);
                    self.basis.remove(r);
                }
            }
        }
    }

    fn structural_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] += self.rhs[r];
            } else if b < 2 * self.n {
                x[b - self.n] -= self.rhs[r];
            }
        }
        x
    }
}
