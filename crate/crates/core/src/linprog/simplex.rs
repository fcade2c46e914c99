//! Two-phase primal simplex on a dense tableau with Bland's rule.

use super::{LpProblem, LpSolution, LpStatus, Relation, Sense};
use crate::error::{Error, Result};

/// Pivot and reduced-cost tolerance.
const EPS: f64 = 1e-10;
/// Feasibility and optimality tolerance of returned solutions.
pub const TOL: f64 = 1e-8;
const MAX_PIVOTS: usize = 100_000;

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let p = self.rows[r][c];
        for x in &mut self.rows[r] {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (x, y) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (x, y) in obj.iter_mut().zip(&pivot_row) {
                *x -= f * y;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Reduced-cost row for `cost` (length `width`), with `-z` in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj: Vec<f64> = cost.to_vec();
        obj.push(0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (x, y) in obj.iter_mut().zip(&self.rows[r]) {
                    *x -= cb * y;
                }
            }
        }
        obj
    }

    /// Minimizes `cost` over the columns flagged in `allowed`. Returns `false`
    /// if the problem is unbounded.
    fn minimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<bool> {
        let mut obj = self.reduced_costs(cost);
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Solver(format!(
                    "no convergence after {MAX_PIVOTS} pivots ({} rows, {} columns)",
                    self.rows.len(),
                    self.width
                )));
            }
            // Bland: lowest-index improving column
            let Some(c) = (0..self.width).find(|&j| allowed[j] && obj[j] < -EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c, &mut obj);
        }
    }
}

/// Solves `problem` exactly up to floating-point tolerance.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.check()?;
    let nv = problem.vars.len();

    // Column layout: one column per bounded variable, two per free one.
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(nv);
    let mut ncols = 0;
    for v in &problem.vars {
        if v.lower.is_some() {
            col_of.push((ncols, None));
            ncols += 1;
        } else {
            col_of.push((ncols, Some(ncols + 1)));
            ncols += 2;
        }
    }
    let structural = ncols;

    // Rows with nonnegative right-hand sides after shifting by the lower bounds.
    struct RowSpec {
        coeffs: Vec<f64>,
        rel: Relation,
        rhs: f64,
    }
    let mut specs = Vec::with_capacity(problem.constraints.len());
    for con in &problem.constraints {
        let mut coeffs = vec![0.0; structural];
        let mut rhs = con.rhs;
        for &(v, a) in &con.coeffs {
            let (pos, neg) = col_of[v];
            coeffs[pos] += a;
            if let Some(neg) = neg {
                coeffs[neg] -= a;
            }
            if let Some(l) = problem.vars[v].lower {
                rhs -= a * l;
            }
        }
        let mut rel = con.relation;
        if rhs < 0.0 {
            rhs = -rhs;
            for a in &mut coeffs {
                *a = -*a;
            }
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        specs.push(RowSpec { coeffs, rel, rhs });
    }

    let slacks = specs.iter().filter(|s| s.rel != Relation::Eq).count();
    let artificials = specs.iter().filter(|s| s.rel != Relation::Le).count();
    let width = structural + slacks + artificials;
    let mut rows = Vec::with_capacity(specs.len());
    let mut basis = Vec::with_capacity(specs.len());
    let (mut next_slack, mut next_art) = (structural, structural + slacks);
    for s in &specs {
        let mut row = vec![0.0; width + 1];
        row[..structural].copy_from_slice(&s.coeffs);
        row[width] = s.rhs;
        match s.rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis,
        width,
        pivots: 0,
    };
    let first_art = structural + slacks;

    if artificials > 0 {
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(first_art) {
            *c = 1.0;
        }
        let all = vec![true; width];
        t.minimize(&cost, &all)?;
        let infeas: f64 = (0..t.rows.len())
            .filter(|&r| t.basis[r] >= first_art)
            .map(|r| t.rhs(r))
            .sum();
        if infeas > TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                assignment: Vec::new(),
            });
        }
        // Drive remaining (zero-valued) artificials out of the basis; drop
        // rows where that is impossible, they are redundant.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= first_art {
                if let Some(c) = (0..first_art).find(|&j| t.rows[r][j].abs() > EPS) {
                    let mut dummy = vec![0.0; width + 1];
                    t.pivot(r, c, &mut dummy);
                } else {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }

    let mut cost = vec![0.0; width];
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    for (v, &c) in problem.objective.iter().enumerate() {
        let (pos, neg) = col_of[v];
        cost[pos] += sign * c;
        if let Some(neg) = neg {
            cost[neg] -= sign * c;
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| j < first_art).collect();
    if !t.minimize(&cost, &allowed)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: match problem.sense {
                Sense::Maximize => f64::INFINITY,
                Sense::Minimize => f64::NEG_INFINITY,
            },
            assignment: Vec::new(),
        });
    }

    let mut cols = vec![0.0; width];
    for (r, &b) in t.basis.iter().enumerate() {
        cols[b] = t.rhs(r);
    }
    let assignment: Vec<f64> = problem
        .vars
        .iter()
        .zip(&col_of)
        .map(|(v, &(pos, neg))| {
            let x = cols[pos] - neg.map_or(0.0, |n| cols[n]);
            x + v.lower.unwrap_or(0.0)
        })
        .collect();
    let value = problem.objective_value(&assignment);
    let solution = LpSolution {
        status: LpStatus::Optimal,
        value,
        assignment,
    };
    if let Some((tag, excess)) = problem.worst_violation(&solution.assignment) {
        if excess > TOL {
            return Err(Error::Solver(format!(
                "returned point violates `{tag}` by {excess:e} after {} pivots",
                t.pivots
            )));
        }
    }
    Ok(solution)
}
