//! Small dense linear programs and the mode-cell problems that bound the
//! conditional deviation from the mode.

mod simplex;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::IntervalPmf;

pub use simplex::{solve, TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// A decision variable; `lower = None` means free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpVar {
    pub name: String,
    pub lower: Option<f64>,
}

/// `sum coeffs . x  relation  rhs`, with a tag naming the constraint family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub tag: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub vars: Vec<LpVar>,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Status, optimum and optimizer. `value` is NaN and `assignment` empty
/// unless the status is optimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub assignment: Vec<f64>,
}

impl LpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            vars: Vec::new(),
            objective: Vec::new(),
            sense,
            constraints: Vec::new(),
        }
    }

    /// Adds a variable bounded below by `lower` and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: Option<f64>, cost: f64) -> usize {
        self.vars.push(LpVar {
            name: name.into(),
            lower,
        });
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        tag: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            tag: tag.into(),
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn check(&self) -> Result<()> {
        if self.objective.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} objective coefficients for {} variables",
                self.objective.len(),
                self.vars.len()
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite objective coefficient".into()));
        }
        for v in &self.vars {
            if matches!(v.lower, Some(l) if !l.is_finite()) {
                return Err(Error::InvalidParameter(format!("variable `{}` has a non-finite bound", v.name)));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(Error::InvalidParameter(format!("constraint `{}` has a non-finite constant", c.tag)));
            }
            for &(v, a) in &c.coeffs {
                if v >= self.vars.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "constraint `{}` references undeclared variable #{v}",
                        c.tag
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "constraint `{}` has a non-finite coefficient",
                        c.tag
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// The most violated constraint or bound at `x` and by how much, if any
    /// is violated at all.
    pub fn worst_violation(&self, x: &[f64]) -> Option<(String, f64)> {
        let mut worst: Option<(String, f64)> = None;
        let mut consider = |tag: &str, excess: f64| {
            if excess > 0.0 && worst.as_ref().is_none_or(|w| excess > w.1) {
                worst = Some((tag.to_string(), excess));
            }
        };
        for (v, &xv) in self.vars.iter().zip(x) {
            if let Some(l) = v.lower {
                consider(&v.name, l - xv);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(v, a)| a * x[v]).sum();
            let excess = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            consider(&c.tag, excess);
        }
        worst
    }

    /// Renders the problem in the LP text format understood by common solvers.
    pub fn to_lp_format(&self) -> String {
        let term_list = |coeffs: &mut dyn Iterator<Item = (usize, f64)>| {
            let mut s = String::new();
            for (v, a) in coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                let _ = write!(s, " {sign} {} {}", a.abs(), self.vars[v].name);
            }
            if s.is_empty() {
                s.push_str(" 0");
            }
            s
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let mut obj = self.objective.iter().copied().enumerate().filter(|&(_, c)| c != 0.0);
        let _ = writeln!(out, " obj:{}", term_list(&mut obj));
        out.push_str("Subject To\n");
        for (k, c) in self.constraints.iter().enumerate() {
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let mut it = c.coeffs.iter().copied();
            let _ = writeln!(out, " c{k}_{}:{} {rel} {}", c.tag, term_list(&mut it), c.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            match v.lower {
                Some(l) => {
                    let _ = writeln!(out, " {} >= {l}", v.name);
                }
                None => {
                    let _ = writeln!(out, " {} free", v.name);
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

/// For each question state `i`, the skill state designated as the mode of
/// the column `x_{i.}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeAssignment {
    pub jhat: Vec<usize>,
}

impl ModeAssignment {
    /// All `m^n` assignments in lexicographic order (last entry fastest).
    pub fn all(m: usize, n: usize) -> impl Iterator<Item = ModeAssignment> {
        let total = (m as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        (0..total).map(move |mut k| {
            let mut jhat = vec![0; n];
            for slot in jhat.iter_mut().rev() {
                *slot = (k % m as u64) as usize;
                k /= m as u64;
            }
            ModeAssignment { jhat }
        })
    }
}

/// Constraint tags of the mode-cell problem.
pub mod tags {
    pub const NORMALIZATION: &str = "normalization";
    pub const NONNEGATIVITY: &str = "nonnegativity";
    pub const SKILL_LOWER: &str = "skill_lower";
    pub const SKILL_UPPER: &str = "skill_upper";
    pub const ROW_LOWER: &str = "row_lower";
    pub const ROW_UPPER: &str = "row_upper";
    pub const MODE: &str = "mode";
}

/// Index of `x_ij` (question state `i`, skill state `j`) among the variables
/// of a mode-cell problem with `m` skill states.
pub fn cell_var(i: usize, j: usize, m: usize) -> usize {
    i * m + j
}

/// The linear program over joints `x_ij = P(s_j, q_i)` whose optimum is the
/// extreme of `sum_i x_{i jhat_i}` within the mode cell of `mode`.
///
/// `skill` bounds the marginal of `S` (m states); `rows[j]` bounds
/// `P(Q | s_j)` (n states each). The conditional bounds are linearized as
/// `l_ij * sum_k x_kj <= x_ij <= u_ij * sum_k x_kj`.
pub fn build_theorem1_problem(
    skill: &IntervalPmf,
    rows: &[IntervalPmf],
    mode: &ModeAssignment,
    sense: Sense,
) -> Result<LpProblem> {
    let m = skill.len();
    if rows.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} question rows for a skill with {m} states",
            rows.len()
        )));
    }
    let n = rows.first().map_or(0, IntervalPmf::len);
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("question rows differ in length".into()));
    }
    if mode.jhat.len() != n || mode.jhat.iter().any(|&j| j >= m) {
        return Err(Error::DimensionMismatch(format!(
            "mode assignment {:?} does not fit {m} skill states and {n} answers",
            mode.jhat
        )));
    }

    let mut lp = LpProblem::new(sense);
    for i in 0..n {
        for j in 0..m {
            let cost = if mode.jhat[i] == j { 1.0 } else { 0.0 };
            lp.add_var(format!("x_{i}_{j}"), Some(0.0), cost);
        }
    }
    let x = |i: usize, j: usize| cell_var(i, j, m);

    let all: Vec<(usize, f64)> = (0..n * m).map(|v| (v, 1.0)).collect();
    lp.add_constraint(tags::NORMALIZATION, all, Relation::Eq, 1.0);
    for i in 0..n {
        for j in 0..m {
            lp.add_constraint(tags::NONNEGATIVITY, vec![(x(i, j), 1.0)], Relation::Ge, 0.0);
        }
    }
    for j in 0..m {
        let column: Vec<(usize, f64)> = (0..n).map(|i| (x(i, j), 1.0)).collect();
        lp.add_constraint(tags::SKILL_LOWER, column.clone(), Relation::Ge, skill.lower()[j]);
        lp.add_constraint(tags::SKILL_UPPER, column, Relation::Le, skill.upper()[j]);
    }
    for (j, row) in rows.iter().enumerate() {
        for i in 0..n {
            // x_ij - l * sum_k x_kj >= 0 and x_ij - u * sum_k x_kj <= 0
            for (bound, rel, tag) in [
                (row.lower()[i], Relation::Ge, tags::ROW_LOWER),
                (row.upper()[i], Relation::Le, tags::ROW_UPPER),
            ] {
                let coeffs = (0..n)
                    .map(|k| (x(k, j), if k == i { 1.0 - bound } else { -bound }))
                    .collect();
                lp.add_constraint(tag, coeffs, rel, 0.0);
            }
        }
    }
    for i in 0..n {
        let jh = mode.jhat[i];
        for j in 0..m {
            let coeffs = if j == jh {
                vec![(x(i, jh), 0.0)]
            } else {
                vec![(x(i, jh), 1.0), (x(i, j), -1.0)]
            };
            lp.add_constraint(tags::MODE, coeffs, Relation::Ge, 0.0);
        }
    }
    Ok(lp)
}
