use serde::{Deserialize, Serialize};

use super::{conditional_entropy_of_joint, dm_of_max, entropy_of, ScoreValue};
use crate::bn::{Evidence, SkillSpace};
use crate::credal::{checked_total, posterior_bounds_in, Completions, CredalStrategy, StrategyKind};
use crate::error::{Error, Result};
use crate::linprog::{build_theorem1_problem, cell_var, solve, LpProblem, LpStatus, ModeAssignment, Relation, Sense};
use crate::model::{CredalNetwork, IntervalPmf, Role, VarId};

/// Default cap on the `m^n` mode assignments enumerated per question.
pub const DEFAULT_MODE_CAP: u64 = 1 << 12;

/// Bounds on the DM of a credal set: the lower bound comes from the largest
/// reachable singleton probability, the upper one from the smallest
/// achievable maximum, found by a small LP.
pub fn credal_dm_bounds(bounds: &IntervalPmf) -> Result<ScoreValue> {
    let m = bounds.len();
    let sum_l: f64 = bounds.lower().iter().sum();
    let max_upper = bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&l, &u)| u.min(1.0 - (sum_l - l)))
        .fold(f64::NEG_INFINITY, f64::max);

    // min t  s.t.  p_v <= t,  l <= p <= u,  sum p = 1
    let mut lp = LpProblem::new(Sense::Minimize);
    let t = lp.add_var("t", Some(0.0), 1.0);
    let p: Vec<usize> = (0..m)
        .map(|v| lp.add_var(format!("p{v}"), Some(bounds.lower()[v]), 0.0))
        .collect();
    for (v, &pv) in p.iter().enumerate() {
        lp.add_constraint("cap", vec![(pv, 1.0)], Relation::Le, bounds.upper()[v]);
        lp.add_constraint("max", vec![(pv, 1.0), (t, -1.0)], Relation::Le, 0.0);
    }
    lp.add_constraint("normalization", p.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
    let sol = solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::InconsistentInput("empty credal set".into()));
    }
    let lower = dm_of_max(max_upper, m).clamp(0.0, 1.0);
    let upper = dm_of_max(sol.value, m).clamp(lower, 1.0);
    Ok(ScoreValue::bounds(lower, upper, true))
}

/// Smallest entropy over an interval credal set, attained at a vertex.
pub fn credal_entropy_lower(bounds: &IntervalPmf) -> f64 {
    bounds
        .vertices()
        .iter()
        .map(|v| entropy_of(v.probs()))
        .fold(f64::INFINITY, f64::min)
}

/// Optimum of one Omega extreme: the value, the mode cell it lies in and
/// the optimal joint `x[j][i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaOptimum {
    pub value: f64,
    pub mode: ModeAssignment,
    pub joint: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaBounds {
    pub lower: OmegaOptimum,
    pub upper: OmegaOptimum,
}

/// Lower and upper `Omega = sum_i max_j P(s_j, q_i)` over joints whose
/// skill marginal lies in `skill` and whose conditionals `P(Q | s_j)` lie in
/// `rows[j]`. Solves one maximization and one minimization LP per mode
/// cell; infeasible cells are skipped.
pub fn mode_cell_omega_bounds(skill: &IntervalPmf, rows: &[IntervalPmf], cap: u64) -> Result<OmegaBounds> {
    let m = skill.len();
    let n = rows.first().map_or(0, IntervalPmf::len);
    let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::EnumerationCapExceeded { m, n, cap });
    }
    let mut upper: Option<OmegaOptimum> = None;
    let mut lower: Option<OmegaOptimum> = None;
    for mode in ModeAssignment::all(m, n) {
        for sense in [Sense::Maximize, Sense::Minimize] {
            let lp = build_theorem1_problem(skill, rows, &mode, sense)?;
            let sol = solve(&lp)?;
            if sol.status != LpStatus::Optimal {
                continue;
            }
            let joint: Vec<Vec<f64>> = (0..m)
                .map(|j| (0..n).map(|i| sol.assignment[cell_var(i, j, m)]).collect())
                .collect();
            let candidate = OmegaOptimum {
                value: sol.value,
                mode: mode.clone(),
                joint,
            };
            let slot = match sense {
                Sense::Maximize => &mut upper,
                Sense::Minimize => &mut lower,
            };
            let improves = slot.as_ref().is_none_or(|best| match sense {
                Sense::Maximize => candidate.value > best.value,
                Sense::Minimize => candidate.value < best.value,
            });
            if improves {
                *slot = Some(candidate);
            }
        }
    }
    match (lower, upper) {
        (Some(lower), Some(upper)) => Ok(OmegaBounds { lower, upper }),
        _ => Err(Error::InconsistentInput(
            "every mode cell is infeasible for these intervals".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CredalDmBounds {
    pub score: ScoreValue,
    pub omega: OmegaBounds,
}

/// Bounds on the conditional DM `M(S | Q)` from skill-marginal bounds and
/// per-skill-state question rows. The upper Omega gives the lower DM and
/// vice versa.
pub fn credal_conditional_dm_bounds(skill: &IntervalPmf, rows: &[IntervalPmf], cap: u64) -> Result<CredalDmBounds> {
    let omega = mode_cell_omega_bounds(skill, rows, cap)?;
    let m = skill.len();
    let lower = dm_of_max(omega.upper.value, m).clamp(0.0, 1.0);
    let upper = dm_of_max(omega.lower.value, m).clamp(lower, 1.0);
    Ok(CredalDmBounds {
        score: ScoreValue::bounds(lower, upper, true),
        omega,
    })
}

/// Conditional DM bounds of skill `s` for question `q` in a credal network.
///
/// The skill bounds are the credal posterior given `e` and the question
/// rows are those of [`question_rows_given_skill`]. Treating the two
/// separately relaxes their coupling, so the result is flagged exact only
/// without evidence, for a root skill that is the sole parent of `q`.
#[allow(clippy::too_many_arguments)]
pub fn credal_conditional_dm_in(
    net: &CredalNetwork,
    space: &SkillSpace,
    s: VarId,
    q: VarId,
    evidence: &Evidence,
    strategy: &CredalStrategy,
    cap: u64,
) -> Result<CredalDmBounds> {
    let skill = posterior_bounds_in(net, space, s, evidence, strategy)?;
    let rows = question_rows_given_skill(net, q, s)?;
    let mut out = credal_conditional_dm_bounds(&skill.bounds, &rows, cap)?;
    out.score.exact = skill.exact
        && evidence.is_empty()
        && net.table(q).parents == [s]
        && net.structure().graph_parents(s).is_empty();
    Ok(out)
}

/// Interval rows bounding `P(Q | s_j)` for each state of `s`: the hull of
/// `Q`'s rows over parent configurations compatible with `s_j` (all of them
/// when `s` is not a parent of `Q`). Exact when `s` is the only parent.
pub fn question_rows_given_skill(net: &CredalNetwork, q: VarId, s: VarId) -> Result<Vec<IntervalPmf>> {
    if net.variable(q).role != Role::Question {
        return Err(Error::NotAQuestion(net.variable(q).id.clone()));
    }
    if net.variable(s).role != Role::Skill {
        return Err(Error::NotASkill(net.variable(s).id.clone()));
    }
    let table = net.table(q);
    let cards = net.cards();
    let pos = table.parents.iter().position(|&p| p == s);
    let n = net.card(q);
    let mut out = Vec::with_capacity(net.card(s));
    for j in 0..net.card(s) {
        let mut lower = vec![f64::INFINITY; n];
        let mut upper = vec![f64::NEG_INFINITY; n];
        for (r, row) in table.rows.iter().enumerate() {
            if let Some(k) = pos {
                if table.parent_states(cards, r)[k] != j {
                    continue;
                }
            }
            for i in 0..n {
                lower[i] = lower[i].min(row.lower()[i]);
                upper[i] = upper[i].max(row.upper()[i]);
            }
        }
        out.push(IntervalPmf::new_unchecked(lower, upper));
    }
    Ok(out)
}

/// A lower bound on a score and whether it is exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerScore {
    pub value: f64,
    pub exact: bool,
}

/// Smallest `H(S | Q)` over joints with skill marginal in `skill` and
/// conditionals in `rows`.
///
/// `H(S | Q)` is concave in the joint, and the joint is linear in the skill
/// marginal and in each row separately, so the minimum sits at a product of
/// vertices.
pub fn decoupled_conditional_entropy_lower(skill: &IntervalPmf, rows: &[IntervalPmf]) -> Result<f64> {
    let skill_vs = skill.vertices();
    let row_vs: Vec<_> = rows.iter().map(IntervalPmf::vertices).collect();
    let count = row_vs
        .iter()
        .fold(skill_vs.len() as u128, |acc, v| acc.saturating_mul(v.len() as u128));
    let cap = crate::credal::DEFAULT_MAX_VERTICES;
    if count > cap as u128 {
        return Err(Error::VertexCapExceeded { needed: count, cap });
    }
    let m = skill.len();
    let mut best = f64::INFINITY;
    let mut digit = vec![0usize; m];
    let mut joint = vec![Vec::new(); m];
    for p in &skill_vs {
        loop {
            for j in 0..m {
                let r = row_vs[j][digit[j]].probs();
                joint[j] = r.iter().map(|x| p.get(j) * x).collect();
            }
            best = best.min(conditional_entropy_of_joint(&joint));
            let mut k = m;
            let mut done = true;
            while k > 0 {
                k -= 1;
                digit[k] += 1;
                if digit[k] < row_vs[k].len() {
                    done = false;
                    break;
                }
                digit[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    Ok(best)
}

/// Smallest `H(S | Q, e)` over the Bayesian completions of the network,
/// by vertex enumeration or coordinate ascent per `strategy`.
pub fn credal_conditional_entropy_lower(
    net: &CredalNetwork,
    space: &SkillSpace,
    s: VarId,
    q: VarId,
    evidence: &Evidence,
    strategy: &CredalStrategy,
) -> Result<LowerScore> {
    if net.variable(s).role != Role::Skill {
        return Err(Error::NotASkill(net.variable(s).id.clone()));
    }
    if net.variable(q).role != Role::Question {
        return Err(Error::NotAQuestion(net.variable(q).id.clone()));
    }
    if evidence.contains(q) {
        return Err(Error::AlreadyAnswered(net.variable(q).id.clone()));
    }
    let family = Completions::new(net, space, &[s], evidence, Some(q))?;
    let n = family.extra_card;
    let m = net.card(s);
    let k = space.position(s).expect("skills are indexed");
    let joint_of = |w: &[f64], total: f64| -> Vec<Vec<f64>> {
        let mut x = vec![vec![0.0; n]; m];
        for (cell, &wc) in w.iter().enumerate() {
            x[space.state(k, cell / n)][cell % n] += wc / total;
        }
        x
    };
    let method = strategy.resolve(family.vertex_count())?;
    let value = match method {
        StrategyKind::VertexEnumeration => {
            let mut best = f64::INFINITY;
            family.enumerate(|w| {
                let total = checked_total(w)?;
                best = best.min(conditional_entropy_of_joint(&joint_of(w, total)));
                Ok(())
            })?;
            best
        }
        _ => {
            let objective = |w: &[f64]| {
                let total: f64 = w.iter().sum();
                conditional_entropy_of_joint(&joint_of(w, total))
            };
            family.ascend(&objective, false, strategy.restarts, strategy.seed)
        }
    };
    if !value.is_finite() {
        return Err(Error::InconsistentEvidence);
    }
    Ok(LowerScore {
        value,
        exact: method == StrategyKind::VertexEnumeration,
    })
}
