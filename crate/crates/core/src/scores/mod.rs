//! Question-selection scores.
//!
//! Both scores are indices of qualitative variation: 0 on degenerate
//! distributions, 1 on uniform ones. Entropy uses the logarithm in base
//! `|states|`; the deviation from the mode (DM) is `m (1 - max p) / (m - 1)`.

mod credal;

use serde::{Deserialize, Serialize};

pub use credal::{
    credal_conditional_dm_bounds, credal_conditional_dm_in, credal_conditional_entropy_lower,
    credal_dm_bounds, credal_entropy_lower, decoupled_conditional_entropy_lower, question_rows_given_skill,
    mode_cell_omega_bounds, CredalDmBounds, LowerScore, OmegaBounds, OmegaOptimum, DEFAULT_MODE_CAP,
};

use crate::bn::{self, Evidence};
use crate::error::Result;
use crate::model::{BayesianNetwork, Pmf, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Entropy,
    Dm,
}

/// A score or a pair of score bounds. Point scores have `lower == upper`.
/// `exact` is false when the bounds come from an approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreValue {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl ScoreValue {
    pub fn point(value: f64) -> Self {
        Self {
            lower: value,
            upper: value,
            exact: true,
        }
    }

    pub fn bounds(lower: f64, upper: f64, exact: bool) -> Self {
        Self { lower, upper, exact }
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Entropy in base `|states|`, with `0 log 0 = 0`.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

pub(crate) fn entropy_of(p: &[f64]) -> f64 {
    let base = (p.len() as f64).ln();
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    (h / base).max(0.0)
}

/// Deviation from the mode.
pub fn dm(p: &Pmf) -> f64 {
    dm_of_max(p.max_prob(), p.len())
}

/// Deviation from the mode in its summation form,
/// `1 - sum_v (max p - p(v)) / (m - 1)`.
pub fn dm_summation(p: &Pmf) -> f64 {
    let max = p.max_prob();
    let m = p.len() as f64;
    1.0 - p.probs().iter().map(|&x| max - x).sum::<f64>() / (m - 1.0)
}

pub(crate) fn dm_of_max(max: f64, m: usize) -> f64 {
    let m = m as f64;
    m * (1.0 - max) / (m - 1.0)
}

/// `H(S | Q)` of a joint `x[j][i] = P(s_j, q_i)`.
pub fn conditional_entropy_of_joint(x: &[Vec<f64>]) -> f64 {
    let n = x.first().map_or(0, Vec::len);
    let mut h = 0.0;
    let mut column = vec![0.0; x.len()];
    for i in 0..n {
        for (c, row) in column.iter_mut().zip(x) {
            *c = row[i];
        }
        let pq: f64 = column.iter().sum();
        if pq > 0.0 {
            for c in &mut column {
                *c /= pq;
            }
            h += pq * entropy_of(&column);
        }
    }
    h
}

/// `Omega = sum_i max_j x[j][i]`.
pub fn omega_of_joint(x: &[Vec<f64>]) -> f64 {
    let n = x.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| x.iter().map(|row| row[i]).fold(0.0, f64::max))
        .sum()
}

/// `M(S | Q)` of a joint, `m (1 - Omega) / (m - 1)`.
pub fn conditional_dm_of_joint(x: &[Vec<f64>]) -> f64 {
    dm_of_max(omega_of_joint(x), x.len())
}

/// `H(S | Q, e) = sum_i P(q_i | e) H(S | q_i, e)`.
pub fn conditional_entropy(net: &BayesianNetwork, s: VarId, q: VarId, evidence: &Evidence) -> Result<f64> {
    Ok(conditional_entropy_of_joint(&bn::joint_skill_question(net, s, q, evidence)?))
}

/// `M(S | Q, e) = sum_i P(q_i | e) M(S | q_i, e)`.
pub fn conditional_dm(net: &BayesianNetwork, s: VarId, q: VarId, evidence: &Evidence) -> Result<f64> {
    Ok(conditional_dm_of_joint(&bn::joint_skill_question(net, s, q, evidence)?))
}

/// Score of `S | e` minus score of `S | Q, e`. Entropy gains are clamped at
/// zero; DM gains are returned as computed.
pub fn score_gain(net: &BayesianNetwork, s: VarId, q: VarId, evidence: &Evidence, kind: ScoreKind) -> Result<f64> {
    let joint = bn::joint_skill_question(net, s, q, evidence)?;
    Ok(gain_of_joint(&joint, kind))
}

/// Gain computed from `P(s_j, q_i | e)` alone.
pub fn gain_of_joint(joint: &[Vec<f64>], kind: ScoreKind) -> f64 {
    let prior = Pmf::new_unchecked(joint.iter().map(|r| r.iter().sum()).collect());
    match kind {
        ScoreKind::Entropy => (entropy(&prior) - conditional_entropy_of_joint(joint)).max(0.0),
        ScoreKind::Dm => dm(&prior) - conditional_dm_of_joint(joint),
    }
}

pub fn score(p: &Pmf, kind: ScoreKind) -> f64 {
    match kind {
        ScoreKind::Entropy => entropy(p),
        ScoreKind::Dm => dm(p),
    }
}
