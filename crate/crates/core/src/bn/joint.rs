use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Network, Pmf, VarId};

use super::Evidence;

/// Largest number of joint skill configurations [`SkillSpace`] will index.
pub const MAX_SKILL_CONFIGS: usize = 1 << 16;

/// Index of all joint skill configurations of a model, with the table row
/// each variable uses under each configuration.
///
/// Questions are leaves with skill parents only, so a skill configuration
/// fixes the row of every table in the model.
#[derive(Debug, Clone)]
pub struct SkillSpace {
    skills: Vec<VarId>,
    position: Vec<Option<usize>>,
    size: usize,
    states: Vec<Vec<u16>>,
    rows: Vec<Vec<u32>>,
}

impl SkillSpace {
    pub fn new<R>(net: &Network<R>) -> Result<Self> {
        let skills = net.skills();
        let cards = net.cards();
        let mut size: usize = 1;
        for s in &skills {
            size = size.saturating_mul(cards[s.0]);
        }
        if size > MAX_SKILL_CONFIGS {
            return Err(Error::Unsupported(format!(
                "{size} joint skill configurations exceed the compiled-evaluator limit {MAX_SKILL_CONFIGS}"
            )));
        }
        let mut position = vec![None; cards.len()];
        for (k, s) in skills.iter().enumerate() {
            position[s.0] = Some(k);
        }
        let mut states = vec![Vec::with_capacity(size); skills.len()];
        let mut assignment = vec![0usize; cards.len()];
        let mut rows = vec![Vec::with_capacity(size); cards.len()];
        for c in 0..size {
            let mut rest = c;
            for (k, s) in skills.iter().enumerate().rev() {
                let st = rest % cards[s.0];
                rest /= cards[s.0];
                assignment[s.0] = st;
                states[k].push(st as u16);
            }
            for v in net.structure().ids() {
                rows[v.0].push(net.table(v).row_for(cards, &assignment) as u32);
            }
        }
        Ok(Self {
            skills,
            position,
            size,
            states,
            rows,
        })
    }

    pub fn skills(&self) -> &[VarId] {
        &self.skills
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Position of skill `s` in [`SkillSpace::skills`].
    pub fn position(&self, s: VarId) -> Option<usize> {
        self.position.get(s.0).copied().flatten()
    }

    /// State of the `k`-th skill in configuration `c`.
    pub fn state(&self, k: usize, c: usize) -> usize {
        self.states[k][c] as usize
    }

    /// Row of `v`'s table used under configuration `c`.
    pub fn row(&self, v: VarId, c: usize) -> usize {
        self.rows[v.0][c] as usize
    }
}

/// Posterior over joint skill configurations, conditioned in place.
#[derive(Debug, Clone)]
pub struct SkillJoint {
    space: Arc<SkillSpace>,
    weights: Vec<f64>,
}

impl SkillJoint {
    pub fn new(net: &BayesianNetwork) -> Result<Self> {
        Ok(Self::prior(net, Arc::new(SkillSpace::new(net)?)))
    }

    pub fn prior(net: &BayesianNetwork, space: Arc<SkillSpace>) -> Self {
        let mut weights = vec![1.0; space.len()];
        for (k, &s) in space.skills().iter().enumerate() {
            let rows = &net.table(s).rows;
            for (c, w) in weights.iter_mut().enumerate() {
                *w *= rows[space.row(s, c)].get(space.state(k, c));
            }
        }
        Self { space, weights }
    }

    pub fn space(&self) -> &Arc<SkillSpace> {
        &self.space
    }

    /// Normalized weights, one per configuration.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn condition(&self, net: &BayesianNetwork, evidence: &Evidence) -> Result<Self> {
        let mut out = self.clone();
        for (q, s) in evidence.iter() {
            out.observe(net, q, s)?;
        }
        Ok(out)
    }

    /// Conditions on `q = state`.
    pub fn observe(&mut self, net: &BayesianNetwork, q: VarId, state: usize) -> Result<()> {
        let rows = &net.table(q).rows;
        let mut total = 0.0;
        for (c, w) in self.weights.iter_mut().enumerate() {
            *w *= rows[self.space.row(q, c)].get(state);
            total += *w;
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InconsistentEvidence);
        }
        for w in &mut self.weights {
            *w /= total;
        }
        Ok(())
    }

    pub fn marginal(&self, s: VarId, card: usize) -> Pmf {
        let k = self.space.position(s).expect("a skill of this model");
        let mut p = vec![0.0; card];
        for (c, w) in self.weights.iter().enumerate() {
            p[self.space.state(k, c)] += w;
        }
        Pmf::new_unchecked(p)
    }

    pub fn question_marginal(&self, net: &BayesianNetwork, q: VarId) -> Pmf {
        let rows = &net.table(q).rows;
        let mut p = vec![0.0; net.card(q)];
        for (c, w) in self.weights.iter().enumerate() {
            for (pi, r) in p.iter_mut().zip(rows[self.space.row(q, c)].probs()) {
                *pi += w * r;
            }
        }
        Pmf::new_unchecked(p)
    }

    /// `P(s_j, q_i | e)` indexed `[j][i]`.
    pub fn joint_with_question(&self, net: &BayesianNetwork, s: VarId, q: VarId) -> Vec<Vec<f64>> {
        let k = self.space.position(s).expect("a skill of this model");
        let rows = &net.table(q).rows;
        let mut m = vec![vec![0.0; net.card(q)]; net.card(s)];
        for (c, w) in self.weights.iter().enumerate() {
            let j = self.space.state(k, c);
            for (x, r) in m[j].iter_mut().zip(rows[self.space.row(q, c)].probs()) {
                *x += w * r;
            }
        }
        m
    }
}
