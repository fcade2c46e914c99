//! Exact inference in Bayesian networks.
//!
//! [`posterior`] and friends run variable elimination (min-degree order,
//! barren nodes pruned). [`SkillJoint`] is a compiled alternative for the
//! testing loop: it keeps the posterior over all skill configurations and
//! conditions on answers in place. [`oracle`] holds the brute-force joint
//! enumeration used to check both.

mod factor;
mod joint;
pub mod oracle;

use std::collections::BTreeMap;

pub use factor::Factor;
pub use joint::{SkillJoint, SkillSpace, MAX_SKILL_CONFIGS};

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Pmf, Role, Structure, VarId};

/// Observed answers: question variable to state index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Evidence {
    assignments: BTreeMap<VarId, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `q = state`, returning the previous state if `q` was already observed.
    pub fn insert(&mut self, q: VarId, state: usize) -> Option<usize> {
        self.assignments.insert(q, state)
    }

    pub fn with(&self, q: VarId, state: usize) -> Self {
        let mut e = self.clone();
        e.insert(q, state);
        e
    }

    pub fn remove(&mut self, q: VarId) -> Option<usize> {
        self.assignments.remove(&q)
    }

    pub fn get(&self, q: VarId) -> Option<usize> {
        self.assignments.get(&q).copied()
    }

    pub fn contains(&self, q: VarId) -> bool {
        self.assignments.contains_key(&q)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.assignments.iter().map(|(&q, &s)| (q, s))
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.assignments.keys().copied()
    }

    /// Builds evidence from `(question id, state label)` pairs.
    pub fn from_labels<'a>(
        structure: &Structure,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self> {
        let mut e = Evidence::new();
        for (q, label) in pairs {
            let v = structure.resolve(q)?;
            let s = structure.resolve_state(v, label)?;
            e.insert(v, s);
        }
        e.check(structure)?;
        Ok(e)
    }

    /// Every key must be a question and every state in range.
    pub fn check(&self, structure: &Structure) -> Result<()> {
        for (q, s) in self.iter() {
            if q.0 >= structure.len() {
                return Err(Error::UnknownVariable(format!("#{}", q.0)));
            }
            let var = structure.variable(q);
            if var.role != Role::Question {
                return Err(Error::NotAQuestion(var.id.clone()));
            }
            if s >= var.card() {
                return Err(Error::UnknownState {
                    var: var.id.clone(),
                    state: s.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `(question id, state label)` pairs in variable order.
    pub fn labels(&self, structure: &Structure) -> Vec<(String, String)> {
        self.iter()
            .map(|(q, s)| {
                let v = structure.variable(q);
                (v.id.clone(), v.states[s].clone())
            })
            .collect()
    }
}

impl FromIterator<(VarId, usize)> for Evidence {
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Self {
            assignments: iter.into_iter().collect(),
        }
    }
}

/// `P(target | e)` for a skill `target`.
pub fn posterior(net: &BayesianNetwork, target: VarId, evidence: &Evidence) -> Result<Pmf> {
    let var = net.variable(target);
    if var.role != Role::Skill {
        return Err(Error::NotASkill(var.id.clone()));
    }
    let f = joint_posterior(net, &[target], evidence)?;
    Ok(Pmf::new_unchecked(f.values))
}

/// `P(q | e)` for an unanswered question.
pub fn question_marginal(net: &BayesianNetwork, q: VarId, evidence: &Evidence) -> Result<Pmf> {
    let var = net.variable(q);
    if var.role != Role::Question {
        return Err(Error::NotAQuestion(var.id.clone()));
    }
    if evidence.contains(q) {
        return Err(Error::AlreadyAnswered(var.id.clone()));
    }
    let f = joint_posterior(net, &[q], evidence)?;
    Ok(Pmf::new_unchecked(f.values))
}

/// `P(s_j, q_i | e)` as a matrix indexed `[j][i]` (skill states by rows).
pub fn joint_skill_question(
    net: &BayesianNetwork,
    s: VarId,
    q: VarId,
    evidence: &Evidence,
) -> Result<Vec<Vec<f64>>> {
    if net.variable(s).role != Role::Skill {
        return Err(Error::NotASkill(net.variable(s).id.clone()));
    }
    if net.variable(q).role != Role::Question {
        return Err(Error::NotAQuestion(net.variable(q).id.clone()));
    }
    if evidence.contains(q) {
        return Err(Error::AlreadyAnswered(net.variable(q).id.clone()));
    }
    let f = joint_posterior(net, &[s, q], evidence)?;
    let n = net.card(q);
    Ok(f.values.chunks(n).map(<[f64]>::to_vec).collect())
}

/// `P(e)`.
pub fn evidence_probability(net: &BayesianNetwork, evidence: &Evidence) -> Result<f64> {
    evidence.check(net.structure())?;
    Ok(eliminate(net, &[], evidence).total())
}

/// Normalized joint posterior over `targets` (in the given order). Targets
/// must not be observed.
pub fn joint_posterior(net: &BayesianNetwork, targets: &[VarId], evidence: &Evidence) -> Result<Factor> {
    evidence.check(net.structure())?;
    for &t in targets {
        if evidence.contains(t) {
            return Err(Error::InvalidParameter(format!(
                "`{}` is both a query and an observation",
                net.variable(t).id
            )));
        }
    }
    let mut f = eliminate(net, targets, evidence);
    let total = f.total();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InconsistentEvidence);
    }
    for v in &mut f.values {
        *v /= total;
    }
    Ok(f)
}

/// Unnormalized `P(targets, e)` by variable elimination.
fn eliminate(net: &BayesianNetwork, targets: &[VarId], evidence: &Evidence) -> Factor {
    let s = net.structure();
    let keep = s.ancestral_closure(targets.iter().copied().chain(evidence.vars()));
    let cards = s.cards();

    let mut factors: Vec<Factor> = Vec::new();
    for v in s.ids().filter(|v| keep[v.0]) {
        let t = net.table(v);
        let mut vars = t.parents.clone();
        vars.push(v);
        let fc: Vec<usize> = vars.iter().map(|w| cards[w.0]).collect();
        let values: Vec<f64> = t.rows.iter().flat_map(|r| r.probs().iter().copied()).collect();
        let mut f = Factor::new(vars, fc, values);
        for (q, st) in evidence.iter() {
            if f.contains(q) {
                f = f.reduce(q, st);
            }
        }
        factors.push(f);
    }

    let mut hidden: Vec<VarId> = s
        .ids()
        .filter(|v| keep[v.0] && !targets.contains(v) && !evidence.contains(*v))
        .collect();
    while !hidden.is_empty() {
        // min-degree: fewest distinct neighbours in the current factor graph
        let (pos, _) = hidden
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut nb: Vec<VarId> = factors
                    .iter()
                    .filter(|f| f.contains(v))
                    .flat_map(|f| f.vars.iter().copied())
                    .filter(|&w| w != v)
                    .collect();
                nb.sort_unstable();
                nb.dedup();
                (i, nb.len())
            })
            .min_by_key(|&(i, d)| (d, hidden[i]))
            .expect("hidden is nonempty");
        let v = hidden.swap_remove(pos);
        let (with, without): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = without;
        if let Some(prod) = with.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(v));
        }
    }

    let joint = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::scalar(1.0));
    if targets.is_empty() {
        return Factor::scalar(joint.total());
    }
    joint.reorder(targets)
}
