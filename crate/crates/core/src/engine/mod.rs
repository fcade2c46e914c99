//! The testing loop: decide whether to stop, pick a question, take the
//! answer, evaluate.
//!
//! A [`TestEngine`] fixes the model, the question repository and the
//! policies; a [`SessionState`] holds one test taker's progress. Posteriors
//! are cached in the session and refreshed on every answer, so picking,
//! stopping and evaluation only read the cache.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bn::{Evidence, SkillJoint, SkillSpace};
use crate::credal::{credal_skill_bounds, midpoint, mix, CredalBounds, CredalStrategy};
use crate::error::{Error, Result};
use crate::model::{AnyNetwork, BayesianNetwork, CredalNetwork, ModelKind, Pmf, Role, VarId};
use crate::scores::{
    self, credal_conditional_dm_bounds, credal_conditional_entropy_lower, credal_dm_bounds, credal_entropy_lower,
    decoupled_conditional_entropy_lower, question_rows_given_skill, ScoreKind, ScoreValue, DEFAULT_MODE_CAP,
};

/// Default threshold of the score-threshold stopping rule.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingKind {
    /// Stop once the current (summed) skill score is at most `threshold`.
    ScoreThreshold,
    /// Stop after `max_questions` answers.
    MaxQuestions,
    /// Stop when the repository is exhausted.
    Exhaust,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    pub kind: StoppingKind,
    pub threshold: f64,
    pub max_questions: usize,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            kind: StoppingKind::ScoreThreshold,
            threshold: DEFAULT_THRESHOLD,
            max_questions: usize::MAX,
        }
    }
}

impl StoppingRule {
    pub fn exhaust() -> Self {
        Self {
            kind: StoppingKind::Exhaust,
            ..Self::default()
        }
    }

    pub fn threshold(threshold: f64) -> Self {
        Self {
            kind: StoppingKind::ScoreThreshold,
            threshold,
            ..Self::default()
        }
    }

    pub fn max_questions(n: usize) -> Self {
        Self {
            kind: StoppingKind::MaxQuestions,
            max_questions: n,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter(format!(
                "stopping threshold {} is outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickKind {
    EntropyGain,
    DmGain,
    Random,
    FixedOrder,
}

impl PickKind {
    pub fn score_kind(self) -> Option<ScoreKind> {
        match self {
            PickKind::EntropyGain => Some(ScoreKind::Entropy),
            PickKind::DmGain => Some(ScoreKind::Dm),
            _ => None,
        }
    }
}

/// Which end of a credal score drives decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CredalBound {
    Lower,
    Upper,
    Midpoint,
}

/// How the lower conditional entropy of a credal model is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalEntropyMethod {
    /// From the posterior skill bounds and the question rows taken separately.
    Decoupled,
    /// Over the completions of the whole network.
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PickPolicy {
    pub kind: PickKind,
    pub credal_bound: CredalBound,
    pub strategy: CredalStrategy,
    pub mode_cap: u64,
    pub conditional_entropy: ConditionalEntropyMethod,
    /// Score used by the score-threshold rule for `random` and `fixed_order`.
    pub stop_score: ScoreKind,
}

impl Default for PickPolicy {
    fn default() -> Self {
        Self {
            kind: PickKind::EntropyGain,
            credal_bound: CredalBound::Lower,
            strategy: CredalStrategy::default(),
            mode_cap: DEFAULT_MODE_CAP,
            conditional_entropy: ConditionalEntropyMethod::Decoupled,
            stop_score: ScoreKind::Entropy,
        }
    }
}

impl PickPolicy {
    /// Defaults for `kind`: credal DM ranks by the midpoint of its bounds,
    /// everything else by the lower bound.
    pub fn new(kind: PickKind) -> Self {
        Self {
            kind,
            credal_bound: if kind == PickKind::DmGain {
                CredalBound::Midpoint
            } else {
                CredalBound::Lower
            },
            stop_score: kind.score_kind().unwrap_or(ScoreKind::Entropy),
            ..Self::default()
        }
    }

    pub fn with_bound(mut self, bound: CredalBound) -> Self {
        self.credal_bound = bound;
        self
    }

    fn score_kind(&self) -> ScoreKind {
        self.kind.score_kind().unwrap_or(self.stop_score)
    }

    pub fn check(&self, model: ModelKind) -> Result<()> {
        self.strategy.check()?;
        if model == ModelKind::Credal && self.score_kind() == ScoreKind::Entropy && self.credal_bound != CredalBound::Lower
        {
            return Err(Error::Unsupported(
                "only the lower entropy of a credal set is available; use credal_bound = lower".into(),
            ));
        }
        Ok(())
    }
}

/// Per-skill utility of each skill state; the grade is its expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSpec {
    /// Indexed like the model's skills; `f[k][s]` is the utility of state `s`.
    pub f: Vec<Vec<f64>>,
}

impl EvaluationSpec {
    /// `s / (m - 1)` for every skill: the indicator of the top state on
    /// Boolean skills.
    pub fn linear<R>(net: &crate::model::Network<R>) -> Self {
        Self {
            f: net
                .skills()
                .iter()
                .map(|&s| {
                    let m = net.card(s);
                    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
                })
                .collect(),
        }
    }
}

/// Model under test.
#[derive(Debug, Clone)]
pub enum TestModel {
    Bayesian(Arc<BayesianNetwork>),
    Credal(Arc<CredalNetwork>),
}

impl TestModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TestModel::Bayesian(_) => ModelKind::Bayesian,
            TestModel::Credal(_) => ModelKind::Credal,
        }
    }

    pub fn structure(&self) -> &crate::model::Structure {
        match self {
            TestModel::Bayesian(n) => n.structure(),
            TestModel::Credal(n) => n.structure(),
        }
    }
}

impl From<AnyNetwork> for TestModel {
    fn from(m: AnyNetwork) -> Self {
        match m {
            AnyNetwork::Bayesian(n) => TestModel::Bayesian(Arc::new(n)),
            AnyNetwork::Credal(n) => TestModel::Credal(Arc::new(n)),
        }
    }
}

/// One row of a pick's score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub question: String,
    /// Ranking value: the gain (summed over skills), or the random priority
    /// of the random policy, or 0 for the fixed order.
    pub value: f64,
    /// The summed conditional score after asking the question; bounds for
    /// credal models. Absent for non-adaptive policies.
    pub conditional: Option<ScoreValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub question: String,
    #[serde(skip)]
    pub var: VarId,
    pub scores: Vec<ScoreEntry>,
}

/// Posterior of one skill: equal bounds for Bayesian models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillSnapshot {
    pub skill: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub question: String,
    /// Score table of the pick that offered this question, if it was picked.
    pub scores: Option<Vec<ScoreEntry>>,
    pub answer: String,
    /// Posterior after the answer.
    pub posterior: Vec<SkillSnapshot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillGrade {
    pub skill: String,
    /// Bayesian: the expected utility; credal: the expectation under the
    /// midpoint posterior.
    pub grade: f64,
    pub lower: f64,
    pub upper: f64,
    pub posterior: SkillSnapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub questions_asked: usize,
    pub skills: Vec<SkillGrade>,
}

#[derive(Debug, Clone)]
enum Posterior {
    Bayesian(SkillJoint),
    Credal(Vec<CredalBounds>),
}

/// One test taker's progress.
#[derive(Debug, Clone)]
pub struct SessionState {
    remaining: BTreeSet<VarId>,
    evidence: Evidence,
    order: Vec<VarId>,
    trace: Vec<TraceRecord>,
    rng_seed: u64,
    posterior: Posterior,
    pending: Option<Pick>,
}

impl SessionState {
    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn remaining(&self) -> impl Iterator<Item = VarId> + '_ {
        self.remaining.iter().copied()
    }

    pub fn remaining_len(&self) -> usize {
        self.remaining.len()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Questions in the order they were answered.
    pub fn answered(&self) -> &[VarId] {
        &self.order
    }

    pub fn asked(&self) -> usize {
        self.evidence.len()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// The question offered by [`TestEngine::offer`] and not yet answered.
    pub fn pending(&self) -> Option<&Pick> {
        self.pending.as_ref()
    }
}

/// Supplies answers during [`TestEngine::run_test`].
pub trait AnswerSource {
    fn answer(&mut self, question: VarId) -> Result<usize>;
}

#[derive(Debug, Clone)]
pub struct TestEngine {
    model: TestModel,
    space: Arc<SkillSpace>,
    repository: Vec<VarId>,
    policy: PickPolicy,
    rule: StoppingRule,
    evaluation: EvaluationSpec,
}

impl TestEngine {
    pub fn new(model: TestModel, policy: PickPolicy, rule: StoppingRule) -> Result<Self> {
        policy.check(model.kind())?;
        rule.check()?;
        let (space, evaluation) = match &model {
            TestModel::Bayesian(n) => (SkillSpace::new(n.as_ref())?, EvaluationSpec::linear(n.as_ref())),
            TestModel::Credal(n) => (SkillSpace::new(n.as_ref())?, EvaluationSpec::linear(n.as_ref())),
        };
        let repository = model.structure().questions();
        Ok(Self {
            model,
            space: Arc::new(space),
            repository,
            policy,
            rule,
            evaluation,
        })
    }

    /// Restricts the repository to the given question ids.
    pub fn with_repository(mut self, ids: &[String]) -> Result<Self> {
        let s = self.model.structure();
        let mut repo = Vec::with_capacity(ids.len());
        for id in ids {
            let v = s.resolve(id)?;
            if s.variable(v).role != Role::Question {
                return Err(Error::NotAQuestion(id.clone()));
            }
            repo.push(v);
        }
        repo.sort_unstable();
        repo.dedup();
        self.repository = repo;
        Ok(self)
    }

    pub fn with_evaluation(mut self, spec: EvaluationSpec) -> Result<Self> {
        let s = self.model.structure();
        let skills = s.skills();
        if spec.f.len() != skills.len() || spec.f.iter().zip(&skills).any(|(f, &k)| f.len() != s.card(k)) {
            return Err(Error::DimensionMismatch(
                "evaluation needs one utility per state of every skill".into(),
            ));
        }
        self.evaluation = spec;
        Ok(self)
    }

    pub fn model(&self) -> &TestModel {
        &self.model
    }

    pub fn policy(&self) -> &PickPolicy {
        &self.policy
    }

    pub fn rule(&self) -> &StoppingRule {
        &self.rule
    }

    pub fn repository(&self) -> &[VarId] {
        &self.repository
    }

    fn structure(&self) -> &crate::model::Structure {
        self.model.structure()
    }

    /// A fresh session with empty evidence.
    pub fn start(&self, rng_seed: u64) -> Result<SessionState> {
        let evidence = Evidence::new();
        Ok(SessionState {
            remaining: self.repository.iter().copied().collect(),
            posterior: self.posterior_for(&evidence, None)?,
            evidence,
            order: Vec::new(),
            trace: Vec::new(),
            rng_seed,
            pending: None,
        })
    }

    fn posterior_for(&self, evidence: &Evidence, previous: Option<(&Posterior, VarId, usize)>) -> Result<Posterior> {
        match &self.model {
            TestModel::Bayesian(net) => {
                let joint = match previous {
                    Some((Posterior::Bayesian(j), q, a)) => {
                        let mut j = j.clone();
                        j.observe(net, q, a)?;
                        j
                    }
                    _ => SkillJoint::prior(net, Arc::clone(&self.space)).condition(net, evidence)?,
                };
                Ok(Posterior::Bayesian(joint))
            }
            TestModel::Credal(net) => Ok(Posterior::Credal(credal_skill_bounds(
                net,
                &self.space,
                evidence,
                &self.policy.strategy,
            )?)),
        }
    }

    /// Picks the next question without changing the session. Adaptive
    /// policies maximize the gain summed over skills (credal models: over
    /// the question's parent skills); ties go to the earliest question.
    pub fn pick_next(&self, session: &SessionState) -> Result<Pick> {
        if session.remaining.is_empty() {
            return Err(Error::EmptyRepository);
        }
        let s = self.structure();
        let mut scores = Vec::with_capacity(session.remaining.len());
        let mut best: Option<(VarId, f64)> = None;
        let mut rng = ChaCha8Rng::seed_from_u64(mix(session.rng_seed, session.evidence.len() as u64));
        for q in session.remaining() {
            let (value, conditional) = match self.policy.kind {
                PickKind::Random => (rng.gen::<f64>(), None),
                PickKind::FixedOrder => (0.0, None),
                PickKind::EntropyGain | PickKind::DmGain => {
                    let (g, c) = self.gain(session, q, self.policy.score_kind())?;
                    (g, Some(c))
                }
            };
            if best.is_none_or(|(_, b)| value > b + 1e-12) {
                best = Some((q, value));
            }
            scores.push(ScoreEntry {
                question: s.variable(q).id.clone(),
                value,
                conditional,
            });
        }
        let (var, _) = best.expect("repository is nonempty");
        Ok(Pick {
            question: s.variable(var).id.clone(),
            var,
            scores,
        })
    }

    /// Picks and remembers the pick so that the matching answer records its
    /// score table.
    pub fn offer(&self, session: &mut SessionState) -> Result<Pick> {
        if let Some(p) = &session.pending {
            return Ok(p.clone());
        }
        let pick = self.pick_next(session)?;
        session.pending = Some(pick.clone());
        Ok(pick)
    }

    fn gain(&self, session: &SessionState, q: VarId, kind: ScoreKind) -> Result<(f64, ScoreValue)> {
        match (&self.model, &session.posterior) {
            (TestModel::Bayesian(net), Posterior::Bayesian(joint)) => {
                let mut gain = 0.0;
                let mut cond = 0.0;
                for &sk in self.space.skills() {
                    let x = joint.joint_with_question(net, sk, q);
                    gain += scores::gain_of_joint(&x, kind);
                    cond += match kind {
                        ScoreKind::Entropy => scores::conditional_entropy_of_joint(&x),
                        ScoreKind::Dm => scores::conditional_dm_of_joint(&x),
                    };
                }
                Ok((gain, ScoreValue::point(cond)))
            }
            (TestModel::Credal(net), Posterior::Credal(bounds)) => {
                let mut gain = 0.0;
                let (mut lo, mut hi, mut exact) = (0.0, 0.0, true);
                for &sk in &net.table(q).parents {
                    let k = self.space.position(sk).expect("parents of questions are skills");
                    let b = &bounds[k];
                    let rows = question_rows_given_skill(net, q, sk)?;
                    let (prior, cond) = match kind {
                        ScoreKind::Dm => (
                            credal_dm_bounds(&b.bounds)?,
                            credal_conditional_dm_bounds(&b.bounds, &rows, self.policy.mode_cap)?.score,
                        ),
                        ScoreKind::Entropy => {
                            let prior = credal_entropy_lower(&b.bounds);
                            // upper entropies are not computed; 1 is the trivial bound
                            let cond = match self.policy.conditional_entropy {
                                ConditionalEntropyMethod::Decoupled => {
                                    ScoreValue::bounds(decoupled_conditional_entropy_lower(&b.bounds, &rows)?, 1.0, false)
                                }
                                ConditionalEntropyMethod::Network => {
                                    let l = credal_conditional_entropy_lower(
                                        net,
                                        &self.space,
                                        sk,
                                        q,
                                        &session.evidence,
                                        &self.policy.strategy,
                                    )?;
                                    ScoreValue::bounds(l.value, 1.0, false)
                                }
                            };
                            (ScoreValue::bounds(prior, 1.0, b.exact), cond)
                        }
                    };
                    gain += match self.policy.credal_bound {
                        CredalBound::Lower => prior.lower - cond.lower,
                        CredalBound::Upper => prior.upper - cond.upper,
                        CredalBound::Midpoint => prior.midpoint() - cond.midpoint(),
                    };
                    lo += cond.lower;
                    hi += cond.upper;
                    exact &= cond.exact && b.exact && evidence_free(session) && net.table(q).parents.len() == 1;
                }
                Ok((gain, ScoreValue::bounds(lo, hi, exact)))
            }
            _ => unreachable!("session posterior matches the model kind"),
        }
    }

    /// Records `q = answer` (a state index).
    pub fn submit_answer(&self, session: &mut SessionState, q: VarId, answer: usize) -> Result<()> {
        let s = self.structure();
        if q.0 >= s.len() || s.variable(q).role != Role::Question {
            return Err(Error::UnknownQuestion(format!("#{}", q.0)));
        }
        let var = s.variable(q);
        if session.evidence.contains(q) {
            return Err(Error::AlreadyAnswered(var.id.clone()));
        }
        if !session.remaining.contains(&q) {
            return Err(Error::UnknownQuestion(var.id.clone()));
        }
        if answer >= var.card() {
            return Err(Error::UnknownState {
                var: var.id.clone(),
                state: answer.to_string(),
            });
        }
        let evidence = session.evidence.with(q, answer);
        let posterior = self.posterior_for(&evidence, Some((&session.posterior, q, answer)))?;
        let scores = session
            .pending
            .take()
            .filter(|p| p.var == q)
            .map(|p| p.scores);
        session.evidence = evidence;
        session.posterior = posterior;
        session.remaining.remove(&q);
        session.order.push(q);
        let snapshot = self.snapshot(session);
        session.trace.push(TraceRecord {
            question: var.id.clone(),
            scores,
            answer: var.states[answer].clone(),
            posterior: snapshot,
        });
        Ok(())
    }

    /// Label-based variant of [`TestEngine::submit_answer`].
    pub fn submit_labels(&self, session: &mut SessionState, question: &str, state: &str) -> Result<()> {
        let s = self.structure();
        let q = s.find(question).ok_or_else(|| Error::UnknownQuestion(question.to_string()))?;
        let a = s.resolve_state(q, state)?;
        self.submit_answer(session, q, a)
    }

    /// Summed current score of all skills (per the policy's score kind and
    /// credal bound).
    pub fn current_score(&self, session: &SessionState) -> Result<f64> {
        let kind = self.policy.score_kind();
        match &session.posterior {
            Posterior::Bayesian(joint) => Ok(self
                .space
                .skills()
                .iter()
                .map(|&sk| scores::score(&joint.marginal(sk, self.structure().card(sk)), kind))
                .sum()),
            Posterior::Credal(bounds) => {
                let mut total = 0.0;
                for b in bounds {
                    total += match kind {
                        ScoreKind::Entropy => credal_entropy_lower(&b.bounds),
                        ScoreKind::Dm => {
                            let v = credal_dm_bounds(&b.bounds)?;
                            match self.policy.credal_bound {
                                CredalBound::Lower => v.lower,
                                CredalBound::Upper => v.upper,
                                CredalBound::Midpoint => v.midpoint(),
                            }
                        }
                    };
                }
                Ok(total)
            }
        }
    }

    pub fn should_stop(&self, session: &SessionState) -> Result<bool> {
        if session.remaining.is_empty() {
            return Ok(true);
        }
        Ok(match self.rule.kind {
            StoppingKind::Exhaust => false,
            StoppingKind::MaxQuestions => session.evidence.len() >= self.rule.max_questions,
            StoppingKind::ScoreThreshold => self.current_score(session)? <= self.rule.threshold,
        })
    }

    fn snapshot(&self, session: &SessionState) -> Vec<SkillSnapshot> {
        let s = self.structure();
        self.space
            .skills()
            .iter()
            .enumerate()
            .map(|(k, &sk)| {
                let skill = s.variable(sk).id.clone();
                match &session.posterior {
                    Posterior::Bayesian(joint) => {
                        let p = joint.marginal(sk, s.card(sk)).probs().to_vec();
                        SkillSnapshot {
                            skill,
                            lower: p.clone(),
                            upper: p,
                            exact: true,
                        }
                    }
                    Posterior::Credal(bounds) => SkillSnapshot {
                        skill,
                        lower: bounds[k].bounds.lower().to_vec(),
                        upper: bounds[k].bounds.upper().to_vec(),
                        exact: bounds[k].exact,
                    },
                }
            })
            .collect()
    }

    /// Posterior snapshot of every skill.
    pub fn posterior(&self, session: &SessionState) -> Vec<SkillSnapshot> {
        self.snapshot(session)
    }

    /// Distribution used for decisions about the `k`-th skill: the posterior,
    /// or the midpoint of the posterior bounds for credal models.
    pub fn decision_pmf(&self, session: &SessionState, k: usize) -> Pmf {
        match &session.posterior {
            Posterior::Bayesian(joint) => {
                let sk = self.space.skills()[k];
                joint.marginal(sk, self.structure().card(sk))
            }
            Posterior::Credal(bounds) => midpoint(&bounds[k].bounds),
        }
    }

    pub fn evaluate(&self, session: &SessionState) -> Evaluation {
        let snaps = self.snapshot(session);
        let skills = snaps
            .into_iter()
            .enumerate()
            .map(|(k, snap)| {
                let f = &self.evaluation.f[k];
                let (grade, lower, upper) = match &session.posterior {
                    Posterior::Bayesian(_) => {
                        let g: f64 = snap.lower.iter().zip(f).map(|(p, v)| p * v).sum();
                        (g, g, g)
                    }
                    Posterior::Credal(bounds) => {
                        let (lo, hi) = bounds[k].bounds.expectation_bounds(f);
                        (midpoint(&bounds[k].bounds).expectation(f), lo, hi)
                    }
                };
                SkillGrade {
                    skill: snap.skill.clone(),
                    grade,
                    lower,
                    upper,
                    posterior: snap,
                }
            })
            .collect();
        Evaluation {
            questions_asked: session.evidence.len(),
            skills,
        }
    }

    /// Runs the loop until the stopping rule fires.
    pub fn run_test(&self, rng_seed: u64, source: &mut dyn AnswerSource) -> Result<SessionState> {
        let mut session = self.start(rng_seed)?;
        while !self.should_stop(&session)? {
            let pick = self.offer(&mut session)?;
            let a = source.answer(pick.var)?;
            self.submit_answer(&mut session, pick.var, a)?;
        }
        Ok(session)
    }

    /// Rebuilds a session from its trace: records with a score table are
    /// re-picked before being answered.
    pub fn replay(&self, rng_seed: u64, trace: &[TraceRecord]) -> Result<SessionState> {
        let mut session = self.start(rng_seed)?;
        for r in trace {
            if r.scores.is_some() {
                self.offer(&mut session)?;
            }
            self.submit_labels(&mut session, &r.question, &r.answer)?;
        }
        Ok(session)
    }
}

fn evidence_free(session: &SessionState) -> bool {
    session.evidence.is_empty()
}
