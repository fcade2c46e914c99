//! Simulated students, experiment arms and metric curves.
//!
//! Answers are drawn from the Bayesian model. Each (student, question) pair
//! owns a random stream derived from the experiment seed, so a given student
//! gives the same answer to a question in every arm and the arms differ only
//! in their choices.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bn::SkillSpace;
use crate::credal::{mix, CredalStrategy};
use crate::engine::{
    AnswerSource, ConditionalEntropyMethod, CredalBound, PickKind, PickPolicy, StoppingRule, TestEngine, TestModel,
};
use crate::error::{Error, Result};
use crate::model::{
    load_model, perturb_to_credal, AnyNetwork, BayesianNetwork, CredalNetwork, ModelKind, PerturbationSpec, Role,
    VarId,
};

/// True skill states of one simulated student.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudentProfile {
    states: BTreeMap<VarId, usize>,
}

impl StudentProfile {
    /// `states[k]` is the state of the `k`-th skill of the model.
    pub fn new(net: &BayesianNetwork, states: &[usize]) -> Result<Self> {
        let skills = net.skills();
        if states.len() != skills.len() {
            return Err(Error::DimensionMismatch(format!(
                "profile has {} states for {} skills",
                states.len(),
                skills.len()
            )));
        }
        for (&s, &st) in skills.iter().zip(states) {
            if st >= net.card(s) {
                return Err(Error::UnknownState {
                    var: net.variable(s).id.clone(),
                    state: st.to_string(),
                });
            }
        }
        Ok(Self {
            states: skills.into_iter().zip(states.iter().copied()).collect(),
        })
    }

    /// Profile from `skill id -> state label`.
    pub fn from_labels<'a>(net: &BayesianNetwork, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let s = net.structure();
        let mut states: BTreeMap<VarId, usize> = BTreeMap::new();
        for (id, label) in pairs {
            let v = s.resolve(id)?;
            if s.variable(v).role != Role::Skill {
                return Err(Error::NotASkill(id.to_string()));
            }
            states.insert(v, s.resolve_state(v, label)?);
        }
        let skills = net.skills();
        if let Some(&missing) = skills.iter().find(|v| !states.contains_key(v)) {
            return Err(Error::InvalidParameter(format!(
                "profile assigns no state to skill {}",
                s.variable(missing).id
            )));
        }
        Ok(Self { states })
    }

    pub fn state(&self, skill: VarId) -> Option<usize> {
        self.states.get(&skill).copied()
    }

    /// States in skill order.
    pub fn states(&self) -> Vec<usize> {
        self.states.values().copied().collect()
    }
}

/// Draws `q` from `P(q | parents = profile)`.
pub fn sample_answer(net: &BayesianNetwork, q: VarId, profile: &StudentProfile, rng: &mut impl Rng) -> Result<usize> {
    let s = net.structure();
    if s.variable(q).role != Role::Question {
        return Err(Error::NotAQuestion(s.variable(q).id.clone()));
    }
    let table = net.table(q);
    let parent_states = table
        .parents
        .iter()
        .map(|&p| {
            profile
                .state(p)
                .ok_or_else(|| Error::InvalidParameter(format!("profile lacks skill {}", s.variable(p).id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let row = &table.rows[table.row_index(s.cards(), &parent_states)];
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (state, &p) in row.probs().iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(state);
        }
    }
    // u landed in the rounding gap above the last cumulative sum
    Ok(row.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0))
}

/// Student answering from a profile with one random stream per question.
#[derive(Debug, Clone)]
pub struct SimulatedStudent {
    net: Arc<BayesianNetwork>,
    profile: StudentProfile,
    seed: u64,
}

impl SimulatedStudent {
    pub fn new(net: Arc<BayesianNetwork>, profile: StudentProfile, seed: u64) -> Self {
        Self { net, profile, seed }
    }

    pub fn profile(&self) -> &StudentProfile {
        &self.profile
    }
}

impl AnswerSource for SimulatedStudent {
    fn answer(&mut self, q: VarId) -> Result<usize> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, q.0 as u64));
        sample_answer(&self.net, q, &self.profile, &mut rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationKind {
    /// Joint skill configurations in turn, so each is held by the same
    /// number of students (up to one). With one Boolean skill and an even
    /// count this is an exact half/half split.
    Balanced,
    /// Profiles drawn from the prior of the skills.
    Prior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub count: usize,
    pub kind: PopulationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmConfig {
    pub label: String,
    pub policy: PickKind,
    pub model: ModelKind,
    /// Policy default if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credal_bound: Option<CredalBound>,
    #[serde(default = "default_conditional_entropy")]
    pub conditional_entropy: ConditionalEntropyMethod,
}

fn default_conditional_entropy() -> ConditionalEntropyMethod {
    ConditionalEntropyMethod::Decoupled
}

/// Experiment file. Model paths are relative to the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: PathBuf,
    /// Credal model for credal arms; derived from `perturbation` if absent.
    #[serde(default)]
    pub credal_model: Option<PathBuf>,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    /// Question ids; the whole bank if absent.
    #[serde(default)]
    pub repository: Option<Vec<String>>,
    pub population: Population,
    pub arms: Vec<ArmConfig>,
    /// Question counts at which metrics are recorded; `0..=|repository|` if
    /// absent.
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    pub seed: u64,
    #[serde(default)]
    pub strategy: CredalStrategy,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a config file and loads the models it names.
    pub fn load(path: &Path) -> Result<Experiment> {
        let text = std::fs::read_to_string(path)?;
        let config = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        config.resolve(dir)
    }

    /// Loads the models, with relative paths taken from `dir`.
    pub fn resolve(&self, dir: &Path) -> Result<Experiment> {
        let read = |p: &Path| -> Result<AnyNetwork> { load_model(&std::fs::read_to_string(dir.join(p))?) };
        let bayesian = match read(&self.model)? {
            AnyNetwork::Bayesian(n) => n,
            AnyNetwork::Credal(_) => {
                return Err(Error::schema(
                    "model",
                    "must be a Bayesian network; put credal models under credal_model",
                ))
            }
        };
        let credal = match &self.credal_model {
            Some(p) => match read(p)? {
                AnyNetwork::Credal(n) => Some(n),
                AnyNetwork::Bayesian(_) => return Err(Error::schema("credal_model", "must be a credal network")),
            },
            None => None,
        };
        Experiment::new(bayesian, credal, self)
    }
}

/// A validated experiment with its models in memory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub bayesian: Arc<BayesianNetwork>,
    pub credal: Option<Arc<CredalNetwork>>,
    pub repository: Vec<String>,
    pub population: Population,
    pub arms: Vec<ArmConfig>,
    pub checkpoints: Vec<usize>,
    pub seed: u64,
    pub strategy: CredalStrategy,
}

impl Experiment {
    pub fn new(bayesian: BayesianNetwork, credal: Option<CredalNetwork>, config: &ExperimentConfig) -> Result<Self> {
        let s = bayesian.structure();
        let repository = match &config.repository {
            Some(ids) => ids.clone(),
            None => s.questions().into_iter().map(|q| s.variable(q).id.clone()).collect(),
        };
        for id in &repository {
            let v = s.resolve(id)?;
            if s.variable(v).role != Role::Question {
                return Err(Error::NotAQuestion(id.clone()));
            }
        }
        if config.population.count < 1 {
            return Err(Error::InvalidParameter("population count must be at least 1".into()));
        }
        if config.arms.is_empty() {
            return Err(Error::InvalidParameter("an experiment needs at least one arm".into()));
        }
        let mut checkpoints = config.checkpoints.clone().unwrap_or_else(|| (0..=repository.len()).collect());
        checkpoints.sort_unstable();
        checkpoints.dedup();
        if checkpoints.last().is_some_and(|&c| c > repository.len()) {
            return Err(Error::InvalidParameter(format!(
                "checkpoint {} exceeds the repository size {}",
                checkpoints.last().unwrap(),
                repository.len()
            )));
        }
        let needs_credal = config.arms.iter().any(|a| a.model == ModelKind::Credal);
        let credal = match (credal, needs_credal) {
            (Some(c), _) => {
                if c.structure() != bayesian.structure() {
                    return Err(Error::schema(
                        "credal_model",
                        "must have the same variables and edges as the Bayesian model",
                    ));
                }
                Some(c)
            }
            (None, true) => {
                let spec = config.perturbation.ok_or_else(|| {
                    Error::InvalidParameter("credal arms need a credal_model or a perturbation".into())
                })?;
                Some(perturb_to_credal(&bayesian, &spec)?)
            }
            (None, false) => None,
        };
        config.strategy.check()?;
        Ok(Self {
            bayesian: Arc::new(bayesian),
            credal: credal.map(Arc::new),
            repository,
            population: config.population,
            arms: config.arms.clone(),
            checkpoints,
            seed: config.seed,
            strategy: config.strategy,
        })
    }

    /// Profiles of the whole population, in student order.
    pub fn profiles(&self) -> Result<Vec<StudentProfile>> {
        let net = &self.bayesian;
        let space = SkillSpace::new(net.as_ref())?;
        let n = space.skills().len();
        let config_states = |c: usize| (0..n).map(|k| space.state(k, c)).collect::<Vec<_>>();
        match self.population.kind {
            PopulationKind::Balanced => (0..self.population.count)
                .map(|i| StudentProfile::new(net, &config_states(i % space.len())))
                .collect(),
            PopulationKind::Prior => {
                let order = net.structure().topological_order().expect("validated networks are acyclic");
                let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, 0x5eed));
                (0..self.population.count)
                    .map(|_| {
                        let mut states: BTreeMap<VarId, usize> = BTreeMap::new();
                        for &v in &order {
                            if net.variable(v).role != Role::Skill {
                                continue;
                            }
                            let t = net.table(v);
                            let ps: Vec<usize> = t.parents.iter().map(|p| states[p]).collect();
                            let row = &t.rows[t.row_index(net.cards(), &ps)];
                            let u: f64 = rng.gen();
                            let mut acc = 0.0;
                            let mut pick = row.len() - 1;
                            for (st, &p) in row.probs().iter().enumerate() {
                                acc += p;
                                if u < acc {
                                    pick = st;
                                    break;
                                }
                            }
                            states.insert(v, pick);
                        }
                        StudentProfile::new(net, &states.values().copied().collect::<Vec<_>>())
                    })
                    .collect()
            }
        }
    }

    fn engine(&self, arm: &ArmConfig) -> Result<TestEngine> {
        let model = match arm.model {
            ModelKind::Bayesian => TestModel::Bayesian(Arc::clone(&self.bayesian)),
            ModelKind::Credal => TestModel::Credal(Arc::clone(self.credal.as_ref().expect("checked in new"))),
        };
        let mut policy = PickPolicy::new(arm.policy);
        if let Some(b) = arm.credal_bound {
            policy.credal_bound = b;
        }
        policy.conditional_entropy = arm.conditional_entropy;
        policy.strategy = self.strategy;
        TestEngine::new(model, policy, StoppingRule::exhaust())?.with_repository(&self.repository)
    }
}

/// Accuracy and Brier distance of one arm at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSeries {
    pub arm: String,
    pub question_counts: Vec<usize>,
    pub accuracy: Vec<f64>,
    pub brier: Vec<f64>,
}

/// Runs every arm on every student with the exhaust rule, recording
/// metrics at the checkpoints. Students run in parallel; results do not
/// depend on the thread count.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<MetricsSeries>> {
    let profiles = exp.profiles()?;
    let student_seed = |i: usize| mix(exp.seed, 0x57d0_0000 + i as u64);
    let mut out = Vec::with_capacity(exp.arms.len());
    for (a, arm) in exp.arms.iter().enumerate() {
        let engine = exp.engine(arm)?;
        let per_student: Vec<Vec<(f64, f64)>> = profiles
            .par_iter()
            .enumerate()
            .map(|(i, profile)| {
                let mut student = SimulatedStudent::new(Arc::clone(&exp.bayesian), profile.clone(), student_seed(i));
                let pick_seed = mix(mix(exp.seed, a as u64 + 1), i as u64);
                simulate_student(&engine, &mut student, pick_seed, &exp.checkpoints)
            })
            .collect::<Result<_>>()?;
        let n = profiles.len() as f64;
        let mut accuracy = vec![0.0; exp.checkpoints.len()];
        let mut brier = vec![0.0; exp.checkpoints.len()];
        for rows in &per_student {
            for (c, &(acc, b)) in rows.iter().enumerate() {
                accuracy[c] += acc;
                brier[c] += b;
            }
        }
        out.push(MetricsSeries {
            arm: arm.label.clone(),
            question_counts: exp.checkpoints.clone(),
            accuracy: accuracy.into_iter().map(|x| x / n).collect(),
            brier: brier.into_iter().map(|x| x / n).collect(),
        });
    }
    Ok(out)
}

/// Per-checkpoint (accuracy, Brier) of one student, each averaged over
/// skills.
fn simulate_student(
    engine: &TestEngine,
    student: &mut SimulatedStudent,
    pick_seed: u64,
    checkpoints: &[usize],
) -> Result<Vec<(f64, f64)>> {
    let truth = student.profile().states();
    let mut session = engine.start(pick_seed)?;
    let mut rows = Vec::with_capacity(checkpoints.len());
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut next = 0;
    loop {
        while next < checkpoints.len() && checkpoints[next] == session.asked() {
            rows.push(metrics(engine, &session, &truth));
            next += 1;
        }
        if session.asked() >= last || engine.should_stop(&session)? {
            break;
        }
        let pick = engine.offer(&mut session)?;
        let answer = student.answer(pick.var)?;
        engine.submit_answer(&mut session, pick.var, answer)?;
    }
    Ok(rows)
}

fn metrics(engine: &TestEngine, session: &crate::engine::SessionState, truth: &[usize]) -> (f64, f64) {
    let n = truth.len() as f64;
    let (mut acc, mut brier) = (0.0, 0.0);
    for (k, &t) in truth.iter().enumerate() {
        let p = engine.decision_pmf(session, k);
        if p.mode() == t {
            acc += 1.0;
        }
        // halved so that Boolean skills give (P(S=1) - 1{s=1})^2
        brier += 0.5
            * p.probs()
                .iter()
                .enumerate()
                .map(|(s, &x)| (x - if s == t { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>();
    }
    (acc / n, brier / n)
}

const HEADER: [&str; 4] = ["arm", "question_count", "accuracy", "brier"];

/// Writes `arm,question_count,accuracy,brier` rows, one per checkpoint.
pub fn write_metrics(series: &[MetricsSeries], out: impl Write) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("no metrics to export".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for s in series {
        for ((c, a), b) in s.question_counts.iter().zip(&s.accuracy).zip(&s.brier) {
            w.write_record([s.arm.clone(), c.to_string(), a.to_string(), b.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_metrics(series: &[MetricsSeries], path: &Path) -> Result<()> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("no metrics to export".into()));
    }
    write_metrics(series, std::fs::File::create(path)?)
}

/// Reads a metrics file back, grouping rows by arm in order of appearance.
pub fn read_metrics(input: impl Read) -> Result<Vec<MetricsSeries>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(HEADER) {
        return Err(Error::schema("header", format!("expected {}", HEADER.join(","))));
    }
    let mut out: Vec<MetricsSeries> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |i: usize| Error::schema(format!("line {}", rec.position().map_or(0, |p| p.line())), format!("bad {}", HEADER[i]));
        let count: usize = field(1).parse().map_err(|_| bad(1))?;
        let acc: f64 = field(2).parse().map_err(|_| bad(2))?;
        let brier: f64 = field(3).parse().map_err(|_| bad(3))?;
        if out.last().is_none_or(|s| s.arm != field(0)) {
            out.push(MetricsSeries {
                arm: field(0).to_string(),
                question_counts: Vec::new(),
                accuracy: Vec::new(),
                brier: Vec::new(),
            });
        }
        let s = out.last_mut().expect("pushed above");
        s.question_counts.push(count);
        s.accuracy.push(acc);
        s.brier.push(brier);
    }
    Ok(out)
}
