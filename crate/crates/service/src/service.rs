//! Sessions, models and their persistence, independent of HTTP.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use credalcat::credal::CredalStrategy;
use credalcat::engine::{
    ConditionalEntropyMethod, CredalBound, Evaluation, PickKind, PickPolicy, ScoreEntry, SessionState, StoppingRule,
    TestEngine, TestModel, TraceRecord,
};
use credalcat::model::{load_model, ModelKind};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::{Event, EventLog};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// `*.model` files registered at startup under their file stem.
    pub models_dir: Option<PathBuf>,
    /// Event log; sessions live in memory only if absent.
    pub event_log: Option<PathBuf>,
    /// Token for the score table and trace endpoints; they are refused
    /// when absent.
    pub instructor_token: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Finished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDescriptor {
    pub session_id: String,
    pub model_id: String,
    pub policy: PickPolicy,
    pub rule: StoppingRule,
    pub seed: u64,
    /// Answers must be to the question on offer.
    pub strict: bool,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub status: SessionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub model_id: String,
    pub kind: ModelKind,
    pub skills: Vec<String>,
    pub questions: Vec<String>,
}

/// Policy fields of a session request; unset fields take the defaults of
/// the pick kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRequest {
    pub kind: PickKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credal_bound: Option<CredalBound>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_entropy: Option<ConditionalEntropyMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<CredalStrategy>,
}

impl Default for PolicyRequest {
    fn default() -> Self {
        Self {
            kind: PickKind::EntropyGain,
            credal_bound: None,
            conditional_entropy: None,
            strategy: None,
        }
    }
}

impl PolicyRequest {
    pub fn new(kind: PickKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn resolve(&self) -> PickPolicy {
        let mut p = PickPolicy::new(self.kind);
        if let Some(b) = self.credal_bound {
            p.credal_bound = b;
        }
        if let Some(c) = self.conditional_entropy {
            p.conditional_entropy = c;
        }
        if let Some(s) = self.strategy {
            p.strategy = s;
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub model_id: String,
    #[serde(default)]
    pub policy: PolicyRequest,
    /// Score threshold with the default threshold if absent.
    #[serde(default)]
    pub rule: StoppingRule,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnswerRequest {
    pub question_id: String,
    pub state: String,
    /// Number of answers the client has seen accepted.
    pub sequence: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionPayload {
    pub id: String,
    pub text: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextQuestion {
    Question {
        /// Sequence token to send with the answer.
        sequence: u64,
        question: QuestionPayload,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scores: Option<Vec<ScoreEntry>>,
    },
    Finished {
        /// Path of the evaluation resource.
        evaluation: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub session_id: String,
    pub questions_asked: usize,
    /// Sequence token expected with the next answer.
    pub sequence: u64,
    pub status: SessionStatus,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPayload {
    pub session_id: String,
    pub status: SessionStatus,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePayload {
    pub session: SessionDescriptor,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug)]
struct ModelEntry {
    info: ModelInfo,
    model: TestModel,
    document: String,
}

#[derive(Debug)]
struct SessionEntry {
    descriptor: SessionDescriptor,
    engine: TestEngine,
    state: SessionState,
}

impl SessionEntry {
    fn sequence(&self) -> u64 {
        self.state.asked() as u64
    }
}

#[derive(Debug)]
pub struct Service {
    models: RwLock<BTreeMap<String, Arc<ModelEntry>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<SessionEntry>>>>,
    log: Option<EventLog>,
    instructor_token: Option<String>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn load_entry(id: &str, document: String) -> ApiResult<ModelEntry> {
    let net = load_model(&document)?;
    let s = net.structure();
    let ids = |vs: Vec<credalcat::VarId>| vs.into_iter().map(|v| s.variable(v).id.clone()).collect();
    let info = ModelInfo {
        model_id: id.to_string(),
        kind: net.kind(),
        skills: ids(s.skills()),
        questions: ids(s.questions()),
    };
    Ok(ModelEntry {
        info,
        model: TestModel::from(net),
        document,
    })
}

fn check_model_id(id: &str) -> ApiResult<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(ApiError::Validation(format!(
            "model id `{id}` must be 1-128 characters of letters, digits, '-', '_' or '.'"
        )))
    }
}

impl Service {
    /// Registers the models directory and replays the event log.
    pub fn open(config: &ServiceConfig) -> Result<Self, String> {
        let (log, events) = match &config.event_log {
            Some(p) => {
                let (log, events) = EventLog::open(p).map_err(|e| format!("cannot open event log: {e}"))?;
                (Some(log), events)
            }
            None => (None, Vec::new()),
        };
        let service = Self {
            models: RwLock::new(BTreeMap::new()),
            sessions: RwLock::new(HashMap::new()),
            log,
            instructor_token: config.instructor_token.clone(),
        };
        if let Some(dir) = &config.models_dir {
            service.load_dir(dir)?;
        }
        for (n, event) in events.into_iter().enumerate() {
            service
                .apply(event)
                .map_err(|e| format!("event log entry {}: {e}", n + 1))?;
        }
        Ok(service)
    }

    /// A service with no models, no log and no instructor token.
    pub fn in_memory() -> Self {
        Self::open(&ServiceConfig::default()).expect("nothing to load")
    }

    pub fn event_log(&self) -> Option<&Path> {
        self.log.as_ref().map(EventLog::path)
    }

    fn load_dir(&self, dir: &Path) -> Result<(), String> {
        let entries = std::fs::read_dir(dir).map_err(|e| format!("cannot read {}: {e}", dir.display()))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "model"))
            .collect();
        paths.sort();
        for path in paths {
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let doc = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            check_model_id(&id).map_err(|e| format!("{}: {e}", path.display()))?;
            let entry = load_entry(&id, doc).map_err(|e| format!("{}: {e}", path.display()))?;
            self.models.write().unwrap().insert(id, Arc::new(entry));
        }
        Ok(())
    }

    fn apply(&self, event: Event) -> ApiResult<()> {
        match event {
            Event::ModelRegistered { model_id, document } => {
                let mut models = self.models.write().unwrap();
                match models.get(&model_id) {
                    Some(m) if m.document == document => {}
                    Some(_) => {
                        return Err(ApiError::Conflict(format!(
                            "model `{model_id}` in the log differs from the one on disk"
                        )))
                    }
                    None => {
                        let entry = load_entry(&model_id, document)?;
                        models.insert(model_id, Arc::new(entry));
                    }
                }
            }
            Event::SessionCreated {
                session_id,
                model_id,
                policy,
                rule,
                seed,
                strict,
                created_at,
            } => {
                let entry = self.new_session(session_id.clone(), &model_id, policy, rule, seed, strict, created_at)?;
                self.sessions.write().unwrap().insert(session_id, Arc::new(Mutex::new(entry)));
            }
            Event::Answered {
                session_id,
                sequence,
                question_id,
                state,
                offered,
            } => {
                let entry = self.session(&session_id)?;
                let mut e = entry.lock().unwrap();
                if sequence != e.sequence() {
                    return Err(ApiError::Conflict(format!("answer {sequence} out of order")));
                }
                let SessionEntry { engine, state: st, .. } = &mut *e;
                if offered {
                    engine.offer(st)?;
                }
                engine.submit_labels(st, &question_id, &state)?;
            }
            Event::Finished { session_id } => {
                self.session(&session_id)?.lock().unwrap().descriptor.status = SessionStatus::Finished;
            }
        }
        Ok(())
    }

    fn record(&self, event: &Event) -> ApiResult<()> {
        if let Some(log) = &self.log {
            log.append(event)?;
        }
        Ok(())
    }

    fn model(&self, id: &str) -> ApiResult<Arc<ModelEntry>> {
        self.models
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no model `{id}`")))
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Mutex<SessionEntry>>> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session `{id}`")))
    }

    /// Checks an instructor token.
    pub fn authorize(&self, token: Option<&str>) -> ApiResult<()> {
        match (&self.instructor_token, token) {
            (None, _) => Err(ApiError::Forbidden("instructor endpoints are disabled".into())),
            (Some(_), None) => Err(ApiError::Unauthorized("instructor token required".into())),
            (Some(want), Some(got)) if want == got => Ok(()),
            (Some(_), Some(_)) => Err(ApiError::Unauthorized("wrong instructor token".into())),
        }
    }

    pub fn models(&self) -> Vec<ModelInfo> {
        self.models.read().unwrap().values().map(|m| m.info.clone()).collect()
    }

    /// Registers a model document. Without an id a fresh one is generated.
    pub fn register_model(&self, id: Option<String>, document: String) -> ApiResult<ModelInfo> {
        let id = id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        check_model_id(&id)?;
        let entry = load_entry(&id, document)?;
        let mut models = self.models.write().unwrap();
        if models.contains_key(&id) {
            return Err(ApiError::Conflict(format!("model `{id}` already exists")));
        }
        self.record(&Event::ModelRegistered {
            model_id: id.clone(),
            document: entry.document.clone(),
        })?;
        let info = entry.info.clone();
        models.insert(id, Arc::new(entry));
        Ok(info)
    }

    #[allow(clippy::too_many_arguments)]
    fn new_session(
        &self,
        session_id: String,
        model_id: &str,
        policy: PickPolicy,
        rule: StoppingRule,
        seed: u64,
        strict: bool,
        created_at: u64,
    ) -> ApiResult<SessionEntry> {
        let model = self.model(model_id)?;
        let engine = TestEngine::new(model.model.clone(), policy, rule)?;
        let state = engine.start(seed)?;
        Ok(SessionEntry {
            descriptor: SessionDescriptor {
                session_id,
                model_id: model_id.to_string(),
                policy,
                rule,
                seed,
                strict,
                created_at,
                status: SessionStatus::Active,
            },
            engine,
            state,
        })
    }

    pub fn create_session(&self, req: CreateSession) -> ApiResult<SessionDescriptor> {
        let session_id = uuid::Uuid::new_v4().simple().to_string();
        let policy = req.policy.resolve();
        let created_at = now();
        let mut entry = self.new_session(session_id.clone(), &req.model_id, policy, req.rule, req.seed, req.strict, created_at)?;
        self.record(&Event::SessionCreated {
            session_id: session_id.clone(),
            model_id: req.model_id.clone(),
            policy,
            rule: req.rule,
            seed: req.seed,
            strict: req.strict,
            created_at,
        })?;
        if entry.engine.should_stop(&entry.state)? {
            self.record(&Event::Finished {
                session_id: session_id.clone(),
            })?;
            entry.descriptor.status = SessionStatus::Finished;
        }
        let descriptor = entry.descriptor.clone();
        self.sessions.write().unwrap().insert(session_id, Arc::new(Mutex::new(entry)));
        Ok(descriptor)
    }

    pub fn descriptor(&self, id: &str) -> ApiResult<SessionDescriptor> {
        Ok(self.session(id)?.lock().unwrap().descriptor.clone())
    }

    /// The question on offer. Repeated calls return the same question until
    /// an answer is accepted.
    pub fn next_question(&self, id: &str, with_scores: bool) -> ApiResult<NextQuestion> {
        let entry = self.session(id)?;
        let mut e = entry.lock().unwrap();
        if e.descriptor.status == SessionStatus::Finished {
            return Ok(NextQuestion::Finished {
                evaluation: format!("/sessions/{id}/evaluation"),
            });
        }
        let sequence = e.sequence();
        let SessionEntry { engine, state, .. } = &mut *e;
        let pick = engine.offer(state)?;
        let var = engine.model().structure().variable(pick.var);
        Ok(NextQuestion::Question {
            sequence,
            question: QuestionPayload {
                id: var.id.clone(),
                text: var.name.clone(),
                options: var.states.clone(),
            },
            scores: with_scores.then_some(pick.scores),
        })
    }

    /// Accepts one answer. The sequence token must equal the number of
    /// answers accepted so far, so a retried post is refused.
    pub fn post_answer(&self, id: &str, req: AnswerRequest) -> ApiResult<Progress> {
        let entry = self.session(id)?;
        let mut e = entry.lock().unwrap();
        if e.descriptor.status == SessionStatus::Finished {
            return Err(ApiError::Conflict("session is finished".into()));
        }
        if req.sequence != e.sequence() {
            return Err(ApiError::Conflict(format!(
                "stale sequence {}, expected {}",
                req.sequence,
                e.sequence()
            )));
        }
        let offered = e.state.pending().is_some_and(|p| p.question == req.question_id);
        if e.descriptor.strict && !offered {
            return Err(ApiError::Conflict(format!(
                "`{}` is not the question on offer",
                req.question_id
            )));
        }
        let mut next = e.state.clone();
        e.engine.submit_labels(&mut next, &req.question_id, &req.state)?;
        let finished = e.engine.should_stop(&next)?;
        self.record(&Event::Answered {
            session_id: id.to_string(),
            sequence: req.sequence,
            question_id: req.question_id,
            state: req.state,
            offered,
        })?;
        if finished {
            self.record(&Event::Finished {
                session_id: id.to_string(),
            })?;
            e.descriptor.status = SessionStatus::Finished;
        }
        e.state = next;
        Ok(Progress {
            session_id: id.to_string(),
            questions_asked: e.state.asked(),
            sequence: e.sequence(),
            status: e.descriptor.status,
            evaluation: e.engine.evaluate(&e.state),
        })
    }

    pub fn evaluation(&self, id: &str) -> ApiResult<EvaluationPayload> {
        let entry = self.session(id)?;
        let e = entry.lock().unwrap();
        Ok(EvaluationPayload {
            session_id: id.to_string(),
            status: e.descriptor.status,
            evaluation: e.engine.evaluate(&e.state),
        })
    }

    pub fn trace(&self, id: &str) -> ApiResult<TracePayload> {
        let entry = self.session(id)?;
        let e = entry.lock().unwrap();
        Ok(TracePayload {
            session: e.descriptor.clone(),
            records: e.state.trace().to_vec(),
        })
    }
}
