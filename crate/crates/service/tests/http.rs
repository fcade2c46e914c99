use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use credalcat::engine::{PickKind, StoppingRule, TestEngine, TestModel};
use credalcat::model::{fig1, perturb_to_credal, single_skill_bank, AnyNetwork, PerturbationSpec};
use credalcat::sim::{SimulatedStudent, StudentProfile};
use credalcat::engine::AnswerSource;
use credalcat_service::*;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const TOKEN: &str = "sesame";

struct Client {
    app: Router,
}

impl Client {
    fn new(service: Service) -> Self {
        Self {
            app: router(Arc::new(service)),
        }
    }

    fn with_token() -> Self {
        Self::new(
            Service::open(&ServiceConfig {
                instructor_token: Some(TOKEN.into()),
                ..ServiceConfig::default()
            })
            .unwrap(),
        )
    }

    async fn send(&self, method: &str, uri: &str, body: Option<String>, token: Option<&str>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(TOKEN_HEADER, t);
        }
        let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap()
        };
        (status, value)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.send("GET", uri, None, None).await
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.send("POST", uri, Some(body.to_string()), None).await
    }

    async fn upload(&self, id: &str, net: AnyNetwork) {
        let (st, v) = self.send("POST", &format!("/models?id={id}"), Some(net.to_document()), None).await;
        assert_eq!(st, StatusCode::CREATED, "{v}");
    }

    async fn session(&self, body: Value) -> String {
        let (st, v) = self.post("/sessions", body).await;
        assert_eq!(st, StatusCode::CREATED, "{v}");
        v["session_id"].as_str().unwrap().to_string()
    }

    async fn answer(&self, id: &str, q: &str, state: &str, sequence: u64) -> (StatusCode, Value) {
        self.post(
            &format!("/sessions/{id}/answers"),
            json!({"question_id": q, "state": state, "sequence": sequence}),
        )
        .await
    }
}

fn grade(v: &Value) -> f64 {
    v["evaluation"]["skills"][0]["grade"].as_f64().unwrap()
}

#[tokio::test]
async fn health_probe() {
    let c = Client::new(Service::in_memory());
    let (st, v) = c.get("/health").await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test]
async fn model_upload() {
    let c = Client::new(Service::in_memory());
    c.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let (st, _) = c
        .send("POST", "/models?id=fig1", Some(AnyNetwork::Bayesian(fig1()).to_document()), None)
        .await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, v) = c.send("POST", "/models?id=bad", Some("{not json".into()), None).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "validation");
    let (st, _) = c
        .send("POST", "/models?id=a%20b", Some(AnyNetwork::Bayesian(fig1()).to_document()), None)
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, v) = c.send("POST", "/models", Some(AnyNetwork::Bayesian(fig1()).to_document()), None).await;
    assert_eq!(st, StatusCode::CREATED);
    let generated = v["model_id"].as_str().unwrap().to_string();
    let (_, list) = c.get("/models").await;
    let ids: Vec<&str> = list.as_array().unwrap().iter().map(|m| m["model_id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"fig1") && ids.contains(&generated.as_str()));
    assert_eq!(list[0]["questions"], json!(["Q1", "Q2"]));
}

#[tokio::test]
async fn session_creation_errors() {
    let c = Client::new(Service::in_memory());
    c.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let (st, _) = c.post("/sessions", json!({"model_id": "nope"})).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c
        .post("/sessions", json!({"model_id": "fig1", "rule": {"kind": "score_threshold", "threshold": 1.5}}))
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, _) = c.post("/sessions", json!({"model": "fig1"})).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, v) = c
        .post("/sessions", json!({"model_id": "fig1", "policy": {"kind": "dm_gain"}, "rule": {"kind": "exhaust"}}))
        .await;
    assert_eq!(st, StatusCode::CREATED);
    assert_eq!(v["status"], "active");
    assert_eq!(v["policy"]["kind"], "dm_gain");
    let (st, _) = c.get("/sessions/unknown/next").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = c.get("/sessions/unknown/evaluation").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn fig1_session_flow() {
    let c = Client::new(Service::in_memory());
    c.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let id = c.session(json!({"model_id": "fig1", "rule": {"kind": "exhaust"}})).await;
    let (_, fresh) = c.get(&format!("/sessions/{id}/evaluation")).await;
    assert!((grade(&fresh) - 0.5).abs() < 1e-12);

    let (st, next) = c.get(&format!("/sessions/{id}/next")).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(next["status"], "question");
    assert_eq!(next["question"]["id"], "Q1");
    assert_eq!(next["question"]["options"], json!(["0", "1"]));
    assert!(next.get("scores").is_none());
    assert_eq!(c.get(&format!("/sessions/{id}/next")).await.1, next);

    let (st, p) = c.answer(&id, "Q1", "1", 0).await;
    assert_eq!(st, StatusCode::OK);
    assert!((grade(&p) - 0.75).abs() < 1e-12);
    assert_eq!(p["sequence"], 1);

    let (st, _) = c.answer(&id, "Q1", "1", 1).await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, _) = c.answer(&id, "Q2", "yes", 1).await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
    let (st, _) = c.answer(&id, "Q2", "1", 0).await;
    assert_eq!(st, StatusCode::CONFLICT);

    let (st, p) = c.answer(&id, "Q2", "1", 1).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(p["status"], "finished");
    assert!((grade(&p) - 0.818).abs() < 1e-3);
    let (_, next) = c.get(&format!("/sessions/{id}/next")).await;
    assert_eq!(next["status"], "finished");
    assert_eq!(next["evaluation"], format!("/sessions/{id}/evaluation"));
    let (_, a) = c.get(&format!("/sessions/{id}/evaluation")).await;
    let (_, b) = c.get(&format!("/sessions/{id}/evaluation")).await;
    assert_eq!(a, b);
    assert_eq!(a["status"], "finished");
    let (st, _) = c.answer(&id, "Q2", "1", 2).await;
    assert_eq!(st, StatusCode::CONFLICT);
}

#[tokio::test]
async fn stopping_rule_finishes_the_session() {
    let c = Client::new(Service::in_memory());
    c.upload("bank", AnyNetwork::Bayesian(single_skill_bank())).await;
    let id = c
        .session(json!({"model_id": "bank", "rule": {"kind": "max_questions", "max_questions": 2}}))
        .await;
    for k in 0..2 {
        let (_, next) = c.get(&format!("/sessions/{id}/next")).await;
        let q = next["question"]["id"].as_str().unwrap().to_string();
        let (st, p) = c.answer(&id, &q, "1", k).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(p["status"], if k == 1 { "finished" } else { "active" });
    }
    let instant = c
        .session(json!({"model_id": "bank", "rule": {"kind": "score_threshold", "threshold": 1.0}}))
        .await;
    assert_eq!(c.get(&format!("/sessions/{instant}/next")).await.1["status"], "finished");
}

#[tokio::test]
async fn instructor_endpoints() {
    let c = Client::with_token();
    c.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let id = c.session(json!({"model_id": "fig1"})).await;
    let next = format!("/sessions/{id}/next?scores=true");
    assert_eq!(c.get(&next).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(c.send("GET", &next, None, Some("wrong")).await.0, StatusCode::UNAUTHORIZED);
    let (st, v) = c.send("GET", &next, None, Some(TOKEN)).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["scores"].as_array().unwrap().len(), 2);
    let trace = format!("/sessions/{id}/trace");
    assert_eq!(c.get(&trace).await.0, StatusCode::UNAUTHORIZED);
    let bearer = Request::builder()
        .uri(&trace)
        .header("authorization", format!("Bearer {TOKEN}"))
        .body(Body::empty())
        .unwrap();
    assert_eq!(c.app.clone().oneshot(bearer).await.unwrap().status(), StatusCode::OK);

    let open = Client::new(Service::in_memory());
    open.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let id = open.session(json!({"model_id": "fig1"})).await;
    assert_eq!(open.get(&format!("/sessions/{id}/trace")).await.0, StatusCode::FORBIDDEN);
}

#[tokio::test]
async fn strict_sessions_take_only_the_offered_question() {
    let c = Client::new(Service::in_memory());
    c.upload("fig1", AnyNetwork::Bayesian(fig1())).await;
    let id = c.session(json!({"model_id": "fig1", "strict": true})).await;
    assert_eq!(c.answer(&id, "Q1", "1", 0).await.0, StatusCode::CONFLICT);
    c.get(&format!("/sessions/{id}/next")).await;
    assert_eq!(c.answer(&id, "Q2", "1", 0).await.0, StatusCode::CONFLICT);
    assert_eq!(c.answer(&id, "Q1", "1", 0).await.0, StatusCode::OK);
}

#[tokio::test]
async fn credal_sessions_report_bounds() {
    let c = Client::new(Service::in_memory());
    let cn = perturb_to_credal(&fig1(), &PerturbationSpec::new(0.05)).unwrap();
    c.upload("fig1-credal", AnyNetwork::Credal(cn)).await;
    let id = c
        .session(json!({"model_id": "fig1-credal", "policy": {"kind": "dm_gain"}, "rule": {"kind": "exhaust"}}))
        .await;
    c.answer(&id, "Q1", "1", 0).await;
    let (_, p) = c.answer(&id, "Q2", "1", 1).await;
    let s = &p["evaluation"]["skills"][0];
    let (lo, hi, mid) = (s["lower"].as_f64().unwrap(), s["upper"].as_f64().unwrap(), s["grade"].as_f64().unwrap());
    assert!((lo - 0.7083).abs() < 1e-4 && (hi - 0.8961).abs() < 1e-4);
    assert!(lo < mid && mid < hi);
    let (st, _) = c
        .post(
            "/sessions",
            json!({"model_id": "fig1-credal", "policy": {"kind": "entropy_gain", "credal_bound": "upper"}}),
        )
        .await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn concurrent_duplicates_are_accepted_once() {
    let c = Arc::new(Client::new(Service::in_memory()));
    c.upload("bank", AnyNetwork::Bayesian(single_skill_bank())).await;
    let id = c.session(json!({"model_id": "bank", "rule": {"kind": "exhaust"}})).await;
    let mut handles = Vec::new();
    for _ in 0..8 {
        let (c, id) = (Arc::clone(&c), id.clone());
        handles.push(tokio::spawn(async move { c.answer(&id, "Q04", "1", 0).await.0 }));
    }
    let mut ok = 0;
    for h in handles {
        match h.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => {}
            other => panic!("unexpected {other}"),
        }
    }
    assert_eq!(ok, 1);
    let (_, ev) = c.get(&format!("/sessions/{id}/evaluation")).await;
    assert_eq!(ev["evaluation"]["questions_asked"], 1);
}

/// Ten answers from a simulated student; every served evaluation must be
/// reproduced by replaying the trace offline, and duplicate posts must not
/// change anything.
#[tokio::test]
async fn ten_answer_session_replays_offline() {
    let c = Client::with_token();
    let bank = single_skill_bank();
    c.upload("bank", AnyNetwork::Bayesian(bank.clone())).await;
    let id = c
        .session(json!({"model_id": "bank", "policy": {"kind": "dm_gain"}, "rule": {"kind": "exhaust"}, "seed": 3}))
        .await;
    let mut student = SimulatedStudent::new(Arc::new(bank.clone()), StudentProfile::new(&bank, &[1]).unwrap(), 99);
    let mut served = Vec::new();
    for k in 0..10u64 {
        let (_, next) = c.get(&format!("/sessions/{id}/next")).await;
        assert_eq!(next["sequence"], k);
        let q = next["question"]["id"].as_str().unwrap().to_string();
        let a = student.answer(bank.var(&q).unwrap()).unwrap().to_string();
        let (st, p) = c.answer(&id, &q, &a, k).await;
        assert_eq!(st, StatusCode::OK);
        served.push(p["evaluation"].clone());
        let (st, _) = c.answer(&id, &q, &a, k).await;
        assert_eq!(st, StatusCode::CONFLICT);
        let (_, now) = c.get(&format!("/sessions/{id}/evaluation")).await;
        assert_eq!(now["evaluation"], served[k as usize]);
    }
    let (_, trace) = c.send("GET", &format!("/sessions/{id}/trace"), None, Some(TOKEN)).await;
    let trace: TracePayload = serde_json::from_value(trace).unwrap();
    assert_eq!(trace.records.len(), 10);
    assert!(trace.records.iter().all(|r| r.scores.is_some()));
    let engine = TestEngine::new(
        TestModel::Bayesian(Arc::new(bank)),
        trace.session.policy,
        trace.session.rule,
    )
    .unwrap();
    assert_eq!(engine.policy().kind, PickKind::DmGain);
    assert_eq!(*engine.rule(), StoppingRule::exhaust());
    for k in 1..=10 {
        let s = engine.replay(trace.session.seed, &trace.records[..k]).unwrap();
        assert_eq!(serde_json::to_value(engine.evaluate(&s)).unwrap(), served[k - 1]);
        assert_eq!(s.trace(), &trace.records[..k]);
    }
}

#[tokio::test]
async fn restart_restores_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    std::fs::create_dir(&models).unwrap();
    std::fs::write(models.join("fig1.model"), AnyNetwork::Bayesian(fig1()).to_document()).unwrap();
    let config = ServiceConfig {
        models_dir: Some(models),
        event_log: Some(dir.path().join("data/events.jsonl")),
        instructor_token: Some(TOKEN.into()),
    };
    let c = Client::new(Service::open(&config).unwrap());
    c.upload("bank", AnyNetwork::Bayesian(single_skill_bank())).await;
    let a = c.session(json!({"model_id": "bank", "policy": {"kind": "random"}, "seed": 5, "rule": {"kind": "exhaust"}})).await;
    let b = c.session(json!({"model_id": "fig1"})).await;
    for k in 0..4 {
        let (_, next) = c.get(&format!("/sessions/{a}/next")).await;
        let q = next["question"]["id"].as_str().unwrap().to_string();
        c.answer(&a, &q, if k % 2 == 0 { "1" } else { "0" }, k).await;
    }
    // an answer to a question that was not on offer
    c.answer(&a, "Q18", "1", 4).await;
    c.answer(&b, "Q2", "0", 0).await;
    let snapshot = |c: &Client, id: String| {
        let c = c.app.clone();
        async move {
            let client = Client { app: c };
            (
                client.get(&format!("/sessions/{id}/next")).await.1,
                client.get(&format!("/sessions/{id}/evaluation")).await.1,
                client.send("GET", &format!("/sessions/{id}/trace"), None, Some(TOKEN)).await.1,
                client.get(&format!("/sessions/{id}")).await.1,
            )
        }
    };
    let before = (snapshot(&c, a.clone()).await, snapshot(&c, b.clone()).await);
    drop(c);
    let c = Client::new(Service::open(&config).unwrap());
    let after = (snapshot(&c, a.clone()).await, snapshot(&c, b.clone()).await);
    assert_eq!(before, after);
    assert_eq!(c.get("/models").await.1.as_array().unwrap().len(), 2);
    // the log keeps growing after a restart
    let (_, next) = c.get(&format!("/sessions/{a}/next")).await;
    let q = next["question"]["id"].as_str().unwrap().to_string();
    assert_eq!(c.answer(&a, &q, "1", 5).await.0, StatusCode::OK);
    drop(c);
    let c = Client::new(Service::open(&config).unwrap());
    assert_eq!(c.get(&format!("/sessions/{a}/evaluation")).await.1["evaluation"]["questions_asked"], 6);
}

#[test]
fn corrupt_logs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.jsonl");
    std::fs::write(&log, "{\"event\":\"finished\",\"session_id\":\"x\"}\n").unwrap();
    let config = ServiceConfig {
        event_log: Some(log.clone()),
        ..ServiceConfig::default()
    };
    assert!(Service::open(&config).is_err());
    std::fs::write(&log, "garbage\n").unwrap();
    assert!(Service::open(&config).is_err());
}
