//! One PASS/FAIL line per acceptance criterion, followed by indented
//! details. Exits with status 1 if any criterion fails.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use credalcat::bn::{self, Evidence, SkillSpace};
use credalcat::credal::{credal_posterior_bounds, CredalStrategy};
use credalcat::engine::{AnswerSource, TestEngine, TestModel};
use credalcat::linprog::{solve, LpProblem, LpStatus, Relation, Sense};
use credalcat::model::{chain_bank, fig1, perturb_to_credal, single_skill_bank, AnyNetwork, ChainBankSpec, PerturbationSpec};
use credalcat::scores::*;
use credalcat::sim::{run_experiment, Experiment, ExperimentConfig, MetricsSeries, SimulatedStudent, StudentProfile};
use credalcat::{BayesianNetwork, IntervalPmf, Pmf};
use credalcat_service::{router, Service, ServiceConfig, TracePayload, TOKEN_HEADER};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    /// Records a sub-check.
    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.pass &= ok;
        let mark = if ok { "ok" } else { "FAILED" };
        self.details.push(format!("{mark}: {}", detail.into()));
    }

    fn info(&mut self, detail: impl Into<String>) {
        self.details.push(format!("info: {}", detail.into()));
    }

    fn within(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed <= limit,
            format!("runtime {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()),
        );
    }
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const GRADES: [(&str, &str, f64, f64, f64); 8] = [
    ("0", "0", 0.087, 0.028, 0.187),
    ("0", "-", 0.125, 0.052, 0.220),
    ("0", "1", 0.176, 0.092, 0.256),
    ("-", "0", 0.400, 0.306, 0.506),
    ("-", "1", 0.600, 0.599, 0.603),
    ("1", "0", 0.667, 0.626, 0.708),
    ("1", "-", 0.750, 0.748, 0.757),
    ("1", "1", 0.818, 0.784, 0.852),
];

fn row_evidence(net: &credalcat::model::Structure, a1: &str, a2: &str) -> Evidence {
    let pairs: Vec<(&str, &str)> = [("Q1", a1), ("Q2", a2)].into_iter().filter(|p| p.1 != "-").collect();
    Evidence::from_labels(net, pairs).unwrap()
}

fn two_question_posteriors() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let net = fig1();
    let s = net.var("S").unwrap();
    let mut worst: f64 = 0.0;
    for (a1, a2, expected, _, _) in GRADES {
        let p = bn::posterior(&net, s, &row_evidence(net.structure(), a1, a2)).unwrap().get(1);
        worst = worst.max((p - expected).abs());
    }
    out.check(worst <= 1e-3, format!("8 rows, largest deviation from the reference grades {worst:.2e} (tol 1e-3)"));
    out.within(t.elapsed(), Duration::from_secs(1));
    out
}

fn two_question_credal_bounds() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let cn = perturb_to_credal(&fig1(), &PerturbationSpec::new(0.05)).unwrap();
    let s = cn.var("S").unwrap();
    let mut matched = 0;
    for (a1, a2, _, lo, hi) in GRADES {
        let b = credal_posterior_bounds(&cn, s, &row_evidence(cn.structure(), a1, a2), &CredalStrategy::enumeration())
            .unwrap();
        let (l, u) = (b.bounds.lower()[1], b.bounds.upper()[1]);
        let ok_l = (l - lo).abs() <= 1e-3;
        let ok_u = (u - hi).abs() <= 1e-3;
        matched += ok_l as usize + ok_u as usize;
        out.info(format!(
            "Q1={a1} Q2={a2}: computed [{l:.4}, {u:.4}], reference [{lo:.3}, {hi:.3}]{}",
            if ok_l && ok_u { "" } else { "  <- differs" }
        ));
    }
    out.check(matched == 16, format!("{matched}/16 reference bounds reproduced within 1e-3"));
    out.within(t.elapsed(), Duration::from_secs(5));
    out
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn iv(l: &[f64], u: &[f64]) -> IntervalPmf {
    IntervalPmf::new(l.to_vec(), u.to_vec()).unwrap()
}

/// `p = P(S=1)`, `a = P(Q=1|S=1)`, `b = P(Q=1|S=0)`.
fn omega(p: f64, a: f64, b: f64) -> f64 {
    (p * a).max((1.0 - p) * b) + (p * (1.0 - a)).max((1.0 - p) * (1.0 - b))
}

fn omega_lp_reduction() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let band = |rng: &mut ChaCha8Rng| {
        let c: f64 = rng.gen_range(0.1..0.9);
        let w: f64 = rng.gen_range(0.01..0.1);
        ((c - w).max(0.0), (c + w).min(1.0))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (pl, pu) = band(&mut rng);
        let (al, au) = band(&mut rng);
        let (bl, bu) = band(&mut rng);
        let skill = iv(&[1.0 - pu, pl], &[1.0 - pl, pu]);
        let rows = [iv(&[1.0 - bu, bl], &[1.0 - bl, bu]), iv(&[1.0 - au, al], &[1.0 - al, au])];
        let b = mode_cell_omega_bounds(&skill, &rows, DEFAULT_MODE_CAP).unwrap();
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &p in &grid(pl, pu, 0.01) {
            for &a in &grid(al, au, 0.01) {
                for &bb in &grid(bl, bu, 0.01) {
                    let w = omega(p, a, bb);
                    hi = hi.max(w);
                    lo = lo.min(w);
                }
            }
        }
        worst = worst.max((b.upper.value - hi).abs()).max((b.lower.value - lo).abs());
    }
    out.check(worst <= 0.01, format!("20 random instances, largest gap to the grid oracle {worst:.2e} (tol 0.01)"));

    let skill = iv(&[0.45, 0.45], &[0.55, 0.55]);
    let rows = [iv(&[0.65, 0.25], &[0.75, 0.35]), iv(&[0.05, 0.85], &[0.15, 0.95])];
    let w = credal_conditional_dm_bounds(&skill, &rows, DEFAULT_MODE_CAP).unwrap();
    let (hi, lo) = (w.omega.upper.value, w.omega.lower.value);
    out.check(
        (hi - 0.86).abs() <= 1e-6 && (lo - 0.74).abs() <= 1e-6,
        format!(
            "worked instance: upper {hi:.9}, lower {lo:.9} (pinned 0.86 / 0.74, tol 1e-6); M in [{:.4}, {:.4}]",
            w.score.lower, w.score.upper
        ),
    );
    out.within(t.elapsed(), Duration::from_secs(10));
    out
}

fn collapse_gap(net: &BayesianNetwork, answers: usize) -> f64 {
    let cn = perturb_to_credal(net, &PerturbationSpec::new(0.0)).unwrap();
    let space = SkillSpace::new(&cn).unwrap();
    let strategy = CredalStrategy::default();
    let qs = net.questions();
    let e = Evidence::from_iter(qs.iter().take(answers).enumerate().map(|(i, &q)| (q, (i / 2) % 2)));
    let mut worst: f64 = 0.0;
    let mut gap = |a: f64, b: f64| worst = worst.max((a - b).abs());
    for s in net.skills() {
        let post = bn::posterior(net, s, &e).unwrap();
        let bounds = credal_posterior_bounds(&cn, s, &e, &strategy).unwrap();
        let d = credal_dm_bounds(&bounds.bounds).unwrap();
        gap(d.lower, dm(&post));
        gap(d.upper, dm(&post));
        gap(credal_entropy_lower(&bounds.bounds), entropy(&post));
        for &q in qs.iter().skip(answers).filter(|&&q| net.table(q).parents.contains(&s)) {
            let want = conditional_dm(net, s, q, &e).unwrap();
            let c = credal_conditional_dm_in(&cn, &space, s, q, &e, &strategy, DEFAULT_MODE_CAP).unwrap();
            gap(c.score.lower, want);
            gap(c.score.upper, want);
            let want_h = conditional_entropy(net, s, q, &e).unwrap();
            let h = credal_conditional_entropy_lower(&cn, &space, s, q, &e, &strategy).unwrap();
            gap(h.value, want_h);
            let rows = question_rows_given_skill(&cn, q, s).unwrap();
            gap(decoupled_conditional_entropy_lower(&bounds.bounds, &rows).unwrap(), want_h);
        }
    }
    worst
}

fn degenerate_collapse() -> Outcome {
    let mut out = Outcome::new();
    let models = [
        ("fig1", fig1()),
        ("single-skill", single_skill_bank()),
        ("chain", chain_bank(&ChainBankSpec::default())),
    ];
    for (name, net) in &models {
        let worst = [0, 1, 4].iter().map(|&k| collapse_gap(net, k)).fold(0.0, f64::max);
        out.check(worst <= 1e-9, format!("{name}: largest credal/Bayesian score gap {worst:.2e} (tol 1e-9)"));
    }
    out
}

fn iqv() -> Outcome {
    let mut out = Outcome::new();
    let mut axioms = true;
    for m in 2..=5 {
        axioms &= (dm(&Pmf::uniform(m)) - 1.0).abs() < 1e-12;
        axioms &= (entropy(&Pmf::uniform(m)) - 1.0).abs() < 1e-12;
        axioms &= (0..m).all(|s| dm(&Pmf::degenerate(m, s)) == 0.0);
    }
    out.check(axioms, "dm(uniform) = 1, dm(degenerate) = 0, entropy(uniform) = 1 for m = 2..5");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(2..=5);
        let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let p = Pmf::from_weights(&w).unwrap();
        let max = p.probs().iter().cloned().fold(0.0, f64::max);
        let closed = m as f64 * (1.0 - max) / (m as f64 - 1.0);
        worst = worst.max((dm(&p) - closed).abs());
    }
    out.check(worst <= 1e-12, format!("1000 random PMFs, largest gap to the closed form {worst:.2e} (tol 1e-12)"));
    out
}

fn series<'a>(all: &'a [MetricsSeries], label: &str) -> &'a MetricsSeries {
    all.iter().find(|s| s.arm == label).unwrap()
}

fn at(s: &MetricsSeries, k: usize) -> f64 {
    s.accuracy[s.question_counts.iter().position(|&c| c == k).unwrap()]
}

/// Largest shortfall of any adaptive arm below random at checkpoints `>= from`,
/// as `(deficit, arm, checkpoint)`.
fn worst_deficit(all: &[MetricsSeries], from: usize) -> Option<(f64, String, usize)> {
    let random = series(all, "random");
    let mut worst: Option<(f64, String, usize)> = None;
    for s in all.iter().filter(|s| s.arm != "random") {
        for (i, &k) in s.question_counts.iter().enumerate().filter(|(_, &k)| k >= from) {
            let d = random.accuracy[i] - s.accuracy[i];
            if d > 1e-12 && worst.as_ref().is_none_or(|w| d > w.0) {
                worst = Some((d, s.arm.clone(), k));
            }
        }
    }
    worst
}

fn count_deficits(all: &[MetricsSeries], from: usize) -> usize {
    let random = series(all, "random");
    all.iter()
        .filter(|s| s.arm != "random")
        .map(|s| {
            s.question_counts
                .iter()
                .enumerate()
                .filter(|(i, &k)| k >= from && random.accuracy[*i] - s.accuracy[*i] > 1e-12)
                .count()
        })
        .sum()
}

fn dominance(out: &mut Outcome, all: &[MetricsSeries], from: usize, unit: f64) {
    match worst_deficit(all, from) {
        None => out.check(true, format!("every adaptive arm >= random at every checkpoint >= {from}")),
        Some((d, arm, k)) => out.check(
            false,
            format!(
                "adaptive arms >= random at every checkpoint >= {from}: {} (arm, checkpoint) pairs fall short, worst {arm} at {k} by {d:.4} ({:.0} student-skills)",
                count_deficits(all, from),
                d / unit
            ),
        ),
    }
}

fn brier_trend(out: &mut Outcome, all: &[MetricsSeries]) {
    let ok = all.iter().all(|s| {
        let n = s.brier.len();
        s.brier[n - 3..].iter().sum::<f64>() <= s.brier[..3].iter().sum::<f64>()
    });
    out.check(ok, "mean Brier over the last 3 checkpoints <= mean over the first 3, every arm");
}

fn curve(s: &MetricsSeries) -> String {
    s.accuracy.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(" ")
}

fn experiment_single_skill() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let exp = ExperimentConfig::load(&repo().join("configs/single_skill.json")).unwrap();
    let all = run_experiment(&exp).unwrap();
    let elapsed = t.elapsed();
    let n = exp.population.count as f64;
    out.info(format!("{} students, seed {}", exp.population.count, exp.seed));
    for s in &all {
        out.info(format!("{:<11} {}", s.arm, curve(s)));
    }
    dominance(&mut out, &all, 4, 1.0 / n);
    let adaptive: Vec<&MetricsSeries> = all.iter().filter(|s| s.arm != "random").collect();
    let by6 = adaptive.iter().all(|s| (0..=6).any(|k| at(s, k) >= 0.90));
    let at18 = adaptive.iter().map(|s| at(s, 18)).fold(1.0, f64::min);
    let slowest6 = adaptive.iter().map(|s| at(s, 6)).fold(1.0, f64::min);
    out.check(by6, format!("every adaptive arm >= 0.90 by 6 questions (lowest at 6: {slowest6:.4})"));
    out.check(at18 >= 0.97, format!("every adaptive arm >= 0.97 at 18 (lowest {at18:.4})"));
    let gap = (at(series(&all, "bn-dm"), 18) - at(series(&all, "bn-entropy"), 18)).abs();
    out.check(gap <= 0.02, format!("Bayesian DM vs entropy final accuracy gap {gap:.4} (tol 0.02)"));
    brier_trend(&mut out, &all);
    out.within(elapsed, Duration::from_secs(300));

    // the dominance check on other seeds, for context only
    let mut mean = all.clone();
    for seed in 2..=5 {
        let mut e: Experiment = exp.clone();
        e.seed = seed;
        let other = run_experiment(&e).unwrap();
        for (m, o) in mean.iter_mut().zip(&other) {
            m.accuracy.iter_mut().zip(&o.accuracy).for_each(|(a, b)| *a += b);
        }
        let worst = worst_deficit(&other, 4)
            .map(|(d, arm, k)| format!("worst {arm} at {k} by {:.0} students", d * n))
            .unwrap_or_else(|| "none".into());
        out.info(format!(
            "seed {seed}: {} (arm, checkpoint) pairs below random, {worst}",
            count_deficits(&other, 4)
        ));
    }
    let worst = worst_deficit(&mean, 4)
        .map(|(d, arm, k)| format!("worst {arm} at {k} by {:.4}", d / 5.0))
        .unwrap_or_else(|| "none".into());
    out.info(format!(
        "mean over seeds 1..5: {} (arm, checkpoint) pairs below random, {worst}",
        count_deficits(&mean, 4)
    ));
    out
}

fn experiment_chain() -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let exp = ExperimentConfig::load(&repo().join("configs/chain.json")).unwrap();
    let all = run_experiment(&exp).unwrap();
    let elapsed = t.elapsed();
    let unit = 1.0 / (exp.population.count as f64 * 4.0);
    out.info(format!("{} students, seed {}", exp.population.count, exp.seed));
    for s in &all {
        let picks: Vec<String> = [0, 5, 10, 24, 40, 64].iter().map(|&k| format!("{k}:{:.3}", at(s, k))).collect();
        out.info(format!("{:<11} {}", s.arm, picks.join(" ")));
    }
    dominance(&mut out, &all, 5, unit);
    let adaptive: Vec<&MetricsSeries> = all.iter().filter(|s| s.arm != "random").collect();
    let lowest24 = adaptive.iter().map(|s| (0..=24).map(|k| at(s, k)).fold(0.0, f64::max)).fold(1.0, f64::min);
    out.check(lowest24 >= 0.95, format!("every adaptive arm >= 0.95 by 24 questions (lowest best {lowest24:.4})"));
    let gap = (at(series(&all, "bn-dm"), 64) - at(series(&all, "bn-entropy"), 64)).abs();
    out.check(gap <= 0.02, format!("Bayesian DM vs entropy final accuracy gap {gap:.4} (tol 0.02)"));
    let cgap = (at(series(&all, "cn-dm"), 64) - at(series(&all, "cn-entropy"), 64)).abs();
    out.info(format!("credal DM vs entropy final gap {cgap:.4}"));
    out.within(elapsed, Duration::from_secs(900));
    out
}

async fn send(app: &axum::Router, method: &str, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(TOKEN_HEADER, t);
    }
    let req = req
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn linearizability(out: &mut Outcome) {
    const TOKEN: &str = "acceptance";
    let service = Service::open(&ServiceConfig {
        instructor_token: Some(TOKEN.into()),
        ..ServiceConfig::default()
    })
    .unwrap();
    let app = router(Arc::new(service));
    let bank = single_skill_bank();
    let doc = AnyNetwork::Bayesian(bank.clone()).to_document();
    let req = Request::builder().method("POST").uri("/models?id=bank").body(Body::from(doc)).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::CREATED);
    let (_, d) = send(
        &app,
        "POST",
        "/sessions",
        Some(json!({"model_id": "bank", "policy": {"kind": "entropy_gain"}, "rule": {"kind": "exhaust"}, "seed": 11})),
        None,
    )
    .await;
    let id = d["session_id"].as_str().unwrap().to_string();
    let mut student = SimulatedStudent::new(Arc::new(bank.clone()), StudentProfile::new(&bank, &[0]).unwrap(), 4);
    let mut served = Vec::new();
    let (mut conflicts, mut unchanged) = (0, 0);
    for k in 0..10u64 {
        let (_, next) = send(&app, "GET", &format!("/sessions/{id}/next"), None, None).await;
        let q = next["question"]["id"].as_str().unwrap().to_string();
        let a = student.answer(bank.var(&q).unwrap()).unwrap().to_string();
        let body = json!({"question_id": q, "state": a, "sequence": k});
        let (st, p) = send(&app, "POST", &format!("/sessions/{id}/answers"), Some(body.clone()), None).await;
        assert_eq!(st, StatusCode::OK);
        served.push(p["evaluation"].clone());
        let before = send(&app, "GET", &format!("/sessions/{id}/next"), None, None).await.1;
        let (st, _) = send(&app, "POST", &format!("/sessions/{id}/answers"), Some(body), None).await;
        conflicts += (st == StatusCode::CONFLICT) as usize;
        let after_next = send(&app, "GET", &format!("/sessions/{id}/next"), None, None).await.1;
        let after_eval = send(&app, "GET", &format!("/sessions/{id}/evaluation"), None, None).await.1;
        unchanged += (before == after_next && after_eval["evaluation"] == p["evaluation"]) as usize;
    }
    out.check(conflicts == 10, format!("{conflicts}/10 duplicate posts answered with 409"));
    out.check(unchanged == 10, format!("{unchanged}/10 duplicates left the session unchanged"));
    let (_, trace) = send(&app, "GET", &format!("/sessions/{id}/trace"), None, Some(TOKEN)).await;
    let trace: TracePayload = serde_json::from_value(trace).unwrap();
    let engine = TestEngine::new(TestModel::Bayesian(Arc::new(bank)), trace.session.policy, trace.session.rule).unwrap();
    let reproduced = (1..=trace.records.len())
        .filter(|&k| {
            let s = engine.replay(trace.session.seed, &trace.records[..k]).unwrap();
            serde_json::to_value(engine.evaluate(&s)).unwrap() == served[k - 1]
        })
        .count();
    out.check(
        trace.records.len() == 10 && reproduced == 10,
        format!("offline replay of the trace reproduced {reproduced}/10 served evaluations exactly"),
    );
}

fn service_linearizability() -> Outcome {
    let mut out = Outcome::new();
    tokio::runtime::Runtime::new().unwrap().block_on(linearizability(&mut out));
    out
}

struct Row {
    a: Vec<f64>,
    rel: Relation,
    b: f64,
}

fn solve_square(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Best objective over all basic feasible solutions.
fn vertex_oracle(rows: &[Row], cost: &[f64], maximize: bool) -> Option<f64> {
    let n = cost.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].a.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| rows[i].b).collect();
        if let Some(x) = solve_square(&a, &b) {
            let feasible = rows.iter().all(|r| {
                let lhs: f64 = r.a.iter().zip(&x).map(|(a, x)| a * x).sum();
                match r.rel {
                    Relation::Le => lhs <= r.b + 1e-9,
                    Relation::Ge => lhs >= r.b - 1e-9,
                    Relation::Eq => (lhs - r.b).abs() <= 1e-9,
                }
            });
            if feasible {
                let v: f64 = cost.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b| if maximize { b.max(v) } else { b.min(v) }));
            }
        }
        // next n-subset of the rows in lexicographic order
        let k = rows.len();
        let Some(i) = (0..n).rev().find(|&i| idx[i] < k - n + i) else {
            return best;
        };
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn lp_suite() -> Outcome {
    let mut out = Outcome::new();
    let mut lp = LpProblem::new(Sense::Maximize);
    let x = lp.add_var("x", Some(0.0), 1.0);
    lp.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 1.0);
    let s = solve(&lp).unwrap();
    out.check(s.status == LpStatus::Optimal && (s.value - 1.0).abs() < 1e-9, "max x, x <= 1, x >= 0 -> 1");

    let mut lp = LpProblem::new(Sense::Maximize);
    let x = lp.add_var("x", Some(0.0), 1.0);
    lp.add_constraint("floor", vec![(x, 1.0)], Relation::Ge, 2.0);
    lp.add_constraint("cap", vec![(x, 1.0)], Relation::Le, 1.0);
    out.check(solve(&lp).unwrap().status == LpStatus::Infeasible, "x >= 2, x <= 1 -> infeasible");

    let mut lp = LpProblem::new(Sense::Maximize);
    let x = lp.add_var("x", Some(0.0), 1.0);
    let y = lp.add_var("y", Some(0.0), 1.0);
    lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    let s = solve(&lp).unwrap();
    out.check(s.status == LpStatus::Optimal && (s.value - 1.0).abs() < 1e-9, "max x + y, x + y <= 1 -> 1");

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut agree = 0;
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.gen_range(1..=4);
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let sense = if case % 2 == 0 { Sense::Maximize } else { Sense::Minimize };
        let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut lp = LpProblem::new(sense);
        let mut rows = Vec::new();
        for (j, &c) in cost.iter().enumerate() {
            lp.add_var(format!("x{j}"), Some(0.0), c);
            lp.add_constraint("box", vec![(j, 1.0)], Relation::Le, 4.0);
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push(Row { a: a.clone(), rel: Relation::Ge, b: 0.0 });
            rows.push(Row { a, rel: Relation::Le, b: 4.0 });
        }
        for k in 0..rng.gen_range(1..=4) {
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let at: f64 = a.iter().zip(&x0).map(|(a, x)| a * x).sum();
            let (rel, b) = match (k + case) % 4 {
                0 if n > 1 => (Relation::Eq, at),
                1 => (Relation::Ge, at - rng.gen_range(0.0..1.0)),
                _ => (Relation::Le, at + rng.gen_range(0.0..1.0)),
            };
            lp.add_constraint("random", a.iter().copied().enumerate().collect(), rel, b);
            rows.push(Row { a, rel, b });
        }
        let s = solve(&lp).unwrap();
        let Some(want) = vertex_oracle(&rows, &cost, sense == Sense::Maximize) else { continue };
        if s.status == LpStatus::Optimal {
            let d = (s.value - want).abs();
            worst = worst.max(d);
            agree += (d <= 1e-6) as usize;
        }
    }
    out.check(agree == 50, format!("{agree}/50 random feasible LPs agree with vertex enumeration (largest gap {worst:.2e}, tol 1e-6)"));
    out
}

fn main() {
    // `cargo test` passes harness flags such as `--quiet`; they do not apply here
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Two-question posteriors", two_question_posteriors),
        ("Two-question credal bounds", two_question_credal_bounds),
        ("Mode-cell LP reduction", omega_lp_reduction),
        ("Degenerate collapse", degenerate_collapse),
        ("IQV axiom suite", iqv),
        ("Single-skill experiment", experiment_single_skill),
        ("Chain experiment", experiment_chain),
        ("Service linearizability", service_linearizability),
        ("LP solver suite", lp_suite),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = run();
        println!("{} {name}", if outcome.pass { "PASS" } else { "FAIL" });
        for d in &outcome.details {
            println!("    {d}");
        }
        failed += (!outcome.pass) as usize;
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
