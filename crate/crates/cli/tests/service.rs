use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use tom_cli::service::{parse_turn, router, AppState, Config, ProfileMode};
use tom_core::engine::EngineOptions;
use tom_core::exec::Exec;
use tom_core::scenario::ProfileId;
use tom_core::session::INTERVIEW_SCENARIO;
use tom_core::syntax::parse_scenario;

fn app(profile: ProfileMode) -> Router {
    router(AppState::new(Config {
        doc: parse_scenario(INTERVIEW_SCENARIO).unwrap(),
        profile,
        seed: 7,
        theory: Default::default(),
        opts: EngineOptions::default(),
        exec: Exec::default(),
    }))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap())
}

fn affects(focused: f64, hesitating: f64) -> Value {
    json!({
        "relieved": 0.0, "embarrassed": 0.0, "hesitating": hesitating, "stressed": 0.0,
        "ill_at_ease": 0.0, "focused": focused, "aggressive": 0.0, "bored": 0.0
    })
}

async fn create(app: &Router) -> Value {
    let (s, v) = json_call(app, "POST", "/sessions", None).await;
    assert_eq!(s, StatusCode::CREATED);
    v
}

#[tokio::test]
async fn create_then_turn() {
    let app = app(ProfileMode::Fixed(ProfileId::B));
    let c = create(&app).await;
    assert_eq!(c["profile_id"], "B");
    assert_eq!(c["topic"], "greeting");
    assert!(c["utterance"].as_str().unwrap().len() > 3);
    let id = c["session_id"].as_str().unwrap();

    let (s, t) = json_call(
        &app,
        "POST",
        &format!("/sessions/{id}/turns"),
        Some(json!({"answer_text": "Hello", "affects": affects(0.9, 0.0)})),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    for key in ["utterance", "topic", "recruiter_valence", "assessment", "predicted_user_emotions", "interview_done"] {
        assert!(t.get(key).is_some(), "missing {key} in {t}");
    }
    assert_eq!(t["interview_done"], false);
    // the greeting has no interpretation rules
    assert_eq!(t["assessment"]["self_confidence"], 0.0);
    let v = t["recruiter_valence"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&v));

    let mut t = t;
    while t["interview_done"] == false {
        t = json_call(
            &app,
            "POST",
            &format!("/sessions/{id}/turns"),
            Some(json!({"answer_text": "Sure", "affects": affects(0.9, 0.0)})),
        )
        .await
        .1;
    }
    assert!(t["assessment"]["self_confidence"].as_f64().unwrap() > 0.0, "{t}");
}

#[tokio::test]
async fn full_interview_then_conflict() {
    let app = app(ProfileMode::Fixed(ProfileId::A));
    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/turns");
    let mut turns = 0;
    loop {
        let (s, t) = json_call(&app, "POST", &uri, Some(json!({"answer_text": "", "affects": affects(0.5, 0.1)}))).await;
        assert_eq!(s, StatusCode::OK);
        turns += 1;
        if t["interview_done"] == true {
            assert!(t["utterance"].is_null());
            break;
        }
        assert!(turns < 20);
    }
    assert_eq!(turns, 6);
    let (s, v) = json_call(&app, "POST", &uri, Some(json!({"answer_text": "", "affects": affects(0.5, 0.1)}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "interview complete");

    let (s, tr) = json_call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(s, StatusCode::OK);
    let entries = tr["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    assert_eq!(entries[0]["speaker"], "recruiter");
    assert_eq!(entries[1]["speaker"], "candidate");
    assert_eq!(entries[11]["topic"], "closing");
}

#[tokio::test]
async fn invalid_turns_list_every_field() {
    let app = app(ProfileMode::Fixed(ProfileId::B));
    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/turns");
    let mut a = affects(0.5, 0.0);
    a["focused"] = json!(1.5);
    a["bored"] = json!("very");
    a.as_object_mut().unwrap().remove("stressed");
    a["sleepy"] = json!(0.2);
    let (s, v) = json_call(&app, "POST", &uri, Some(json!({"answer_text": 3, "affects": a}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let mut fields: Vec<&str> = v["fields"].as_array().unwrap().iter().map(|f| f["field"].as_str().unwrap()).collect();
    fields.sort();
    assert_eq!(
        fields,
        ["affects.bored", "affects.focused", "affects.sleepy", "affects.stressed", "answer_text"]
    );
    for f in v["fields"].as_array().unwrap() {
        assert!(!f["problem"].as_str().unwrap().is_empty());
    }
    // a rejected turn leaves the session where it was
    let (_, t) = json_call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    assert_eq!(t["entries"].as_array().unwrap().len(), 1);

    let (s, _) = call(&app, "POST", &uri, None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unknown_sessions_are_404() {
    let app = app(ProfileMode::Random);
    for (m, path) in [
        ("POST", "/sessions/nope/turns"),
        ("GET", "/sessions/nope/transcript"),
        ("GET", "/sessions/nope/trace"),
        ("GET", "/sessions/nope/events"),
        ("GET", "/sessions/nope"),
    ] {
        let body = (m == "POST").then(|| json!({"answer_text": "", "affects": affects(0.0, 0.0)}));
        let (s, _) = call(&app, m, path, body).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "{m} {path}");
    }
}

#[tokio::test]
async fn trace_is_plain_text_with_interpret_and_select_records() {
    let app = app(ProfileMode::Fixed(ProfileId::C));
    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    for _ in 0..6 {
        json_call(
            &app,
            "POST",
            &format!("/sessions/{id}/turns"),
            Some(json!({"answer_text": "hm", "affects": affects(0.0, 0.8)})),
        )
        .await;
    }
    let (s, body) = call(&app, "GET", &format!("/sessions/{id}/trace"), None).await;
    assert_eq!(s, StatusCode::OK);
    let text = String::from_utf8(body).unwrap();
    assert!(text.starts_with("# tom-trace v1"));
    assert!(text.contains("# profile C"));
    assert!(text.lines().any(|l| l.contains("|interpret|interpret_affects|")));
    assert!(text.lines().any(|l| l.contains("|select|select_question|")));
    for l in text.lines().filter(|l| !l.starts_with('#')) {
        assert_eq!(l.split('|').count(), 6, "{l}");
    }
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app(ProfileMode::Fixed(ProfileId::B));
    let a = create(&app).await["session_id"].as_str().unwrap().to_string();
    let b = create(&app).await["session_id"].as_str().unwrap().to_string();
    assert_ne!(a, b);
    let (_, before) = call(&app, "GET", &format!("/sessions/{b}/trace"), None).await;
    for _ in 0..3 {
        json_call(
            &app,
            "POST",
            &format!("/sessions/{a}/turns"),
            Some(json!({"answer_text": "x", "affects": affects(1.0, 0.0)})),
        )
        .await;
    }
    let (_, after) = call(&app, "GET", &format!("/sessions/{b}/trace"), None).await;
    assert_eq!(before, after);
    let (_, tb) = json_call(&app, "GET", &format!("/sessions/{b}/transcript"), None).await;
    assert_eq!(tb["entries"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn random_profiles_follow_the_seed() {
    let draw = || async {
        let app = app(ProfileMode::Random);
        let mut out = String::new();
        for _ in 0..12 {
            out.push_str(create(&app).await["profile_id"].as_str().unwrap());
        }
        out
    };
    let (x, y) = (draw().await, draw().await);
    assert_eq!(x, y);
    assert!(x.contains('A') && x.contains('B') && x.contains('C'), "{x}");
}

#[tokio::test]
async fn events_stream_records_then_turn() {
    let app = app(ProfileMode::Fixed(ProfileId::B));
    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    let req = Request::builder().uri(format!("/sessions/{id}/events")).body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    let mut body = resp.into_body();

    let (_, t) = json_call(
        &app,
        "POST",
        &format!("/sessions/{id}/turns"),
        Some(json!({"answer_text": "x", "affects": affects(0.7, 0.0)})),
    )
    .await;

    let mut seen = String::new();
    while !seen.contains("event: turn") {
        let frame = tokio::time::timeout(std::time::Duration::from_secs(10), body.frame())
            .await
            .expect("event in time")
            .expect("stream open")
            .unwrap();
        if let Ok(data) = frame.into_data() {
            seen.push_str(std::str::from_utf8(&data).unwrap());
        }
    }
    assert!(seen.contains("event: record\ndata: 0|"), "{seen}");
    assert!(seen.contains("|select|select_question|"), "{seen}");
    let turn_data = seen
        .split("event: turn\ndata: ")
        .nth(1)
        .unwrap()
        .lines()
        .next()
        .unwrap();
    let v: Value = serde_json::from_str(turn_data).unwrap();
    assert_eq!(v, t);
}

#[test]
fn parse_turn_rejects_non_objects() {
    assert!(parse_turn(b"[]", "s1").is_err());
    assert!(parse_turn(b"not json", "s1").is_err());
    let wrong = json!({"session_id": "s2", "answer_text": "", "affects": affects(0.0, 0.0)}).to_string();
    assert_eq!(parse_turn(wrong.as_bytes(), "s1").unwrap_err()[0].field, "session_id");
    let ok = json!({"session_id": "s1", "answer_text": "hi", "affects": affects(0.25, 0.5)}).to_string();
    let (text, a) = parse_turn(ok.as_bytes(), "s1").unwrap();
    assert_eq!(text, "hi");
    assert_eq!(a.get(tom_core::interview::Channel::Hesitating), 0.5);
}

async fn turn(app: &Router, id: &str, a: Value) -> Value {
    let (s, v) = json_call(app, "POST", &format!("/sessions/{id}/turns"), Some(json!({"answer_text": "", "affects": a}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    v
}

fn in_range(v: &Value) {
    let val = v["recruiter_valence"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&val));
    for d in ["self_confidence", "motivation", "qualification"] {
        let x = v["assessment"][d].as_f64().unwrap();
        assert!((-1.0..=1.0).contains(&x), "{d}={x}");
    }
    for e in v["predicted_user_emotions"].as_array().unwrap() {
        for k in ["intensity", "certainty"] {
            let x = e[k].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&x), "{k}={x}");
        }
    }
}

#[tokio::test]
async fn profile_b_asks_neutral_questions() {
    let app = app(ProfileMode::Fixed(ProfileId::B));
    let id = create(&app).await["session_id"].as_str().unwrap().to_string();
    let mut v = turn(&app, &id, affects(0.0, 0.0)).await;
    while v["interview_done"] == false {
        in_range(&v);
        v = turn(&app, &id, affects(0.0, 0.0)).await;
    }
    let (_, tr) = json_call(&app, "GET", &format!("/sessions/{id}/transcript"), None).await;
    for e in tr["entries"].as_array().unwrap().iter().filter(|e| e["speaker"] == "recruiter") {
        assert_eq!(e["variant"], "neutral", "{e}");
    }
}

#[tokio::test]
async fn hesitation_on_the_job_description_lowers_qualification() {
    for profile in [ProfileId::A, ProfileId::B, ProfileId::C] {
        let app = app(ProfileMode::Fixed(profile));
        let c = create(&app).await;
        let id = c["session_id"].as_str().unwrap().to_string();
        let mut topic = c["topic"].clone();
        let mut last = 0.0;
        loop {
            let job = topic == "job_description";
            let v = turn(&app, &id, if job { affects(0.0, 0.8) } else { affects(0.0, 0.0) }).await;
            in_range(&v);
            let q = v["assessment"]["qualification"].as_f64().unwrap();
            if job {
                assert!((q - (last - 0.16)).abs() < 1e-9, "{profile:?}: {last} -> {q}");
                break;
            }
            last = q;
            assert_eq!(v["interview_done"], false, "job description never asked");
            topic = v["topic"].clone();
        }
    }
}
