//! HTTP front end for interview sessions. Every session owns its own
//! recruiter engine; handlers only translate between JSON and `Session`.

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;

use tom_core::appraisal::AppraisalTheory;
use tom_core::engine::{EngineOptions, FiringRecord};
use tom_core::exec::Exec;
use tom_core::interview::{AffectVector, FieldError, InterviewError};
use tom_core::scenario::{ProfileId, ScenarioDoc};
use tom_core::session::{Session, SessionError, TurnResponse};

/// How new sessions pick their candidate profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    Fixed(ProfileId),
    Random,
}

pub struct Config {
    pub doc: ScenarioDoc,
    pub profile: ProfileMode,
    pub seed: u64,
    pub theory: AppraisalTheory,
    pub opts: EngineOptions,
    pub exec: Exec,
}

#[derive(Debug, Clone)]
enum Update {
    Record(FiringRecord),
    Turn(TurnResponse),
}

struct Entry {
    session: Arc<tokio::sync::Mutex<Session>>,
    events: broadcast::Sender<Update>,
}

struct Inner {
    cfg: Config,
    rng: Mutex<StdRng>,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Entry>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(cfg: Config) -> Self {
        let rng = StdRng::seed_from_u64(cfg.seed);
        AppState(Arc::new(Inner {
            cfg,
            rng: Mutex::new(rng),
            next_id: AtomicU64::new(1),
            sessions: Mutex::new(HashMap::new()),
        }))
    }

    fn pick_profile(&self) -> ProfileId {
        match self.0.cfg.profile {
            ProfileMode::Fixed(p) => p,
            ProfileMode::Random => {
                let i = self.0.rng.lock().expect("rng lock").gen_range(0..3);
                [ProfileId::A, ProfileId::B, ProfileId::C][i]
            }
        }
    }

    fn get(&self, id: &str) -> Result<Arc<Entry>, ApiError> {
        self.0
            .sessions
            .lock()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(show_session))
        .route("/sessions/{id}/turns", post(post_turn))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/sessions/{id}/trace", get(trace))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(Vec<FieldError>),
    NotFound(String),
    Complete,
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::BadRequest(fields) => (
                StatusCode::BAD_REQUEST,
                json!({
                    "error": "invalid turn",
                    "fields": fields.iter().map(|f| json!({"field": f.field, "problem": f.problem})).collect::<Vec<_>>(),
                }),
            ),
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, json!({"error": format!("no session `{id}`")})),
            ApiError::Complete => (StatusCode::CONFLICT, json!({"error": "interview complete"})),
            ApiError::Internal(msg) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": msg})),
        };
        (status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::Interview(InterviewError::Complete) => ApiError::Complete,
            other => ApiError::Internal(other.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Created {
    session_id: String,
    profile_id: &'static str,
    utterance: Option<String>,
    topic: Option<String>,
}

async fn create_session(State(st): State<AppState>) -> Result<(StatusCode, Json<Created>), ApiError> {
    let profile = st.pick_profile();
    let inner = st.0.clone();
    let session = tokio::task::spawn_blocking(move || {
        let c = &inner.cfg;
        Session::new(&c.doc, profile, c.theory.clone(), c.opts, c.exec)
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))??;
    let id = format!("s{}", st.0.next_id.fetch_add(1, Ordering::Relaxed));
    let body = Created {
        session_id: id.clone(),
        profile_id: profile.name(),
        utterance: session.utterance().map(str::to_string),
        topic: session.current().map(|(t, _)| t.to_string()),
    };
    let (tx, _) = broadcast::channel(1024);
    let entry = Entry {
        session: Arc::new(tokio::sync::Mutex::new(session)),
        events: tx,
    };
    st.0.sessions.lock().expect("session map lock").insert(id, Arc::new(entry));
    Ok((StatusCode::CREATED, Json(body)))
}

async fn show_session(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let e = st.get(&id)?;
    let s = e.session.lock().await;
    let mut v = serde_json::to_value(s.snapshot()).map_err(|e| ApiError::Internal(e.to_string()))?;
    v["session_id"] = json!(id);
    v["profile_id"] = json!(s.profile().name());
    Ok(Json(v))
}

/// Validates a turn body by hand so that every bad field is reported. A
/// `session_id` in the body is optional but must match the path.
pub fn parse_turn(body: &[u8], session_id: &str) -> Result<(String, AffectVector), Vec<FieldError>> {
    let fe = |field: &str, problem: &str| FieldError {
        field: field.into(),
        problem: problem.into(),
    };
    let v: Value = serde_json::from_slice(body).map_err(|e| vec![fe("body", &format!("not JSON: {e}"))])?;
    let Some(obj) = v.as_object() else {
        return Err(vec![fe("body", "expected an object")]);
    };
    let mut errs = Vec::new();
    match obj.get("session_id") {
        None => {}
        Some(Value::String(s)) if s == session_id => {}
        Some(_) => errs.push(fe("session_id", "does not match the session in the path")),
    }
    let text = match obj.get("answer_text") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            errs.push(fe("answer_text", "expected a string"));
            String::new()
        }
        None => {
            errs.push(fe("answer_text", "missing"));
            String::new()
        }
    };
    let affects = match obj.get("affects") {
        Some(Value::Object(m)) => match AffectVector::from_fields(m.iter().map(|(k, v)| (k.as_str(), v.as_f64()))) {
            Ok(a) => Some(a),
            Err(mut fs) => {
                for f in &mut fs {
                    f.field = format!("affects.{}", f.field);
                }
                errs.extend(fs);
                None
            }
        },
        Some(_) => {
            errs.push(fe("affects", "expected an object"));
            None
        }
        None => {
            errs.push(fe("affects", "missing"));
            None
        }
    };
    match affects {
        Some(a) if errs.is_empty() => Ok((text, a)),
        _ => Err(errs),
    }
}

async fn post_turn(
    State(st): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<TurnResponse>, ApiError> {
    let e = st.get(&id)?;
    let (text, affects) = parse_turn(&body, &id).map_err(ApiError::BadRequest)?;
    let mut guard = e.session.clone().lock_owned().await;
    if guard.is_done() {
        return Err(ApiError::Complete);
    }
    let (guard, result) = tokio::task::spawn_blocking(move || {
        let before = guard.records().len();
        let r = guard.turn(&text, &affects);
        let fresh = guard.records()[before..].to_vec();
        (guard, r.map(|resp| (resp, fresh)))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?;
    drop(guard);
    let (resp, fresh) = result?;
    // nobody listening is fine
    for r in fresh {
        let _ = e.events.send(Update::Record(r));
    }
    let _ = e.events.send(Update::Turn(resp.clone()));
    Ok(Json(resp))
}

async fn transcript(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let e = st.get(&id)?;
    let s = e.session.lock().await;
    Ok(Json(json!({
        "session_id": id,
        "profile_id": s.profile().name(),
        "entries": s.transcript(),
    })))
}

async fn trace(State(st): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let e = st.get(&id)?;
    let text = e.session.lock().await.trace().render();
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

fn to_event(u: &Update) -> Event {
    match u {
        Update::Record(r) => Event::default().event("record").data(r.line()),
        Update::Turn(t) => Event::default()
            .event("turn")
            .data(serde_json::to_string(t).expect("turn serializes")),
    }
}

/// Live feed of a session: a `record` event per trace line, then a `turn`
/// event with the payload. The stream ends after the final turn.
async fn events(
    State(st): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let e = st.get(&id)?;
    let rx = e.events.subscribe();
    let done = e.session.lock().await.is_done();
    let s = stream::unfold((rx, done), |(mut rx, done)| async move {
        if done {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(u) => {
                    let last = matches!(&u, Update::Turn(t) if t.interview_done);
                    return Some((Ok(to_event(&u)), (rx, last)));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Ok(Sse::new(s).keep_alive(KeepAlive::default()))
}
