//! JSON game service. Sessions live in memory and are dropped after an idle
//! period.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evasilab::formats::wire_edge;
use evasilab::game::{parse_answer_request, parse_ask_request, parse_create_request, GameSession, GameView, Hint};
use evasilab::{solve, Error, PositionTable, Property, SolveReport};
use serde::Serialize;

struct Slot {
    session: GameSession,
    last_used: Instant,
}

pub struct AppState {
    sessions: Mutex<HashMap<String, Slot>>,
    reports: Mutex<HashMap<Property, Arc<SolveReport>>>,
    next_id: AtomicU64,
    idle: Duration,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(idle: Duration) -> SharedState {
        Arc::new(AppState {
            sessions: Mutex::new(HashMap::new()),
            reports: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
            idle,
        })
    }

    /// Drops sessions idle for longer than the configured limit.
    pub fn expire(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        let before = sessions.len();
        sessions.retain(|_, slot| now.saturating_duration_since(slot.last_used) <= self.idle);
        before - sessions.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }

    fn report(&self, property: &Property) -> Result<(&'static PositionTable, Arc<SolveReport>), ApiError> {
        let table = PositionTable::shared(property.n())?;
        if let Some(r) = self.reports.lock().expect("report cache poisoned").get(property) {
            return Ok((table, r.clone()));
        }
        let report = Arc::new(solve(property, table)?);
        self.reports
            .lock()
            .expect("report cache poisoned")
            .insert(*property, report.clone());
        Ok((table, report))
    }

    /// Runs `f` on a live session, refreshing its idle clock.
    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut GameSession) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        let now = Instant::now();
        let slot = match sessions.get_mut(id) {
            Some(slot) if now.saturating_duration_since(slot.last_used) <= self.idle => slot,
            Some(_) => {
                sessions.remove(id);
                return Err(ApiError::not_found(id));
            }
            None => return Err(ApiError::not_found(id)),
        };
        slot.last_used = now;
        f(&mut slot.session)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn not_found(id: &str) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: format!("no game with id `{id}`"),
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = match err {
            Error::Game(_) | Error::EdgeAlreadyAsked { .. } | Error::AlreadyDecided => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError {
            status,
            message: err.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

#[derive(Serialize)]
struct AskResponse {
    answer: evasilab::Answer,
    state: GameView,
}

#[derive(Serialize)]
struct AnswerResponse {
    next_question: Option<[usize; 2]>,
    state: GameView,
}

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/game", post(create_game))
        .route("/api/game/:id", get(get_game))
        .route("/api/game/:id/ask", post(ask))
        .route("/api/game/:id/answer", post(answer))
        .route("/api/game/:id/hint", get(hint))
        .with_state(state)
}

async fn create_game(State(state): State<SharedState>, body: Bytes) -> Result<(StatusCode, Json<GameView>), ApiError> {
    let (property, role) = parse_create_request(&body)?;
    let worker = state.clone();
    let (table, report) = tokio::task::spawn_blocking(move || worker.report(&property))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: e.to_string(),
        })??;
    let id = format!("{:08x}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let session = GameSession::with_report(id.clone(), table, report, role)?;
    let view = session.view();
    state.sessions.lock().expect("session map poisoned").insert(
        id,
        Slot {
            session,
            last_used: Instant::now(),
        },
    );
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_game(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<GameView>, ApiError> {
    state.with_session(&id, |s| Ok(Json(s.view())))
}

async fn ask(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<AskResponse>, ApiError> {
    state.with_session(&id, |s| {
        let edge = parse_ask_request(&body, s.n())?;
        let answer = s.ask(edge)?;
        Ok(Json(AskResponse {
            answer,
            state: s.view(),
        }))
    })
}

async fn answer(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<AnswerResponse>, ApiError> {
    state.with_session(&id, |s| {
        let answer = parse_answer_request(&body)?;
        let next = s.answer(answer)?;
        let n = s.n();
        Ok(Json(AnswerResponse {
            next_question: next.map(|e| wire_edge(e, n)),
            state: s.view(),
        }))
    })
}

async fn hint(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<Hint>, ApiError> {
    state.with_session(&id, |s| Ok(Json(s.hint()?)))
}

pub async fn serve(addr: SocketAddr, idle: Duration) -> anyhow::Result<()> {
    let state = AppState::new(idle);
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.expire(Instant::now());
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}
