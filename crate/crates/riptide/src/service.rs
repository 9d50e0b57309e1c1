//! The HTTP/WebSocket API over a running scheduler.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;
use tower_http::services::ServeDir;

use riptide_core::expr::{compile, Diagnostic, DiagnosticKind};
use riptide_core::osc::OscSender;
use riptide_core::pattern::silence;
use riptide_core::scheduler::{run, ClockConfig, Sink, SinkError, Slot, SystemClock, TimedEvent, Transport};
use riptide_core::time::Span;

use crate::query::Events;

pub const DEFAULT_PORT: u16 = 8404;

pub fn preview_span() -> Span {
    Span::new(0, 2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub ok: bool,
    pub events: Events,
    pub error: Option<Diagnostic>,
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub cps: f64,
    pub playing: bool,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpsRequest {
    pub cps: f64,
}

#[derive(Clone)]
pub struct AppState {
    pub slot: Arc<Slot>,
    pub transport: Arc<Transport>,
    pub snapshot: Arc<RwLock<StateSnapshot>>,
    pub events: broadcast::Sender<TimedEvent>,
}

impl AppState {
    pub fn new(cps: f64) -> Self {
        AppState {
            slot: Arc::new(Slot::default()),
            transport: Arc::new(Transport::new()),
            snapshot: Arc::new(RwLock::new(StateSnapshot {
                cps,
                playing: false,
                code: String::new(),
            })),
            events: broadcast::channel(1024).0,
        }
    }

    pub fn snapshot(&self) -> StateSnapshot {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Compile `code` and, if it is valid, make it the running pattern.
    pub fn eval(&self, code: &str) -> EvalResponse {
        match compile(code) {
            Ok(pattern) => {
                let events = pattern.query(&preview_span());
                let mut snap = self.snapshot.write().unwrap_or_else(|e| e.into_inner());
                self.slot.swap(pattern);
                snap.code = code.to_string();
                snap.playing = true;
                EvalResponse {
                    ok: true,
                    events,
                    error: None,
                    swapped: true,
                }
            }
            Err(d) => EvalResponse {
                ok: false,
                events: Vec::new(),
                error: Some(d),
                swapped: false,
            },
        }
    }

    pub fn stop(&self) {
        let mut snap = self.snapshot.write().unwrap_or_else(|e| e.into_inner());
        self.slot.swap(silence());
        snap.playing = false;
    }

    pub fn set_cps(&self, cps: f64) -> Result<(), String> {
        let mut snap = self.snapshot.write().unwrap_or_else(|e| e.into_inner());
        self.transport.set_cps(cps).map_err(|e| e.to_string())?;
        snap.cps = cps;
        Ok(())
    }
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/eval", post(eval_handler))
        .route("/state", get(state_handler))
        .route("/cps", post(cps_handler))
        .route("/stop", post(stop_handler))
        .route("/events", get(events_handler))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// A positioned diagnostic for a request body that is not the expected JSON.
fn body_diagnostic(body: &[u8], e: &serde_json::Error) -> Diagnostic {
    let (line, column) = (e.line().max(1), e.column().max(1));
    let offset = String::from_utf8_lossy(body)
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum::<usize>()
        + column
        - 1;
    Diagnostic {
        kind: DiagnosticKind::Parse,
        message: format!("malformed request body: {e}"),
        line,
        column,
        offset: offset.min(body.len()),
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, (StatusCode, Json<Diagnostic>)> {
    serde_json::from_slice(body).map_err(|e| (StatusCode::BAD_REQUEST, Json(body_diagnostic(body, &e))))
}

async fn eval_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let req: EvalRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(rejection) => return rejection.into_response(),
    };
    let resp = state.eval(&req.code);
    if let Some(e) = &resp.error {
        log::info!("eval rejected: {e}");
    }
    Json(resp).into_response()
}

async fn state_handler(State(state): State<AppState>) -> Json<StateSnapshot> {
    Json(state.snapshot())
}

async fn cps_handler(State(state): State<AppState>, body: Bytes) -> Response {
    let req: CpsRequest = match parse_body(&body) {
        Ok(r) => r,
        Err(rejection) => return rejection.into_response(),
    };
    match state.set_cps(req.cps) {
        Ok(()) => Json(state.snapshot()).into_response(),
        Err(message) => (
            StatusCode::BAD_REQUEST,
            Json(Diagnostic {
                kind: DiagnosticKind::Eval,
                message,
                line: 1,
                column: 1,
                offset: 0,
            }),
        )
            .into_response(),
    }
}

async fn stop_handler(State(state): State<AppState>) -> Json<StateSnapshot> {
    state.stop();
    Json(state.snapshot())
}

async fn events_handler(State(state): State<AppState>, ws: WebSocketUpgrade) -> Response {
    let rx = state.events.subscribe();
    ws.on_upgrade(move |socket| forward_events(socket, rx))
}

async fn forward_events(mut socket: WebSocket, mut rx: broadcast::Receiver<TimedEvent>) {
    loop {
        match rx.recv().await {
            Ok(event) => {
                let text = serde_json::to_string(&event).expect("events always serialize");
                if socket.send(Message::Text(text.into())).await.is_err() {
                    return;
                }
            }
            Err(broadcast::error::RecvError::Lagged(n)) => log::warn!("websocket client skipped {n} events"),
            Err(broadcast::error::RecvError::Closed) => return,
        }
    }
}

/// Forwards scheduled events to SuperDirt, if reachable, and to WebSocket clients.
pub struct ServiceSink {
    pub osc: Option<OscSender>,
    pub events: broadcast::Sender<TimedEvent>,
}

impl Sink for ServiceSink {
    fn send(&mut self, event: &TimedEvent, cps: f64) -> Result<(), SinkError> {
        let _ = self.events.send(event.clone());
        match self.osc.as_mut() {
            Some(osc) => Sink::send(osc, event, cps),
            None => Ok(()),
        }
    }
}

/// Start the tick loop for `state` on its own thread.
pub fn spawn_scheduler(state: &AppState, cfg: ClockConfig, osc: Option<OscSender>) -> JoinHandle<()> {
    let slot = Arc::clone(&state.slot);
    let transport = Arc::clone(&state.transport);
    let mut sink = ServiceSink {
        osc,
        events: state.events.clone(),
    };
    std::thread::spawn(move || {
        if let Err(e) = run(&slot, &mut sink, &cfg, &SystemClock, &transport, None) {
            log::error!("scheduler stopped: {e}");
        }
    })
}
