//! WebSocket front end: one task per session runs the tick loop and owns the
//! [`Session`]; connections forward text messages to it.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use impulse2d::levelgen::Level;
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot};
use tokio::time::{interval, Instant, MissedTickBehavior};
use tower_http::services::ServeDir;

use crate::protocol::ServerMessage;
use crate::session::Session;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Env steps per second in play mode.
    pub tick_rate: u32,
    /// How long a session outlives its last connection.
    pub grace: Duration,
    /// Level every new session starts with.
    pub initial_level: Level,
    /// Directory served at `/` for the browser client.
    pub assets: Option<PathBuf>,
}

enum Inbound {
    Attach { conn: u64, out: mpsc::UnboundedSender<String>, accepted: oneshot::Sender<bool> },
    Text { conn: u64, text: String },
    Detach { conn: u64 },
}

#[derive(Clone)]
struct AppState {
    config: Arc<ServerConfig>,
    sessions: Arc<Mutex<HashMap<String, mpsc::UnboundedSender<Inbound>>>>,
    next_conn: Arc<Mutex<u64>>,
}

pub fn router(config: ServerConfig) -> Router {
    let assets = config.assets.clone();
    let state = AppState {
        config: Arc::new(config),
        sessions: Arc::default(),
        next_conn: Arc::default(),
    };
    let app = Router::new().route("/ws", get(upgrade)).with_state(state);
    match assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

#[derive(Deserialize)]
struct Connect {
    session: Option<String>,
}

async fn upgrade(ws: WebSocketUpgrade, Query(q): Query<Connect>, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| connection(socket, q.session, state))
}

fn spawn_session(state: &AppState) -> Result<mpsc::UnboundedSender<Inbound>, String> {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(id.clone(), state.config.initial_level.clone()).map_err(|e| e.to_string())?;
    let (tx, rx) = mpsc::unbounded_channel();
    state.sessions.lock().unwrap().insert(id.clone(), tx.clone());
    let sessions = state.sessions.clone();
    let config = state.config.clone();
    tokio::spawn(async move {
        run_session(session, rx, &config).await;
        sessions.lock().unwrap().remove(&id);
    });
    Ok(tx)
}

async fn reject(mut socket: WebSocket, code: &str, detail: String) {
    let _ = socket.send(Message::Text(ServerMessage::error(code, detail).encode().into())).await;
    let _ = socket.send(Message::Close(None)).await;
}

async fn connection(mut socket: WebSocket, requested: Option<String>, state: AppState) {
    let found = requested.as_ref().and_then(|id| state.sessions.lock().unwrap().get(id).cloned());
    let inbox = match (requested, found) {
        (_, Some(tx)) => tx,
        (Some(id), None) => return reject(socket, "unknown_session", format!("no session {id}")).await,
        (None, None) => match spawn_session(&state) {
            Ok(tx) => tx,
            Err(e) => return reject(socket, "invalid_level", e).await,
        },
    };

    let conn = {
        let mut n = state.next_conn.lock().unwrap();
        *n += 1;
        *n
    };
    let (out_tx, mut out_rx) = mpsc::unbounded_channel();
    let (accepted_tx, accepted_rx) = oneshot::channel();
    if inbox.send(Inbound::Attach { conn, out: out_tx, accepted: accepted_tx }).is_err() {
        return reject(socket, "unknown_session", "session ended".into()).await;
    }
    if !accepted_rx.await.unwrap_or(false) {
        return reject(socket, "session_busy", "another client controls this session".into()).await;
    }

    loop {
        tokio::select! {
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let _ = inbox.send(Inbound::Text { conn, text: text.to_string() });
                }
                Some(Ok(Message::Binary(_))) => {
                    let reply = ServerMessage::error("malformed", "binary messages are not supported");
                    if socket.send(Message::Text(reply.encode().into())).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            outgoing = out_rx.recv() => match outgoing {
                Some(text) => {
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        break;
                    }
                }
                None => break,
            },
        }
    }
    let _ = inbox.send(Inbound::Detach { conn });
}

async fn run_session(mut session: Session, mut inbox: mpsc::UnboundedReceiver<Inbound>, config: &ServerConfig) {
    let mut ticker = interval(Duration::from_secs_f64(1.0 / config.tick_rate.max(1) as f64));
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);
    let mut controller: Option<(u64, mpsc::UnboundedSender<String>)> = None;
    // Fires while no controller is attached.
    let mut expires = Some(Instant::now() + config.grace);

    let send = |controller: &Option<(u64, mpsc::UnboundedSender<String>)>, messages: Vec<ServerMessage>| {
        if let Some((_, out)) = controller {
            for m in messages {
                let _ = out.send(m.encode());
            }
        }
    };

    loop {
        let deadline = expires;
        tokio::select! {
            msg = inbox.recv() => match msg {
                Some(Inbound::Attach { conn, out, accepted }) => {
                    if controller.is_some() {
                        let _ = accepted.send(false);
                        continue;
                    }
                    let _ = accepted.send(true);
                    controller = Some((conn, out));
                    expires = None;
                    let hello = session.hello(config.tick_rate);
                    let frame = session.frame();
                    send(&controller, vec![hello, frame]);
                }
                Some(Inbound::Text { conn, text }) => {
                    if controller.as_ref().is_some_and(|(c, _)| *c == conn) {
                        let replies = session.handle_text(&text);
                        send(&controller, replies);
                    }
                }
                Some(Inbound::Detach { conn }) => {
                    if controller.as_ref().is_some_and(|(c, _)| *c == conn) {
                        controller = None;
                        expires = Some(Instant::now() + config.grace);
                    }
                }
                None => return,
            },
            _ = ticker.tick() => {
                if controller.is_some() {
                    let frames = session.step();
                    send(&controller, frames);
                }
            }
            _ = async { tokio::time::sleep_until(deadline.unwrap()).await }, if deadline.is_some() => {
                return;
            }
        }
    }
}
