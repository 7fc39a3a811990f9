//! Live telemetry and teleop service.
//!
//! One thread owns the [`Simulation`] and steps it in real time. Clients
//! push commands through a queue the sim thread drains once per tick, and
//! read immutable snapshots published on a watch channel.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use agrobench::config::{Mode, WorldConfig};
use agrobench::kinematics::Twist;
use agrobench::pipeline::FrameResult;
use agrobench::sim::{Simulation, TickRecord};
use agrobench::telemetry::{error_reply, parse_client_message, ClientMessage, StateFrame};
use anyhow::Context;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::{oneshot, watch};
use tokio::task::JoinHandle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimCommand {
    Twist(Twist),
    Mode(Mode),
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub record: TickRecord,
    pub seg: Option<Arc<FrameResult>>,
}

#[derive(Clone)]
struct AppState {
    config_json: Arc<String>,
    commands: mpsc::Sender<SimCommand>,
    snapshots: watch::Receiver<Option<Arc<Snapshot>>>,
    frame_period: Duration,
    include_mask: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ServeOptions {
    /// Simulated seconds per wall-clock second.
    pub speed: f64,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self { speed: 1.0 }
    }
}

pub struct RunningServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    shutdown: Option<oneshot::Sender<()>>,
    http: JoinHandle<std::io::Result<()>>,
    sim: Option<thread::JoinHandle<anyhow::Result<()>>>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub async fn shutdown(mut self) -> anyhow::Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        (&mut self.http).await??;
        if let Some(sim) = self.sim.take() {
            sim.join().map_err(|_| anyhow::anyhow!("sim thread panicked"))??;
        }
        Ok(())
    }

    /// Serves until the HTTP task ends or the sim thread fails.
    pub async fn wait(mut self) -> anyhow::Result<()> {
        (&mut self.http).await??;
        Ok(())
    }
}

/// Binds `addr` (port 0 picks a free port) and starts the sim thread and
/// the HTTP/WebSocket service.
pub async fn start(cfg: WorldConfig, addr: SocketAddr, opts: ServeOptions) -> anyhow::Result<RunningServer> {
    anyhow::ensure!(opts.speed > 0.0 && opts.speed.is_finite(), "speed must be > 0");
    let sim = Simulation::new(&cfg)?;
    let listener = TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    let addr = listener.local_addr()?;

    let (cmd_tx, cmd_rx) = mpsc::channel();
    let (snap_tx, snap_rx) = watch::channel(None);
    let stop = Arc::new(AtomicBool::new(false));
    let sim_stop = stop.clone();
    let sim_thread = thread::Builder::new()
        .name("sim".into())
        .spawn(move || run_sim(sim, cmd_rx, snap_tx, sim_stop, opts.speed))?;

    let state = AppState {
        config_json: Arc::new(cfg.to_json()),
        commands: cmd_tx,
        snapshots: snap_rx,
        frame_period: Duration::from_secs_f64(1.0 / cfg.telemetry.rate_hz),
        include_mask: cfg.telemetry.include_mask_png,
    };
    let app = router(state);
    let (shutdown_tx, shutdown_rx) = oneshot::channel::<()>();
    let http = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = shutdown_rx.await;
            })
            .await
    });
    Ok(RunningServer {
        addr,
        stop,
        shutdown: Some(shutdown_tx),
        http,
        sim: Some(sim_thread),
    })
}

fn router(state: AppState) -> Router {
    Router::new()
        .route("/config", get(get_config))
        .route("/state", get(get_state))
        .route("/ws", get(ws_upgrade))
        .with_state(state)
}

fn run_sim(
    mut sim: Simulation,
    commands: mpsc::Receiver<SimCommand>,
    snapshots: watch::Sender<Option<Arc<Snapshot>>>,
    stop: Arc<AtomicBool>,
    speed: f64,
) -> anyhow::Result<()> {
    let period = Duration::from_secs_f64(sim.config().sim.dt / speed);
    let mut next = Instant::now();
    let mut seg: Option<Arc<FrameResult>> = None;
    while !stop.load(Ordering::SeqCst) {
        while let Ok(cmd) = commands.try_recv() {
            match cmd {
                SimCommand::Twist(t) => sim.set_teleop(t),
                SimCommand::Mode(m) => sim.set_mode(m),
            }
        }
        let record = sim.step()?;
        if record.seg.is_some() {
            seg = sim.last_frame().cloned().map(Arc::new);
        }
        snapshots.send_replace(Some(Arc::new(Snapshot {
            record,
            seg: seg.clone(),
        })));

        next += period;
        let now = Instant::now();
        if next > now {
            thread::sleep(next - now);
        } else if now - next > Duration::from_secs(1) {
            next = now;
        }
    }
    Ok(())
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn get_config(State(s): State<AppState>) -> Response {
    json_response((*s.config_json).clone())
}

async fn get_state(State(s): State<AppState>) -> Response {
    let snap = s.snapshots.borrow().clone();
    match snap {
        Some(snap) => json_response(serde_json::to_string(&snap.record).expect("record serializes")),
        None => (StatusCode::SERVICE_UNAVAILABLE, "simulation has not ticked yet").into_response(),
    }
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(s): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client_session(socket, s))
}

async fn client_session(mut socket: WebSocket, s: AppState) {
    let mut ticker = tokio::time::interval(s.frame_period);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut last_tick: Option<u64> = None;
    loop {
        tokio::select! {
            _ = ticker.tick() => {
                let snap = s.snapshots.borrow().clone();
                let Some(snap) = snap else { continue };
                if last_tick.is_some_and(|t| t >= snap.record.tick) {
                    continue;
                }
                last_tick = Some(snap.record.tick);
                let frame = StateFrame::new(&snap.record, snap.seg.as_deref(), s.include_mask);
                if socket.send(Message::Text(frame.to_json().into())).await.is_err() {
                    break;
                }
            }
            msg = socket.recv() => {
                let text = match msg {
                    Some(Ok(Message::Text(t))) => t,
                    Some(Ok(Message::Binary(_))) => {
                        if socket.send(Message::Text(error_reply("binary messages are not supported").into())).await.is_err() {
                            break;
                        }
                        continue;
                    }
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                let cmd = match parse_client_message(text.as_str()) {
                    Ok(ClientMessage::Twist { vx, omega }) => SimCommand::Twist(Twist::new(vx, omega)),
                    Ok(ClientMessage::Mode { value }) => SimCommand::Mode(value),
                    Err(reason) => {
                        if socket.send(Message::Text(error_reply(reason).into())).await.is_err() {
                            break;
                        }
                        continue;
                    }
                };
                if s.commands.send(cmd).is_err() {
                    let _ = socket.send(Message::Text(error_reply("simulation stopped").into())).await;
                    break;
                }
            }
        }
    }
}
