//! WebSocket transport for live front-panel sessions.
//!
//! One client at a time. The simulation runs on its own thread and talks
//! to the socket thread only through channels: client lines in, server
//! messages out. Each server message goes out as one text frame holding a
//! single JSON line; a client frame may carry several newline-separated
//! lines.

use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, TryRecvError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use log::{info, warn};
use tungstenite::{Message, WebSocket};
use washsim_core::clocking::MASTER_HZ;
use washsim_core::wire::ServerMessage;
use washsim_core::{RunConfig, Session};

/// Longest stretch simulated without looking at the input queue.
const MAX_BATCH_CYCLES: u64 = 50_000;
const READ_POLL: Duration = Duration::from_millis(2);

/// What a finished session leaves behind.
#[derive(Debug)]
pub struct SessionRecord {
    pub session: Session,
    pub messages_sent: u64,
}

/// Accepts clients on `listener` one after another, handing each finished
/// session to `on_session`. Returns after `max_sessions` sessions when given.
pub fn serve(
    listener: TcpListener,
    config: &RunConfig,
    max_sessions: Option<usize>,
    mut on_session: impl FnMut(SessionRecord),
) -> Result<()> {
    let mut finished = 0;
    for stream in listener.incoming() {
        let stream = stream.context("accepting connection")?;
        let peer = stream.peer_addr().ok();
        info!("client connected: {peer:?}");
        match run_session(stream, config) {
            Ok(rec) => {
                info!(
                    "client {peer:?} left after {} cycles, {} messages",
                    rec.session.machine().now().master_cycle,
                    rec.messages_sent
                );
                on_session(rec);
            }
            Err(e) => warn!("session with {peer:?} ended: {e:#}"),
        }
        finished += 1;
        if max_sessions.is_some_and(|n| finished >= n) {
            break;
        }
    }
    Ok(())
}

fn run_session(stream: TcpStream, config: &RunConfig) -> Result<SessionRecord> {
    let session = Session::new(config)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| anyhow::anyhow!("handshake failed: {e}"))?;
    ws.get_ref().set_read_timeout(Some(READ_POLL))?;

    let (in_tx, in_rx) = mpsc::channel::<String>();
    let (out_tx, out_rx) = mpsc::channel::<ServerMessage>();
    let stop = Arc::new(AtomicBool::new(false));
    let sim = {
        let stop = Arc::clone(&stop);
        let speed = config.speed;
        thread::Builder::new()
            .name("simulation".into())
            .spawn(move || simulate(session, speed, in_rx, out_tx, stop))?
    };

    let mut messages_sent = 0;
    let io_result = pump_socket(&mut ws, &in_tx, &out_rx, &mut messages_sent);
    stop.store(true, Ordering::SeqCst);
    drop(in_tx);
    let (session, sim_result) = sim.join().map_err(|_| anyhow::anyhow!("simulation thread panicked"))?;
    sim_result?;
    // A client vanishing mid-stream still leaves a usable session.
    if let Err(e) = io_result {
        warn!("socket closed abruptly: {e}");
    }
    Ok(SessionRecord { session, messages_sent })
}

/// Moves client lines into the input queue and queued server messages onto
/// the socket until the client goes away or the simulation stops.
fn pump_socket(
    ws: &mut WebSocket<TcpStream>,
    in_tx: &Sender<String>,
    out_rx: &Receiver<ServerMessage>,
    sent: &mut u64,
) -> Result<()> {
    loop {
        match ws.read() {
            Ok(Message::Text(text)) => {
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    if in_tx.send(line.to_owned()).is_err() {
                        return Ok(());
                    }
                }
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(e.into()),
        }
        loop {
            match out_rx.try_recv() {
                Ok(msg) => {
                    let mut line = msg.to_line();
                    line.push('\n');
                    ws.send(Message::text(line))?;
                    *sent += 1;
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    return Ok(());
                }
            }
        }
    }
}

/// Simulation thread: applies inputs at cycle boundaries and advances in
/// batches paced to `speed` simulated seconds per wall second.
fn simulate(
    mut session: Session,
    speed: f64,
    in_rx: Receiver<String>,
    out_tx: Sender<ServerMessage>,
    stop: Arc<AtomicBool>,
) -> (Session, Result<()>) {
    let started = Instant::now();
    let origin = session.machine().now().master_cycle;
    if out_tx.send(ServerMessage::status(&session.status())).is_err() {
        return (session, Ok(()));
    }
    while !stop.load(Ordering::SeqCst) {
        loop {
            match in_rx.try_recv() {
                Ok(line) => {
                    if let Some(reply) = session.handle_line(&line) {
                        let _ = out_tx.send(reply);
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return (session, Ok(())),
            }
        }
        let target = origin + (started.elapsed().as_secs_f64() * speed * MASTER_HZ as f64) as u64;
        let now = session.machine().now().master_cycle;
        if target <= now {
            thread::sleep(Duration::from_millis(1));
            continue;
        }
        let batch = (target - now).min(MAX_BATCH_CYCLES);
        match session.advance(batch) {
            Ok(msgs) => {
                for m in msgs {
                    if out_tx.send(m).is_err() {
                        return (session, Ok(()));
                    }
                }
            }
            Err(e) => return (session, Err(e.into())),
        }
    }
    (session, Ok(()))
}
