use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};
use washsim::server::{serve, SessionRecord};
use washsim_core::fsm::{DurationTable, LoadSize, WashState};
use washsim_core::harness::state_transitions;
use washsim_core::wire::{decode_runs, ServerMessage};
use washsim_core::{parse_stimulus, run, RunConfig};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn config(speed: f64) -> RunConfig {
    let mut cfg = RunConfig::compressed(1);
    let mut table = DurationTable::uniform(50_000, 20).unwrap();
    for load in LoadSize::ALL {
        table.set(WashState::Spin, load, 3_000).unwrap();
    }
    cfg.machine.durations = table;
    cfg.speed = speed;
    cfg
}

fn start_server(cfg: RunConfig, sessions: usize) -> (u16, mpsc::Receiver<SessionRecord>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        serve(listener, &cfg, Some(sessions), |rec| tx.send(rec).unwrap()).unwrap();
    });
    (port, rx)
}

fn connect(port: u16) -> Client {
    let (ws, _) = tungstenite::connect(format!("ws://127.0.0.1:{port}")).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
    }
    ws
}

fn send(ws: &mut Client, line: &str) {
    ws.send(Message::text(line)).unwrap();
}

/// Reads messages until `pred` matches one, collecting everything seen.
fn await_msg(ws: &mut Client, seen: &mut Vec<ServerMessage>, pred: impl Fn(&ServerMessage) -> bool) -> ServerMessage {
    let deadline = Instant::now() + Duration::from_secs(30);
    while Instant::now() < deadline {
        match ws.read() {
            Ok(Message::Text(t)) => {
                for line in t.lines() {
                    let msg: ServerMessage = serde_json::from_str(line)
                        .unwrap_or_else(|e| panic!("bad server line {line:?}: {e}"));
                    seen.push(msg.clone());
                    if pred(&msg) {
                        return msg;
                    }
                }
            }
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
            Err(e) => panic!("socket error: {e}"),
        }
    }
    panic!("timed out; last messages: {:?}", seen.iter().rev().take(3).collect::<Vec<_>>());
}

fn is_state(state: &'static str) -> impl Fn(&ServerMessage) -> bool {
    move |m| matches!(m, ServerMessage::Status { state: s, .. } if s == state)
}

#[test]
fn scripted_client_session_matches_stimulus_replay() {
    let cfg = config(0.1);
    let (port, records) = start_server(cfg.clone(), 1);
    let mut ws = connect(port);
    let mut seen = Vec::new();

    let first = await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Status { .. }));
    assert!(matches!(first, ServerMessage::Status { ref state, ref load, .. } if state == "IDLE" && load == "MEDIUM"));

    send(&mut ws, r#"{"t":"launch"}"#);
    await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Error { .. }));

    send(&mut ws, r#"{"t":"rotary","dir":"cw"}"#);
    await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Status { load, .. } if load == "LARGE"));

    send(&mut ws, "{\"t\":\"input\",\"name\":\"BTN_START\",\"value\":true}\n");
    send(&mut ws, r#"{"t":"input","name":"BTN_START","value":false}"#);
    await_msg(&mut ws, &mut seen, is_state("FILL"));
    await_msg(&mut ws, &mut seen, is_state("SPIN"));

    send(&mut ws, r#"{"t":"input","name":"SW_DOOR","value":true}"#);
    let hold = await_msg(&mut ws, &mut seen, is_state("HOLD"));
    assert!(matches!(hold, ServerMessage::Status { door_open: true, .. }));
    send(&mut ws, r#"{"t":"input","name":"SW_DOOR","value":false}"#);
    await_msg(&mut ws, &mut seen, is_state("SPIN"));
    await_msg(&mut ws, &mut seen, is_state("DONE"));
    await_msg(&mut ws, &mut seen, is_state("IDLE"));
    ws.close(None).unwrap();
    while ws.read().is_ok() {}

    let rec = records.recv_timeout(Duration::from_secs(10)).unwrap();
    let end = rec.session.machine().now().master_cycle;
    let stim = parse_stimulus(&rec.session.input_script(), cfg.rot_gap).unwrap();
    let replay = run(&cfg, &stim, end).unwrap();
    assert_eq!(replay.trace, rec.session.trace());

    // the client saw exactly the recorded status changes
    let statuses: Vec<(String, u64)> = seen
        .iter()
        .filter_map(|m| match m {
            ServerMessage::Status { state, cycle, .. } => Some((state.clone(), *cycle)),
            _ => None,
        })
        .collect();
    let recorded: Vec<(String, u64)> = replay.trace.iter().map(|s| (s.state.name().to_owned(), s.cycle)).collect();
    assert_eq!(statuses, recorded[..statuses.len()]);
    let states: Vec<WashState> = state_transitions(&replay.trace).iter().map(|t| t.1).collect();
    use WashState::*;
    assert_eq!(
        states,
        [Idle, Fill, Wash, Drain, RinseFill, RinseAgitate, RinseDrain, Spin, Hold, Spin, Done, Idle]
    );

    // frame messages decode to the frames the replay captured
    let frames: Vec<&ServerMessage> = seen.iter().filter(|m| matches!(m, ServerMessage::Frame { .. })).collect();
    assert!(!frames.is_empty());
    for f in frames {
        let ServerMessage::Frame { seq, runs } = f else { unreachable!() };
        assert_eq!(seq % cfg.frame_decimation, 0);
        let decoded = decode_runs(runs, 640, 480).unwrap();
        assert_eq!(decoded.pixels, replay.frames[*seq as usize].pixels);
    }
}

#[test]
fn idle_frame_and_reconnect() {
    let (port, records) = start_server(config(1e6), 2);
    let mut ws = connect(port);
    let mut seen = Vec::new();
    let frame = await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Frame { .. }));
    let ServerMessage::Frame { runs, .. } = frame else { unreachable!() };
    assert_eq!(runs.iter().map(|r| r.0 as u64).sum::<u64>(), 307_200);
    assert_eq!(runs[0].1, 0);
    assert!(runs[0].0 >= 320 * 640);
    // drop the connection without a close handshake
    drop(ws);
    records.recv_timeout(Duration::from_secs(10)).unwrap();

    let mut ws = connect(port);
    let mut seen = Vec::new();
    let first = await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Status { .. }));
    assert!(matches!(first, ServerMessage::Status { ref state, cycle: 0, .. } if state == "IDLE"));
    send(&mut ws, r#"{"t":"rotary","dir":"ccw"}"#);
    await_msg(&mut ws, &mut seen, |m| matches!(m, ServerMessage::Status { load, .. } if load == "SMALL"));
    ws.close(None).unwrap();
    while ws.read().is_ok() {}
    let rec = records.recv_timeout(Duration::from_secs(10)).unwrap();
    assert_eq!(rec.session.status().load, LoadSize::Small);
}
