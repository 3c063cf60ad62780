use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use washsim::server;
use washsim_core::{check_timing, encode_ppm, parse_stimulus, run_with, Machine, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "washsim", version, about = "Cycle-accurate washing-machine controller simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a stimulus script and write captured frames as PPM files.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        stimulus: Option<PathBuf>,
        /// Master cycles to simulate (overrides the config's `cycles`).
        #[arg(long)]
        cycles: Option<u64>,
        /// Directory for frame_<seq>.ppm (overrides the config's `frames_dir`).
        #[arg(long)]
        frames_dir: Option<PathBuf>,
        /// Write only every N-th frame.
        #[arg(long, default_value_t = 1)]
        every: u64,
    },
    /// Capture frames from an idle machine and check VGA timing.
    Conformance {
        #[arg(long, default_value_t = 3)]
        frames: u64,
    },
    /// Serve the live front-panel protocol over WebSocket.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append each finished session's input log, in stimulus format.
        #[arg(long)]
        input_log: Option<PathBuf>,
    },
}

const EXIT_INPUT: u8 = 1;
const EXIT_CONFORMANCE: u8 = 2;

fn load_config(path: Option<&Path>) -> Result<RunConfig, String> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            RunConfig::from_json_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn cmd_run(
    config: Option<PathBuf>,
    stimulus: Option<PathBuf>,
    cycles: Option<u64>,
    frames_dir: Option<PathBuf>,
    every: u64,
) -> ExitCode {
    let cfg = match load_config(config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INPUT, &e),
    };
    let events = match stimulus {
        None => Vec::new(),
        Some(p) => match fs::read_to_string(&p).map_err(|e| e.to_string()).and_then(|t| {
            parse_stimulus(&t, cfg.rot_gap).map_err(|e| e.to_string())
        }) {
            Ok(ev) => ev,
            Err(e) => return fail(EXIT_INPUT, &format!("{}: {e}", p.display())),
        },
    };
    let Some(until) = cycles.or(cfg.cycles) else {
        return fail(EXIT_INPUT, "no run length: pass --cycles or set `cycles` in the config");
    };
    let dir = frames_dir.or_else(|| cfg.frames_dir.clone());
    if let Some(d) = &dir {
        if let Err(e) = fs::create_dir_all(d) {
            return fail(EXIT_INPUT, &format!("{}: {e}", d.display()));
        }
    }
    let every = every.max(1);
    let mut written = 0u64;
    let result = run_with(&cfg, &events, until, |frame| {
        if let Some(d) = &dir {
            if frame.seq % every == 0 {
                let path = d.join(format!("frame_{}.ppm", frame.seq));
                fs::write(&path, encode_ppm(&frame))
                    .map_err(|e| RunError::Output(format!("{}: {e}", path.display())))?;
                written += 1;
            }
        }
        Ok(())
    });
    match result {
        Ok((machine, trace)) => {
            for s in &trace {
                println!("{s}");
            }
            eprintln!(
                "ran {} cycles, final state {} ({}), {} frames captured, {written} written",
                machine.now().master_cycle,
                machine.state(),
                machine.load(),
                machine.capture().frames_emitted()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_INPUT, &e.to_string()),
    }
}

fn cmd_conformance(frames: u64) -> ExitCode {
    let cfg = RunConfig::default();
    let mut m = Machine::new(&cfg.machine).expect("default config is valid");
    let mut trace = Vec::new();
    let mut captured = 0;
    while captured < frames.max(1) {
        match m.step() {
            Ok(out) => {
                trace.extend(out.sample);
                captured += out.frame.is_some() as u64;
            }
            Err(e) => return fail(EXIT_CONFORMANCE, &e.to_string()),
        }
    }
    match check_timing(&trace, &cfg.machine.timing) {
        Ok(report) => {
            println!("{report}");
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONFORMANCE)
            }
        }
        Err(e) => fail(EXIT_CONFORMANCE, &e.to_string()),
    }
}

fn cmd_serve(config: Option<PathBuf>, port: Option<u16>, host: String, input_log: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load_config(config.as_deref()) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_INPUT, &e),
    };
    if let Some(p) = port {
        cfg.port = p;
    }
    let result = (|| -> anyhow::Result<()> {
        let listener = TcpListener::bind((host.as_str(), cfg.port)).with_context(|| format!("binding {host}:{}", cfg.port))?;
        log::info!("listening on ws://{}", listener.local_addr()?);
        server::serve(listener, &cfg, None, |rec| {
            let Some(path) = &input_log else { return };
            let text = format!(
                "# session ending at cycle {}\n{}",
                rec.session.machine().now().master_cycle,
                rec.session.input_script()
            );
            let written = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .and_then(|mut f| std::io::Write::write_all(&mut f, text.as_bytes()));
            if let Err(e) = written {
                log::warn!("{}: {e}", path.display());
            }
        })
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_INPUT, &format!("{e:#}")),
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("washsim: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            stimulus,
            cycles,
            frames_dir,
            every,
        } => cmd_run(config, stimulus, cycles, frames_dir, every),
        Command::Conformance { frames } => cmd_conformance(frames),
        Command::Serve {
            config,
            port,
            host,
            input_log,
        } => cmd_serve(config, port, host, input_log),
    }
}
