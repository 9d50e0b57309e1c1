use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use riptide::query::{query, to_json, to_table};
use riptide::service::{router, spawn_scheduler, AppState, DEFAULT_PORT};
use riptide_core::expr::compile;
use riptide_core::osc::{OscSender, DEFAULT_TARGET};
use riptide_core::scheduler::{run, ClockConfig, Slot, SystemClock, Transport};
use riptide_core::time::{Fraction, Span};

#[derive(Parser)]
#[command(name = "riptide", version, about = "Query, play and serve cyclic patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(clap::Args)]
struct Clock {
    /// Cycles per second.
    #[arg(long, env = "RIPTIDE_CPS", default_value_t = 0.5)]
    cps: f64,
    /// Seconds between scheduling and sounding.
    #[arg(long, env = "RIPTIDE_LATENCY", default_value_t = 0.2)]
    latency: f64,
    /// Seconds between scheduler ticks.
    #[arg(long, env = "RIPTIDE_TICK", default_value_t = 0.05)]
    tick: f64,
    /// SuperDirt address.
    #[arg(long, env = "RIPTIDE_OSC", default_value = DEFAULT_TARGET)]
    osc: String,
}

impl Clock {
    fn config(&self) -> ClockConfig {
        ClockConfig {
            cps: self.cps,
            origin: 0.0,
            tick_interval: self.tick,
            latency: self.latency,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the events of an expression over a span.
    Query {
        #[arg(long, env = "RIPTIDE_EXPR")]
        expr: String,
        #[arg(long, env = "RIPTIDE_BEGIN", default_value = "0")]
        begin: Fraction,
        #[arg(long, env = "RIPTIDE_END", default_value = "1")]
        end: Fraction,
        #[arg(long, env = "RIPTIDE_FORMAT", value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Play an expression to SuperDirt.
    Play {
        #[arg(long, env = "RIPTIDE_EXPR")]
        expr: String,
        /// Seconds to play for; 0 plays until interrupted.
        #[arg(long, env = "RIPTIDE_DURATION", default_value_t = 0.0)]
        duration: f64,
        #[command(flatten)]
        clock: Clock,
    },
    /// Run the scheduler behind the HTTP and WebSocket API.
    Serve {
        #[arg(long, env = "RIPTIDE_PORT", default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, env = "RIPTIDE_HOST", default_value = "127.0.0.1")]
        host: String,
        /// Directory of static files served at the root, such as the browser REPL.
        #[arg(long, env = "RIPTIDE_STATIC_DIR")]
        static_dir: Option<PathBuf>,
        #[command(flatten)]
        clock: Clock,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Query { expr, begin, end, format } => {
            if end < begin {
                eprintln!("error: --end {end} is before --begin {begin}");
                return ExitCode::from(2);
            }
            match query(&expr, &Span::new(begin, end)) {
                Ok(events) => {
                    match format {
                        Format::Json => println!("{}", to_json(&events)),
                        Format::Table => print!("{}", to_table(&events)),
                    }
                    ExitCode::SUCCESS
                }
                Err(d) => {
                    eprintln!("{d}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Play { expr, duration, clock } => play(&expr, duration, &clock),
        Command::Serve { port, host, static_dir, clock } => serve(&host, port, static_dir, &clock),
    }
}

fn play(expr: &str, duration: f64, clock: &Clock) -> ExitCode {
    let pattern = match compile(expr) {
        Ok(p) => p,
        Err(d) => {
            eprintln!("{d}");
            return ExitCode::from(2);
        }
    };
    let cfg = clock.config();
    if !(duration.is_finite() && duration >= 0.0) {
        eprintln!("error: duration must be zero or more, got {duration}");
        return ExitCode::FAILURE;
    }
    let mut sender = match OscSender::new(&clock.osc) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot open OSC target {}: {e}", clock.osc);
            return ExitCode::FAILURE;
        }
    };
    let max_ticks = (duration > 0.0).then(|| (duration / cfg.tick_interval).ceil() as u64);
    log::info!("playing to {} at {} cps", sender.target(), cfg.cps);
    match run(&Slot::new(pattern), &mut sender, &cfg, &SystemClock, &Transport::new(), max_ticks) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn serve(host: &str, port: u16, static_dir: Option<PathBuf>, clock: &Clock) -> ExitCode {
    let cfg = clock.config();
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let osc = match OscSender::new(&clock.osc) {
        Ok(s) => Some(s),
        Err(e) => {
            log::warn!("no OSC output ({}: {e}); events still stream over /events", clock.osc);
            None
        }
    };
    let state = AppState::new(cfg.cps);
    let scheduler = spawn_scheduler(&state, cfg, osc);
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    let result = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        log::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, router(state.clone(), static_dir))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });
    state.transport.stop();
    let _ = scheduler.join();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
