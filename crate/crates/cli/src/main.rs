use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tom_cli::commands::{self, InterviewArgs, OracleArgs, RunArgs, RUNTIME};
use tom_cli::service::{self, AppState, Config, ProfileMode};
use tom_core::appraisal::IntensityMode;
use tom_core::engine::EngineOptions;
use tom_core::exec::Exec;
use tom_core::scenario::ProfileId;
use tom_core::session::INTERVIEW_SCENARIO;
use tom_core::syntax::parse_scenario;

#[derive(Parser)]
#[command(name = "tom", version, about = "Graded BDI theory-of-mind reasoner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Normalized,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    Random,
}

#[derive(clap::Args)]
struct EngineFlags {
    /// Emotion intensity formula.
    #[arg(long, value_enum, default_value = "normalized")]
    intensity: Mode,
    /// Maximum number of firings per tick.
    #[arg(long, default_value_t = tom_core::folk::DEFAULT_CAP)]
    cap: usize,
    /// Run every data-parallel step on one thread.
    #[arg(long)]
    sequential: bool,
}

impl EngineFlags {
    fn opts(&self) -> EngineOptions {
        EngineOptions {
            mode: match self.intensity {
                Mode::Normalized => IntensityMode::Normalized,
                Mode::Literal => IntensityMode::Literal,
            },
            cap: self.cap,
        }
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario over an event script and write the trace.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        script: Option<PathBuf>,
        /// Trace output file; standard output when absent.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Appraisal theory file replacing the built-in one.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Parse and validate a scenario.
    Check { scenario: PathBuf },
    /// Exhaustively check the belief laws on small finite models.
    Oracle {
        #[arg(long, default_value_t = 3)]
        worlds: usize,
        #[arg(long, default_value_t = 2)]
        atoms: usize,
        #[arg(long, default_value_t = 1)]
        agents: usize,
        /// Random models for the evaluator cross-check; 0 skips it.
        #[arg(long, default_value_t = 200)]
        recount: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Play a whole interview from an affect stream, without the service.
    Interview {
        /// Interview scenario; the shipped one when absent.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, ignore_case = true, default_value = "B")]
        profile: Profile,
        /// One line per answer of `CODE=value` pairs.
        #[arg(long)]
        affects: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        engine: EngineFlags,
    },
    /// Serve interview sessions over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, value_enum, ignore_case = true, default_value = "random")]
        profile: Profile,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineFlags,
    },
}

fn fixed(p: Profile, seed: u64) -> ProfileId {
    match p {
        Profile::A => ProfileId::A,
        Profile::B => ProfileId::B,
        Profile::C => ProfileId::C,
        Profile::Random => [ProfileId::A, ProfileId::B, ProfileId::C][(seed % 3) as usize],
    }
}

fn serve(host: &str, port: u16, cfg: Config) -> anyhow::Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, service::router(AppState::new(cfg))).await?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.cmd {
        Cmd::Run {
            scenario,
            script,
            trace,
            theory,
            engine,
        } => commands::run(
            &RunArgs {
                scenario: &scenario,
                script: script.as_deref(),
                trace: trace.as_deref(),
                theory: theory.as_deref(),
                opts: engine.opts(),
            },
            &mut out,
            &mut err,
        ),
        Cmd::Check { scenario } => commands::check(&scenario, &mut out, &mut err),
        Cmd::Oracle {
            worlds,
            atoms,
            agents,
            recount,
            seed,
            sequential,
        } => commands::oracle(
            &OracleArgs {
                worlds,
                atoms,
                agents,
                recount,
                seed,
                exec: if sequential { Exec::Sequential } else { Exec::default() },
            },
            &mut out,
            &mut err,
        ),
        Cmd::Interview {
            scenario,
            profile,
            affects,
            trace,
            seed,
            engine,
        } => commands::interview(
            &InterviewArgs {
                scenario: scenario.as_deref(),
                profile: fixed(profile, seed),
                affects: affects.as_deref(),
                trace: trace.as_deref(),
                opts: engine.opts(),
                exec: engine.exec(),
            },
            &mut out,
            &mut err,
        ),
        Cmd::Serve {
            port,
            host,
            profile,
            seed,
            scenario,
            engine,
        } => {
            let doc = match scenario {
                Some(p) => match commands::load_scenario(&p, &mut err) {
                    Ok(d) => d,
                    Err(code) => return ExitCode::from(code as u8),
                },
                None => parse_scenario(INTERVIEW_SCENARIO).expect("shipped scenario parses"),
            };
            let profile = match profile {
                Profile::Random => ProfileMode::Random,
                p => ProfileMode::Fixed(fixed(p, seed)),
            };
            let cfg = Config {
                doc,
                profile,
                seed,
                theory: Default::default(),
                opts: engine.opts(),
                exec: engine.exec(),
            };
            match serve(&host, port, cfg) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    RUNTIME
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
