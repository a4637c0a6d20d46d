//! The `pbisim` command-line tool: model files, subcommands and the HTTP
//! game-session API.

pub mod args;
pub mod check;
pub mod gen;
pub mod model;
pub mod play;
pub mod server;

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use pbisim_core::bisim_finite;
use pbisim_core::bpa::norms;
use pbisim_core::format::{write_plts, write_ppda};

pub use args::{Cli, Command};
use model::Model;

/// Process exit status.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Exit {
    /// Bisimilar, or the command succeeded.
    Success = 0,
    NotBisimilar = 1,
    Unknown = 2,
    InputError = 3,
    ResourceGuard = 4,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> ExitCode {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pbisim_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("output failed: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit(&self) -> Exit {
        match self {
            CliError::Core(e) if e.is_resource_guard() => Exit::ResourceGuard,
            _ => Exit::InputError,
        }
    }
}

/// Runs one command, writing results to `out` and reading interactive
/// input (for `play`) from `input`.
pub fn run(cli: &Cli, out: &mut dyn Write, input: &mut dyn BufRead) -> Result<Exit, CliError> {
    match &cli.command {
        Command::Validate { file } => {
            let model = Model::load(file)?;
            write!(out, "{}", model.summary())?;
            Ok(Exit::Success)
        }
        Command::Classes { file } => {
            let l = Model::load(file)?.into_plts()?;
            let p = bisim_finite(&l);
            for block in p.blocks() {
                let names: Vec<&str> = block.iter().map(|&s| l.state_name(s)).collect();
                writeln!(out, "{{{}}}", names.join(", "))?;
            }
            Ok(Exit::Success)
        }
        Command::Check {
            file,
            left,
            right,
            n,
            method,
            budget,
        } => {
            let model = Model::load(file)?;
            let report = check::check(&model, left, right, *method, *n, *budget)?;
            write!(out, "{report}")?;
            Ok(report.exit())
        }
        Command::Reduce { file, mode } => {
            let model = Model::load(file)?;
            let text = match (&model, mode) {
                (Model::Plts(l), None | Some(args::ReduceMode::Plts)) => write_plts(&pbisim_core::lift_plts(l).plts),
                (Model::Ppda(m), None | Some(args::ReduceMode::Stack)) => write_ppda(&pbisim_core::lift_ppda_stack(m)?.ppda),
                (Model::Ppda(m), Some(args::ReduceMode::State)) => write_ppda(&pbisim_core::lift_ppda_state(m)?.ppda),
                (Model::Ppda(_), Some(args::ReduceMode::Plts)) => {
                    return Err(CliError::usage("--mode plts needs a .plts file; use stack or state for a .ppda"))
                }
                (Model::Plts(_), Some(_)) => return Err(CliError::usage("--mode stack/state needs a .ppda file")),
                (Model::Afa(_), _) => return Err(CliError::usage("reduce takes a .plts or .ppda file")),
            };
            write!(out, "{text}")?;
            Ok(Exit::Success)
        }
        Command::Gen { kind } => {
            for path in gen::generate(kind)? {
                writeln!(out, "wrote {}", path.display())?;
            }
            Ok(Exit::Success)
        }
        Command::Norms { file } => {
            let Model::Ppda(m) = Model::load(file)? else {
                return Err(CliError::usage("norms takes a .ppda file"));
            };
            let t = norms(&m)?;
            let width = m.symbols().iter().map(|s| s.len()).max().unwrap_or(0).max(6);
            writeln!(out, "{:<width$}  {:>10}  {:>10}", "symbol", "norm", "lifted")?;
            for (name, n, lifted) in t.rows(&m) {
                writeln!(out, "{name:<width$}  {:>10}  {:>10}", n.to_string(), lifted.to_string())?;
            }
            Ok(Exit::Success)
        }
        Command::Play {
            file,
            left,
            right,
            side,
            horizon,
            budget,
        } => {
            let model = Model::load(file)?;
            let arena = play::Arena::new(&model, left, right, *horizon, *budget)?;
            play::play(&arena, (*side).into(), *horizon, input, out)
        }
        Command::Serve { host, port, models } => {
            let state = server::AppState::load(models)?;
            let addr = format!("{host}:{port}");
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(server::serve(&addr, state))?;
            Ok(Exit::Success)
        }
    }
}
