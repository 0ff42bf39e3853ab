//! Command-line interface: parameter sweeps, echo simulation, AFC design and
//! the verification suite.
//!
//! Exit codes: 0 ok, 1 I/O, 2 invalid input, 3 infeasible target, 4 numerical failure.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::error::Error;
use commands::{CommandError, Outcome, Sink};
use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "ECHOMEM_OUT";

#[derive(Debug, Parser)]
#[command(name = "echomem", version, about = "Photon-echo quantum memory response, maps and designs")]
pub struct Cli {
    /// Output directory (overrides ECHOMEM_OUT and the config).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat aliasing warnings as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transfer function and efficiency over a frequency grid.
    Respond(ConfigArg),
    /// Two-dimensional efficiency map.
    Map(ConfigArg),
    /// Store and retrieve a Gaussian pulse.
    Echo(ConfigArg),
    /// Search comb parameters for a target bandwidth.
    AfcDesign(ConfigArg),
    /// Check closed forms against the numerical oracles.
    Verify {
        /// Run only this check, or every check in this group (repeatable).
        #[arg(long)]
        only: Vec<String>,
        /// Scale every closed-form value by (1 + EPS) before comparing.
        #[arg(long, value_name = "EPS", default_value_t = 0.0)]
        perturb: f64,
        /// Points per axis on the area-theorem grids.
        #[arg(long, default_value_t = 20)]
        area_grid: usize,
        /// List check names and exit.
        #[arg(long)]
        list: bool,
        /// Write the report as JSON to this file.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Domain(_)
        | Error::Bifurcation { .. }
        | Error::GridMismatch(_)
        | Error::UndefinedMeasure(_) => EXIT_INVALID,
        Error::Aliasing { .. }
        | Error::QuadratureNonConvergence { .. }
        | Error::StepUnderflow { .. }
        | Error::Search(_)
        | Error::Singular(_)
        | Error::Overflow(_) => EXIT_NUMERICAL,
    }
}

fn load(path: &std::path::Path) -> Result<RunConfig, (i32, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text).map_err(|e| (EXIT_INVALID, format!("{}: {e}", path.display())))
}

/// Runs a parsed command line; returns the process exit code. Human output
/// goes to `stdout`, diagnostics to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    if cli.jobs == Some(0) {
        let _ = writeln!(stderr, "error: --jobs must be at least 1");
        return EXIT_INVALID;
    }
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = pool.install(|| dispatch(&cli, &mut out, &mut err));
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    code
}

fn dispatch(cli: &Cli, stdout: &mut Vec<u8>, stderr: &mut Vec<u8>) -> i32 {
    use std::io::Write as _;
    let (cfg_path, which): (&std::path::Path, &str) = match &cli.command {
        Command::Verify { only, perturb, area_grid, list, json } => {
            if *list {
                for n in verify::check_names() {
                    let _ = writeln!(stdout, "{n}");
                }
                return EXIT_OK;
            }
            if *area_grid < 2 {
                let _ = writeln!(stderr, "error: --area-grid must be at least 2");
                return EXIT_INVALID;
            }
            let opts = verify::VerifyOptions { only: only.clone(), perturbation: *perturb, area_grid: *area_grid };
            let report = verify::run(&opts);
            if report.checks.is_empty() {
                let _ = writeln!(stderr, "error: no check matches {:?}", only);
                return EXIT_INVALID;
            }
            let _ = write!(stdout, "{}", report.render());
            if let Some(p) = json {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                if let Err(e) = std::fs::write(p, text) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                    return EXIT_IO;
                }
            }
            return if report.all_passed() { EXIT_OK } else { EXIT_NUMERICAL };
        }
        Command::Respond(a) => (&a.config, "respond"),
        Command::Map(a) => (&a.config, "map"),
        Command::Echo(a) => (&a.config, "echo"),
        Command::AfcDesign(a) => (&a.config, "afc-design"),
    };
    let cfg = match load(cfg_path) {
        Ok(c) => c,
        Err((code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return code;
        }
    };
    let env = std::env::var(OUT_ENV).ok();
    let sink = Sink { dir: commands::resolve_dir(cli.out.as_deref(), env.as_deref(), &cfg), svg: cli.svg || cfg.output.svg };
    let result: Result<Outcome, CommandError> = match which {
        "respond" => commands::respond(&cfg, &sink),
        "map" => commands::map(&cfg, &sink),
        "echo" => commands::echo(&cfg, &sink, cli.strict),
        _ => commands::afc_design(&cfg, &sink),
    };
    match result {
        Ok(o) => {
            let _ = writeln!(stdout, "{}", o.summary);
            for f in &o.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            if o.infeasible {
                EXIT_INFEASIBLE
            } else {
                EXIT_OK
            }
        }
        Err(CommandError::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
        Err(CommandError::Numeric(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `std::env::args` and runs.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
