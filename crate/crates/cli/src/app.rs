//! Argument parsing, caching and exit codes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{self, Command, RunError};
use crate::config::{ConfigError, RunConfig};
use crate::output::{resolve_out_dir, write_atomic, Manifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bandspec", version, about = "Eigenvalue asymptotics of unbounded band matrices")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to $BANDSPEC_OUT_DIR, then the current directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Recompute even when the output directory holds results for this config.
    #[arg(long)]
    force: bool,
    /// Worker threads for per-index loops.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Eigenvalues of the finite section A_N.
    Eigs(Common),
    /// Min-max enclosures against computed eigenvalues.
    Enclose(Common),
    /// Certificate bound and hypothesis report.
    Certify(Common),
    /// Conjugation lab at the configured indices.
    Conjugate(Common),
    /// Residual series, rate fits and rate verdicts.
    Rate(Common),
    /// Singular values of a tridiagonal J through J^T J.
    GramSingular(Common),
    /// Enclose, certify, rate and (with lab_n) conjugate in one run.
    Report(Common),
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Eigs(c) => (Command::Eigs, c),
            Sub::Enclose(c) => (Command::Enclose, c),
            Sub::Certify(c) => (Command::Certify, c),
            Sub::Conjugate(c) => (Command::Conjugate, c),
            Sub::Rate(c) => (Command::Rate, c),
            Sub::GramSingular(c) => (Command::GramSingular, c),
            Sub::Report(c) => (Command::Report, c),
        }
    }
}

/// What a run did, for callers that want more than the exit code.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub cached: bool,
    pub files: Vec<String>,
    pub message: String,
}

fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    RunConfig::parse(&text).map_err(|e: ConfigError| format!("{}: {e}", path.display()))
}

/// Runs one subcommand. Writes artifacts, a summary and the manifest into the
/// output directory.
pub fn execute(command: Command, config_path: &Path, out: Option<&Path>, force: bool, threads: Option<usize>) -> RunOutcome {
    let fail = |code: i32, dir: PathBuf, message: String| RunOutcome {
        exit_code: code,
        out_dir: dir,
        cached: false,
        files: vec![],
        message,
    };
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return fail(EXIT_CONFIG, PathBuf::new(), format!("config: {msg}")),
    };
    let dir = resolve_out_dir(out, config.output.as_deref());
    let stem = command.file_stem();
    if !force {
        if let Some(m) = Manifest::lookup(&dir, stem, &config.hash) {
            let message = format!(
                "{}: cached results for config {} in {}",
                command.name(),
                &config.hash[..12],
                dir.display()
            );
            return RunOutcome {
                exit_code: m.exit_code,
                out_dir: dir,
                cached: true,
                message,
                files: m.files,
            };
        }
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return fail(EXIT_NUMERIC, dir, format!("thread pool: {e}")),
    };
    let result = pool.install(|| commands::run(command, &config));
    let artifacts = match result {
        Ok(a) => a,
        Err(e) => {
            let code = e.exit_code();
            return fail(code, dir, describe(command, &e));
        }
    };

    let mut files = vec![];
    let summary_name = format!("{stem}_summary.txt");
    let mut summary = artifacts.summary.clone();
    for v in &artifacts.violations {
        summary.push_str(&format!("VIOLATION {v}\n"));
    }
    let writes = artifacts
        .files
        .iter()
        .map(|(n, b)| (n.clone(), b.as_slice()))
        .chain(std::iter::once((summary_name, summary.as_bytes())));
    for (name, bytes) in writes {
        if let Err(e) = write_atomic(&dir.join(&name), bytes) {
            return fail(EXIT_NUMERIC, dir, format!("{}: write: {e}", command.name()));
        }
        files.push(name);
    }
    let exit_code = if artifacts.violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let manifest = Manifest {
        command: stem.to_string(),
        hash: config.hash.clone(),
        exit_code,
        files: files.clone(),
    };
    if let Err(e) = manifest.store(&dir) {
        return fail(EXIT_NUMERIC, dir, format!("{}: write: {e}", command.name()));
    }
    let message = if artifacts.violations.is_empty() {
        format!("{}: wrote {} files to {}", command.name(), files.len(), dir.display())
    } else {
        format!("{}: {} property violations:\n{}", command.name(), artifacts.violations.len(), artifacts.violations.join("\n"))
    };
    RunOutcome {
        exit_code,
        out_dir: dir,
        cached: false,
        files,
        message,
    }
}

fn describe(command: Command, e: &RunError) -> String {
    match e {
        RunError::Config(c) => format!("{}: config: {c}", command.name()),
        other => format!("{}: {other}", command.name()),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (command, common) = cli.command.split();
    let outcome = execute(command, &common.config, common.out.as_deref(), common.force, common.threads);
    if outcome.exit_code == EXIT_OK {
        println!("{}", outcome.message);
    } else {
        eprintln!("bandspec {}", outcome.message);
    }
    outcome.exit_code
}
