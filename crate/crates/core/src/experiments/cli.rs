//! Command-line front end. Exit codes: 0 success, 2 usage or config error,
//! 3 solver failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::config::{StudyConfig, StudyKind};
use super::studies::{run_study, write_outputs};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "helmpml", version, about = "Helmholtz PML finite element studies")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Study kind: convergence, fixed_kh, infsup, truncation, stability
    #[arg(long, global = true)]
    study: Option<String>,
    /// Wave numbers, comma separated
    #[arg(long, global = true)]
    k: Option<String>,
    /// Mesh sizes (max edge length), comma separated; fractions like 1/32 allowed
    #[arg(long, global = true)]
    h: Option<String>,
    /// Fixed k*h targets, comma separated
    #[arg(long, global = true)]
    kh: Option<String>,
    /// PML absorption strength
    #[arg(long, global = true)]
    sigma0: Option<String>,
    /// zero, dispersion, or a custom value re,im
    #[arg(long, global = true, allow_hyphen_values = true)]
    penalty: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent study points
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Check mesh invariants and print mesh quality
    #[arg(long, global = true)]
    validate_mesh: bool,
    /// Write each system matrix in coordinate text format
    #[arg(long, global = true)]
    export_matrix: bool,
    /// Lift the k <= 64 and unknown-count caps
    #[arg(long, global = true)]
    allow_large: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the study described by a config file
    Run { config: PathBuf },
}

fn resolve(cli: &Cli) -> Result<StudyConfig, Error> {
    let mut cfg = match &cli.command {
        Some(Command::Run { config }) => StudyConfig::from_file(config)?,
        None => {
            let kind: StudyKind = cli
                .study
                .as_deref()
                .ok_or_else(|| Error::Config("give 'run <config-file>' or --study <kind>".into()))?
                .parse()?;
            StudyConfig::defaults(kind)
        }
    };
    let overrides = [
        ("study", cli.study.clone()),
        ("k", cli.k.clone()),
        ("h", cli.h.clone()),
        ("kh", cli.kh.clone()),
        ("sigma0", cli.sigma0.clone()),
        ("penalty", cli.penalty.clone()),
        ("threads", cli.threads.map(|t| t.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate_mesh |= cli.validate_mesh;
    cfg.export_matrix |= cli.export_matrix;
    cfg.allow_large |= cli.allow_large;
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NearSingular { .. } | Error::Factorization(_) | Error::NotPositiveDefinite(_) | Error::NegativeEnergy(_) => {
            EXIT_SOLVER
        }
        Error::Quadrature { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

/// Parses arguments, runs the study and writes its outputs.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let out = match run_study(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = write_outputs(&cfg, &out, &cfg.out_dir) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    println!("{} study: {} rows written to {}", out.kind, out.table.rows.len(), cfg.out_dir.join("study.csv").display());
    for note in &out.notes {
        println!("  {note}");
    }
    if out.failures > 0 {
        eprintln!("{} solve(s) failed; see rows marked !failed", out.failures);
        return EXIT_SOLVER;
    }
    EXIT_OK
}
