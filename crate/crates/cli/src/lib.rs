//! `stripgain` command-line front end: model files in, JSON envelopes and
//! CSV frequency data out.
//!
//! Exit codes: 0 on success (including inconclusive small-gain checks),
//! 2 when the analysis fails on a well-formed input, 3 on input errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod json;
pub mod model;
mod sec5;

pub use json::Envelope;
pub use model::Model;

pub const EXIT_ANALYSIS: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Analysis(_) => EXIT_ANALYSIS,
        }
    }
}

impl From<stripgain::Error> for CliError {
    fn from(e: stripgain::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Analysis(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stripgain", version, about = "Strip norms, p-dominance and small-gain analysis of LTI models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H∞ norm on a vertical line or strip.
    Norm(NormArgs),
    /// Certify p-dominance at rate λ.
    Dominance(DominanceArgs),
    /// Rate-λ gain of a p-dominant system on a line or strip.
    Gain(GainArgs),
    /// Small-gain test for the negative feedback of two models.
    Smallgain(SmallGainArgs),
    /// Shifted Nyquist data as CSV (`omega,re,im,mag,disk_radius`).
    Nyquist(FreqArgs),
    /// Shifted Bode data as CSV (`omega,mag_db,phase_deg`).
    Bode(FreqArgs),
    /// Bilateral Laplace transforms of exponential-polynomial signals.
    Laplace(LaplaceArgs),
    /// Robust 2-dominance of saturated integral control with a lagging actuator.
    #[command(name = "example-sec5")]
    ExampleSec5(Sec5Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Grid,
    Bisection,
}

/// Rate interval `LO,HI` or a single rate.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Region {
    /// Strip of rates `LO,HI`; `LO = HI` is treated as a line.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub strip: Option<(f64, f64)>,
    /// Single rate λ (the line Re s = −λ).
    #[arg(long)]
    pub line: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    pub model: PathBuf,
    #[command(flatten)]
    pub region: Region,
    #[arg(long, value_enum, default_value_t = Method::Bisection)]
    pub method: Method,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DominanceArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    pub model: PathBuf,
    #[arg(long)]
    pub p: usize,
    #[command(flatten)]
    pub region: Region,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Also build and verify an LMI certificate `P`.
    #[arg(long)]
    pub certificate: bool,
}

#[derive(Debug, Args)]
pub struct SmallGainArgs {
    pub model1: PathBuf,
    pub model2: PathBuf,
    #[arg(long)]
    pub p1: usize,
    #[arg(long)]
    pub p2: usize,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub strip: (f64, f64),
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Lowest frequency; 0 puts one row at ω = 0 ahead of a log grid
    /// spanning six decades below `--omega-max`.
    #[arg(long, default_value_t = 1e-3)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Relative uncertainty radius `R`; disks have radius `R·|G_λ(iω)|`.
    #[arg(long, default_value_t = 0.0)]
    pub uncertainty: f64,
    /// Write the CSV here and print a JSON summary instead.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LaplaceArgs {
    #[command(subcommand)]
    pub op: LaplaceOp,
}

#[derive(Debug, Subcommand)]
pub enum LaplaceOp {
    /// Transform a signal given as a JSON term list (inline or a file path).
    Forward {
        #[arg(long)]
        signal: String,
    },
    /// Invert a strictly proper model on one ROC, or on every ROC option.
    Invert {
        model: PathBuf,
        /// `LO,HI` bounds on Re s; `-inf` and `inf` are allowed.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        roc: Option<(f64, f64)>,
    },
}

#[derive(Debug, Args)]
pub struct Sec5Args {
    /// Damping coefficient.
    #[arg(long, default_value_t = 5.0)]
    pub d: f64,
    /// Integral gain.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub ki: f64,
    /// Actuator time constant.
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    #[arg(long, value_parser = parse_pair, default_value = "1,2")]
    pub strip: (f64, f64),
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Rows of the Nyquist envelope data.
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Write the Nyquist envelope CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// What a successful command produced.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub stdout: String,
    /// Human-readable lines for standard error.
    pub notes: Vec<String>,
}

/// Collects the bytes of every input for the envelope digest.
pub(crate) struct Inputs {
    parts: Vec<Vec<u8>>,
}

impl Inputs {
    pub(crate) fn new(args: &[String]) -> Self {
        Self {
            parts: args.iter().map(|a| a.as_bytes().to_vec()).collect(),
        }
    }

    pub(crate) fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.parts.push(text.as_bytes().to_vec());
        Ok(text)
    }

    pub(crate) fn model(&mut self, path: &Path) -> Result<Model, CliError> {
        let text = self.read(path)?;
        Model::parse(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub(crate) fn digest(&self) -> String {
        json::digest(self.parts.iter().map(Vec::as_slice))
    }
}

/// Runs a parsed command; `args` is the argument list echoed in the envelope.
pub fn run(cli: &Cli, args: &[String]) -> Result<Output, CliError> {
    let mut inputs = Inputs::new(args);
    match &cli.command {
        Command::Norm(a) => commands::norm(a, args, &mut inputs),
        Command::Dominance(a) => commands::dominance(a, args, &mut inputs),
        Command::Gain(a) => commands::gain(a, args, &mut inputs),
        Command::Smallgain(a) => commands::smallgain(a, args, &mut inputs),
        Command::Nyquist(a) => commands::nyquist(a, args, &mut inputs),
        Command::Bode(a) => commands::bode(a, args, &mut inputs),
        Command::Laplace(a) => commands::laplace(a, args, &mut inputs),
        Command::ExampleSec5(a) => sec5::run(a, args, &inputs),
    }
}

/// Reads `STRIPGAIN_THREADS` and sizes the global worker pool.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("STRIPGAIN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("STRIPGAIN_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn main_with(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match run(&cli, &argv[1..]) {
        Ok(out) => {
            print!("{}", out.stdout);
            for n in &out.notes {
                eprintln!("{n}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
