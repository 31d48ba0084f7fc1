mod check;
mod config;
mod simulate;

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boxcert::sdp::sweep::{bell_values, sweep};

use config::{Format, RunConfig, SweepPlan};

/// Exit status for a failed computation.
pub const EXIT_FAILURE: u8 = 1;
/// Exit status for bad flags, config files or inputs.
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "boxcert", version, about = "Certify quantum boxes from their Bell violation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower-bound the fidelity (or τ) over a range of Bell values.
    Sweep(SweepArgs),
    /// Run the algebra, oracle and sandwich self-tests.
    Check(check::CheckArgs),
    /// Bell value and exact swapped-state fidelity of a strategy file.
    Simulate(simulate::SimulateArgs),
}

#[derive(Args, Debug, Default)]
pub struct SweepArgs {
    /// chsh, chsh-isotropic, cglmp or tau.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// A single Bell value, or `extremum`.
    #[arg(long, conflicts_with_all = ["from", "to", "points"])]
    at: Option<String>,
    /// `auto`, `npa:N` or `local:N`.
    #[arg(long)]
    level: Option<String>,
    /// Basis of the localizing matrices: `auto`, `npa:N` or `local:N`.
    #[arg(long)]
    localizing_level: Option<String>,
    /// Add each localizing weight's own monomials to its basis.
    #[arg(long)]
    localizing_weight_words: bool,
    #[arg(long, overrides_with = "no_rho_psd")]
    rho_psd: bool,
    #[arg(long)]
    no_rho_psd: bool,
    #[arg(long, overrides_with = "no_localizing")]
    localizing: bool,
    #[arg(long)]
    no_localizing: bool,
    #[arg(long, overrides_with = "no_isotropic")]
    isotropic: bool,
    #[arg(long)]
    no_isotropic: bool,
    /// JSON run configuration; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write zero in the seconds column so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

fn pick(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

impl SweepArgs {
    fn as_config(&self) -> RunConfig {
        RunConfig {
            scenario: self.scenario.clone(),
            from: self.from,
            to: self.to,
            points: self.points,
            at: self.at.clone(),
            level: self.level.clone(),
            localizing_level: self.localizing_level.clone(),
            localizing_weight_words: self.localizing_weight_words.then_some(true),
            rho_psd: pick(self.rho_psd, self.no_rho_psd),
            localizing: pick(self.localizing, self.no_localizing),
            isotropic: pick(self.isotropic, self.no_isotropic),
            solver: None,
            output: self.output.clone(),
            format: self.format,
            threads: self.threads,
            timing: if self.no_timing { Some(false) } else { None },
        }
    }
}

pub fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

pub fn failure(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_FAILURE)
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let flags = args.as_config();
    let config = match &args.config {
        Some(path) => match RunConfig::load(path) {
            Ok(file) => file.merged_with(flags),
            Err(e) => return usage_error(e),
        },
        None => flags,
    };
    let plan = match SweepPlan::resolve(&config) {
        Ok(p) => p,
        Err(e) => return usage_error(e),
    };
    let values = match &plan.single {
        Some(b) => vec![*b],
        None => match bell_values(plan.from, plan.to, plan.points) {
            Ok(v) => v,
            Err(e) => return usage_error(e),
        },
    };
    log::info!(
        "{}: {} point(s), flags {:?}",
        plan.scenario_name,
        values.len(),
        plan.flags
    );
    let template = match plan.template() {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    log::info!(
        "basis {} words, {} moments, blocks {:?}",
        template.basis_size,
        template.num_vars(),
        template.block_dims()
    );
    let result = match sweep(&template, &values, &plan.solver, plan.threads) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    let written = match &plan.output {
        Some(path) => match File::create(path) {
            Ok(f) => plan.write(&result, f),
            Err(e) => return failure(format!("{}: {e}", path.display())),
        },
        None => plan.write(&result, io::stdout().lock()),
    };
    if let Err(e) = written {
        return failure(e);
    }
    if result.all_failed() {
        return failure("no point of the sweep was solved");
    }
    ExitCode::SUCCESS
}

impl SweepPlan {
    fn write<W: Write>(&self, result: &boxcert::sdp::sweep::SweepResult, mut out: W) -> anyhow::Result<()> {
        match self.format {
            Format::Csv => result.write_csv(&mut out, self.timing)?,
            Format::Json => writeln!(out, "{}", result.to_json(self.timing)?)?,
        }
        out.flush()?;
        Ok(())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Check(a) => check::run(a),
        Command::Simulate(a) => simulate::run(a),
    }
}
