use std::process::ExitCode;

use clap::Args;

use boxcert::checks::{algebra_suite, oracle_suite, perturbed_chsh_swap, sandwich_suite, CheckRow};
use boxcert::sdp::SolverOptions;
use boxcert::swap::chsh_swap;

use crate::{failure, usage_error, EXIT_FAILURE};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Random words per algebra property.
    #[arg(long, default_value_t = 1000)]
    words: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Skip the SDP sandwich suite.
    #[arg(long)]
    no_sandwich: bool,
    /// Scale Alice's swap operator by this factor in the sandwich suite.
    #[arg(long)]
    perturb_swap: Option<f64>,
}

pub fn run(args: &CheckArgs) -> ExitCode {
    if args.words == 0 {
        return usage_error("--words must be at least 1");
    }
    let options = match SolverOptions::default().with_env_overrides() {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    let mut rows: Vec<CheckRow> = Vec::new();
    let suites = [
        algebra_suite(args.words, args.seed),
        oracle_suite(),
    ];
    for s in suites {
        match s {
            Ok(r) => rows.extend(r),
            Err(e) => return failure(e),
        }
    }
    if !args.no_sandwich {
        let swap = match args.perturb_swap {
            Some(f) => perturbed_chsh_swap(f),
            None => chsh_swap(),
        };
        match sandwich_suite(&swap, &options) {
            Ok(r) => rows.extend(r),
            Err(e) => return failure(e),
        }
    }
    for row in &rows {
        println!("{row}");
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    println!("{} checks, {} failed", rows.len(), failed);
    if failed > 0 {
        ExitCode::from(EXIT_FAILURE)
    } else {
        ExitCode::SUCCESS
    }
}
