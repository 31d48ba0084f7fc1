use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;

use boxcert::algebra::Party;
use boxcert::oracle::{exact_swap_state, with_polar_aux, Strategy};
use boxcert::sdp::BellFunctional;
use boxcert::swap::{chsh_reference, chsh_swap, cglmp_reference, cglmp_swap};

use crate::{failure, usage_error};

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Strategy file (JSON).
    strategy: PathBuf,
    /// `chsh` or `cglmp`; inferred from the strategy when absent.
    #[arg(long)]
    swap: Option<String>,
}

pub fn run(args: &SimulateArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.strategy) {
        Ok(t) => t,
        Err(e) => return usage_error(format!("{}: {e}", args.strategy.display())),
    };
    let mut strategy = match Strategy::from_json(&text) {
        Ok(s) => s,
        Err(e) => return usage_error(format!("{}: {e}", args.strategy.display())),
    };
    let scenario = match strategy.scenario() {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let name = match (&args.swap, scenario.is_chsh()) {
        (Some(n), _) => n.as_str(),
        (None, true) => "chsh",
        (None, false) => "cglmp",
    };
    let (swap, reference) = match name {
        "chsh" if scenario.is_chsh() => (chsh_swap(), chsh_reference()),
        "cglmp" if scenario.party(Party::A).outcomes == 3 => {
            if Party::BOTH.iter().any(|&p| strategy.aux(p).is_empty()) {
                strategy = match with_polar_aux(&strategy) {
                    Ok(s) => s,
                    Err(e) => return failure(e),
                };
            }
            (cglmp_swap(), cglmp_reference())
        }
        "chsh" | "cglmp" => {
            return usage_error(format!("the {name} swap does not fit this strategy's dimensions"))
        }
        _ => return usage_error(format!("unknown swap `{name}` (expected chsh or cglmp)")),
    };
    let scenario = match strategy.scenario() {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let bell = match BellFunctional::for_scenario(&scenario) {
        Ok(b) => b,
        Err(e) => return usage_error(e),
    };
    let value = match strategy.expectation(&bell.polynomial) {
        Ok(v) => v,
        Err(e) => return failure(e),
    };
    let outcome = match exact_swap_state(&strategy, &swap) {
        Ok(o) => o,
        Err(e) => return failure(e),
    };
    println!("scenario   {}", bell.name);
    println!("bell_value {value:.10}");
    println!("fidelity   {:.10}", outcome.fidelity(&reference));
    ExitCode::SUCCESS
}
