//! Acceptance suite: every criterion at its stated tolerance with the default
//! seed, one pass/fail line each. Runs without the libtest harness so the
//! lines always reach the console.

use std::process::ExitCode;

use cwf::config::{ExperimentConfig, ExperimentKind};
use cwf::validate::{run_validate, ValidateOptions};

fn main() -> ExitCode {
    let cfg = ExperimentConfig::default()
        .resolve(ExperimentKind::Validate)
        .expect("default validate config");
    let opts = ValidateOptions {
        seed: cfg.seed.expect("validate resolves a seed"),
        tolerance_scale: cfg.tolerance_scale,
    };
    let report = run_validate(&opts, &cfg.hash_hex()).expect("suite runs");
    println!("acceptance suite (seed {})", opts.seed);
    for o in &report.outcomes {
        println!("{}", o.summary_line());
    }
    let failed = report.outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance result: {} passed; {failed} failed",
        report.outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
