use std::process::ExitCode;

use induco_core::validation::{run_all, DEFAULT_TRIALS};

fn main() -> ExitCode {
    let results = run_all(DEFAULT_TRIALS, 2024);
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
