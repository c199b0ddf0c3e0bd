use std::process::ExitCode;

fn main() -> ExitCode {
    induco_cli::run(std::env::args_os())
}
