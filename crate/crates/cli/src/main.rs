use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(distorted_stopping_cli::run(std::env::args()) as u8)
}
