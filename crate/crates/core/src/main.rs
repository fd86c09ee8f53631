use std::process::ExitCode;

fn main() -> ExitCode {
    margulis::cli::run(std::env::args_os())
}
