use std::process::ExitCode;

fn main() -> ExitCode {
    freehom::cli::main_with_args(std::env::args_os())
}
