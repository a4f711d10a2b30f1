use std::process::ExitCode;

fn main() -> ExitCode {
    ftforge::main_with_args(std::env::args_os())
}
