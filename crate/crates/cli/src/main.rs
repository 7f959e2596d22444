use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(vlab_cli::run(std::env::args_os()))
}
