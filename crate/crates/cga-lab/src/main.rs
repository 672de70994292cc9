use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cga_lab::cli::cli_main(std::env::args_os()))
}
