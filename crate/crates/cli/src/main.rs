use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = io::stdout();
    let code = supercong_cli::run(std::env::args_os().collect(), &mut stdout.lock());
    ExitCode::from(code)
}
