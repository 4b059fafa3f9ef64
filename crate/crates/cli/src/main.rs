use std::process::ExitCode;

use clap::Parser;
use dgonlab_cli::commands::{run, Cli, Command};
use dgonlab_cli::server::{serve, ServerConfig};
use dgonlab_cli::views::render;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Command::Serve { addr, state_dir, sessions } = &cli.command {
        let config = ServerConfig { max_sessions: *sessions, state_dir: state_dir.clone(), ..Default::default() };
        let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match rt.block_on(serve(addr, config)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("serve: {e}");
                ExitCode::from(1)
            }
        };
    }
    let (text, code) = match run(&cli.command) {
        Ok(outcome) => (render(&outcome.value), if outcome.ok { 0 } else { 1 }),
        Err(failure) => (render(&failure.to_json()), 1),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
