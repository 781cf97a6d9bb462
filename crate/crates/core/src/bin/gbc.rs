use std::io::Write;
use std::process::ExitCode;

use gabor_barcodes::cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = cli::parse(std::env::args_os()).and_then(|parsed| match parsed {
        Some(args) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            cli::run(args, &mut out)?;
            out.flush().ok();
            Ok(())
        }
        None => Ok(()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
