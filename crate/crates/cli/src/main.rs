mod args;
mod emit;
mod parse;
mod run;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Exit status for usage, configuration and I/O errors.
const EXIT_USAGE: u8 = 3;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("GEOMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("GEOMLAB_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("GEOMLAB_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let report = match run::run(&cli.command, &cli.opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Err(e) = emit::emit_report(&report, cli.opts.format, cli.opts.out.as_deref()) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    ExitCode::from(report.status.exit_code() as u8)
}
