mod args;
mod commands;
mod config;
mod error;
mod run;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;

use crate::args::Cli;
use crate::error::CliError;
use crate::run::Invocation;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(run_argv(argv));
}

fn run_argv(argv: Vec<String>) -> i32 {
    let (resolved, config_file) = match config::expand(&argv) {
        Ok(v) => v,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(&resolved) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    if let Some(t) = cli.threads {
        if t == 0 {
            return report(CliError::Usage("--threads must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let inv = Invocation { argv, resolved_argv: resolved, config_file, threads: rayon::current_num_threads() };
    match commands::execute(&cli.command, &inv) {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
