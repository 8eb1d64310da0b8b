//! `stochnlw`: command-line driver for the simulations and statistical checks.

mod commands;
mod config;
mod error;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands::COMMANDS;
use crate::config::{help_of, read_config_file, RunConfig};
use crate::error::CliError;

const WORKERS_ENV: &str = "STOCHNLW_WORKERS";

fn cli() -> Command {
    let mut app = Command::new("stochnlw")
        .about("Simulation and verification for the energy-critical wave equation with randomized data")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name)
            .about(spec.about)
            .arg(Arg::new("config").long("config").value_name("PATH").help("`key = value` configuration file"))
            .arg(
                Arg::new("workers")
                    .long("workers")
                    .value_name("COUNT")
                    .value_parser(clap::value_parser!(usize))
                    .help("worker threads (overrides STOCHNLW_WORKERS)"),
            );
        for (key, default) in spec.keys {
            let help = match default {
                Some(d) => format!("{} [default: {d}]", help_of(key)),
                None => format!("{} [required]", help_of(key)),
            };
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").action(ArgAction::Set).help(help));
        }
        app = app.subcommand(sub);
    }
    app
}

fn workers(matches: &ArgMatches) -> Result<usize, CliError> {
    if let Some(&w) = matches.get_one::<usize>("workers") {
        return Ok(w.max(1));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|e| CliError::Usage(format!("invalid {WORKERS_ENV} `{v}`: {e}"))),
        Err(_) => Ok(1),
    }
}

fn run(name: &str, matches: &ArgMatches) -> Result<(), CliError> {
    let spec = COMMANDS.iter().find(|c| c.name == name).expect("subcommand is registered");
    let file = match matches.get_one::<String>("config") {
        Some(path) => read_config_file(&PathBuf::from(path))?,
        None => BTreeMap::new(),
    };
    let mut flags = BTreeMap::new();
    for (key, _) in spec.keys {
        if let Some(v) = matches.get_one::<String>(key) {
            flags.insert(key.to_string(), v.clone());
        }
    }
    let cfg = RunConfig::resolve(name, spec.keys, &file, &flags)?;
    let workers = workers(matches)?;
    let start = Instant::now();
    let outcome = (spec.run)(&cfg, workers)?;
    let written = report::emit(&cfg, &outcome.table, outcome.report, &outcome.acceptance)?;
    eprintln!(
        "{name}: wrote {} and {} in {:.2} s",
        written.csv.display(),
        written.json.display(),
        start.elapsed().as_secs_f64()
    );
    if outcome.acceptance.passed {
        eprintln!("{name}: PASS {}", outcome.acceptance.detail);
        Ok(())
    } else {
        Err(CliError::Acceptance(outcome.acceptance.detail))
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
