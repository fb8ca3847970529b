//! `singlab` — command-line driver.
//!
//! Every option is a `key = value` setting that may come from the built-in
//! defaults, `$SINGLAB_SEED` (seed only), a `--config` file, or a flag, in
//! increasing precedence. Each run writes `manifest.txt` to the output
//! directory; it is a config file that reproduces the run.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use config::{RunConfig, KEYS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Violation(String),
    #[error(transparent)]
    Lab(#[from] singlab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) | CliError::Lab(_) => 2,
        }
    }
}

const COMMANDS: &[(&str, &str)] = &[
    ("construct", "build one explicit network and measure its error against the target"),
    ("approx-sweep", "error versus network size over a grid of accuracies"),
    ("regress", "fit estimators to one simulated dataset"),
    ("rate-sweep", "squared L2 risk versus sample size, with a fitted log-log slope"),
    ("report", "summarise the rate tables found in the output directory"),
];

fn cli() -> Command {
    let mut root = Command::new("singlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Deep-network approximation and estimation of piecewise smooth functions")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about) in COMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value config file"))
            .arg(Arg::new("strict").long("strict").action(ArgAction::SetTrue).help("exit with status 1 when a checked bound is violated"));
        for (key, default, help) in KEYS {
            let help = if default.is_empty() { help.to_string() } else { format!("{help} [default: {default}]") };
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").help(help));
        }
        root = root.subcommand(sub);
    }
    root
}

fn resolve(command: &str, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let flags: BTreeMap<String, String> =
        KEYS.iter().filter_map(|(k, _, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone()))).collect();
    let file = m.get_one::<String>("config").map(PathBuf::from);
    RunConfig::resolve(command, file.as_deref(), flags, m.get_flag("strict"))
}

fn run(command: &str, m: &ArgMatches) -> Result<(), CliError> {
    let cfg = resolve(command, m)?;
    let outcome = match command {
        "construct" => commands::construct(&cfg)?,
        "approx-sweep" => commands::approx(&cfg)?,
        "regress" => commands::regress(&cfg)?,
        "rate-sweep" => commands::rates(&cfg)?,
        "report" => commands::report(&cfg)?,
        _ => unreachable!("clap rejects unknown subcommands"),
    };
    commands::write_manifest(&cfg)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    match outcome.violation {
        Some(v) if cfg.strict => Err(CliError::Violation(v)),
        Some(v) => {
            eprintln!("warning: {v}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (command, sub) = matches.subcommand().expect("subcommand required");
    match run(command, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("singlab {command}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
