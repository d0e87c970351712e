mod config;
mod error;
mod experiments;
mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use serde_json::json;

use config::{parse_config_text, Params};
use error::CliError;
use experiments::{Experiment, EXPERIMENTS};
use output::{document, write_atomic};

fn command() -> Command {
    let mut cmd = Command::new("horoflow")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Geodesic and horocycle flow experiments on the modular surface and its level-2 cover")
        .after_help(
            "Parameters come from the defaults, then --config FILE (key = value lines), then flags.\n\
             HOROFLOW_THREADS caps the number of worker threads.\n\
             Exit codes: 0 success, 2 configuration, 3 numerical precondition, 4 internal invariant.",
        )
        .subcommand_required(true)
        .arg_required_else_help(true);
    for exp in EXPERIMENTS {
        let mut sub = Command::new(exp.name)
            .about(exp.about)
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .value_parser(clap::value_parser!(PathBuf))
                    .help("flat key = value file"),
            )
            .arg(
                Arg::new("json")
                    .long("json")
                    .value_name("PATH")
                    .help("write the result document here instead of stdout"),
            )
            .arg(
                Arg::new("csv")
                    .long("csv")
                    .value_name("PATH")
                    .help("write the series here"),
            );
        for k in exp.keys {
            let help = match k.default {
                Some(d) => format!("{} [default: {d}]", k.help),
                None => k.help.to_string(),
            };
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name("VALUE")
                    .allow_negative_numbers(true)
                    .help(help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn params(exp: &Experiment, m: &ArgMatches) -> Result<Params, CliError> {
    let file = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Default::default(),
    };
    let names = exp.keys.iter().map(|k| k.name).chain(config::OUTPUT_KEYS);
    let flags = names
        .filter_map(|n| m.get_one::<String>(n).map(|v| (n.to_string(), v.clone())))
        .collect();
    Params::resolve(exp.name, exp.keys, file, flags)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("HOROFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::config(format!(
            "HOROFLOW_THREADS = {raw:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot size the thread pool: {e}")))
}

fn run(matches: &ArgMatches) -> Result<(), CliError> {
    configure_threads()?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let exp = experiments::find(name).expect("subcommands come from the table");
    let p = params(exp, sub)?;
    let report = (exp.run)(&p)?;

    let doc = document(exp.name, &p, &report);
    let mut text = serde_json::to_string_pretty(&doc).expect("json values serialize");
    text.push('\n');
    if let (Some(path), Some(table)) = (p.str("csv").ok(), &report.table) {
        let bytes = table.to_csv().map_err(|e| CliError::Io {
            path: path.into(),
            source: e.into(),
        })?;
        write_atomic(Path::new(path), &bytes)?;
    }
    match p.str("json").ok() {
        Some(path) => {
            write_atomic(Path::new(path), text.as_bytes())?;
            for line in &report.summary {
                println!("{line}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.class(), "message": e.to_string()}));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
