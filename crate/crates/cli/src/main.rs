mod commands;
mod output;
mod params;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches};

use commands::COMMANDS;
use params::{ConfigFile, Resolved};

const THREADS_ENV: &str = "TRIM_ORACLE_THREADS";
const GROUPS: [(&str, &str); 4] = [
    (
        "analyze",
        "closed-form distributions and write-amplification models",
    ),
    ("simulate", "Monte Carlo FTL simulation of one workload"),
    ("sweep", "FTL simulation across a parameter grid"),
    (
        "reproduce",
        "regenerate a standard study at its reference settings",
    ),
];
/// Flags shared by every command; `seed` and `runs` also resolve through
/// the parameter tables.
const GLOBAL_PARAMS: [&str; 2] = ["seed", "runs"];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

fn cli() -> clap::Command {
    let mut root = clap::Command::new("trimlab")
        .version(env!("CARGO_PKG_VERSION"))
        .about("SSD write-amplification laboratory for Trim workloads")
        .after_help(format!(
            "Environment:\n  {THREADS_ENV}=N  cap worker threads used for replications\n\n\
             Exit codes: 0 success, 2 configuration error, 3 runtime failure."
        ))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .global(true)
                .help("key = value file with [group] / [group.kind] sections"),
        )
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("N")
                .global(true)
                .help("base random seed"),
        )
        .arg(
            Arg::new("runs")
                .long("runs")
                .value_name("N")
                .global(true)
                .help("independent replications"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("PATH")
                .global(true)
                .help("write CSV here instead of stdout"),
        )
        .arg(
            Arg::new("svg")
                .long("svg")
                .action(ArgAction::SetTrue)
                .global(true)
                .help("also write a line chart next to --out (same name, .svg)"),
        );
    for (group, about) in GROUPS {
        let mut g = clap::Command::new(group)
            .about(about)
            .subcommand_required(true);
        for c in COMMANDS
            .iter()
            .filter(|c| c.path.split('.').next() == Some(group))
        {
            let kind = &c.path[group.len() + 1..];
            let mut sub = clap::Command::new(kind).about(c.about);
            for p in c.params.iter().filter(|p| !GLOBAL_PARAMS.contains(&p.key)) {
                sub = sub.arg(
                    Arg::new(p.key)
                        .long(p.key)
                        .value_name("VALUE")
                        .allow_hyphen_values(true)
                        .help(format!(
                            "{} [default: {}]",
                            p.help,
                            display_default(p.default)
                        )),
                );
            }
            g = g.subcommand(sub);
        }
        root = root.subcommand(g);
    }
    root
}

fn display_default(d: &str) -> &str {
    if d.is_empty() {
        "none"
    } else {
        d
    }
}

fn cli_values(m: &ArgMatches, command: &commands::Command) -> Vec<(&'static str, String)> {
    command
        .params
        .iter()
        .filter(|p| m.value_source(p.key) == Some(ValueSource::CommandLine))
        .filter_map(|p| m.get_one::<String>(p.key).map(|v| (p.key, v.clone())))
        .collect()
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "{THREADS_ENV} = '{raw}': expected a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

fn execute(matches: &ArgMatches) -> Result<(), CliError> {
    configure_threads()?;
    let (group, gm) = matches.subcommand().expect("subcommand required");
    let (kind, m) = gm.subcommand().expect("subcommand required");
    let path = format!("{group}.{kind}");
    let command = COMMANDS
        .iter()
        .find(|c| c.path == path)
        .expect("command registered");

    let file = m
        .get_one::<String>("config")
        .map(|p| ConfigFile::load(p.as_ref()))
        .transpose()?;
    let resolved = Resolved::new(
        &path,
        command.params,
        file.as_ref(),
        &cli_values(m, command),
    )?;
    let out = m.get_one::<String>("out").map(PathBuf::from);
    let svg = m.get_flag("svg");
    if svg && out.is_none() {
        return Err(CliError::Config(
            "--svg needs --out to name the chart file".into(),
        ));
    }

    let table = (command.run)(&resolved)?;
    let csv = table.to_csv();
    match &out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => match std::io::stdout().write_all(csv.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                return Err(CliError::Runtime(format!("stdout: {e}")))
            }
            _ => {}
        },
    }
    if let (true, Some(path)) = (svg, &out) {
        match table.to_svg() {
            Some(chart) => {
                let target = path.with_extension("svg");
                std::fs::write(&target, chart).map_err(|e| {
                    CliError::Runtime(format!("cannot write {}: {e}", target.display()))
                })?;
            }
            None => eprintln!("note: {} has no chart; --svg ignored", path.display()),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match execute(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trimlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_tree_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn every_command_is_reachable() {
        let root = cli();
        for c in COMMANDS {
            let (g, k) = c.path.split_once('.').unwrap();
            let group = root.find_subcommand(g).expect(g);
            assert!(group.find_subcommand(k).is_some(), "{}", c.path);
        }
    }
}
