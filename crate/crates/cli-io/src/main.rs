use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rupture_cli::config::Mode;
use rupture_cli::{parse_config_with, run, CliError, ConfigError};

/// Thin-film rupture simulations, similarity solutions and analyses.
#[derive(Debug, Parser)]
#[command(name = "rupture", version)]
struct Cli {
    /// Config file with [model], [ic], [numerics] and [output] sections.
    config: PathBuf,
    /// Override a config key, e.g. `--set model.B=1e-5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Replace the mode named in the file.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Replace the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    toml::Value::String(s.to_string())
        .try_into()
        .map_err(|_| format!("unknown mode `{s}`"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| ConfigError::Syntax(format!("{}: {e}", cli.config.display())))?;
    let mut overrides = cli.overrides.clone();
    if let Some(m) = cli.mode {
        overrides.push(format!("mode=\"{}\"", m.name()));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("output.dir={:?}", o.display().to_string()));
    }
    let cfg = parse_config_with(&text, &overrides)?;
    let done = run(&cfg)?;
    for f in &done.files {
        println!("{}", f.display());
    }
    if let Some(msg) = &done.failure {
        eprintln!("error: {msg}; artifacts are partial");
    }
    Ok(done.exit_code)
}
