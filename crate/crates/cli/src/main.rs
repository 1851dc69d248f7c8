//! `qg` — command-line front end for the two-level-system simulator.
//!
//! Every experiment in the library is reachable from here: trajectory
//! integration, stroboscopic maps and contour curves, γ fitting and sweeps,
//! Lyapunov estimation, weighted drive averages, RWA error, dynamical
//! localization, NOT-gate prediction/detection/resonance search and the
//! precession geometry checks. Outputs are deterministic: identical flags
//! give byte-identical files.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{dispatch, Cli};

fn main() -> ExitCode {
    let argv = match merge_config_tokens(std::env::args().collect()) {
        Ok(argv) => argv,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the same path; keep its text
            // but map argument errors to exit code 1
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Expands `--config file.json` into command-line tokens inserted right
/// after the subcommand path, so explicit flags take precedence (later
/// occurrences override earlier ones).
fn merge_config_tokens(argv: Vec<String>) -> Result<Vec<String>, String> {
    let config_pos = argv.iter().position(|a| a == "--config");
    let Some(pos) = config_pos else {
        return Ok(argv);
    };
    let path = argv
        .get(pos + 1)
        .ok_or_else(|| "--config requires a path".to_string())?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("parsing {path}: {e}"))?;
    let obj = json
        .as_object()
        .ok_or_else(|| format!("{path}: config must be a JSON object"))?;

    let mut tokens = Vec::new();
    for (key, value) in obj {
        let flag = format!("--{key}");
        match value {
            serde_json::Value::Bool(true) => tokens.push(flag),
            serde_json::Value::Bool(false) => {}
            serde_json::Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(render_scalar)
                    .collect::<Result<Vec<_>, _>>()?
                    .join(",");
                tokens.push(flag);
                tokens.push(joined);
            }
            other => {
                tokens.push(flag);
                tokens.push(render_scalar(other)?);
            }
        }
    }

    // subcommand path = leading tokens that do not start with '-'
    let mut insert_at = 1;
    while insert_at < argv.len() && !argv[insert_at].starts_with('-') {
        insert_at += 1;
    }
    let mut merged = argv[..insert_at].to_vec();
    merged.extend(tokens);
    merged.extend(argv[insert_at..].iter().cloned());
    Ok(merged)
}

fn render_scalar(v: &serde_json::Value) -> Result<String, String> {
    match v {
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s.clone()),
        other => Err(format!("unsupported config value: {other}")),
    }
}
