//! `obstacle-lab`: runs one experiment from a flat config file and writes CSV
//! tables plus a JSON summary.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure.

mod commands;
mod params;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Arg, ArgMatches};
use obstacle_lab::LabError;
use serde_json::{json, Value};

use commands::{Outcome, COMMANDS};
use params::{Params, ValidationError};

fn cli() -> clap::Command {
    let mut app = clap::Command::new("obstacle-lab")
        .about("Numerical lab for global solutions of the planar obstacle problem")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            clap::Command::new("run")
                .about("Run the subcommand named by the `command` key of a config file")
                .arg(Arg::new("config").long("config").required(true).value_name("FILE"))
                .arg(Arg::new("out").long("out").value_name("DIR").help("output directory")),
        );
    for c in COMMANDS {
        let mut sub = clap::Command::new(c.name)
            .about(c.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("key = value config file"));
        for k in c.keys {
            let help = match k.default {
                Some(d) if !d.is_empty() => format!("{} [default: {d}]", k.help),
                _ => k.help.to_string(),
            };
            sub = sub.arg(Arg::new(k.name).long(k.name).value_name("VALUE").allow_negative_numbers(true).help(help));
        }
        app = app.subcommand(sub);
    }
    app
}

/// Resolves the subcommand, its parameters and runs it.
fn dispatch(m: &ArgMatches) -> Result<(Outcome, PathBuf)> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let (name, config, overrides) = if name == "run" {
        let config = PathBuf::from(sub.get_one::<String>("config").expect("required"));
        let text = std::fs::read_to_string(&config)
            .map_err(|e| params::invalid("config", format!("cannot read {}: {e}", config.display())))?;
        let map = params::parse_config(&text, "config")?;
        let cmd = map.get("command").ok_or_else(|| params::invalid("command", "missing in config"))?.clone();
        let mut o = BTreeMap::new();
        if let Some(out) = sub.get_one::<String>("out") {
            o.insert("out".to_string(), out.clone());
        }
        (cmd, Some(config), o)
    } else {
        let c = commands::find(name).expect("registered");
        let o = c
            .keys
            .iter()
            .filter_map(|k| sub.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
            .collect();
        (name.to_string(), sub.get_one::<String>("config").map(PathBuf::from), o)
    };
    let cmd = commands::find(&name).ok_or_else(|| params::invalid("command", format!("unknown command {name:?}")))?;
    let params = Params::resolve(cmd.name, cmd.keys, config.as_deref(), overrides)?;
    let out = PathBuf::from(params.str("out"));
    let mut outcome = (cmd.run)(&params)?;
    // the output directory is left out so that reruns elsewhere compare equal
    let mut echoed = params.values().clone();
    echoed.remove("out");
    outcome.summary["params"] = json!(echoed);
    Ok((outcome, out))
}

fn write_outputs(out: &Path, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, body) in &outcome.files {
        std::fs::write(out.join(name), body).with_context(|| format!("writing {name}"))?;
    }
    let mut summary = serde_json::to_string_pretty(&outcome.summary)?;
    summary.push('\n');
    std::fs::write(out.join("summary.json"), &summary).context("writing summary.json")?;
    print!("{summary}");
    Ok(())
}

/// Exit code and JSON diagnostics for a failed run.
fn classify(e: &anyhow::Error) -> (u8, Value) {
    if let Some(v) = e.downcast_ref::<ValidationError>() {
        return (1, json!({"error": "validation", "field": v.field, "message": v.message}));
    }
    if let Some(l) = e.downcast_ref::<LabError>() {
        return match l {
            LabError::NonConvergence { iterations, residual } => (
                2,
                json!({"error": "non_convergence", "iterations": iterations, "residual": residual, "message": l.to_string()}),
            ),
            LabError::Degenerate(m) => (2, json!({"error": "degenerate", "message": m})),
            other => (1, json!({"error": "validation", "message": other.to_string()})),
        };
    }
    (1, json!({"error": "io", "message": format!("{e:#}")}))
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(&matches).and_then(|(outcome, out)| write_outputs(&out, &outcome)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (code, mut diag) = classify(&e);
            diag["schema"] = json!(format!("obstacle-lab/error/v{}", commands::SCHEMA_VERSION));
            eprintln!("error: {e:#}");
            println!("{}", serde_json::to_string_pretty(&diag).expect("json values serialize"));
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let v: anyhow::Error = params::invalid("gamma", "bad").into();
        assert_eq!(classify(&v).0, 1);
        let n: anyhow::Error = LabError::NonConvergence { iterations: 3, residual: 1.0 }.into();
        assert_eq!(classify(&n).0, 2);
        let d: anyhow::Error = LabError::Degenerate("H = 0".into()).into();
        assert_eq!(classify(&d).0, 2);
        let p: anyhow::Error = LabError::Precondition("r2".into()).into();
        assert_eq!(classify(&p).0, 1);
    }
}
