#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod context;

use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use context::{write_file, Context, InputDigest};

const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_ERROR: u8 = 1;
const DEFAULT_RECUR_RADII: [usize; 4] = [2, 4, 8, 16];

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'static str,
    config: &'a Cli,
    inputs: BTreeMap<String, InputDigest>,
    result: serde_json::Value,
}

fn validate(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if !(g.tol_solver > 0.0) {
        bail!("--tol-solver must be positive");
    }
    if g.radii.windows(2).any(|w| w[0] >= w[1]) {
        bail!("--radii must be strictly increasing");
    }
    let tolerances = match &cli.command {
        Command::Royden(a) => vec![a.stab_tol],
        Command::Packing(a) => vec![a.stab_tol, a.rank_tol, a.decay_ratio]
            .into_iter()
            .chain(a.tangency_tol)
            .collect(),
        Command::Paths(a) => a.eps.into_iter().collect(),
        _ => vec![],
    };
    if tolerances.iter().any(|t| !(*t > 0.0)) {
        bail!("tolerances must be positive");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    validate(cli)?;
    let mut ctx = Context::new(&cli.global);
    let outcome = match &cli.command {
        Command::Gen(a) => commands::gen(&mut ctx, a),
        Command::Recur(a) => commands::recur(&mut ctx, a),
        Command::Capacity(a) => commands::capacity(&mut ctx, a),
        Command::Royden(a) => commands::royden(&mut ctx, a),
        Command::Metric(a) => commands::metric(&mut ctx, a),
        Command::Paths(a) => commands::paths(&mut ctx, a),
        Command::Packing(a) => commands::packing(&mut ctx, a),
    }?;
    let text = match (outcome.raw, outcome.csv) {
        (Some(raw), _) => raw,
        (None, Some(csv)) if cli.global.csv => csv,
        _ => {
            let envelope = Envelope {
                command: cli.command.name(),
                config: cli,
                inputs: ctx.inputs,
                result: outcome.result,
            };
            let mut s = serde_json::to_string_pretty(&envelope)?;
            s.push('\n');
            s
        }
    };
    let out = match &cli.command {
        Command::Packing(a) => a.report.as_ref().or(cli.global.out.as_ref()),
        _ => cli.global.out.as_ref(),
    };
    match out {
        Some(path) => write_file(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(outcome.decided)
}

fn main() -> ExitCode {
    let mut cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    if matches!(cli.command, Command::Recur(_)) && cli.global.radii.is_empty() {
        cli.global.radii = DEFAULT_RECUR_RADII.to_vec();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INCONCLUSIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
