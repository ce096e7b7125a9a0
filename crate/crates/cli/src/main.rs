use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use zealot_core::harness::{self, ExperimentConfig, Kind};

#[derive(Parser)]
#[command(name = "zealot", version, about = "Zealot voter model and COBRA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward zealot voter model replicas.
    SimulateForward(Common),
    /// COBRA (dual) replicas.
    SimulateDual(Common),
    /// Randomised pathwise duality and additivity checks.
    CheckDuality(Common),
    /// Threshold report for a tree and pick distribution, or nu(0) for a degree distribution.
    Thresholds(Common),
    /// nu(0) over a q3 grid on {3, 4} trees.
    ScanNu0(Common),
    /// p_c as a function of mu.
    ScanPc(Common),
    /// Recompute the reference nu(0) table and report discrepancies.
    #[command(name = "table-43")]
    Table43(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// CSV output path; the JSON summary goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run a sweep, e.g. `q3=0.80,0.81,0.82`.
    #[arg(long, value_name = "AXIS=V1,V2,..")]
    sweep: Option<String>,
}

impl Command {
    fn split(self) -> (Kind, Common) {
        match self {
            Command::SimulateForward(c) => (Kind::Forward, c),
            Command::SimulateDual(c) => (Kind::Cobra, c),
            Command::CheckDuality(c) => (Kind::DualityCheck, c),
            Command::Thresholds(c) => (Kind::Thresholds, c),
            Command::ScanNu0(c) => (Kind::Nu0Scan, c),
            Command::ScanPc(c) => (Kind::PcScan, c),
            Command::Table43(c) => (Kind::Table43, c),
        }
    }
}

fn load_config(kind: Kind, args: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let c = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
            if c.kind != kind {
                bail!(zealot_core::Error::Config(format!(
                    "config kind is {} but the subcommand runs {}",
                    c.kind.name(),
                    kind.name()
                )));
            }
            c
        }
        None => ExperimentConfig::new(kind, 0),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.replicas.is_some() {
        config.replicas = args.replicas;
    }
    if args.horizon.is_some() {
        config.horizon = args.horizon;
    }
    if args.out.is_some() {
        config.output = args.out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn parse_sweep(spec: &str) -> anyhow::Result<(String, Vec<f64>)> {
    let (axis, values) = spec.split_once('=').context("sweep must look like AXIS=V1,V2,..")?;
    let values = values
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad sweep value `{v}`")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok((axis.trim().to_string(), values))
}

fn execute(kind: Kind, args: Common) -> anyhow::Result<()> {
    let config = load_config(kind, &args)?;
    let out = config.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    if let Some(spec) = &args.sweep {
        let (axis, values) = parse_sweep(spec)?;
        let cells = harness::sweep(&config, &axis, &values)?;
        harness::write_atomic(&out, harness::sweep_csv(&axis, &cells).as_bytes())?;
        let doc = serde_json::json!({
            "config": config,
            "config_digest": config.digest(),
            "axis": axis,
            "cells": cells,
        });
        let json = harness::summary_path(&out);
        harness::write_atomic(&json, serde_json::to_string_pretty(&doc)?.as_bytes())?;
        report_paths(&out, &json);
        return Ok(());
    }
    let result = harness::run(&config)?;
    let json = harness::write_outputs(&config, &result, &out)?;
    for r in &result.records {
        let flags = if r.flags.is_empty() { String::new() } else { format!("  [{}]", r.flags.join(", ")) };
        match r.value.half_width() {
            Some(hw) => println!("{} = {} +- {}{flags}", r.metric, r.value.point(), hw),
            None => println!("{} = {}{flags}", r.metric, r.value.point()),
        }
    }
    report_paths(&out, &json);
    Ok(())
}

fn report_paths(csv: &Path, json: &Path) {
    println!("wrote {} and {}", csv.display(), json.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.downcast_ref::<zealot_core::Error>().map_or("error", |e| e.code());
            eprintln!("{}", serde_json::json!({ "error": code, "message": format!("{e:#}") }));
            ExitCode::from(if code == "config" { 2 } else { 1 })
        }
    }
}
