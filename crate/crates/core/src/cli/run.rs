use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::evolution::Solver;
use crate::experiments::{run_sweep, SweepKind};
use crate::resonance::{check_bound, sensitivity};
use crate::symbols::lemmas::SymbolLemmaReport;
use crate::symbols::SymbolTable;

use super::check::run_check;
use super::config::{kind_name, RunConfig};

pub const TOOL_NAME: &str = "ilw-limits";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Symbols,
    Resonance,
    Evolve,
    Converge(SweepKind),
    Check,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Symbols => "symbols".into(),
            Command::Resonance => "resonance".into(),
            Command::Evolve => "evolve".into(),
            Command::Converge(kind) => format!("converge-{}", kind_name(*kind)),
            Command::Check => "check".into(),
        }
    }
}

/// What a finished command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Hard failures of the invariant suite (empty for the other commands).
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub path: String,
    pub message: String,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn version_stamp() -> Value {
    json!({ "name": TOOL_NAME, "version": TOOL_VERSION })
}

/// Machine-readable failure list for stderr.
pub fn failure_document(command: Option<&Command>, failures: &[Failure]) -> String {
    let doc = json!({
        "tool": version_stamp(),
        "command": command.map(|c| c.name()),
        "status": "error",
        "failures": failures,
    });
    serde_json::to_string_pretty(&doc).expect("failure list serializes")
}

pub fn error_failures(e: &Error) -> Vec<Failure> {
    let (path, message) = match e {
        Error::Config { path, message } => (path.clone(), message.clone()),
        Error::InvalidParameter { name, reason } => (name.clone(), reason.clone()),
        other => (String::new(), other.to_string()),
    };
    vec![Failure { path, message }]
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn write_json(path: &Path, command: &Command, config: &RunConfig, result: impl Serialize) -> Result<()> {
    let doc = json!({
        "tool": version_stamp(),
        "command": command.name(),
        "config": config,
        "result": result,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_csv(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Output prefix: `--out`, then the config's `output`, then the command name.
pub fn output_prefix(command: &Command, config: &RunConfig, out: Option<&Path>) -> PathBuf {
    out.map(Path::to_path_buf)
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(command.name()))
}

/// Runs one command and writes its artifacts under `prefix`.
pub fn run(command: Command, config: &RunConfig, prefix: &Path) -> Result<Outcome> {
    let json_path = with_suffix(prefix, ".json");
    let mut files = vec![json_path.clone()];
    let mut failures = Vec::new();
    match command {
        Command::Symbols => {
            let s = &config.symbols;
            let table = SymbolTable::build(s.equation.to_spec()?, s.grid.to_grid()?)?;
            let report = SymbolLemmaReport::measure(&s.sampling)?;
            let csv = with_suffix(prefix, ".csv");
            write_csv(&csv, |w| table.write_csv(w))?;
            files.push(csv);
            write_json(&json_path, &command, config, json!({ "equation": table.spec(), "lemmas": report }))?;
        }
        Command::Resonance => {
            let r = &config.resonance;
            let mut reports = Vec::with_capacity(r.queries.len());
            let mut rows = Vec::with_capacity(r.queries.len());
            for (i, q) in r.queries.iter().enumerate() {
                let report = check_bound(q)?;
                let csv = with_suffix(prefix, &format!(".worst.{i:02}.csv"));
                write_csv(&csv, |w| report.write_worst_csv(w))?;
                files.push(csv);
                rows.push(sensitivity(q, &r.sensitivity.n0s, &r.sensitivity.muchs)?);
                reports.push(report);
            }
            write_json(&json_path, &command, config, json!({ "reports": reports, "sensitivity": rows }))?;
        }
        Command::Evolve => {
            let e = &config.evolve;
            let solver_config = e.solver_config(config.seed)?;
            let u0 = e.initial_data(config.seed)?;
            let traj = Solver::new(solver_config.clone())?.evolve(&u0)?;
            let csv = with_suffix(prefix, ".csv");
            write_csv(&csv, |w| traj.write_csv(w))?;
            files.push(csv);
            if e.write_snapshots {
                files.extend(traj.write_snapshots(prefix)?);
            }
            let result = json!({
                "run": {
                    "equation": solver_config.spec,
                    "dt": solver_config.dt,
                    "steps": solver_config.steps(),
                    "snapshot_stride": solver_config.snapshot_stride,
                    "padding": solver_config.padding,
                    "snapshots": traj.snapshots().len(),
                },
                "mean_drift": traj.mean_drift(),
                "l2_drift": traj.l2_drift(),
                "i2_drift": traj.i2_drift().map(|(p, c)| json!({ "printed": p, "corrected": c })),
                "blow_up": traj.blow_up,
            });
            write_json(&json_path, &command, config, result)?;
            if let Some(b) = traj.blow_up {
                failures.push(Failure {
                    path: "evolve".into(),
                    message: Error::BlowUp {
                        time: b.time,
                        last_healthy: b.last_healthy,
                    }
                    .to_string(),
                });
            }
        }
        Command::Converge(kind) => {
            let sweep = config.converge.seeded(kind, config.seed);
            let report = run_sweep(&sweep)?;
            let csv = with_suffix(prefix, ".csv");
            write_csv(&csv, |w| report.write_csv(w))?;
            files.push(csv);
            write_json(&json_path, &command, config, &report)?;
        }
        Command::Check => {
            let summary = run_check(config)?;
            failures = summary.hard_failures();
            write_json(&json_path, &command, config, &summary)?;
        }
    }
    Ok(Outcome { files, failures })
}
