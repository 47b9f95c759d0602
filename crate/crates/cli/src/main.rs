mod args;
mod config;
mod output;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, FormatArg};
use config::RunConfig;
use output::Recorded;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "DUFFING_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, presets, parameters or paths: exit 2.
    Validation(String),
    /// The computation itself failed: exit 1.
    Numerical(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<quintic_duffing::Error> for CliError {
    fn from(e: quintic_duffing::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

fn emit(line: Value) {
    println!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) => e.exit(),
        Err(e) => {
            let _ = e.print();
            emit(json!({ "status": "error", "kind": "validation", "message": e.kind().to_string() }));
            return ExitCode::from(2);
        }
    };
    match run_cli(&cli) {
        Ok(line) => {
            emit(line);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            emit(json!({ "status": "error", "kind": e.kind(), "message": e.message() }));
            ExitCode::from(e.exit_code())
        }
    }
}

fn run_cli(cli: &Cli) -> Result<Value, CliError> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let (rec, default_path) = match &cli.command {
        Command::Rerun(r) => {
            let text = fs::read_to_string(&r.file).map_err(|e| CliError::Validation(format!("{}: {e}", r.file.display())))?;
            let rec = output::read_recorded(&text)?;
            if cli.format.is_some_and(|f| f != rec.format) {
                return Err(CliError::Validation("--format conflicts with the recorded format".into()));
            }
            rec.run.validate()?;
            let stem = r.file.file_stem().and_then(|s| s.to_str()).unwrap_or("rerun");
            let name = format!("{stem}.rerun.{}", rec.format.extension());
            let path = r.file.parent().map_or_else(|| PathBuf::from(&name), |d| d.join(&name));
            (rec, path)
        }
        cmd => {
            let run = resolve(cmd)?;
            let format = cli.format.unwrap_or(FormatArg::Csv);
            let name = format!("{}.{}", run.preset().unwrap_or(run.name()), format.extension());
            let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
            (Recorded { format, run }, dir.join(name))
        }
    };
    if cli.gnuplot && rec.format != FormatArg::Csv {
        return Err(CliError::Validation("--gnuplot needs CSV output".into()));
    }
    let path = match &cli.out {
        Some(p) if p.is_dir() => p.join(default_path.file_name().expect("file name")),
        Some(p) => p.clone(),
        None => default_path,
    };
    let script = cli.gnuplot.then(|| path.with_extension("gp"));

    // Fail on an unwritable destination before spending time on the run.
    let targets: Vec<&Path> = std::iter::once(path.as_path()).chain(script.as_deref()).collect();
    for t in &targets {
        fs::write(t, b"").map_err(|e| CliError::Validation(format!("cannot write {}: {e}", t.display())))?;
    }
    let result = write_outputs(&rec, &path, script.as_deref());
    if result.is_err() {
        for t in &targets {
            let _ = fs::remove_file(t);
        }
    }
    result
}

fn write_outputs(rec: &Recorded, path: &Path, script: Option<&Path>) -> Result<Value, CliError> {
    let out = run::execute(&rec.run)?;
    let text = output::render(rec, &out)?;
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if let Some(gp) = script {
        let data = path.file_name().and_then(|s| s.to_str()).unwrap_or_default();
        fs::write(gp, output::gnuplot_script(rec, data, &out.plot)).map_err(|e| CliError::Io(format!("{}: {e}", gp.display())))?;
    }
    let mut line = json!({
        "status": "ok",
        "command": rec.run.name(),
        "output": path.display().to_string(),
        "rows": out.table.rows.len(),
    });
    if let Some(gp) = script {
        line["gnuplot"] = json!(gp.display().to_string());
    }
    line["summary"] = Value::Object(out.summary);
    Ok(line)
}

fn resolve(cmd: &Command) -> Result<RunConfig, CliError> {
    match cmd {
        Command::Simulate(a) => config::resolve_simulate(a),
        Command::Exact(a) => config::resolve_exact(a),
        Command::Kbm(a) => config::resolve_kbm(a),
        Command::Melnikov(a) => config::resolve_melnikov(a),
        Command::Poincare(a) => config::resolve_poincare(a),
        Command::Scan(a) => config::resolve_scan(a),
        Command::Bifurcate(a) => config::resolve_bifurcate(a),
        Command::Control(a) => config::resolve_control(a),
        Command::Sde(a) => config::resolve_sde(a),
        Command::Rerun(_) => unreachable!("handled by the caller"),
    }
}
