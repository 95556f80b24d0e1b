//! `qobserver` runs the observer experiments and writes CSV data, gnuplot
//! scripts and a JSON summary per scenario.
//!
//! Exit status: 0 when every check passes, 1 for invalid input, 2 when a
//! residual check fails, 3 on I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qobserver::experiment::{
    self, ArtifactBundle, ExperimentError, Overrides, ScenarioConfig, ScenarioKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Which {
    OneMode,
    MeasurementSequence,
    Custom,
    All,
}

#[derive(Debug, Parser)]
#[command(
    name = "qobserver",
    version,
    about = "Direct-coupling quantum observer experiments"
)]
struct Args {
    /// Scenario to run; `all` runs the two built-in scenarios in parallel.
    #[arg(long, value_enum)]
    scenario: Option<Which>,

    /// JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    t_end: Option<f64>,

    #[arg(long)]
    dt: Option<f64>,

    /// Output root; each scenario writes into its own subdirectory.
    #[arg(long, env = "QOBSERVER_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Residual tolerance for conservation and observer checks.
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Input(String),
    Residual,
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Residual => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn kind_of(w: Which) -> Option<ScenarioKind> {
    match w {
        Which::OneMode => Some(ScenarioKind::OneMode),
        Which::MeasurementSequence => Some(ScenarioKind::MeasurementSequence),
        Which::Custom => Some(ScenarioKind::Custom),
        Which::All => None,
    }
}

fn load(args: &Args) -> Result<Vec<ScenarioConfig>, Failure> {
    let base = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            Some(ScenarioConfig::from_json(&text).map_err(|e| Failure::Input(e.to_string()))?)
        }
        None => None,
    };
    let overrides = Overrides {
        scenario: None,
        t_end: args.t_end,
        dt: args.dt,
        out_dir: None,
        tol: args.tol,
    };
    let which = args.scenario.unwrap_or(match &base {
        Some(_) => Which::Custom,
        None => Which::All,
    });
    let kinds = match kind_of(which) {
        Some(k) => vec![k],
        None => vec![ScenarioKind::OneMode, ScenarioKind::MeasurementSequence],
    };
    let mut configs = Vec::new();
    for kind in kinds {
        let mut cfg = match (&base, which) {
            // An explicit scenario on the command line keeps the file's
            // matrices but switches the run.
            (Some(b), Which::All) if b.scenario != kind => {
                let mut c = ScenarioConfig::new(kind);
                c.out_dir = b.out_dir.clone();
                c
            }
            (Some(b), _) => {
                let mut c = b.clone();
                c.scenario = kind;
                c
            }
            (None, _) => ScenarioConfig::new(kind),
        };
        cfg.apply(&overrides);
        configs.push(cfg);
    }
    Ok(configs)
}

fn out_root(args: &Args, cfg: &ScenarioConfig) -> PathBuf {
    args.out_dir
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn report(bundle: &ArtifactBundle, dir: &Path) {
    let s = &bundle.summary;
    for c in &s.checks {
        println!(
            "{:<22} {:<44} {} {:.3e} {} {:.3e}",
            s.scenario,
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.value,
            c.comparison,
            c.threshold
        );
    }
    println!(
        "{}: {} ({} files in {})",
        s.scenario,
        if s.passed { "passed" } else { "FAILED" },
        s.files.len() + 1,
        dir.display()
    );
}

fn run_one(args: &Args, cfg: &ScenarioConfig) -> Result<(ArtifactBundle, PathBuf), Failure> {
    let bundle = experiment::run(cfg)?;
    let dir = out_root(args, cfg).join(cfg.scenario.name());
    bundle
        .write_to(&dir)
        .map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    Ok((bundle, dir))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let configs = match load(&args) {
        Ok(c) => c,
        Err(f) => return fail(f),
    };
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(|| run_one(&args, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });

    let mut worst: Option<Failure> = None;
    for r in results {
        match r {
            Ok((bundle, dir)) => {
                report(&bundle, &dir);
                if !bundle.summary.passed && worst.as_ref().is_none_or(|w| w.code() < 2) {
                    worst = Some(Failure::Residual);
                }
            }
            Err(f) => {
                if worst.as_ref().is_none_or(|w| w.code() < f.code()) {
                    worst = Some(f);
                }
            }
        }
    }
    match worst {
        None => ExitCode::SUCCESS,
        Some(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    match &f {
        Failure::Input(m) => eprintln!("error: {m}"),
        Failure::Io(m) => eprintln!("I/O error: {m}"),
        Failure::Residual => eprintln!("error: residual checks failed"),
    }
    ExitCode::from(f.code())
}
