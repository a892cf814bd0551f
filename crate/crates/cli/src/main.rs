mod args;
mod error;
mod output;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use selout::datasets::read_table;
use selout::detection::{default_dffits_threshold, DetectionConfig, DetectionMethod};
use selout::inference::{analyze, AnalysisOptions, SigmaMode};
use selout::model::validate_dataset;
use selout::simulation::{run_coverage, run_power, run_uniformity, PowerTarget, SimConfig, SimReport, UniformityConfig};

use args::{Cli, Command, Experiment, FitArgs, Format, SimArgs, Target};
use error::{CliError, Result};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_method(s: &str) -> Result<DetectionMethod> {
    s.parse().map_err(|e: selout::Error| config_err(e.to_string()))
}

fn cmd_fit(a: &FitArgs) -> Result<String> {
    let method = parse_method(&a.detect)?;
    let sigma: SigmaMode = a.sigma.parse().map_err(|e: selout::Error| config_err(e.to_string()))?;
    if a.ci && sigma == SigmaMode::Exact {
        return Err(config_err("--ci needs a σ value or --sigma est; the exact mode gives no intervals"));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(config_err(format!("--alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let file = File::open(&a.data).map_err(|source| CliError::Read { path: a.data.display().to_string(), source })?;
    let table = read_table(file)?;
    let data = validate_dataset(&table, &a.response, !a.no_intercept)?;
    let cutoff = match (a.cutoff, method) {
        (Some(c), _) => c,
        (None, DetectionMethod::Cooks) => 4.0,
        (None, DetectionMethod::Dffits) => default_dffits_threshold(data.n(), data.p()),
        (None, DetectionMethod::Softipod) => return Err(config_err("soft-IPOD needs an explicit --cutoff")),
    };
    let opts = AnalysisOptions { detection: DetectionConfig::new(method, cutoff)?, sigma, alpha: a.alpha };
    let report = analyze(&data, &opts)?;
    Ok(match a.format {
        Format::Table => output::fit_table(&report),
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    })
}

fn sim_config(a: &SimArgs) -> Result<SimConfig> {
    Ok(SimConfig {
        n: a.n,
        p: a.p,
        s: a.s,
        method: parse_method(&a.detect)?,
        cutoff: a.cutoff,
        sigma: a.noise,
        alpha: a.alpha,
        reps: a.reps,
        seed: a.seed,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source| CliError::Write { path: path.display().to_string(), source };
    File::create(path).map_err(err)?.write_all(bytes).map_err(err)
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes `<out>.json` and `<out>.csv`, then returns the console summary.
fn emit(report: &SimReport, out: Option<&PathBuf>, format: Format) -> Result<String> {
    let json = report.to_json() + "\n";
    let prefix = out.cloned().unwrap_or_else(|| PathBuf::from(&report.kind));
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    write_file(&with_extension(&prefix, "json"), json.as_bytes())?;
    write_file(&with_extension(&prefix, "csv"), &csv)?;
    Ok(match format {
        Format::Table => output::sim_table(report),
        Format::Json => json,
    })
}

fn cmd_simulate(e: &Experiment) -> Result<String> {
    match e {
        Experiment::Coverage(a) => emit(&run_coverage(&sim_config(a)?)?, a.out.as_ref(), a.format),
        Experiment::Power { sim, target, beta1 } => {
            let target = match target {
                Target::Coef => PowerTarget::Coefficient,
                Target::Group => PowerTarget::Group,
            };
            emit(&run_power(&sim_config(sim)?, target, beta1)?, sim.out.as_ref(), sim.format)
        }
        Experiment::Uniformity { n, p, detect, cutoff, shift, reps, pilot, seed, out, format } => {
            let cfg = UniformityConfig {
                n: *n,
                p: *p,
                method: parse_method(detect)?,
                cutoff: *cutoff,
                shift: *shift,
                accepted: *reps,
                pilot: *pilot,
                seed: *seed,
                ..UniformityConfig::default()
            };
            emit(&run_uniformity(&cfg)?, out.as_ref(), *format)
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(config_err("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| config_err(format!("cannot start thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate { experiment } => cmd_simulate(experiment),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
