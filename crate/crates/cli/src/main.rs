use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hourscap_core::calibrate::{calibrate_wedges, tune_reference};
use hourscap_core::config::{load_config, ConfigDocument, ConfigError, OutputFormat};
use hourscap_core::metrics::{decompose_with_pair, metrics_report, Decomposition};
use hourscap_core::output::{fmt_f64, scenario_csv, sweep_csv, to_json, OutputDir, RunManifest};
use hourscap_core::plot::sweep_svg;
use hourscap_core::sweep::run_sweep;
use hourscap_core::{run_pair, run_scenario, ModelError};

#[derive(Parser, Debug)]
#[command(name = "hourscap", version, about = "Simulate a cap on formal weekly hours and its TFP requirement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration document (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides `output.format` in the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    plot: bool,
    /// Worker threads for sweeps and calibration; 0 picks the core count.
    #[arg(long, global = true, env = "HOURSCAP_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Recorded in the manifest; the model itself never draws random numbers.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Run one policy path (`policy`, or the cap path of `scenario`).
    Simulate,
    /// Run baseline and cap scenarios and compare them.
    Pair,
    /// Evaluate the `sweep` grid.
    Sweep,
    /// Solve wedges for the target informality shares, then tune to headline targets.
    Calibrate,
    /// Split the cap effect into the fatigue channel and the rest.
    Decompose,
    /// Pair metrics with the decomposition, printed as a summary table.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Pair => "pair",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Decompose => "decompose",
            Command::Report => "report",
        }
    }
}

enum Failure {
    Usage(String),
    Config(ConfigError),
    Model(ModelError),
    Io(std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Model(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Config(e) => write!(f, "{e}"),
            Failure::Model(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Model(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let path = cli.common.config.as_ref().ok_or_else(|| {
        Failure::Usage(format!("`{}` requires --config <PATH>", cli.command.name()))
    })?;
    let doc = load_config(path)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| execute(cli, &doc))
}

fn execute(cli: &Cli, doc: &ConfigDocument) -> Result<(), Failure> {
    let format: OutputFormat = cli.common.format.map(Into::into).unwrap_or(doc.output.format);
    let plot = cli.common.plot || doc.output.plot;
    let mut out = OutputDir::create(&cli.common.out)?;
    out.write("config.json", &doc.echo())?;
    let params = &doc.economy;

    match cli.command {
        Command::Simulate => {
            let result = run_scenario(params, &doc.simulate_policy())?;
            if !result.negative_consumption.is_empty() {
                log::warn!("consumption negative in periods {:?}", result.negative_consumption);
            }
            if format.csv() {
                out.write("scenario.csv", &scenario_csv("scenario", &result))?;
            }
            if format.json() {
                out.write("scenario.json", &to_json(&result))?;
            }
        }
        Command::Pair => {
            let pair = run_pair(params, &doc.scenario)?;
            let report = metrics_report(&pair, None)?;
            if format.csv() {
                out.write("baseline.csv", &scenario_csv("baseline", &pair.baseline))?;
                out.write("cap.csv", &scenario_csv("cap", &pair.cap))?;
            }
            if format.json() {
                out.write("baseline.json", &to_json(&pair.baseline))?;
                out.write("cap.json", &to_json(&pair.cap))?;
            }
            out.write("metrics.json", &to_json(&report))?;
        }
        Command::Sweep => {
            let spec = doc
                .sweep
                .as_ref()
                .ok_or_else(|| ModelError::invalid("sweep", "the `sweep` command needs a `sweep` section"))?;
            let result = run_sweep(params, spec)?;
            let stem = spec.kind.as_str();
            if format.csv() {
                out.write(&format!("{stem}.csv"), &sweep_csv(&result))?;
            }
            if format.json() {
                out.write(&format!("{stem}.json"), &to_json(&result))?;
            }
            if plot {
                out.write(&format!("{stem}.svg"), &sweep_svg(&result))?;
            }
            if result.missing() > 0 {
                log::warn!("{} of {} cells have missing values", result.missing(), result.cells.len());
            }
        }
        Command::Calibrate => {
            let section = doc.calibration.as_ref().ok_or_else(|| {
                ModelError::invalid("calibration", "the `calibrate` command needs a `calibration` section")
            })?;
            let wedged = calibrate_wedges(params, &section.targets.informality_share, doc.scenario.hbar_base)?;
            let report = tune_reference(&wedged, &section.targets, &doc.scenario, &section.tune)?;
            if !report.converged {
                log::warn!("tuning stopped after {} rounds without converging", report.iterations);
            }
            let mut calibrated = doc.clone();
            calibrated.economy = report.params.clone();
            out.write("calibrated.json", &calibrated.echo())?;
            out.write("calibration_report.json", &to_json(&report))?;
        }
        Command::Decompose | Command::Report => {
            let pair = run_pair(params, &doc.scenario)?;
            let decomposition = decompose_with_pair(params, &pair)?;
            if format.csv() {
                out.write("decomposition.csv", &decomposition_csv(&decomposition.gdp, &decomposition.gdp_per_hour))?;
            }
            let report = metrics_report(&pair, Some(decomposition))?;
            if cli.command == Command::Report {
                out.write("report.json", &to_json(&report))?;
                print!("{}", summary(&report));
            } else {
                out.write("decomposition.json", &to_json(&decomposition))?;
            }
        }
    }

    let manifest = RunManifest {
        config_hash: doc.hash(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: timestamp(),
        command: cli.command.name().to_string(),
        outputs: Vec::new(),
        seed: cli.common.seed,
    };
    out.finish(manifest)?;
    Ok(())
}

fn decomposition_csv(gdp: &Decomposition, gdp_per_hour: &Decomposition) -> String {
    let mut s = String::from("measure,fatigue_pct,other_pct,total_pct\n");
    for (name, d) in [("gdp", gdp), ("gdp_per_hour", gdp_per_hour)] {
        s.push_str(&format!(
            "{name},{},{},{}\n",
            fmt_f64(d.fatigue_pct),
            fmt_f64(d.other_pct),
            fmt_f64(d.total_pct)
        ));
    }
    s
}

fn summary(r: &hourscap_core::metrics::MetricsReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: f64, unit: &str| s.push_str(&format!("{k:<28}{v:>10.3} {unit}\n"));
    line("required TFP gain", r.a_req_terminal_pct, "%");
    line("output", r.dy_pct, "%");
    line("consumption", r.dc_pct, "%");
    line("informality", r.d_informality_pp, "p.p.");
    line("output per hour", r.d_gdp_per_hour_pct, "%");
    for (g, m) in r.per_group.iter() {
        line(&format!("[{g}] required TFP gain"), m.a_req_pct, "%");
        line(&format!("[{g}] output"), m.dy_pct, "%");
        line(&format!("[{g}] informality"), m.d_informality_pp, "p.p.");
    }
    if let Some(d) = &r.decomposition {
        line("output: fatigue channel", d.gdp.fatigue_pct, "p.p.");
        line("output: other channels", d.gdp.other_pct, "p.p.");
        line("per hour: fatigue channel", d.gdp_per_hour.fatigue_pct, "p.p.");
        line("per hour: other channels", d.gdp_per_hour.other_pct, "p.p.");
    }
    if !r.settled {
        s.push_str("note: not settled by the terminal period\n");
    }
    s
}

/// UTC now, or `SOURCE_DATE_EPOCH` when set so reruns can be byte-identical.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
