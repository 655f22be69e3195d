use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use jcm_core::scenario::{
    self, measure_revivals_series, preset_with_overrides, run_scenario, OutputFormat,
    ScenarioConfig, ScenarioRun, DEFAULT_THRESHOLD,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_ORACLE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "jcm",
    version,
    about = "Deformed k-photon Jaynes-Cummings scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its observable time series.
    #[command(group(ArgGroup::new("source").required(true).multiple(true).args(["config", "preset"])))]
    Simulate {
        /// TOML scenario. With --preset, its keys override the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Output file; stdout when neither this nor the config names one.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Compare against the Runge-Kutta oracle; exit 3 if it disagrees.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        counter_rotating_diagnostic: bool,
    },
    /// Print the names of the built-in presets.
    ListPresets,
    /// Detect collapse/revival episodes in the W column of a CSV series.
    Revivals {
        #[arg(long)]
        input: PathBuf,
        /// Envelope fraction of the initial amplitude counted as collapsed.
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn load_config(config: Option<&Path>, preset: Option<&str>) -> Result<ScenarioConfig> {
    let text = config
        .map(|p| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let c = match (preset, text) {
        (Some(name), text) => preset_with_overrides(name, text.as_deref().unwrap_or(""))?,
        (None, Some(text)) => ScenarioConfig::from_toml_str(&text)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    Ok(c)
}

fn write_run(run: &ScenarioRun, format: OutputFormat, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            scenario::emit(run, format, p).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = io::stdout().lock();
            match format {
                OutputFormat::Csv => scenario::write_csv(&run.records, &mut out)?,
                OutputFormat::Json => scenario::write_json(run, &mut out)?,
            }
            out.flush()?;
            Ok(())
        }
    }
}

fn simulate(
    config: Option<PathBuf>,
    preset: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
    oracle: bool,
    counter_rotating: bool,
) -> Result<ExitCode> {
    let mut c = load_config(config.as_deref(), preset.as_deref())?;
    c.options.oracle_check |= oracle;
    c.options.counter_rotating_diagnostic |= counter_rotating;
    if let Some(f) = format {
        c.output.format = f.into();
    }
    if output.is_some() {
        c.output.path = output;
    }

    let run = run_scenario(&c)?;
    write_run(&run, c.output.format, c.output.path.as_deref())?;

    let d = &run.diagnostics;
    eprintln!(
        "{}: {} samples, n_cut {}, captured mass {:.15}, max norm drift {:.2e}",
        c.name.as_deref().unwrap_or("scenario"),
        run.records.len(),
        d.n_cut,
        d.captured_mass,
        d.max_norm_drift
    );
    if let Some(dev) = d.oracle_max_deviation {
        eprintln!("oracle: max amplitude deviation {dev:.3e}");
    }
    if let Some(diff) = d.counter_rotating_max_w_difference {
        eprintln!("counter-rotating terms: max |delta W| {diff:.3e}");
    }
    if run.oracle_exceeded() {
        eprintln!(
            "error: oracle deviation exceeds {:e}",
            scenario::ORACLE_DEVIATION_LIMIT
        );
        return Ok(ExitCode::from(EXIT_ORACLE));
    }
    Ok(ExitCode::SUCCESS)
}

fn revivals(input: &Path, threshold: f64) -> Result<ExitCode> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let records = scenario::read_csv(BufReader::new(file))
        .with_context(|| format!("reading {}", input.display()))?;
    if records.len() < scenario::MIN_SAMPLES {
        eprintln!(
            "warning: {} samples, at least {} needed for revival detection",
            records.len(),
            scenario::MIN_SAMPLES
        );
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let w: Vec<f64> = records.iter().map(|r| r.w).collect();
    let mut out = io::stdout().lock();
    writeln!(out, "t_center,envelope_amplitude")?;
    for r in measure_revivals_series(&t, &w, threshold) {
        writeln!(out, "{},{}", r.t_center, r.envelope_amplitude)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn list_presets() -> Result<ExitCode> {
    let mut out = io::stdout().lock();
    for name in scenario::preset_names() {
        writeln!(out, "{name}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<jcm_core::Error>() {
            return match e {
                jcm_core::Error::Io(_) => EXIT_IO,
                jcm_core::Error::Csv(c) if c.is_io_error() => EXIT_IO,
                jcm_core::Error::Csv(_) | jcm_core::Error::Json(_) => EXIT_VALIDATION,
                e if e.is_validation() => EXIT_VALIDATION,
                _ => EXIT_FAILURE,
            };
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            preset,
            output,
            format,
            oracle,
            counter_rotating_diagnostic,
        } => simulate(
            config,
            preset,
            output,
            format,
            oracle,
            counter_rotating_diagnostic,
        ),
        Command::ListPresets => list_presets(),
        Command::Revivals { input, threshold } => revivals(&input, threshold),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err:#}");
        ExitCode::from(exit_code(&err))
    })
}
