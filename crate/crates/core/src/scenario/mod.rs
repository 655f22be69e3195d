//! Scenario configuration, presets, time-grid sweeps and output.

mod config;
mod emit;
mod presets;
mod revivals;
mod run;

pub use config::{
    FieldSpec, NamedNonlinearity, NonlinearitySpec, OptionsSpec, OutputFormat, OutputSpec,
    ScenarioConfig, TimeSpec, HBAR_OVER_KB,
};
pub use emit::{emit, read_csv, read_json, write_csv, write_json, Document, Metadata, CSV_COLUMNS};
pub use presets::{preset, preset_names, preset_with_overrides};
pub use revivals::{
    autocorrelation_peak, envelope, measure_revivals, measure_revivals_series, Revival,
    DEFAULT_THRESHOLD, MIN_SAMPLES,
};
pub use run::{run_scenario, Diagnostics, ScenarioRun, ORACLE_DEVIATION_LIMIT};
