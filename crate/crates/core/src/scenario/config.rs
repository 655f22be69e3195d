use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::field::{self, FieldKind, PhotonDistribution, DEFAULT_TAIL_EPS};
use crate::nonlinearity::Nonlinearity;

/// `hbar / k_B` in kelvin seconds.
pub const HBAR_OVER_KB: f64 = 7.638_232_577_577_646e-12;

/// A complete, validated description of one simulation.
///
/// ```toml
/// nonlinearity = "sqrt_n"
///
/// [model]
/// k = 1
/// gamma = 1.0
/// mu = 0.1
///
/// [field]
/// kind = "coherent"
/// nbar = 25.0
///
/// [time]
/// t_end = 50.0
/// samples = 2000
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelParams,
    #[serde(default)]
    pub nonlinearity: NonlinearitySpec,
    pub field: FieldSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub options: OptionsSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedNonlinearity {
    Identity,
    SqrtN,
}

/// `"identity"`, `"sqrt_n"` or `{ table = [f(1), f(2), ...] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonlinearitySpec {
    Named(NamedNonlinearity),
    Table { table: Vec<f64> },
}

impl Default for NonlinearitySpec {
    fn default() -> Self {
        NonlinearitySpec::Named(NamedNonlinearity::Identity)
    }
}

impl NonlinearitySpec {
    pub fn build(&self) -> Nonlinearity {
        match self {
            NonlinearitySpec::Named(NamedNonlinearity::Identity) => Nonlinearity::identity(),
            NonlinearitySpec::Named(NamedNonlinearity::SqrtN) => Nonlinearity::sqrt_n(),
            NonlinearitySpec::Table { table } => Nonlinearity::from_table(table.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub kind: FieldKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    /// Thermal fields only: temperature in kelvin, used with `frequency`
    /// (angular, rad/s) when `nbar` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default = "default_hbar_over_kb")]
    pub hbar_over_kb: f64,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
}

fn default_hbar_over_kb() -> f64 {
    HBAR_OVER_KB
}

fn default_tail_eps() -> f64 {
    DEFAULT_TAIL_EPS
}

impl FieldSpec {
    pub fn with_nbar(kind: FieldKind, nbar: f64) -> Self {
        FieldSpec {
            kind,
            nbar: Some(nbar),
            temperature: None,
            frequency: None,
            hbar_over_kb: HBAR_OVER_KB,
            tail_eps: DEFAULT_TAIL_EPS,
        }
    }

    /// Mean photon number, converting from temperature if needed.
    pub fn resolved_nbar(&self) -> Result<f64> {
        match (self.nbar, self.temperature, self.frequency) {
            (Some(_), Some(_), _) => Err(Error::Validation(
                "field: give either nbar or temperature, not both".into(),
            )),
            (Some(nbar), None, _) => Ok(nbar),
            (None, Some(t), Some(freq)) if self.kind == FieldKind::Thermal => {
                field::thermal_nbar_from_temperature(freq, t, self.hbar_over_kb)
            }
            (None, Some(_), None) => Err(Error::Validation(
                "field: temperature requires frequency".into(),
            )),
            (None, Some(_), Some(_)) => Err(Error::Validation(
                "field: temperature is only meaningful for a thermal field".into(),
            )),
            (None, None, _) => Err(Error::Validation("field: nbar is required".into())),
        }
    }

    pub fn distribution(&self, k: usize) -> Result<PhotonDistribution> {
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return Err(Error::Validation(format!(
                "field.tail_eps must lie in (0, 1), got {}",
                self.tail_eps
            )));
        }
        PhotonDistribution::new(self.kind, self.resolved_nbar()?, self.tail_eps, k)
    }
}

/// Output grid in scaled time `gamma t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

impl TimeSpec {
    /// The scaled sample times, evenly spaced and including both ends.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.t_end - self.t_start) / (self.samples - 1) as f64;
        (0..self.samples)
            .map(|j| {
                if j + 1 == self.samples {
                    self.t_end
                } else {
                    self.t_start + j as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default)]
    pub oracle_check: bool,
    #[serde(default)]
    pub counter_rotating_diagnostic: bool,
    /// Report `rho_eg` with the free-evolution phase `exp(-i nu k t)`.
    #[serde(default)]
    pub free_phase_on_coherence: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ScenarioConfig {
    /// Parse and validate a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_value(value: toml::Value) -> Result<Self> {
        let config: ScenarioConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.model.gamma > 0.0) {
            return Err(Error::Validation(
                "model.gamma must be positive: time is reported as gamma t".into(),
            ));
        }
        let t = &self.time;
        if t.samples < 2 {
            return Err(Error::Validation(format!(
                "time.samples must be at least 2, got {}",
                t.samples
            )));
        }
        if !(t.t_start >= 0.0 && t.t_end > t.t_start && t.t_end.is_finite()) {
            return Err(Error::Validation(format!(
                "time grid needs 0 <= t_start < t_end, got [{}, {}]",
                t.t_start, t.t_end
            )));
        }
        if let NonlinearitySpec::Table { table } = &self.nonlinearity {
            if let Some((i, v)) = table
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.is_finite() && **v > 0.0))
            {
                return Err(Error::InvalidNonlinearity {
                    n: i as u64 + 1,
                    value: *v,
                });
            }
        }
        let nbar = self.field.resolved_nbar()?;
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::Validation(format!(
                "field.nbar must be finite and non-negative, got {nbar}"
            )));
        }
        Ok(())
    }

    /// Physical times `t = (gamma t) / gamma` matching [`TimeSpec::grid`].
    pub fn physical_grid(&self) -> Vec<f64> {
        self.time
            .grid()
            .into_iter()
            .map(|tau| tau / self.model.gamma)
            .collect()
    }
}
