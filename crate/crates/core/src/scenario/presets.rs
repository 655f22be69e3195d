//! Built-in scenarios.
//!
//! Names follow `<field>_<regime>_<f>[_suffix]`:
//!
//! * field: `coherent`, `squeezed`, `thermal`
//! * regime: `bare` (k = 1), `kerr` (k = 1, chi = 0.03),
//!   `kerr_stark` (k = 2, chi = 0.03, beta1 = beta2 = 0.1),
//!   `kerr_stark_detuned` (as `kerr_stark` with detuning 5)
//! * f: `identity`, `sqrt_n`
//! * suffix: `lown` (nbar = 1), `k3`, `k4` (three- and four-photon
//!   transitions, bare and Kerr regimes only)
//!
//! Every preset uses mu = 0.1, gamma = 1, nu = 1, nbar = 25 unless the
//! suffix says otherwise, and samples `gamma t` in [0, 60] at 2000 points.

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::field::FieldKind;

use super::config::{
    FieldSpec, NamedNonlinearity, NonlinearitySpec, OptionsSpec, OutputSpec, ScenarioConfig,
    TimeSpec,
};

const FIELDS: [FieldKind; 3] = [FieldKind::Coherent, FieldKind::Squeezed, FieldKind::Thermal];
const NONLINEARITIES: [(NamedNonlinearity, &str); 2] = [
    (NamedNonlinearity::Identity, "identity"),
    (NamedNonlinearity::SqrtN, "sqrt_n"),
];

const MU: f64 = 0.1;
const NBAR: f64 = 25.0;
const LOW_NBAR: f64 = 1.0;
const KERR_CHI: f64 = 0.03;
const STARK_BETA: f64 = 0.1;
const DETUNING: f64 = 5.0;
const T_END: f64 = 60.0;
const SAMPLES: usize = 2000;

#[derive(Clone, Copy)]
enum Regime {
    Bare,
    Kerr,
    KerrStark,
    KerrStarkDetuned,
}

impl Regime {
    const ALL: [Regime; 4] = [
        Regime::Bare,
        Regime::Kerr,
        Regime::KerrStark,
        Regime::KerrStarkDetuned,
    ];

    fn name(self) -> &'static str {
        match self {
            Regime::Bare => "bare",
            Regime::Kerr => "kerr",
            Regime::KerrStark => "kerr_stark",
            Regime::KerrStarkDetuned => "kerr_stark_detuned",
        }
    }

    fn params(self) -> ModelParams {
        let base = ModelParams {
            k: 1,
            nu: 1.0,
            gamma: 1.0,
            mu: MU,
            ..ModelParams::default()
        };
        match self {
            Regime::Bare => base,
            Regime::Kerr => ModelParams {
                chi: KERR_CHI,
                ..base
            },
            Regime::KerrStark => ModelParams {
                k: 2,
                chi: KERR_CHI,
                beta1: STARK_BETA,
                beta2: STARK_BETA,
                ..base
            },
            Regime::KerrStarkDetuned => ModelParams {
                detuning: DETUNING,
                ..Regime::KerrStark.params()
            },
        }
    }
}

fn build(
    name: String,
    field: FieldKind,
    nbar: f64,
    f: NamedNonlinearity,
    params: ModelParams,
) -> ScenarioConfig {
    ScenarioConfig {
        name: Some(name),
        model: params,
        nonlinearity: NonlinearitySpec::Named(f),
        field: FieldSpec::with_nbar(field, nbar),
        time: TimeSpec {
            t_start: 0.0,
            t_end: T_END,
            samples: SAMPLES,
        },
        options: OptionsSpec::default(),
        output: OutputSpec::default(),
    }
}

fn all_presets() -> Vec<ScenarioConfig> {
    let mut out = Vec::new();
    for field in FIELDS {
        for regime in Regime::ALL {
            for (f, f_name) in NONLINEARITIES {
                let stem = format!("{}_{}_{}", field.name(), regime.name(), f_name);
                out.push(build(stem.clone(), field, NBAR, f, regime.params()));
                out.push(build(
                    format!("{stem}_lown"),
                    field,
                    LOW_NBAR,
                    f,
                    regime.params(),
                ));
                if matches!(regime, Regime::Bare | Regime::Kerr) {
                    for k in [3, 4] {
                        let params = ModelParams {
                            k,
                            ..regime.params()
                        };
                        out.push(build(format!("{stem}_k{k}"), field, NBAR, f, params));
                    }
                }
            }
        }
    }
    out
}

pub fn preset_names() -> Vec<String> {
    all_presets().into_iter().filter_map(|c| c.name).collect()
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    all_presets()
        .into_iter()
        .find(|c| c.name.as_deref() == Some(name))
        .ok_or_else(|| Error::UnknownPreset {
            name: name.to_string(),
            available: preset_names(),
        })
}

/// Start from a preset and override any keys present in the TOML document
/// `overrides`. Tables merge key by key; everything else is replaced.
pub fn preset_with_overrides(name: &str, overrides: &str) -> Result<ScenarioConfig> {
    let base = preset(name)?;
    let mut value = toml::Value::try_from(&base).map_err(|e| Error::Config(e.to_string()))?;
    let patch: toml::Table = toml::from_str(overrides).map_err(|e| Error::Config(e.to_string()))?;
    merge(&mut value, toml::Value::Table(patch));
    ScenarioConfig::from_toml_value(value)
}

fn merge(base: &mut toml::Value, patch: toml::Value) {
    match (base, patch) {
        (toml::Value::Table(b), toml::Value::Table(p)) => {
            for (key, v) in p {
                match b.get_mut(&key) {
                    Some(existing) => merge(existing, v),
                    None => {
                        b.insert(key, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
