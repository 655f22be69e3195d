//! Browser bindings for the demo page in `www/`.
//!
//! The page picks a preset, optionally overrides a few keys, and plots the
//! inversion and entropy-squeezing series next to the initial photon
//! distribution.

use jcm_core::field::{FieldKind, PhotonDistribution, DEFAULT_TAIL_EPS};
use jcm_core::scenario::{self, ScenarioRun};
use wasm_bindgen::prelude::*;

/// Observable series of one run, column by column.
#[wasm_bindgen]
pub struct Series {
    run: ScenarioRun,
}

#[wasm_bindgen]
impl Series {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.column(|r| r.t)
    }

    #[wasm_bindgen(getter)]
    pub fn w(&self) -> Vec<f64> {
        self.column(|r| r.w)
    }

    #[wasm_bindgen(getter)]
    pub fn e_x(&self) -> Vec<f64> {
        self.column(|r| r.e_x)
    }

    #[wasm_bindgen(getter)]
    pub fn e_y(&self) -> Vec<f64> {
        self.column(|r| r.e_y)
    }

    #[wasm_bindgen(getter)]
    pub fn n_cut(&self) -> usize {
        self.run.diagnostics.n_cut
    }

    #[wasm_bindgen(getter)]
    pub fn max_norm_drift(&self) -> f64 {
        self.run.diagnostics.max_norm_drift
    }

    /// The full run as CSV text.
    pub fn csv(&self) -> Result<String, JsError> {
        let mut buf = Vec::new();
        scenario::write_csv(&self.run.records, &mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}

impl Series {
    fn column(&self, get: impl Fn(&jcm_core::observables::ObservableRecord) -> f64) -> Vec<f64> {
        self.run.records.iter().map(get).collect()
    }
}

#[wasm_bindgen]
pub fn preset_names() -> Vec<String> {
    scenario::preset_names()
}

/// Run `preset` with TOML `overrides` (may be empty), e.g.
/// `"[model]\nchi = 0.01\n[time]\nsamples = 800\n"`.
#[wasm_bindgen]
pub fn simulate(preset: &str, overrides: &str) -> Result<Series, JsError> {
    let config = scenario::preset_with_overrides(preset, overrides)?;
    Ok(Series {
        run: scenario::run_scenario(&config)?,
    })
}

/// Initial photon-number distribution `rho_nn(0)` for `kind` in
/// `coherent`, `squeezed`, `thermal`.
#[wasm_bindgen]
pub fn photon_distribution(kind: &str, nbar: f64) -> Result<Vec<f64>, JsError> {
    let kind = match kind {
        "coherent" => FieldKind::Coherent,
        "squeezed" => FieldKind::Squeezed,
        "thermal" => FieldKind::Thermal,
        other => return Err(JsError::new(&format!("unknown field kind `{other}`"))),
    };
    Ok(PhotonDistribution::new(kind, nbar, DEFAULT_TAIL_EPS, 1)?.probabilities)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulate_small_preset() {
        let s = simulate("coherent_bare_sqrt_n_lown", "[time]\nsamples = 50\n")
            .unwrap_or_else(|_| panic!("simulate failed"));
        assert_eq!(s.t().len(), 50);
        assert_eq!(s.w()[0], 1.0);
        assert!(s.csv().unwrap().starts_with("t,W,"));
    }

    #[test]
    fn distribution_kinds() {
        let d = photon_distribution("thermal", 1.0).unwrap_or_else(|_| panic!());
        assert_eq!(d[0], 0.5);
        assert!(!preset_names().is_empty());
    }
}
