use serde::{Deserialize, Serialize};

use crate::dynamics::{AmplitudeState, ClosedForm};
use crate::error::{Error, Result};
use crate::observables::{atomic_inversion, ObservableRecord};
use crate::oracle::{evolve_ode_oracle, sample_deviations};
use crate::par;

use super::config::ScenarioConfig;

/// Largest closed-form vs. integrated amplitude deviation a run accepts.
pub const ORACLE_DEVIATION_LIMIT: f64 = 1e-6;

/// Per-run numbers that do not fit the per-sample record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Number of Fock levels kept.
    pub n_cut: usize,
    pub captured_mass: f64,
    /// `max |norm - captured_mass|` over the grid.
    pub max_norm_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_max_deviation: Option<f64>,
    /// Max amplitude deviation per sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_deviation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counter_rotating_max_w_difference: Option<f64>,
    /// `W` with counter-rotating terms minus `W` without, per sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counter_rotating_w_difference: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub records: Vec<ObservableRecord>,
    pub diagnostics: Diagnostics,
}

impl ScenarioRun {
    pub fn oracle_exceeded(&self) -> bool {
        self.diagnostics
            .oracle_max_deviation
            .is_some_and(|d| !(d <= ORACLE_DEVIATION_LIMIT))
    }
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Integrator grid: the physical sample times, with `t = 0` prepended if
/// the output grid starts later. Returns the grid and the offset of the
/// first output sample in it.
fn oracle_grid(times: &[f64]) -> (Vec<f64>, usize) {
    if times[0] == 0.0 {
        (times.to_vec(), 0)
    } else {
        (
            std::iter::once(0.0).chain(times.iter().copied()).collect(),
            1,
        )
    }
}

/// Evaluate the closed form on the configured grid and collect observables.
/// Samples are computed in parallel; results are in grid order and do not
/// depend on the number of workers.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let params = &config.model;
    let dist = config.field.distribution(params.k)?;
    let f = config.nonlinearity.build();
    let closed = ClosedForm::new(params, &f, &dist)?;

    let scaled = config.time.grid();
    let times = config.physical_grid();
    let free_phase = config.options.free_phase_on_coherence.then_some(params.nu);

    let records = par::map_range(times.len(), |j| {
        let state = closed.state_at(times[j])?;
        ObservableRecord::from_state(scaled[j], &state, free_phase)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let drift: Vec<f64> = records
        .iter()
        .map(|r| (r.norm - dist.captured_mass).abs())
        .collect();
    let mut diagnostics = Diagnostics {
        n_cut: dist.len(),
        captured_mass: dist.captured_mass,
        max_norm_drift: max_of(&drift),
        oracle_max_deviation: None,
        oracle_deviation: None,
        counter_rotating_max_w_difference: None,
        counter_rotating_w_difference: None,
    };

    let (grid, offset) = oracle_grid(&times);
    if config.options.oracle_check {
        let integrated = evolve_ode_oracle(params, &f, &dist, &grid, false)
            .map_err(|e| with_context(e, "oracle"))?;
        let exact = par::map_range(times.len(), |j| closed.state_at(times[j]))
            .into_iter()
            .collect::<Result<Vec<AmplitudeState>>>()?;
        let deviation = sample_deviations(&exact, &integrated[offset..]);
        diagnostics.oracle_max_deviation = Some(max_of(&deviation));
        diagnostics.oracle_deviation = Some(deviation);
    }
    if config.options.counter_rotating_diagnostic {
        let full = evolve_ode_oracle(params, &f, &dist, &grid, true)
            .map_err(|e| with_context(e, "counter-rotating diagnostic"))?;
        let diff: Vec<f64> = full[offset..]
            .iter()
            .zip(&records)
            .map(|(s, r)| atomic_inversion(s) - r.w)
            .collect();
        diagnostics.counter_rotating_max_w_difference =
            Some(diff.iter().fold(0.0, |m, d| d.abs().max(m)));
        diagnostics.counter_rotating_w_difference = Some(diff);
    }

    Ok(ScenarioRun {
        config: config.clone(),
        records,
        diagnostics,
    })
}

fn with_context(err: Error, stage: &str) -> Error {
    match err {
        Error::IntegrationFailure { n, t, reason } => Error::IntegrationFailure {
            n,
            t,
            reason: format!("{stage}: {reason}"),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::preset_with_overrides;

    #[test]
    fn first_sample_is_the_initial_state() {
        let c =
            preset_with_overrides("squeezed_kerr_stark_sqrt_n", "[time]\nsamples = 5\n").unwrap();
        let run = run_scenario(&c).unwrap();
        let r0 = run.records[0];
        assert_eq!(r0.t, 0.0);
        assert!((r0.w - run.diagnostics.captured_mass).abs() < 1e-15);
        assert!(r0.e_x.abs() < 1e-12 && r0.e_y.abs() < 1e-12);
        assert!(r0.h_z.abs() < 1e-10);
        assert_eq!(run.records.len(), 5);
    }

    #[test]
    fn oracle_check_reports_small_deviation() {
        let c = preset_with_overrides(
            "coherent_kerr_sqrt_n_lown",
            "[time]\nt_start = 2.0\nt_end = 10.0\nsamples = 9\n[options]\noracle_check = true\n",
        )
        .unwrap();
        let run = run_scenario(&c).unwrap();
        let dev = run.diagnostics.oracle_deviation.as_ref().unwrap();
        assert_eq!(dev.len(), 9);
        assert!(run.diagnostics.oracle_max_deviation.unwrap() < 1e-8);
        assert!(!run.oracle_exceeded());
    }

    #[test]
    fn counter_rotating_diagnostic_is_bounded() {
        let c = preset_with_overrides(
            "coherent_bare_identity_lown",
            "[time]\nt_end = 5.0\nsamples = 11\n[options]\ncounter_rotating_diagnostic = true\n",
        )
        .unwrap();
        let run = run_scenario(&c).unwrap();
        let d = run.diagnostics.counter_rotating_max_w_difference.unwrap();
        assert!(d > 0.0 && d <= 2.0);
    }

    #[test]
    fn free_phase_leaves_populations_alone() {
        let base = "[time]\nt_end = 5.0\nsamples = 6\n";
        let plain =
            run_scenario(&preset_with_overrides("coherent_bare_sqrt_n_lown", base).unwrap())
                .unwrap();
        let phased = run_scenario(
            &preset_with_overrides(
                "coherent_bare_sqrt_n_lown",
                &format!("{base}[options]\nfree_phase_on_coherence = true\n"),
            )
            .unwrap(),
        )
        .unwrap();
        for (a, b) in plain.records.iter().zip(&phased.records) {
            assert_eq!(a.w, b.w);
            assert_eq!(a.h_z, b.h_z);
            let ma = a.re_rho_eg.hypot(a.im_rho_eg);
            let mb = b.re_rho_eg.hypot(b.im_rho_eg);
            assert!((ma - mb).abs() < 1e-15);
        }
    }
}
