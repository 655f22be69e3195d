//! Runge-Kutta integration of the slow-variable amplitude equations, used as
//! an independent check on the closed form.
//!
//! Each doublet is integrated on its own in the slow variables
//! `X = c_{n,e} e^{i R1 t}`, `Y = c_{n+k,g} e^{i R2 t}`. With
//! `delta = mu - R_n` and `a = alpha_n / 2`, the rotating-wave equations read
//!
//! ```text
//! dX/dt = -i a e^{-i delta t} Y
//! dY/dt = -i a e^{+i delta t} X
//! ```
//!
//! and become autonomous in the co-rotating variables
//! `x = X e^{i delta t / 2}`, `y = Y e^{-i delta t / 2}`. For the autonomous
//! system the classic RK4 step is a fixed 2x2 matrix, so `2^m` steps are
//! applied by squaring it `m` times; this keeps very fast doublets (large
//! Kerr shifts at high Fock levels) affordable. The step matrix is built and
//! squared in double-double arithmetic: fast doublets need around `2^40`
//! steps, and in plain `f64` the roundoff of that many steps would swamp the
//! truncation error being controlled. With the counter-rotating
//! terms kept, the coupling picks up `e^{+-2 i mu t}` and the equations are
//! stepped directly.
//!
//! Step counts are halved-and-compared until two successive refinements
//! agree to the requested tolerance (absolute, on the amplitudes).

use std::collections::HashMap;

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::dynamics::{
    doublet_phases, mode_coefficients, AmplitudeState, ModeCoefficients, ModelParams,
};
use crate::error::{Error, Result};
use crate::field::PhotonDistribution;
use crate::nonlinearity::Nonlinearity;
use crate::par;

type C = Complex64;
type Vec2 = [C; 2];
type Mat2 = [[C; 2]; 2];

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

/// Largest `h * |G|` for the coarsest pass.
const COARSE_STEP: f64 = 0.5;
/// Accumulated RK4 phase error (radians) the coarsest pass may carry. Keeps
/// the coarse solution close enough that agreement between refinements
/// cannot come from both having decayed to nothing.
const COARSE_PHASE_ERROR: f64 = 1e-3;
/// Roundoff allowance per `f64` operation sequence (one RK4 step, or one
/// propagator application), in units of machine epsilon.
const ROUNDOFF_PER_STEP: f64 = 4.0;
/// Largest step-count exponent before the step size is considered to have
/// underflowed.
const MAX_STEP_EXPONENT: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSettings {
    /// Allowed difference between two successive refinements, per doublet.
    pub tolerance: f64,
    /// Number of step halvings attempted after the coarsest pass.
    pub max_refinements: u32,
    /// Budget of directly-stepped RK4 steps per doublet and pass
    /// (counter-rotating mode only).
    pub max_direct_steps: u64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            tolerance: 1e-10,
            max_refinements: 40,
            max_direct_steps: 1 << 26,
        }
    }
}

/// Integrate every doublet on `t_grid` (physical time, starting at 0).
/// With `include_counter_rotating` the energy non-conserving terms are kept.
pub fn evolve_ode_oracle(
    params: &ModelParams,
    f: &Nonlinearity,
    dist: &PhotonDistribution,
    t_grid: &[f64],
    include_counter_rotating: bool,
) -> Result<Vec<AmplitudeState>> {
    evolve_ode_oracle_with(
        params,
        f,
        dist,
        t_grid,
        include_counter_rotating,
        &OracleSettings::default(),
    )
}

pub fn evolve_ode_oracle_with(
    params: &ModelParams,
    f: &Nonlinearity,
    dist: &PhotonDistribution,
    t_grid: &[f64],
    include_counter_rotating: bool,
    settings: &OracleSettings,
) -> Result<Vec<AmplitudeState>> {
    params.validate()?;
    check_grid(t_grid)?;
    let init = AmplitudeState::initial(dist, params.k);
    let mut f = f.clone();
    f.prepare(init.levels() + params.k)?;

    let doublet = |n: usize| -> Result<Vec<(C, C)>> {
        let start = [init.excited[n], init.ground[n]];
        if start == [ZERO, ZERO] {
            return Ok(vec![(ZERO, ZERO); t_grid.len()]);
        }
        let coeffs = mode_coefficients(params, &f, n)?;
        let system = Doublet::new(&coeffs, params.mu, include_counter_rotating);
        let slow = system.integrate(n, start, t_grid, settings)?;
        Ok(slow
            .iter()
            .zip(t_grid)
            .map(|(v, &t)| system.to_amplitudes(*v, t))
            .collect())
    };
    let per_level = par::map_range(init.levels(), doublet)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(j, &t)| AmplitudeState {
            time: t,
            k: params.k,
            excited: per_level.iter().map(|traj| traj[j].0).collect(),
            ground: per_level.iter().map(|traj| traj[j].1).collect(),
        })
        .collect())
}

/// Largest `|a - b|` over all amplitudes, per sample.
pub fn sample_deviations(a: &[AmplitudeState], b: &[AmplitudeState]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(sa, sb)| {
            let e = sa
                .excited
                .iter()
                .zip(&sb.excited)
                .map(|(x, y)| (x - y).norm());
            let g = sa
                .ground
                .iter()
                .zip(&sb.ground)
                .map(|(x, y)| (x - y).norm());
            e.chain(g).fold(0.0, f64::max)
        })
        .collect()
}

pub fn max_amplitude_deviation(a: &[AmplitudeState], b: &[AmplitudeState]) -> f64 {
    sample_deviations(a, b).into_iter().fold(0.0, f64::max)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        Some(0.0) => {}
        _ => {
            return Err(Error::InvalidParameter(
                "oracle time grid must start at t = 0".into(),
            ))
        }
    }
    if t_grid
        .windows(2)
        .any(|w| !(w[1] >= w[0]) || !w[1].is_finite())
    {
        return Err(Error::InvalidParameter(
            "oracle time grid must be ascending and finite".into(),
        ));
    }
    Ok(())
}

struct Doublet {
    /// `(R1 + R2) / 2`
    common: f64,
    /// `mu - R_n`
    delta: f64,
    /// `alpha_n / 2`
    a: f64,
    mu: f64,
    counter_rotating: bool,
}

impl Doublet {
    fn new(c: &ModeCoefficients, mu: f64, counter_rotating: bool) -> Self {
        Doublet {
            common: c.phi,
            delta: mu - c.rn,
            a: c.alpha / 2.0,
            mu,
            counter_rotating,
        }
    }

    /// Right-hand side in the co-rotating frame.
    fn rhs(&self, t: f64, v: Vec2) -> Vec2 {
        let half = 0.5 * self.delta;
        let (cx, cy) = if self.counter_rotating && self.mu != 0.0 {
            let w = C::from_polar(1.0, 2.0 * self.mu * t);
            (self.a * (1.0 + w), self.a * (1.0 + w.conj()))
        } else if self.counter_rotating {
            (C::from(2.0 * self.a), C::from(2.0 * self.a))
        } else {
            (C::from(self.a), C::from(self.a))
        };
        [
            I * (half * v[0] - cx * v[1]),
            -I * (half * v[1] + cy * v[0]),
        ]
    }

    fn is_autonomous(&self) -> bool {
        !self.counter_rotating || self.mu == 0.0
    }

    /// Bound on the generator norm, used to size the coarsest step.
    fn frequency_bound(&self) -> f64 {
        let coupling = if self.counter_rotating {
            2.0 * self.a
        } else {
            self.a
        };
        0.5 * self.delta.abs() + coupling
    }

    /// `(x, y)` -> `(c_{n,e}, c_{n+k,g})`, using
    /// `R1 + delta/2 = (R1 + R2)/2 + mu/2` and `R2 - delta/2 = (R1 + R2)/2 - mu/2`.
    fn to_amplitudes(&self, v: Vec2, t: f64) -> (C, C) {
        let (phase_e, phase_g) = doublet_phases(self.common, self.mu, t);
        (v[0] * phase_e, v[1] * phase_g)
    }

    fn rk4_step(&self, t: f64, v: Vec2, h: f64) -> Vec2 {
        let k1 = self.rhs(t, v);
        let k2 = self.rhs(t + 0.5 * h, axpy(v, 0.5 * h, k1));
        let k3 = self.rhs(t + 0.5 * h, axpy(v, 0.5 * h, k2));
        let k4 = self.rhs(t + h, axpy(v, h, k3));
        let s = h / 6.0;
        [
            v[0] + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            v[1] + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// The RK4 map over `2^exponent` steps spanning `span`, for the
    /// autonomous case. For `v' = G v` one RK4 step is the degree-4 Taylor
    /// polynomial of `exp(hG)`; it is evaluated and squared in double-double.
    fn autonomous_propagator(&self, span: f64, exponent: u32) -> Mat2 {
        let h = TwoFloat::from(span / 2f64.powi(exponent as i32));
        let half = TwoFloat::from(0.5 * self.delta) * h;
        let a = TwoFloat::from(self.a) * h;
        let zero = TwoFloat::from(0.0);
        let z = |re: TwoFloat, im: TwoFloat| Complex::new(re, im);
        let one = [
            [z(TwoFloat::from(1.0), zero), z(zero, zero)],
            [z(zero, zero), z(TwoFloat::from(1.0), zero)],
        ];
        // h G for the co-rotating rotating-wave system
        let hg = [[z(zero, half), z(zero, -a)], [z(zero, -a), z(zero, -half)]];
        let mut m = one;
        for j in (1..=4).rev() {
            let scale = TwoFloat::from(j as f64).recip();
            let mut next = dd_matmul(&hg, &m);
            for (row, one_row) in next.iter_mut().zip(&one) {
                for (x, i) in row.iter_mut().zip(one_row) {
                    *x = *i + *x * scale;
                }
            }
            m = next;
        }
        for _ in 0..exponent {
            m = dd_matmul(&m, &m);
        }
        m.map(|row| row.map(|x| C::new(x.re.hi() + x.re.lo(), x.im.hi() + x.im.lo())))
    }

    fn integrate(
        &self,
        n: usize,
        start: Vec2,
        t_grid: &[f64],
        settings: &OracleSettings,
    ) -> Result<Vec<Vec2>> {
        let bound = self.frequency_bound();
        // RK4 phase error per radian is about (h |G|)^4 / 120
        let total = bound * (t_grid[t_grid.len() - 1] - t_grid[0]);
        let coarse_step = COARSE_STEP.min((120.0 * COARSE_PHASE_ERROR / total).powf(0.25));
        let base: Vec<u32> = t_grid
            .windows(2)
            .map(|w| {
                let phase = bound * (w[1] - w[0]) / coarse_step;
                if phase > 1.0 {
                    phase.log2().ceil() as u32
                } else {
                    0
                }
            })
            .collect();
        let scale = start[0].norm() + start[1].norm();

        let mut coarse = self.pass(n, start, t_grid, &base, 0, settings)?;
        for r in 1..=settings.max_refinements {
            let fine = self.pass(n, start, t_grid, &base, r, settings)?;
            let (diff, at) = max_difference(&coarse, &fine);
            let operations: f64 = if self.is_autonomous() {
                base.len() as f64
            } else {
                base.iter().map(|&b| 2f64.powi((b + r) as i32)).sum()
            };
            let allowed =
                settings.tolerance + ROUNDOFF_PER_STEP * f64::EPSILON * operations * scale;
            let start_norm = start[0].norm_sqr() + start[1].norm_sqr();
            let leak = fine
                .iter()
                .map(|v| (v[0].norm_sqr() + v[1].norm_sqr() - start_norm).abs())
                .fold(0.0, f64::max);
            if diff <= allowed && leak <= allowed {
                return Ok(fine);
            }
            coarse = fine;
            if r == settings.max_refinements {
                return Err(Error::IntegrationFailure {
                    n,
                    t: t_grid[at],
                    reason: format!("refinements still differ by {diff:e} after {r} step halvings"),
                });
            }
        }
        Ok(coarse)
    }

    fn pass(
        &self,
        n: usize,
        start: Vec2,
        t_grid: &[f64],
        base: &[u32],
        refinement: u32,
        settings: &OracleSettings,
    ) -> Result<Vec<Vec2>> {
        let mut out = Vec::with_capacity(t_grid.len());
        let mut v = start;
        out.push(v);
        if self.is_autonomous() {
            let mut cache: HashMap<(u64, u32), Mat2> = HashMap::new();
            for (j, w) in t_grid.windows(2).enumerate() {
                let exponent = base[j] + refinement;
                if exponent > MAX_STEP_EXPONENT {
                    return Err(underflow(n, w[1]));
                }
                let span = w[1] - w[0];
                let m = cache
                    .entry((span.to_bits(), exponent))
                    .or_insert_with(|| self.autonomous_propagator(span, exponent));
                v = matvec(m, v);
                out.push(v);
            }
        } else {
            let mut budget = settings.max_direct_steps;
            for (j, w) in t_grid.windows(2).enumerate() {
                let exponent = base[j] + refinement;
                if exponent > MAX_STEP_EXPONENT {
                    return Err(underflow(n, w[1]));
                }
                let steps = 1u64 << exponent;
                budget = budget
                    .checked_sub(steps)
                    .ok_or_else(|| Error::IntegrationFailure {
                        n,
                        t: w[1],
                        reason: format!(
                            "direct-stepping budget of {} RK4 steps exhausted",
                            settings.max_direct_steps
                        ),
                    })?;
                let h = (w[1] - w[0]) / steps as f64;
                for s in 0..steps {
                    v = self.rk4_step(w[0] + s as f64 * h, v, h);
                }
                out.push(v);
            }
        }
        Ok(out)
    }
}

fn underflow(n: usize, t: f64) -> Error {
    Error::IntegrationFailure {
        n,
        t,
        reason: "step size underflow".into(),
    }
}

fn axpy(v: Vec2, h: f64, k: Vec2) -> Vec2 {
    [v[0] + h * k[0], v[1] + h * k[1]]
}

type DdMat2 = [[Complex<TwoFloat>; 2]; 2];

fn dd_matmul(a: &DdMat2, b: &DdMat2) -> DdMat2 {
    let entry = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

fn matvec(m: &Mat2, v: Vec2) -> Vec2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn max_difference(a: &[Vec2], b: &[Vec2]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for (j, (x, y)) in a.iter().zip(b).enumerate() {
        let d = (x[0] - y[0]).norm().max((x[1] - y[1]).norm());
        if d > worst.0 {
            worst = (d, j);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ClosedForm;
    use crate::field::{coherent_distribution, squeezed_distribution, thermal_distribution};

    fn grid(t_end: f64, samples: usize) -> Vec<f64> {
        (0..samples)
            .map(|j| t_end * j as f64 / (samples - 1) as f64)
            .collect()
    }

    fn closed(
        params: &ModelParams,
        f: &Nonlinearity,
        dist: &PhotonDistribution,
        ts: &[f64],
    ) -> Vec<AmplitudeState> {
        let cf = ClosedForm::new(params, f, dist).unwrap();
        ts.iter().map(|&t| cf.state_at(t).unwrap()).collect()
    }

    #[test]
    fn rwa_oracle_matches_closed_form() {
        let params = ModelParams {
            mu: 0.1,
            ..ModelParams::default()
        };
        let f = Nonlinearity::sqrt_n();
        let dist = coherent_distribution(25.0, 1e-12, 1).unwrap();
        let ts = grid(5.0, 51);
        let ode = evolve_ode_oracle(&params, &f, &dist, &ts, false).unwrap();
        let exact = closed(&params, &f, &dist, &ts);
        let dev = max_amplitude_deviation(&ode, &exact);
        assert!(dev <= 1e-8, "deviation {dev:e}");
    }

    #[test]
    fn rwa_oracle_matches_with_kerr_stark_and_detuning() {
        let params = ModelParams {
            k: 2,
            mu: 0.1,
            chi: 0.02,
            beta1: 0.1,
            beta2: 0.07,
            detuning: 3.0,
            ..ModelParams::default()
        };
        for dist in [
            squeezed_distribution(2.0, 1e-12, 2).unwrap(),
            thermal_distribution(2.0, 1e-12, 2).unwrap(),
        ] {
            for f in [Nonlinearity::identity(), Nonlinearity::sqrt_n()] {
                let ts = grid(20.0, 201);
                let ode = evolve_ode_oracle(&params, &f, &dist, &ts, false).unwrap();
                let dev = max_amplitude_deviation(&ode, &closed(&params, &f, &dist, &ts));
                assert!(dev <= 1e-8, "{:?} {:?}: {dev:e}", dist.kind, f.kind());
            }
        }
    }

    #[test]
    fn closed_form_with_initial_ground_population_matches_integration() {
        // closed form with c_g(0) != 0 against a single-doublet integration
        let params = ModelParams {
            mu: 0.3,
            detuning: 0.2,
            chi: 0.01,
            ..ModelParams::default()
        };
        let f = Nonlinearity::sqrt_n();
        let e0 = vec![ZERO, C::new(0.6, 0.0)];
        let g0 = vec![ZERO, C::new(0.0, 0.8)];
        let cf = ClosedForm::from_amplitudes(&params, &f, e0, g0).unwrap();
        let mut fp = f.clone();
        fp.prepare(4).unwrap();
        let coeffs = mode_coefficients(&params, &fp, 1).unwrap();
        let system = Doublet::new(&coeffs, params.mu, false);
        let ts = grid(10.0, 41);
        let slow = system
            .integrate(
                1,
                [C::new(0.6, 0.0), C::new(0.0, 0.8)],
                &ts,
                &OracleSettings::default(),
            )
            .unwrap();
        for (v, &t) in slow.iter().zip(&ts) {
            let (e, g) = system.to_amplitudes(*v, t);
            let s = cf.state_at(t).unwrap();
            assert!((e - s.excited[1]).norm() < 1e-9);
            assert!((g - s.ground[1]).norm() < 1e-9);
        }
    }

    #[test]
    fn no_coupling_keeps_magnitudes_under_both_flags() {
        let params = ModelParams {
            gamma: 0.0,
            mu: 0.1,
            chi: 0.01,
            ..ModelParams::default()
        };
        let f = Nonlinearity::sqrt_n();
        let dist = coherent_distribution(3.0, 1e-12, 1).unwrap();
        let ts = grid(10.0, 21);
        for flag in [false, true] {
            let states = evolve_ode_oracle(&params, &f, &dist, &ts, flag).unwrap();
            for s in &states {
                for (n, e) in s.excited.iter().enumerate() {
                    assert!((e.norm() - dist.probabilities[n].sqrt()).abs() < 1e-12);
                    assert_eq!(s.ground[n].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn counter_rotating_error_scales_with_inverse_frequency() {
        // resonant RWA term (mu = R_0), counter-rotating term at mu + R_0
        let f = Nonlinearity::identity();
        let dist = coherent_distribution(0.0, 1e-12, 1).unwrap();
        let ts = grid(20.0, 401);
        let measure = |mu: f64| {
            let params = ModelParams {
                mu,
                detuning: mu,
                ..ModelParams::default()
            };
            let cr = evolve_ode_oracle(&params, &f, &dist, &ts, true).unwrap();
            let rwa = closed(&params, &f, &dist, &ts);
            let w = |s: &AmplitudeState| s.excited[0].norm_sqr() - s.ground[0].norm_sqr();
            cr.iter()
                .zip(&rwa)
                .map(|(a, b)| (w(a) - w(b)).abs())
                .fold(0.0, f64::max)
        };
        let e20 = measure(20.0);
        let e40 = measure(40.0);
        let ratio = 1.0 / 40.0; // alpha_0 / (mu + R_0) at mu = 20
        assert!(e20 > 0.0 && e20 < 4.0 * ratio, "{e20}");
        assert!(e40 < 0.75 * e20, "{e40} vs {e20}");
    }

    #[test]
    fn grid_must_start_at_zero() {
        let params = ModelParams::default();
        let dist = coherent_distribution(1.0, 1e-12, 1).unwrap();
        assert!(evolve_ode_oracle(
            &params,
            &Nonlinearity::identity(),
            &dist,
            &[0.5, 1.0],
            false
        )
        .is_err());
        assert!(evolve_ode_oracle(
            &params,
            &Nonlinearity::identity(),
            &dist,
            &[0.0, 1.0, 0.5],
            false
        )
        .is_err());
    }

    #[test]
    fn exhausted_budget_reports_level_and_time() {
        let params = ModelParams {
            mu: 0.5,
            chi: 0.03,
            ..ModelParams::default()
        };
        let dist = coherent_distribution(25.0, 1e-12, 1).unwrap();
        let settings = OracleSettings {
            max_direct_steps: 1000,
            ..OracleSettings::default()
        };
        let err = evolve_ode_oracle_with(
            &params,
            &Nonlinearity::sqrt_n(),
            &dist,
            &grid(50.0, 11),
            true,
            &settings,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }), "{err}");
    }
}
