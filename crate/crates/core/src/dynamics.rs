//! Per-doublet coefficients and the closed-form amplitudes.
//!
//! With the atom-field state written as
//! `sum_n c_{n,e}(t) |n, e> + c_{n+k,g}(t) |n+k, g>` (free phases stripped),
//! each doublet obeys
//!
//! ```text
//! i dc_{n,e}/dt   = R1 c_{n,e}   + alpha_n cos(mu t) c_{n+k,g}
//! i dc_{n+k,g}/dt = R2 c_{n+k,g} + alpha_n cos(mu t) c_{n,e}
//! ```
//!
//! and, after dropping the energy non-conserving terms, is solved exactly
//! with the generalized Rabi frequency
//! `Omega_n = sqrt((R_n - mu)^2 + alpha_n^2) / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ordered_sum, PhotonDistribution};
use crate::nonlinearity::Nonlinearity;

/// Scalar physics parameters. Frequencies share one unit; `gamma` sets the
/// scale of the coupling `lambda(t) = gamma cos(mu t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Photons exchanged per atomic transition.
    pub k: usize,
    /// Field frequency. Only enters through the free-evolution phase.
    #[serde(default)]
    pub nu: f64,
    /// `omega - k nu`.
    #[serde(default)]
    pub detuning: f64,
    /// Stark coefficient of the ground level.
    #[serde(default)]
    pub beta1: f64,
    /// Stark coefficient of the excited level.
    #[serde(default)]
    pub beta2: f64,
    /// Kerr susceptibility.
    #[serde(default)]
    pub chi: f64,
    pub gamma: f64,
    #[serde(default)]
    pub mu: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            k: 1,
            nu: 0.0,
            detuning: 0.0,
            beta1: 0.0,
            beta2: 0.0,
            chi: 0.0,
            gamma: 1.0,
            mu: 0.0,
        }
    }
}

impl ModelParams {
    /// Atomic transition frequency `omega = detuning + k nu`.
    pub fn atom_frequency(&self) -> f64 {
        self.detuning + self.k as f64 * self.nu
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Validation("k must be at least 1".into()));
        }
        let fields = [
            ("nu", self.nu),
            ("detuning", self.detuning),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("chi", self.chi),
            ("gamma", self.gamma),
            ("mu", self.mu),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if self.gamma < 0.0 {
            return Err(Error::Validation(format!(
                "gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if self.mu < 0.0 {
            return Err(Error::Validation(format!(
                "mu must be non-negative, got {}",
                self.mu
            )));
        }
        if self.nu < 0.0 {
            return Err(Error::Validation(format!(
                "nu must be non-negative, got {}",
                self.nu
            )));
        }
        if self.k != 2 && (self.beta1 != 0.0 || self.beta2 != 0.0) {
            return Err(Error::Validation(format!(
                "Stark coefficients require k=2 (got k={}, beta1={}, beta2={})",
                self.k, self.beta1, self.beta2
            )));
        }
        Ok(())
    }
}

/// Coefficients of the doublet `{|n, e>, |n+k, g>}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub n: usize,
    pub r1: f64,
    pub r2: f64,
    /// `R1 - R2`.
    pub rn: f64,
    pub alpha: f64,
    /// `(R1 + R2) / 2`, the phase common to both members of the doublet.
    pub phi: f64,
    /// Generalized Rabi frequency.
    pub omega: f64,
}

/// `m f^2(m)`, zero at `m = 0` without evaluating `f(0)`.
fn stark_factor(f: &Nonlinearity, m: usize) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    Ok(m as f64 * f.f_squared(m as u64)?)
}

/// `m (m-1) f^2(m) f^2(m-1)`, zero below `m = 2`.
fn kerr_factor(f: &Nonlinearity, m: usize) -> Result<f64> {
    if m < 2 {
        return Ok(0.0);
    }
    let m64 = m as u64;
    Ok(m as f64 * (m - 1) as f64 * f.f_squared(m64)? * f.f_squared(m64 - 1)?)
}

/// `alpha_n = gamma [f(n+k)]!/[f(n)]! sqrt((n+k)!/n!)`, assembled in log space.
pub fn coupling(params: &ModelParams, f: &Nonlinearity, n: usize) -> Result<f64> {
    let k = params.k;
    let f_log = f.f_ratio_log(n, k)?;
    if params.gamma == 0.0 {
        return Ok(0.0);
    }
    let rising_log: f64 = (n + 1..=n + k).map(|j| (j as f64).ln()).sum();
    Ok((params.gamma.ln() + f_log + 0.5 * rising_log).exp())
}

pub fn mode_coefficients(
    params: &ModelParams,
    f: &Nonlinearity,
    n: usize,
) -> Result<ModeCoefficients> {
    let k = params.k;
    let upper = n + k;
    let stark_lo = stark_factor(f, n)?;
    let stark_hi = stark_factor(f, upper)?;
    let kerr_lo = kerr_factor(f, n)?;
    let kerr_hi = kerr_factor(f, upper)?;

    let r1 = params.detuning / 2.0 + stark_lo * params.beta2 + params.chi * kerr_lo;
    let r2 = -params.detuning / 2.0 + stark_hi * params.beta1 + params.chi * kerr_hi;
    let rn = r1 - r2;
    let alpha = coupling(params, f, n)?;
    let phi = 0.5 * (r1 + r2);
    let omega = 0.5 * (rn - params.mu).hypot(alpha);
    Ok(ModeCoefficients {
        n,
        r1,
        r2,
        rn,
        alpha,
        phi,
        omega,
    })
}

/// Amplitudes `c_{n,e}(t)` (index `n`) and `c_{n+k,g}(t)` (also index `n`).
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeState {
    pub time: f64,
    pub k: usize,
    pub excited: Vec<Complex64>,
    pub ground: Vec<Complex64>,
}

impl AmplitudeState {
    /// Excited atom, field amplitudes `sqrt(rho_nn(0))` with zero phase.
    pub fn initial(dist: &PhotonDistribution, k: usize) -> Self {
        let excited = dist
            .probabilities
            .iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect();
        AmplitudeState {
            time: 0.0,
            k,
            excited,
            ground: vec![Complex64::new(0.0, 0.0); dist.len()],
        }
    }

    pub fn levels(&self) -> usize {
        self.excited.len()
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }
}

/// `sum_n |c_{n,e}|^2 + |c_{n+k,g}|^2`, summed in level order.
pub fn norm(state: &AmplitudeState) -> f64 {
    ordered_sum(
        state
            .excited
            .iter()
            .zip(&state.ground)
            .map(|(e, g)| e.norm_sqr() + g.norm_sqr()),
    )
}

/// `sin(x) / x` with a series branch near zero.
pub(crate) fn sinc(x: f64, sin_x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        sin_x / x
    }
}

/// `exp(-i (phi + mu/2) t)` and `exp(-i (phi - mu/2) t)`. The large common
/// part is reduced once; the integrator uses the same expression so both
/// routes round identically.
pub(crate) fn doublet_phases(phi: f64, mu: f64, t: f64) -> (Complex64, Complex64) {
    let common = Complex64::from_polar(1.0, -phi * t);
    let half = Complex64::from_polar(1.0, -0.5 * mu * t);
    (common * half, common * half.conj())
}

/// Precomputed closed-form propagator for every doublet of a basis.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    k: usize,
    coefficients: Vec<ModeCoefficients>,
    detuning_mu: Vec<f64>,
    excited0: Vec<Complex64>,
    ground0: Vec<Complex64>,
    mu: f64,
}

impl ClosedForm {
    pub fn new(params: &ModelParams, f: &Nonlinearity, dist: &PhotonDistribution) -> Result<Self> {
        let init = AmplitudeState::initial(dist, params.k);
        Self::from_amplitudes(params, f, init.excited, init.ground)
    }

    /// General initial amplitudes `c_{n,e}(0)`, `c_{n+k,g}(0)`.
    pub fn from_amplitudes(
        params: &ModelParams,
        f: &Nonlinearity,
        excited0: Vec<Complex64>,
        ground0: Vec<Complex64>,
    ) -> Result<Self> {
        params.validate()?;
        if excited0.len() != ground0.len() {
            return Err(Error::InvalidParameter(
                "excited and ground amplitude arrays differ in length".into(),
            ));
        }
        let mut f = f.clone();
        f.prepare(excited0.len() + params.k)?;
        let coefficients = (0..excited0.len())
            .map(|n| mode_coefficients(params, &f, n))
            .collect::<Result<Vec<_>>>()?;
        let detuning_mu = coefficients.iter().map(|c| c.rn - params.mu).collect();
        Ok(ClosedForm {
            k: params.k,
            coefficients,
            detuning_mu,
            excited0,
            ground0,
            mu: params.mu,
        })
    }

    pub fn coefficients(&self) -> &[ModeCoefficients] {
        &self.coefficients
    }

    pub fn state_at(&self, t: f64) -> Result<AmplitudeState> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time must be non-negative, got {t}"
            )));
        }
        let levels = self.coefficients.len();
        let mut excited = Vec::with_capacity(levels);
        let mut ground = Vec::with_capacity(levels);
        for n in 0..levels {
            let (e, g) = self.doublet_at(n, t);
            excited.push(e);
            ground.push(g);
        }
        Ok(AmplitudeState {
            time: t,
            k: self.k,
            excited,
            ground,
        })
    }

    fn doublet_at(&self, n: usize, t: f64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let (e0, g0) = (self.excited0[n], self.ground0[n]);
        if e0 == zero && g0 == zero {
            return (zero, zero);
        }
        let c = &self.coefficients[n];
        let x = c.omega * t;
        let (sin_x, cos_x) = x.sin_cos();
        // sin(Omega t) / (2 Omega), finite as Omega -> 0
        let half_sin_over_omega = 0.5 * t * sinc(x, sin_x);
        let shift = Complex64::new(0.0, self.detuning_mu[n] * half_sin_over_omega);
        let mix = Complex64::new(0.0, -c.alpha * half_sin_over_omega);
        let (phase_e, phase_g) = doublet_phases(c.phi, self.mu, t);
        let e = (e0 * (cos_x - shift) + mix * g0) * phase_e;
        let g = (g0 * (cos_x + shift) + mix * e0) * phase_g;
        (e, g)
    }
}

pub fn evolve_closed_form(
    params: &ModelParams,
    f: &Nonlinearity,
    dist: &PhotonDistribution,
    t: f64,
) -> Result<AmplitudeState> {
    ClosedForm::new(params, f, dist)?.state_at(t)
}
