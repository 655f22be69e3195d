//! Atomic inversion, reduced atomic density matrix, Pauli information
//! entropies and entropy-squeezing factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mode_coefficients, sinc, AmplitudeState, ModeCoefficients, ModelParams};
use crate::error::{Error, Result};
use crate::field::{ordered_sum, PhotonDistribution};
use crate::nonlinearity::Nonlinearity;

/// Slack allowed on probabilities before they count as inconsistent.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// `W = sum_n |c_{n,e}|^2 - |c_{n+k,g}|^2`.
pub fn atomic_inversion(state: &AmplitudeState) -> f64 {
    ordered_sum(
        state
            .excited
            .iter()
            .zip(&state.ground)
            .map(|(e, g)| e.norm_sqr() - g.norm_sqr()),
    )
}

/// Inversion straight from the initial populations,
/// `W = sum_n rho_nn(0) [cos(2 Omega_n t) + (R_n - mu)^2 sin^2(Omega_n t) / (2 Omega_n^2)]`.
/// Assumes the atom starts excited.
pub fn atomic_inversion_closed(
    params: &ModelParams,
    f: &Nonlinearity,
    dist: &PhotonDistribution,
    t: f64,
) -> Result<f64> {
    params.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let coefficients = dist
        .probabilities
        .iter()
        .enumerate()
        .map(|(n, _)| mode_coefficients(params, f, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(inversion_from_coefficients(
        &coefficients,
        params.mu,
        &dist.probabilities,
        t,
    ))
}

/// Same sum as [`atomic_inversion_closed`] with the doublet coefficients
/// already at hand (see [`crate::dynamics::ClosedForm::coefficients`]).
pub fn inversion_from_coefficients(
    coefficients: &[ModeCoefficients],
    mu: f64,
    populations: &[f64],
    t: f64,
) -> f64 {
    let terms = coefficients
        .iter()
        .zip(populations)
        .filter(|(_, &p)| p != 0.0)
        .map(|(c, &p)| {
            let x = c.omega * t;
            let s = x.sin();
            // sin^2(Omega t) / Omega^2 = t^2 sinc^2(Omega t)
            let sin_over = t * sinc(x, s);
            let d = c.rn - mu;
            p * ((2.0 * x).cos() + d * d * sin_over * sin_over / 2.0)
        });
    ordered_sum(terms)
}

/// Reduced atomic density matrix in the interaction picture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedAtomDensity {
    pub rho_ee: f64,
    pub rho_gg: f64,
    pub rho_eg: Complex64,
}

impl ReducedAtomDensity {
    pub fn rho_ge(&self) -> Complex64 {
        self.rho_eg.conj()
    }
}

/// Partial trace over the field. Coherences pair equal total photon number:
/// `rho_eg = sum_n c_{n+k,e} c*_{n+k,g}`, i.e. excited index `n + k` with
/// ground index `n`.
pub fn reduced_density(state: &AmplitudeState) -> ReducedAtomDensity {
    let rho_ee = ordered_sum(state.excited.iter().map(|c| c.norm_sqr()));
    let rho_gg = ordered_sum(state.ground.iter().map(|c| c.norm_sqr()));
    let k = state.k;
    let mut re = Vec::new();
    let mut im = Vec::new();
    for (n, g) in state.ground.iter().enumerate() {
        if let Some(e) = state.excited.get(n + k) {
            let term = e * g.conj();
            re.push(term.re);
            im.push(term.im);
        }
    }
    ReducedAtomDensity {
        rho_ee,
        rho_gg,
        rho_eg: Complex64::new(ordered_sum(&re), ordered_sum(&im)),
    }
}

/// Reattach the free-evolution phase `exp(-i nu k t)` that the
/// interaction-picture coherence omits.
pub fn with_free_phase(rho: ReducedAtomDensity, nu: f64, k: usize, t: f64) -> ReducedAtomDensity {
    ReducedAtomDensity {
        rho_eg: rho.rho_eg * Complex64::from_polar(1.0, -nu * k as f64 * t),
        ..rho
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliEntropies {
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
}

impl PauliEntropies {
    /// `delta H(sigma_a) = exp(H(sigma_a))` for a = x, y, z.
    pub fn deltas(&self) -> (f64, f64, f64) {
        (self.h_x.exp(), self.h_y.exp(), self.h_z.exp())
    }
}

fn clamp_probability(what: &'static str, p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::NumericalConsistency { what, value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Binary Shannon entropy (nats) with `0 ln 0 = 0`.
fn binary_entropy(p: f64, q: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(q)
}

/// Shannon entropies of the outcomes of sigma_x, sigma_y and sigma_z.
pub fn pauli_entropies(rho: &ReducedAtomDensity) -> Result<PauliEntropies> {
    let ge = rho.rho_ge();
    let px = clamp_probability("1/2 + Re(rho_ge)", 0.5 + ge.re)?;
    let qx = clamp_probability("1/2 - Re(rho_ge)", 0.5 - ge.re)?;
    let py = clamp_probability("1/2 + Im(rho_ge)", 0.5 + ge.im)?;
    let qy = clamp_probability("1/2 - Im(rho_ge)", 0.5 - ge.im)?;
    let pe = clamp_probability("rho_ee", rho.rho_ee)?;
    let pg = clamp_probability("rho_gg", rho.rho_gg)?;
    Ok(PauliEntropies {
        h_x: binary_entropy(px, qx),
        h_y: binary_entropy(py, qy),
        h_z: binary_entropy(pe, pg),
    })
}

/// `E(sigma_a) = delta H(sigma_a) - 2 / sqrt(delta H(sigma_z))`; negative
/// values signal entropy squeezing in sigma_a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezingFactors {
    pub e_x: f64,
    pub e_y: f64,
}

pub fn entropy_squeezing(h: &PauliEntropies) -> SqueezingFactors {
    let bound = 2.0 / (h.h_z.exp()).sqrt();
    SqueezingFactors {
        e_x: h.h_x.exp() - bound,
        e_y: h.h_y.exp() - bound,
    }
}

/// Everything reported at one time sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub rho_ee: f64,
    pub rho_gg: f64,
    pub re_rho_eg: f64,
    pub im_rho_eg: f64,
    #[serde(rename = "H_x")]
    pub h_x: f64,
    #[serde(rename = "H_y")]
    pub h_y: f64,
    #[serde(rename = "H_z")]
    pub h_z: f64,
    #[serde(rename = "E_x")]
    pub e_x: f64,
    #[serde(rename = "E_y")]
    pub e_y: f64,
    pub norm: f64,
}

impl ObservableRecord {
    /// Observables of `state`, reported at time `t` (usually scaled time).
    pub fn from_state(t: f64, state: &AmplitudeState, free_phase: Option<f64>) -> Result<Self> {
        let mut rho = reduced_density(state);
        if let Some(nu) = free_phase {
            rho = with_free_phase(rho, nu, state.k, state.time);
        }
        let h = pauli_entropies(&rho)?;
        let e = entropy_squeezing(&h);
        Ok(ObservableRecord {
            t,
            w: atomic_inversion(state),
            rho_ee: rho.rho_ee,
            rho_gg: rho.rho_gg,
            re_rho_eg: rho.rho_eg.re,
            im_rho_eg: rho.rho_eg.im,
            h_x: h.h_x,
            h_y: h.h_y,
            h_z: h.h_z,
            e_x: e.e_x,
            e_y: e.e_y,
            norm: state.norm(),
        })
    }

    pub fn entropies(&self) -> PauliEntropies {
        PauliEntropies {
            h_x: self.h_x,
            h_y: self.h_y,
            h_z: self.h_z,
        }
    }

    /// Slack by which the entropic uncertainty relation
    /// `dH_x dH_y >= 4 / dH_z` holds (negative if violated).
    pub fn uncertainty_margin(&self) -> f64 {
        let (dx, dy, dz) = self.entropies().deltas();
        dx * dy - 4.0 / dz
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve_closed_form, ClosedForm};
    use crate::field::coherent_distribution;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn rho(ee: f64, eg: Complex64) -> ReducedAtomDensity {
        ReducedAtomDensity {
            rho_ee: ee,
            rho_gg: 1.0 - ee,
            rho_eg: eg,
        }
    }

    #[test]
    fn entropies_of_pure_excited_state() {
        let h = pauli_entropies(&rho(1.0, Complex64::new(0.0, 0.0))).unwrap();
        assert!((h.h_x - LN_2).abs() < 1e-15 && (h.h_y - LN_2).abs() < 1e-15);
        assert_eq!(h.h_z, 0.0);
        let e = entropy_squeezing(&h);
        assert!(e.e_x.abs() < 1e-15 && e.e_y.abs() < 1e-15);
    }

    #[test]
    fn entropies_of_sigma_x_eigenstate() {
        let h = pauli_entropies(&rho(0.5, Complex64::new(0.5, 0.0))).unwrap();
        assert_eq!(h.h_x, 0.0);
        assert!((h.h_y - LN_2).abs() < 1e-15 && (h.h_z - LN_2).abs() < 1e-15);
        let e = entropy_squeezing(&h);
        assert!((e.e_x - (1.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((e.e_y - (2.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn entropies_of_partially_coherent_state() {
        // independent scalar evaluation in mpmath
        let eg = Complex64::new(1.0, 1.0) / (2.0 * 2f64.sqrt()) * 0.9;
        let h = pauli_entropies(&rho(0.5, eg)).unwrap();
        assert!((h.h_x - 0.47411489595408113).abs() < 1e-14);
        assert!((h.h_y - 0.47411489595408113).abs() < 1e-14);
        assert!((h.h_z - 0.69314718055994531).abs() < 1e-15);
        let e = entropy_squeezing(&h);
        assert!((e.e_x - 0.19237800492134236).abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_is_not_squeezed() {
        let e = entropy_squeezing(&pauli_entropies(&rho(0.5, Complex64::new(0.0, 0.0))).unwrap());
        let expected = 2.0 - 2.0 * FRAC_1_SQRT_2;
        assert!((e.e_x - expected).abs() < 1e-15 && (e.e_y - expected).abs() < 1e-15);
    }

    #[test]
    fn roundoff_is_clamped_but_real_violations_raise() {
        let tiny = rho(1.0 + 1e-12, Complex64::new(0.0, 0.0));
        let h = pauli_entropies(&ReducedAtomDensity {
            rho_gg: -1e-12,
            ..tiny
        })
        .unwrap();
        assert_eq!(h.h_z, 0.0);
        let bad = ReducedAtomDensity {
            rho_ee: 1.1,
            rho_gg: -0.1,
            rho_eg: Complex64::new(0.0, 0.0),
        };
        assert!(matches!(
            pauli_entropies(&bad),
            Err(Error::NumericalConsistency { .. })
        ));
        let bad = rho(0.5, Complex64::new(0.7, 0.0));
        assert!(pauli_entropies(&bad).is_err());
    }

    #[test]
    fn vacuum_inversion_is_cosine() {
        let p = ModelParams::default();
        let f = Nonlinearity::identity();
        let dist = coherent_distribution(0.0, 1e-12, 1).unwrap();
        let cf = ClosedForm::new(&p, &f, &dist).unwrap();
        for i in 0..100 {
            let t = 0.37 * i as f64;
            assert!((atomic_inversion(&cf.state_at(t).unwrap()) - t.cos()).abs() < 1e-12);
            assert!((atomic_inversion_closed(&p, &f, &dist, t).unwrap() - t.cos()).abs() < 1e-12);
        }
        assert_eq!(
            atomic_inversion_closed(&p, &f, &dist, 0.0).unwrap(),
            dist.captured_mass
        );
    }

    #[test]
    fn half_rabi_period_of_vacuum() {
        let p = ModelParams::default();
        let dist = coherent_distribution(0.0, 1e-12, 1).unwrap();
        let s = evolve_closed_form(
            &p,
            &Nonlinearity::identity(),
            &dist,
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap();
        let r = reduced_density(&s);
        assert!((r.rho_ee - 0.5).abs() < 1e-15 && (r.rho_gg - 0.5).abs() < 1e-15);
        assert_eq!(r.rho_eg, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coherence_pairs_equal_total_photon_number() {
        // two populated doublets, k = 1: only excited level 1 overlaps ground level 1
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let state = AmplitudeState {
            time: 0.0,
            k: 1,
            excited: vec![c(0.3, 0.0), c(0.5, 0.1), c(0.0, 0.0)],
            ground: vec![c(0.2, -0.4), c(0.0, 0.6), c(0.0, 0.0)],
        };
        let r = reduced_density(&state);
        // c_{1,e} conj(c_{1,g}) + c_{2,e} conj(c_{2,g}) with c_{1,g} = ground[0], c_{2,g} = ground[1]
        let expected = c(0.5, 0.1) * c(0.2, -0.4).conj() + c(0.0, 0.0) * c(0.0, 0.6).conj();
        assert!((r.rho_eg - expected).norm() < 1e-15);
        // the misreading c_{n,e} conj(c_{n+k,g}) gives something else
        let wrong = c(0.3, 0.0) * c(0.2, -0.4).conj() + c(0.5, 0.1) * c(0.0, 0.6).conj();
        assert!((r.rho_eg - wrong).norm() > 0.1);
    }

    #[test]
    fn free_phase_only_rotates_coherence() {
        let r = rho(0.7, Complex64::new(0.2, 0.1));
        let rotated = with_free_phase(r, 2.0, 2, 0.3);
        assert!((rotated.rho_eg.norm() - r.rho_eg.norm()).abs() < 1e-15);
        assert!((rotated.rho_eg - r.rho_eg * Complex64::from_polar(1.0, -1.2)).norm() < 1e-15);
        assert_eq!(rotated.rho_ee, r.rho_ee);
    }
}
