//! Initial photon-number distributions `rho_nn(0)` on a truncated Fock basis.
//!
//! All three field states are parameterized by their mean photon number.
//! Weights are built in log space and exponentiated once per level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tail mass left outside the truncated basis.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Extra Fock levels appended after the `+k` padding.
pub const SAFETY_MARGIN: usize = 10;

/// Upper bound on the truncation search.
const MAX_LEVELS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Coherent,
    #[serde(alias = "squeezed_vacuum")]
    Squeezed,
    Thermal,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Coherent => "coherent",
            FieldKind::Squeezed => "squeezed",
            FieldKind::Thermal => "thermal",
        }
    }
}

/// `rho_nn(0)` for `n = 0..=n_cut`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonDistribution {
    pub kind: FieldKind,
    pub nbar: f64,
    pub probabilities: Vec<f64>,
    pub captured_mass: f64,
    pub n_cut: usize,
}

impl PhotonDistribution {
    /// Build a distribution of the given kind, truncated by [`choose_truncation`].
    pub fn new(kind: FieldKind, nbar: f64, tail_eps: f64, k: usize) -> Result<Self> {
        check_nbar(nbar)?;
        check_tail(tail_eps)?;
        let n_cut = choose_truncation(kind, nbar, tail_eps, k);
        let probabilities: Vec<f64> = (0..=n_cut).map(|n| probability(kind, nbar, n)).collect();
        let captured_mass = ordered_sum(&probabilities);
        Ok(PhotonDistribution {
            kind,
            nbar,
            probabilities,
            captured_mass,
            n_cut,
        })
    }

    /// Empirical mean photon number `sum n rho_nn`.
    pub fn mean(&self) -> f64 {
        ordered_sum(
            self.probabilities
                .iter()
                .enumerate()
                .map(|(n, p)| n as f64 * p),
        )
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

pub fn coherent_distribution(nbar: f64, tail_eps: f64, k: usize) -> Result<PhotonDistribution> {
    PhotonDistribution::new(FieldKind::Coherent, nbar, tail_eps, k)
}

pub fn squeezed_distribution(nbar: f64, tail_eps: f64, k: usize) -> Result<PhotonDistribution> {
    PhotonDistribution::new(FieldKind::Squeezed, nbar, tail_eps, k)
}

pub fn thermal_distribution(nbar: f64, tail_eps: f64, k: usize) -> Result<PhotonDistribution> {
    PhotonDistribution::new(FieldKind::Thermal, nbar, tail_eps, k)
}

/// Bose-Einstein occupation `1 / (exp(hbar nu / k_B T) - 1)`.
pub fn thermal_nbar_from_temperature(
    frequency: f64,
    temperature: f64,
    hbar_over_kb: f64,
) -> Result<f64> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if !(hbar_over_kb > 0.0 && hbar_over_kb.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "hbar/k_B must be positive, got {hbar_over_kb}"
        )));
    }
    let x = hbar_over_kb * frequency / temperature;
    Ok(1.0 / x.exp_m1())
}

/// Coherent amplitude modulus `|alpha| = sqrt(nbar)`.
pub fn coherent_amplitude(nbar: f64) -> f64 {
    nbar.sqrt()
}

/// Squeeze parameter `r` with `sinh^2 r = nbar`.
pub fn squeeze_parameter(nbar: f64) -> f64 {
    nbar.sqrt().asinh()
}

/// Smallest `N` whose cumulative mass reaches `1 - tail_eps`, padded by `k`
/// and by [`SAFETY_MARGIN`].
pub fn choose_truncation(kind: FieldKind, nbar: f64, tail_eps: f64, k: usize) -> usize {
    let mut cum = NeumaierSum::default();
    let mut n = 0;
    loop {
        cum.add(probability(kind, nbar, n));
        if 1.0 - cum.value() <= tail_eps || n >= MAX_LEVELS {
            return n + k + SAFETY_MARGIN;
        }
        n += 1;
    }
}

/// `ln rho_nn(0)`; `-inf` for levels with zero weight.
pub fn log_probability(kind: FieldKind, nbar: f64, n: usize) -> f64 {
    let nf = n as f64;
    if nbar == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    match kind {
        // e^{-nbar} nbar^n / n!
        FieldKind::Coherent => -nbar + nf * nbar.ln() - ln_factorial(n),
        // nbar^m (2m)! / ((2^m m!)^2 (1 + nbar)^{m + 1/2}) at n = 2m, zero at odd n
        FieldKind::Squeezed => {
            if n % 2 == 1 {
                return f64::NEG_INFINITY;
            }
            let m = n / 2;
            let mf = m as f64;
            mf * nbar.ln() + ln_factorial(2 * m)
                - 2.0 * (mf * std::f64::consts::LN_2 + ln_factorial(m))
                - (mf + 0.5) * nbar.ln_1p()
        }
        // nbar^n / (1 + nbar)^{n+1}
        FieldKind::Thermal => nf * nbar.ln() - (nf + 1.0) * nbar.ln_1p(),
    }
}

pub fn probability(kind: FieldKind, nbar: f64, n: usize) -> f64 {
    log_probability(kind, nbar, n).exp()
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    statrs::function::factorial::ln_factorial(n as u64)
}

fn check_nbar(nbar: f64) -> Result<()> {
    if nbar >= 0.0 && nbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "mean photon number must be non-negative, got {nbar}"
        )))
    }
}

fn check_tail(tail_eps: f64) -> Result<()> {
    if tail_eps > 0.0 && tail_eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "tail_eps must lie in (0, 1), got {tail_eps}"
        )))
    }
}

/// Compensated summation in the given order.
#[derive(Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn ordered_sum<I>(values: I) -> f64
where
    I: IntoIterator,
    I::Item: std::borrow::Borrow<f64>,
{
    let mut acc = NeumaierSum::default();
    for v in values {
        acc.add(*std::borrow::Borrow::borrow(&v));
    }
    acc.value()
}
