//! Collapse/revival detection and periodicity on inversion time series.

use serde::{Deserialize, Serialize};

use crate::observables::ObservableRecord;

/// Envelope fraction of the initial amplitude that separates "collapsed"
/// from "oscillating".
pub const DEFAULT_THRESHOLD: f64 = 0.2;
/// Sliding-window width as a fraction of the grid.
pub const WINDOW_FRACTION: f64 = 0.02;
/// Shorter series are not analysed.
pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revival {
    /// Time at which the envelope peaks within the revival.
    pub t_center: f64,
    pub envelope_amplitude: f64,
}

/// Sliding RMS of `w - mean(w)`, scaled by `sqrt(2)` so that a sinusoid of
/// amplitude `A` has envelope `A`. The window is centred and shrinks at the
/// ends of the series.
pub fn envelope(w: &[f64]) -> Vec<f64> {
    if w.is_empty() {
        return Vec::new();
    }
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let half = ((WINDOW_FRACTION * w.len() as f64 / 2.0).round() as usize).max(1);
    let mut prefix = Vec::with_capacity(w.len() + 1);
    prefix.push(0.0);
    for x in w {
        let d = x - mean;
        prefix.push(prefix.last().unwrap() + d * d);
    }
    (0..w.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(w.len());
            let ms = ((prefix[hi] - prefix[lo]) / (hi - lo) as f64).max(0.0);
            (2.0 * ms).sqrt()
        })
        .collect()
}

/// Revivals in the `W` column of `records` with the default threshold.
pub fn measure_revivals(records: &[ObservableRecord]) -> Vec<Revival> {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let w: Vec<f64> = records.iter().map(|r| r.w).collect();
    measure_revivals_series(&t, &w, DEFAULT_THRESHOLD)
}

/// A revival is a stretch where the envelope is at or above
/// `threshold * envelope[0]` that follows a stretch below it. A stretch that
/// is still above threshold at the end of the series is reported too.
pub fn measure_revivals_series(t: &[f64], w: &[f64], threshold: f64) -> Vec<Revival> {
    if w.len() < MIN_SAMPLES || t.len() != w.len() {
        return Vec::new();
    }
    let env = envelope(w);
    let level = threshold * env[0];
    if !(level > 1e-12) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut collapsed = false;
    let mut current: Option<Revival> = None;
    for (&ti, &e) in t.iter().zip(&env) {
        if e < level {
            collapsed = true;
            if let Some(r) = current.take() {
                out.push(r);
            }
        } else if collapsed {
            match &mut current {
                Some(r) if e <= r.envelope_amplitude => {}
                slot => {
                    *slot = Some(Revival {
                        t_center: ti,
                        envelope_amplitude: e,
                    })
                }
            }
        }
    }
    out.extend(current);
    out
}

/// Largest Pearson correlation between `w` and a lagged copy of itself,
/// over lags past the first zero crossing of the correlation and up to half
/// the series. Returns `(lag, correlation)`.
pub fn autocorrelation_peak(w: &[f64]) -> Option<(usize, f64)> {
    let n = w.len();
    if n < 4 {
        return None;
    }
    let corr = |lag: usize| pearson(&w[..n - lag], &w[lag..]);
    let mut lag = 1;
    while lag <= n / 2 && corr(lag) > 0.0 {
        lag += 1;
    }
    (lag..=n / 2)
        .map(|l| (l, corr(l)))
        .filter(|(_, c)| c.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
