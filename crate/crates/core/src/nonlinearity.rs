//! The intensity-deformation function `f(n)` and its f-factorials.
//!
//! Deforming `a -> a f(n)` turns every coupling of the model into an
//! operator-valued function of the photon number. The quantities that enter
//! the dynamics are `f(n)^2` and ratios of f-factorials
//! `[f(n+k)]! / [f(n)]! = f(n+1) ... f(n+k)`, with `[f(0)]! = 1`.
//! Factorial-like quantities are handled in log space so that Fock levels in
//! the hundreds do not overflow.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Which deformation function is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NonlinearityKind {
    /// `f(n) = 1`: the undeformed model.
    Identity,
    /// `f(n) = sqrt(n)`.
    SqrtN,
    /// A user-supplied table or closure.
    Custom,
}

type Evaluator = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A deformation function together with a cached table of
/// `ln [f(n)]! = sum_{j=1..n} ln f(j)`.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    custom: Option<Evaluator>,
    log_factorials: Vec<f64>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("kind", &self.kind)
            .field("cached_levels", &self.log_factorials.len())
            .finish()
    }
}

impl Nonlinearity {
    fn with_kind(kind: NonlinearityKind, custom: Option<Evaluator>) -> Self {
        Nonlinearity {
            kind,
            custom,
            log_factorials: vec![0.0],
        }
    }

    pub fn identity() -> Self {
        Self::with_kind(NonlinearityKind::Identity, None)
    }

    pub fn sqrt_n() -> Self {
        Self::with_kind(NonlinearityKind::SqrtN, None)
    }

    /// Custom deformation from a closure. The closure is only ever called
    /// with `n >= 1` by the dynamics; `f(0)` never enters as a divisor.
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::with_kind(NonlinearityKind::Custom, Some(Arc::new(f)))
    }

    /// Custom deformation from tabulated values `f(1), f(2), ..., f(N)`.
    /// Evaluating beyond `N` yields an invalid-nonlinearity error (NaN).
    pub fn from_table(values: Vec<f64>) -> Self {
        let values: Arc<[f64]> = values.into();
        Self::custom(move |n| match n {
            0 => 0.0,
            n => values.get(n as usize - 1).copied().unwrap_or(f64::NAN),
        })
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    /// `f(n)`. Values for `n >= 1` must be finite and strictly positive.
    pub fn eval_f(&self, n: u64) -> Result<f64> {
        let value = match self.kind {
            NonlinearityKind::Identity => 1.0,
            NonlinearityKind::SqrtN => (n as f64).sqrt(),
            NonlinearityKind::Custom => (self.custom.as_ref().expect("custom evaluator"))(n),
        };
        let ok = value.is_finite() && if n == 0 { value >= 0.0 } else { value > 0.0 };
        if ok {
            Ok(value)
        } else {
            Err(Error::InvalidNonlinearity { n, value })
        }
    }

    /// `f(n)^2`; for `SqrtN` this is exactly `n`.
    pub fn f_squared(&self, n: u64) -> Result<f64> {
        match self.kind {
            NonlinearityKind::Identity => Ok(1.0),
            NonlinearityKind::SqrtN => Ok(n as f64),
            NonlinearityKind::Custom => self.eval_f(n).map(|v| v * v),
        }
    }

    fn ln_f(&self, j: u64) -> Result<f64> {
        match self.kind {
            NonlinearityKind::Identity => Ok(0.0),
            NonlinearityKind::SqrtN => Ok(0.5 * (j as f64).ln()),
            NonlinearityKind::Custom => self.eval_f(j).map(f64::ln),
        }
    }

    /// Grow the cached log-f-factorial table to cover `0..=n_max`.
    pub fn prepare(&mut self, n_max: usize) -> Result<()> {
        let mut acc = *self.log_factorials.last().expect("table holds entry 0");
        for j in self.log_factorials.len()..=n_max {
            acc += self.ln_f(j as u64)?;
            self.log_factorials.push(acc);
        }
        Ok(())
    }

    /// Number of levels currently cached.
    pub fn cached_len(&self) -> usize {
        self.log_factorials.len()
    }

    /// `ln [f(n)]!`. Served from the cache when `n` is covered, otherwise
    /// summed on the fly from the end of the cache.
    pub fn f_factorial_log(&self, n: usize) -> Result<f64> {
        if let Some(&v) = self.log_factorials.get(n) {
            return Ok(v);
        }
        let start = self.log_factorials.len();
        let mut acc = *self.log_factorials.last().expect("table holds entry 0");
        for j in start..=n {
            acc += self.ln_f(j as u64)?;
        }
        Ok(acc)
    }

    /// `ln([f(n+k)]! / [f(n)]!) = sum_{j=n+1..n+k} ln f(j)`.
    pub fn f_ratio_log(&self, n: usize, k: usize) -> Result<f64> {
        let mut acc = 0.0;
        for j in n + 1..=n + k {
            acc += self.ln_f(j as u64)?;
        }
        Ok(acc)
    }

    /// `[f(n+k)]! / [f(n)]! = f(n+1) f(n+2) ... f(n+k)`.
    pub fn f_ratio(&self, n: usize, k: usize) -> Result<f64> {
        self.f_ratio_log(n, k).map(f64::exp)
    }
}
