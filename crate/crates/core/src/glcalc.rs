//! Grünwald–Letnikov discretization of fractional derivatives.
//!
//! The order-`q` derivative of a signal sampled with step `h` is
//! approximated by `h^-q * sum_{j=0..N} b_j * y[k - j]` where the weights
//! `b_j = (-1)^j * binom(q, j)` follow the recurrence
//! `b_0 = 1, b_j = (1 - (1 + q) / j) * b_{j-1}`. Negative orders give
//! fractional integrals through the same recurrence. Samples before `t = 0`
//! are taken as zero.

use crate::{Error, Result};

/// GL weights `b_0..=b_count` for a single derivative order.
#[derive(Clone, Debug, PartialEq)]
pub struct GlTable {
    order: f64,
    coeffs: Vec<f64>,
    support: usize,
}

impl GlTable {
    /// Generates `count + 1` weights for `order`.
    pub fn new(order: f64, count: usize) -> Result<Self> {
        if !order.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "GL order must be finite, got {order}"
            )));
        }
        let mut coeffs = Vec::with_capacity(count + 1);
        coeffs.push(1.0);
        let factor = 1.0 + order;
        let mut prev = 1.0;
        for j in 1..=count {
            prev *= 1.0 - factor / j as f64;
            coeffs.push(prev);
        }
        // A non-negative integer order m has b_j == 0 exactly for j > m, so
        // convolutions can stop early without changing the result.
        let support = if order >= 0.0 && order.fract() == 0.0 {
            (order as usize + 1).min(coeffs.len())
        } else {
            coeffs.len()
        };
        Ok(Self {
            order,
            coeffs,
            support,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of leading weights that can be nonzero.
    pub fn support(&self) -> usize {
        self.support
    }

    /// `sum_{j=0..n-1} b_j * history[k - j]` with `k` the last index of
    /// `history` and `n = min(max_terms, k + 1)`.
    ///
    /// Panics if the table is shorter than the requested window.
    pub fn weighted_sum(&self, history: &[f64], max_terms: usize) -> f64 {
        let n = max_terms.min(history.len()).min(self.support);
        assert!(
            n <= self.coeffs.len(),
            "GL table of {} weights cannot cover {} samples",
            self.coeffs.len(),
            n
        );
        let k = history.len();
        self.coeffs[..n]
            .iter()
            .zip(history[k - n..].iter().rev())
            .map(|(b, y)| b * y)
            .sum()
    }
}

/// Convenience wrapper around [`GlTable::new`].
pub fn gl_coefficients(order: f64, count: usize) -> Result<GlTable> {
    GlTable::new(order, count)
}

/// Uniformly sampled signal, `values[k]` taken at `t = k * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    step: f64,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample step must be positive and finite, got {step}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("signal has no samples".into()));
        }
        Ok(Self { step, values })
    }

    /// Samples `f` at `t = 0, step, ..., (len - 1) * step`.
    pub fn from_fn(step: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(step, (0..len).map(|k| f(k as f64 * step)).collect())
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Number of GL terms kept by a memory length `L`: `floor(L / h) + 1`
/// samples (`b_0..b_{floor(L/h)}`), or unbounded for full memory.
pub fn memory_terms(step: f64, memory_len: Option<f64>) -> Result<usize> {
    match memory_len {
        None => Ok(usize::MAX),
        Some(l) if !(l > 0.0) || l.is_nan() => Err(Error::InvalidArgument(format!(
            "memory length must be positive, got {l}"
        ))),
        Some(l) if l.is_infinite() => Ok(usize::MAX),
        // The small offset keeps e.g. 0.3 / 0.1 = 2.9999999999999996 at 3.
        Some(l) => Ok(((l / step) * (1.0 + 1e-12)).floor() as usize + 1),
    }
}

/// Order-`order` GL derivative of `history` at its last sample.
pub fn gl_apply(history: &SampledSignal, order: f64, memory_len: Option<f64>) -> Result<f64> {
    let terms = memory_terms(history.step, memory_len)?;
    let count = (history.len() - 1).min(terms.saturating_sub(1));
    let table = GlTable::new(order, count)?;
    Ok(history.step.powf(-order) * table.weighted_sum(&history.values, terms))
}

/// [`gl_apply`] at every sample index; same step and length as the input.
pub fn gl_series(
    signal: &SampledSignal,
    order: f64,
    memory_len: Option<f64>,
) -> Result<SampledSignal> {
    let terms = memory_terms(signal.step, memory_len)?;
    let count = (signal.len() - 1).min(terms.saturating_sub(1));
    let table = GlTable::new(order, count)?;
    let scale = signal.step.powf(-order);
    let values = (1..=signal.len())
        .map(|end| scale * table.weighted_sum(&signal.values[..end], terms))
        .collect();
    SampledSignal::new(signal.step, values)
}
