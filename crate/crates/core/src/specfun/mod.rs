//! Special functions needed by the outage expressions: log-gamma,
//! Pochhammer symbols, the hypergeometric family ₀F₁, ₁F₁, ₂F₁, and the
//! Appell function F₂.
//!
//! Every hypergeometric routine returns an [`EvalResult`] that records which
//! strategy produced the value, so a caller can audit how a number came about.
//! Series loops use compensated summation and stop once the last added term
//! is below `1e-14` of the running sum for three consecutive terms (only
//! counted once terms have started to shrink).

mod appell;
mod gamma;
mod hyper;
mod sum;

pub use appell::{appell_f2, appell_f2_using};
pub use gamma::{ln_gamma, ln_pochhammer, pochhammer};
pub use hyper::{hyp0f1, hyp1f1, hyp2f1};

pub(crate) use appell::appell_f2_scaled;
pub(crate) use gamma::{is_nonpositive_integer, ln_gamma_pos};
pub(crate) use hyper::{ln_hyp0f1_nonneg, ln_hyp2f1};

use crate::error::{Error, Result, Strategy};
use sum::CompensatedSum;
pub(crate) use sum::sum_kahan;

/// A special-function value with an error estimate and the strategy used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub strategy: Strategy,
}

/// `mantissa * exp(ln_scale)`; keeps values representable past f64 range.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
    /// Absolute error on the mantissa.
    pub err: f64,
    pub strategy: Strategy,
}

impl Scaled {
    fn one(strategy: Strategy) -> Self {
        Self {
            mantissa: 1.0,
            ln_scale: 0.0,
            err: 0.0,
            strategy,
        }
    }

    pub(crate) fn ln_abs(&self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }

    pub(crate) fn sign(&self) -> f64 {
        self.mantissa.signum()
    }

    fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    fn times_exp(mut self, ln_factor: f64) -> Self {
        self.ln_scale += ln_factor;
        self
    }

    pub(crate) fn into_eval(self) -> Result<EvalResult> {
        let f = self.ln_scale.exp();
        let value = self.mantissa * f;
        if !value.is_finite() {
            return Err(Error::Overflow(self.ln_abs()));
        }
        Ok(EvalResult {
            value,
            abs_error_estimate: self.err * f,
            strategy: self.strategy,
        })
    }
}

pub(crate) const TERM_TOL: f64 = 1e-14;
const RESCALE: f64 = 1e250;

/// Sums `Σ t_n` with `t_0 = 1` and `t_{n+1} = t_n * ratio(n)`, rescaling
/// the running total so it never overflows.
pub(crate) fn sum_series<F: FnMut(usize) -> f64>(
    mut ratio: F,
    max_terms: usize,
    what: &'static str,
) -> Result<Scaled> {
    let mut acc = CompensatedSum::default();
    let mut t = 1.0_f64;
    let mut ln_scale = 0.0;
    let mut max_abs = 0.0_f64;
    let mut small = 0;
    for n in 0..max_terms {
        acc.add(t);
        max_abs = max_abs.max(t.abs());
        if t == 0.0 {
            return Ok(finish(&acc, ln_scale, max_abs, 0.0, n));
        }
        let r = ratio(n);
        if t.abs() <= TERM_TOL * acc.value().abs() && r.abs() < 1.0 {
            small += 1;
            if small >= 3 {
                let tail = t.abs() * r.abs() / (1.0 - r.abs());
                return Ok(finish(&acc, ln_scale, max_abs, tail, n));
            }
        } else {
            small = 0;
        }
        t *= r;
        if !t.is_finite() {
            return Err(Error::NumericalFailure(format!("{what}: non-finite term")));
        }
        if t.abs() > RESCALE {
            acc.scale(1.0 / RESCALE);
            t /= RESCALE;
            max_abs /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: max_terms,
    })
}

fn finish(acc: &CompensatedSum, ln_scale: f64, max_abs: f64, tail: f64, n: usize) -> Scaled {
    let v = acc.value();
    let rounding = f64::EPSILON * (4.0 * max_abs + v.abs()) * (1.0 + (n as f64).sqrt() * 0.1);
    Scaled {
        mantissa: v,
        ln_scale,
        err: rounding + tail,
        strategy: Strategy::Series,
    }
}

pub(crate) fn check_pole(name: &'static str, value: f64) -> Result<()> {
    if is_nonpositive_integer(value) {
        Err(Error::Pole { name, value })
    } else {
        Ok(())
    }
}
