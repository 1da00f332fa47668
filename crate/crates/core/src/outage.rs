//! Closed-form outage approximations and the matching SIR densities.
//!
//! The first approximation keeps the exact η-μ law of the user's combined
//! power and replaces the interference by the collapsed gamma law `(a, b)`;
//! its outage is an Appell F₂ expression. The second also replaces the user
//! power by `Gamma(p, q)`, which makes the SIR a scaled beta-prime variable.
//!
//! The η, μ, h and H entering the first approximation are those of the user.
//! Prefactors built from powers and gamma functions are assembled in log
//! space and exponentiated once.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::moments::{db_to_linear, GammaFit, Scenario};
use crate::quad::{integrate, QuadOptions};
use crate::specfun::{appell_f2_scaled, ln_gamma_pos, ln_hyp2f1, ln_pochhammer};

/// Results outside `[-CLAMP_TOL, 1 + CLAMP_TOL]` are treated as failures.
pub const CLAMP_TOL: f64 = 1e-9;

/// Source of an outage value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Approx1,
    Approx2,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Approx1 => "approx1",
            Method::Approx2 => "approx2",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "approx1" => Some(Method::Approx1),
            "approx2" => Some(Method::Approx2),
            "monte_carlo" | "mc" => Some(Method::MonteCarlo),
            _ => None,
        }
    }
}

/// One evaluated outage probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutagePoint {
    pub gamma0_db: f64,
    pub gamma0_lin: f64,
    pub p_out: f64,
    pub method: Method,
}

impl OutagePoint {
    pub fn new(gamma0_db: f64, p_out: f64, method: Method) -> Self {
        Self {
            gamma0_db,
            gamma0_lin: db_to_linear(gamma0_db),
            p_out,
            method,
        }
    }
}

fn check_probability(p: f64, what: &str) -> Result<f64> {
    if !(p >= -CLAMP_TOL && p <= 1.0 + CLAMP_TOL) {
        return Err(Error::NumericalFailure(format!(
            "{what} produced {p}, outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn check_threshold(gamma0: f64) -> Result<()> {
    if !(gamma0 > 0.0) {
        return Err(Error::Domain(format!("target SIR must be positive, got {gamma0}")));
    }
    Ok(())
}

/// `ln(2√π m^{2m} h^m / (Γ(m) Γ(m + 1/2)))`, shared by the η-μ sum density
/// and both first-approximation formulas.
fn ln_eta_mu_norm(m: f64, h: f64) -> f64 {
    (2.0 * PI.sqrt()).ln() + 2.0 * m * m.ln() + m * h.ln() - ln_gamma_pos(m) - ln_gamma_pos(m + 0.5)
}

/// Outage probability of the first approximation (Appell F₂ form).
pub fn outage_approx1(scenario: &Scenario, fit: &GammaFit, gamma0: f64) -> Result<f64> {
    check_threshold(gamma0)?;
    let u = scenario.user();
    let m = scenario.n_r() as f64 * u.mu();
    let (h, cap_h) = (u.h(), u.cap_h());
    let (a, b) = (fit.aggregate.shape, fit.aggregate.scale);
    let y_bar = scenario.user_mean_power();

    let s = y_bar / (b * gamma0);
    let d = 2.0 * m * (h + cap_h) + s;
    let w = s / d;
    let z = 4.0 * m * cap_h / d;

    let f2 = appell_f2_scaled(2.0 * m + a, 1.0, m, a + 1.0, 2.0 * m, w, z)?;
    let ln_prefactor = a * s.ln() - ln_gamma_pos(a + 1.0) + ln_eta_mu_norm(m, h)
        + ln_gamma_pos(2.0 * m + a)
        - (2.0 * m + a) * d.ln();
    let complement = f2.sign() * (ln_prefactor + f2.ln_abs()).exp();
    check_probability(1.0 - complement, "approximation 1")
}

/// `P[Z < x]` for `Z = Gamma(p, 1) / Gamma(a, 1)` (beta-prime with shapes p, a).
///
/// Arguments above 1 are evaluated through `1 − P[1/Z < 1/x]`, keeping the
/// mapped ₂F₁ argument at or below 1/2.
pub fn beta_prime_cdf(p: f64, a: f64, x: f64) -> Result<f64> {
    if !(p > 0.0 && a > 0.0) {
        return Err(Error::Domain(format!("beta-prime shapes must be positive ({p}, {a})")));
    }
    if x.is_nan() {
        return Err(Error::Domain("beta-prime argument is NaN".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x <= 1.0 {
        lower_tail(p, a, x)
    } else {
        Ok(1.0 - lower_tail(a, p, 1.0 / x)?)
    }
}

/// `(n)_m x^m ₂F₁(m + n, m; m + 1; −x) / Γ(m + 1)` with shapes `m`, `n`.
fn lower_tail(m: f64, n: f64, x: f64) -> Result<f64> {
    let f = ln_hyp2f1(m + n, m, m + 1.0, -x)?;
    let ln = ln_pochhammer(n, m)? + m * x.ln() - ln_gamma_pos(m + 1.0) + f.ln_abs();
    Ok(f.sign() * ln.exp())
}

/// Outage probability of the second approximation (beta-prime form).
pub fn outage_approx2(fit: &GammaFit, gamma0: f64) -> Result<f64> {
    check_threshold(gamma0)?;
    let x = fit.aggregate.scale / fit.user.scale * gamma0;
    let p = beta_prime_cdf(fit.user.shape, fit.aggregate.shape, x)?;
    check_probability(p, "approximation 2")
}

/// SIR density of the first approximation.
pub fn sir_pdf_approx1(scenario: &Scenario, fit: &GammaFit, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("SIR must be positive, got {gamma}")));
    }
    let u = scenario.user();
    let m = scenario.n_r() as f64 * u.mu();
    let (h, cap_h) = (u.h(), u.cap_h());
    let (a, b) = (fit.aggregate.shape, fit.aggregate.scale);
    let g = gamma / scenario.user_mean_power();
    let k = 2.0 * m * h * g + 1.0 / b;
    let arg = (2.0 * m * cap_h * g / k).powi(2);
    let f = ln_hyp2f1(m + a / 2.0, m + (a + 1.0) / 2.0, m + 0.5, arg)?;
    let ln = ln_eta_mu_norm(m, h) + ln_gamma_pos(2.0 * m + a) - ln_gamma_pos(a) - a * b.ln()
        - gamma.ln()
        + 2.0 * m * g.ln()
        - (2.0 * m + a) * k.ln()
        + f.ln_abs();
    Ok(f.sign() * ln.exp())
}

/// SIR density of the second approximation (scaled beta-prime).
pub fn sir_pdf_approx2(fit: &GammaFit, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("SIR must be positive, got {gamma}")));
    }
    let (p, a) = (fit.user.shape, fit.aggregate.shape);
    let ratio = fit.aggregate.scale / fit.user.scale;
    let ln = ln_gamma_pos(a + p) - ln_gamma_pos(a) - ln_gamma_pos(p) + p * ratio.ln()
        + (p - 1.0) * gamma.ln()
        - (a + p) * (ratio * gamma).ln_1p();
    Ok(ln.exp())
}

/// Evaluates an analytic method over a dB grid; failures stay per point.
pub fn outage_curve(
    scenario: &Scenario,
    fit: &GammaFit,
    method: Method,
    grid_db: &[f64],
    exec: Execution,
) -> Result<Vec<Result<f64>>> {
    let eval: fn(&Scenario, &GammaFit, f64) -> Result<f64> = match method {
        Method::Approx1 => outage_approx1,
        Method::Approx2 => |_, fit, g| outage_approx2(fit, g),
        Method::MonteCarlo => {
            return Err(Error::Domain(
                "Monte-Carlo curves come from montecarlo::empirical_outage".into(),
            ))
        }
    };
    Ok(exec.map_indexed(grid_db.len(), |j| {
        eval(scenario, fit, db_to_linear(grid_db[j]))
    }))
}

/// `∫₀^x pdf` by adaptive quadrature on decade panels below `x`.
///
/// Used to cross-check the closed-form outage expressions against their
/// densities.
pub fn cdf_by_quadrature<F: FnMut(f64) -> Result<f64>>(mut pdf: F, x: f64) -> Result<f64> {
    let mut failure = None;
    let mut f = |g: f64| {
        pdf(g).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    };
    let opts = QuadOptions::with_tol(1e-14, 1e-12);
    let mut total = integrate(&mut f, 0.0, x * 1e-8, opts)?.value;
    let mut lo = x * 1e-8;
    while lo < x {
        let hi = (lo * 10.0).min(x);
        total += integrate(&mut f, lo, hi, opts)?.value;
        lo = hi;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(total),
    }
}
