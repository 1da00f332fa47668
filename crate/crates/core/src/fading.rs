//! η-μ fading in Format 2.
//!
//! The in-phase and quadrature components are independent with densities
//! proportional to `|x|^{2μ−1} exp(−μx²/Ω_X)` and `|y|^{2μ−1} exp(−μy²/Ω_Y)`,
//! where `Ω_X = (1−η)Ω/2` and `Ω_Y = (1+η)Ω/2`. Squaring either component
//! gives a gamma variable with shape μ, so a component is sampled as a
//! random sign times the square root of a gamma draw. This is exact for any
//! μ > 0, not only for half-integer cluster counts.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::specfun::{ln_gamma_pos, ln_hyp0f1_nonneg};

/// Parameters of one η-μ population.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaMuParams {
    eta: f64,
    mu: f64,
    omega: f64,
    omega_x: f64,
    omega_y: f64,
    h: f64,
    cap_h: f64,
}

impl EtaMuParams {
    /// Builds the parameter set; `|eta| < 1`, `mu > 0`, `omega > 0`.
    pub fn new(eta: f64, mu: f64, omega: f64) -> Result<Self> {
        if !(eta.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "eta must lie in (-1, 1) for a proper density, got {eta}"
            )));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Domain(format!("omega must be positive, got {omega}")));
        }
        let omega_x = (1.0 - eta) * omega / 2.0;
        // Ω_Y as the remainder so Ω_X + Ω_Y == Ω holds bit-exactly.
        let omega_y = omega - omega_x;
        let one_minus_eta2 = 1.0 - eta * eta;
        Ok(Self {
            eta,
            mu,
            omega,
            omega_x,
            omega_y,
            h: 1.0 / one_minus_eta2,
            cap_h: eta / one_minus_eta2,
        })
    }

    /// Rayleigh fading with mean power `omega` (η = 0, μ = 1/2).
    pub fn rayleigh(omega: f64) -> Result<Self> {
        Self::new(0.0, 0.5, omega)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn omega_x(&self) -> f64 {
        self.omega_x
    }
    pub fn omega_y(&self) -> f64 {
        self.omega_y
    }
    /// `h = 1/(1−η²)`.
    pub fn h(&self) -> f64 {
        self.h
    }
    /// `H = η/(1−η²)`.
    pub fn cap_h(&self) -> f64 {
        self.cap_h
    }

    /// Same fading law with a different mean power.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.eta, self.mu, omega)
    }

    /// Raw moment of the power `x² + y²`; orders 1 and 2 are supported.
    pub fn power_moment(&self, order: u32) -> Result<f64> {
        match order {
            1 => Ok(self.omega_x + self.omega_y),
            2 => {
                let k = (self.mu + 1.0) / self.mu;
                Ok(k * (self.omega_x.powi(2) + self.omega_y.powi(2))
                    + 2.0 * self.omega_x * self.omega_y)
            }
            _ => Err(Error::Domain(format!(
                "power moment of order {order} is not supported (1 or 2)"
            ))),
        }
    }

    /// A reusable sampler for this population.
    pub fn sampler(&self) -> EtaMuSampler {
        EtaMuSampler::new(self)
    }
}

/// One complex channel coefficient `x + jy`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexSample {
    pub re: f64,
    pub im: f64,
}

impl ComplexSample {
    pub fn norm_sqr(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Draws complex η-μ coefficients.
#[derive(Clone, Debug)]
pub struct EtaMuSampler {
    x_power: Gamma<f64>,
    y_power: Gamma<f64>,
}

impl EtaMuSampler {
    fn new(p: &EtaMuParams) -> Self {
        // Shape and scale are validated by EtaMuParams::new.
        let x_power = Gamma::new(p.mu, p.omega_x / p.mu).expect("valid gamma parameters");
        let y_power = Gamma::new(p.mu, p.omega_y / p.mu).expect("valid gamma parameters");
        Self { x_power, y_power }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexSample {
        let gx = self.x_power.sample(rng);
        let gy = self.y_power.sample(rng);
        let signs: u8 = rng.random();
        let re = if signs & 1 == 0 { gx.sqrt() } else { -gx.sqrt() };
        let im = if signs & 2 == 0 { gy.sqrt() } else { -gy.sqrt() };
        ComplexSample { re, im }
    }

    /// Power `x² + y²` of one coefficient, without forming the signs.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.x_power.sample(rng) + self.y_power.sample(rng)
    }
}

/// Draws one complex η-μ coefficient.
pub fn sample_complex<R: Rng + ?Sized>(params: &EtaMuParams, rng: &mut R) -> ComplexSample {
    params.sampler().sample(rng)
}

/// ln of the density of the sum of `n_r` i.i.d. η-μ powers at `y > 0`.
pub fn sum_power_ln_pdf(y: f64, params: &EtaMuParams, n_r: usize) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("density argument must be positive, got {y}")));
    }
    if n_r == 0 {
        return Err(Error::Domain("n_r must be at least 1".into()));
    }
    let m = n_r as f64 * params.mu;
    let y_bar = n_r as f64 * (params.omega_x + params.omega_y);
    let u = y / y_bar;
    let ln_norm = (2.0 * PI.sqrt()).ln() + 2.0 * m * m.ln() + m * params.h.ln()
        - ln_gamma_pos(m)
        - ln_gamma_pos(m + 0.5)
        - y_bar.ln();
    let arg = (m * params.cap_h * u).powi(2);
    Ok(ln_norm + (2.0 * m - 1.0) * u.ln() - 2.0 * m * params.h * u
        + ln_hyp0f1_nonneg(m + 0.5, arg)?)
}

/// Density of the sum of `n_r` i.i.d. η-μ powers, mean `ȳ = n_r Ω`.
pub fn sum_power_pdf(y: f64, params: &EtaMuParams, n_r: usize) -> Result<f64> {
    Ok(sum_power_ln_pdf(y, params, n_r)?.exp())
}
