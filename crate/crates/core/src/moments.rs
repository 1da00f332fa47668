//! Moment matching of the interference terms.
//!
//! Each interference term `E_i |cᴴc_i|²` is replaced by `|cᴴc| z_i` with
//! `z_i ~ Gamma(a_i, b_i)` chosen so the first two moments agree. The sum of
//! the `z_i` is collapsed into one gamma law with the same first two
//! moments, and for the second approximation the user's combined power is
//! itself replaced by a moment-matched `Gamma(p, q)`.

use crate::error::{Error, Result};
use crate::fading::EtaMuParams;

/// Receiver and interference configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    n_r: usize,
    user: EtaMuParams,
    interferer: EtaMuParams,
    energies: Vec<f64>,
}

impl Scenario {
    /// `energies` are the linear mean energies `E_i` of the interferers.
    pub fn new(
        n_r: usize,
        user: EtaMuParams,
        interferer: EtaMuParams,
        energies: Vec<f64>,
    ) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::Domain("n_r must be at least 1".into()));
        }
        if energies.is_empty() {
            return Err(Error::Domain("at least one interferer is required".into()));
        }
        if let Some(e) = energies.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Domain(format!("interferer energies must be positive, got {e}")));
        }
        Ok(Self {
            n_r,
            user,
            interferer,
            energies,
        })
    }

    /// Same as [`Scenario::new`] with energies given in dB.
    pub fn from_db(
        n_r: usize,
        user: EtaMuParams,
        interferer: EtaMuParams,
        energies_db: &[f64],
    ) -> Result<Self> {
        Self::new(n_r, user, interferer, energies_db.iter().map(|&d| db_to_linear(d)).collect())
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn n_i(&self) -> usize {
        self.energies.len()
    }
    pub fn user(&self) -> &EtaMuParams {
        &self.user
    }
    pub fn interferer(&self) -> &EtaMuParams {
        &self.interferer
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn with_user(&self, user: EtaMuParams) -> Self {
        Self { user, ..self.clone() }
    }

    pub fn with_interferer(&self, interferer: EtaMuParams) -> Self {
        Self {
            interferer,
            ..self.clone()
        }
    }

    pub fn with_n_r(&self, n_r: usize) -> Result<Self> {
        Self::new(n_r, self.user, self.interferer, self.energies.clone())
    }

    /// `ȳ = N_R (Ω_X + Ω_Y)` of the user.
    pub fn user_mean_power(&self) -> f64 {
        self.n_r as f64 * (self.user.omega_x() + self.user.omega_y())
    }

    fn energy(&self, i: usize) -> Result<f64> {
        self.energies.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.energies.len(),
        })
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Shape/scale pair of a gamma law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaLaw {
    pub shape: f64,
    pub scale: f64,
}

impl GammaLaw {
    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// All moment-matched gamma parameters for a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFit {
    pub per_interferer: Vec<GammaLaw>,
    /// Collapsed interference law `(a, b)`.
    pub aggregate: GammaLaw,
    /// User-power law `(p, q)` of the second approximation.
    pub user: GammaLaw,
}

impl GammaFit {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let per_interferer = (0..s.n_i())
            .map(|i| per_interferer_fit(s, i))
            .collect::<Result<Vec<_>>>()?;
        let aggregate = aggregate_fit(&per_interferer)?;
        Ok(Self {
            per_interferer,
            aggregate,
            user: approx2_user_fit(s),
        })
    }
}

/// `E[E_i |cᴴc_i|²]` for the zero-based interferer index `i`.
pub fn cross_moment_1(s: &Scenario, i: usize) -> Result<f64> {
    let e = s.energy(i)?;
    let (u, v) = (&s.user, &s.interferer);
    Ok(e * s.n_r as f64 * (u.omega_x() + u.omega_y()) * (v.omega_x() + v.omega_y()))
}

/// `E[(E_i |cᴴc_i|²)²]` for the zero-based interferer index `i`.
pub fn cross_moment_2(s: &Scenario, i: usize) -> Result<f64> {
    let e = s.energy(i)?;
    let (u, v) = (&s.user, &s.interferer);
    let n = s.n_r as f64;
    let pairs = n * (n - 1.0);
    let ku = (u.mu() + 1.0) / u.mu();
    let kv = (v.mu() + 1.0) / v.mu();
    let sq_u = u.omega_x().powi(2) + u.omega_y().powi(2);
    let sq_v = v.omega_x().powi(2) + v.omega_y().powi(2);
    let xy_u = u.omega_x() * u.omega_y();
    let xy_v = v.omega_x() * v.omega_y();
    let bracket = sq_u * sq_v * (3.0 * pairs + n * ku * kv)
        + sq_u * xy_v * (2.0 * pairs + 2.0 * n * ku)
        + sq_v * xy_u * (2.0 * pairs + 2.0 * n * kv)
        + xy_v * xy_u * (4.0 * n * n + 8.0 * pairs);
    Ok(e * e * bracket)
}

/// `(E[|cᴴc|], E[|cᴴc|²])` of the user's combined power.
pub fn user_norm_moments(s: &Scenario) -> (f64, f64) {
    let u = &s.user;
    let n = s.n_r as f64;
    let m1 = n * (u.omega_x() + u.omega_y());
    let ku = (u.mu() + 1.0) / u.mu();
    let m2 = n
        * ((ku + n - 1.0) * (u.omega_x().powi(2) + u.omega_y().powi(2))
            + 2.0 * n * u.omega_x() * u.omega_y());
    (m1, m2)
}

/// Gamma law `(a_i, b_i)` of the `i`-th (zero-based) interference factor.
pub fn per_interferer_fit(s: &Scenario, i: usize) -> Result<GammaLaw> {
    let c1 = cross_moment_1(s, i)?;
    let c2 = cross_moment_2(s, i)?;
    let (m1, m2) = user_norm_moments(s);
    let mean = c1 / m1;
    // Variance-form numerator; fma keeps the product exact before the
    // subtraction of two nearly equal terms.
    let numerator = (-mean).mul_add(mean, c2 / m2);
    let scale = numerator / mean;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::DegenerateFit(format!(
            "interferer {i}: non-positive scale {scale} (mean {mean}, second moment ratio {})",
            c2 / m2
        )));
    }
    Ok(GammaLaw {
        shape: mean / scale,
        scale,
    })
}

/// Collapses a sum of independent gamma variables into one gamma law with
/// the same mean and variance.
pub fn aggregate_fit(per: &[GammaLaw]) -> Result<GammaLaw> {
    if per.is_empty() {
        return Err(Error::Domain("aggregate fit needs at least one gamma law".into()));
    }
    if let Some(g) = per.iter().find(|g| !(g.shape > 0.0 && g.scale > 0.0)) {
        return Err(Error::Domain(format!("gamma parameters must be positive: {g:?}")));
    }
    let s1: f64 = per.iter().map(|g| g.shape * g.scale).sum();
    let s2: f64 = per.iter().map(|g| g.shape * g.scale * g.scale).sum();
    Ok(GammaLaw {
        shape: s1 * s1 / s2,
        scale: s2 / s1,
    })
}

/// Gamma law `(p, q)` matched to the user's combined η-μ power.
pub fn approx2_user_fit(s: &Scenario) -> GammaLaw {
    let u = &s.user;
    let n = s.n_r as f64;
    let p = 2.0 * u.mu() * n / (1.0 + u.eta() * u.eta());
    GammaLaw {
        shape: p,
        scale: s.user_mean_power() / p,
    }
}
