//! Appell's second hypergeometric function
//!
//! ```text
//! F₂(a; b1, b2; c1, c2; w, z) = Σ_{m,n} (a)_{m+n} (b1)_m (b2)_n / ((c1)_m (c2)_n m! n!) wᵐ zⁿ
//! ```
//!
//! Two strategies are available. Inside `|w| + |z| ≤ 0.95` the double series
//! is summed row by row: since `(a)_{m+n} = (a)_m (a+m)_n`, row `m` is a
//! ₂F₁-type series in `z` scaled by the `m`-th term of a ₂F₁-type series in
//! `w`. Negative arguments are first made positive with the Euler-type
//! transformation in each variable. Elsewhere the single integral
//!
//! ```text
//! F₂ = 1/Γ(a) ∫₀^∞ x^{a−1} e^{−x} ₁F₁(b1; c1; wx) ₁F₁(b2; c2; zx) dx
//! ```
//!
//! is integrated numerically. The integrand decays like `e^{−(1−w⁺−z⁺)x}`,
//! so the quadrature needs `a > 0` and `w⁺ + z⁺ < 1`. Points within
//! [`MIN_DECAY`] of the line `w + z = 1` (positive arguments) are outside
//! both strategies and reported as an unsupported domain.

use std::cell::RefCell;

use super::hyper::hyp1f1_scaled;
use super::sum::CompensatedSum;
use super::{check_pole, ln_gamma_pos, sum_series, EvalResult, Scaled, TERM_TOL};
use crate::error::{Error, Result, Strategy};
use crate::quad::{integrate, integrate_to_infinity, QuadOptions};

/// Largest `|w| + |z|` for which the double series is used.
pub const SERIES_RADIUS: f64 = 0.95;
const MAX_TERMS: usize = 10_000;
const SCAN_POINTS: usize = 400;
/// Smallest decay rate `1 − w⁺ − z⁺` accepted by the quadrature; closer to
/// the line `w + z = 1` the arguments themselves carry no usable digits.
pub const MIN_DECAY: f64 = 1e-9;
/// Panels whose log-integrand sits this far below the peak are dropped.
const LN_NEGLIGIBLE: f64 = 80.0;

/// Appell F₂(a; b1, b2; c1, c2; w, z).
pub fn appell_f2(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, w: f64, z: f64) -> Result<EvalResult> {
    appell_f2_scaled(a, b1, b2, c1, c2, w, z)?.into_eval()
}

/// Evaluates F₂ with one fixed strategy, for cross-checking the two.
///
/// `Strategy::Series` requires `|w| + |z| < 1`; `Strategy::Quadrature`
/// requires `a > 0` and `w⁺ + z⁺ ≤ 1 − MIN_DECAY`.
#[allow(clippy::too_many_arguments)]
pub fn appell_f2_using(
    strategy: Strategy,
    a: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    w: f64,
    z: f64,
) -> Result<EvalResult> {
    check_pole("c1", c1)?;
    check_pole("c2", c2)?;
    let unsupported = |reason: &str| Error::UnsupportedDomain {
        reason: format!("F2 at (w, z) = ({w}, {z}): {reason}"),
        attempted: vec![strategy],
    };
    match strategy {
        Strategy::Series if w.abs() + z.abs() < 1.0 => double_series(a, b1, b2, c1, c2, w, z)?.into_eval(),
        Strategy::Series => Err(unsupported("outside the series disc")),
        Strategy::Quadrature if quadrature_converges(a, w, z) => {
            quadrature(a, b1, b2, c1, c2, w, z)?.into_eval()
        }
        Strategy::Quadrature => Err(unsupported("integral does not converge")),
        Strategy::TransformedSeries if w.abs() + z.abs() < 1.0 => {
            transformed_series(a, b1, b2, c1, c2, w, z)?.into_eval()
        }
        Strategy::TransformedSeries => Err(unsupported("outside the series disc")),
    }
}

pub(crate) fn appell_f2_scaled(
    a: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    w: f64,
    z: f64,
) -> Result<Scaled> {
    check_pole("c1", c1)?;
    check_pole("c2", c2)?;
    if !(w.is_finite() && z.is_finite()) {
        return Err(Error::Domain("F2 arguments must be finite".into()));
    }
    if w == 0.0 && z == 0.0 {
        return Ok(Scaled::one(Strategy::Series));
    }
    let mut attempted = Vec::new();
    let mut last_err = None;
    if w.abs() + z.abs() <= SERIES_RADIUS {
        attempted.push(if w < 0.0 || z < 0.0 {
            Strategy::TransformedSeries
        } else {
            Strategy::Series
        });
        match transformed_series(a, b1, b2, c1, c2, w, z) {
            Ok(s) => return Ok(s),
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    if quadrature_converges(a, w, z) {
        attempted.push(Strategy::Quadrature);
        match quadrature(a, b1, b2, c1, c2, w, z) {
            Ok(s) => return Ok(s),
            Err(e) => last_err = Some(e.to_string()),
        }
    }
    let reason = match last_err {
        Some(e) => format!("F2 at (w, z) = ({w}, {z}): {e}"),
        None => format!(
            "F2 at (w, z) = ({w}, {z}) with a = {a}: outside the series disc and the integral's convergence region"
        ),
    };
    Err(Error::UnsupportedDomain { reason, attempted })
}

/// Double series after mapping negative arguments to positive ones with
/// `F₂(a;b1,b2;c1,c2;w,z) = (1−w)^{−a} F₂(a;c1−b1,b2;c1,c2;w/(w−1),z/(1−w))`
/// and its mirror in `z`, which removes the alternating-sign cancellation.
/// Both maps keep `|w| + |z|` inside the disc.
fn transformed_series(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, w: f64, z: f64) -> Result<Scaled> {
    let (mut b1, mut b2, mut w, mut z) = (b1, b2, w, z);
    let mut ln_scale = 0.0;
    if w < 0.0 {
        ln_scale -= a * (-w).ln_1p();
        (b1, w, z) = (c1 - b1, w / (w - 1.0), z / (1.0 - w));
    }
    if z < 0.0 {
        ln_scale -= a * (-z).ln_1p();
        (b2, w, z) = (c2 - b2, w / (1.0 - z), z / (z - 1.0));
    }
    let mut s = double_series(a, b1, b2, c1, c2, w, z)?;
    if ln_scale != 0.0 {
        s.ln_scale += ln_scale;
        s.strategy = Strategy::TransformedSeries;
    }
    Ok(s)
}

fn double_series(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, w: f64, z: f64) -> Result<Scaled> {
    let mut total = CompensatedSum::default();
    let mut head = 1.0_f64;
    let mut err = 0.0;
    let mut small = 0;
    let rho = (w.abs() / (1.0 - z.abs())).min(0.99);
    for m in 0..MAX_TERMS {
        let mf = m as f64;
        let row = if head == 0.0 {
            0.0
        } else {
            let s = sum_series(
                |n| {
                    let n = n as f64;
                    (a + mf + n) * (b2 + n) * z / ((c2 + n) * (n + 1.0))
                },
                MAX_TERMS,
                "F2 inner series",
            )?;
            let f = s.ln_scale.exp();
            err += (head * s.err * f).abs();
            head * s.mantissa * f
        };
        if !row.is_finite() {
            return Err(Error::NumericalFailure("F2 series row overflowed".into()));
        }
        total.add(row);
        if head == 0.0 {
            break;
        }
        let r = (a + mf) * (b1 + mf) * w / ((c1 + mf) * (mf + 1.0));
        if row.abs() <= TERM_TOL * total.value().abs() && r.abs() < 1.0 {
            small += 1;
            if small >= 3 {
                err += row.abs() * rho / (1.0 - rho);
                let v = total.value();
                return Ok(Scaled {
                    mantissa: v,
                    ln_scale: 0.0,
                    err: err + 4.0 * f64::EPSILON * v.abs(),
                    strategy: Strategy::Series,
                });
            }
        } else {
            small = 0;
        }
        head *= r;
    }
    Err(Error::NoConvergence {
        what: "F2 double series",
        iterations: MAX_TERMS,
    })
}

fn quadrature_converges(a: f64, w: f64, z: f64) -> bool {
    a > 0.0 && 1.0 - w.max(0.0) - z.max(0.0) >= MIN_DECAY
}

/// Integral representation, applied after the Euler-type transformation in
/// the larger positive argument when that argument exceeds 1/2. The
/// transformed integrand decays at rate `(1 − w − z)/(1 − w)` instead of
/// `1 − w − z`, which keeps the quadrature short as `w + z → 1`.
fn quadrature(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, w: f64, z: f64) -> Result<Scaled> {
    if w.max(z) <= 0.5 {
        return integral(a, b1, b2, c1, c2, w, z);
    }
    let transformed = if w >= z {
        integral(a, c1 - b1, b2, c1, c2, w / (w - 1.0), z / (1.0 - w)).map(|mut s| {
            s.ln_scale -= a * (-w).ln_1p();
            s
        })
    } else {
        integral(a, b1, c2 - b2, c1, c2, w / (1.0 - z), z / (z - 1.0)).map(|mut s| {
            s.ln_scale -= a * (-z).ln_1p();
            s
        })
    };
    transformed.or_else(|_| integral(a, b1, b2, c1, c2, w, z))
}

/// ln of `x^{a−1} e^{−x} ₁F₁(b1;c1;wx) ₁F₁(b2;c2;zx)` without the power
/// factor, plus the sign of the product.
struct Integrand {
    a: f64,
    b1: f64,
    b2: f64,
    c1: f64,
    c2: f64,
    w: f64,
    z: f64,
}

impl Integrand {
    fn ln_hyp_part(&self, x: f64) -> Result<(f64, f64)> {
        let f1 = hyp1f1_scaled(self.b1, self.c1, self.w * x)?;
        let f2 = hyp1f1_scaled(self.b2, self.c2, self.z * x)?;
        Ok((f1.ln_abs() + f2.ln_abs() - x, f1.sign() * f2.sign()))
    }

    fn ln_full(&self, x: f64) -> Result<(f64, f64)> {
        let (l, s) = self.ln_hyp_part(x)?;
        Ok(((self.a - 1.0) * x.ln() + l, s))
    }
}

fn integral(a: f64, b1: f64, b2: f64, c1: f64, c2: f64, w: f64, z: f64) -> Result<Scaled> {
    let f = Integrand {
        a,
        b1,
        b2,
        c1,
        c2,
        w,
        z,
    };
    let kappa = 1.0 - w.max(0.0) - z.max(0.0);
    let spread = a + b1.abs() + b2.abs() + c1.abs() + c2.abs() + 10.0;
    let x_lo = 1e-6_f64;
    let x_hi = 20.0 * spread / kappa + 50.0;

    let ratio = (x_hi / x_lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|j| x_lo * ratio.powi(j as i32)).collect();
    let mut ln_vals = Vec::with_capacity(SCAN_POINTS);
    for &x in &grid {
        ln_vals.push(f.ln_full(x)?.0);
    }
    let ln_peak = ln_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !ln_peak.is_finite() {
        return Err(Error::NumericalFailure("F2 integrand is not finite".into()));
    }
    let first = ln_vals
        .iter()
        .position(|&l| l > ln_peak - LN_NEGLIGIBLE)
        .unwrap_or(0)
        .saturating_sub(1);
    let last = (ln_vals
        .iter()
        .rposition(|&l| l > ln_peak - LN_NEGLIGIBLE)
        .unwrap_or(SCAN_POINTS - 1)
        + 1)
    .min(SCAN_POINTS - 1);

    // Rough magnitude of the scaled integral, to set an absolute tolerance.
    let rough: f64 = grid
        .windows(2)
        .zip(ln_vals.windows(2))
        .map(|(x, l)| (x[1] - x[0]) * (0.5 * (l[0] + l[1]) - ln_peak).exp())
        .sum();
    let opts = QuadOptions::with_tol(1e-14 * rough, 1e-12);

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut eval = |x: f64| -> f64 {
        match f.ln_full(x) {
            Ok((l, s)) => s * (l - ln_peak).exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };

    let mut value = 0.0;
    let mut abs_err = 0.0;
    if first == 0 {
        // [0, x_lo] with x = u^{1/a}, so x^{a−1} dx = du / a.
        let mut head = |u: f64| -> f64 {
            let x = u.powf(1.0 / a);
            match f.ln_hyp_part(x) {
                Ok((l, s)) => s * (l - ln_peak).exp() / a,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let r = integrate(&mut head, 0.0, x_lo.powf(a), opts)?;
        value += r.value;
        abs_err += r.abs_error;
    }
    for j in first..last {
        let r = integrate(&mut eval, grid[j], grid[j + 1], opts)?;
        value += r.value;
        abs_err += r.abs_error;
    }
    if last == SCAN_POINTS - 1 {
        let r = integrate_to_infinity(&mut eval, grid[last], opts)?;
        value += r.value;
        abs_err += r.abs_error;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(Scaled {
        mantissa: value,
        ln_scale: ln_peak - ln_gamma_pos(a),
        err: abs_err,
        strategy: Strategy::Quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hyp2f1;

    #[test]
    fn origin_is_one() {
        let r = appell_f2(1.3, 0.4, 2.0, 1.1, 0.6, 0.0, 0.0).unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn z_zero_reduces_to_gauss() {
        let f2 = appell_f2(2.0, 1.0, 1.5, 3.0, 2.5, 0.6, 0.0).unwrap();
        let g = hyp2f1(2.0, 1.0, 3.0, 0.6).unwrap();
        assert!((f2.value - g.value).abs() < 1e-10);
    }

    #[test]
    fn strategies_agree_inside_disc() {
        let s = double_series(2.0, 1.0, 1.5, 3.0, 2.5, 0.3, 0.4).unwrap();
        let q = integral(2.0, 1.0, 1.5, 3.0, 2.5, 0.3, 0.4).unwrap();
        let sv = s.mantissa * s.ln_scale.exp();
        let qv = q.mantissa * q.ln_scale.exp();
        assert!((sv - qv).abs() < 1e-8, "{sv} vs {qv}");
        // 40-digit reference from the double series.
        assert!((sv - 2.587_378_695_529_798_6).abs() < 1e-12, "{sv}");
    }

    #[test]
    fn selects_strategy_by_argument_size() {
        let r = appell_f2(2.0, 1.0, 1.5, 3.0, 2.5, 0.3, 0.4).unwrap();
        assert_eq!(r.strategy, Strategy::Series);
        let r = appell_f2(2.0, 1.0, 1.5, 3.0, 2.5, 0.6, 0.38).unwrap();
        assert_eq!(r.strategy, Strategy::Quadrature);
    }

    #[test]
    fn boundary_line_is_unsupported() {
        let e = appell_f2(3.0, 1.0, 1.5, 2.0, 3.0, 0.6, 0.4).unwrap_err();
        match e {
            Error::UnsupportedDomain { attempted, .. } => assert!(attempted.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        let e = appell_f2(-0.5, 1.0, 1.5, 2.0, 3.0, 0.7, 0.5).unwrap_err();
        assert!(matches!(e, Error::UnsupportedDomain { .. }));
    }
}
