use super::gamma::{is_nonpositive_integer, ln_gamma_signed};
use super::{check_pole, sum_series, EvalResult, Scaled};
use crate::error::{Error, Result, Strategy};
use crate::quad::{integrate, QuadOptions};

/// ₀F₁(; b; z).
///
/// Positive arguments are summed directly. Negative arguments give an
/// alternating series; values whose estimated cancellation error exceeds a
/// relative `1e-10` are rejected instead of returned inaccurately.
pub fn hyp0f1(b: f64, z: f64) -> Result<EvalResult> {
    let s = hyp0f1_scaled(b, z)?;
    if z < 0.0 && s.err > 1e-10 * s.mantissa.abs() {
        return Err(Error::UnsupportedDomain {
            reason: format!("0F1 at z = {z}: alternating series loses precision"),
            attempted: vec![Strategy::Series],
        });
    }
    s.into_eval()
}

fn hyp0f1_scaled(b: f64, z: f64) -> Result<Scaled> {
    check_pole("b", b)?;
    if z == 0.0 {
        return Ok(Scaled::one(Strategy::Series));
    }
    let cap = 10_000 + (4.0 * z.abs().sqrt()) as usize;
    sum_series(|n| z / ((b + n as f64) * (n as f64 + 1.0)), cap, "0F1 series")
}

/// ln ₀F₁(; b; z) for z ≥ 0 and b > 0, where the series is all-positive.
pub(crate) fn ln_hyp0f1_nonneg(b: f64, z: f64) -> Result<f64> {
    if !(b > 0.0) || z < 0.0 {
        return Err(Error::Domain(format!(
            "ln 0F1 requires b > 0 and z >= 0 (b = {b}, z = {z})"
        )));
    }
    Ok(hyp0f1_scaled(b, z)?.ln_abs())
}

/// ₁F₁(a; b; z), Kummer's confluent hypergeometric function.
///
/// Negative arguments go through Kummer's transformation
/// `₁F₁(a; b; z) = eᶻ ₁F₁(b − a; b; −z)`; large positive arguments use the
/// asymptotic expansion when its truncation error is negligible.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<EvalResult> {
    hyp1f1_scaled(a, b, z)?.into_eval()
}

pub(crate) fn hyp1f1_scaled(a: f64, b: f64, z: f64) -> Result<Scaled> {
    check_pole("b", b)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("1F1 argument must be finite, got {z}")));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(Scaled::one(Strategy::Series));
    }
    if z < 0.0 {
        // eᶻ cancels the e^{−z} of the large-argument expansion exactly, so
        // it is never formed: a ln-scale of size |z| would cost |z|·ε.
        if let Some(s) = large_argument(b - a, b, -z) {
            return Ok(s);
        }
        let s = hyp1f1_series(b - a, b, -z)?;
        return Ok(s.times_exp(z).with_strategy(Strategy::TransformedSeries));
    }
    if let Some(mut s) = large_argument(a, b, z) {
        s.ln_scale += z;
        return Ok(s);
    }
    hyp1f1_series(a, b, z)
}

/// `e^{−z} ₁F₁(a; b; z)` from the asymptotic expansion, when it applies.
fn large_argument(a: f64, b: f64, z: f64) -> Option<Scaled> {
    if z > 40.0 && !is_nonpositive_integer(a) {
        hyp1f1_asymptotic(a, b, z)
    } else {
        None
    }
}

fn hyp1f1_series(a: f64, b: f64, z: f64) -> Result<Scaled> {
    let cap = 10_000 + (4.0 * z) as usize;
    sum_series(
        |n| {
            let n = n as f64;
            (a + n) * z / ((b + n) * (n + 1.0))
        },
        cap,
        "1F1 series",
    )
}

/// Large-z expansion Γ(b)/Γ(a) z^{a−b} Σ (b−a)_k (1−a)_k / (k! zᵏ), i.e.
/// `e^{−z} ₁F₁(a; b; z)` with the exponential factor left out.
fn hyp1f1_asymptotic(a: f64, b: f64, z: f64) -> Option<Scaled> {
    let (lg_a, sg_a) = ln_gamma_signed(a).ok()?;
    let (lg_b, sg_b) = ln_gamma_signed(b).ok()?;
    // Neglected algebraic branch, relative to the exponential one.
    if !is_nonpositive_integer(b - a) {
        let (lg_ba, _) = ln_gamma_signed(b - a).ok()?;
        let ln_rel = lg_a - lg_ba + (b - 2.0 * a) * z.ln() - z;
        if ln_rel > -39.0 {
            return None;
        }
    }
    let mut sum = 1.0_f64;
    let mut t = 1.0_f64;
    let mut k = 0.0;
    loop {
        let r = (b - a + k) * (1.0 - a + k) / ((k + 1.0) * z);
        let next = t * r;
        if next == 0.0 || next.abs() <= 1e-17 * sum.abs() {
            sum += next;
            t = next;
            break;
        }
        if next.abs() >= t.abs() || k > 200.0 {
            return None;
        }
        sum += next;
        t = next;
        k += 1.0;
    }
    Some(Scaled {
        mantissa: sg_a * sg_b * sum,
        ln_scale: lg_b - lg_a + (a - b) * z.ln(),
        err: t.abs() + 4.0 * f64::EPSILON * sum.abs(),
        strategy: Strategy::TransformedSeries,
    })
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for z < 1.
///
/// Negative arguments are mapped into `[0, 1)` with the Pfaff transformation
/// `₂F₁(a,b;c;z) = (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1))`. Arguments above 0.9
/// use the `1 − z` connection formula, or Euler's integral when `c − a − b`
/// sits too close to an integer for the connection formula to be stable.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<EvalResult> {
    ln_hyp2f1(a, b, c, z)?.into_eval()
}

pub(crate) fn ln_hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<Scaled> {
    check_pole("c", c)?;
    if !(z < 1.0) {
        return Err(Error::Domain(format!("2F1 requires z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(Scaled::one(Strategy::Series));
    }
    if z < 0.0 {
        let zeta = z / (z - 1.0);
        let inner = hyp2f1_unit(a, c - b, c, zeta)?;
        let strategy = match inner.strategy {
            Strategy::Series => Strategy::TransformedSeries,
            s => s,
        };
        return Ok(inner.times_exp(-a * (-z).ln_1p()).with_strategy(strategy));
    }
    hyp2f1_unit(a, b, c, z)
}

fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64, cap: usize) -> Result<Scaled> {
    sum_series(
        |n| {
            let n = n as f64;
            (a + n) * (b + n) * z / ((c + n) * (n + 1.0))
        },
        cap,
        "2F1 series",
    )
}

/// ₂F₁ on `0 < z < 1`.
fn hyp2f1_unit(a: f64, b: f64, c: f64, z: f64) -> Result<Scaled> {
    if z <= 0.9 {
        return hyp2f1_series(a, b, c, z, 1_000_000);
    }
    let d = c - a - b;
    if (d - d.round()).abs() > 0.05 {
        return hyp2f1_connection(a, b, c, z);
    }
    if c > b && b > 0.0 {
        return hyp2f1_euler(a, b, c, z);
    }
    if c > a && a > 0.0 {
        return hyp2f1_euler(b, a, c, z);
    }
    hyp2f1_series(a, b, c, z, 20_000_000).map_err(|_| Error::UnsupportedDomain {
        reason: format!("2F1({a}, {b}; {c}; {z}) near z = 1 with integer c - a - b"),
        attempted: vec![Strategy::Series],
    })
}

/// ln|coefficient| and sign of Γ(p)Γ(q)/(Γ(r)Γ(s)); None when a
/// denominator pole makes it vanish.
fn gamma_ratio(p: f64, q: f64, r: f64, s: f64) -> Result<Option<(f64, f64)>> {
    if is_nonpositive_integer(r) || is_nonpositive_integer(s) {
        return Ok(None);
    }
    let (lp, sp) = ln_gamma_signed(p)?;
    let (lq, sq) = ln_gamma_signed(q)?;
    let (lr, sr) = ln_gamma_signed(r)?;
    let (ls, ss) = ln_gamma_signed(s)?;
    Ok(Some((lp + lq - lr - ls, sp * sq * sr * ss)))
}

fn hyp2f1_connection(a: f64, b: f64, c: f64, z: f64) -> Result<Scaled> {
    let d = c - a - b;
    let w = 1.0 - z;
    let mut parts: Vec<(f64, f64, f64)> = Vec::with_capacity(2); // (ln|x|, sign, abs err)
    if let Some((lc, sc)) = gamma_ratio(c, d, c - a, c - b)? {
        let f = hyp2f1_series(a, b, 1.0 - d, w, 100_000)?;
        parts.push((lc + f.ln_abs(), sc * f.sign(), f.err / f.mantissa.abs().max(f64::MIN_POSITIVE)));
    }
    if let Some((lc, sc)) = gamma_ratio(c, -d, a, b)? {
        let f = hyp2f1_series(c - a, c - b, 1.0 + d, w, 100_000)?;
        parts.push((
            lc + d * w.ln() + f.ln_abs(),
            sc * f.sign(),
            f.err / f.mantissa.abs().max(f64::MIN_POSITIVE),
        ));
    }
    if parts.is_empty() {
        return Ok(Scaled {
            mantissa: 0.0,
            ln_scale: 0.0,
            err: 0.0,
            strategy: Strategy::TransformedSeries,
        });
    }
    let ln_ref = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut mantissa = 0.0;
    let mut err = 0.0;
    for (ln, sign, rel) in &parts {
        let v = (ln - ln_ref).exp();
        mantissa += sign * v;
        err += v * (rel + 8.0 * f64::EPSILON);
    }
    Ok(Scaled {
        mantissa,
        ln_scale: ln_ref,
        err,
        strategy: Strategy::TransformedSeries,
    })
}

/// Euler's integral
/// `Γ(c)/(Γ(b)Γ(c−b)) ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−zt)^{−a} dt`, valid for c > b > 0.
fn hyp2f1_euler(a: f64, b: f64, c: f64, z: f64) -> Result<Scaled> {
    let e = c - b;
    let one_minus_z = 1.0 - z;
    // Factor out (1 − z)^{−a} when a > 0 so the integrand stays O(1).
    let ln_pull = if a > 0.0 { -a * one_minus_z.ln() } else { 0.0 };
    let kernel = |t: f64, s: f64| -> f64 {
        // t + s = 1, both supplied to keep precision at either end.
        let base = one_minus_z + z * s;
        let ln = -a * base.ln() - ln_pull;
        ln.exp() * if t > 0.0 { 1.0 } else { 0.0 }
    };
    let opts = QuadOptions::with_tol(0.0, 1e-13);
    // [0, 1/2] with t = u^{1/b}: t^{b−1} dt = du / b.
    let left = integrate(
        |u: f64| {
            let t = u.powf(1.0 / b);
            let s = 1.0 - t;
            s.powf(e - 1.0) * kernel(t, s) / b
        },
        0.0,
        0.5_f64.powf(b),
        opts,
    )?;
    // [1/2, 1] with 1 − t = v^{1/e}: (1−t)^{e−1} dt = dv / e.
    let right = integrate(
        |v: f64| {
            let s = v.powf(1.0 / e);
            let t = 1.0 - s;
            t.powf(b - 1.0) * kernel(t, s) / e
        },
        0.0,
        0.5_f64.powf(e),
        opts,
    )?;
    let (lg_c, _) = ln_gamma_signed(c)?;
    let (lg_b, _) = ln_gamma_signed(b)?;
    let (lg_e, _) = ln_gamma_signed(e)?;
    let total = left.value + right.value;
    Ok(Scaled {
        mantissa: total,
        ln_scale: ln_pull + lg_c - lg_b - lg_e,
        err: left.abs_error + right.abs_error,
        strategy: Strategy::Quadrature,
    })
}
