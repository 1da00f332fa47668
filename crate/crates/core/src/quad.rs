//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The error estimate follows the QUADPACK `qk15` heuristic. Intervals are
//! refined in order of decreasing error until the requested tolerance is met.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Tolerances and limits for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_asc *= half.abs();
    res_abs *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round);
    }
    (value, err)
}

/// Integrates `f` over the finite interval `[lo, hi]`.
///
/// Endpoints are never evaluated, so integrable endpoint singularities are
/// allowed.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain("integration bounds must be finite".into()));
    }
    if lo == hi {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = kronrod15(&mut f, lo, hi);
    let mut evaluations = 15;
    if !v.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "non-finite integrand on [{lo}, {hi}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
            });
        }
        let seg = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval cannot be split further in floating point.
            heap.push(seg);
            break;
        }
        let (v1, e1) = kronrod15(&mut f, seg.lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, seg.hi);
        evaluations += 30;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite integrand on [{}, {}]",
                seg.lo, seg.hi
            )));
        }
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            lo: seg.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lo: mid,
            hi: seg.hi,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of incremental updates.
    let (value, abs_error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value,
        abs_error,
        evaluations,
    })
}

/// Integrates `f` over `[lo, ∞)` through the map `x = lo + t / (1 - t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    integrate(
        |t| {
            let u = 1.0 - t;
            let x = lo + t / u;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (u * u)
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Integral over `[0, ∞)` of a function whose mass sits around `scale`.
///
/// Uses geometric panels from `1e-8 scale` to `64 scale`, one panel down to
/// zero and the mapped tail, which copes with integrable endpoint
/// singularities and slowly decaying tails.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    scale: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    let mut bps = vec![0.0];
    bps.extend((-16..=12).map(|k| scale * 2f64.powf(k as f64 * 0.5 * std::f64::consts::LOG2_10)));
    bps.truncate(bps.partition_point(|&b| b <= 64.0 * scale));
    let mut acc = integrate_panels(&mut f, &bps, opts)?;
    let tail = integrate_to_infinity(&mut f, *bps.last().unwrap(), opts)?;
    acc.value += tail.value;
    acc.abs_error += tail.abs_error;
    acc.evaluations += tail.evaluations;
    Ok(acc)
}

/// Sums integrals over consecutive panels `[b_0, b_1], [b_1, b_2], ...`.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<Integral> {
    let mut acc = Integral {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
    };
    for w in breakpoints.windows(2) {
        let part = integrate(&mut f, w[0], w[1], opts)?;
        acc.value += part.value;
        acc.abs_error += part.abs_error;
        acc.evaluations += part.evaluations;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
    }

    #[test]
    fn half_line_singular_and_heavy_tail() {
        let opts = QuadOptions::with_tol(1e-13, 1e-12);
        let r = integrate_half_line(|x| x.powf(-0.5) * (-x).exp(), 1.0, opts).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-9, "{}", r.value);
        let r = integrate_half_line(|x| 1.0 / (1.0 + x).powi(2), 3.0, opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, QuadOptions::with_tol(1e-12, 1e-12)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        // ∫_0^∞ x^2 e^{-x} dx = 2
        let r = integrate_to_infinity(|x| x * x * (-x).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(f64::sin, 0.0, 20.0, QuadOptions::default()).unwrap();
        assert!((r.value - (1.0 - 20f64.cos())).abs() < 1e-12);
    }
}
