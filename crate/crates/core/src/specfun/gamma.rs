use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 10.0 {
        stirling(x)
    } else if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum away from its pole.
        lanczos(x + 1.0) - x.ln()
    } else {
        lanczos(x)
    }
}

fn lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    HALF_LN_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

fn stirling(x: f64) -> f64 {
    // Bernoulli-number tail B_{2k} / (2k (2k - 1) x^{2k-1}); < 1e-17 for x >= 10.
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut tail = 0.0;
    for c in C.iter().rev() {
        tail = tail * inv2 + c;
    }
    tail *= inv;
    let lx = x.ln();
    (x - 0.5).mul_add(lx, -x) + HALF_LN_2PI + tail
}

pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// ln|Γ(x)| and sign(Γ(x)) for any real x that is not a pole.
pub(crate) fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole {
            name: "gamma argument",
            value: x,
        });
    }
    if x > 0.0 {
        return Ok((ln_gamma_pos(x), 1.0));
    }
    // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
    let s = (PI * x).sin();
    let ln = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((ln, s.signum()))
}

/// 1 / Γ(x), exactly zero at the poles.
#[cfg(test)]
pub(crate) fn recip_gamma(x: f64) -> f64 {
    match ln_gamma_signed(x) {
        Ok((ln, sign)) => sign * (-ln).exp(),
        Err(_) => 0.0,
    }
}

/// Rising factorial (a)_n = a (a + 1) ... (a + n - 1); 1 for n = 0.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

/// ln of the generalized rising factorial (a)_p = Γ(a + p) / Γ(a), a > 0, a + p > 0.
pub fn ln_pochhammer(a: f64, p: f64) -> Result<f64> {
    Ok(ln_gamma(a + p)? - ln_gamma(a)?)
}
