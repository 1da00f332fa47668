use mrc_outage::fading::{sample_complex, sum_power_pdf, EtaMuParams};
use mrc_outage::quad::{integrate, integrate_half_line, QuadOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mass(p: &EtaMuParams, n_r: usize) -> f64 {
    integrate_half_line(
        |y| sum_power_pdf(y, p, n_r).unwrap(),
        n_r as f64 * p.omega(),
        QuadOptions::with_tol(1e-14, 1e-12),
    )
    .unwrap()
    .value
}

#[test]
fn marginal_second_moments_match_component_powers() {
    let p = EtaMuParams::new(0.4, 1.3, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let (mut sx, mut sy, mut sx2, mut sy2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let c = sample_complex(&p, &mut rng);
        let (x2, y2) = (c.re * c.re, c.im * c.im);
        sx += x2;
        sy += y2;
        sx2 += x2 * x2;
        sy2 += y2 * y2;
    }
    let nf = n as f64;
    for (sum, sum_sq, want) in [(sx, sx2, p.omega_x()), (sy, sy2, p.omega_y())] {
        let mean = sum / nf;
        let se = ((sum_sq / nf - mean * mean) / nf).sqrt();
        assert!((mean - want).abs() <= 3.0 * se, "{mean} vs {want} (se {se})");
    }
}

#[test]
fn sampled_sum_power_matches_density() {
    // Kolmogorov–Smirnov distance between 10⁶ draws and the quadrature CDF.
    let p = EtaMuParams::new(0.3, 2.0, 1.0).unwrap();
    let n_r = 3;
    let sampler = p.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1_000_000;
    let mut ys: Vec<f64> = (0..n)
        .map(|_| (0..n_r).map(|_| sampler.sample_power(&mut rng)).sum())
        .collect();
    ys.sort_by(f64::total_cmp);

    let opts = QuadOptions::with_tol(1e-13, 1e-11);
    let mut cdf = 0.0;
    let mut last = 0.0;
    let mut ks: f64 = 0.0;
    for k in 1..400 {
        let idx = k * n / 400;
        let y = ys[idx];
        cdf += integrate(|t| sum_power_pdf(t, &p, n_r).unwrap(), last, y, opts)
            .unwrap()
            .value;
        last = y;
        ks = ks
            .max((cdf - idx as f64 / n as f64).abs())
            .max((cdf - (idx + 1) as f64 / n as f64).abs());
    }
    assert!(ks <= 0.005, "KS distance {ks}");
}

#[test]
fn single_branch_density_matches_histogram() {
    let p = EtaMuParams::new(-0.5, 0.8, 1.5).unwrap();
    let sampler = p.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 400_000;
    let edges: Vec<f64> = (0..=12).map(|k| 0.25 * k as f64).collect();
    let mut counts = vec![0usize; edges.len() - 1];
    for _ in 0..n {
        let y = sampler.sample_power(&mut rng);
        if let Some(k) = edges.windows(2).position(|w| y >= w[0] && y < w[1]) {
            counts[k] += 1;
        }
    }
    let opts = QuadOptions::with_tol(1e-13, 1e-11);
    for (k, w) in edges.windows(2).enumerate() {
        let prob = integrate(|y| sum_power_pdf(y, &p, 1).unwrap(), w[0], w[1], opts)
            .unwrap()
            .value;
        let emp = counts[k] as f64 / n as f64;
        let se = (prob * (1.0 - prob) / n as f64).sqrt();
        assert!((emp - prob).abs() <= 4.0 * se, "bin {k}: {emp} vs {prob}");
    }
}

#[test]
fn density_normalised_for_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let eta = rng.random_range(-0.95..0.95);
        let mu = rng.random_range(0.3..5.0);
        let omega = rng.random_range(0.2..5.0);
        let n_r = rng.random_range(1..=4);
        let p = EtaMuParams::new(eta, mu, omega).unwrap();
        let m = mass(&p, n_r);
        assert!((m - 1.0).abs() <= 1e-6, "{eta} {mu} {omega} {n_r}: {m}");
    }
}

#[test]
fn rejects_invalid_parameters() {
    for (eta, mu, omega) in [(1.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (0.2, 0.0, 1.0), (0.2, 1.0, -1.0)] {
        assert!(EtaMuParams::new(eta, mu, omega).is_err());
    }
    let p = EtaMuParams::rayleigh(1.0).unwrap();
    assert!(sum_power_pdf(0.0, &p, 1).is_err());
}

proptest! {
    #[test]
    fn eta_sign_flip_swaps_components(
        eta in 0.0..0.95f64, mu in 0.3..5.0f64, omega in 0.1..4.0f64, n_r in 1usize..5, y in 0.01..20.0f64,
    ) {
        let a = EtaMuParams::new(eta, mu, omega).unwrap();
        let b = EtaMuParams::new(-eta, mu, omega).unwrap();
        prop_assert!((a.omega_x() - b.omega_y()).abs() <= 1e-15 * omega);
        prop_assert_eq!(a.cap_h(), -b.cap_h());
        for k in 1..=2 {
            let (ma, mb) = (a.power_moment(k).unwrap(), b.power_moment(k).unwrap());
            prop_assert!((ma - mb).abs() <= 1e-14 * ma);
        }
        let (da, db) = (sum_power_pdf(y, &a, n_r).unwrap(), sum_power_pdf(y, &b, n_r).unwrap());
        prop_assert!((da - db).abs() <= 1e-13 * da.max(1e-300));
    }

    #[test]
    fn derived_quantities(eta in -0.95..0.95f64, mu in 0.1..6.0f64, omega in 0.1..4.0f64) {
        let p = EtaMuParams::new(eta, mu, omega).unwrap();
        prop_assert!((p.omega_x() + p.omega_y() - omega).abs() <= 1e-15 * omega);
        prop_assert!((p.h() - 1.0 / (1.0 - eta * eta)).abs() <= 1e-14 * p.h());
        prop_assert!((p.cap_h() - eta * p.h()).abs() <= 1e-14 * p.h());
        prop_assert!((p.power_moment(1).unwrap() - omega).abs() <= 1e-14 * omega);
    }
}
