//! Configuration files and the `outage` subcommands.
//!
//! A config file holds one `key = value` pair per line; `#` starts a
//! comment. Lists are comma-separated. `kl_rows` takes `;`-separated
//! `eta_int mu_int eta_user mu_user` tuples and defaults to the five
//! standard comparison rows.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fading::{sum_power_pdf, EtaMuParams};
use crate::moments::{
    cross_moment_1, cross_moment_2, db_to_linear, user_norm_moments, GammaFit, Scenario,
};
use crate::montecarlo::{
    binomial_stderr, empirical_outage, estimate_moments, kl_divergence, sample_approx_law_with,
    simulate_exact_sir_with, SampleSource, SirSamples,
};
use crate::outage::{
    cdf_by_quadrature, outage_approx1, outage_approx2, outage_curve, sir_pdf_approx1,
    sir_pdf_approx2, Method,
};
use crate::quad::{integrate_half_line, QuadOptions};

pub const SWEEP_HEADER: &str = "gamma0_db,p_out_approx1,p_out_approx2,p_out_mc,mc_stderr";
pub const KL_HEADER: &str = "eta_int,mu_int,eta_user,mu_user,kl_approx1,kl_approx2";

/// Parameter overrides for one KL-table row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlRow {
    pub eta_int: f64,
    pub mu_int: f64,
    pub eta_user: f64,
    pub mu_user: f64,
}

impl KlRow {
    const fn new(eta_int: f64, mu_int: f64, eta_user: f64, mu_user: f64) -> Self {
        Self {
            eta_int,
            mu_int,
            eta_user,
            mu_user,
        }
    }
}

pub const DEFAULT_KL_ROWS: [KlRow; 5] = [
    KlRow::new(0.1, 2.0, 0.1, 2.0),
    KlRow::new(0.1, 2.0, 0.1, 4.0),
    KlRow::new(0.1, 2.0, 0.9, 4.0),
    KlRow::new(0.1, 4.0, 0.9, 4.0),
    KlRow::new(0.9, 4.0, 0.9, 4.0),
];

/// Which way the KL divergence is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KlDirection {
    /// `D(exact ‖ approx)`.
    #[default]
    ExactToApprox,
    /// `D(approx ‖ exact)`.
    ApproxToExact,
}

impl KlDirection {
    fn name(self) -> &'static str {
        match self {
            KlDirection::ExactToApprox => "exact_to_approx",
            KlDirection::ApproxToExact => "approx_to_exact",
        }
    }
}

/// A parsed and validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_r: usize,
    pub user: EtaMuParams,
    pub interferer: EtaMuParams,
    pub energies_db: Vec<f64>,
    pub gamma0_db_start: f64,
    pub gamma0_db_stop: f64,
    pub gamma0_db_step: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub kl_bins: usize,
    pub kl_rows: Vec<KlRow>,
    pub kl_direction: KlDirection,
}

impl RunConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::from_db(self.n_r, self.user, self.interferer, &self.energies_db)
            .map_err(as_config)
    }

    /// The γ₀ grid in dB: `start, start + step, ...` up to `stop`.
    pub fn grid_db(&self) -> Vec<f64> {
        let span = (self.gamma0_db_stop - self.gamma0_db_start) / self.gamma0_db_step;
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| self.gamma0_db_start + k as f64 * self.gamma0_db_step)
            .collect()
    }

    pub fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    /// Serialises back to the config-file format.
    pub fn to_config_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n_r", self.n_r.to_string());
        kv("n_i", self.energies_db.len().to_string());
        kv("eta_user", self.user.eta().to_string());
        kv("mu_user", self.user.mu().to_string());
        kv("omega_user", self.user.omega().to_string());
        kv("eta_int", self.interferer.eta().to_string());
        kv("mu_int", self.interferer.mu().to_string());
        kv("omega_int", self.interferer.omega().to_string());
        kv("energies_db", list(&self.energies_db));
        kv("gamma0_db_start", self.gamma0_db_start.to_string());
        kv("gamma0_db_stop", self.gamma0_db_stop.to_string());
        kv("gamma0_db_step", self.gamma0_db_step.to_string());
        kv("mc_samples", self.mc_samples.to_string());
        kv("seed", self.seed.to_string());
        kv(
            "methods",
            self.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(", "),
        );
        kv("kl_bins", self.kl_bins.to_string());
        kv(
            "kl_rows",
            self.kl_rows
                .iter()
                .map(|r| format!("{} {} {} {}", r.eta_int, r.mu_int, r.eta_user, r.mu_user))
                .collect::<Vec<_>>()
                .join("; "),
        );
        kv("kl_direction", self.kl_direction.name().to_string());
        s
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(n) = overrides.mc_samples {
        if n == 0 {
            return Err(Error::Config("mc_samples must be positive".into()));
        }
        cfg.mc_samples = n;
    }
    Ok(cfg)
}

const KEYS: [&str; 18] = [
    "n_r",
    "n_i",
    "eta_user",
    "mu_user",
    "omega_user",
    "eta_int",
    "mu_int",
    "omega_int",
    "energies_db",
    "gamma0_db_start",
    "gamma0_db_stop",
    "gamma0_db_step",
    "mc_samples",
    "seed",
    "methods",
    "kl_bins",
    "kl_rows",
    "kl_direction",
];

/// Parses config text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = std::collections::HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key `{k}`", lineno + 1)));
        }
        if map.insert(k, v.trim()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
        }
    }

    let get = |k: &str| map.get(k).copied();
    let req = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key `{k}`")));
    let real = |k: &str, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Config(format!("`{k}`: `{v}` is not a finite number")))
    };
    let count = |k: &str, v: &str| -> Result<usize> {
        let x = real(k, v)?;
        if x < 1.0 || x.fract() != 0.0 || x > 1e15 {
            return Err(Error::Config(format!("`{k}` must be a positive integer, got `{v}`")));
        }
        Ok(x as usize)
    };
    let real_or = |k: &str, default: f64| get(k).map_or(Ok(default), |v| real(k, v));

    let n_r = count("n_r", req("n_r")?)?;
    let user = EtaMuParams::new(
        real("eta_user", req("eta_user")?)?,
        real("mu_user", req("mu_user")?)?,
        real_or("omega_user", 1.0)?,
    )
    .map_err(as_config)?;
    let interferer = EtaMuParams::new(
        real("eta_int", req("eta_int")?)?,
        real("mu_int", req("mu_int")?)?,
        real_or("omega_int", 1.0)?,
    )
    .map_err(as_config)?;
    let energies_db = req("energies_db")?
        .split(',')
        .map(|t| real("energies_db", t.trim()))
        .collect::<Result<Vec<_>>>()?;
    if let Some(v) = get("n_i") {
        let n_i = count("n_i", v)?;
        if n_i != energies_db.len() {
            return Err(Error::Config(format!(
                "n_i = {n_i} but energies_db lists {} values",
                energies_db.len()
            )));
        }
    }
    let gamma0_db_start = real("gamma0_db_start", req("gamma0_db_start")?)?;
    let gamma0_db_stop = real("gamma0_db_stop", req("gamma0_db_stop")?)?;
    let gamma0_db_step = real("gamma0_db_step", req("gamma0_db_step")?)?;
    if !(gamma0_db_step > 0.0) {
        return Err(Error::Config("gamma0_db_step must be positive".into()));
    }
    if !(gamma0_db_start < gamma0_db_stop) {
        return Err(Error::Config("gamma0_db_start must be below gamma0_db_stop".into()));
    }
    let mc_samples = get("mc_samples").map_or(Ok(1_000_000), |v| count("mc_samples", v))?;
    let seed = match get("seed") {
        None => 0,
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("`seed` must be a 64-bit unsigned integer, got `{v}`")))?,
    };
    let methods = match get("methods") {
        None => vec![Method::Approx1, Method::Approx2, Method::MonteCarlo],
        Some(v) => {
            let mut ms = Vec::new();
            for t in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let m = Method::parse(t)
                    .ok_or_else(|| Error::Config(format!("unknown method `{t}`")))?;
                if !ms.contains(&m) {
                    ms.push(m);
                }
            }
            ms
        }
    };
    if methods.is_empty() {
        return Err(Error::Config("methods must not be empty".into()));
    }
    let kl_bins = get("kl_bins").map_or(Ok(200), |v| count("kl_bins", v))?;
    let kl_rows = match get("kl_rows") {
        None => DEFAULT_KL_ROWS.to_vec(),
        Some(v) => parse_kl_rows(v)?,
    };
    let kl_direction = match get("kl_direction") {
        None | Some("exact_to_approx") => KlDirection::ExactToApprox,
        Some("approx_to_exact") => KlDirection::ApproxToExact,
        Some(other) => return Err(Error::Config(format!("unknown kl_direction `{other}`"))),
    };

    let cfg = RunConfig {
        n_r,
        user,
        interferer,
        energies_db,
        gamma0_db_start,
        gamma0_db_stop,
        gamma0_db_step,
        mc_samples,
        seed,
        methods,
        kl_bins,
        kl_rows,
        kl_direction,
    };
    cfg.scenario()?;
    if cfg.grid_db().len() < 2 {
        return Err(Error::Config("the gamma0 grid must have at least 2 points".into()));
    }
    Ok(cfg)
}

fn parse_kl_rows(v: &str) -> Result<Vec<KlRow>> {
    let mut rows = Vec::new();
    for tuple in v.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let xs: Vec<f64> = tuple
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("kl_rows: cannot parse `{tuple}`")))?;
        if xs.len() != 4 {
            return Err(Error::Config(format!(
                "kl_rows: `{tuple}` needs eta_int mu_int eta_user mu_user"
            )));
        }
        rows.push(KlRow::new(xs[0], xs[1], xs[2], xs[3]));
    }
    if rows.is_empty() {
        return Err(Error::Config("kl_rows must not be empty".into()));
    }
    Ok(rows)
}

/// Formats with 10 significant digits in the style of C's `%.10g`.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Domain(_) | Error::IndexOutOfRange { .. } => 1,
        _ => 2,
    }
}

/// CSV text plus the number of cells that failed to evaluate.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub csv: String,
    pub failures: Vec<String>,
}

/// Runs the outage sweep over the configured grid.
pub fn run_sweep(cfg: &RunConfig, exec: Execution) -> Result<SweepOutput> {
    let scn = cfg.scenario()?;
    let grid = cfg.grid_db();
    let mut failures = Vec::new();

    let fit = if cfg.has(Method::Approx1) || cfg.has(Method::Approx2) {
        match GammaFit::from_scenario(&scn) {
            Ok(f) => Some(f),
            Err(e) => {
                failures.push(format!("gamma fit: {e}"));
                None
            }
        }
    } else {
        None
    };
    let mut column = |method: Method| -> Option<Vec<f64>> {
        if !cfg.has(method) {
            return None;
        }
        let values = match &fit {
            None => vec![f64::NAN; grid.len()],
            Some(fit) => match outage_curve(&scn, fit, method, &grid, exec) {
                Ok(v) => v
                    .into_iter()
                    .zip(&grid)
                    .map(|(r, g)| {
                        r.unwrap_or_else(|e| {
                            failures.push(format!("{} at {g} dB: {e}", method.name()));
                            f64::NAN
                        })
                    })
                    .collect(),
                Err(e) => {
                    failures.push(format!("{}: {e}", method.name()));
                    vec![f64::NAN; grid.len()]
                }
            },
        };
        Some(values)
    };
    let a1 = column(Method::Approx1);
    let a2 = column(Method::Approx2);
    let mc = if cfg.has(Method::MonteCarlo) {
        let samples = simulate_exact_sir_with(&scn, cfg.mc_samples, cfg.seed, exec)?;
        let lin: Vec<f64> = grid.iter().map(|&d| db_to_linear(d)).collect();
        Some(empirical_outage(&samples, &lin)?)
    } else {
        None
    };

    let cell = |col: &Option<Vec<f64>>, j: usize| col.as_ref().map_or(String::new(), |c| format_sig(c[j]));
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for (j, &g) in grid.iter().enumerate() {
        let stderr = mc
            .as_ref()
            .map_or(String::new(), |c| format_sig(binomial_stderr(c[j], cfg.mc_samples)));
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            format_sig(g),
            cell(&a1, j),
            cell(&a2, j),
            cell(&mc, j),
            stderr
        );
    }
    Ok(SweepOutput { csv, failures })
}

/// KL divergences of both approximations for one parameter row.
pub fn kl_row(cfg: &RunConfig, row: &KlRow, exec: Execution) -> Result<(f64, f64)> {
    let user = EtaMuParams::new(row.eta_user, row.mu_user, cfg.user.omega()).map_err(as_config)?;
    let int =
        EtaMuParams::new(row.eta_int, row.mu_int, cfg.interferer.omega()).map_err(as_config)?;
    let scn = cfg.scenario()?.with_user(user).with_interferer(int);
    let fit = GammaFit::from_scenario(&scn)?;
    let (n, seed) = (cfg.mc_samples, cfg.seed);
    let exact = simulate_exact_sir_with(&scn, n, seed, exec)?;
    let approx = |law| -> Result<SirSamples> {
        sample_approx_law_with(&scn, &fit, law, n, seed, exec)
    };
    let kl = |q: &SirSamples| match cfg.kl_direction {
        KlDirection::ExactToApprox => kl_divergence(&exact, q, cfg.kl_bins),
        KlDirection::ApproxToExact => kl_divergence(q, &exact, cfg.kl_bins),
    };
    Ok((
        kl(&approx(SampleSource::Approx1Law)?)?,
        kl(&approx(SampleSource::Approx2Law)?)?,
    ))
}

/// Runs the KL table over the configured rows.
pub fn run_kl_table(cfg: &RunConfig, exec: Execution) -> Result<SweepOutput> {
    let mut csv = String::from(KL_HEADER);
    csv.push('\n');
    let mut failures = Vec::new();
    for row in &cfg.kl_rows {
        let (k1, k2) = match kl_row(cfg, row, exec) {
            Ok(v) => v,
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                failures.push(format!("row {row:?}: {e}"));
                (f64::NAN, f64::NAN)
            }
        };
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            format_sig(row.eta_int),
            format_sig(row.mu_int),
            format_sig(row.eta_user),
            format_sig(row.mu_user),
            format_sig(k1),
            format_sig(k2)
        );
    }
    Ok(SweepOutput { csv, failures })
}

/// One line of the validation report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct ValidateOptions {
    /// Multiplies the user's Ω in the analytic formulas only (negative control).
    pub corrupt_omega: Option<f64>,
}

pub const MOMENT1_RTOL: f64 = 0.01;
pub const MOMENT2_RTOL: f64 = 0.02;
pub const NORMALIZATION_TOL: f64 = 1e-6;
pub const CDF_TOL: f64 = 1e-5;
pub const RAYLEIGH_GAP: f64 = 0.005;

/// Runs the moment, normalisation and Rayleigh-exactness checks.
pub fn run_validate(cfg: &RunConfig, opts: &ValidateOptions, exec: Execution) -> Result<Vec<Check>> {
    let scn = cfg.scenario()?;
    let analytic = match opts.corrupt_omega {
        Some(f) => scn.with_user(scn.user().with_omega(scn.user().omega() * f).map_err(as_config)?),
        None => scn.clone(),
    };
    let mut checks = Vec::new();
    let mut rel = |name: String, got: f64, want: f64, tol: f64| {
        let r = (got - want).abs() / want.abs();
        checks.push(Check {
            name,
            passed: r <= tol,
            detail: format!("analytic {} vs simulated {} (rel. gap {:.3e}, tol {tol})", format_sig(want), format_sig(got), r),
        });
    };

    let est = estimate_moments(&scn, cfg.mc_samples, cfg.seed, exec)?;
    let (u1, u2) = user_norm_moments(&analytic);
    rel("user power first moment".into(), est.user.0, u1, MOMENT1_RTOL);
    rel("user power second moment".into(), est.user.1, u2, MOMENT2_RTOL);
    for i in 0..scn.n_i() {
        rel(format!("cross moment 1, interferer {}", i + 1), est.cross[i].0, cross_moment_1(&analytic, i)?, MOMENT1_RTOL);
        rel(format!("cross moment 2, interferer {}", i + 1), est.cross[i].1, cross_moment_2(&analytic, i)?, MOMENT2_RTOL);
    }

    let qopts = QuadOptions::with_tol(1e-13, 1e-11);
    for (label, params) in [("user", scn.user()), ("interferer", scn.interferer())] {
        let n_r = scn.n_r();
        let mut failure = None;
        let mass = integrate_half_line(
            |y| {
                sum_power_pdf(y, params, n_r).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    0.0
                })
            },
            n_r as f64 * params.omega(),
            qopts,
        )?
        .value;
        if let Some(e) = failure {
            return Err(e);
        }
        checks.push(Check {
            name: format!("{label} sum-power density normalisation"),
            passed: (mass - 1.0).abs() <= NORMALIZATION_TOL,
            detail: format!("integral {}", format_sig(mass)),
        });
    }

    let fit = GammaFit::from_scenario(&scn)?;
    let gamma0 = db_to_linear(0.5 * (cfg.gamma0_db_start + cfg.gamma0_db_stop));
    let cdf1 = cdf_by_quadrature(|g| sir_pdf_approx1(&scn, &fit, g), gamma0)?;
    let p1 = outage_approx1(&scn, &fit, gamma0)?;
    let cdf2 = cdf_by_quadrature(|g| sir_pdf_approx2(&fit, g), gamma0)?;
    let p2 = outage_approx2(&fit, gamma0)?;
    for (label, c, p) in [("approx1", cdf1, p1), ("approx2", cdf2, p2)] {
        checks.push(Check {
            name: format!("{label} density integrates to its outage"),
            passed: (c - p).abs() <= CDF_TOL,
            detail: format!("quadrature {} vs closed form {}", format_sig(c), format_sig(p)),
        });
    }

    let ray_int = EtaMuParams::rayleigh(scn.interferer().omega())?;
    let ray = scn.with_interferer(ray_int);
    let ray_fit = GammaFit::from_scenario(&ray)?;
    let grid = cfg.grid_db();
    let lin: Vec<f64> = grid.iter().map(|&d| db_to_linear(d)).collect();
    let samples = simulate_exact_sir_with(&ray, cfg.mc_samples, cfg.seed, exec)?;
    let emp = empirical_outage(&samples, &lin)?;
    let mut gap: f64 = 0.0;
    for (g, e) in lin.iter().zip(&emp) {
        gap = gap.max((outage_approx1(&ray, &ray_fit, *g)? - e).abs());
    }
    checks.push(Check {
        name: "Rayleigh-interferer exactness".into(),
        passed: gap <= RAYLEIGH_GAP,
        detail: format!("max |approx1 - simulated| = {} (tol {RAYLEIGH_GAP})", format_sig(gap)),
    });
    Ok(checks)
}

/// Formats a validation report, one line per check.
pub fn format_report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    s
}
