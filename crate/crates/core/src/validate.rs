//! Cross-path oracle battery.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adiabatic::{phonons_adiabatic_simplified, rates_from_reduced, KappaBridge};
use crate::chain::{chain_occupations, ChainParams};
use crate::closedform::exact_phonons;
use crate::error::Result;
use crate::fock::fock_oracle;
use crate::linearize::{delta6_criterion, drift_matrix, phonons_lyapunov, OperatingPoint, STABILITY_MARGIN};
use crate::params::NormalizedParams;
use crate::presets::preset;
use crate::quadrature::QuadOptions;
use crate::spectra::{phonons_quadrature, NoiseModel};
use crate::sweep::{run_sweep, SweepResult, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Failure fails the suite.
    Gate,
    /// Measured and reported only.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub severity: Severity,
    pub status: Status,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    pub bridge: KappaBridge,
    /// Replaces both mechanical damping rates.
    pub gamma_override: Option<f64>,
    pub random_draws: usize,
    pub seed: u64,
    /// Points per axis of the reduced Fig. 2 grid used for the Routh check.
    pub grid_points: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            bridge: KappaBridge::EnergyRate,
            gamma_override: None,
            random_draws: 40,
            seed: 7,
            grid_points: 30,
        }
    }
}

/// One random two-mode point, stable or not.
pub fn random_draw<R: Rng>(rng: &mut R) -> (NormalizedParams, OperatingPoint) {
    let log_uniform = |rng: &mut R, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    let omega2 = rng.random_range(0.5..2.0);
    let eta0 = rng.random_range(0.0..0.1);
    let kappa = log_uniform(rng, 0.05, 1.0);
    let gamma = [log_uniform(rng, 1e-6, 1e-3), log_uniform(rng, 1e-6, 1e-3)];
    let nbar = [rng.random_range(0.0..2000.0), rng.random_range(0.0..2000.0)];
    let delta = rng.random_range(-1.0..2.0);
    let g = Complex64::from_polar(
        rng.random_range(0.01..0.5),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let n = NormalizedParams::mechanical(omega2, eta0, kappa, gamma, nbar);
    (n, OperatingPoint::from_coupling(delta, g))
}

/// `count` stable random points.
pub fn stable_draws(seed: u64, count: usize) -> Vec<(NormalizedParams, OperatingPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (n, op) = random_draw(&mut rng);
        if drift_matrix(&op, &n).is_stable().unwrap_or(false) {
            out.push((n, op));
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Battery {
    checks: Vec<Check>,
}

impl Battery {
    fn push(&mut self, name: &str, severity: Severity, measured: f64, threshold: f64, ok: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            severity,
            status: if ok { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            threshold: Some(threshold),
            detail,
        });
    }

    fn below(&mut self, name: &str, severity: Severity, measured: f64, threshold: f64, detail: String) {
        self.push(name, severity, measured, threshold, measured <= threshold, detail);
    }

    fn skip(&mut self, name: &str, severity: Severity, detail: &str) {
        self.checks.push(Check {
            name: name.into(),
            severity,
            status: Status::Skipped,
            measured: None,
            threshold: None,
            detail: detail.into(),
        });
    }

    fn error(&mut self, name: &str, severity: Severity, e: impl std::fmt::Display) {
        self.checks.push(Check {
            name: name.into(),
            severity,
            status: Status::Fail,
            measured: None,
            threshold: None,
            detail: e.to_string(),
        });
    }
}

fn preset_spec(name: &str, opts: &ValidateOptions) -> Result<SweepSpec> {
    let mut spec = preset(name)?.sweep.expect("presets carry a sweep");
    spec.bridge = opts.bridge;
    if let (Some(g), Some(s)) = (opts.gamma_override, spec.two_mode.as_mut()) {
        s.set("gamma", g)?;
    }
    Ok(spec)
}

/// Largest value of `col` over rows whose `axis` lies in `[lo, hi]`.
/// Missing values count as infinite.
fn max_over(r: &SweepResult, axis: &str, col: &str, lo: f64, hi: f64) -> f64 {
    let x = r.values(axis).expect("axis column");
    let y = r.values(col).expect("value column");
    x.iter()
        .zip(&y)
        .filter(|(x, _)| x.is_some_and(|x| x >= lo - 1e-12 && x <= hi + 1e-12))
        .map(|(_, y)| y.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn adiabatic_checks(b: &mut Battery, opts: &ValidateOptions) {
    match preset_spec("fig6", opts).and_then(|s| run_sweep(&s)) {
        Ok(r) => {
            let g2 = max_over(&r, "kappa", "gap2_adiabatic_full", 0.1, 0.5);
            let g1 = max_over(&r, "kappa", "gap1_adiabatic_full", 0.1, 0.5);
            let bridge = format!("{:?} bridge, kappa in [0.1, 0.5]", opts.bridge);
            b.below("fig6_n2_gap", Severity::Gate, g2, 0.15, bridge.clone());
            b.below("fig6_n1_gap", Severity::Report, g1, 0.15, bridge);
            let below = max_over(&r, "kappa", "gap1_adiabatic_full", 0.05, 0.05)
                .max(max_over(&r, "kappa", "gap2_adiabatic_full", 0.05, 0.05));
            let inside = g1.max(g2);
            b.push(
                "fig6_divergence",
                Severity::Gate,
                below,
                inside,
                below > inside,
                "largest gap at kappa = 0.05 against the largest gap inside the window".into(),
            );
        }
        Err(e) => b.error("fig6", Severity::Gate, e),
    }
    match preset_spec("fig7", opts).and_then(|s| run_sweep(&s)) {
        Ok(r) => {
            let g2 = max_over(&r, "eta0", "gap2_adiabatic_full", 0.0, 0.05);
            let g1 = max_over(&r, "eta0", "gap1_adiabatic_full", 0.0, 0.05);
            b.below("fig7_n2_gap", Severity::Gate, g2, 0.15, "eta0 <= 0.05".into());
            b.below("fig7_n1_gap", Severity::Report, g1, 0.15, "eta0 <= 0.05".into());
            let spec = preset_spec("fig7", opts).expect("parsed above");
            let base = spec.two_mode.expect("two-mode preset");
            let status = r.column("status_adiabatic_simplified").expect("simplified column");
            let mut beyond = 0usize;
            let mut raised = 0usize;
            for row in &r.rows {
                let eta = row[0].num().unwrap_or(0.0);
                let mut s = base.clone();
                if s.set("eta0", eta).is_err() {
                    continue;
                }
                let Ok((n, op)) = s.resolve() else { continue };
                let rates = crate::adiabatic::effective_rates(&op, &n, opts.bridge);
                if rates.gamma1_eff <= 4.0 * rates.chi {
                    beyond += 1;
                    if row[status].text() == Some("stability_violated") {
                        raised += 1;
                    }
                }
            }
            b.push(
                "fig7_boundary",
                Severity::Gate,
                raised as f64,
                beyond as f64,
                beyond > 0 && raised == beyond,
                format!("{raised} of {beyond} points beyond Gamma1 = 4 chi raise stability_violated"),
            );
        }
        Err(e) => b.error("fig7", Severity::Gate, e),
    }
}

fn oracle_checks(b: &mut Battery, opts: &ValidateOptions) {
    let draws = stable_draws(opts.seed, opts.random_draws);
    let quad = QuadOptions {
        rel_tol: 1e-10,
        ..QuadOptions::default()
    };
    let mut worst_q = 0.0f64;
    let mut worst_l = 0.0f64;
    let mut failures = Vec::new();
    for (k, (n, op)) in draws.iter().enumerate() {
        let (cf, qd, ly) = (
            exact_phonons(op, n),
            phonons_quadrature(op, n, NoiseModel::FlatHighT, &quad),
            phonons_lyapunov(op, n),
        );
        match (cf, qd, ly) {
            (Ok(c), Ok(q), Ok(l)) => {
                for m in 0..2 {
                    worst_q = worst_q.max(rel(c.occupation(m), q.occupation(m)));
                    worst_l = worst_l.max(rel(c.occupation(m), l.occupation(m)));
                }
            }
            (c, q, l) => failures.push(format!(
                "draw {k}: {:?} {:?} {:?}",
                c.err().map(|e| e.code()),
                q.err().map(|e| e.code()),
                l.err().map(|e| e.code())
            )),
        }
    }
    let detail = |n: usize| {
        if failures.is_empty() {
            format!("{n} stable random draws")
        } else {
            format!("{n} draws; errors: {}", failures.join("; "))
        }
    };
    let ok = failures.is_empty();
    b.push("closedform_vs_quadrature", Severity::Gate, worst_q, 1e-5, ok && worst_q < 1e-5, detail(draws.len()));
    b.push("closedform_vs_lyapunov", Severity::Gate, worst_l, 1e-5, ok && worst_l < 1e-5, detail(draws.len()));

    let n = NormalizedParams::mechanical(1.2, 0.0, 0.3, [1e-3, 2e-3], [500.0, 1500.0]);
    let op = OperatingPoint::from_coupling(1.0, Complex64::new(0.0, 0.0));
    match exact_phonons(&op, &n) {
        Ok(r) => {
            let dev = rel(r.n1, n.nbar1).max(rel(r.n2, n.nbar2));
            b.below("thermal_equilibrium", Severity::Gate, dev, 1e-6, "G = 0, eta0 = 0".into());
        }
        Err(e) => b.error("thermal_equilibrium", Severity::Gate, e),
    }
}

fn routh_checks(b: &mut Battery, opts: &ValidateOptions) {
    match preset_spec("fig2", opts) {
        Ok(mut spec) => {
            for a in &mut spec.axes {
                a.count = opts.grid_points.max(2);
            }
            let base = spec.two_mode.clone().expect("two-mode preset");
            let mut total = 0usize;
            let mut agree = 0usize;
            let mut worst = f64::NEG_INFINITY;
            for c in spec.grid() {
                let mut s = base.clone();
                s.set(&spec.axes[0].name, c[0]).expect("fig2 axis");
                s.set(&spec.axes[1].name, c[1]).expect("fig2 axis");
                let Ok((n, op)) = s.resolve() else { continue };
                let Ok(max_re) = drift_matrix(&op, &n).max_real_part() else { continue };
                worst = worst.max(max_re);
                total += 1;
                if delta6_criterion(&op, &n).passes == (max_re < -STABILITY_MARGIN) {
                    agree += 1;
                }
            }
            let rate = agree as f64 / total.max(1) as f64;
            let marginal = worst > -1e-9;
            let detail = if marginal {
                format!("{agree}/{total} points agree; marginal: slowest decay rate {worst:.3e}")
            } else {
                format!("{agree}/{total} points agree")
            };
            b.push("routh_fig2_grid", Severity::Gate, rate, 1.0, total > 0 && agree == total, detail);
            if opts.gamma_override == Some(0.0) {
                b.push(
                    "stability_margin",
                    Severity::Report,
                    worst,
                    0.0,
                    worst < 0.0,
                    "marginal: zero mechanical damping, every mode decays through the cavity only".into(),
                );
            }
        }
        Err(e) => b.error("routh_fig2_grid", Severity::Gate, e),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let draws = (opts.random_draws * 25).max(100);
    let mut agree = 0usize;
    let mut passes_unstable = 0usize;
    for _ in 0..draws {
        let (n, op) = random_draw(&mut rng);
        let stable = drift_matrix(&op, &n).is_stable().unwrap_or(false);
        let passes = delta6_criterion(&op, &n).passes;
        if stable == passes {
            agree += 1;
        } else if passes {
            passes_unstable += 1;
        }
    }
    let rate = agree as f64 / draws as f64;
    b.push(
        "routh_random_agreement",
        Severity::Report,
        rate,
        1.0,
        agree == draws,
        format!(
            "{agree}/{draws} agree; {passes_unstable} unstable points pass, {} stable points fail",
            draws - agree - passes_unstable
        ),
    );
}

fn chain_checks(b: &mut Battery) {
    let p = ChainParams {
        n_resonators: 2,
        delta: 1.0,
        coupling: Complex64::new(0.15, 0.0),
        eta0: 0.1,
        omega_m: 1.0,
        kappa: 0.6,
        gamma: 0.1,
        nbar: 0.5,
    };
    match (chain_occupations(&p), fock_oracle(&p, &[8, 8, 8])) {
        (Ok(c), Ok(f)) => {
            let mut dev = rel(f.cavity, c.cavity_occupation());
            for (x, y) in f.resonators.iter().zip(c.resonator_occupations()) {
                dev = dev.max(rel(*x, y));
            }
            b.below("chain_vs_fock", Severity::Gate, dev, 0.02, "N = 2, nbar = 0.5, dims (8, 8, 8)".into());
        }
        (Err(e), _) | (_, Err(e)) => b.error("chain_vs_fock", Severity::Gate, e),
    }

    let p = ChainParams {
        n_resonators: 2,
        delta: 1.0,
        coupling: Complex64::new(0.02, 0.0),
        eta0: 2e-4,
        omega_m: 1.0,
        kappa: 0.3,
        gamma: 1e-5,
        nbar: 1000.0,
    };
    let n = NormalizedParams::mechanical(1.0, p.eta0, p.kappa / 2.0, [p.gamma; 2], [p.nbar; 2]);
    let r = rates_from_reduced(p.coupling, p.kappa, p.delta, &n);
    match (chain_occupations(&p), phonons_adiabatic_simplified(&r, &n)) {
        (Ok(c), Ok(a)) => {
            let occ = c.resonator_occupations();
            let dev = rel(a.n1, occ[0]).max(rel(a.n2, occ[1]));
            b.below(
                "chain_vs_adiabatic",
                Severity::Gate,
                dev,
                0.10,
                "N = 2, kappa >> G, weak mechanical coupling".into(),
            );
        }
        (Err(e), _) | (_, Err(e)) => b.error("chain_vs_adiabatic", Severity::Gate, e),
    }
}

/// Runs the battery. With zero mechanical damping the occupation checks are
/// skipped and only the stability checks run.
pub fn validate_suite(opts: &ValidateOptions) -> Report {
    let mut b = Battery { checks: Vec::new() };
    let lossless = opts.gamma_override == Some(0.0);
    routh_checks(&mut b, opts);
    if lossless {
        for (name, sev) in [
            ("fig6", Severity::Gate),
            ("fig7", Severity::Gate),
            ("closedform_vs_quadrature", Severity::Gate),
            ("closedform_vs_lyapunov", Severity::Gate),
            ("thermal_equilibrium", Severity::Gate),
            ("chain_vs_fock", Severity::Gate),
            ("chain_vs_adiabatic", Severity::Gate),
        ] {
            b.skip(name, sev, "mechanical damping is zero: no thermal steady state");
        }
    } else {
        adiabatic_checks(&mut b, opts);
        oracle_checks(&mut b, opts);
        chain_checks(&mut b);
    }
    let passed = b
        .checks
        .iter()
        .all(|c| c.severity == Severity::Report || c.status != Status::Fail);
    Report {
        checks: b.checks,
        passed,
    }
}
