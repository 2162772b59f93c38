//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use cascade_cooling::adiabatic::{effective_rates, KappaBridge};
use cascade_cooling::chain::{chain_occupations, ChainParams};
use cascade_cooling::closedform::exact_phonons;
use cascade_cooling::fock::fock_oracle;
use cascade_cooling::linearize::{delta6_criterion, drift_matrix, OperatingPoint, STABILITY_MARGIN};
use cascade_cooling::params::NormalizedParams;
use cascade_cooling::presets::preset;
use cascade_cooling::quadrature::QuadOptions;
use cascade_cooling::spectra::{phonons_quadrature, spectrum_q, NoiseModel};
use cascade_cooling::sweep::{run_sweep, SweepResult, SweepSpec};
use cascade_cooling::validate::{random_draw, stable_draws};
use cascade_cooling::Method;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn spec(name: &str) -> SweepSpec {
    preset(name).unwrap().sweep.unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn col(r: &SweepResult, name: &str) -> Vec<Option<f64>> {
    r.values(name).unwrap_or_else(|| panic!("column {name}"))
}

/// Two-mode points of a preset grid as (coords, params, operating point).
fn grid_points(s: &SweepSpec) -> Vec<(Vec<f64>, NormalizedParams, OperatingPoint)> {
    let base = s.two_mode.clone().unwrap();
    s.grid()
        .into_iter()
        .filter_map(|c| {
            let mut sc = base.clone();
            for (a, &x) in s.axes.iter().zip(&c) {
                sc.set(&a.name, x).unwrap();
            }
            sc.resolve().ok().map(|(n, op)| (c, n, op))
        })
        .collect()
}

fn cross_path() -> Outcome {
    let quad = QuadOptions {
        rel_tol: 1e-10,
        ..QuadOptions::default()
    };
    let mut points: Vec<(NormalizedParams, OperatingPoint)> = stable_draws(2024, 200);
    let n_random = points.len();
    points.extend(grid_points(&spec("fig2")).into_iter().map(|(_, n, op)| (n, op)));
    let mut worst = 0.0f64;
    let mut errors = 0usize;
    let mut unstable = 0usize;
    for (n, op) in &points {
        if !drift_matrix(op, n).is_stable().unwrap_or(false) {
            unstable += 1;
            continue;
        }
        match (exact_phonons(op, n), phonons_quadrature(op, n, NoiseModel::FlatHighT, &quad)) {
            (Ok(c), Ok(q)) => {
                worst = worst.max(rel(c.n1, q.n1)).max(rel(c.n2, q.n2));
            }
            _ => errors += 1,
        }
    }
    Outcome {
        pass: errors == 0 && worst < 1e-5,
        detail: format!(
            "{n_random} random + {} grid points ({unstable} unstable grid points skipped), max rel gap {worst:.2e} (limit 1e-5), {errors} solver errors",
            points.len() - n_random
        ),
    }
}

fn fig2_minima() -> Outcome {
    let r = run_sweep(&spec("fig2")).unwrap();
    let delta = col(&r, "delta");
    let kappa = col(&r, "kappa");
    let mut parts = Vec::new();
    let mut pass = true;
    for (mode, lo, hi) in [("n1_closedform", 0.12, 0.18), ("n2_closedform", 0.28, 0.42)] {
        let v = col(&r, mode);
        let (i, m) = v
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.map(|x| (i, x)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let d = delta[i].unwrap();
        let ok = m >= lo && m <= hi && (d - 1.0).abs() <= 0.05;
        pass &= ok;
        parts.push(format!(
            "min {mode} = {m:.4} in [{lo}, {hi}] at delta = {d:.4}, kappa = {:.4}",
            kappa[i].unwrap()
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn max_where(x: &[Option<f64>], y: &[Option<f64>], keep: impl Fn(f64) -> bool) -> f64 {
    x.iter()
        .zip(y)
        .filter(|(x, _)| keep(x.unwrap()))
        .map(|(_, y)| y.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn fig6_window() -> Outcome {
    let mut s = spec("fig6");
    s.methods = vec![Method::Closedform, Method::AdiabaticFull];
    s.bridge = KappaBridge::EnergyRate;
    let r = run_sweep(&s).unwrap();
    let k = col(&r, "kappa");
    let inside = |x: f64| (0.1 - 1e-12..=0.5 + 1e-12).contains(&x);
    let below = |x: f64| (x - 0.05).abs() < 1e-12;
    let g1 = max_where(&k, &col(&r, "gap1_adiabatic_full"), inside);
    let g2 = max_where(&k, &col(&r, "gap2_adiabatic_full"), inside);
    let b1 = max_where(&k, &col(&r, "gap1_adiabatic_full"), below);
    let b2 = max_where(&k, &col(&r, "gap2_adiabatic_full"), below);
    let window = g1 <= 0.15 && g2 <= 0.15;
    let diverges = b1.max(b2) > g1.max(g2);
    Outcome {
        pass: window && diverges,
        detail: format!(
            "kappa_B = 2 kappa; max gap in [0.1, 0.5]: n1 {g1:.3}, n2 {g2:.3} (limit 0.15); gap at 0.05: {:.3} vs in-window {:.3}",
            b1.max(b2),
            g1.max(g2)
        ),
    }
}

fn fig7_window() -> Outcome {
    let mut s = spec("fig7");
    s.methods = vec![Method::Closedform, Method::AdiabaticFull, Method::AdiabaticSimplified];
    let r = run_sweep(&s).unwrap();
    let eta = col(&r, "eta0");
    let g1 = max_where(&eta, &col(&r, "gap1_adiabatic_full"), |x| x <= 0.05 + 1e-12);
    let g2 = max_where(&eta, &col(&r, "gap2_adiabatic_full"), |x| x <= 0.05 + 1e-12);
    let status = r.column("status_adiabatic_simplified").unwrap();
    let full_gap1 = col(&r, "gap1_adiabatic_full");
    let full_gap2 = col(&r, "gap2_adiabatic_full");
    let mut beyond = 0;
    let mut flagged = 0;
    for (i, (_, n, op)) in grid_points(&s).iter().enumerate() {
        let rates = effective_rates(op, n, KappaBridge::EnergyRate);
        if rates.gamma1_eff <= 4.0 * rates.chi {
            beyond += 1;
            let raised = r.rows[i][status].text() == Some("stability_violated");
            let diverged = full_gap1[i].is_none_or(|g| g > 0.15) || full_gap2[i].is_none_or(|g| g > 0.15);
            if raised || diverged {
                flagged += 1;
            }
        }
    }
    let boundary = beyond > 0 && flagged == beyond;
    Outcome {
        pass: g1 <= 0.15 && g2 <= 0.15 && boundary,
        detail: format!(
            "max gap for eta0 <= 0.05: n1 {g1:.3}, n2 {g2:.3} (limit 0.15); {flagged}/{beyond} points past Gamma1 = 4 chi raise or diverge"
        ),
    }
}

fn stability_consistency() -> Outcome {
    let pts = grid_points(&spec("fig2"));
    let mut agree = 0;
    for (_, n, op) in &pts {
        let stable = drift_matrix(op, n).max_real_part().unwrap() < -STABILITY_MARGIN;
        if delta6_criterion(op, n).passes == stable {
            agree += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 10_000;
    let mut random_agree = 0;
    let mut catalogue = Vec::new();
    let mut stable_count = 0;
    for _ in 0..draws {
        let (n, op) = random_draw(&mut rng);
        let stable = drift_matrix(&op, &n).is_stable().unwrap();
        stable_count += stable as usize;
        let d = delta6_criterion(&op, &n);
        if d.passes == stable {
            random_agree += 1;
        } else {
            catalogue.push((stable, d.passes));
        }
    }
    let passes_unstable = catalogue.iter().filter(|c| !c.0 && c.1).count();
    Outcome {
        pass: agree == pts.len(),
        detail: format!(
            "grid {agree}/{} agree; random {random_agree}/{draws} agree ({stable_count} stable), disagreements: {passes_unstable} unstable pass, {} stable fail",
            pts.len(),
            catalogue.len() - passes_unstable
        ),
    }
}

fn chain_ordering() -> Outcome {
    let base = spec("fig8");
    let mut parts = Vec::new();
    let mut pass = true;
    for n_res in [3usize, 4] {
        let mut s = base.clone();
        s.chain.as_mut().unwrap().n_resonators = n_res;
        let r = run_sweep(&s).unwrap();
        let delta: Vec<f64> = col(&r, "delta").into_iter().map(Option::unwrap).collect();
        let at = delta.iter().position(|d| (d - 1.0).abs() < 1e-9).unwrap();
        let step = delta[1] - delta[0];
        let occ: Vec<Vec<f64>> = (1..=n_res)
            .map(|j| col(&r, &format!("n_{j}")).into_iter().map(Option::unwrap).collect())
            .collect();
        let at_res: Vec<f64> = occ.iter().map(|c| c[at]).collect();
        let ordered = at_res.windows(2).all(|w| w[0] < w[1]);
        let below_one = n_res != 3 || at_res.iter().all(|&x| x < 1.0);
        let minima: Vec<f64> = occ
            .iter()
            .map(|c| {
                let i = (0..c.len()).min_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap();
                delta[i]
            })
            .collect();
        let minima_ok = minima.iter().all(|d| (d - 1.0).abs() <= step + 1e-12);
        pass &= ordered && below_one && minima_ok;
        let fmt: Vec<String> = at_res.iter().map(|x| format!("{x:.4}")).collect();
        parts.push(format!(
            "N={n_res}: n = [{}] ordered {ordered}, below one {below_one}, minima at {:?}",
            fmt.join(", "),
            minima
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn fock_agreement() -> Outcome {
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
    let t = Instant::now();
    let c = chain_occupations(&p).unwrap();
    match fock_oracle(&p, &[8, 8, 8]) {
        Ok(f) => {
            let mut worst = rel(f.cavity, c.cavity_occupation());
            for (x, y) in f.resonators.iter().zip(c.resonator_occupations()) {
                worst = worst.max(rel(*x, y));
            }
            let secs = t.elapsed().as_secs_f64();
            Outcome {
                pass: worst < 0.02 && secs < 60.0,
                detail: format!(
                    "moments {:.5} {:?}, Fock {:.5} {:?}, max rel gap {worst:.2e} (limit 0.02), {secs:.1} s",
                    c.cavity_occupation(),
                    c.resonator_occupations(),
                    f.cavity,
                    f.resonators
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn strictly(v: &[f64], increasing: bool) -> bool {
    v.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn properties() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    // uncertainty bound
    let mut pts: Vec<(NormalizedParams, OperatingPoint)> = stable_draws(5, 200);
    pts.extend(grid_points(&spec("fig2")).into_iter().map(|(_, n, op)| (n, op)));
    let mut min_product = f64::INFINITY;
    let mut evaluated = 0;
    for (n, op) in &pts {
        if let Ok(r) = exact_phonons(op, n) {
            evaluated += 1;
            for l in 0..2 {
                min_product = min_product.min(r.var_q[l] * r.var_p[l]);
            }
        }
    }
    let ok = min_product >= 0.25;
    pass &= ok;
    parts.push(format!("min var_q var_p = {min_product:.4} over {evaluated} points ({ok})"));

    // spectra non-negative
    let mut min_s = f64::INFINITY;
    for (n, op) in pts.iter().take(50) {
        for k in 0..4001 {
            let w = -4.0 + 8.0 * k as f64 / 4000.0;
            for l in 0..2 {
                min_s = min_s.min(spectrum_q(w, l, op, n, NoiseModel::FlatHighT));
            }
        }
    }
    let ok = min_s >= 0.0;
    pass &= ok;
    parts.push(format!("min S_q = {min_s:.2e} ({ok})"));

    // thermal equilibrium
    let n = NormalizedParams::mechanical(1.2, 0.0, 0.3, [1e-3, 2e-3], [40.0, 7.0]);
    let op = OperatingPoint::from_coupling(1.0, Complex64::new(0.0, 0.0));
    let r = exact_phonons(&op, &n).unwrap();
    let dev = rel(r.n1, 40.0).max(rel(r.n2, 7.0));
    let ok = dev < 1e-6;
    pass &= ok;
    parts.push(format!("equilibrium rel dev {dev:.1e} ({ok})"));

    // monotonic in eta0
    let s3 = spec("fig3");
    let r = run_sweep(&s3).unwrap();
    let k = col(&r, "kappa");
    let n1 = col(&r, "n1_closedform");
    let n2 = col(&r, "n2_closedform");
    let mut mono = true;
    for kappa in s3.axes[0].values() {
        let idx: Vec<usize> = (0..k.len()).filter(|&i| k[i] == Some(kappa)).collect();
        let a: Option<Vec<f64>> = idx.iter().map(|&i| n1[i]).collect();
        let b: Option<Vec<f64>> = idx.iter().map(|&i| n2[i]).collect();
        mono &= matches!((a, b), (Some(a), Some(b)) if strictly(&a, true) && strictly(&b, false));
    }
    pass &= mono;
    parts.push(format!("eta0 monotonicity ({mono})"));

    // second resonator decoupled for omega2 > 2
    let r = run_sweep(&spec("fig4")).unwrap();
    let w2 = col(&r, "omega2");
    let n2 = col(&r, "n2_closedform");
    let nbar2 = 1000.0;
    let mut worst = 0.0f64;
    let mut first_ok = None;
    for (w, n) in w2.iter().zip(&n2) {
        let (w, n) = (w.unwrap(), n.unwrap_or(0.0));
        if w > 2.0 {
            let d = rel(n, nbar2);
            worst = worst.max(d);
            if d <= 0.05 && first_ok.is_none() {
                first_ok = Some(w);
            }
            if d > 0.05 {
                first_ok = None;
            }
        }
    }
    let ok = worst <= 0.05;
    pass &= ok;
    parts.push(format!(
        "omega2 > 2: max |n2 - nbar2|/nbar2 = {worst:.3} (limit 0.05), within limit from omega2 = {:?} ({ok})",
        first_ok
    ));

    // increasing in damping
    let s5 = spec("fig5");
    let r = run_sweep(&s5).unwrap();
    let c = s5.axes[1].count;
    let n1: Vec<f64> = col(&r, "n1_closedform").into_iter().map(|x| x.unwrap_or(f64::NAN)).collect();
    let n2: Vec<f64> = col(&r, "n2_closedform").into_iter().map(|x| x.unwrap_or(f64::NAN)).collect();
    let rows = n1.len() / c;
    let mut inc = true;
    for v in [&n1, &n2] {
        for i in 0..rows {
            let line: Vec<f64> = (0..c).map(|j| v[i * c + j]).collect();
            inc &= strictly(&line, true);
        }
        for j in 0..c {
            let line: Vec<f64> = (0..rows).map(|i| v[i * c + j]).collect();
            inc &= strictly(&line, true);
        }
    }
    pass &= inc;
    parts.push(format!("increasing in gamma1 and gamma2 ({inc})"));

    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 closed form vs quadrature", cross_path),
        ("2 fig2 minima", fig2_minima),
        ("3 fig6 adiabatic window", fig6_window),
        ("4 fig7 adiabatic window", fig7_window),
        ("5 stability consistency", stability_consistency),
        ("6 chain ordering", chain_ordering),
        ("7 Fock oracle agreement", fock_agreement),
        ("8 property suite", properties),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {name} [{secs:.1} s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += (!o.pass) as usize;
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
