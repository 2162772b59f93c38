//! Position and momentum noise spectra of the two resonators and their
//! integration into stationary variances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::{drift_matrix, OperatingPoint, STABILITY_MARGIN};
use crate::params::NormalizedParams;
use crate::quadrature::{integrate, QuadOptions};
use crate::result::{CoolingResult, Method};

/// Mechanical bath kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// `gamma (2 nbar + 1)`, frequency independent.
    #[default]
    FlatHighT,
    /// Ohmic quantum kernel `gamma (w / w_l)(1 + coth(w / 2 theta))` with a
    /// Drude roll-off at `cutoff`, needed for a finite momentum variance.
    FullCoth { cutoff: f64 },
}

/// Denominator and numerator functions of the linear response at one
/// frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseFunctions {
    pub b: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
    pub w3: Complex64,
}

pub fn response_at(omega: f64, op: &OperatingPoint, n: &NormalizedParams) -> ResponseFunctions {
    let i = Complex64::new(0.0, 1.0);
    let w = Complex64::new(omega, 0.0);
    let (k, d) = (n.kappa, op.delta);
    let (w1, w2, e) = (n.omega1, n.omega2, n.eta0);
    let (g1, g2) = (n.gamma1, n.gamma2);
    let gg = op.g2();
    let g = op.coupling;
    let cav = (k + i * w) * (k + i * w) + d * d;
    let osc1 = i * g1 * w - w * w + w1 * w1;
    let osc2 = -i * g2 * w + w * w - w2 * w2;
    let b = osc1 * osc2 * cav + 2.0 * w1 * (i * g2 * w - w * w + w2 * w2) * gg * d
        + 4.0 * w1 * w2 * e * e * cav;
    let root = (2.0 * k).sqrt();
    ResponseFunctions {
        b,
        c1: root * g * w1 * (g2 * w + i * (w * w - w2 * w2)) * (-i * k + w + d),
        c2: -2.0 * root * e * g * w1 * w2 * (k + i * (w + d)),
        w1: w1 * osc2 * cav,
        w2: -2.0 * e * w1 * w2 * cav,
        w3: 2.0 * w1 * w2 * gg * d + w2 * (-i * g1 * w + w * w - w1 * w1) * cav,
    }
}

fn bath_kernel(omega: f64, l: usize, n: &NormalizedParams, noise: NoiseModel) -> f64 {
    let (g, nb, wl) = (n.gamma(l), n.nbar(l), n.omega(l));
    match noise {
        NoiseModel::FlatHighT => g * (2.0 * nb + 1.0),
        NoiseModel::FullCoth { cutoff } => {
            let drude = cutoff * cutoff / (cutoff * cutoff + omega * omega);
            let ohmic = if nb <= 0.0 {
                if omega > 0.0 {
                    2.0 * omega
                } else {
                    0.0
                }
            } else {
                // w (1 + coth(w / 2 theta)) = 2 theta x / (1 - e^-x), x = w / theta
                let theta = wl / (1.0 / nb).ln_1p();
                let x = omega / theta;
                let bose = if x.abs() < 1e-12 { 1.0 } else { x / -(-x).exp_m1() };
                2.0 * theta * bose
            };
            g / wl * ohmic * drude
        }
    }
}

fn spectra_pair(omega: f64, op: &OperatingPoint, n: &NormalizedParams, noise: NoiseModel) -> [f64; 2] {
    let r = response_at(omega, op, n);
    let k1 = bath_kernel(omega, 0, n, noise);
    let k2 = bath_kernel(omega, 1, n, noise);
    let bb = r.b.norm_sqr();
    [
        (r.c1.norm_sqr() + r.w1.norm_sqr() * k1 + r.w2.norm_sqr() * k2) / bb,
        (r.c2.norm_sqr() + r.w2.norm_sqr() * k1 + r.w3.norm_sqr() * k2) / bb,
    ]
}

/// Position spectrum of resonator `l` (0 or 1).
pub fn spectrum_q(
    omega: f64,
    l: usize,
    op: &OperatingPoint,
    n: &NormalizedParams,
    noise: NoiseModel,
) -> f64 {
    spectra_pair(omega, op, n, noise)[l]
}

/// Momentum spectrum, `(w / w_l)^2 S_q`.
pub fn spectrum_p(
    omega: f64,
    l: usize,
    op: &OperatingPoint,
    n: &NormalizedParams,
    noise: NoiseModel,
) -> f64 {
    let r = omega / n.omega(l);
    r * r * spectrum_q(omega, l, op, n, noise)
}

/// Breakpoints on the positive frequency axis around every resonance of the
/// drift matrix, geometric in the linewidth so a narrow peak cannot slip
/// between quadrature nodes.
fn resonance_points(eig: &[Complex64]) -> Vec<f64> {
    let mut pts = vec![0.0];
    for z in eig {
        let (c, w) = (z.im.abs(), z.re.abs());
        pts.push(c);
        for s in [0.5, 2.0, 8.0, 32.0, 128.0, 512.0] {
            for x in [c - s * w, c + s * w] {
                if x > 0.0 {
                    pts.push(x);
                }
            }
        }
    }
    pts
}

/// Stationary variances by integrating the spectra over all frequencies.
pub fn phonons_quadrature(
    op: &OperatingPoint,
    n: &NormalizedParams,
    noise: NoiseModel,
    opts: &QuadOptions,
) -> Result<CoolingResult> {
    n.validate()?;
    let d = drift_matrix(op, n);
    let eig = d.eigenvalues()?;
    let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::UnstableSystem { max_re });
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut thetas: Vec<f64> = resonance_points(&eig).into_iter().map(f64::atan).collect();
    thetas.push(half_pi);
    let (w1, w2) = (n.omega1, n.omega2);
    // fold negative frequencies onto positive ones, then w = tan(theta)
    let f = |theta: f64| {
        let w = theta.tan();
        let jac = 1.0 + w * w;
        let p = spectra_pair(w, op, n, noise);
        let m = spectra_pair(-w, op, n, noise);
        let (s1, s2) = ((p[0] + m[0]) * jac, (p[1] + m[1]) * jac);
        [s1, s2, (w / w1).powi(2) * s1, (w / w2).powi(2) * s2]
    };
    let r = integrate(f, &thetas, opts)?;
    let tau = 2.0 * std::f64::consts::PI;
    let v = r.value.map(|x| x / tau);
    let mut out = CoolingResult::from_variances([v[0], v[1]], [v[2], v[3]], Method::Quadrature);
    let e = r.error.map(|x| x / tau);
    out.error_estimate = Some(0.5 * (e[0] + e[2]).max(e[1] + e[3]));
    Ok(out)
}
