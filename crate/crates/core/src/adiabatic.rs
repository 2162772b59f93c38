//! Reduced two-mode description after eliminating the cavity.
//!
//! The reduced model uses an energy decay rate and a beam-splitter coupling;
//! [`KappaBridge`] fixes how those follow from the amplitude decay `kappa` and
//! the linearized coupling `G` used elsewhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::OperatingPoint;
use crate::params::NormalizedParams;
use crate::result::{CoolingResult, Method};

/// Map from the amplitude-decay convention into the reduced model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KappaBridge {
    /// `kappa_B = 2 kappa`, `G~ = G / sqrt 2`.
    #[default]
    EnergyRate,
    /// `kappa_B = kappa`, `G~ = G / sqrt 2`. Kept as a negative control.
    SameRate,
}

impl KappaBridge {
    pub fn kappa_b(self, kappa: f64) -> f64 {
        match self {
            KappaBridge::EnergyRate => 2.0 * kappa,
            KappaBridge::SameRate => kappa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRates {
    pub g_tilde: Complex64,
    pub kappa_b: f64,
    pub delta: f64,
    pub gamma_opt: f64,
    pub omega_opt: f64,
    /// Gamma1 = gamma1 + gamma_opt.
    pub gamma1_eff: f64,
    /// Omega1 = omega1 - omega_opt.
    pub omega1_eff: f64,
    pub chi: f64,
    pub n_opt: f64,
}

/// Rates of the reduced model from a reduced coupling and energy decay rate.
pub fn rates_from_reduced(
    g_tilde: Complex64,
    kappa_b: f64,
    delta: f64,
    n: &NormalizedParams,
) -> EffectiveRates {
    let g2 = g_tilde.norm_sqr();
    let gamma_opt = 4.0 * g2 / kappa_b;
    let omega_opt = g2 / (2.0 * n.omega1);
    let gamma1_eff = n.gamma1 + gamma_opt;
    EffectiveRates {
        g_tilde,
        kappa_b,
        delta,
        gamma_opt,
        omega_opt,
        gamma1_eff,
        omega1_eff: n.omega1 - omega_opt,
        chi: 4.0 * n.eta0 * n.eta0 / gamma1_eff,
        n_opt: kappa_b * kappa_b / (4.0 * (n.omega1 + delta).powi(2)),
    }
}

pub fn effective_rates(op: &OperatingPoint, n: &NormalizedParams, bridge: KappaBridge) -> EffectiveRates {
    rates_from_reduced(
        op.coupling / std::f64::consts::SQRT_2,
        bridge.kappa_b(n.kappa),
        op.delta,
        n,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdiabaticEigen {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub u: Complex64,
}

fn eigen_with_u(r: &EffectiveRates, n: &NormalizedParams, u: Complex64) -> AdiabaticEigen {
    let mid = Complex64::new(
        (r.gamma1_eff + n.gamma2) / 4.0,
        (r.omega1_eff + n.omega2) / 2.0,
    );
    AdiabaticEigen {
        lambda1: mid - u / 8.0,
        lambda2: mid + u / 8.0,
        u,
    }
}

fn u_squared(r: &EffectiveRates, n: &NormalizedParams) -> Complex64 {
    let x = Complex64::new(r.gamma1_eff - n.gamma2, 2.0 * (r.omega1_eff - n.omega2));
    4.0 * x * x - 64.0 * n.eta0 * n.eta0
}

/// Reduced-model eigenvalues with `u` on the principal square-root branch.
pub fn eigenvalues(r: &EffectiveRates, n: &NormalizedParams) -> AdiabaticEigen {
    eigen_with_u(r, n, u_squared(r, n).sqrt())
}

/// Same as [`eigenvalues`] but picks the sign of `u` closest to `previous`,
/// so labels stay attached to the same branch along a sweep.
pub fn eigenvalues_continued(
    r: &EffectiveRates,
    n: &NormalizedParams,
    previous: Complex64,
) -> AdiabaticEigen {
    let u = u_squared(r, n).sqrt();
    let u = if (u - previous).norm() <= (-u - previous).norm() {
        u
    } else {
        -u
    };
    eigen_with_u(r, n, u)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SecondBathBracket {
    Printed,
    Corrected,
}

fn reduced_closed_form(
    r: &EffectiveRates,
    n: &NormalizedParams,
    bracket: SecondBathBracket,
) -> Result<(f64, f64)> {
    let e = eigenvalues(r, n);
    let (l1, l2, u) = (e.lambda1, e.lambda2, e.u);
    if l1.re <= 0.0 || l2.re <= 0.0 {
        return Err(Error::UnstableReducedModel {
            re1: l1.re,
            re2: l2.re,
        });
    }
    if u.norm() <= 1e-13 * (r.gamma1_eff + n.gamma2 + n.omega1 + n.omega2) {
        return Err(Error::NumericalError("degenerate reduced eigenvalues (u = 0)".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let (g1, g2) = (n.gamma1, n.gamma2);
    let (n1, n2) = (n.nbar1, n.nbar2);
    let (gam1, om1, w2) = (r.gamma1_eff, r.omega1_eff, n.omega2);
    let k = r.kappa_b;
    let d = r.delta;
    let gt2 = r.g_tilde.norm_sqr();
    let e2 = n.eta0 * n.eta0;
    let (c1, c2) = (l1.conj(), l2.conj());
    let x = 2.0 * (gam1 - g2) + 4.0 * i * (om1 - w2);
    let (a1, a2) = (u - x, u + x);
    let uc_minus = u.conj() + 2.0 * (gam1 - g2) - 4.0 * i * (om1 - w2);
    let uc_plus = u.conj() - 2.0 * (gam1 - g2) + 4.0 * i * (om1 - w2);
    let (r1, r2) = (l1 + c1, l2 + c2);
    let l1c2 = l1 + c2;
    let c1l2 = c1 + l2;
    let s = r1 + r2;
    let cav = |l: Complex64| (k / 2.0 + l + i * d).norm_sqr();
    let cross = (k / 2.0 + l1 + i * d) * (k / 2.0 + c2 - i * d);

    let t1 = g1 * n1 * (a1.norm_sqr() / r1 + a2.norm_sqr() / r2 + 2.0 * (a1 * uc_minus / l1c2).re);
    let t2 = gt2
        * ((k + r1) * a1.norm_sqr() / (r1 * cav(l1))
            + (k + r2) * a2.norm_sqr() / (r2 * cav(l2))
            + 2.0 * ((k + l1 + c2) * uc_minus * a1 / (l1c2 * cross)).re);
    let denom = r1 * r2 * c1l2 * l1c2;
    let bracket2 = match bracket {
        SecondBathBracket::Printed => c1l2 * l1c2 + r1 * r2,
        SecondBathBracket::Corrected => (l1 - l2) * (c1 - c2),
    };
    let t3 = 64.0 * e2 * g2 * n2 * s * bracket2 / denom;
    let nf1 = (t1 + t2 + t3) / (4.0 * u.norm_sqr());

    let s1 = g1 * n1 * (l1 - l2) * (c1 - c2) * s / denom;
    let s2 = gt2
        * ((k + r1) / (r1 * cav(l1)) + (k + r2) / (r2 * cav(l2))
            - 2.0 * ((k + l1 + c2) / (l1c2 * cross)).re);
    let s3 = g2 * n2 * (a2.norm_sqr() / r1 + a1.norm_sqr() / r2 + 2.0 * (uc_plus * a2 / l1c2).re);
    let nf2 = (64.0 * e2 * (s1 + s2) + s3) / (4.0 * u.norm_sqr());
    Ok((nf1.re, nf2.re))
}

/// The full reduced-model expressions exactly as printed.
pub fn phonons_adiabatic_full(op: &OperatingPoint, n: &NormalizedParams) -> Result<CoolingResult> {
    let r = effective_rates(op, n, KappaBridge::default());
    phonons_adiabatic_full_with(&r, n)
}

pub fn phonons_adiabatic_full_with(r: &EffectiveRates, n: &NormalizedParams) -> Result<CoolingResult> {
    let (a, b) = reduced_closed_form(r, n, SecondBathBracket::Printed)?;
    Ok(CoolingResult::from_occupations(a, b, Method::AdiabaticFull))
}

/// Full reduced-model expressions with the resonator-2 bath term of `n1`
/// written as the mirror image of the resonator-1 bath term of `n2`. This
/// form satisfies the energy balance of the reduced model, which the
/// printed one does not.
pub fn phonons_adiabatic_corrected(op: &OperatingPoint, n: &NormalizedParams) -> Result<CoolingResult> {
    let r = effective_rates(op, n, KappaBridge::default());
    phonons_adiabatic_corrected_with(&r, n)
}

pub fn phonons_adiabatic_corrected_with(
    r: &EffectiveRates,
    n: &NormalizedParams,
) -> Result<CoolingResult> {
    let (a, b) = reduced_closed_form(r, n, SecondBathBracket::Corrected)?;
    Ok(CoolingResult::from_occupations(a, b, Method::AdiabaticCorrected))
}

/// Leading-order occupations, valid for `Gamma1 > 4 chi`.
pub fn phonons_adiabatic_simplified(r: &EffectiveRates, n: &NormalizedParams) -> Result<CoolingResult> {
    let (n1, n2) = simplified_with_nopt(r, n, r.n_opt)?;
    Ok(CoolingResult::from_occupations(n1, n2, Method::AdiabaticSimplified))
}

fn simplified_with_nopt(r: &EffectiveRates, n: &NormalizedParams, n_opt: f64) -> Result<(f64, f64)> {
    let (gam1, chi, gopt) = (r.gamma1_eff, r.chi, r.gamma_opt);
    if gam1 <= 4.0 * chi {
        return Err(Error::StabilityViolated {
            gamma1_eff: gam1,
            chi,
        });
    }
    let (g1, g2, n1, n2) = (n.gamma1, n.gamma2, n.nbar1, n.nbar2);
    let n1c = g2 * n2 * (4.0 * chi + gam1) / ((gam1 + g2) * (chi + g2));
    let n2c = (g1 * n1 + g2 * n2 + gopt * n_opt) / (gam1 + g2);
    let a = g1 * n1 / gam1 + (gopt * n_opt + chi * n1c) / (gam1 - 4.0 * chi);
    let b = (g2 * n2 + chi * n2c) / (chi + g2);
    Ok((a, b))
}

/// Simplified occupations at the optimal detuning, where the backaction
/// floor becomes `(kappa_B / 4 omega1)^2`.
pub fn cooling_limits(r: &EffectiveRates, n: &NormalizedParams) -> Result<(f64, f64)> {
    let floor = (r.kappa_b / (4.0 * n.omega1)).powi(2);
    simplified_with_nopt(r, n, floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sylvester;
    use nalgebra::DMatrix;

    /// Lyapunov solve of the reduced model with the cavity kept as a
    /// coloured noise source.
    fn reduced_lyapunov(r: &EffectiveRates, n: &NormalizedParams) -> (f64, f64) {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        let gt = r.g_tilde;
        let e = n.eta0;
        let mut k = DMatrix::from_element(6, 6, z);
        k[(0, 0)] = r.gamma1_eff / 2.0 + i * r.omega1_eff;
        k[(0, 1)] = -i * e;
        k[(0, 2)] = -i * gt.conj();
        k[(0, 5)] = -i * gt;
        k[(1, 0)] = -i * e;
        k[(1, 1)] = n.gamma2 / 2.0 + i * n.omega2;
        k[(2, 2)] = r.kappa_b / 2.0 + i * r.delta;
        k[(3, 3)] = r.gamma1_eff / 2.0 - i * r.omega1_eff;
        k[(3, 4)] = i * e;
        k[(3, 5)] = i * gt;
        k[(3, 2)] = i * gt.conj();
        k[(4, 3)] = i * e;
        k[(4, 4)] = n.gamma2 / 2.0 - i * n.omega2;
        k[(5, 5)] = r.kappa_b / 2.0 - i * r.delta;
        let c = |x: f64| Complex64::new(x, 0.0);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(n.gamma1 * (n.nbar1 + 1.0)),
            c(n.gamma2 * (n.nbar2 + 1.0)),
            c(r.kappa_b),
            c(n.gamma1 * n.nbar1),
            c(n.gamma2 * n.nbar2),
            c(0.0),
        ]));
        let s = sylvester(&k, &k.adjoint(), &d).unwrap();
        (s[(3, 3)].re, s[(4, 4)].re)
    }

    fn params(eta0: f64, nbar: [f64; 2], gamma: [f64; 2]) -> NormalizedParams {
        NormalizedParams::mechanical(1.0, eta0, 0.2, gamma, nbar)
    }

    #[test]
    fn bridge_rates() {
        let n = params(0.02, [1000.0; 2], [1e-6; 2]);
        let op = OperatingPoint::from_coupling(1.0, Complex64::new(0.02 * 2f64.sqrt(), 0.0));
        let r = effective_rates(&op, &n, KappaBridge::EnergyRate);
        assert!((r.kappa_b - 0.4).abs() < 1e-15);
        assert!((r.g_tilde.norm() - 0.02).abs() < 1e-15);
        assert!((r.gamma_opt - 4e-3).abs() < 1e-15);
        assert!((r.omega_opt - 2e-4).abs() < 1e-15);
        assert!((r.n_opt - 0.01).abs() < 1e-15);
    }

    #[test]
    fn corrected_matches_reduced_lyapunov() {
        for (eta0, g, delta) in [(0.002, 0.03, 1.0), (0.02, 0.1, 0.9), (0.05, 0.15, 1.1)] {
            let n = params(eta0, [1000.0, 500.0], [1e-5, 2e-5]);
            let r = rates_from_reduced(Complex64::new(g, 0.01), 0.4, delta, &n);
            let (a, b) = reduced_lyapunov(&r, &n);
            let c = phonons_adiabatic_corrected_with(&r, &n).unwrap();
            assert!((c.n1 - a).abs() < 1e-9 * a, "{} vs {a}", c.n1);
            assert!((c.n2 - b).abs() < 1e-9 * b, "{} vs {b}", c.n2);
            // the second-resonator expression is shared by both forms
            let f = phonons_adiabatic_full_with(&r, &n).unwrap();
            assert_eq!(f.n2, c.n2);
        }
    }

    #[test]
    fn printed_form_breaks_energy_balance() {
        // beam-splitter exchange only: Gamma1 n1 + gamma2 n2 = gamma2 nbar2
        let mut n = params(0.002, [0.0, 1000.0], [0.0, 1e-5]);
        n.gamma1 = 0.0;
        let mut r = rates_from_reduced(Complex64::new(0.0, 0.0), 0.1, 1.0, &n);
        r.gamma1_eff = 0.01;
        r.chi = 4.0 * n.eta0 * n.eta0 / r.gamma1_eff;
        let c = phonons_adiabatic_corrected_with(&r, &n).unwrap();
        let f = phonons_adiabatic_full_with(&r, &n).unwrap();
        let balance = |x: &CoolingResult| r.gamma1_eff * x.n1 + n.gamma2 * x.n2;
        assert!((balance(&c) - 0.01).abs() < 1e-12);
        assert!((balance(&f) - 0.0457).abs() < 5e-4, "{}", balance(&f));
    }

    #[test]
    fn simplified_limit_of_printed_form() {
        let n = params(0.001, [1000.0; 2], [1e-6; 2]);
        let r = rates_from_reduced(Complex64::new(0.03, 0.0), 0.4, 1.0, &n);
        let full = phonons_adiabatic_full_with(&r, &n).unwrap();
        let simp = phonons_adiabatic_simplified(&r, &n).unwrap();
        assert!((full.n1 - simp.n1).abs() < 0.02 * simp.n1, "{} vs {}", full.n1, simp.n1);
        assert!((full.n2 - simp.n2).abs() < 0.02 * simp.n2, "{} vs {}", full.n2, simp.n2);
    }

    #[test]
    fn decoupled_resonator_two_keeps_its_bath() {
        let n = params(0.0, [1000.0; 2], [1e-6; 2]);
        let r = rates_from_reduced(Complex64::new(0.02, 0.0), 0.4, 1.0, &n);
        let s = phonons_adiabatic_simplified(&r, &n).unwrap();
        assert!((s.n2 - 1000.0).abs() < 1e-9);
        let expect = (n.gamma1 * 1000.0 + r.gamma_opt * r.n_opt) / r.gamma1_eff;
        assert!((s.n1 - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn stability_gate() {
        let n = params(0.06, [1000.0; 2], [1e-6; 2]);
        let r = rates_from_reduced(Complex64::new(0.02, 0.0), 0.4, 1.0, &n);
        assert!(r.gamma1_eff < 4.0 * r.chi);
        assert!(matches!(
            phonons_adiabatic_simplified(&r, &n),
            Err(Error::StabilityViolated { .. })
        ));
    }

    #[test]
    fn eigenvalues_no_mode_coupling() {
        let n = params(0.0, [0.0; 2], [1e-3, 2e-3]);
        let r = rates_from_reduced(Complex64::new(0.02, 0.0), 0.4, 1.0, &n);
        let e = eigenvalues(&r, &n);
        let m1 = Complex64::new(r.gamma1_eff / 2.0, r.omega1_eff);
        let m2 = Complex64::new(n.gamma2 / 2.0, n.omega2);
        let (a, b) = (e.lambda1, e.lambda2);
        assert!(((a - m1).norm() < 1e-12 && (b - m2).norm() < 1e-12) || ((a - m2).norm() < 1e-12 && (b - m1).norm() < 1e-12));
    }

    #[test]
    fn branch_continuation() {
        let n = params(0.01, [0.0; 2], [1e-3, 1e-3]);
        let mut prev: Option<Complex64> = None;
        for k in 0..50 {
            let mut n2 = n;
            n2.omega2 = 0.95 + 0.002 * k as f64;
            let r = rates_from_reduced(Complex64::new(0.02, 0.0), 0.4, 1.0, &n2);
            let e = match prev {
                None => eigenvalues(&r, &n2),
                Some(p) => eigenvalues_continued(&r, &n2, p),
            };
            if let Some(p) = prev {
                assert!((e.u - p).norm() < 0.05, "jump at step {k}");
            }
            prev = Some(e.u);
        }
    }
}
