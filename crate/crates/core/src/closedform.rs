//! Determinant-ratio evaluation of the stationary variances.
//!
//! For a polynomial `h` of degree `n` with all roots on one side of the real
//! axis and an even numerator `g(w) = b0 w^(2n-2) + ... + b_(n-1)`,
//! `int g / (h(w) h(-w)) dw` is `(i pi / a0) M_n / Delta_n` up to a sign fixed
//! by the half-plane (see [`integral_ratio`]).

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::linearize::{drift_matrix, OperatingPoint, STABILITY_MARGIN};
use crate::params::NormalizedParams;
use crate::result::{CoolingResult, Method};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct PolyIntegralSpec {
    /// `a0 .. an`, highest power first.
    pub a: Vec<Complex64>,
    /// `b0 .. b(n-1)`, coefficients of `w^(2n-2) .. w^0`.
    pub b: Vec<Complex64>,
}

impl PolyIntegralSpec {
    pub fn order(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    fn check(&self) -> Result<()> {
        let n = self.order();
        if n == 0 {
            return Err(Error::param("a", "need at least two coefficients"));
        }
        if self.b.len() != n {
            return Err(Error::param("b", format!("expected {n} coefficients, got {}", self.b.len())));
        }
        if self.a[0] == Complex64::new(0.0, 0.0) {
            return Err(Error::param("a0", "leading coefficient is zero"));
        }
        if self.a.iter().chain(&self.b).any(|z| !z.is_finite()) {
            return Err(Error::param("a", "non-finite coefficient"));
        }
        Ok(())
    }
}

/// `n x n` Hurwitz matrix, entry `(i, j)` (1-based) = `a_(2j - i)`.
pub fn hurwitz_matrix(a: &[Complex64]) -> DMatrix<Complex64> {
    let n = a.len() - 1;
    DMatrix::from_fn(n, n, |i, j| {
        let idx = 2 * (j as isize + 1) - (i as isize + 1);
        if (0..=n as isize).contains(&idx) {
            a[idx as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Hurwitz matrix with its first row replaced by `b`.
pub fn numerator_matrix(a: &[Complex64], b: &[Complex64]) -> DMatrix<Complex64> {
    let mut m = hurwitz_matrix(a);
    for (j, &bj) in b.iter().enumerate() {
        m[(0, j)] = bj;
    }
    m
}

/// Side of the real axis holding every root of `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HalfPlane {
    Upper,
    Lower,
}

pub fn root_half_plane(a: &[Complex64]) -> Result<HalfPlane> {
    let roots = linalg::poly_roots(a)?;
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-13 * scale;
    if roots.iter().all(|z| z.im > tol) {
        Ok(HalfPlane::Upper)
    } else if roots.iter().all(|z| z.im < -tol) {
        Ok(HalfPlane::Lower)
    } else {
        Err(Error::InvalidContour)
    }
}

/// The tabulated expression `(i pi / a0) M_n / Delta_n`, without any
/// root-location bookkeeping.
pub fn hurwitz_formula(spec: &PolyIntegralSpec) -> Result<Complex64> {
    spec.check()?;
    let h = hurwitz_matrix(&spec.a);
    let dn = linalg::det(&h);
    let bound: f64 = h
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .product();
    if dn.norm() <= 1e-14 * bound || !dn.is_finite() {
        return Err(Error::DegenerateDenominator);
    }
    let mn = linalg::det(&numerator_matrix(&spec.a, &spec.b));
    Ok(I * std::f64::consts::PI / spec.a[0] * mn / dn)
}

/// `int_{-inf}^{inf} g(w) / (h(w) h(-w)) dw`.
///
/// The tabulated expression equals the integral when the roots of `h` lie
/// in the lower half-plane for even `n` or the upper half-plane for odd `n`,
/// and its negative otherwise.
pub fn integral_ratio(spec: &PolyIntegralSpec) -> Result<Complex64> {
    spec.check()?;
    let side = root_half_plane(&spec.a)?;
    let f = hurwitz_formula(spec)?;
    let even = spec.order().is_multiple_of(2);
    Ok(match (side, even) {
        (HalfPlane::Lower, true) | (HalfPlane::Upper, false) => f,
        _ => -f,
    })
}

/// Coefficients `a0 .. a6` of the response denominator, highest power first.
pub fn denominator_coefficients(op: &OperatingPoint, n: &NormalizedParams) -> [Complex64; 7] {
    let (k, d) = (n.kappa, op.delta);
    let (w1, w2, e) = (n.omega1, n.omega2, n.eta0);
    let (g1, g2) = (n.gamma1, n.gamma2);
    let gg = op.g2();
    let k2d2 = k * k + d * d;
    let pot = w1 * w2 - 4.0 * e * e;
    let c = |re: f64| Complex64::new(re, 0.0);
    let ci = |im: f64| Complex64::new(0.0, im);
    [
        c(1.0),
        ci(-(2.0 * k + g1 + g2)),
        c(-(k * k + g1 * g2 + w1 * w1 + w2 * w2 + d * d + 2.0 * k * (g1 + g2))),
        ci(k2d2 * (g1 + g2) + 2.0 * k * (g1 * g2 + w1 * w1 + w2 * w2) + g2 * w1 * w1 + g1 * w2 * w2),
        c(k2d2 * (g1 * g2 + w1 * w1 + w2 * w2) + 2.0 * k * (g2 * w1 * w1 + g1 * w2 * w2) + w1 * w2 * pot
            - 2.0 * w1 * gg * d),
        ci(-(k * k * (g2 * w1 * w1 + g1 * w2 * w2)
            + 2.0 * k * w1 * w2 * pot
            + d * (g1 * w2 * w2 * d + g2 * w1 * (-2.0 * gg + w1 * d)))),
        c(w1 * w2 * (d * (2.0 * w2 * gg - w1 * w2 * d + 4.0 * e * e * d) + k * k * (4.0 * e * e - w1 * w2))),
    ]
}

/// Numerator coefficients `b0 .. b5` for the position spectrum of each
/// resonator, white bath noise.
pub fn numerator_coefficients(op: &OperatingPoint, n: &NormalizedParams) -> [[f64; 6]; 2] {
    let (k, d) = (n.kappa, op.delta);
    let (w1, w2, e) = (n.omega1, n.omega2, n.eta0);
    let (g1, g2) = (n.gamma1, n.gamma2);
    let gg = op.g2();
    let (k2, d2, e2) = (k * k, d * d, e * e);
    let k2d2 = k2 + d2;
    let b11 = (1.0 + 2.0 * n.nbar1) * g1 * w1 * w1;
    let b12 = (1.0 + 2.0 * n.nbar2) * g2 * w2 * w2;
    let w1s = w1 * w1;
    let w2s = w2 * w2;
    let first = [
        0.0,
        b11,
        b11 * (2.0 * k2 + g2 * g2 - 2.0 * (w2s + d2)) + 2.0 * w1s * k * gg,
        b11 * (k2 * k2 + 2.0 * k2 * (g2 * g2 - 2.0 * w2s + d2) + w2s * w2s - 2.0 * g2 * g2 * d2
            + d2 * d2
            + 4.0 * w2s * d2)
            + 4.0 * b12 * e2 * w1s
            + 2.0 * w1s * gg * k * (k2 + g2 * g2 - 2.0 * w2s + d2),
        b11 * (2.0 * w2s * w2s * (k2 - d2) + (g2 * g2 - 2.0 * w2s) * k2d2 * k2d2)
            + 8.0 * b12 * e2 * w1s * (k2 - d2)
            + 2.0 * k * w1s * gg * (w2s * w2s + (g2 * g2 - 2.0 * w2s) * k2d2),
        (b11 * w2s * w2s + 4.0 * b12 * e2 * w1s) * k2d2 * k2d2 + 2.0 * k * w1s * w2s * w2s * k2d2 * gg,
    ];
    let ww = w1 * w2 * e;
    let second = [
        0.0,
        b12,
        b12 * (2.0 * k2 + g1 * g1 - 2.0 * (w1s + d2)),
        b12 * (k2 * k2 + 2.0 * k2 * (g1 * g1 - 2.0 * w1s + d2) + d2 * (d2 - 2.0 * g1 * g1 + 4.0 * w1s)
            + w1s * w1s
            - 4.0 * gg * w1 * d)
            + 4.0 * b11 * w2s * e2,
        b12 * (4.0 * gg * d * w1 * (2.0 * k * g1 + k2 + w1s + d2)
            + (g1 * g1 - 2.0 * w1s) * k2d2 * k2d2
            + 2.0 * w1s * w1s * (k2 - d2))
            + 8.0 * b11 * w2s * e2 * (k2 - d2)
            + 8.0 * gg * k * ww * ww,
        b12 * w1s * (k2 * k2 * w1s + (-2.0 * gg + w1 * d) * (-2.0 * gg * d2 + (d2 + 2.0 * k2) * w1 * d))
            + 4.0 * b11 * w2s * e2 * k2d2 * k2d2
            + 8.0 * gg * k * ww * ww * k2d2,
    ];
    [first, second]
}

trait Ring:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
    + Div<Output = Self> + Mul<f64, Output = Self>
{
}
impl Ring for Complex64 {}

/// Evaluates an expression with every coefficient replaced by its modulus
/// and every sign made positive: the sum of monomial magnitudes.
#[derive(Debug, Clone, Copy)]
struct Abs(f64);

impl Add for Abs {
    type Output = Abs;
    fn add(self, o: Abs) -> Abs {
        Abs(self.0 + o.0)
    }
}
// magnitudes add under subtraction too
#[allow(clippy::suspicious_arithmetic_impl)]
impl Sub for Abs {
    type Output = Abs;
    fn sub(self, o: Abs) -> Abs {
        Abs(self.0 + o.0)
    }
}
impl Mul for Abs {
    type Output = Abs;
    fn mul(self, o: Abs) -> Abs {
        Abs(self.0 * o.0)
    }
}
impl Div for Abs {
    type Output = Abs;
    fn div(self, o: Abs) -> Abs {
        Abs(self.0 / o.0)
    }
}
impl Neg for Abs {
    type Output = Abs;
    fn neg(self) -> Abs {
        self
    }
}
impl Mul<f64> for Abs {
    type Output = Abs;
    fn mul(self, c: f64) -> Abs {
        Abs(self.0 * c.abs())
    }
}
impl Ring for Abs {}

fn delta6_expr<T: Ring>(a: &[T; 7]) -> T {
    let [_, a1, a2, a3, a4, a5, a6] = *a;
    a5 * (a4 * (-(a1 * a2 * a3) + a3 * a3 + a1 * a1 * a4) + (-(a2 * a3) + a1 * (a2 * a2 - a4 * 2.0)) * a5
        + a5 * a5)
        - (a3 * a3 * a3 - a1 * a3 * (a2 * a3 + a5 * 3.0) + a1 * a1 * (a3 * a4 + a2 * a5 * 2.0)) * a6
        + a1 * a1 * a1 * a6 * a6
}

fn d6_expr<T: Ring>(a: &[T; 7], b: &[T; 6]) -> T {
    let [_, a1, a2, a3, a4, a5, a6] = *a;
    let [_, b1, b2, b3, b4, b5] = *b;
    (-(a3 * a4 * a5) + a3 * a3 * a6 + a5 * (a2 * a5 - a1 * a6)) * b1
        + (a1 * a4 * a5 - a5 * a5 - a1 * a3 * a6) * b2
        + (-(a1 * a2 * a5) + a3 * a5 + a1 * a1 * a6) * b3
        + (-(a3 * a3) - a1 * a1 * a4 + a1 * (a2 * a3 + a5)) * b4
        + (a3 * a3 * a4 - a2 * a3 * a5 + a5 * a5 + a1 * a1 * (a4 * a4 - a2 * a6)
            + a1 * (-(a2 * a3 * a4) + a2 * a2 * a5 - a4 * a5 * 2.0 + a3 * a6))
            * b5
            / a6
}

fn m6_expr<T: Ring>(a: &[T; 7], b: &[T; 6], ws: T) -> T {
    let [a0, a1, a2, a3, a4, a5, a6] = *a;
    let [_, b1, b2, b3, b4, b5] = *b;
    (-(a5 * (-(a2 * a3 * a4) + a2 * a2 * a5 + a4 * (a1 * a4 - a0 * a5))
        + (-(a1 * a3 * a4) + a0 * a3 * a5 + a2 * (a3 * a3 - a1 * a5 * 2.0)) * a6
        + a1 * a1 * a6 * a6)
        * b1
        + (-(a3 * a4 * a5) + a3 * a3 * a6 + a5 * (a2 * a5 - a1 * a6)) * b2
        + (a1 * a4 * a5 - a5 * a5 - a1 * a3 * a6) * b3
        + (-(a1 * a2 * a5) + a3 * a5 + a1 * a1 * a6) * b4
        + (-(a3 * a3) - a1 * a1 * a4 + a1 * (a2 * a3 + a5)) * b5)
        / (ws * ws)
}

/// The printed sixth-order Hurwitz combination of `a0 .. a6`.
pub fn delta6_printed(a: &[Complex64; 7]) -> Complex64 {
    delta6_expr(a)
}

pub fn d6_printed(a: &[Complex64; 7], b: &[f64; 6]) -> Complex64 {
    d6_expr(a, &b.map(|x| Complex64::new(x, 0.0)))
}

pub fn m6_printed(a: &[Complex64; 7], b: &[f64; 6], omega_s: f64) -> Complex64 {
    m6_expr(a, &b.map(|x| Complex64::new(x, 0.0)), Complex64::new(omega_s, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactCoefficients {
    pub a: [Complex64; 7],
    /// Indexed by resonator, then `b0 .. b5`.
    pub b: [[f64; 6]; 2],
    pub delta6: Complex64,
    pub d6: [Complex64; 2],
    pub m6: [Complex64; 2],
    /// Sum of monomial magnitudes over the value, worst of the five
    /// combinations. Large values mean heavy cancellation.
    pub cancellation: f64,
}

pub fn build_coefficients(op: &OperatingPoint, n: &NormalizedParams) -> ExactCoefficients {
    let a = denominator_coefficients(op, n);
    let b = numerator_coefficients(op, n);
    let ws = [n.omega1, n.omega2];
    let delta6 = delta6_printed(&a);
    let d6 = [d6_printed(&a, &b[0]), d6_printed(&a, &b[1])];
    let m6 = [m6_printed(&a, &b[0], ws[0]), m6_printed(&a, &b[1], ws[1])];

    let aa = a.map(|z| Abs(z.norm()));
    let mut cancellation = delta6_expr(&aa).0 / delta6.norm();
    for s in 0..2 {
        let bb = b[s].map(|x| Abs(x.abs()));
        cancellation = cancellation
            .max(d6_expr(&aa, &bb).0 / d6[s].norm())
            .max(m6_expr(&aa, &bb, Abs(ws[s])).0 / m6[s].norm());
    }
    if !cancellation.is_finite() {
        cancellation = f64::INFINITY;
    }
    ExactCoefficients {
        a,
        b,
        delta6,
        d6,
        m6,
        cancellation,
    }
}

/// Above this cancellation ratio only a few significant digits survive.
pub const CANCELLATION_LIMIT: f64 = 1e11;

/// Position and momentum variance terms of resonator `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceTerms {
    pub position: Complex64,
    pub momentum: Complex64,
}

impl ExactCoefficients {
    pub fn variance_terms(&self, s: usize) -> VarianceTerms {
        let two_d = self.delta6 * 2.0;
        VarianceTerms {
            position: I * self.d6[s] / two_d,
            momentum: I * self.m6[s] / two_d,
        }
    }
}

/// Final phonon numbers from the printed determinant combinations.
pub fn exact_phonons(op: &OperatingPoint, n: &NormalizedParams) -> Result<CoolingResult> {
    n.validate()?;
    let max_re = drift_matrix(op, n).max_real_part()?;
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::UnstableSystem { max_re });
    }
    let c = build_coefficients(op, n);
    if c.cancellation > CANCELLATION_LIMIT || c.delta6.norm() == 0.0 {
        return Err(Error::IllConditioned {
            metric: c.cancellation,
        });
    }
    let t = [c.variance_terms(0), c.variance_terms(1)];
    let mut r = CoolingResult::from_variances(
        [t[0].position.re, t[1].position.re],
        [t[0].momentum.re, t[1].momentum.re],
        Method::Closedform,
    );
    r.error_estimate = Some(c.cancellation * f64::EPSILON * r.var_q[0].max(r.var_q[1]));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::steady_covariance;
    use crate::params::tests_support::fig2_normalized;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Laplace expansion along the first row.
    fn det_cofactor(m: &DMatrix<Complex64>) -> Complex64 {
        let n = m.nrows();
        if n == 1 {
            return m[(0, 0)];
        }
        let mut acc = c(0.0, 0.0);
        for j in 0..n {
            let minor = m.clone().remove_row(0).remove_column(j);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += m[(0, j)] * det_cofactor(&minor) * sign;
        }
        acc
    }

    #[test]
    fn first_order() {
        let spec = PolyIntegralSpec {
            a: vec![c(1.0, 0.0), c(0.0, 1.0)],
            b: vec![c(1.0, 0.0)],
        };
        // the tabulated value
        assert!((hurwitz_formula(&spec).unwrap() - c(std::f64::consts::PI, 0.0)).norm() < 1e-14);
        // h(w)h(-w) = -(1 + w^2), so the true integral is negative
        assert!((integral_ratio(&spec).unwrap() + c(std::f64::consts::PI, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn damped_oscillator() {
        // h(w) = -w^2 - i g w + w0^2, roots in the lower half-plane
        let (w0, g) = (1.3_f64, 0.2_f64);
        let spec = PolyIntegralSpec {
            a: vec![c(-1.0, 0.0), c(0.0, -g), c(w0 * w0, 0.0)],
            b: vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        let v = integral_ratio(&spec).unwrap();
        let expect = std::f64::consts::PI / (g * w0 * w0);
        assert!((v - c(expect, 0.0)).norm() < 1e-12 * expect, "{v}");
    }

    #[test]
    fn straddling_roots() {
        // (w - i)(w + i) = w^2 + 1
        let spec = PolyIntegralSpec {
            a: vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            b: vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        assert_eq!(integral_ratio(&spec), Err(Error::InvalidContour));
    }

    #[test]
    fn degenerate_denominator() {
        // Hurwitz matrix [[a1, 0], [a0, a2]] with a1 = 0 is singular
        let spec = PolyIntegralSpec {
            a: vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            b: vec![c(0.0, 0.0), c(1.0, 0.0)],
        };
        assert_eq!(hurwitz_formula(&spec), Err(Error::DegenerateDenominator));
    }

    #[test]
    fn uncoupled_a6() {
        let n = NormalizedParams::mechanical(1.3, 0.0, 0.2, [1e-3, 2e-3], [5.0, 7.0]);
        let op = OperatingPoint::from_coupling(0.8, c(0.0, 0.0));
        let a = denominator_coefficients(&op, &n);
        let expect = -(1.3f64 * 1.3) * (0.04 + 0.64);
        assert!((a[6] - c(expect, 0.0)).norm() < 1e-14);
        let b = numerator_coefficients(&op, &n);
        assert_eq!(b[0][1], 11.0 * 1e-3);
        assert!((b[1][1] - 15.0 * 2e-3 * 1.69).abs() < 1e-15);
    }

    #[test]
    fn printed_combinations_are_hurwitz_determinants() {
        let (n, op) = fig2_normalized(0.2, 1.0);
        let cf = build_coefficients(&op, &n);
        let a = cf.a;
        let h6 = linalg::det(&hurwitz_matrix(&a));
        assert!((cf.delta6 + h6 / a[6]).norm() < 1e-9 * cf.delta6.norm());
        for s in 0..2 {
            let b: Vec<Complex64> = cf.b[s].iter().map(|&x| c(x, 0.0)).collect();
            let md = linalg::det(&numerator_matrix(&a, &b)) / a[6];
            assert!((cf.d6[s] - md).norm() < 1e-8 * md.norm());
            let mut shifted = b[1..].to_vec();
            shifted.push(c(0.0, 0.0));
            let ws = n.omega(s);
            let mm = linalg::det(&numerator_matrix(&a, &shifted)) / (a[6] * ws * ws);
            assert!((cf.m6[s] - mm).norm() < 1e-8 * mm.norm());
        }
    }

    #[test]
    fn lu_matches_cofactor() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = DMatrix::from_fn(6, 6, |i, j| {
                let diag = if i == j { 4.0 } else { 0.0 };
                c(rng.random_range(-1.0..1.0) + diag, rng.random_range(-1.0..1.0))
            });
            let a = linalg::det(&m);
            let b = det_cofactor(&m);
            assert!((a - b).norm() < 1e-10 * b.norm());
        }
    }

    #[test]
    fn fig2_matches_covariance() {
        let (n, op) = fig2_normalized(0.2, 1.0);
        let r = exact_phonons(&op, &n).unwrap();
        let s = steady_covariance(&op, &n).unwrap();
        assert!((r.var_q[0] - s[(2, 2)]).abs() < 1e-8);
        assert!((r.var_p[0] - s[(3, 3)]).abs() < 1e-8);
        assert!((r.var_q[1] - s[(4, 4)]).abs() < 1e-8);
        assert!((r.var_p[1] - s[(5, 5)]).abs() < 1e-8);
        assert!((r.n1 - 0.16743010674).abs() < 1e-8);
        assert!((r.n2 - 0.37875148682).abs() < 1e-8);
        let rot = I * build_coefficients(&op, &n).delta6;
        assert!((rot.re - 2.0e-6).abs() < 0.1e-6, "{rot}");
    }

    #[test]
    fn equilibrium_without_coupling() {
        let n = NormalizedParams::mechanical(1.2, 0.0, 0.3, [1e-3, 2e-3], [40.0, 7.0]);
        let op = OperatingPoint::from_coupling(1.0, c(0.0, 0.0));
        let r = exact_phonons(&op, &n).unwrap();
        assert!((r.n1 - 40.0).abs() < 1e-7 * 40.0, "{}", r.n1);
        assert!((r.n2 - 7.0).abs() < 1e-7 * 7.0, "{}", r.n2);
    }

    #[test]
    fn unstable_rejected() {
        let n = NormalizedParams::mechanical(1.0, 0.04, 0.2, [1e-5; 2], [1000.0; 2]);
        let op = OperatingPoint::from_coupling(-1.0, c(0.3, 0.0));
        assert!(matches!(exact_phonons(&op, &n), Err(Error::UnstableSystem { .. })));
    }
}
