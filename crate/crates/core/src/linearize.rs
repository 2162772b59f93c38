//! Classical operating point and linearized fluctuation dynamics.

use nalgebra::{DMatrix, Matrix6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closedform::{denominator_coefficients, delta6_printed};
use crate::error::{Error, Result};
use crate::linalg;
use crate::params::NormalizedParams;
use crate::result::{CoolingResult, Method};

/// Steady state of the mean fields together with the derived detuning and
/// linearized coupling `G = lambda0 * alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub alpha: Complex64,
    pub q1: f64,
    pub p1: f64,
    pub q2: f64,
    pub p2: f64,
    /// Effective detuning.
    pub delta: f64,
    pub coupling: Complex64,
}

impl OperatingPoint {
    /// Operating point specified directly by detuning and coupling; the
    /// mean fields are left at zero.
    pub fn from_coupling(delta: f64, coupling: Complex64) -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            q1: 0.0,
            p1: 0.0,
            q2: 0.0,
            p2: 0.0,
            delta,
            coupling,
        }
    }

    pub fn g2(&self) -> f64 {
        self.coupling.norm_sqr()
    }
}

fn mean_fields(delta: f64, n: &NormalizedParams) -> Result<OperatingPoint> {
    let margin = n.potential_margin();
    if margin <= 0.0 {
        return Err(Error::InvalidPotential(margin));
    }
    let alpha = Complex64::new(0.0, -n.drive) / Complex64::new(n.kappa, delta);
    let x = alpha.norm_sqr();
    Ok(OperatingPoint {
        alpha,
        q1: n.lambda0 * n.omega2 * x / margin,
        p1: 0.0,
        q2: 2.0 * n.lambda0 * n.eta0 * x / margin,
        p2: 0.0,
        delta,
        coupling: alpha * n.lambda0,
    })
}

/// Mean fields with the effective detuning treated as the control knob.
pub fn operating_point_effective(delta: f64, n: &NormalizedParams) -> Result<OperatingPoint> {
    if !delta.is_finite() {
        return Err(Error::param("delta", "must be finite"));
    }
    mean_fields(delta, n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub point: OperatingPoint,
    pub stable: bool,
    pub max_re: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfConsistent {
    /// Every positive real root, ordered by intracavity photon number.
    pub branches: Vec<Branch>,
    /// Index of the selected stable branch.
    pub designated: usize,
    /// True when a lower, unstable branch was skipped.
    pub skipped_unstable: bool,
}

impl SelfConsistent {
    pub fn point(&self) -> OperatingPoint {
        self.branches[self.designated].point
    }
}

/// Solves for the intracavity photon number `x` with the detuning pulled by
/// the mechanical displacement, `Delta = Delta_c - beta x`.
pub fn operating_point_selfconsistent(n: &NormalizedParams) -> Result<SelfConsistent> {
    let margin = n.potential_margin();
    if margin <= 0.0 {
        return Err(Error::InvalidPotential(margin));
    }
    let beta = n.lambda0 * n.lambda0 * n.omega2 / margin;
    let roots = photon_number_roots(beta, n.delta_c, n.kappa, n.drive);
    if roots.is_empty() {
        return Err(Error::NoOperatingPoint);
    }
    let mut branches = Vec::with_capacity(roots.len());
    for x in roots {
        let point = mean_fields(n.delta_c - beta * x, n)?;
        let eig = drift_matrix(&point, n).eigenvalues()?;
        let max_re = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        branches.push(Branch {
            point,
            stable: max_re < -STABILITY_MARGIN,
            max_re,
        });
    }
    let designated = branches
        .iter()
        .position(|b| b.stable)
        .ok_or(Error::UnstableOperatingPoint)?;
    Ok(SelfConsistent {
        skipped_unstable: designated > 0,
        branches,
        designated,
    })
}

/// Non-negative real roots of
/// `beta^2 x^3 - 2 Delta_c beta x^2 + (kappa^2 + Delta_c^2) x - Omega^2 = 0`.
pub(crate) fn photon_number_roots(beta: f64, delta_c: f64, kappa: f64, drive: f64) -> Vec<f64> {
    let c3 = beta * beta;
    let c2 = -2.0 * delta_c * beta;
    let c1 = kappa * kappa + delta_c * delta_c;
    let c0 = -drive * drive;
    if drive == 0.0 {
        return vec![0.0];
    }
    if beta == 0.0 {
        return vec![-c0 / c1];
    }
    let f = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    // f(0) < 0 and f(upper) >= 0 since kappa^2 + Delta^2 >= kappa^2
    let upper = drive * drive / (kappa * kappa);
    let mut knots = vec![0.0];
    let disc = 4.0 * c2 * c2 - 12.0 * c3 * c1;
    if disc > 0.0 {
        let s = disc.sqrt();
        let mut crit = [(-2.0 * c2 - s) / (6.0 * c3), (-2.0 * c2 + s) / (6.0 * c3)];
        crit.sort_by(f64::total_cmp);
        knots.extend(crit.iter().copied().filter(|&c| c > 0.0 && c < upper));
    }
    knots.push(upper);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            if roots.last().is_none_or(|&r: &f64| (r - lo).abs() > 1e-14 * upper) {
                roots.push(lo);
            }
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        if roots.last().is_none_or(|&p: &f64| (p - r).abs() > 1e-12 * upper) {
            roots.push(r);
        }
    }
    roots
}

/// Linear coefficient matrix for `(Re da, Im da, dq1, dp1, dq2, dp2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftMatrix {
    pub entries: [[f64; 6]; 6],
}

pub const STABILITY_MARGIN: f64 = 1e-12;

impl DriftMatrix {
    pub fn matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|i, j| self.entries[i][j])
    }

    pub fn dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| self.entries[i][j])
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        linalg::eigenvalues_real(&self.dmatrix())
    }

    pub fn max_real_part(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.max_real_part()? < -STABILITY_MARGIN)
    }
}

pub fn drift_matrix(op: &OperatingPoint, n: &NormalizedParams) -> DriftMatrix {
    let (gr, gi) = (op.coupling.re, op.coupling.im);
    let (k, d) = (n.kappa, op.delta);
    let e2 = 2.0 * n.eta0;
    DriftMatrix {
        entries: [
            [-k, d, -gi, 0.0, 0.0, 0.0],
            [-d, -k, gr, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, n.omega1, 0.0, 0.0],
            [2.0 * gr, 2.0 * gi, -n.omega1, -n.gamma1, e2, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, n.omega2],
            [0.0, 0.0, e2, 0.0, -n.omega2, -n.gamma2],
        ],
    }
}

pub fn is_stable(d: &DriftMatrix) -> Result<bool> {
    d.is_stable()
}

/// Symmetrized diffusion matrix under white (high-temperature) bath noise.
pub fn diffusion_matrix(n: &NormalizedParams) -> Matrix6<f64> {
    Matrix6::from_diagonal(&nalgebra::Vector6::new(
        n.kappa / 2.0,
        n.kappa / 2.0,
        0.0,
        n.gamma1 * (2.0 * n.nbar1 + 1.0),
        0.0,
        n.gamma2 * (2.0 * n.nbar2 + 1.0),
    ))
}

/// Stationary symmetrized covariance, `M S + S M^T + D = 0`.
pub fn steady_covariance(op: &OperatingPoint, n: &NormalizedParams) -> Result<Matrix6<f64>> {
    let d = drift_matrix(op, n);
    let max_re = d.max_real_part()?;
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::UnstableSystem { max_re });
    }
    let m = d.dmatrix();
    let rhs = -DMatrix::from_fn(6, 6, |i, j| diffusion_matrix(n)[(i, j)]);
    let s = linalg::sylvester(&m, &m.transpose(), &rhs)?;
    let s = Matrix6::from_fn(|i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    Ok(s)
}

/// Final phonon numbers from the covariance matrix.
pub fn phonons_lyapunov(op: &OperatingPoint, n: &NormalizedParams) -> Result<CoolingResult> {
    n.validate()?;
    let s = steady_covariance(op, n)?;
    Ok(CoolingResult::from_variances(
        [s[(2, 2)], s[(4, 4)]],
        [s[(3, 3)], s[(5, 5)]],
        Method::Lyapunov,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta6Check {
    /// The printed Hurwitz combination; purely imaginary in exact arithmetic.
    pub raw: Complex64,
    /// `i * raw`, real up to rounding.
    pub rotated: Complex64,
    pub passes: bool,
}

/// Sign test on the sixth Hurwitz combination of the denominator
/// polynomial. Necessary for stability, not sufficient; see
/// [`DriftMatrix::is_stable`] for the eigenvalue test.
pub fn delta6_criterion(op: &OperatingPoint, n: &NormalizedParams) -> Delta6Check {
    let a = denominator_coefficients(op, n);
    let raw = delta6_printed(&a);
    let rotated = Complex64::new(0.0, 1.0) * raw;
    let scale = rotated.norm();
    let passes = rotated.re > 0.0 && rotated.im.abs() <= 1e-8 * scale.max(f64::MIN_POSITIVE);
    Delta6Check {
        raw,
        rotated,
        passes,
    }
}
