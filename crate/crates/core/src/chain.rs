//! Cavity coupled to the first of `N` identical resonators in a
//! nearest-neighbour chain, in the rotating-wave approximation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_resonators: usize,
    pub delta: f64,
    pub coupling: Complex64,
    pub eta0: f64,
    pub omega_m: f64,
    /// Energy decay rate of the cavity.
    pub kappa: f64,
    pub gamma: f64,
    pub nbar: f64,
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_resonators == 0 {
            return Err(Error::param("n_resonators", "must be at least 1"));
        }
        if self.n_resonators > 64 {
            return Err(Error::param("n_resonators", "at most 64 supported"));
        }
        for (name, v) in [("kappa", self.kappa), ("omega_m", self.omega_m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("nbar", self.nbar)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be non-negative"));
            }
        }
        if !(self.delta.is_finite() && self.eta0.is_finite() && self.coupling.is_finite()) {
            return Err(Error::param("delta", "must be finite"));
        }
        Ok(())
    }
}

/// `A` in `dv/dt = -A v + noise` for `v = (a, b1, ..., bN)`.
pub fn chain_drift(p: &ChainParams) -> DMatrix<Complex64> {
    let m = p.n_resonators + 1;
    let i = Complex64::new(0.0, 1.0);
    let mut a = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    a[(0, 0)] = p.kappa / 2.0 + i * p.delta;
    for j in 1..m {
        a[(j, j)] = p.gamma / 2.0 + i * p.omega_m;
    }
    a[(0, 1)] = -i * p.coupling;
    a[(1, 0)] = -i * p.coupling.conj();
    for j in 1..m - 1 {
        a[(j, j + 1)] = -i * p.eta0;
        a[(j + 1, j)] = -i * p.eta0;
    }
    a
}

/// Normally ordered second moments `C_ij = <v_i^dag v_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub matrix: DMatrix<Complex64>,
}

impl CorrelationMatrix {
    pub fn cavity_occupation(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    pub fn resonator_occupations(&self) -> Vec<f64> {
        (1..self.matrix.nrows()).map(|j| self.matrix[(j, j)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Steady state of `A* C + C A^T = D`, `D = diag(0, gamma nbar, ...)`.
pub fn chain_occupations(p: &ChainParams) -> Result<CorrelationMatrix> {
    p.validate()?;
    let a = chain_drift(p);
    let eig = linalg::eigenvalues_complex(&a)?;
    let min_re = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min_re <= 0.0 {
        return Err(Error::NoSteadyState(format!(
            "drift has an undamped mode (min Re = {min_re:.3e})"
        )));
    }
    let m = a.nrows();
    let mut d = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for j in 1..m {
        d[(j, j)] = Complex64::new(p.gamma * p.nbar, 0.0);
    }
    let c = linalg::sylvester(&a.map(|z| z.conj()), &a.transpose(), &d)
        .map_err(|e| Error::NoSteadyState(e.to_string()))?;
    Ok(CorrelationMatrix { matrix: c })
}
