//! Small dense helpers on top of nalgebra.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A X + X B = C` by vectorizing into an `(mn)x(mn)` system.
/// Fine for the sizes used here (at most a few hundred unknowns per side).
pub fn sylvester<T: ComplexField + Copy>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    c: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let m = a.nrows();
    let n = b.nrows();
    assert_eq!(a.ncols(), m);
    assert_eq!(b.ncols(), n);
    assert_eq!(c.shape(), (m, n));
    let dim = m * n;
    let mut k = DMatrix::<T>::zeros(dim, dim);
    for j in 0..n {
        for i in 0..m {
            let row = i + m * j;
            for p in 0..m {
                k[(row, p + m * j)] += a[(i, p)];
            }
            for l in 0..n {
                k[(row, i + m * l)] += b[(l, j)];
            }
        }
    }
    let rhs = DMatrix::from_column_slice(dim, 1, c.as_slice());
    let lu = k.clone().lu();
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NumericalError("singular Sylvester operator".into()))?;
    // one step of iterative refinement
    let r = &rhs - &k * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalError("non-finite Sylvester solution".into()));
    }
    Ok(DMatrix::from_column_slice(m, n, x.as_slice()))
}

pub fn det(m: &DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues_real(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalError("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of a complex square matrix.
pub fn eigenvalues_complex(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalError("Schur decomposition did not converge".into()))?;
    Ok(schur
        .eigenvalues()
        .ok_or_else(|| Error::NumericalError("complex Schur form not triangular".into()))?
        .iter()
        .copied()
        .collect())
}

/// Roots of `c[0] x^n + c[1] x^(n-1) + ... + c[n]` via the companion matrix.
pub fn poly_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    if c[0] == Complex64::new(0.0, 0.0) {
        return Err(Error::param("a0", "leading coefficient is zero"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    let mut roots = eigenvalues_complex(&comp)?;
    // polish against the original polynomial
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (mut p, mut dp) = (c[0], Complex64::new(0.0, 0.0));
            for &ck in &c[1..] {
                dp = dp * *r + p;
                p = p * *r + ck;
            }
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.norm() > 1e-3 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
    }
    Ok(roots)
}
