use nalgebra::{DMatrix, Schur};

use super::SimError;

const SCHUR_MAX_ITER: usize = 10_000;

/// Central differences with step `1e-6 * max(1, |x_j|)`; entry `(r, c)`
/// approximates `df_r/dx_c`.
pub fn numeric_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Result<DMatrix<f64>, SimError> {
    let n = x.len();
    let rows = f(x).len();
    let mut jac = DMatrix::zeros(rows, n);
    let mut probe = x.to_vec();
    for c in 0..n {
        let h = 1e-6 * x[c].abs().max(1.0);
        probe[c] = x[c] + h;
        let plus = f(&probe);
        probe[c] = x[c] - h;
        let minus = f(&probe);
        probe[c] = x[c];
        for r in 0..rows {
            let d = (plus[r] - minus[r]) / (2.0 * h);
            if !d.is_finite() {
                return Err(SimError::NonFinite(format!("Jacobian entry ({r}, {c})")));
            }
            jac[(r, c)] = d;
        }
    }
    Ok(jac)
}

/// `-Re(lambda_i)` with eigenvalues ordered by real part, largest first.
pub fn stability_margins(j: &DMatrix<f64>) -> Result<Vec<f64>, SimError> {
    if !j.is_square() {
        return Err(SimError::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            j.nrows(),
            j.ncols()
        )));
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite("Jacobian".into()));
    }
    if j.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(j.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(SimError::EigenNonConvergence)?;
    let mut re: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.total_cmp(a));
    // `0.0 - r` keeps zero eigenvalues from printing as `-0`.
    Ok(re.into_iter().map(|r| 0.0 - r).collect())
}
