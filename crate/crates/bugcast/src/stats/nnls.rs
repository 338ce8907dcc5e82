//! Non-negative least squares via the Lawson-Hanson active set method.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Minimum-norm least squares solve through SVD, tolerating rank deficiency.
pub(crate) fn svd_solve(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * smax.max(1.0);
    svd.solve(y, eps)
        .map_err(|e| Error::Numeric(format!("svd solve failed: {e}")))
}

/// Solves `min ||a x - y||` subject to `x >= 0`.
///
/// Active set iteration: repeatedly admit the zero-clamped column with the
/// steepest descent direction, solve the unconstrained problem on the
/// admitted set, and walk back along the segment to the feasible region when
/// the free solution goes negative. Terminates when no clamped column can
/// improve the fit.
pub fn nnls(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let (n, m) = (a.nrows(), a.ncols());
    if n == 0 || m == 0 {
        return Err(Error::Validation("nnls needs a non-empty system".into()));
    }
    if y.len() != n {
        return Err(Error::Validation(format!(
            "nnls shape mismatch: {n} rows vs {} observations",
            y.len()
        )));
    }
    if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("nnls input contains non-finite values".into()));
    }

    let aty = a.transpose() * y;
    let tol = 1e-10 * aty.amax().max(1.0);

    let mut passive = vec![false; m];
    let mut x = DVector::zeros(m);
    let max_iter = 50 * (m + 1);
    let mut iter = 0usize;

    loop {
        let w = a.transpose() * (y - a * &x);
        let mut entering: Option<usize> = None;
        for j in 0..m {
            if !passive[j] && w[j] > tol && entering.map_or(true, |b| w[j] > w[b]) {
                entering = Some(j);
            }
        }
        let Some(j) = entering else {
            return Ok(x);
        };
        passive[j] = true;

        loop {
            iter += 1;
            if iter > max_iter {
                return Err(Error::Numeric(format!(
                    "nnls failed to converge after {max_iter} iterations \
                     ({n} observations, {m} columns)"
                )));
            }

            let z = solve_on(a, y, &passive)?;

            let mut alpha = f64::INFINITY;
            for k in 0..m {
                if passive[k] && z[k] <= 0.0 {
                    let denom = x[k] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[k] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            if alpha == f64::INFINITY {
                x = z;
                break;
            }

            let alpha = alpha.clamp(0.0, 1.0);
            x = &x + (&z - &x) * alpha;
            let floor = 1e-12 * x.amax().max(1.0);
            for k in 0..m {
                if passive[k] && x[k] <= floor {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
        }
    }
}

/// Unconstrained least squares restricted to the passive columns; clamped
/// columns come back as exact zeros.
fn solve_on(a: &DMatrix<f64>, y: &DVector<f64>, passive: &[bool]) -> Result<DVector<f64>> {
    let cols: Vec<usize> = (0..a.ncols()).filter(|&j| passive[j]).collect();
    let sub = a.select_columns(cols.iter());
    let part = svd_solve(&sub, y)?;
    let mut full = DVector::zeros(a.ncols());
    for (slot, &j) in cols.iter().enumerate() {
        full[j] = part[slot];
    }
    Ok(full)
}
