//! One-sided (Hestenes) Jacobi singular value decomposition.

use super::{ensure_finite, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Right singular vectors and all `ncols` singular values, sorted in
/// descending order. Columns of `v` match the order of `sigma`.
pub(crate) struct JacobiSvd {
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

pub(crate) fn jacobi_svd(a: &Matrix) -> Result<JacobiSvd> {
    let (rows, cols) = a.shape();
    let mut u = a.clone();
    let mut v = Matrix::identity(cols, cols);
    // A bare `eps` threshold can stall on rounding noise.
    let tol = f64::EPSILON * (rows.max(cols) as f64);

    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..cols {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let norms: Vec<f64> = (0..cols).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma = order.iter().map(|&j| norms[j]).collect();
    let v = Matrix::from_fn(cols, cols, |i, k| v[(i, order[k])]);
    Ok(JacobiSvd { sigma, v })
}

/// The `min(rows, cols)` singular values of `m`, largest first.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    ensure_finite(m, "singular value input")?;
    let (rows, cols) = m.shape();
    let mut s = if rows >= cols {
        jacobi_svd(m)?.sigma
    } else {
        jacobi_svd(&m.transpose())?.sigma
    };
    s.truncate(rows.min(cols));
    Ok(s)
}

/// Largest singular value (operator 2-norm).
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}
