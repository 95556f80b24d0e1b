use super::{ensure_finite, ensure_symmetric, Matrix};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;
const CHOLESKY_PIVOT_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;

/// Outcome of a definiteness test together with the extreme eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Definiteness {
    pub positive_definite: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotation, ascending.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    ensure_symmetric(s, "symmetric eigen input", SYMMETRY_TOL)?;
    ensure_finite(s, "symmetric eigen input")?;
    let n = s.nrows();
    let mut a = (s + s.transpose()) * 0.5;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= (f64::EPSILON * f64::EPSILON) * diag || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Cholesky-based definiteness test. The factorization fails as soon as a
/// pivot drops to `1e-12` or below; the extreme eigenvalues are reported
/// either way.
pub fn is_positive_definite(s: &Matrix) -> Result<Definiteness> {
    let eig = symmetric_eigenvalues(s)?;
    let n = s.nrows();
    let positive_definite = n > 0 && cholesky_succeeds(s);
    Ok(Definiteness {
        positive_definite,
        lambda_min: eig.first().copied().unwrap_or(0.0),
        lambda_max: eig.last().copied().unwrap_or(0.0),
    })
}

fn cholesky_succeeds(s: &Matrix) -> bool {
    let n = s.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = s[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= CHOLESKY_PIVOT_TOL {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut x = s[(i, j)];
            for k in 0..j {
                x -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = x / d;
        }
    }
    true
}
