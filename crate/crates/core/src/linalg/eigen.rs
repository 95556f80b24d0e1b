//! Eigenvalues of a general real matrix.
//!
//! The numerical null space is peeled off first by repeated orthogonal
//! deflation (one Jacobi SVD per level), so that zero eigenvalues sitting in
//! Jordan blocks come out as exact zeros instead of the `O(sqrt(eps))` cloud
//! a plain QR iteration produces for defective eigenvalues. The remaining
//! nonsingular part is reduced to Hessenberg form with Householder
//! reflections and finished with the Francis double-shift QR iteration.

use super::svd::jacobi_svd;
use super::{ensure_finite, ensure_square, Matrix};
use crate::error::{Error, Result};
use nalgebra::Complex;
use serde::Serialize;

const MAX_ITERATIONS_PER_EIGENVALUE: usize = 60;

/// Full spectrum with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex<f64>>,
    pub max_abs_real_part: f64,
}

impl SpectrumReport {
    fn new(mut eigenvalues: Vec<Complex<f64>>) -> Self {
        eigenvalues.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        let max_abs_real_part = eigenvalues.iter().fold(0.0_f64, |m, z| m.max(z.re.abs()));
        Self {
            eigenvalues,
            max_abs_real_part,
        }
    }
}

/// Eigenvalues of `m`, sorted by imaginary then real part.
pub fn eigenvalues(m: &Matrix) -> Result<SpectrumReport> {
    let n = ensure_square(m, "eigenvalue input")?;
    ensure_finite(m, "eigenvalue input")?;
    let mut values = Vec::with_capacity(n);
    let scale = super::max_abs(m);
    if scale == 0.0 {
        values.resize(n, Complex::new(0.0, 0.0));
        return Ok(SpectrumReport::new(values));
    }

    let mut work = m.clone();
    while work.nrows() > 0 {
        let k = work.nrows();
        let svd = jacobi_svd(&work)?;
        let tol = 64.0 * k as f64 * f64::EPSILON * svd.sigma[0].max(scale);
        let rank = svd.sigma.iter().take_while(|&&s| s > tol).count();
        if rank == k {
            break;
        }
        values.extend(std::iter::repeat_n(Complex::new(0.0, 0.0), k - rank));
        if rank == 0 {
            work = Matrix::zeros(0, 0);
            break;
        }
        // Columns rank..k of V span the numerical kernel; restrict to the rest.
        let w = svd.v.columns(0, rank).into_owned();
        work = w.transpose() * &work * &w;
    }

    if work.nrows() > 0 {
        let h = hessenberg(&work);
        values.extend(hqr(&h)?);
    }
    Ok(SpectrumReport::new(values))
}

fn hessenberg(m: &Matrix) -> Matrix {
    let n = m.nrows();
    let mut a = m.clone();
    for k in 0..n.saturating_sub(2) {
        let mut x: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let alpha = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
        x[0] += sign * alpha;
        let vnorm2: f64 = x.iter().map(|v| v * v).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- H A H with H = I - 2 v v^T / (v^T v), acting on rows/cols k+1..n
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| x[i - k - 1] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= f * x[i - k - 1];
            }
        }
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * x[j - k - 1]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= f * x[j - k - 1];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
    a
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Works on a
/// 1-based copy to keep the classic index arithmetic readable.
#[allow(clippy::needless_range_loop)]
fn hqr(h: &Matrix) -> Result<Vec<Complex<f64>>> {
    let n = h.nrows();
    let mut a = vec![vec![0.0_f64; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[(i, j)];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }

    let mut nn = n as isize;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                let mut y = a[nu - 1][nu - 1];
                let mut w = a[nu][nu - 1] * a[nu - 1][nu];
                if l == nu - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - w / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITERATIONS_PER_EIGENVALUE {
                        return Err(Error::NoConvergence(its));
                    }
                    if its == 10 || its == 20 {
                        t += x;
                        for i in 1..=nu {
                            a[i][i] -= x;
                        }
                        let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;

                    let mut m = nu - 2;
                    let (mut p, mut q, mut r);
                    loop {
                        let z = a[m][m];
                        let rr = x - z;
                        let ss = y - z;
                        p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - rr - ss;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nu {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nu - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            let z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                let mut pp = a[k][j] + q * a[k + 1][j];
                                if k != nu - 1 {
                                    pp += r * a[k + 2][j];
                                    a[k + 2][j] -= pp * z;
                                }
                                a[k + 1][j] -= pp * y;
                                a[k][j] -= pp * x;
                            }
                            let mmin = nu.min(k + 3);
                            for i in l..=mmin {
                                let mut pp = x * a[i][k] + y * a[i][k + 1];
                                if k != nu - 1 {
                                    pp += z * a[i][k + 2];
                                    a[i][k + 2] -= pp * r;
                                }
                                a[i][k + 1] -= pp * q;
                                a[i][k] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 1 || l as isize >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex::new(wr[i], wi[i])).collect())
}
