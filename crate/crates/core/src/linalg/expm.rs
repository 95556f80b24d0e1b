//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm.

use super::{ensure_finite, ensure_square, norm_one, Matrix};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree meets unit round-off in double.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.53939833006323e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068;
const THETA13: f64 = 5.371920351148152;

/// `exp(m)` for a square matrix with finite entries.
pub fn expm(m: &Matrix) -> Result<Matrix> {
    let n = ensure_square(m, "expm input")?;
    ensure_finite(m, "expm input")?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = norm_one(m);
    if norm == 0.0 {
        return Ok(Matrix::identity(n, n));
    }

    let ident = Matrix::identity(n, n);
    let a2 = m * m;
    let (u, v) = if norm <= THETA3 {
        low_degree(m, &a2, &ident, &PADE3)
    } else if norm <= THETA5 {
        low_degree(m, &a2, &ident, &PADE5)
    } else if norm <= THETA7 {
        low_degree(m, &a2, &ident, &PADE7)
    } else if norm <= THETA9 {
        low_degree(m, &a2, &ident, &PADE9)
    } else {
        let squarings = (norm / THETA13).log2().ceil().max(0.0) as i32;
        let scale = 2f64.powi(-squarings);
        let scaled = m * scale;
        let a2 = &scaled * &scaled;
        let (u, v) = degree13(&scaled, &a2, &ident);
        let mut r = pade_solve(&u, &v)?;
        for _ in 0..squarings {
            r = &r * &r;
        }
        return Ok(r);
    };
    pade_solve(&u, &v)
}

fn low_degree(a: &Matrix, a2: &Matrix, ident: &Matrix, b: &[f64]) -> (Matrix, Matrix) {
    // U = A * sum b[2k+1] A^{2k},  V = sum b[2k] A^{2k}
    let n = a.nrows();
    let mut u = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    let mut power = ident.clone();
    for k in 0..b.len() / 2 {
        u += &power * b[2 * k + 1];
        v += &power * b[2 * k];
        power = &power * a2;
    }
    (a * u, v)
}

fn degree13(a: &Matrix, a2: &Matrix, ident: &Matrix) -> (Matrix, Matrix) {
    let b = &PADE13;
    let a4 = a2 * a2;
    let a6 = &a4 * a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + a2 * b[3] + ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + a2 * b[2] + ident * b[0];
    (u, v)
}

fn pade_solve(u: &Matrix, v: &Matrix) -> Result<Matrix> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::Singular("Pade denominator"))
}

/// `∫_0^t exp(m s) ds`, read off the upper-right block of the exponential
/// of `[[m, I], [0, 0]] * t`. Valid for singular `m`.
pub fn integral_expm(m: &Matrix, t: f64) -> Result<Matrix> {
    let n = ensure_square(m, "integral_expm input")?;
    ensure_finite(m, "integral_expm input")?;
    let mut block = Matrix::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(m * t));
    block
        .view_mut((0, n), (n, n))
        .copy_from(&(Matrix::identity(n, n) * t));
    let e = expm(&block)?;
    Ok(e.view((0, n), (n, n)).into_owned())
}
