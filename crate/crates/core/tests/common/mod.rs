#![allow(dead_code)]

use std::f64::consts::TAU;

use proptest::prelude::*;
use qobserver::ccr::PlantSpec;
use qobserver::linalg::max_abs;
use qobserver::synthesis::{assemble_augmented, synthesize_observer, AugmentedSystem};
use qobserver::Matrix;
use rand::Rng;

pub fn symmetric_from(n: usize, v: &[f64]) -> Matrix {
    let g = Matrix::from_row_slice(n, n, v);
    (&g + g.transpose()) * 0.5
}

/// `G G^T / n + shift I`; the shift keeps the condition number moderate.
pub fn pd_from(n: usize, v: &[f64], shift: f64) -> Matrix {
    let g = Matrix::from_row_slice(n, n, v);
    &g * g.transpose() / n as f64 + Matrix::identity(n, n) * shift
}

/// One `(cos θ, sin θ)·r` quadrature per plant mode.
pub fn beta_from(blocks: &[(f64, f64)]) -> Matrix {
    let modes = blocks.len();
    let mut b = Matrix::zeros(2 * modes, modes);
    for (k, &(angle, r)) in blocks.iter().enumerate() {
        b[(2 * k, k)] = r * angle.cos();
        b[(2 * k + 1, k)] = r * angle.sin();
    }
    b
}

pub fn build(beta: Matrix, r_o: Matrix, c_o: Matrix) -> AugmentedSystem {
    let plant = PlantSpec::new(beta).expect("valid beta");
    let obs = synthesize_observer(&plant, r_o, c_o).expect("synthesis succeeds");
    assemble_augmented(&plant, &obs).expect("assembly succeeds")
}

pub fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, n)
}

pub fn symmetric(n: usize) -> impl Strategy<Value = Matrix> {
    entries(n * n).prop_map(move |v| symmetric_from(n, &v))
}

pub fn positive_definite(n: usize) -> impl Strategy<Value = Matrix> {
    (entries(n * n), 0.1..2.0f64).prop_map(move |(v, s)| pd_from(n, &v, s))
}

pub fn beta(modes: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec((0.0..TAU, 0.5..2.0f64), modes).prop_map(|b| beta_from(&b))
}

/// `m × n` with rows kept away from linear dependence by adding a scaled
/// identity block.
pub fn full_row_rank(m: usize, n: usize) -> impl Strategy<Value = Matrix> {
    entries(m * n).prop_map(move |v| {
        let mut c = Matrix::from_row_slice(m, n, &v) * 0.5;
        for i in 0..m {
            c[(i, i)] += 1.0;
        }
        c
    })
}

/// Plant with `n_p / 2` modes and an observer with `n_o` variables.
pub fn system(n_p: usize, n_o: usize) -> impl Strategy<Value = AugmentedSystem> {
    let m_p = n_p / 2;
    (beta(m_p), positive_definite(n_o), full_row_rank(m_p, n_o))
        .prop_map(|(b, r, c)| build(b, r, c))
}

/// Supported `(n_p, n_o)` pairs with `n_p / 2 <= n_o`.
pub fn dims(max_p: usize, max_o: usize) -> impl Strategy<Value = (usize, usize)> {
    let mut pairs = Vec::new();
    for n_p in (2..=max_p).step_by(2) {
        for n_o in (2..=max_o).step_by(2) {
            if n_p / 2 <= n_o {
                pairs.push((n_p, n_o));
            }
        }
    }
    proptest::sample::select(pairs)
}

pub fn any_system(max_p: usize, max_o: usize) -> impl Strategy<Value = AugmentedSystem> {
    dims(max_p, max_o).prop_flat_map(|(p, o)| system(p, o))
}

pub fn random_entries<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_pd<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let v = random_entries(rng, n * n);
    let shift = rng.random_range(0.1..2.0);
    pd_from(n, &v, shift)
}

pub fn random_system<R: Rng>(rng: &mut R, n_p: usize, n_o: usize) -> AugmentedSystem {
    let m_p = n_p / 2;
    let blocks: Vec<_> = (0..m_p)
        .map(|_| (rng.random_range(0.0..TAU), rng.random_range(0.5..2.0)))
        .collect();
    let r_o = random_pd(rng, n_o);
    let mut c_o = Matrix::from_row_slice(m_p, n_o, &random_entries(rng, m_p * n_o)) * 0.5;
    for i in 0..m_p {
        c_o[(i, i)] += 1.0;
    }
    build(beta_from(&blocks), r_o, c_o)
}

/// Max-entry difference scaled by the larger operand, floored at one.
pub fn rel_diff(a: &Matrix, b: &Matrix) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b)).max(1.0)
}
