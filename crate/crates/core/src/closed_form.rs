//! Analytic transition matrix of the joint system for `A_p = 0`.
//!
//! With `E(t) = exp(2Θ_2 R_o t)`, `K = R_o^{-1} α β^T` and
//! `G = Θ_1 β α^T`:
//!
//! ```text
//! x_o(t) = (E - I) K x_p(0) + E x_o(0)
//! x_p(t) = [I - 2t G K + G (I - E) R_o^{-1} Θ_2 K] x_p(0)
//!        + G (I - E) R_o^{-1} Θ_2 x_o(0)
//! ```
//!
//! Both only need `β^T Θ_1 β = 0` and nonsingular `R_o`; the observer
//! condition `C_o R_o^{-1} α = -I` is what makes the outputs line up.

use crate::ccr::CommutationStructure;
use crate::error::{Error, Result};
use crate::linalg::{expm, inverse, is_positive_definite, Matrix};
use crate::synthesis::{AugmentedSystem, OBSERVER_CONDITION_TOL};

/// Matrix taking `x_a(0)` to `x_a(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMap {
    pub t: f64,
    pub matrix: Matrix,
}

struct Parts {
    e: Matrix,
    r_o_inv: Matrix,
    theta_o: Matrix,
    k: Matrix,
    g: Matrix,
}

fn parts(t: f64, aug: &AugmentedSystem) -> Result<Parts> {
    let plant = aug.plant();
    let a_p_max = crate::linalg::max_abs(plant.a_p());
    if a_p_max > 0.0 {
        return Err(Error::NonzeroPlantDynamics(a_p_max));
    }
    let obs = aug.observer();
    let r_o_inv = inverse(obs.r_o(), "R_o")?;
    let theta_o = CommutationStructure::for_dimension(obs.n_o())?
        .theta()
        .clone();
    let e = expm(&(aug.observer_dynamics() * t))?;
    let k = &r_o_inv * obs.alpha() * plant.beta().transpose();
    let g = plant.ccr().theta() * plant.beta() * obs.alpha().transpose();
    Ok(Parts {
        e,
        r_o_inv,
        theta_o,
        k,
        g,
    })
}

/// Rows of the transition matrix for the observer variables.
pub fn observer_block(t: f64, aug: &AugmentedSystem) -> Result<Matrix> {
    let p = parts(t, aug)?;
    let (n_p, n_o) = (aug.plant().n_p(), aug.observer().n_o());
    let ident = Matrix::identity(n_o, n_o);
    let mut rows = Matrix::zeros(n_o, n_p + n_o);
    rows.view_mut((0, 0), (n_o, n_p))
        .copy_from(&((&p.e - &ident) * &p.k));
    rows.view_mut((0, n_p), (n_o, n_o)).copy_from(&p.e);
    Ok(rows)
}

/// Rows of the transition matrix for the plant variables, including the
/// secular term linear in `t`.
pub fn plant_block(t: f64, aug: &AugmentedSystem) -> Result<Matrix> {
    let p = parts(t, aug)?;
    let (n_p, n_o) = (aug.plant().n_p(), aug.observer().n_o());
    let ri_theta = &p.r_o_inv * &p.theta_o;
    let g_ri_theta = &p.g * &ri_theta;
    let g_e_ri_theta = &p.g * &p.e * &ri_theta;

    let plant_part = Matrix::identity(n_p, n_p) - &p.g * &p.k * (2.0 * t) + &g_ri_theta * &p.k
        - &g_e_ri_theta * &p.k;
    let observer_part = g_ri_theta - g_e_ri_theta;

    let mut rows = Matrix::zeros(n_p, n_p + n_o);
    rows.view_mut((0, 0), (n_p, n_p)).copy_from(&plant_part);
    rows.view_mut((0, n_p), (n_p, n_o))
        .copy_from(&observer_part);
    Ok(rows)
}

/// Coefficient of `t` in the plant rows: `-2 G K`, padded with zero
/// observer columns.
pub fn secular_coefficient(aug: &AugmentedSystem) -> Result<Matrix> {
    let p = parts(0.0, aug)?;
    let (n_p, n_o) = (aug.plant().n_p(), aug.observer().n_o());
    let mut m = Matrix::zeros(n_p, n_p + n_o);
    m.view_mut((0, 0), (n_p, n_p))
        .copy_from(&(&p.g * &p.k * -2.0));
    Ok(m)
}

/// Full analytic transition matrix at time `t`.
pub fn coefficient_map(t: f64, aug: &AugmentedSystem) -> Result<CoefficientMap> {
    let plant = plant_block(t, aug)?;
    let observer = observer_block(t, aug)?;
    let (n_p, n) = (plant.nrows(), aug.dim());
    let mut matrix = Matrix::zeros(n, n);
    matrix.view_mut((0, 0), (n_p, n)).copy_from(&plant);
    matrix.view_mut((n_p, 0), (n - n_p, n)).copy_from(&observer);
    Ok(CoefficientMap { t, matrix })
}

/// Coefficient rows of `z_p(t)` and `z_o(t)` in terms of `x_a(0)`.
pub fn output_maps(t: f64, aug: &AugmentedSystem) -> Result<(Matrix, Matrix)> {
    let residual = aug.observer().condition_residual();
    if residual > OBSERVER_CONDITION_TOL {
        return Err(Error::ObserverCondition(residual));
    }
    let z_p = aug.plant().c_p() * plant_block(t, aug)?;
    let z_o = aug.observer().c_o() * observer_block(t, aug)?;
    Ok((z_p, z_o))
}

/// `sqrt(λ_max(R_o) / λ_min(R_o))`, a uniform bound on
/// `‖exp(2Θ_2 R_o t)‖` that follows from conservation of `x^T R_o x`.
pub fn exp_norm_bound(r_o: &Matrix) -> Result<f64> {
    let d = is_positive_definite(r_o)?;
    if !d.positive_definite {
        return Err(Error::NotPositiveDefinite("R_o"));
    }
    Ok((d.lambda_max / d.lambda_min).sqrt())
}
