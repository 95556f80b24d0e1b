//! Direct-coupled observer synthesis for a plant with `A_p = 0` and the
//! joint plant/observer system it produces.
//!
//! With `R_c = β α^T` and `C_o R_o^{-1} α = -I` the plant output `z_p`
//! is left untouched by the coupling while the observer output `z_o`
//! oscillates around it, so their difference vanishes in time average.

use crate::ccr::{
    check_realizability, validate_beta, CommutationStructure, PlantSpec, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, ensure_finite, ensure_shape, ensure_square, ensure_symmetric, inverse,
    is_positive_definite, max_abs, singular_values, Matrix, SpectrumReport,
};
use serde::Serialize;

/// Tolerance on `‖C_o R_o^{-1} α + I‖_max`.
pub const OBSERVER_CONDITION_TOL: f64 = 1e-10;

/// Smallest-to-largest singular value ratio below which `C_o R_o^{-1}`
/// counts as rank deficient.
const RANK_TOL: f64 = 1e-12;

/// Observer Hamiltonian `R_o`, coupling direction `α`, output `C_o`, and
/// the derived coupling matrix `R_c = β α^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec {
    r_o: Matrix,
    alpha: Matrix,
    c_o: Matrix,
    r_c: Matrix,
}

impl ObserverSpec {
    /// Observer from an explicit `α`; the `-I` condition must hold.
    pub fn new(plant: &PlantSpec, r_o: Matrix, alpha: Matrix, c_o: Matrix) -> Result<Self> {
        let spec = Self::unverified(plant, r_o, alpha, c_o)?;
        let residual = spec.condition_residual();
        if residual > OBSERVER_CONDITION_TOL {
            return Err(Error::ObserverCondition(residual));
        }
        Ok(spec)
    }

    /// Shape and definiteness checks only; the `C_o R_o^{-1} α = -I`
    /// condition is not enforced. Used to build deliberately broken
    /// observers (for example a decoupled `α = 0`) for diagnostics.
    pub fn unverified(plant: &PlantSpec, r_o: Matrix, alpha: Matrix, c_o: Matrix) -> Result<Self> {
        let n_o = ensure_square(&r_o, "R_o")?;
        CommutationStructure::for_dimension(n_o)?;
        ensure_finite(&r_o, "R_o")?;
        ensure_symmetric(&r_o, "R_o", DEFAULT_TOL)?;
        if !is_positive_definite(&r_o)?.positive_definite {
            return Err(Error::NotPositiveDefinite("R_o"));
        }
        let m_p = plant.m_p();
        ensure_shape(&alpha, "alpha", n_o, m_p)?;
        ensure_finite(&alpha, "alpha")?;
        ensure_shape(&c_o, "C_o", m_p, n_o)?;
        ensure_finite(&c_o, "C_o")?;
        let r_c = plant.beta() * alpha.transpose();
        Ok(Self {
            r_o,
            alpha,
            c_o,
            r_c,
        })
    }

    pub fn n_o(&self) -> usize {
        self.r_o.nrows()
    }

    pub fn r_o(&self) -> &Matrix {
        &self.r_o
    }

    pub fn alpha(&self) -> &Matrix {
        &self.alpha
    }

    pub fn c_o(&self) -> &Matrix {
        &self.c_o
    }

    pub fn r_c(&self) -> &Matrix {
        &self.r_c
    }

    /// `‖C_o R_o^{-1} α + I‖_max`.
    pub fn condition_residual(&self) -> f64 {
        let m = self.c_o.nrows();
        match inverse(&self.r_o, "R_o") {
            Ok(inv) => max_abs(&(&self.c_o * inv * &self.alpha + Matrix::identity(m, m))),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Solves `C_o R_o^{-1} α = -I` for `α`, taking the minimum-norm solution
/// when `n_o > m_p`.
pub fn synthesize_observer(plant: &PlantSpec, r_o: Matrix, c_o: Matrix) -> Result<ObserverSpec> {
    let a_p_max = max_abs(plant.a_p());
    if a_p_max > 0.0 {
        return Err(Error::NonzeroPlantDynamics(a_p_max));
    }
    let n_o = ensure_square(&r_o, "R_o")?;
    CommutationStructure::for_dimension(n_o)?;
    ensure_symmetric(&r_o, "R_o", DEFAULT_TOL)?;
    if !is_positive_definite(&r_o)?.positive_definite {
        return Err(Error::NotPositiveDefinite("R_o"));
    }
    let m_p = plant.m_p();
    ensure_shape(&c_o, "C_o", m_p, n_o)?;
    ensure_finite(&c_o, "C_o")?;
    if n_o < m_p {
        return Err(Error::RankDeficient(0.0));
    }

    let m = &c_o * inverse(&r_o, "R_o")?;
    let sigma = singular_values(&m)?;
    let (smax, smin) = (sigma[0], sigma[sigma.len() - 1]);
    if smax == 0.0 || smin <= RANK_TOL * smax {
        return Err(Error::RankDeficient(smin));
    }
    // Minimum-norm right inverse: alpha = -M^T (M M^T)^{-1}.
    let gram = &m * m.transpose();
    let alpha = -(m.transpose() * inverse(&gram, "C_o R_o^-1 (C_o R_o^-1)^T")?);
    ObserverSpec::new(plant, r_o, alpha, c_o)
}

/// Joint plant/observer system with `x_a = (x_p, x_o)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    plant: PlantSpec,
    observer: ObserverSpec,
    ccr: CommutationStructure,
    r_a: Matrix,
    a_a: Matrix,
}

/// `R_a = [[R_p, R_c], [R_c^T, R_o]]`, `A_a = 2ΘR_a` with `Θ = diag(Θ_1, Θ_2)`.
pub fn assemble_augmented(plant: &PlantSpec, obs: &ObserverSpec) -> Result<AugmentedSystem> {
    let n_p = plant.n_p();
    let n_o = obs.n_o();
    ensure_shape(obs.r_c(), "R_c", n_p, n_o)?;
    ensure_shape(obs.c_o(), "C_o", plant.m_p(), n_o)?;
    let ccr_o = CommutationStructure::for_dimension(n_o)?;
    let ccr = plant.ccr().direct_sum(&ccr_o);

    let n = n_p + n_o;
    let mut r_a = Matrix::zeros(n, n);
    r_a.view_mut((0, 0), (n_p, n_p))
        .copy_from(&plant.hamiltonian());
    r_a.view_mut((0, n_p), (n_p, n_o)).copy_from(obs.r_c());
    r_a.view_mut((n_p, 0), (n_o, n_p))
        .copy_from(&obs.r_c().transpose());
    r_a.view_mut((n_p, n_p), (n_o, n_o)).copy_from(obs.r_o());
    let a_a = ccr.theta() * &r_a * 2.0;

    let report = check_realizability(&a_a, &ccr, DEFAULT_TOL)?;
    if !report.realizable {
        return Err(Error::NotRealizable {
            residual: report.residual,
        });
    }
    Ok(AugmentedSystem {
        plant: plant.clone(),
        observer: obs.clone(),
        ccr,
        r_a,
        a_a,
    })
}

impl AugmentedSystem {
    pub fn plant(&self) -> &PlantSpec {
        &self.plant
    }

    pub fn observer(&self) -> &ObserverSpec {
        &self.observer
    }

    pub fn ccr(&self) -> &CommutationStructure {
        &self.ccr
    }

    pub fn r_a(&self) -> &Matrix {
        &self.r_a
    }

    pub fn a_a(&self) -> &Matrix {
        &self.a_a
    }

    pub fn dim(&self) -> usize {
        self.a_a.nrows()
    }

    /// Replaces the dynamics, leaving every other field alone. Only
    /// useful for feeding corrupted systems to the diagnostics.
    pub fn with_dynamics(mut self, a_a: Matrix) -> Self {
        self.a_a = a_a;
        self
    }

    /// `[C_p 0]`.
    pub fn plant_output_selector(&self) -> Matrix {
        let n_p = self.plant.n_p();
        let mut s = Matrix::zeros(self.plant.m_p(), self.dim());
        s.view_mut((0, 0), (self.plant.m_p(), n_p))
            .copy_from(&self.plant.c_p());
        s
    }

    /// `[0 C_o]`.
    pub fn observer_output_selector(&self) -> Matrix {
        let n_p = self.plant.n_p();
        let mut s = Matrix::zeros(self.plant.m_p(), self.dim());
        s.view_mut((0, n_p), (self.plant.m_p(), self.observer.n_o()))
            .copy_from(self.observer.c_o());
        s
    }

    /// `2Θ_2 R_o`, the free observer dynamics.
    pub fn observer_dynamics(&self) -> Matrix {
        let ccr_o = CommutationStructure::for_dimension(self.observer.n_o())
            .expect("observer dimension checked at construction");
        ccr_o.theta() * self.observer.r_o() * 2.0
    }
}

/// Residuals of every hypothesis and consequence of the synthesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObserverReport {
    pub r_o_lambda_min: f64,
    pub r_o_lambda_max: f64,
    pub r_o_positive_definite: bool,
    /// `‖C_o R_o^{-1} α + I‖_max`
    pub observer_condition: f64,
    pub beta_structure_valid: bool,
    /// `‖β^T Θ_1 β‖_max`
    pub beta_theta_beta: f64,
    /// `‖[C_p 0] A_a‖_max`
    pub plant_output_annihilation: f64,
    /// `‖A_a Θ + Θ A_a^T‖_max`
    pub realizability: f64,
    pub spectrum: Option<SpectrumReport>,
    pub observer_spectrum: Option<SpectrumReport>,
    /// `max |Re λ|` over the spectrum of `A_a`; infinite if the eigenvalue
    /// iteration failed.
    pub max_abs_real_part: f64,
}

impl ObserverReport {
    /// All residuals at or below `tol` and the structural checks pass.
    pub fn passes(&self, tol: f64) -> bool {
        self.r_o_positive_definite
            && self.beta_structure_valid
            && self.observer_condition <= tol
            && self.beta_theta_beta <= tol
            && self.plant_output_annihilation <= tol
            && self.realizability <= tol
            && self.max_abs_real_part <= tol
    }
}

pub fn verify_observer_conditions(aug: &AugmentedSystem) -> ObserverReport {
    let obs = aug.observer();
    let plant = aug.plant();
    let (pd, lmin, lmax) = match is_positive_definite(obs.r_o()) {
        Ok(d) => (d.positive_definite, d.lambda_min, d.lambda_max),
        Err(_) => (false, f64::NAN, f64::NAN),
    };
    let (beta_ok, btb) = match validate_beta(plant.beta(), plant.ccr()) {
        Ok(r) => (true, r.beta_theta_beta),
        Err(_) => (
            false,
            max_abs(&(plant.beta().transpose() * plant.ccr().theta() * plant.beta())),
        ),
    };
    let annihilation = max_abs(&(aug.plant_output_selector() * aug.a_a()));
    let realizability = check_realizability(aug.a_a(), aug.ccr(), DEFAULT_TOL)
        .map(|r| r.residual)
        .unwrap_or(f64::INFINITY);
    let spectrum = eigenvalues(aug.a_a()).ok();
    let max_abs_real_part = spectrum
        .as_ref()
        .map_or(f64::INFINITY, |s| s.max_abs_real_part);
    ObserverReport {
        r_o_lambda_min: lmin,
        r_o_lambda_max: lmax,
        r_o_positive_definite: pd,
        observer_condition: obs.condition_residual(),
        beta_structure_valid: beta_ok,
        beta_theta_beta: btb,
        plant_output_annihilation: annihilation,
        realizability,
        spectrum,
        observer_spectrum: eigenvalues(&aug.observer_dynamics()).ok(),
        max_abs_real_part,
    }
}
