//! Commutation structure `Θ = diag(J, ..., J)`, the Hamiltonian/dynamics
//! correspondence `A = 2ΘR`, and the realizability test
//! `AΘ + ΘA^T = 0`.

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, ensure_finite, ensure_shape, ensure_square, ensure_symmetric, max_abs, Matrix,
};
use serde::Serialize;

/// Residual tolerance used when no explicit one is supplied.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Skew matrix `Θ` for `modes` interleaved `(q, p)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationStructure {
    modes: usize,
    theta: Matrix,
}

impl CommutationStructure {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::NoModes);
        }
        let n = 2 * modes;
        let mut theta = Matrix::zeros(n, n);
        for k in 0..modes {
            theta[(2 * k, 2 * k + 1)] = 1.0;
            theta[(2 * k + 1, 2 * k)] = -1.0;
        }
        Ok(Self { modes, theta })
    }

    /// Structure for an even number of variables.
    pub fn for_dimension(n: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::OddDimension(n));
        }
        Self::new(n / 2)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of variables, `2 * modes`.
    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn theta(&self) -> &Matrix {
        &self.theta
    }

    /// `Θ^{-1} = -Θ`.
    pub fn theta_inverse(&self) -> Matrix {
        -&self.theta
    }

    /// `diag(Θ_self, Θ_other)`, for stacking plant and observer variables.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            modes: self.modes + other.modes,
            theta: block_diag(&self.theta, &other.theta),
        }
    }

    fn check_dim(&self, m: &Matrix, what: &'static str) -> Result<()> {
        ensure_shape(m, what, self.dim(), self.dim())
    }
}

/// Convenience wrapper for [`CommutationStructure::new`].
pub fn make_theta(n_modes: usize) -> Result<CommutationStructure> {
    CommutationStructure::new(n_modes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizabilityReport {
    pub realizable: bool,
    /// Max-norm of `AΘ + ΘA^T`.
    pub residual: f64,
}

/// Max-norm of `AΘ + ΘA^T`, compared against `tol`.
pub fn check_realizability(
    a: &Matrix,
    ccr: &CommutationStructure,
    tol: f64,
) -> Result<RealizabilityReport> {
    ccr.check_dim(a, "dynamics matrix")?;
    let theta = ccr.theta();
    let residual = max_abs(&(a * theta + theta * a.transpose()));
    Ok(RealizabilityReport {
        realizable: residual <= tol,
        residual,
    })
}

/// `R = ¼(-ΘA + A^TΘ)` for realizable `A`.
pub fn hamiltonian_from_dynamics(a: &Matrix, ccr: &CommutationStructure) -> Result<Matrix> {
    let report = check_realizability(a, ccr, DEFAULT_TOL)?;
    if !report.realizable {
        return Err(Error::NotRealizable {
            residual: report.residual,
        });
    }
    let theta = ccr.theta();
    let r = (a.transpose() * theta - theta * a) * 0.25;
    // Symmetrize away round-off; the realizable case is symmetric exactly.
    Ok((&r + r.transpose()) * 0.5)
}

/// `A = 2ΘR` for symmetric `R`.
pub fn dynamics_from_hamiltonian(r: &Matrix, ccr: &CommutationStructure) -> Result<Matrix> {
    ccr.check_dim(r, "Hamiltonian matrix")?;
    ensure_symmetric(r, "Hamiltonian matrix", DEFAULT_TOL)?;
    let sym = (r + r.transpose()) * 0.5;
    Ok(ccr.theta() * sym * 2.0)
}

/// Linear system `ẋ = Ax` together with its commutation structure and,
/// when realizable, its Hamiltonian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLinearSystem {
    a: Matrix,
    ccr: CommutationStructure,
    r: Option<Matrix>,
}

impl QuantumLinearSystem {
    /// Built from arbitrary dynamics; the Hamiltonian is recovered when
    /// the dynamics are realizable.
    pub fn from_dynamics(a: Matrix) -> Result<Self> {
        let n = ensure_square(&a, "dynamics matrix")?;
        ensure_finite(&a, "dynamics matrix")?;
        let ccr = CommutationStructure::for_dimension(n)?;
        let r = hamiltonian_from_dynamics(&a, &ccr).ok();
        Ok(Self { a, ccr, r })
    }

    pub fn from_hamiltonian(r: Matrix) -> Result<Self> {
        let n = ensure_square(&r, "Hamiltonian matrix")?;
        ensure_finite(&r, "Hamiltonian matrix")?;
        let ccr = CommutationStructure::for_dimension(n)?;
        let a = dynamics_from_hamiltonian(&r, &ccr)?;
        Ok(Self {
            a,
            ccr,
            r: Some((&r + r.transpose()) * 0.5),
        })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn ccr(&self) -> &CommutationStructure {
        &self.ccr
    }

    pub fn hamiltonian(&self) -> Option<&Matrix> {
        self.r.as_ref()
    }

    pub fn realizability(&self, tol: f64) -> RealizabilityReport {
        // Dimensions agree by construction.
        check_realizability(&self.a, &self.ccr, tol).expect("dimensions checked at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaReport {
    /// Max-norm of `β^T Θ_1 β`.
    pub beta_theta_beta: f64,
}

/// Checks that `beta` is block diagonal with nonzero `2×1` blocks and
/// reports `‖β^T Θ_1 β‖`.
pub fn validate_beta(beta: &Matrix, ccr_plant: &CommutationStructure) -> Result<BetaReport> {
    let n_p = ccr_plant.dim();
    let m_p = ccr_plant.modes();
    ensure_shape(beta, "beta", n_p, m_p)?;
    ensure_finite(beta, "beta")?;
    for col in 0..m_p {
        for row in 0..n_p {
            if row / 2 != col && beta[(row, col)] != 0.0 {
                return Err(Error::InvalidBeta(format!(
                    "entry ({row}, {col}) lies outside the 2x1 diagonal blocks"
                )));
            }
        }
        if beta[(2 * col, col)] == 0.0 && beta[(2 * col + 1, col)] == 0.0 {
            return Err(Error::InvalidBeta(format!("block {col} is zero")));
        }
    }
    let btb = beta.transpose() * ccr_plant.theta() * beta;
    Ok(BetaReport {
        beta_theta_beta: max_abs(&btb),
    })
}

/// Plant `ẋ_p = A_p x_p`, `z_p = C_p x_p` with `C_p = β^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    ccr: CommutationStructure,
    a_p: Matrix,
    beta: Matrix,
}

impl PlantSpec {
    /// Plant with `A_p = 0`, the case the observer synthesis handles.
    pub fn new(beta: Matrix) -> Result<Self> {
        let n_p = beta.nrows();
        Self::with_dynamics(Matrix::zeros(n_p, n_p), beta)
    }

    /// Plant with arbitrary realizable dynamics.
    pub fn with_dynamics(a_p: Matrix, beta: Matrix) -> Result<Self> {
        let ccr = CommutationStructure::for_dimension(beta.nrows())?;
        validate_beta(&beta, &ccr)?;
        ensure_finite(&a_p, "A_p")?;
        let report = check_realizability(&a_p, &ccr, DEFAULT_TOL)?;
        if !report.realizable {
            return Err(Error::NotRealizable {
                residual: report.residual,
            });
        }
        Ok(Self { ccr, a_p, beta })
    }

    /// Plant observing one quadrature per mode: `quadratures[k]` is the
    /// `(q, p)` weight pair of mode `k`.
    pub fn from_blocks(quadratures: &[[f64; 2]]) -> Result<Self> {
        let m_p = quadratures.len();
        let mut beta = Matrix::zeros(2 * m_p, m_p);
        for (k, [q, p]) in quadratures.iter().enumerate() {
            beta[(2 * k, k)] = *q;
            beta[(2 * k + 1, k)] = *p;
        }
        Self::new(beta)
    }

    pub fn n_p(&self) -> usize {
        self.ccr.dim()
    }

    pub fn m_p(&self) -> usize {
        self.ccr.modes()
    }

    pub fn ccr(&self) -> &CommutationStructure {
        &self.ccr
    }

    pub fn a_p(&self) -> &Matrix {
        &self.a_p
    }

    pub fn beta(&self) -> &Matrix {
        &self.beta
    }

    pub fn c_p(&self) -> Matrix {
        self.beta.transpose()
    }

    /// `R_p = ¼(-Θ_1 A_p + A_p^T Θ_1)`.
    pub fn hamiltonian(&self) -> Matrix {
        hamiltonian_from_dynamics(&self.a_p, &self.ccr)
            .expect("realizability checked at construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    fn aug_one_mode() -> Matrix {
        from_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0, 0.0],
            &[0.0, 0.0, 0.0, 2.0],
            &[2.0, 0.0, -2.0, 0.0],
        ])
    }

    fn r_aug_one_mode() -> Matrix {
        from_rows(&[
            &[0.0, 0.0, -1.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[-1.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ])
    }

    #[test]
    fn single_mode_theta_is_j() {
        let c = make_theta(1).unwrap();
        assert_eq!(c.theta(), &from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    }

    #[test]
    fn two_mode_theta_is_block_diagonal() {
        let c = make_theta(2).unwrap();
        let expected = from_rows(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, -1.0, 0.0],
        ]);
        assert_eq!(c.theta(), &expected);
    }

    #[test]
    fn theta_identities_hold_for_many_sizes() {
        for modes in 1..=8 {
            let c = make_theta(modes).unwrap();
            let t = c.theta();
            let n = c.dim();
            assert_eq!(t + t.transpose(), Matrix::zeros(n, n));
            assert_eq!(t * t, -Matrix::identity(n, n));
        }
    }

    #[test]
    fn zero_modes_rejected() {
        assert_eq!(make_theta(0), Err(Error::NoModes));
        assert_eq!(
            CommutationStructure::for_dimension(3),
            Err(Error::OddDimension(3))
        );
    }

    #[test]
    fn realizability_examples() {
        let ccr = make_theta(2).unwrap();
        let r = check_realizability(&aug_one_mode(), &ccr, DEFAULT_TOL).unwrap();
        assert!(r.realizable);
        assert_eq!(r.residual, 0.0);

        let r = check_realizability(&Matrix::identity(4, 4), &ccr, DEFAULT_TOL).unwrap();
        assert!(!r.realizable);
        assert_eq!(r.residual, 2.0);

        let r = check_realizability(&Matrix::zeros(4, 4), &ccr, DEFAULT_TOL).unwrap();
        assert!(r.realizable);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn realizability_dimension_mismatch() {
        let ccr = make_theta(1).unwrap();
        assert!(matches!(
            check_realizability(&Matrix::zeros(4, 4), &ccr, DEFAULT_TOL),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn hamiltonian_examples() {
        let ccr1 = make_theta(1).unwrap();
        assert_eq!(
            hamiltonian_from_dynamics(&Matrix::zeros(2, 2), &ccr1).unwrap(),
            Matrix::zeros(2, 2)
        );
        let two_j = ccr1.theta() * 2.0;
        assert_eq!(
            hamiltonian_from_dynamics(&two_j, &ccr1).unwrap(),
            Matrix::identity(2, 2)
        );

        let ccr2 = make_theta(2).unwrap();
        assert_eq!(
            hamiltonian_from_dynamics(&aug_one_mode(), &ccr2).unwrap(),
            r_aug_one_mode()
        );
    }

    #[test]
    fn hamiltonian_rejects_non_realizable() {
        let ccr = make_theta(1).unwrap();
        assert_eq!(
            hamiltonian_from_dynamics(&Matrix::identity(2, 2), &ccr),
            Err(Error::NotRealizable { residual: 2.0 })
        );
    }

    #[test]
    fn dynamics_examples() {
        let ccr1 = make_theta(1).unwrap();
        assert_eq!(
            dynamics_from_hamiltonian(&Matrix::zeros(2, 2), &ccr1).unwrap(),
            Matrix::zeros(2, 2)
        );
        assert_eq!(
            dynamics_from_hamiltonian(&Matrix::identity(2, 2), &ccr1).unwrap(),
            ccr1.theta() * 2.0
        );
        let ccr2 = make_theta(2).unwrap();
        assert_eq!(
            dynamics_from_hamiltonian(&r_aug_one_mode(), &ccr2).unwrap(),
            aug_one_mode()
        );
    }

    #[test]
    fn dynamics_rejects_asymmetric() {
        let ccr = make_theta(1).unwrap();
        let r = from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            dynamics_from_hamiltonian(&r, &ccr),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn beta_examples() {
        let ccr = make_theta(1).unwrap();
        let rep = validate_beta(&from_rows(&[&[1.0], &[0.0]]), &ccr).unwrap();
        assert_eq!(rep.beta_theta_beta, 0.0);
        assert!(validate_beta(&from_rows(&[&[0.0], &[1.0]]), &ccr).is_ok());

        let ccr2 = make_theta(2).unwrap();
        // Interleaved ordering: rows 2..4 belong to mode 1, so this one is valid.
        let two_q = from_rows(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        assert!(validate_beta(&two_q, &ccr2).is_ok());
        let misplaced = from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            validate_beta(&misplaced, &ccr2),
            Err(Error::InvalidBeta(_))
        ));
        let off_block = from_rows(&[&[1.0, 0.3], &[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            validate_beta(&off_block, &ccr2),
            Err(Error::InvalidBeta(_))
        ));
    }

    #[test]
    fn beta_rejects_zero_block_and_bad_shape() {
        let ccr = make_theta(1).unwrap();
        assert!(matches!(
            validate_beta(&Matrix::zeros(2, 1), &ccr),
            Err(Error::InvalidBeta(_))
        ));
        assert!(matches!(
            validate_beta(&Matrix::zeros(2, 2), &ccr),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn general_beta_blocks_annihilate_theta() {
        let plant = PlantSpec::from_blocks(&[[0.6, -0.8], [2.0, 3.0], [0.0, -1.5]]).unwrap();
        let rep = validate_beta(plant.beta(), plant.ccr()).unwrap();
        assert!(rep.beta_theta_beta <= 1e-15);
        assert_eq!(plant.c_p(), plant.beta().transpose());
        assert_eq!(plant.hamiltonian(), Matrix::zeros(6, 6));
    }

    #[test]
    fn plant_with_non_realizable_dynamics_rejected() {
        let beta = from_rows(&[&[1.0], &[0.0]]);
        assert!(matches!(
            PlantSpec::with_dynamics(Matrix::identity(2, 2), beta),
            Err(Error::NotRealizable { .. })
        ));
    }

    #[test]
    fn quantum_linear_system_round_trip() {
        let sys = QuantumLinearSystem::from_dynamics(aug_one_mode()).unwrap();
        assert_eq!(sys.hamiltonian(), Some(&r_aug_one_mode()));
        assert!(sys.realizability(DEFAULT_TOL).realizable);

        let sys = QuantumLinearSystem::from_dynamics(Matrix::identity(2, 2)).unwrap();
        assert!(sys.hamiltonian().is_none());
        assert!(!sys.realizability(DEFAULT_TOL).realizable);
    }
}
