//! Planar two-link arm kinematics and dynamics, plus the flywheel-augmented
//! system shared by every controller.
//!
//! The arm-specific pieces (kinematics, `M(q)`, `C(q, q̇)`) use fixed-size
//! 2-D types. Everything that operates on the augmented system works on
//! dynamically sized matrices so it holds for any `n + 1` dimension.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// `|det J|` below which the pseudoinverse switches to damped least squares.
pub const SINGULARITY_DET: f64 = 1e-6;
/// Damping used once the Jacobian is flagged singular.
pub const DLS_DAMPING: f64 = 1e-6;

/// Link masses, lengths, and inertias of the arm plus the flywheel inertia.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub i1: f64,
    pub i2: f64,
    pub mf: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            m1: 3.05,
            m2: 3.05,
            l1: 0.4,
            l2: 0.4,
            i1: 0.0414,
            i2: 0.0414,
            mf: 10.0,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("i1", self.i1),
            ("i2", self.i2),
            ("mf", self.mf),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("robot.{name}"), "must be finite and > 0"));
            }
        }
        Ok(())
    }

    /// The three lumped inertia constants `(M1, M2, R)` of the arm model.
    pub fn lumped(&self) -> (f64, f64, f64) {
        let m1 = self.l1 * self.l1 * (self.m1 / 4.0 + self.m2) + self.i1;
        let m2 = self.m2 * self.l2 * self.l2 / 4.0 + self.i2;
        let r = self.m2 * self.l1 * self.l2 / 2.0;
        (m1, m2, r)
    }
}

/// Joint angles and velocities of the arm together with the flywheel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub q: Vector2<f64>,
    pub qf: f64,
    pub qd: Vector2<f64>,
    pub qdf: f64,
}

impl AugmentedState {
    pub fn new(q: Vector2<f64>, qf: f64, qd: Vector2<f64>, qdf: f64) -> Result<Self> {
        let finite = q.iter().chain(qd.iter()).all(|v| v.is_finite()) && qf.is_finite() && qdf.is_finite();
        if !finite {
            return Err(Error::NonFinite("augmented state"));
        }
        Ok(Self { q, qf, qd, qdf })
    }

    /// Augmented position `(q1, q2, qf)`.
    pub fn qa(&self) -> DVector<f64> {
        DVector::from_column_slice(&[self.q[0], self.q[1], self.qf])
    }

    /// Augmented velocity `(q̇1, q̇2, q̇f)`.
    pub fn qda(&self) -> DVector<f64> {
        DVector::from_column_slice(&[self.qd[0], self.qd[1], self.qdf])
    }
}

/// Inertia and Coriolis matrices of the arm and of the augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct DynMatrices {
    pub m: Matrix2<f64>,
    pub c: Matrix2<f64>,
    pub ma: DMatrix<f64>,
    pub ca: DMatrix<f64>,
}

impl DynMatrices {
    pub fn evaluate(q: &Vector2<f64>, qd: &Vector2<f64>, p: &RobotParams) -> Self {
        let m = mass_matrix(q, p);
        let c = coriolis_matrix(q, qd, p);
        let (ma, ca) = augment(&to_dmatrix(&m), &to_dmatrix(&c), p.mf);
        Self { m, c, ma, ca }
    }
}

pub(crate) fn to_dmatrix(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(2, 2, m.iter().copied())
}

/// End-effector position of the planar arm.
pub fn forward_kinematics(q: &Vector2<f64>, p: &RobotParams) -> Vector2<f64> {
    let q12 = q[0] + q[1];
    Vector2::new(
        p.l1 * q[0].cos() + p.l2 * q12.cos(),
        p.l1 * q[0].sin() + p.l2 * q12.sin(),
    )
}

pub fn jacobian(q: &Vector2<f64>, p: &RobotParams) -> Matrix2<f64> {
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    Matrix2::new(
        -p.l1 * s1 - p.l2 * s12,
        -p.l2 * s12,
        p.l1 * c1 + p.l2 * c12,
        p.l2 * c12,
    )
}

/// Pseudoinverse together with the flag telling whether damping was needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoInverse {
    pub matrix: Matrix2<f64>,
    pub singular: bool,
}

/// `J⁺ = (JᵀJ)⁻¹Jᵀ`, falling back to `(JᵀJ + λI)⁻¹Jᵀ` when `|det J|` is
/// below [`SINGULARITY_DET`].
pub fn pseudoinverse(j: &Matrix2<f64>) -> PseudoInverse {
    let jtj = j.transpose() * j;
    let singular = j.determinant().abs() < SINGULARITY_DET;
    let normal = if singular {
        jtj + Matrix2::identity() * DLS_DAMPING
    } else {
        jtj
    };
    // The damped normal matrix is symmetric positive definite, so this only
    // fails for non-finite input.
    let inv = normal.try_inverse().unwrap_or_else(|| Matrix2::from_element(f64::NAN));
    PseudoInverse {
        matrix: inv * j.transpose(),
        singular,
    }
}

pub fn mass_matrix(q: &Vector2<f64>, p: &RobotParams) -> Matrix2<f64> {
    let (m1, m2, r) = p.lumped();
    let c2 = q[1].cos();
    Matrix2::new(m1 + m2 + 2.0 * r * c2, m2 + r * c2, m2 + r * c2, m2)
}

pub fn coriolis_matrix(q: &Vector2<f64>, qd: &Vector2<f64>, p: &RobotParams) -> Matrix2<f64> {
    let (_, _, r) = p.lumped();
    let s2 = q[1].sin();
    Matrix2::new(
        -r * qd[1] * s2,
        -r * (qd[0] + qd[1]) * s2,
        r * qd[0] * s2,
        0.0,
    )
}

/// Block-diagonal augmentation with the flywheel in the last slot.
pub fn augment(m: &DMatrix<f64>, c: &DMatrix<f64>, mf: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut ma = DMatrix::zeros(n + 1, n + 1);
    let mut ca = DMatrix::zeros(n + 1, n + 1);
    ma.view_mut((0, 0), (n, n)).copy_from(m);
    ca.view_mut((0, 0), (n, n)).copy_from(c);
    ma[(n, n)] = mf;
    (ma, ca)
}

/// Solves the augmented equations of motion for `q̈ᵃ`.
pub fn forward_dynamics(
    s: &AugmentedState,
    tau_a: &DVector<f64>,
    tau_ext_a: &DVector<f64>,
    p: &RobotParams,
) -> Result<DVector<f64>> {
    let dm = DynMatrices::evaluate(&s.q, &s.qd, p);
    solve_augmented(&dm.ma, &dm.ca, &s.qda(), tau_a, tau_ext_a)
}

/// `q̈ᵃ = (Mᵃ)⁻¹(τᵃ + τᵃ_ext − Cᵃq̇ᵃ)` for already evaluated matrices.
pub fn solve_augmented(
    ma: &DMatrix<f64>,
    ca: &DMatrix<f64>,
    qda: &DVector<f64>,
    tau_a: &DVector<f64>,
    tau_ext_a: &DVector<f64>,
) -> Result<DVector<f64>> {
    let rhs = tau_a + tau_ext_a - ca * qda;
    let chol = ma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invalid("inertia", "augmented inertia is not positive definite"))?;
    let qdd = chol.solve(&rhs);
    if qdd.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("joint acceleration"));
    }
    Ok(qdd)
}
