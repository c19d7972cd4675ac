//! Algebraic Riccati solvers and LQ cost machinery.
//!
//! Both solvers are dependency-free and sized for the 3-state plant:
//! the continuous equation is solved by a matrix sign iteration on the
//! 6x6 Hamiltonian, the discrete one by structured doubling. Gains follow
//! u = -K x.

use nalgebra::{Matrix3, Matrix6, RowVector3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LQ weighting: Q = diag(rho1, rho2, rho3), R = [r].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub r: f64,
}

impl Default for WeightSet {
    fn default() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            r: 1.0,
        }
    }
}

impl WeightSet {
    pub fn new(rho1: f64, rho2: f64, rho3: f64, r: f64) -> Self {
        Self { rho1, rho2, rho3, r }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho1 < 0.0 || self.rho2 < 0.0 || self.rho3 < 0.0 {
            return Err(Error::InvalidParameter(
                "state weights must be non-negative".into(),
            ));
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidParameter("input weight must be positive".into()));
        }
        Ok(())
    }

    pub fn q_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&Vector3::new(self.rho1, self.rho2, self.rho3))
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.rho1, self.rho2, self.rho3, self.r]
    }

    pub fn from_array(w: [f64; 4]) -> Self {
        Self::new(w[0], w[1], w[2], w[3])
    }
}

/// A stabilizing Riccati solution with its feedback gain.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub p: Matrix3<f64>,
    /// Feedback row: u = -k x.
    pub k: RowVector3<f64>,
    /// Infinity-norm residual of the Riccati equation at `p`.
    pub residual: f64,
}

const RESIDUAL_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-10;

pub(crate) fn spectral_radius(m: &Matrix3<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max)
}

fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Solve A'P + PA - P B r^-1 B' P + Q = 0 for the stabilizing P.
///
/// Matrix sign iteration on the Hamiltonian [[A, -B r^-1 B'], [-Q, -A']]
/// with determinant scaling; the stable invariant subspace yields P.
pub fn solve_care(
    a: &Matrix3<f64>,
    b: &Vector3<f64>,
    q: &Matrix3<f64>,
    r: f64,
) -> Result<RiccatiSolution> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("R must be positive definite".into()));
    }
    let s = b * b.transpose() / r;
    let mut z = Matrix6::<f64>::zeros();
    z.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    z.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-s));
    z.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-q));
    z.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-a.transpose()));

    let max_iter = 100;
    let mut converged = false;
    for _ in 0..max_iter {
        let det = z.determinant().abs();
        if !det.is_finite() || det == 0.0 {
            return Err(Error::NonStabilizable);
        }
        // determinant scaling accelerates the sign iteration
        let c = det.powf(-1.0 / 6.0);
        let zc = z * c;
        let inv = zc.try_inverse().ok_or(Error::NonStabilizable)?;
        let next = (zc + inv) * 0.5;
        let delta = (next - z).abs().max();
        z = next;
        if delta < 1e-13 * (1.0 + z.abs().max()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: max_iter,
            residual: f64::NAN,
        });
    }

    // (sign(Z) + I) annihilates the stable subspace [I; P]:
    // stack the two block equations and solve the 6x3 least-squares system.
    let s11 = z.fixed_view::<3, 3>(0, 0).into_owned();
    let s12 = z.fixed_view::<3, 3>(0, 3).into_owned();
    let s21 = z.fixed_view::<3, 3>(3, 0).into_owned();
    let s22 = z.fixed_view::<3, 3>(3, 3).into_owned();

    let mut lhs = nalgebra::DMatrix::<f64>::zeros(6, 3);
    lhs.view_mut((0, 0), (3, 3)).copy_from(&s12);
    lhs.view_mut((3, 0), (3, 3)).copy_from(&(s22 + Matrix3::identity()));
    let mut rhs = nalgebra::DMatrix::<f64>::zeros(6, 3);
    rhs.view_mut((0, 0), (3, 3)).copy_from(&(-(s11 + Matrix3::identity())));
    rhs.view_mut((3, 0), (3, 3)).copy_from(&(-s21));

    let svd = lhs.svd(true, true);
    let sol = svd.solve(&rhs, 1e-12).map_err(|_| Error::NonStabilizable)?;
    let p = symmetrize(&Matrix3::from_iterator(sol.iter().copied()));

    let residual = (a.transpose() * p + p * a - p * s * p + q).abs().max();
    let k = RowVector3::from((b.transpose() * p) / r);
    if residual > RESIDUAL_TOL || !residual.is_finite() {
        return Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        });
    }
    let a_cl = a - b * k;
    if a_cl.complex_eigenvalues().iter().any(|e| e.re >= 0.0) {
        return Err(Error::NonStabilizable);
    }
    debug_assert!((p - p.transpose()).abs().max() <= SYMMETRY_TOL);
    Ok(RiccatiSolution { p, k, residual })
}

/// Solve the discrete equation P = G'PG - G'PH (r + H'PH)^-1 H'PG + Q
/// for the stabilizing P; K = (r + H'PH)^-1 H'PG.
///
/// Structured doubling: quadratically convergent, no eigen machinery.
pub fn solve_dare(
    g: &Matrix3<f64>,
    h: &Vector3<f64>,
    q: &Matrix3<f64>,
    r: f64,
) -> Result<RiccatiSolution> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter("R must be positive definite".into()));
    }
    let mut a_k = *g;
    let mut g_k = h * h.transpose() / r;
    let mut h_k = *q;

    let max_iter = 200;
    let mut converged = false;
    for _ in 0..max_iter {
        let w = Matrix3::identity() + g_k * h_k;
        let w_inv = w.try_inverse().ok_or(Error::NonStabilizable)?;
        let awi = a_k * w_inv;
        let a_next = awi * a_k;
        let g_next = g_k + awi * g_k * a_k.transpose();
        let h_next = h_k + a_k.transpose() * h_k * w_inv * a_k;
        let delta = (h_next - h_k).abs().max();
        a_k = a_next;
        g_k = symmetrize(&g_next);
        h_k = symmetrize(&h_next);
        if !h_k.iter().all(|v| v.is_finite()) {
            return Err(Error::NonStabilizable);
        }
        if delta < 1e-13 * (1.0 + h_k.abs().max()) {
            converged = true;
            break;
        }
    }
    let p = h_k;
    let denom = r + (h.transpose() * p * h)[0];
    let k = RowVector3::from((h.transpose() * p * g) / denom);
    let residual =
        (g.transpose() * p * g - p - (g.transpose() * p * h) * (h.transpose() * p * g) / denom + q)
            .abs()
            .max();
    if !converged || residual > RESIDUAL_TOL || !residual.is_finite() {
        return Err(Error::NonConvergence {
            iterations: max_iter,
            residual,
        });
    }
    if spectral_radius(&(g - h * k)) >= 1.0 {
        return Err(Error::NonStabilizable);
    }
    debug_assert!((p - p.transpose()).abs().max() <= SYMMETRY_TOL);
    Ok(RiccatiSolution { p, k, residual })
}

/// State feedback u = -K x. Actuator clamping is the supervisor's job.
pub fn lqr_control(x: &crate::plant::AccState, k: &RowVector3<f64>) -> f64 {
    -(k * x.as_vector())[0]
}

/// Averaged quadratic cost (1/N) sum x'Qx + r u² over an aligned trajectory.
pub fn eval_cost(states: &[Vector3<f64>], inputs: &[f64], w: &WeightSet) -> Result<f64> {
    if states.is_empty() || states.len() != inputs.len() {
        return Err(Error::EmptyTrajectory);
    }
    let q = w.q_matrix();
    let sum: f64 = states
        .iter()
        .zip(inputs)
        .map(|(x, &u)| (x.transpose() * q * x)[0] + w.r * u * u)
        .sum();
    Ok(sum / states.len() as f64)
}
