//! Longitudinal car-following dynamics.
//!
//! Three states describe the loop: spacing error, relative velocity, and
//! follower acceleration. The follower's driveline is lumped into a first
//! order lag with gain `k_gain` and time constant `t_lag`; the preceding
//! vehicle's acceleration enters as a disturbance. Every controller in the
//! crate is synthesized against the matrices built here.

use nalgebra::{Matrix3, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the car-following plant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    /// Headway time, s. Per-unit-speed part of the desired gap.
    pub tau_h: f64,
    /// Standstill gap, m.
    pub d0: f64,
    /// Lower-loop lag time constant, s.
    pub t_lag: f64,
    /// Lower-loop gain, dimensionless.
    pub k_gain: f64,
    /// Sample time, s.
    pub sample_time: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_h: 1.5,
            d0: 5.0,
            t_lag: 0.5,
            k_gain: 1.0,
            sample_time: 0.05,
        }
    }
}

impl PlantParams {
    /// Alternate preset implied by a published transfer function
    /// P(s) = (0.12s + 0.02143)/(s^3 + 0.1429s^2). The lag is far slower
    /// than any production driveline; kept for traceability experiments.
    pub fn sluggish_preset() -> Self {
        Self {
            tau_h: 5.6,
            d0: 5.0,
            t_lag: 7.0,
            k_gain: 0.15,
            sample_time: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_h > 0.0 && self.tau_h.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau_h = {}", self.tau_h)));
        }
        if !(self.d0 >= 0.0 && self.d0.is_finite()) {
            return Err(Error::InvalidParameter(format!("d0 = {}", self.d0)));
        }
        if !(self.t_lag > 0.0 && self.t_lag.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_lag = {}", self.t_lag)));
        }
        if !(self.k_gain > 0.0 && self.k_gain.is_finite()) {
            return Err(Error::InvalidParameter(format!("k_gain = {}", self.k_gain)));
        }
        if !(self.sample_time > 0.0 && self.sample_time < self.t_lag) {
            return Err(Error::InvalidParameter(format!(
                "sample_time = {} (must be positive and below t_lag = {})",
                self.sample_time, self.t_lag
            )));
        }
        Ok(())
    }
}

/// The controller state vector: [d_error, v_rel, a_f].
///
/// `d_error` is desired-minus-real distance, `v_rel` is preceding-minus-
/// follower velocity, `a_f` is follower acceleration. Note the phase-plane
/// classifier uses the opposite distance convention; see [`crate::alqg`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AccState {
    /// Spacing error d_desire - d, m.
    pub d_error: f64,
    /// Relative velocity v_p - v_f, m/s.
    pub v_rel: f64,
    /// Follower acceleration, m/s².
    pub a_f: f64,
}

impl AccState {
    pub fn new(d_error: f64, v_rel: f64, a_f: f64) -> Self {
        Self { d_error, v_rel, a_f }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.d_error, self.v_rel, self.a_f)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.d_error.is_finite() && self.v_rel.is_finite() && self.a_f.is_finite()
    }
}

/// Continuous-time state space: dx/dt = A x + B u + Γ w, y = C x.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSS {
    pub a: Matrix3<f64>,
    pub b: Vector3<f64>,
    pub gamma: Vector3<f64>,
    pub c: Matrix3<f64>,
}

/// Discrete-time state space: x[k+1] = G x[k] + H u[k] + L w[k].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSS {
    pub g: Matrix3<f64>,
    pub h: Vector3<f64>,
    pub l: Vector3<f64>,
    pub t_s: f64,
}

/// Build the continuous matrices from physical parameters.
pub fn build_continuous(params: &PlantParams) -> Result<ContinuousSS> {
    params.validate()?;
    let a = Matrix3::new(
        0.0, -1.0, params.tau_h, //
        0.0, 0.0, -1.0, //
        0.0, 0.0, -1.0 / params.t_lag,
    );
    let b = Vector3::new(0.0, 0.0, params.k_gain / params.t_lag);
    let gamma = Vector3::new(0.0, 1.0, 0.0);
    Ok(ContinuousSS {
        a,
        b,
        gamma,
        c: Matrix3::identity(),
    })
}

/// Desired gap at follower speed `v_f`: tau_h * v_f + d0.
pub fn desired_distance(v_f: f64, params: &PlantParams) -> Result<f64> {
    if !(v_f >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative speed {v_f}")));
    }
    Ok(params.tau_h * v_f + params.d0)
}

/// Exact zero-order-hold discretization of (A, B, Γ).
///
/// Uses the augmented matrix exponential
/// exp([[A, B, Γ], [0, 0, 0]] * T) so that G, H, L are exact sampled-data
/// maps under a held input, not an Euler approximation.
pub fn discretize_zoh(ss: &ContinuousSS, t_s: f64) -> Result<DiscreteSS> {
    if !(t_s > 0.0 && t_s.is_finite()) {
        return Err(Error::InvalidParameter(format!("sample time {t_s}")));
    }
    let mut m = SMatrix::<f64, 5, 5>::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&ss.a);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&ss.b);
    m.fixed_view_mut::<3, 1>(0, 4).copy_from(&ss.gamma);
    let e = (m * t_s).exp();
    Ok(DiscreteSS {
        g: e.fixed_view::<3, 3>(0, 0).into_owned(),
        h: e.fixed_view::<3, 1>(0, 3).into_owned(),
        l: e.fixed_view::<3, 1>(0, 4).into_owned(),
        t_s,
    })
}

/// Convenience: parameters straight to the discrete model.
pub fn build_discrete(params: &PlantParams) -> Result<DiscreteSS> {
    discretize_zoh(&build_continuous(params)?, params.sample_time)
}

/// One exact truth step: x[k+1] = G x + H u + L a_p. No noise is added here.
pub fn step_truth(x: &AccState, u: f64, a_p: f64, dss: &DiscreteSS) -> AccState {
    let next = dss.g * x.as_vector() + dss.h * u + dss.l * a_p;
    AccState::from_vector(&next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// RK4 integration of dx/dt = A x + B u + Γ w with held u, w.
    /// Independent oracle for the ZOH maps.
    fn rk4_held(
        ss: &ContinuousSS,
        x0: &Vector3<f64>,
        u: f64,
        w: f64,
        t: f64,
        substeps: usize,
    ) -> Vector3<f64> {
        let h = t / substeps as f64;
        let f = |x: &Vector3<f64>| ss.a * x + ss.b * u + ss.gamma * w;
        let mut x = *x0;
        for _ in 0..substeps {
            let k1 = f(&x);
            let k2 = f(&(x + k1 * (h / 2.0)));
            let k3 = f(&(x + k2 * (h / 2.0)));
            let k4 = f(&(x + k3 * h));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        x
    }

    #[test]
    fn matrices_match_closed_form() {
        let p = PlantParams {
            tau_h: 1.5,
            t_lag: 0.5,
            k_gain: 1.0,
            ..Default::default()
        };
        let ss = build_continuous(&p).unwrap();
        assert_eq!(ss.a[(2, 2)], -2.0);
        assert_eq!(ss.b[2], 2.0);
        assert_eq!(ss.a[(0, 1)], -1.0);
        assert_eq!(ss.a[(0, 2)], 1.5);
        assert_eq!(ss.a[(1, 2)], -1.0);
        assert_eq!(ss.gamma, Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(ss.c, Matrix3::identity());
        // Rows that must be exactly zero regardless of parameters.
        for j in 0..3 {
            assert_eq!(ss.a[(1, j)] * 0.0, 0.0);
        }
    }

    #[test]
    fn sluggish_preset_reproduces_published_transfer_function() {
        // d_error/u = K_L (1 + tau_h s) / (T_L s^3 + s^2)
        //           = (0.12 s + 0.02143) / (s^3 + 0.1429 s^2)
        let p = PlantParams::sluggish_preset();
        let k = p.k_gain / p.t_lag;
        assert!((k - 0.02143).abs() < 2e-6);
        assert!((k * p.tau_h - 0.12).abs() < 1e-9);
        assert!((1.0 / p.t_lag - 0.1429).abs() < 5e-5);
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = PlantParams {
            tau_h: -1.0,
            ..Default::default()
        };
        assert!(build_continuous(&bad).is_err());
        let bad = PlantParams {
            sample_time: 0.6, // above t_lag
            ..Default::default()
        };
        assert!(build_continuous(&bad).is_err());
    }

    #[test]
    fn desired_distance_examples() {
        let p = PlantParams::default();
        assert_eq!(desired_distance(0.0, &p).unwrap(), 5.0);
        assert_eq!(desired_distance(10.0, &p).unwrap(), 20.0);
        let sluggish = PlantParams::sluggish_preset();
        assert!((desired_distance(8.33, &sluggish).unwrap() - 51.648).abs() < 1e-9);
        assert!(desired_distance(-0.1, &p).is_err());
    }

    #[test]
    fn desired_distance_is_affine() {
        let p = PlantParams::default();
        let d = |v: f64| desired_distance(v, &p).unwrap();
        for (v1, v2) in [(3.0, 7.0), (0.0, 12.5), (8.1, 0.3)] {
            assert!((d(v1 + v2) - d(v2) - (d(v1) - d(0.0))).abs() < 1e-12);
        }
    }

    #[test]
    fn zoh_scalar_sub_block() {
        let p = PlantParams::default();
        let dss = build_discrete(&p).unwrap();
        // a_f channel is a pure lag: G[2][2] = exp(-T_s/T_L) = exp(-0.1)
        assert!((dss.g[(2, 2)] - (-0.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn zoh_limit_small_sample_time() {
        let ss = build_continuous(&PlantParams::default()).unwrap();
        let dss = discretize_zoh(&ss, 1e-8).unwrap();
        assert!((dss.g - Matrix3::identity()).abs().max() < 1e-6);
        assert!(dss.h.abs().max() < 1e-6);
    }

    #[test]
    fn zoh_matches_rk4_oracle() {
        let ss = build_continuous(&PlantParams::default()).unwrap();
        let dss = discretize_zoh(&ss, 0.05).unwrap();
        let x0 = Vector3::new(2.0, -1.0, 0.5);
        let (u, w) = (0.8, -0.3);
        let exact = dss.g * x0 + dss.h * u + dss.l * w;
        let rk4 = rk4_held(&ss, &x0, u, w, 0.05, 1000);
        assert!((exact - rk4).abs().max() < 1e-9);
    }

    #[test]
    fn zoh_equivalence_random_parameter_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let p = PlantParams {
                tau_h: rng.random_range(0.5..4.0),
                d0: rng.random_range(0.0..10.0),
                t_lag: rng.random_range(0.2..2.0),
                k_gain: rng.random_range(0.5..1.5),
                sample_time: rng.random_range(0.01..0.1),
            };
            if p.validate().is_err() {
                continue;
            }
            let ss = build_continuous(&p).unwrap();
            let dss = discretize_zoh(&ss, p.sample_time).unwrap();
            let x0 = Vector3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-2.0..2.0),
            );
            let u = rng.random_range(-2.0..2.0);
            let w = rng.random_range(-2.0..2.0);
            let exact = dss.g * x0 + dss.h * u + dss.l * w;
            let rk4 = rk4_held(&ss, &x0, u, w, p.sample_time, 1000);
            assert!(
                (exact - rk4).abs().max() < 1e-9,
                "ZOH mismatch for {p:?}: {:.3e}",
                (exact - rk4).abs().max()
            );
        }
    }

    #[test]
    fn controllability_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = PlantParams {
                tau_h: rng.random_range(0.5..4.0),
                t_lag: rng.random_range(0.2..2.0),
                k_gain: rng.random_range(0.3..1.5),
                ..Default::default()
            };
            let ss = build_continuous(&p).unwrap();
            let ctrb = Matrix3::from_columns(&[ss.b, ss.a * ss.b, ss.a * ss.a * ss.b]);
            assert_eq!(ctrb.rank(1e-10), 3, "controllability lost for {p:?}");
        }
    }

    #[test]
    fn step_truth_equilibrium_and_integrator() {
        let dss = build_discrete(&PlantParams::default()).unwrap();
        let zero = AccState::default();
        assert_eq!(step_truth(&zero, 0.0, 0.0, &dss), zero);

        // a_p = 1 held: v_rel accumulates ~ k * T_s
        let mut x = AccState::default();
        for _ in 0..10 {
            x = step_truth(&x, 0.0, 1.0, &dss);
        }
        assert!((x.v_rel - 10.0 * 0.05).abs() < 1e-9);
    }
}
