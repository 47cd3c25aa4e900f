//! Direct integration of the full system
//!
//! ```text
//! H = p²/2 + cos q − 1 + I²/2 + ε cos q · g(φ, t)
//! ```
//!
//! and a measurement of the action jump along a homoclinic excursion, used
//! to check the first-order scattering map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{self, OdeOptions};
use crate::scattering::ReducedPoincare;
use crate::system::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub p: f64,
    pub q: f64,
    pub action: f64,
    pub phi: f64,
    pub t: f64,
}

impl FullState {
    fn to_array(self) -> [f64; 4] {
        [self.p, self.q, self.action, self.phi]
    }

    fn from_array(y: &[f64; 4], t: f64) -> Self {
        Self {
            p: y[0],
            q: y[1],
            action: y[2],
            phi: y[3],
            t,
        }
    }

    /// `H` evaluated at this state.
    pub fn energy(&self, eps: f64, spec: &SystemSpec) -> f64 {
        0.5 * self.p * self.p + self.q.cos() - 1.0
            + 0.5 * self.action * self.action
            + eps * self.q.cos() * spec.g(self.phi, self.t)
    }
}

fn rhs(t: f64, y: &[f64; 4], eps: f64, spec: &SystemSpec) -> [f64; 4] {
    let (p, q, i, phi) = (y[0], y[1], y[2], y[3]);
    let (sq, cq) = q.sin_cos();
    [sq * (1.0 + eps * spec.g(phi, t)), p, -eps * cq * spec.g_phi(phi, t), i]
}

/// Hamilton's equations; the `t` component of the result is `ṫ = 1`.
pub fn vector_field(state: &FullState, eps: f64, spec: &SystemSpec) -> FullState {
    let d = rhs(state.t, &state.to_array(), eps, spec);
    FullState::from_array(&d, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<FullState>,
    pub end: FullState,
    pub steps: usize,
}

/// Integrates from `state0.t` to `t1` (either direction) with local
/// tolerance `tol`, returning the states at `sample_times` by dense output.
pub fn integrate(
    state0: FullState,
    t1: f64,
    eps: f64,
    spec: &SystemSpec,
    tol: f64,
    sample_times: &[f64],
) -> Result<Trajectory> {
    let opts = OdeOptions::with_tol(tol);
    let sol = ode::integrate(|t, y| rhs(t, y, eps, spec), state0.t, state0.to_array(), t1, sample_times, opts)?;
    Ok(Trajectory {
        samples: sol
            .times
            .iter()
            .zip(&sol.states)
            .map(|(&t, y)| FullState::from_array(y, t))
            .collect(),
        end: FullState::from_array(&sol.y_final, sol.t_final),
        steps: sol.accepted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpOptions {
    pub tol: f64,
    /// Shooting horizons, continued in order; the last one is used.
    pub horizons: Vec<f64>,
    pub fd_step: f64,
    pub max_newton: usize,
    /// Largest admissible `p² + 2(1 − cos q)` at the ends of the excursion.
    pub approach_tol: f64,
}

impl Default for JumpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            horizons: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0],
            fd_step: 1e-7,
            max_newton: 30,
            approach_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpMeasurement {
    pub measured: f64,
    pub predicted: f64,
    pub i_minus: f64,
    pub i_plus: f64,
    /// Refined `(p, q)` of the homoclinic point at time `s`.
    pub p: f64,
    pub q: f64,
    pub horizon: f64,
    /// `p² + 2(1 − cos q)` at the two ends, the distance to the cylinder.
    pub end_distance: (f64, f64),
}

// distance from the local branch p = 2 sin(q/2) of the unperturbed separatrix
fn off_separatrix(s: &FullState) -> f64 {
    s.p - 2.0 * (0.5 * s.q).sin()
}

fn nhim_distance(s: &FullState) -> f64 {
    s.p * s.p + 2.0 * (1.0 - s.q.cos())
}

/// Measures `I₊ − I₋` along the homoclinic orbit through `(I, φ)` at time `s`.
///
/// `(p, q)` at time `s` is corrected by Newton shooting so that the orbit
/// lands on the separatrix branch at `s ± T`, continued over the horizons
/// `T`. The asymptotic actions are then obtained by carrying `(I, φ)` from
/// `s ± T` back to time `s` with the dynamics on the cylinder `p = q = 0`.
pub fn measure_scattering_jump(
    i: f64,
    phi: f64,
    s: f64,
    eps: f64,
    rp: &ReducedPoincare,
    opts: &JumpOptions,
) -> Result<JumpMeasurement> {
    let spec = rp.spec();
    let predicted = eps * rp.d_theta(i, phi - i * s)?;
    let z = rp.homoclinic_point(i, phi, s)?;
    let (mut p, mut q) = (z.p, z.q);
    let at = |p: f64, q: f64| FullState {
        p,
        q,
        action: i,
        phi,
        t: s,
    };
    let ends = |p: f64, q: f64, horizon: f64| -> Result<(FullState, FullState)> {
        let fwd = integrate(at(p, q), s + horizon, eps, spec, opts.tol, &[])?.end;
        let bwd = integrate(at(p, q), s - horizon, eps, spec, opts.tol, &[])?.end;
        Ok((fwd, bwd))
    };
    let residual = |p: f64, q: f64, horizon: f64| -> Result<[f64; 2]> {
        let (f, b) = ends(p, q, horizon)?;
        Ok([off_separatrix(&f), off_separatrix(&b)])
    };

    let mut horizon = 0.0;
    for &h_t in &opts.horizons {
        horizon = h_t;
        let mut r = residual(p, q, h_t)?;
        for _ in 0..opts.max_newton {
            let h = opts.fd_step;
            let rp_ = residual(p + h, q, h_t)?;
            let rm_ = residual(p - h, q, h_t)?;
            let rq_ = residual(p, q + h, h_t)?;
            let rn_ = residual(p, q - h, h_t)?;
            let j = [
                [(rp_[0] - rm_[0]) / (2.0 * h), (rq_[0] - rn_[0]) / (2.0 * h)],
                [(rp_[1] - rm_[1]) / (2.0 * h), (rq_[1] - rn_[1]) / (2.0 * h)],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == 0.0 || !det.is_finite() {
                return Err(Error::NoApproach {
                    t_max: h_t,
                    reason: "singular shooting Jacobian".into(),
                });
            }
            let dp = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
            let dq = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
            p -= dp;
            q -= dq;
            r = residual(p, q, h_t)?;
            if dp.abs().max(dq.abs()) < 1e-15 || r[0].abs().max(r[1].abs()) < 1e-14 {
                break;
            }
        }
    }

    let (fwd, bwd) = ends(p, q, horizon)?;
    let end_distance = (nhim_distance(&fwd), nhim_distance(&bwd));
    if end_distance.0.max(end_distance.1) > opts.approach_tol || !end_distance.0.is_finite() {
        return Err(Error::NoApproach {
            t_max: horizon,
            reason: format!("ends at distance {:e}, {:e}", end_distance.0, end_distance.1),
        });
    }
    // carry the asymptotic rotor states back to time s on the cylinder
    let on_cylinder = |st: &FullState| FullState {
        p: 0.0,
        q: 0.0,
        ..*st
    };
    let i_plus = integrate(on_cylinder(&fwd), s, eps, spec, opts.tol, &[])?.end.action;
    let i_minus = integrate(on_cylinder(&bwd), s, eps, spec, opts.tol, &[])?.end.action;
    Ok(JumpMeasurement {
        measured: i_plus - i_minus,
        predicted,
        i_minus,
        i_plus,
        p,
        q,
        horizon,
        end_distance,
    })
}
