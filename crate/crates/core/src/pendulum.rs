//! The unperturbed pendulum `p²/2 + cos q − 1` and its upper separatrix.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    pub p: f64,
    pub q: f64,
}

pub fn pendulum_energy(state: PendulumState) -> f64 {
    0.5 * state.p * state.p + state.q.cos() - 1.0
}

/// `(p₀(τ), q₀(τ)) = (2/cosh τ, 4 arctan e^τ)`.
///
/// `q₀` is returned in `(0, 2π)` without range reduction.
pub fn separatrix(tau: f64) -> PendulumState {
    PendulumState {
        p: 2.0 / tau.cosh(),
        q: 4.0 * tau.exp().atan(),
    }
}
