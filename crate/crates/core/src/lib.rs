//! Geometric mechanism of Arnold diffusion for the a priori unstable system
//!
//! ```text
//! H_ε(p, q, I, φ, t) = p²/2 + cos q − 1 + I²/2 + ε cos q · g(φ, t),
//! g(φ, t) = Σ a_{k,l} cos(kφ − lt − σ_{k,l})
//! ```
//!
//! From the Fourier data of `g` the crate computes the Melnikov potential,
//! its crests, the reduced Poincaré function and the scattering map on the
//! invariant cylinder `p = q = 0`, the tori of the averaged inner dynamics,
//! and transition chains of tori with transverse heteroclinic jumps. An
//! integrator for the full system checks the scattering map directly.
//!
//! ```
//! use arnold_chain::{ReducedPoincare, SystemSpec};
//!
//! let spec = SystemSpec::figure2();
//! let rp = ReducedPoincare::new(&spec);
//! // at I = 0 the reduced Poincaré function is 4 + cos θ + π / sinh(π/2)
//! let v = rp.value(0.0, 0.0).unwrap();
//! assert!((v - (5.0 + std::f64::consts::PI / std::f64::consts::FRAC_PI_2.sinh())).abs() < 1e-12);
//! ```

pub mod chain;
pub mod crest;
pub mod error;
pub mod flow;
pub mod inner;
pub mod melnikov;
pub mod numerics;
pub mod pendulum;
pub mod scattering;
pub mod system;

pub use chain::{build_chain, emit_pseudo_orbit, ChainLink, ChainOptions, TransitionChain};
pub use crest::{build_crest, tau_star, CrestCurve, CrestKind};
pub use error::{Error, Result};
pub use flow::{measure_scattering_jump, FullState};
pub use inner::{classify_resonance, torus_level_set, Region, ResonanceRegion, TorusLevelSet};
pub use melnikov::MelnikovSeries;
pub use pendulum::{pendulum_energy, separatrix, PendulumState};
pub use scattering::ReducedPoincare;
pub use system::{validate_spec, SystemSpec, ValidationReport};
