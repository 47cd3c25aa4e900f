//! The Melnikov potential
//!
//! ```text
//! L(I, φ, s) = Σ A_{k,l}(I) cos(kφ − ls − σ_{k,l}),   A_{k,l}(I) = 2π x / sinh(πx/2) · a_{k,l},  x = kI − l
//! ```
//!
//! evaluated from its Fourier series (with a certified truncation), term by
//! term differentiated, and independently by quadrature along the separatrix.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::quad::{self, QuadOptions, QuadResult};
use crate::pendulum::separatrix;
use crate::system::{Harmonic, SystemSpec};

const C: f64 = FRAC_PI_2;

/// `x / sinh(πx/2)`, with the removable singularity at 0 handled by Taylor
/// expansion for `|x| < 1e−6`.
pub fn sinhc(x: f64) -> f64 {
    let y = C * x;
    if x.abs() < 1e-6 {
        let y2 = y * y;
        (1.0 - y2 / 6.0 + 7.0 * y2 * y2 / 360.0 - 31.0 * y2 * y2 * y2 / 15120.0) / C
    } else {
        x / y.sinh()
    }
}

/// Derivative of [`sinhc`]. The closed form cancels badly near 0, so a
/// series takes over for `|x| < 1e−2`.
pub fn sinhc_prime(x: f64) -> f64 {
    let y = C * x;
    if x.abs() < 1e-2 {
        let y2 = y * y;
        // d/dx of the series above, carried two terms further
        y * (-1.0 / 3.0 + 7.0 * y2 / 90.0 - 31.0 * y2 * y2 / 2520.0 + 127.0 * y2 * y2 * y2 / 75600.0)
    } else {
        let sh = y.sinh();
        (sh - y * y.cosh()) / (sh * sh)
    }
}

/// `A_{k,l}(I)` for a given amplitude `a`.
pub fn amplitude(k: u32, l: u32, i: f64, a: f64) -> f64 {
    TAU * sinhc(k as f64 * i - l as f64) * a
}

/// `dA_{k,l}/dI`.
pub fn amplitude_prime(k: u32, l: u32, i: f64, a: f64) -> f64 {
    TAU * k as f64 * sinhc_prime(k as f64 * i - l as f64) * a
}

/// `A_{k,l}(I)` for the spec's coefficient; zero for an absent harmonic.
pub fn melnikov_coefficient(k: u32, l: u32, i: f64, spec: &SystemSpec) -> f64 {
    spec.harmonic(k, l).map_or(0.0, |h| amplitude(k, l, i, h.a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub tail_tol: f64,
    /// Hard cap on `k + l`.
    pub k_max: u32,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            tail_tol: 1e-12,
            k_max: 64,
        }
    }
}

/// Value and derivatives of L at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub l: f64,
    pub l_i: f64,
    pub l_phi: f64,
    pub l_s: f64,
    pub l_pp: f64,
    pub l_ps: f64,
    pub l_ss: f64,
    pub l_pi: f64,
    pub l_si: f64,
}

impl Jet {
    /// `I ∂L/∂φ + ∂L/∂s`, zero on the crests.
    pub fn crest_residual(&self, i: f64) -> f64 {
        i * self.l_phi + self.l_s
    }

    /// Second derivative of `τ ↦ L(I, φ − Iτ, s − τ)`.
    pub fn line_curvature(&self, i: f64) -> f64 {
        i * i * self.l_pp + 2.0 * i * self.l_ps + self.l_ss
    }
}

#[derive(Debug, Clone, Copy)]
struct SliceTerm {
    k: f64,
    l: f64,
    sigma: f64,
    amp: f64,
    damp: f64,
}

/// The series with the amplitudes frozen at one action value.
#[derive(Debug, Clone)]
pub struct ActionSlice {
    pub action: f64,
    terms: Vec<SliceTerm>,
}

impl ActionSlice {
    pub fn potential(&self, phi: f64, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amp * (t.k * phi - t.l * s - t.sigma).cos())
            .sum()
    }

    pub fn jet(&self, phi: f64, s: f64) -> Jet {
        let mut j = Jet::default();
        for t in &self.terms {
            let (sn, cs) = (t.k * phi - t.l * s - t.sigma).sin_cos();
            j.l += t.amp * cs;
            j.l_i += t.damp * cs;
            j.l_phi -= t.amp * t.k * sn;
            j.l_s += t.amp * t.l * sn;
            j.l_pp -= t.amp * t.k * t.k * cs;
            j.l_ps += t.amp * t.k * t.l * cs;
            j.l_ss -= t.amp * t.l * t.l * cs;
            j.l_pi -= t.damp * t.k * sn;
            j.l_si += t.damp * t.l * sn;
        }
        j
    }

    /// `I L_φ + L_s` and its `s`-derivative.
    pub fn crest_residual(&self, phi: f64, s: f64) -> (f64, f64) {
        let i = self.action;
        let (mut r, mut dr) = (0.0, 0.0);
        for t in &self.terms {
            let (sn, cs) = (t.k * phi - t.l * s - t.sigma).sin_cos();
            let w = i * t.k - t.l;
            r -= t.amp * w * sn;
            dr += t.amp * w * t.l * cs;
        }
        (r, dr)
    }
}

#[derive(Debug, Clone)]
pub struct MelnikovSeries {
    terms: Vec<Harmonic>,
    truncation: Truncation,
    tail_bound: f64,
}

impl MelnikovSeries {
    pub fn new(spec: &SystemSpec) -> Self {
        Self::with_truncation(spec, Truncation::default())
    }

    /// Keeps harmonics with `k + l < n`, where `n` is the first order whose
    /// envelope tail `Σ_{m≥n} 4α(m+1)q^m` (`q = max(ρ, r)`) is below the
    /// tolerance, capped at `k_max + 1`. Fixtures are never truncated.
    pub fn with_truncation(spec: &SystemSpec, truncation: Truncation) -> Self {
        let (cut, tail) = match spec.decay {
            Some(d) if !spec.fixture && d.rho.max(d.r) < 1.0 => {
                let q = d.rho.max(d.r);
                let bound = |n: u32| {
                    let n = n as f64;
                    4.0 * d.alpha * q.powf(n) * (1.0 + n * (1.0 - q)) / ((1.0 - q) * (1.0 - q))
                };
                let mut n = 0;
                while n <= truncation.k_max && bound(n) >= truncation.tail_tol {
                    n += 1;
                }
                (n, bound(n))
            }
            _ => (u32::MAX, 0.0),
        };
        let terms = spec
            .harmonics()
            .iter()
            .filter(|h| h.a != 0.0 && h.k.saturating_add(h.l) < cut)
            .copied()
            .collect();
        Self {
            terms,
            truncation,
            tail_bound: tail,
        }
    }

    /// Only the harmonics (0,0), (1,0), (0,1).
    pub fn first_order(spec: &SystemSpec) -> Self {
        let terms = spec
            .harmonics()
            .iter()
            .filter(|h| h.k + h.l <= 1 && h.a != 0.0)
            .copied()
            .collect();
        Self {
            terms,
            truncation: Truncation::default(),
            tail_bound: 0.0,
        }
    }

    pub fn terms(&self) -> &[Harmonic] {
        &self.terms
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Rigorous bound on the discarded part of the series.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn slice(&self, i: f64) -> ActionSlice {
        ActionSlice {
            action: i,
            terms: self
                .terms
                .iter()
                .map(|h| SliceTerm {
                    k: h.k as f64,
                    l: h.l as f64,
                    sigma: h.sigma,
                    amp: amplitude(h.k, h.l, i, h.a),
                    damp: amplitude_prime(h.k, h.l, i, h.a),
                })
                .collect(),
        }
    }

    pub fn potential(&self, i: f64, phi: f64, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|h| amplitude(h.k, h.l, i, h.a) * h.phase(phi, s).cos())
            .sum()
    }

    /// `L(I, φ − Iτ, s − τ) = Σ A cos(kφ − ls − σ − τ(kI − l))`.
    pub fn along_line(&self, i: f64, phi: f64, s: f64, tau: f64) -> f64 {
        self.terms
            .iter()
            .map(|h| {
                let w = h.k as f64 * i - h.l as f64;
                amplitude(h.k, h.l, i, h.a) * (h.phase(phi, s) - tau * w).cos()
            })
            .sum()
    }

    /// `(∂L/∂I, ∂L/∂φ, ∂L/∂s)`.
    pub fn gradient(&self, i: f64, phi: f64, s: f64) -> (f64, f64, f64) {
        let j = self.jet(i, phi, s);
        (j.l_i, j.l_phi, j.l_s)
    }

    pub fn jet(&self, i: f64, phi: f64, s: f64) -> Jet {
        self.slice(i).jet(phi, s)
    }
}

/// Integration half-width: the `sech²` tail `8 max|g| e^{−2Σ}` stays below 1e−12.
pub fn quadrature_half_width(spec: &SystemSpec) -> f64 {
    let g = spec.g_bound().max(1e-300);
    (0.5 * (8.0 * g / 1e-12).ln()).max(15.0)
}

/// `(1/2) ∫ p₀(σ)² g(φ + Iσ, s + σ) dσ` by adaptive Gauss–Kronrod.
pub fn melnikov_quadrature(spec: &SystemSpec, i: f64, phi: f64, s: f64) -> Result<QuadResult> {
    let w = quadrature_half_width(spec);
    let f = |sigma: f64| {
        let p = separatrix(sigma).p;
        0.5 * p * p * spec.g(phi + i * sigma, s + sigma)
    };
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 20_000,
    };
    // unit panels give the adaptive splitter a sensible start
    let n = (2.0 * w).ceil() as usize;
    let h = 2.0 * w / n as f64;
    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
    };
    for j in 0..n {
        let a = -w + h * j as f64;
        let panel_opts = QuadOptions {
            abs_tol: opts.abs_tol / n as f64,
            ..opts
        };
        let r = quad::integrate(f, a, a + h, panel_opts)?;
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    Ok(total)
}
