//! Crests: the curves `s = ξ(φ)` where lines of direction `(I, 1)` in the
//! `(φ, s)` torus are tangent to the level sets of `L(I, ·, ·)`, i.e.
//! `I ∂L/∂φ + ∂L/∂s = 0`. `C_M` passes through the maximum of L and `C_m`
//! through the minimum.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::melnikov::{ActionSlice, MelnikovSeries};
use crate::numerics::roots::{self, RootOptions};
use crate::numerics::wrap_angle;
use crate::system::{h2, SystemSpec};

pub const DEFAULT_SAMPLES: usize = 512;
const RESIDUAL_TOL: f64 = 1e-10;

/// `α(I) = sinh(π/2) I² / sinh(πI/2) · a₁₀ / a₀₁`.
pub fn alpha(i: f64, spec: &SystemSpec) -> Result<f64> {
    let a01 = spec.coefficient(0, 1);
    if a01 == 0.0 {
        return Err(Error::ZeroA01);
    }
    Ok(h2(i) * spec.coefficient(1, 0) / a01)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrestKind {
    /// Through the maximum of L: `ξ_M ≈ −arcsin(α sin φ)`.
    Max,
    /// Through the minimum: `ξ_m ≈ π + arcsin(α sin φ)`.
    Min,
}

impl CrestKind {
    fn seed(self, alpha: f64, phi: f64) -> f64 {
        let a = (alpha * phi.sin()).clamp(-1.0, 1.0).asin();
        match self {
            CrestKind::Max => -a,
            CrestKind::Min => PI + a,
        }
    }
}

/// A crest tabulated on a uniform periodic φ-grid, with exact slopes, and
/// interpolated by cubic Hermite polynomials.
#[derive(Debug, Clone)]
pub struct CrestCurve {
    pub action: f64,
    pub kind: CrestKind,
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    /// Largest `|I L_φ + L_s|` over the samples.
    pub max_residual: f64,
    slice: ActionSlice,
}

/// Solves the crest equation for every φ of a `n`-point grid, seeding each
/// Newton solve with the first-order closed form.
pub fn build_crest(i: f64, kind: CrestKind, ms: &MelnikovSeries, spec: &SystemSpec) -> Result<CrestCurve> {
    build_crest_n(i, kind, ms, spec, DEFAULT_SAMPLES)
}

pub fn build_crest_n(i: f64, kind: CrestKind, ms: &MelnikovSeries, spec: &SystemSpec, n: usize) -> Result<CrestCurve> {
    let a = alpha(i, spec)?;
    if a.abs() >= 1.0 {
        return Err(Error::UnsupportedBranch { action: i, alpha: a.abs() });
    }
    let slice = ms.slice(i);
    let mut phis = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    let mut max_residual: f64 = 0.0;
    for j in 0..n {
        let phi = TAU * j as f64 / n as f64;
        let s = solve_crest_point(&slice, kind, a, phi)?;
        let jet = slice.jet(phi, s);
        let r_phi = i * jet.l_pp + jet.l_ps;
        let r_s = i * jet.l_ps + jet.l_ss;
        max_residual = max_residual.max(jet.crest_residual(i).abs());
        phis.push(phi);
        values.push(s);
        slopes.push(-r_phi / r_s);
    }
    Ok(CrestCurve {
        action: i,
        kind,
        phis,
        values,
        slopes,
        max_residual,
        slice,
    })
}

fn solve_crest_point(slice: &ActionSlice, kind: CrestKind, alpha: f64, phi: f64) -> Result<f64> {
    let s0 = kind.seed(alpha, phi);
    let fail = |reason: String| Error::CrestFailure {
        action: slice.action,
        phi,
        reason,
    };
    let f = |s: f64| slice.crest_residual(phi, s).0;
    let (lo, hi) = roots::expand_bracket(f, s0, 1e-3, 30).ok_or_else(|| fail("no sign change near the seed".into()))?;
    let opts = RootOptions {
        x_tol: 1e-15,
        f_tol: 0.0,
        max_iter: 100,
    };
    let s = roots::newton_bracketed(|s| slice.crest_residual(phi, s), lo, hi, s0, opts).map_err(|e| fail(e.to_string()))?;
    let r = f(s);
    if r.abs() > RESIDUAL_TOL {
        return Err(fail(format!("residual {r:e} above {RESIDUAL_TOL:e}")));
    }
    Ok(s)
}

impl CrestCurve {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    fn locate(&self, phi: f64) -> (usize, f64, f64) {
        let n = self.phis.len();
        let h = TAU / n as f64;
        let x = wrap_angle(phi) / h;
        let j = (x.floor() as usize).min(n - 1);
        (j, x - j as f64, h)
    }

    /// `ξ(φ)` from the Hermite table.
    pub fn eval(&self, phi: f64) -> f64 {
        let (j, t, h) = self.locate(phi);
        let k = (j + 1) % self.phis.len();
        let (y0, y1) = (self.values[j], self.values[k]);
        let (m0, m1) = (self.slopes[j] * h, self.slopes[k] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    /// `ξ'(φ)` from the Hermite table.
    pub fn derivative(&self, phi: f64) -> f64 {
        let (j, t, h) = self.locate(phi);
        let k = (j + 1) % self.phis.len();
        let (y0, y1) = (self.values[j], self.values[k]);
        let (m0, m1) = (self.slopes[j] * h, self.slopes[k] * h);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h
    }

    /// Re-solves the crest equation at `phi`, seeded by the table.
    pub fn refine(&self, phi: f64) -> Result<f64> {
        let s0 = self.eval(phi);
        let f = |s: f64| self.slice.crest_residual(phi, s).0;
        let (lo, hi) = roots::expand_bracket(f, s0, 1e-6, 40).ok_or_else(|| Error::CrestFailure {
            action: self.action,
            phi,
            reason: "lost the crest while refining".into(),
        })?;
        roots::newton_bracketed(|s| self.slice.crest_residual(phi, s), lo, hi, s0, RootOptions::default())
    }

    pub fn residual(&self, phi: f64, s: f64) -> f64 {
        self.slice.crest_residual(phi, s).0
    }

    pub fn slice(&self) -> &ActionSlice {
        &self.slice
    }
}

/// `min_φ (1 − I ξ_M'(φ)) / |I|`: positive iff every line of direction
/// `(I, 1)` crosses the crest transversally. Infinite at `I = 0`.
pub fn transversality_margin(crest: &CrestCurve) -> f64 {
    let i = crest.action;
    if i == 0.0 {
        return f64::INFINITY;
    }
    crest
        .slopes
        .iter()
        .map(|&d| (1.0 - i * d) / i.abs())
        .fold(f64::INFINITY, f64::min)
}

/// `ξ_m(φ) − 2π < s < ξ_m(φ)`.
pub fn in_domain_h(crest_min: &CrestCurve, phi: f64, s: f64) -> bool {
    let xm = crest_min.eval(phi);
    xm - TAU < s && s < xm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    pub tau: f64,
    /// Sign changes found in the scan window; one under transversality.
    pub crossings: usize,
    /// Two crossings at the same `|τ|`; the smaller τ was taken.
    pub tie: bool,
    /// `d²/dτ² L(I, φ − Iτ, s − τ)` at τ*.
    pub curvature: f64,
    /// `|I L_φ + L_s|` at the returned crest point.
    pub residual: f64,
}

const SCAN_SAMPLES: usize = 64;

/// The τ of minimal `|τ|` at which the line `(φ − Iτ, s − τ)` meets `C_M`,
/// searched over the window where the line stays in the domain H.
pub fn tau_star(i: f64, phi: f64, s: f64, crest_max: &CrestCurve, crest_min: &CrestCurve) -> Result<TauStar> {
    if !in_domain_h(crest_min, phi, s) {
        return Err(Error::OutsideDomain { action: i, phi, s });
    }
    let no_crossing = || Error::NoCrossing { action: i, phi, s };
    let g = |tau: f64| s - tau - crest_max.eval(phi - i * tau);
    let upper = |tau: f64| s - tau - crest_min.eval(phi - i * tau);
    let lower = |tau: f64| upper(tau) + TAU;

    // upper(0) < 0 < lower(0); both decrease in τ under transversality
    let t_lo = boundary_root(upper, -1.0).ok_or_else(no_crossing)?;
    let t_hi = boundary_root(lower, 1.0).ok_or_else(no_crossing)?;

    let grid = crate::numerics::linspace(t_lo, t_hi, SCAN_SAMPLES);
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let brackets = roots::sign_changes(&grid, &vals);
    if brackets.is_empty() {
        return Err(no_crossing());
    }
    let mut found: Vec<f64> = Vec::with_capacity(brackets.len());
    for (a, b) in &brackets {
        found.push(roots::brent(g, *a, *b, RootOptions::default())?);
    }
    found.sort_by(|x, y| x.abs().total_cmp(&y.abs()).then(x.total_cmp(y)));
    let tie = found.len() > 1 && (found[0].abs() - found[1].abs()).abs() < 1e-12;
    let seed = found[0];

    // polish on the exact crest equation along the line
    let slice = crest_max.slice();
    let rho = |tau: f64| {
        let j = slice.jet(phi - i * tau, s - tau);
        (j.crest_residual(i), -j.line_curvature(i))
    };
    let f = |tau: f64| rho(tau).0;
    let tau = match roots::expand_bracket(f, seed, 1e-8, 40) {
        Some((a, b)) => roots::newton_bracketed(rho, a, b, seed, RootOptions::default())?,
        None => seed,
    };
    let jet = slice.jet(phi - i * tau, s - tau);
    let curvature = jet.line_curvature(i);
    if curvature.abs() < 1e-8 {
        log::warn!("degenerate crest crossing at I = {i}, phi = {phi}, s = {s}: curvature {curvature:e}");
    }
    Ok(TauStar {
        tau,
        crossings: brackets.len(),
        tie,
        curvature,
        residual: jet.crest_residual(i).abs(),
    })
}

fn boundary_root<F: Fn(f64) -> f64>(f: F, dir: f64) -> Option<f64> {
    let mut a = 0.0;
    let mut step = 0.5;
    let fa0 = f(0.0);
    for _ in 0..60 {
        let b = a + dir * step;
        if (f(b) > 0.0) != (fa0 > 0.0) {
            return roots::brent(&f, a, b, RootOptions::default()).ok();
        }
        a = b;
        step *= 1.5;
    }
    None
}
