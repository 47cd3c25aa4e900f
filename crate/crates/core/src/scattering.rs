//! Reduced Poincaré function `L*(I, θ̃) = L(I, θ̃ − Iτ*, −τ*)` with
//! `τ* = τ*(I, θ̃, 0)`, and the first-order scattering map it generates.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::crest::{build_crest, in_domain_h, tau_star, CrestCurve, CrestKind, TauStar};
use crate::error::{Error, Result};
use crate::melnikov::{Jet, MelnikovSeries};
use crate::pendulum::separatrix;
use crate::system::SystemSpec;

const CACHE_CAPACITY: usize = 256;
const JACOBIAN_FLOOR: f64 = 1e-8;
const FD_STEP: f64 = 1e-6;

#[derive(Debug)]
pub struct CrestPair {
    pub max: CrestCurve,
    pub min: CrestCurve,
}

/// Value and first partials of L* at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedValue {
    pub value: f64,
    pub d_theta: f64,
    pub d_action: f64,
    pub tau: f64,
}

#[derive(Debug)]
pub struct ReducedPoincare {
    spec: SystemSpec,
    series: MelnikovSeries,
    cache: RwLock<HashMap<u64, Arc<CrestPair>>>,
}

impl Clone for ReducedPoincare {
    fn clone(&self) -> Self {
        Self::with_series(self.spec.clone(), self.series.clone())
    }
}

impl ReducedPoincare {
    pub fn new(spec: &SystemSpec) -> Self {
        Self::with_series(spec.clone(), MelnikovSeries::new(spec))
    }

    pub fn with_series(spec: SystemSpec, series: MelnikovSeries) -> Self {
        Self {
            spec,
            series,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn series(&self) -> &MelnikovSeries {
        &self.series
    }

    /// Both crests at `i`, built once and cached.
    pub fn crests(&self, i: f64) -> Result<Arc<CrestPair>> {
        let key = i.to_bits();
        if let Some(c) = self.cache.read().expect("crest cache poisoned").get(&key) {
            return Ok(Arc::clone(c));
        }
        let pair = Arc::new(CrestPair {
            max: build_crest(i, CrestKind::Max, &self.series, &self.spec)?,
            min: build_crest(i, CrestKind::Min, &self.series, &self.spec)?,
        });
        let mut w = self.cache.write().expect("crest cache poisoned");
        if w.len() >= CACHE_CAPACITY {
            w.clear();
        }
        Ok(Arc::clone(w.entry(key).or_insert(pair)))
    }

    pub fn tau_star(&self, i: f64, phi: f64, s: f64) -> Result<TauStar> {
        let c = self.crests(i)?;
        tau_star(i, phi, s, &c.max, &c.min)
    }

    pub fn in_domain(&self, i: f64, phi: f64, s: f64) -> Result<bool> {
        Ok(in_domain_h(&self.crests(i)?.min, phi, s))
    }

    /// `L*(I, θ̃)`.
    pub fn value(&self, i: f64, theta: f64) -> Result<f64> {
        let t = self.tau_star(i, theta, 0.0)?.tau;
        Ok(self.series.slice(i).potential(theta - i * t, -t))
    }

    /// `L*` and its partials. At the crest point `c` the residual
    /// `R = I L_φ + L_s` vanishes, and
    /// `∂L*/∂θ̃ = L_φ − τ_θ R`, `∂L*/∂I = L_I − τ* L_φ − τ_I R`,
    /// with `τ_θ`, `τ_I` from the implicit-function theorem.
    pub fn evaluate(&self, i: f64, theta: f64) -> Result<ReducedValue> {
        let ts = self.tau_star(i, theta, 0.0)?;
        let tau = ts.tau;
        let jet = self.series.jet(i, theta - i * tau, -tau);
        let r = jet.crest_residual(i);
        let r_tau = -jet.line_curvature(i);
        if r_tau.abs() < JACOBIAN_FLOOR {
            log::warn!("near-critical tau* Jacobian {r_tau:e} at (I, theta) = ({i}, {theta}); using finite differences");
            return self.evaluate_fd(i, theta, jet.l, tau);
        }
        let (tau_theta, tau_i) = implicit_tau_derivatives(&jet, i, tau, r_tau);
        Ok(ReducedValue {
            value: jet.l,
            d_theta: jet.l_phi - tau_theta * r,
            d_action: jet.l_i - tau * jet.l_phi - tau_i * r,
            tau,
        })
    }

    fn evaluate_fd(&self, i: f64, theta: f64, value: f64, tau: f64) -> Result<ReducedValue> {
        let h = FD_STEP;
        let d_theta = (self.value(i, theta + h)? - self.value(i, theta - h)?) / (2.0 * h);
        let d_action = (self.value(i + h, theta)? - self.value(i - h, theta)?) / (2.0 * h);
        Ok(ReducedValue {
            value,
            d_theta,
            d_action,
            tau,
        })
    }

    pub fn d_theta(&self, i: f64, theta: f64) -> Result<f64> {
        Ok(self.evaluate(i, theta)?.d_theta)
    }

    pub fn d_action(&self, i: f64, theta: f64) -> Result<f64> {
        Ok(self.evaluate(i, theta)?.d_action)
    }

    /// First-order scattering map: with `θ̃ = φ − Is`,
    /// `I' = I + ε ∂L*/∂θ̃`, `θ̃' = θ̃ − ε ∂L*/∂I`, `φ' = θ̃' + I's`.
    pub fn scattering_map(&self, i: f64, phi: f64, s: f64, eps: f64) -> Result<(f64, f64, f64)> {
        if !self.in_domain(i, phi, s)? {
            return Err(Error::OutsideDomain { action: i, phi, s });
        }
        let theta = phi - i * s;
        let (i2, theta2) = self.reduced_map(i, theta, eps)?;
        Ok((i2, theta2 + i2 * s, s))
    }

    /// The map in reduced variables `(I, θ̃) ↦ (I', θ̃')`.
    pub fn reduced_map(&self, i: f64, theta: f64, eps: f64) -> Result<(f64, f64)> {
        if eps == 0.0 {
            return Ok((i, theta));
        }
        let v = self.evaluate(i, theta)?;
        Ok((i + eps * v.d_theta, theta - eps * v.d_action))
    }

    /// Leading-order homoclinic point `(p₀(τ*), q₀(τ*), I, φ, s)`.
    pub fn homoclinic_point(&self, i: f64, phi: f64, s: f64) -> Result<HomoclinicPoint> {
        let ts = self.tau_star(i, phi, s)?;
        let sep = separatrix(ts.tau);
        Ok(HomoclinicPoint {
            p: sep.p,
            q: sep.q,
            action: i,
            phi,
            s,
            tau: ts.tau,
        })
    }
}

/// `τ_θ = −R_φ / R_τ` and `τ_I = −R_I / R_τ` for `R(τ) = R(I, θ̃ − Iτ, −τ)`.
fn implicit_tau_derivatives(jet: &Jet, i: f64, tau: f64, r_tau: f64) -> (f64, f64) {
    let r_phi = i * jet.l_pp + jet.l_ps;
    // explicit I-dependence: amplitudes, the I in R, and the shift −Iτ in φ
    let r_i = jet.l_phi + i * jet.l_pi + jet.l_si - tau * r_phi;
    (-r_phi / r_tau, -r_i / r_tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicPoint {
    pub p: f64,
    pub q: f64,
    pub action: f64,
    pub phi: f64,
    pub s: f64,
    pub tau: f64,
}
