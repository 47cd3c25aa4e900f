//! Problem specification: the Fourier data of the perturbation
//! `g(φ, t) = Σ a_{k,l} cos(kφ − lt − σ_{k,l})`, its decay envelope, ε and
//! the action window, plus the hypotheses checked before anything else runs.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::optimize::scan_max;

/// Upper bound for `max_I |h₂(I)|`, used to keep `|α(I)| < 1`.
pub const ENVELOPE_C2: f64 = 1.03;
/// Upper bound for `max_I |h₃(I)|`, the constant in the hypothesis on λ.
pub const ENVELOPE_C3: f64 = 1.6;
/// Largest admissible λ = |a₁₀/a₀₁|.
pub const LAMBDA_MAX: f64 = 1.0 / ENVELOPE_C3;
pub const I_MINUS_STAR: f64 = -0.5;

/// One harmonic `a cos(kφ − lt − σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    pub l: u32,
    pub a: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl Harmonic {
    pub fn new(k: u32, l: u32, a: f64, sigma: f64) -> Self {
        Self { k, l, a, sigma }
    }

    #[inline]
    pub fn phase(&self, phi: f64, t: f64) -> f64 {
        self.k as f64 * phi - self.l as f64 * t - self.sigma
    }
}

/// Decay envelope `α̂ ρ^{βk} r^{βl} ≤ |a_{k,l}| ≤ α ρ^k r^l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub alpha_hat: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub r: f64,
}

impl Decay {
    pub fn upper(&self, k: u32, l: u32) -> f64 {
        self.alpha * self.rho.powi(k as i32) * self.r.powi(l as i32)
    }

    pub fn lower(&self, k: u32, l: u32) -> f64 {
        self.alpha_hat * self.rho.powf(self.beta * k as f64) * self.r.powf(self.beta * l as f64)
    }
}

/// Translation `(φ, t) → (φ + Δφ, t + Δt)` applied when normalizing
/// σ₁₀ = σ₀₁ = 0, and the harmonics whose sign was folded into σ.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseShift {
    pub dphi: f64,
    pub dt: f64,
    pub sign_folded: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    harmonics: Vec<Harmonic>,
    pub decay: Option<Decay>,
    pub epsilon: f64,
    pub i_minus_star: f64,
    pub i_plus_star: f64,
    /// +1 only; −1 is representable so that validation can reject it.
    pub pendulum_sign: i8,
    /// Finite trigonometric polynomial: the envelope check is skipped.
    pub fixture: bool,
    pub shift: PhaseShift,
}

impl SystemSpec {
    /// Builds a spec from explicit harmonics. Duplicate `(k, l)` are an error.
    pub fn new(harmonics: Vec<Harmonic>, decay: Option<Decay>, epsilon: f64, i_plus_star: f64) -> Result<Self> {
        let mut map = BTreeMap::new();
        for h in harmonics {
            if !h.a.is_finite() || !h.sigma.is_finite() {
                return Err(Error::Config(format!("non-finite coefficient at ({}, {})", h.k, h.l)));
            }
            if map.insert((h.k, h.l), h).is_some() {
                return Err(Error::Config(format!("duplicate harmonic ({}, {})", h.k, h.l)));
            }
        }
        Ok(Self {
            harmonics: map.into_values().collect(),
            decay,
            epsilon,
            i_minus_star: I_MINUS_STAR,
            i_plus_star,
            pendulum_sign: 1,
            fixture: decay.is_none(),
            shift: PhaseShift::default(),
        })
    }

    /// The three-harmonic system `g = 1 + cos φ / 4 + cos t / 2`.
    pub fn figure2() -> Self {
        let h = vec![
            Harmonic::new(0, 0, 1.0, 0.0),
            Harmonic::new(1, 0, 0.25, 0.0),
            Harmonic::new(0, 1, 0.5, 0.0),
        ];
        let mut s = Self::new(h, None, 1e-3, 2.0).expect("static fixture");
        s.fixture = true;
        s
    }

    /// Fills `a_{k,l} = ±α̂ ρ^{βk} r^{βl}` for `k + l ≤ k_max`; entries of
    /// `overrides` replace generated ones. Harmonics that underflow are dropped.
    pub fn generated(
        decay: Decay,
        k_max: u32,
        negative: &[(u32, u32)],
        overrides: &[Harmonic],
        epsilon: f64,
        i_plus_star: f64,
    ) -> Result<Self> {
        let mut map: BTreeMap<(u32, u32), Harmonic> = BTreeMap::new();
        for n in 0..=k_max {
            for k in 0..=n {
                let l = n - k;
                let mut a = decay.lower(k, l);
                if a == 0.0 {
                    continue;
                }
                if negative.contains(&(k, l)) {
                    a = -a;
                }
                map.insert((k, l), Harmonic::new(k, l, a, 0.0));
            }
        }
        for h in overrides {
            map.insert((h.k, h.l), *h);
        }
        let mut s = Self::new(map.into_values().collect(), Some(decay), epsilon, i_plus_star)?;
        s.fixture = false;
        Ok(s)
    }

    pub fn harmonics(&self) -> &[Harmonic] {
        &self.harmonics
    }

    pub fn harmonic(&self, k: u32, l: u32) -> Option<&Harmonic> {
        self.harmonics
            .binary_search_by(|h| (h.k, h.l).cmp(&(k, l)))
            .ok()
            .map(|i| &self.harmonics[i])
    }

    /// `a_{k,l}`, zero when absent.
    pub fn coefficient(&self, k: u32, l: u32) -> f64 {
        self.harmonic(k, l).map_or(0.0, |h| h.a)
    }

    pub fn g(&self, phi: f64, t: f64) -> f64 {
        self.harmonics.iter().map(|h| h.a * h.phase(phi, t).cos()).sum()
    }

    pub fn g_phi(&self, phi: f64, t: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| -h.a * h.k as f64 * h.phase(phi, t).sin())
            .sum()
    }

    pub fn g_t(&self, phi: f64, t: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.a * h.l as f64 * h.phase(phi, t).sin())
            .sum()
    }

    /// `Σ |a_{k,l}|`, a bound for `max |g|`.
    pub fn g_bound(&self) -> f64 {
        self.harmonics.iter().map(|h| h.a.abs()).sum()
    }

    /// Folds negative `a₁₀`, `a₀₁` into `σ + π`, then translates `(φ, t)` so
    /// that `σ₁₀ = σ₀₁ = 0`. The translation is recorded in `shift`:
    /// `g_new(φ, t) = g_old(φ + Δφ, t + Δt)`.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        let mut folded = Vec::new();
        for h in out.harmonics.iter_mut() {
            if ((h.k, h.l) == (1, 0) || (h.k, h.l) == (0, 1)) && h.a < 0.0 {
                h.a = -h.a;
                h.sigma += PI;
                folded.push((h.k, h.l));
            }
        }
        let dphi = out.harmonic(1, 0).map_or(0.0, |h| h.sigma);
        let dt = -out.harmonic(0, 1).map_or(0.0, |h| h.sigma);
        for h in out.harmonics.iter_mut() {
            let s = h.sigma - h.k as f64 * dphi + h.l as f64 * dt;
            // keep σ in (−π, π]
            let w = s.rem_euclid(TAU);
            h.sigma = if w > PI { w - TAU } else { w };
        }
        out.shift = PhaseShift {
            dphi: self.shift.dphi + dphi,
            dt: self.shift.dt + dt,
            sign_folded: [self.shift.sign_folded.clone(), folded].concat(),
        };
        out
    }

    pub fn is_normalized(&self) -> bool {
        let ok = |k, l| self.harmonic(k, l).is_none_or(|h| h.sigma.abs() < 1e-15 && h.a >= 0.0);
        ok(1, 0) && ok(0, 1)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SpecConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.build()
    }
}

/// JSON configuration document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    #[serde(default)]
    pub coefficients: Vec<Harmonic>,
    #[serde(default)]
    pub decay: Option<Decay>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(rename = "I_plus_star", default = "default_i_plus")]
    pub i_plus_star: f64,
    #[serde(rename = "I_minus_star", default)]
    pub i_minus_star: Option<f64>,
    #[serde(default)]
    pub fixture: bool,
    #[serde(default)]
    pub pendulum_sign: Option<i8>,
    #[serde(default)]
    pub generate: Option<GenerateConfig>,
}

fn default_i_plus() -> f64 {
    2.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub k_max: u32,
    /// `(k, l)` pairs that get a negative sign.
    #[serde(default)]
    pub negative: Vec<(u32, u32)>,
}

impl SpecConfig {
    pub fn build(&self) -> Result<SystemSpec> {
        let mut spec = match &self.generate {
            Some(g) => {
                let decay = self
                    .decay
                    .ok_or_else(|| Error::Config("`generate` needs `decay`".into()))?;
                SystemSpec::generated(decay, g.k_max, &g.negative, &self.coefficients, self.epsilon, self.i_plus_star)?
            }
            None => SystemSpec::new(self.coefficients.clone(), self.decay, self.epsilon, self.i_plus_star)?,
        };
        spec.fixture = self.fixture;
        if let Some(m) = self.i_minus_star {
            spec.i_minus_star = m;
        }
        if let Some(sg) = self.pendulum_sign {
            spec.pendulum_sign = sg;
        }
        Ok(spec.normalized())
    }

    pub fn from_spec(spec: &SystemSpec) -> Self {
        Self {
            coefficients: spec.harmonics().to_vec(),
            decay: spec.decay,
            epsilon: spec.epsilon,
            i_plus_star: spec.i_plus_star,
            i_minus_star: Some(spec.i_minus_star),
            fixture: spec.fixture,
            pendulum_sign: Some(spec.pendulum_sign),
            generate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub message: String,
    pub harmonic: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<Violation>,
}

pub mod rule {
    pub const ENVELOPE: &str = "decay-envelope";
    pub const DECAY_PARAMS: &str = "decay-parameters";
    pub const MISSING_DECAY: &str = "decay-missing";
    pub const A10_ZERO: &str = "a10-zero";
    pub const A01_ZERO: &str = "a01-zero";
    pub const LAMBDA: &str = "lambda-bound";
    pub const LAMBDA_BRANCH: &str = "lambda-large-branch-unsupported";
    pub const PHASE: &str = "phase-normalization";
    pub const EPSILON: &str = "epsilon-negative";
    pub const WINDOW: &str = "action-window";
    pub const PENDULUM_SIGN: &str = "pendulum-sign";
}

/// `|a₁₀ / a₀₁|`.
pub fn lambda_ratio(spec: &SystemSpec) -> Result<f64> {
    let a01 = spec.coefficient(0, 1);
    if a01 == 0.0 {
        return Err(Error::ZeroA01);
    }
    Ok((spec.coefficient(1, 0) / a01).abs())
}

/// Checks every hypothesis on the spec and lists each violation separately.
pub fn validate_spec(spec: &SystemSpec) -> ValidationReport {
    let mut v = Vec::new();
    let mut push = |rule: &str, message: String, harmonic: Option<(u32, u32)>| {
        v.push(Violation {
            rule: rule.to_string(),
            message,
            harmonic,
        })
    };

    if spec.pendulum_sign != 1 {
        push(rule::PENDULUM_SIGN, "only the positive pendulum sign is supported".into(), None);
    }
    if !(spec.epsilon >= 0.0) {
        push(rule::EPSILON, format!("epsilon = {} must be >= 0", spec.epsilon), None);
    }
    if !(spec.i_minus_star < spec.i_plus_star) {
        push(
            rule::WINDOW,
            format!("action window [{}, {}] is empty", spec.i_minus_star, spec.i_plus_star),
            None,
        );
    }

    if !spec.fixture {
        match spec.decay {
            None => push(rule::MISSING_DECAY, "non-fixture spec needs decay parameters".into(), None),
            Some(d) => {
                let ok = d.alpha_hat > 0.0
                    && d.alpha > d.alpha_hat
                    && (1.0..2.0).contains(&d.beta)
                    && d.rho > 0.0
                    && d.rho < 1.0
                    && d.r > 0.0
                    && d.r < 1.0;
                if !ok {
                    push(
                        rule::DECAY_PARAMS,
                        format!(
                            "need 0 < alpha_hat < alpha, beta in [1,2), rho, r in (0,1); got {:?}",
                            d
                        ),
                        None,
                    );
                }
                for h in spec.harmonics() {
                    let (lo, hi) = (d.lower(h.k, h.l), d.upper(h.k, h.l));
                    // relative slack for values generated exactly on the bound
                    let slack = 1e-12 * hi.max(lo);
                    if h.a.abs() < lo - slack || h.a.abs() > hi + slack {
                        push(
                            rule::ENVELOPE,
                            format!("|a| = {:e} outside [{lo:e}, {hi:e}]", h.a.abs()),
                            Some((h.k, h.l)),
                        );
                    }
                }
            }
        }
    }

    let a10 = spec.coefficient(1, 0);
    let a01 = spec.coefficient(0, 1);
    if a10 == 0.0 {
        push(rule::A10_ZERO, "a_{1,0} must be nonzero".into(), Some((1, 0)));
    }
    if a01 == 0.0 {
        push(
            rule::A01_ZERO,
            "lambda undefined: a_{0,1} must be nonzero".into(),
            Some((0, 1)),
        );
    } else {
        let lambda = (a10 / a01).abs();
        if lambda > ENVELOPE_C3 {
            push(
                rule::LAMBDA_BRANCH,
                format!("lambda = {lambda} > 1.6: crests parameterized by s are not implemented"),
                None,
            );
        } else if lambda >= LAMBDA_MAX {
            push(rule::LAMBDA, format!("lambda = {lambda} must be < 1/1.6 = 0.625"), None);
        }
    }
    if !spec.is_normalized() {
        push(
            rule::PHASE,
            "sigma_{1,0} and sigma_{0,1} must be zero (call `normalized`)".into(),
            None,
        );
    }

    ValidationReport {
        passed: v.is_empty(),
        violations: v,
    }
}

/// `sinh(π/2) I² / sinh(πI/2)`; odd in I, zero at I = 0.
pub fn h2(i: f64) -> f64 {
    if i == 0.0 {
        return 0.0;
    }
    FRAC_PI_2.sinh() * i * i / (FRAC_PI_2 * i).sinh()
}

/// `sinh(π/2) I³ / sinh(πI/2)`; even in I.
pub fn h3(i: f64) -> f64 {
    h2(i) * i
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    pub c2: f64,
    pub argmax2: f64,
    pub c3: f64,
    pub argmax3: f64,
}

/// Maximizes `|h₂|` and `|h₃|` over the real line.
///
/// Both decay like `I^n e^{−π|I|/2}`, so `[0, 12]` contains the maxima.
pub fn verify_envelope_constants() -> EnvelopeConstants {
    let (argmax2, c2) = scan_max(|i| h2(i).abs(), 0.0, 12.0, 2401, 1e-12);
    let (argmax3, c3) = scan_max(|i| h3(i).abs(), 0.0, 12.0, 2401, 1e-12);
    EnvelopeConstants { c2, argmax2, c3, argmax3 }
}
