//! Inner dynamics on the invariant cylinder `p = q = 0`: the restricted
//! Hamiltonian, resonant averaged potentials, and the tori of the averaged
//! system as level sets of a torus function `F*`.
//!
//! Near a resonance `I = l₀/k₀` with a large coefficient the tori are the
//! level sets of the pendulum `F* = (I − l₀/k₀)²/2 + ε|a|(cos(k₀θ̃ + χ) − 1)`
//! (χ = π when `a < 0`); away from such resonances they are flat, `F* = I`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::SystemSpec;

/// δ in the averaging order `M = ε^{−1/(26+δ)}`.
pub const AVERAGING_DELTA: f64 = 0.05;

/// `I²/2 + ε g(φ, s)`.
pub fn inner_hamiltonian(i: f64, phi: f64, s: f64, eps: f64, spec: &SystemSpec) -> f64 {
    0.5 * i * i + eps * spec.g(phi, s)
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_resonance(k0: u32, l0: u32) -> Result<()> {
    if k0 == 0 {
        return Err(Error::Resonance {
            k0,
            l0,
            reason: "k0 must be >= 1".into(),
        });
    }
    if gcd(k0, l0) != 1 {
        return Err(Error::Resonance {
            k0,
            l0,
            reason: "k0 and l0 must be coprime".into(),
        });
    }
    Ok(())
}

/// Number of resonant harmonics kept: `min(⌈ε^{−1/(26+δ)}⌉, available)`.
pub fn averaging_order(eps: f64, available: usize) -> usize {
    let m = if eps > 0.0 {
        eps.powf(-1.0 / (26.0 + AVERAGING_DELTA)).ceil() as usize
    } else {
        usize::MAX
    };
    m.min(available)
}

/// `U(θ) = Σ_{t=1}^{M} a_{tk₀,tl₀} cos(tθ − σ_{tk₀,tl₀})`, evaluated at
/// `θ + π` when `a_{k₀,l₀} < 0` so that θ = 0 is the maximum of the
/// leading term.
pub fn resonant_potential(k0: u32, l0: u32, theta: f64, eps: f64, spec: &SystemSpec) -> Result<f64> {
    check_resonance(k0, l0)?;
    let shift = if spec.coefficient(k0, l0) < 0.0 { PI } else { 0.0 };
    let harmonics: Vec<_> = spec
        .harmonics()
        .iter()
        .filter(|h| h.k > 0 && h.k % k0 == 0 && h.l == (h.k / k0) * l0)
        .collect();
    let m = averaging_order(eps, harmonics.iter().map(|h| (h.k / k0) as usize).max().unwrap_or(0));
    let th = theta + shift;
    Ok(harmonics
        .iter()
        .filter(|h| (h.k / k0) as usize <= m)
        .map(|h| {
            let t = (h.k / k0) as f64;
            h.a * (t * th - h.sigma).cos()
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionClass {
    BigGap,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRegion {
    pub k0: u32,
    pub l0: u32,
    pub center: f64,
    pub class: RegionClass,
    /// `|a_{k₀,l₀}|`.
    pub amplitude: f64,
    /// `2√(ε|a|)`.
    pub gap_halfwidth: f64,
    /// π when `a_{k₀,l₀} < 0`.
    pub theta_shift: f64,
    pub epsilon: f64,
}

/// Big gap iff `√|a_{k₀,l₀}| ≥ √ε`.
pub fn classify_resonance(k0: u32, l0: u32, eps: f64, spec: &SystemSpec) -> Result<ResonanceRegion> {
    check_resonance(k0, l0)?;
    let a = spec.coefficient(k0, l0);
    let amp = a.abs();
    let class = if amp > 0.0 && amp.sqrt() >= eps.sqrt() {
        RegionClass::BigGap
    } else {
        RegionClass::Flat
    };
    Ok(ResonanceRegion {
        k0,
        l0,
        center: l0 as f64 / k0 as f64,
        class,
        amplitude: amp,
        gap_halfwidth: 2.0 * (eps * amp).sqrt(),
        theta_shift: if a < 0.0 { PI } else { 0.0 },
        epsilon: eps,
    })
}

/// Big-gap resonances `l₀/k₀` with `k₀, l₀ ≤ max_order` whose centre lies
/// in `[lo, hi]`, sorted by centre.
pub fn big_gap_resonances(spec: &SystemSpec, eps: f64, lo: f64, hi: f64, max_order: u32) -> Vec<ResonanceRegion> {
    let mut out = Vec::new();
    for k0 in 1..=max_order {
        for l0 in 0..=max_order {
            if gcd(k0, l0) != 1 {
                continue;
            }
            let c = l0 as f64 / k0 as f64;
            if c < lo || c > hi {
                continue;
            }
            if let Ok(r) = classify_resonance(k0, l0, eps, spec) {
                if r.class == RegionClass::BigGap {
                    out.push(r);
                }
            }
        }
    }
    out.sort_by(|a, b| a.center.total_cmp(&b.center));
    out
}

/// Where a torus lives: a flat region or a big-gap resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Region {
    Flat,
    Resonance(ResonanceRegion),
}

impl ResonanceRegion {
    /// `ε|a|(cos(k₀θ̃ + χ) − 1)`.
    pub fn potential(&self, theta: f64) -> f64 {
        self.epsilon * self.amplitude * ((self.k0 as f64 * theta + self.theta_shift).cos() - 1.0)
    }

    pub fn potential_prime(&self, theta: f64) -> f64 {
        -self.epsilon * self.amplitude * self.k0 as f64 * (self.k0 as f64 * theta + self.theta_shift).sin()
    }

    /// Level of the hyperbolic-point separatrix is 0; the elliptic point sits at `−2ε|a|`.
    pub fn min_level(&self) -> f64 {
        -2.0 * self.epsilon * self.amplitude
    }

    /// `F*(I, θ̃)` of the pendulum normal form.
    pub fn torus_function(&self, i: f64, theta: f64) -> f64 {
        let d = i - self.center;
        0.5 * d * d + self.potential(theta)
    }

    /// `E − ε|a|(cos(k₀θ̃ + χ) − 1)`; the graphs are `c ± √(2·radicand)`.
    pub fn radicand(&self, energy: f64, theta: f64) -> f64 {
        energy - self.potential(theta)
    }
}

/// `F*` for either kind of region; ε is carried by the resonance record.
pub fn torus_function(i: f64, theta: f64, region: &Region) -> f64 {
    match region {
        Region::Flat => i,
        Region::Resonance(r) => r.torus_function(i, theta),
    }
}

/// `(∂F*/∂I, ∂F*/∂θ̃)`.
pub fn torus_function_gradient(i: f64, theta: f64, region: &Region) -> (f64, f64) {
    match region {
        Region::Flat => (1.0, 0.0),
        Region::Resonance(r) => (i - r.center, r.potential_prime(theta)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorusKind {
    Flat,
    PrimaryUpper,
    PrimaryLower,
    Secondary,
    Separatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// One invariant torus of the averaged inner dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusLevelSet {
    pub region: Region,
    pub energy: f64,
    pub kind: TorusKind,
    /// θ̃-interval carrying the graphs: `[0, 2π]` for primaries, one eye of
    /// the pendulum for secondaries.
    pub domain: (f64, f64),
}

/// The torus `F* = E`. For `E > 0` the level set has two components and
/// `side` picks one; it is ignored otherwise. Secondary tori are returned
/// on the eye centred at `θ̃ = (π − χ)/k₀`.
pub fn torus_level_set(energy: f64, region: &Region, side: Side) -> Result<TorusLevelSet> {
    let r = match region {
        Region::Flat => {
            return Ok(TorusLevelSet {
                region: *region,
                energy,
                kind: TorusKind::Flat,
                domain: (0.0, TAU),
            })
        }
        Region::Resonance(r) => r,
    };
    let e_min = r.min_level();
    if energy < e_min || !energy.is_finite() {
        return Err(Error::EmptyLevelSet {
            level: energy,
            minimum: e_min,
        });
    }
    let (kind, domain) = if energy > 0.0 {
        let kind = match side {
            Side::Upper => TorusKind::PrimaryUpper,
            Side::Lower => TorusKind::PrimaryLower,
        };
        (kind, (0.0, TAU))
    } else if energy == 0.0 {
        (TorusKind::Separatrix, (0.0, TAU))
    } else {
        // radicand ≥ 0 ⇔ cos(θ + χ) ≤ 1 + E/(ε|a|), with θ = k₀θ̃
        let c = (1.0 + energy / (r.epsilon * r.amplitude)).clamp(-1.0, 1.0);
        let w = c.acos();
        let k = r.k0 as f64;
        (TorusKind::Secondary, ((w - r.theta_shift) / k, (TAU - w - r.theta_shift) / k))
    };
    Ok(TorusLevelSet {
        region: *region,
        energy,
        kind,
        domain,
    })
}

impl TorusLevelSet {
    pub fn resonance(&self) -> Option<&ResonanceRegion> {
        match &self.region {
            Region::Flat => None,
            Region::Resonance(r) => Some(r),
        }
    }

    /// `f*±(θ̃)`; NaN outside the domain of a secondary torus.
    pub fn graph(&self, theta: f64, side: Side) -> f64 {
        match &self.region {
            Region::Flat => self.energy,
            Region::Resonance(r) => {
                let rad = r.radicand(self.energy, theta).max(0.0);
                if self.kind == TorusKind::Secondary && !self.contains(theta) {
                    return f64::NAN;
                }
                r.center + side.sign() * (2.0 * rad).sqrt()
            }
        }
    }

    /// The branch that carries this torus (upper for secondaries and flat tori).
    pub fn side(&self) -> Side {
        match self.kind {
            TorusKind::PrimaryLower => Side::Lower,
            _ => Side::Upper,
        }
    }

    /// The action of the torus above `θ̃` on its own branch.
    pub fn action(&self, theta: f64) -> f64 {
        self.graph(theta, self.side())
    }

    pub fn contains(&self, theta: f64) -> bool {
        match self.kind {
            TorusKind::Secondary => {
                let (a, b) = self.domain;
                let t = a + (theta - a).rem_euclid(TAU);
                t >= a - 1e-15 && t <= b + 1e-15
            }
            _ => true,
        }
    }

    /// Action used for ordering tori along a chain: I for flat tori, the
    /// point of the branch nearest the resonance centre for primaries, the
    /// centre itself for secondaries.
    pub fn label(&self) -> f64 {
        match (&self.region, self.kind) {
            (Region::Flat, _) => self.energy,
            (Region::Resonance(_), TorusKind::PrimaryUpper) => self.min_action(),
            (Region::Resonance(_), TorusKind::PrimaryLower) => self.max_action(),
            (Region::Resonance(r), _) => r.center,
        }
    }

    /// Smallest action over the torus (lowest point of its branch).
    pub fn min_action(&self) -> f64 {
        match (&self.region, self.kind) {
            (Region::Flat, _) => self.energy,
            (Region::Resonance(r), TorusKind::PrimaryUpper) => r.center + (2.0 * self.energy).sqrt(),
            (Region::Resonance(r), _) => {
                r.center - (2.0 * (self.energy - r.min_level()).max(0.0)).sqrt()
            }
        }
    }

    /// Largest action over the torus.
    pub fn max_action(&self) -> f64 {
        match (&self.region, self.kind) {
            (Region::Flat, _) => self.energy,
            (Region::Resonance(r), TorusKind::PrimaryLower) => r.center - (2.0 * self.energy).sqrt(),
            (Region::Resonance(r), _) => {
                r.center + (2.0 * (self.energy - r.min_level()).max(0.0)).sqrt()
            }
        }
    }
}
