//! Outer meets inner: the Poisson bracket `{F*, L*}`, images of tori under
//! the scattering map, the transversality function `M`, and the assembly of
//! transition chains of tori joined by heteroclinic jumps.
//!
//! A link from torus `T` to torus `T'` is built as follows. Let `Φ` be the
//! torus function of the region `T'` lives in and `p(θ̃)` the branch of `T`
//! used for the jump. Over the jump window the gain
//! `d(θ̃) = σ (Φ(S_ε p(θ̃)) − Φ(p(θ̃)))` is maximized, and the jump is taken
//! on the rising flank where `d = γ max d`. `T'` is the level set of `Φ`
//! through the image point, so `S_ε(T)` meets `T'` there by construction;
//! the link is transversal when `Φ` varies along the image curve.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{
    big_gap_resonances, torus_function, torus_function_gradient, torus_level_set, Region, ResonanceRegion, Side,
    TorusKind, TorusLevelSet,
};
use crate::numerics::optimize::scan_max;
use crate::numerics::roots::{self, RootOptions};
use crate::numerics::{linspace, wrap_angle};
use crate::scattering::ReducedPoincare;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketValue {
    /// `∂F*/∂θ̃ ∂L*/∂I − ∂F*/∂I ∂L*/∂θ̃`.
    pub full: f64,
    /// `−(∂F*/∂I) ∂L*/∂θ̃`, the part of order one in ε.
    pub dominant: f64,
}

/// `{F*, L*}` at `(I, θ̃)`.
pub fn poisson_bracket(i: f64, theta: f64, region: &Region, rp: &ReducedPoincare) -> Result<BracketValue> {
    let v = rp.evaluate(i, theta)?;
    let (f_i, f_t) = torus_function_gradient(i, theta, region);
    Ok(BracketValue {
        full: f_t * v.d_action - f_i * v.d_theta,
        dominant: -f_i * v.d_theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSample {
    pub theta: f64,
    pub action: f64,
    pub image_theta: f64,
    pub image_action: f64,
    /// `F*` at the image point.
    pub image_level: f64,
    /// First-order prediction `E + ε (∂F*/∂I) ∂L*/∂θ̃`.
    pub predicted_level: f64,
}

/// Samples the first-order image of a torus under the scattering map on a
/// θ̃-grid of its domain. Only the branch carrying the torus is mapped,
/// except for secondaries, whose two halves are both sampled.
pub fn torus_image(ts: &TorusLevelSet, rp: &ReducedPoincare, eps: f64, n: usize) -> Result<Vec<ImageSample>> {
    let both = [Side::Upper, Side::Lower];
    let sides = match (ts.kind, ts.side()) {
        (TorusKind::Secondary, _) => &both[..],
        (_, Side::Upper) => &both[..1],
        (_, Side::Lower) => &both[1..],
    };
    let (a, b) = ts.domain;
    let mut out = Vec::with_capacity(n * sides.len());
    for &side in sides {
        for theta in linspace(a, b, n) {
            let i = ts.graph(theta, side);
            if !i.is_finite() {
                continue;
            }
            let v = rp.evaluate(i, theta)?;
            let (i2, t2) = (i + eps * v.d_theta, theta - eps * v.d_action);
            let (f_i, _) = torus_function_gradient(i, theta, &ts.region);
            out.push(ImageSample {
                theta,
                action: i,
                image_theta: t2,
                image_action: i2,
                image_level: torus_function(i2, t2, &ts.region),
                predicted_level: ts.energy + eps * f_i * v.d_theta,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub value: f64,
    pub derivative: f64,
}

/// `M(θ̃) = ±√(2(E − ε|a|(cos(k₀θ̃ + χ) − 1))) ∂L*/∂θ̃` on the branch `side`
/// (just `∂L*/∂θ̃` on a flat torus), with a central-difference θ̃-derivative.
pub fn transversality_measure(theta: f64, energy: f64, region: &Region, side: Side, rp: &ReducedPoincare) -> Result<Measure> {
    let m = |t: f64| -> Result<f64> {
        match region {
            Region::Flat => rp.d_theta(energy, t),
            Region::Resonance(r) => {
                let rad = r.radicand(energy, t);
                if rad < 0.0 {
                    return Err(Error::EmptyLevelSet {
                        level: energy,
                        minimum: r.min_level(),
                    });
                }
                let root = side.sign() * (2.0 * rad).sqrt();
                Ok(root * rp.d_theta(r.center + root, t)?)
            }
        }
    };
    let h = 1e-5;
    Ok(Measure {
        value: m(theta)?,
        derivative: (m(theta + h)? - m(theta - h)?) / (2.0 * h),
    })
}

/// `max M − min M` over `n` points of the torus domain.
pub fn measure_nonconstancy(ts: &TorusLevelSet, rp: &ReducedPoincare, n: usize) -> Result<f64> {
    let (a, b) = ts.domain;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in linspace(a, b, n) {
        if let Region::Resonance(r) = &ts.region {
            if r.radicand(ts.energy, t) < 0.0 {
                continue;
            }
        }
        let v = transversality_measure(t, ts.energy, &ts.region, ts.side(), rp)?.value;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return Err(Error::EmptyLevelSet {
            level: ts.energy,
            minimum: f64::NAN,
        });
    }
    Ok(hi - lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub from: TorusLevelSet,
    pub to: TorusLevelSet,
    pub jump_theta: f64,
    /// Action of the jump point on `from`.
    pub jump_action: f64,
    pub image_theta: f64,
    pub image_action: f64,
    pub transversal: bool,
    /// `ε ∂L*/∂θ̃` at the jump point.
    pub action_gain: f64,
    /// `|Φ(image) − Φ(jump point)| / |∂Φ/∂I|`, the level step in action units.
    pub spacing: f64,
    /// `M` (or `∂L*/∂θ̃` on flat tori) at the jump point.
    pub measure: f64,
    /// `ε max |∂L*/∂θ̃|` over the jump window, the first-order step bound.
    pub step_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionChain {
    pub links: Vec<ChainLink>,
    pub i_start: f64,
    pub i_end: f64,
    pub epsilon: f64,
    pub regions: Vec<ResonanceRegion>,
}

impl TransitionChain {
    pub fn secondary_count(&self) -> usize {
        self.links.iter().filter(|l| l.to.kind == TorusKind::Secondary).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// Fraction of the largest available gain used per jump.
    pub gamma: f64,
    /// Distance of the jump window from the fixed points θ̃ = 0, π.
    pub edge_margin: f64,
    /// Resonances `l₀/k₀` with `k₀, l₀` up to this order are examined.
    pub max_order: u32,
    pub max_links: usize,
    pub scan_samples: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            edge_margin: 0.1,
            max_order: 8,
            max_links: 200_000,
            scan_samples: 64,
        }
    }
}

/// Half-width in action of the neighbourhood of a resonance treated with the
/// pendulum normal form.
pub fn region_halfwidth(r: &ResonanceRegion) -> f64 {
    2.0 * r.gap_halfwidth
}

fn direction_window(dir: f64, margin: f64) -> (f64, f64) {
    if dir > 0.0 {
        (PI + margin, TAU - margin)
    } else {
        (margin, PI - margin)
    }
}

/// Longest piece of `window ∩ (a, b)` on the circle.
fn intersect_on_circle(window: (f64, f64), dom: (f64, f64)) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for k in -2..=2 {
        let off = TAU * k as f64;
        let lo = dom.0.max(window.0 + off);
        let hi = dom.1.min(window.1 + off);
        if hi > lo && best.is_none_or(|(a, b)| hi - lo > b - a) {
            best = Some((lo, hi));
        }
    }
    best
}

struct Builder<'a> {
    rp: &'a ReducedPoincare,
    eps: f64,
    dir: f64,
    opts: ChainOptions,
}

impl Builder<'_> {
    fn jump_side(&self, from: &TorusLevelSet) -> Side {
        match from.kind {
            TorusKind::Secondary | TorusKind::Separatrix => {
                if self.dir > 0.0 {
                    Side::Upper
                } else {
                    Side::Lower
                }
            }
            _ => from.side(),
        }
    }

    /// Builds the link from `from` to a level set of `target`, using the
    /// gain fraction `gamma`.
    fn link(&self, from: &TorusLevelSet, target: &Region, gamma: f64) -> Result<ChainLink> {
        let side = self.jump_side(from);
        let window = direction_window(self.dir, self.opts.edge_margin);
        let gap = |reason: &str| Error::ChainGap {
            from: from.energy,
            to: f64::NAN,
            reason: reason.to_string(),
        };
        let (wa, wb) = match from.kind {
            TorusKind::Secondary => intersect_on_circle(window, from.domain).ok_or_else(|| gap("eye misses the jump window"))?,
            _ => window,
        };
        let point = |t: f64| from.graph(t, side);
        let sigma = match target {
            Region::Flat => self.dir,
            Region::Resonance(r) => {
                let mid = point(0.5 * (wa + wb));
                self.dir * (mid - r.center).signum()
            }
        };
        let image = |t: f64| -> Result<(f64, f64, f64)> {
            let i = point(t);
            let (i2, t2) = self.rp.reduced_map(i, t, self.eps)?;
            Ok((i, i2, t2))
        };
        // errors inside the scan are surfaced after it
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let gain = |t: f64| -> f64 {
            match image(t) {
                Ok((i, i2, t2)) => sigma * (torus_function(i2, t2, target) - torus_function(i, t, target)),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NEG_INFINITY
                }
            }
        };
        let (t_star, d_max) = scan_max(gain, wa, wb, self.opts.scan_samples, 1e-10);
        let d_start = gain(wa);
        let d_end = gain(wb);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if !(d_max > 0.0) {
            return Err(gap("no positive gain in the jump window"));
        }
        let level = gamma * d_max;
        let ropts = RootOptions {
            x_tol: 1e-13,
            ..RootOptions::default()
        };
        let theta_c = if d_start < level {
            roots::brent(|t| gain(t) - level, wa, t_star, ropts)?
        } else if d_end < level {
            roots::brent(|t| gain(t) - level, t_star, wb, ropts)?
        } else {
            t_star
        };
        if let Some(e) = failure.take() {
            return Err(e);
        }

        let (i_p, i2, t2) = image(theta_c)?;
        let v = self.rp.evaluate(i_p, theta_c)?;
        let e_next = torus_function(i2, t2, target);
        let (phi_i, _) = torus_function_gradient(i_p, theta_c, target);
        let step = (e_next - torus_function(i_p, theta_c, target)).abs();

        // Φ along the image curve must vary for a transversal crossing
        let h = 1e-6 * (wb - wa);
        let along = |t: f64| -> Result<f64> {
            let (_, a, b) = image(t)?;
            Ok(torus_function(a, b, target))
        };
        let slope = (along(theta_c + h)? - along(theta_c - h)?) / (2.0 * h);
        let (f_i, _) = torus_function_gradient(i_p, theta_c, &from.region);
        let measure = f_i * v.d_theta;

        let to = match target {
            Region::Flat => torus_level_set(e_next, target, Side::Upper)?,
            Region::Resonance(r) => {
                let landing = if i2 >= r.center { Side::Upper } else { Side::Lower };
                let mut ts = torus_level_set(e_next, target, landing)?;
                if ts.kind == TorusKind::Secondary {
                    // pick the eye that contains the landing point
                    let len = ts.domain.1 - ts.domain.0;
                    let period = TAU / r.k0 as f64;
                    let shift = ((t2 - ts.domain.0) / period).floor() * period;
                    ts.domain = (ts.domain.0 + shift, ts.domain.0 + shift + len);
                }
                ts
            }
        };

        let mut step_bound: f64 = 0.0;
        for t in linspace(wa, wb, self.opts.scan_samples) {
            step_bound = step_bound.max(self.rp.d_theta(point(t), t)?.abs());
        }
        step_bound *= self.eps;

        Ok(ChainLink {
            from: *from,
            to,
            jump_theta: theta_c,
            jump_action: i_p,
            image_theta: t2,
            image_action: i2,
            transversal: measure.abs() > 1e-14 && slope.abs() > 1e-3 * d_max,
            action_gain: i2 - i_p,
            spacing: step / phi_i.abs(),
            measure,
            step_bound,
        })
    }

    /// As [`Builder::link`], but keeps resonant levels away from the
    /// separatrix `E = 0` by moving the jump along the flank.
    fn link_avoiding_separatrix(&self, from: &TorusLevelSet, target: &Region) -> Result<ChainLink> {
        let g = self.opts.gamma;
        let mut last = None;
        for gamma in [g, 1.2 * g, 0.8 * g, 1.4 * g, 0.6 * g, 0.4 * g] {
            let l = self.link(from, target, gamma)?;
            let de = (l.to.energy - torus_function(l.jump_action, l.jump_theta, target)).abs();
            if matches!(target, Region::Flat) || l.to.energy.abs() >= 0.05 * de {
                return Ok(l);
            }
            last = Some(l);
        }
        let l = last.expect("at least one attempt");
        Err(Error::ChainGap {
            from: from.energy,
            to: l.to.energy,
            reason: "every candidate landed on the separatrix".into(),
        })
    }
}

fn reached(ts: &TorusLevelSet, goal: f64, dir: f64) -> bool {
    if dir > 0.0 {
        ts.kind != TorusKind::Secondary && ts.min_action() >= goal
    } else {
        ts.kind != TorusKind::Secondary && ts.max_action() <= goal
    }
}

/// Chains tori from action `i_minus` to `i_plus` (either direction).
///
/// Flat stretches advance by the flat-torus link; each big-gap resonance met
/// on the way is crossed on the level sets of its pendulum normal form: the
/// primaries on the near side lead down to secondary tori inside the
/// resonance, whose far halves lead up the primaries on the far side.
pub fn build_chain(i_minus: f64, i_plus: f64, eps: f64, rp: &ReducedPoincare, opts: ChainOptions) -> Result<TransitionChain> {
    if !(eps > 0.0) {
        return Err(Error::Chain("epsilon must be positive: no jumps at epsilon = 0".into()));
    }
    if !(i_minus.is_finite() && i_plus.is_finite()) || i_minus == i_plus {
        return Err(Error::Chain(format!("empty action range [{i_minus}, {i_plus}]")));
    }
    let spec = rp.spec();
    let dir = (i_plus - i_minus).signum();
    let (lo, hi) = (i_minus.min(i_plus), i_minus.max(i_plus));
    let mut regions: Vec<ResonanceRegion> = big_gap_resonances(spec, eps, lo - 1.0, hi + 1.0, opts.max_order)
        .into_iter()
        .filter(|r| r.center + region_halfwidth(r) > lo && r.center - region_halfwidth(r) < hi)
        .collect();
    if dir < 0.0 {
        regions.reverse();
    }
    let b = Builder { rp, eps, dir, opts };

    // starting torus
    let mut next_region = 0;
    let mut current = torus_level_set(i_minus, &Region::Flat, Side::Upper)?;
    for (idx, r) in regions.iter().enumerate() {
        if (i_minus - r.center).abs() < region_halfwidth(r) {
            let theta0 = -r.theta_shift / r.k0 as f64;
            let e = r.torus_function(i_minus, theta0);
            if e <= 0.0 {
                return Err(Error::Chain("starting action lies on a resonance separatrix".into()));
            }
            let side = if i_minus > r.center { Side::Upper } else { Side::Lower };
            current = torus_level_set(e, &Region::Resonance(*r), side)?;
            next_region = idx;
            break;
        }
        if dir * (r.center - i_minus) > 0.0 {
            next_region = idx;
            break;
        }
        next_region = idx + 1;
    }

    let mut links: Vec<ChainLink> = Vec::new();
    while !reached(&current, i_plus, dir) {
        if links.len() >= opts.max_links {
            return Err(Error::Chain(format!("no arrival after {} links", opts.max_links)));
        }
        let link = match current.region {
            Region::Flat => {
                let flat = b.link(&current, &Region::Flat, opts.gamma)?;
                match regions.get(next_region) {
                    Some(r) if dir * (flat.image_action - (r.center - dir * region_halfwidth(r))) >= 0.0 => {
                        b.link_avoiding_separatrix(&current, &Region::Resonance(*r))?
                    }
                    _ => flat,
                }
            }
            Region::Resonance(r) => {
                let far_side = if dir > 0.0 { TorusKind::PrimaryUpper } else { TorusKind::PrimaryLower };
                let edge = r.center + dir * region_halfwidth(&r);
                let out = if dir > 0.0 {
                    current.min_action() >= edge
                } else {
                    current.max_action() <= edge
                };
                if current.kind == far_side && out {
                    next_region += 1;
                    match regions.get(next_region) {
                        Some(r2) if dir * (current.label() - (r2.center - dir * region_halfwidth(r2))) >= 0.0 => {
                            b.link_avoiding_separatrix(&current, &Region::Resonance(*r2))?
                        }
                        _ => b.link(&current, &Region::Flat, opts.gamma)?,
                    }
                } else {
                    b.link_avoiding_separatrix(&current, &Region::Resonance(r))?
                }
            }
        };
        if !link.transversal {
            return Err(Error::ChainGap {
                from: link.from.energy,
                to: link.to.energy,
                reason: format!("non-transversal crossing at theta = {}", link.jump_theta),
            });
        }
        current = link.to;
        links.push(link);
    }
    let i_end = if links.is_empty() { i_minus } else { current.label() };
    Ok(TransitionChain {
        links,
        i_start: i_minus,
        i_end,
        epsilon: eps,
        regions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    InnerFlow,
    ScatteringJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub action: f64,
    pub phi: f64,
    pub s: f64,
    pub segment: SegmentKind,
    pub link: usize,
}

/// Position along the closed curve of a torus, moving with the averaged
/// flow: the upper branch (or a flat torus) runs forward in θ̃, the lower
/// branch backward. Secondaries are parameterized over both halves.
struct TorusPath<'a> {
    ts: &'a TorusLevelSet,
}

impl TorusPath<'_> {
    fn half_length(&self) -> f64 {
        self.ts.domain.1 - self.ts.domain.0
    }

    fn period(&self) -> f64 {
        match self.ts.kind {
            TorusKind::Secondary => 2.0 * self.half_length(),
            _ => TAU,
        }
    }

    fn param(&self, theta: f64, action: f64) -> f64 {
        let (a, _) = self.ts.domain;
        let t = a + (theta - a).rem_euclid(TAU);
        match self.ts.kind {
            TorusKind::Secondary => {
                let c = self.ts.resonance().map_or(0.0, |r| r.center);
                let u = t - a;
                if action >= c {
                    u
                } else {
                    2.0 * self.half_length() - u
                }
            }
            TorusKind::PrimaryLower => TAU - (t - a),
            _ => t - a,
        }
    }

    fn point(&self, u: f64) -> (f64, f64) {
        let (a, _) = self.ts.domain;
        let u = u.rem_euclid(self.period());
        match self.ts.kind {
            TorusKind::Secondary => {
                let l = self.half_length();
                if u <= l {
                    (a + u, self.ts.graph(a + u, Side::Upper))
                } else {
                    let t = a + 2.0 * l - u;
                    (t, self.ts.graph(t, Side::Lower))
                }
            }
            TorusKind::PrimaryLower => {
                let t = a + TAU - u;
                (t, self.ts.graph(t, Side::Lower))
            }
            _ => (a + u, self.ts.graph(a + u, self.ts.side())),
        }
    }
}

/// Alternating inner-flow segments along each torus and the scattering
/// jumps between them, in the `s = 0` section (`φ = θ̃`, wrapped to
/// `[0, 2π)`). Each segment has `samples + 1` points; consecutive pieces
/// share their endpoints exactly.
pub fn emit_pseudo_orbit(chain: &TransitionChain, samples: usize) -> Vec<OrbitPoint> {
    let samples = samples.max(1);
    let mut out = Vec::new();
    let mut start: Option<(f64, f64)> = None;
    for (k, link) in chain.links.iter().enumerate() {
        let path = TorusPath { ts: &link.from };
        let (t0, i0) = start.unwrap_or_else(|| path.point(0.0));
        let u0 = path.param(t0, i0);
        let u1 = path.param(link.jump_theta, link.jump_action);
        let span = (u1 - u0).rem_euclid(path.period());
        let push = |out: &mut Vec<OrbitPoint>, action: f64, theta: f64, segment| {
            out.push(OrbitPoint {
                action,
                phi: wrap_angle(theta),
                s: 0.0,
                segment,
                link: k,
            })
        };
        push(&mut out, i0, t0, SegmentKind::InnerFlow);
        for j in 1..samples {
            let (t, i) = path.point(u0 + span * j as f64 / samples as f64);
            push(&mut out, i, t, SegmentKind::InnerFlow);
        }
        push(&mut out, link.jump_action, link.jump_theta, SegmentKind::InnerFlow);
        push(&mut out, link.jump_action, link.jump_theta, SegmentKind::ScatteringJump);
        push(&mut out, link.image_action, link.image_theta, SegmentKind::ScatteringJump);
        start = Some((link.image_theta, link.image_action));
    }
    out
}
