//! Bracketing root finders for scalar functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute tolerance on the abscissa.
    pub x_tol: f64,
    /// Absolute tolerance on the residual; zero disables the check.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            x_tol: 1e-14,
            f_tol: 0.0,
            max_iter: 200,
        }
    }
}

fn opposite(fa: f64, fb: f64) -> bool {
    (fa <= 0.0 && fb >= 0.0) || (fa >= 0.0 && fb <= 0.0)
}

/// Plain bisection. Requires `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: RootOptions) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !opposite(flo, fhi) {
        return Err(Error::Root(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..opts.max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= opts.x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if opposite(flo, fm) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Brent's method (inverse quadratic interpolation with bisection fallback).
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: RootOptions) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !opposite(fa, fb) {
        return Err(Error::Root(format!("no sign change on [{a}, {b}]")));
    }
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if (fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || (opts.f_tol > 0.0 && fb.abs() <= opts.f_tol) {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::Root(format!("brent: no convergence in {} iterations", opts.max_iter)))
}

/// Newton iteration kept inside a sign-change bracket; falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
///
/// `fdf` returns `(f(x), f'(x))`.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut fdf: F,
    a: f64,
    b: f64,
    x0: f64,
    opts: RootOptions,
) -> Result<f64> {
    let (fa, _) = fdf(a);
    let (fb, _) = fdf(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !opposite(fa, fb) {
        return Err(Error::Root(format!("no sign change on [{a}, {b}]")));
    }
    // orient so that f(lo) < 0 < f(hi)
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = if x0 > a.min(b) && x0 < a.max(b) { x0 } else { 0.5 * (a + b) };
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = fdf(x);
    for _ in 0..opts.max_iter {
        if fx == 0.0 || (opts.f_tol > 0.0 && fx.abs() <= opts.f_tol) {
            return Ok(x);
        }
        let newton_out = ((x - hi) * dfx - fx) * ((x - lo) * dfx - fx) > 0.0;
        let slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_out || slow || dfx == 0.0 {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= opts.x_tol {
            let (f_last, _) = fdf(x);
            if opts.f_tol == 0.0 || f_last.abs() <= opts.f_tol {
                return Ok(x);
            }
        }
        let r = fdf(x);
        fx = r.0;
        dfx = r.1;
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    if opts.f_tol > 0.0 && fx.abs() > opts.f_tol {
        return Err(Error::Root(format!(
            "newton: residual {fx:e} above {:e} after {} iterations",
            opts.f_tol, opts.max_iter
        )));
    }
    Ok(x)
}

/// Grows `[x0 - step, x0 + step]` geometrically until `f` changes sign.
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    step: f64,
    max_expansions: usize,
) -> Option<(f64, f64)> {
    let mut w = step;
    let f0 = f(x0);
    if f0 == 0.0 {
        return Some((x0, x0));
    }
    for _ in 0..max_expansions {
        let (l, r) = (x0 - w, x0 + w);
        let (fl, fr) = (f(l), f(r));
        if opposite(f0, fr) {
            return Some((x0, r));
        }
        if opposite(fl, f0) {
            return Some((l, x0));
        }
        w *= 1.6;
    }
    None
}

/// Every sign change of `f` on a sampled grid, as consecutive sample pairs.
pub fn sign_changes(grid: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    grid.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| (v[0] < 0.0 && v[1] >= 0.0) || (v[0] > 0.0 && v[1] <= 0.0))
        .map(|(x, _)| (x[0], x[1]))
        .collect()
}
