//! Golden-section search and a scan-then-refine maximizer.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Samples `f` on `n` uniform points of `[a, b]`, then refines the best
/// sample with golden-section search on its neighbouring cells.
pub fn scan_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, x_tol: f64) -> (f64, f64) {
    assert!(n >= 3, "scan needs at least three samples");
    let h = (b - a) / (n - 1) as f64;
    let mut best = (a, f64::NEG_INFINITY);
    for i in 0..n {
        let x = a + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = golden_max(&mut f, lo, hi, x_tol);
    if refined.1 >= best.1 {
        refined
    } else {
        best
    }
}
