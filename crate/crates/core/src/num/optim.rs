//! One-dimensional minimisation helpers.

/// Golden-section search for the minimum of a unimodal `f` on [a, b].
/// Returns `(argmin, min)`. Tolerance is on the argument.
pub fn golden_section_min(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
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

/// Minimise `f` over a log-spaced grid on [lo, hi] and refine the best cell
/// with golden-section search. Suitable for smooth functions with a single
/// interior minimum whose location is only roughly known.
pub fn log_grid_then_golden(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(lo > 0.0 && hi > lo && grid >= 3);
    let ratio = (hi / lo).powf(1.0 / (grid - 1) as f64);
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let mut x = lo;
    let mut xs = Vec::with_capacity(grid);
    for i in 0..grid {
        xs.push(x);
        let v = f(x);
        if v < best {
            best = v;
            best_i = i;
        }
        x *= ratio;
    }
    let a = xs[best_i.saturating_sub(1)];
    let b = xs[(best_i + 1).min(grid - 1)];
    golden_section_min(f, a, b, tol)
}
