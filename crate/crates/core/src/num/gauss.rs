//! Gauss–Legendre quadrature.
//!
//! Nodes and weights on [-1, 1] are computed once per order by Newton
//! iteration on the Legendre polynomial, seeded with the Chebyshev
//! approximation of the roots; this is accurate to machine precision for the
//! moderate orders used here. Composite and adaptive drivers build on the
//! single panel.

use std::sync::OnceLock;

/// Nodes and weights of the `ORDER`-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from P_n and P_{n-1}
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    GaussRule { nodes, weights }
}

fn rule(order: usize) -> &'static GaussRule {
    static RULES: [OnceLock<GaussRule>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    match order {
        8 => RULES[0].get_or_init(|| compute_rule(8)),
        16 => RULES[1].get_or_init(|| compute_rule(16)),
        32 => RULES[2].get_or_init(|| compute_rule(32)),
        _ => panic!("unsupported Gauss-Legendre order {order} (use 8, 16 or 32)"),
    }
}

/// Single Gauss–Legendre panel of the given order on [a, b].
pub fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let r = rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in r.nodes.iter().zip(&r.weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive quadrature on [a, b] to absolute tolerance `tol`: a panel is
/// accepted when the 16-point value agrees with the two-half refinement
/// within its share of the tolerance, and split otherwise.
///
/// Panels also stop at the rounding floor of their own magnitude: the panel
/// sums carry a few ulps of jitter from the integrand's own arithmetic
/// (power-law and exponential chains), amplified by the dot products, so
/// once the halves disagree with the whole by less than `64 eps` of the
/// local mass the difference is floating-point noise, not quadrature error,
/// and splitting further cannot improve the answer — it would only expand
/// the tree (a too-small floor here once turned a single piece into a
/// near-complete depth-40 binary tree).  Two last-resort guards bound the
/// work even for adversarial integrands: intervals that can no longer be
/// split in floating point are accepted as-is, and a global budget of
/// 20 000 splits per call caps the tree at roughly a million evaluations.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        budget: &mut u32,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return whole;
        }
        let left = panel(f, a, m, 16);
        let right = panel(f, m, b, 16);
        let refined = left + right;
        let err = (refined - whole).abs();
        let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs()).max(whole.abs());
        if !err.is_finite() || err <= tol.max(noise) || depth >= 40 || *budget == 0 {
            return refined;
        }
        *budget -= 1;
        rec(f, budget, a, m, left, 0.5 * tol, depth + 1)
            + rec(f, budget, m, b, right, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = panel(f, a, b, 16);
    let mut budget = 20_000u32;
    rec(f, &mut budget, a, b, whole, tol, 0)
}
