//! Adaptive Runge–Kutta–Fehlberg 4(5) integration for scalar autonomous-in-x
//! initial value problems y' = f(x, y).
//!
//! This is only used for the profile-synthesis ODE, which is smooth away from
//! the origin (the origin itself is handled by a series start before the
//! integrator is entered), so a classical embedded pair with PI-free step
//! control is plenty.

/// Integrate y' = f(x, y) from (x0, y0), reporting y at each requested output
/// point in `xs` (which must be strictly increasing and start at >= x0).
///
/// `rel_tol`/`abs_tol` bound the local error per step.
pub fn integrate_to_grid(
    f: &dyn Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    xs: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Vec<f64> {
    // Cash–Karp coefficients.
    const A: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
    const B: [[f64; 5]; 6] = [
        [0.0, 0.0, 0.0, 0.0, 0.0],
        [0.2, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
        [0.3, -0.9, 1.2, 0.0, 0.0],
        [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
        [
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ];
    const C5: [f64; 6] = [
        37.0 / 378.0,
        0.0,
        250.0 / 621.0,
        125.0 / 594.0,
        0.0,
        512.0 / 1771.0,
    ];
    const C4: [f64; 6] = [
        2825.0 / 27648.0,
        0.0,
        18575.0 / 48384.0,
        13525.0 / 55296.0,
        277.0 / 14336.0,
        0.25,
    ];

    let mut out = Vec::with_capacity(xs.len());
    let mut x = x0;
    let mut y = y0;
    let x_end = *xs.last().expect("output grid must be nonempty");
    let mut h = ((x_end - x0) / 100.0).max(1e-12);
    let mut next = 0;

    while next < xs.len() {
        if x >= xs[next] {
            out.push(y);
            next += 1;
            continue;
        }
        let target = xs[next];
        let mut step = h.min(target - x);
        loop {
            let mut k = [0.0; 6];
            for i in 0..6 {
                let mut yi = y;
                for (j, bij) in B[i].iter().enumerate().take(i) {
                    yi += step * bij * k[j];
                }
                k[i] = f(x + A[i] * step, yi);
            }
            let mut y5 = y;
            let mut y4 = y;
            for i in 0..6 {
                y5 += step * C5[i] * k[i];
                y4 += step * C4[i] * k[i];
            }
            let err = (y5 - y4).abs();
            let scale = abs_tol + rel_tol * y.abs().max(y5.abs());
            if err <= scale || step <= 1e-14 * x.abs().max(1.0) {
                x += step;
                y = y5;
                // Grow the step conservatively.
                let factor = if err > 0.0 {
                    0.9 * (scale / err).powf(0.2)
                } else {
                    5.0
                };
                h = (step * factor.clamp(0.2, 5.0)).max(1e-14);
                break;
            }
            step *= 0.9 * (scale / err).powf(0.25).clamp(0.1, 0.9);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let xs: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
        let ys = integrate_to_grid(&|_, y| y, 0.0, 1.0, &xs, 1e-12, 1e-14);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((y - x.exp()).abs() / x.exp() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn quadrature_as_ode() {
        // y' = cos(x), y(0)=0 -> sin(x)
        let xs: Vec<f64> = (1..=30).map(|i| i as f64 * 0.2).collect();
        let ys = integrate_to_grid(&|x, _| x.cos(), 0.0, 0.0, &xs, 1e-12, 1e-14);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((y - x.sin()).abs() < 1e-10);
        }
    }
}
