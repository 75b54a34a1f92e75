//! Reconstructing a radial space from a prescribed profile.
//!
//! Given a profile table f with f(t) ≈ α·t^{1-1/n} near 0, the volume F of
//! the centered ball of radius s in the synthesized space solves
//!
//! ```text
//! F'(s) = f(s_{n-1}·F(s)^n) / (n·s_{n-1}·F(s)^{n-1}),   F(0) = 0,
//! F'(0) = α / (n·s_{n-1}^{1/n}),
//! ```
//!
//! (F is the *radius-like* variable with ball volume s_{n-1}F^n). The warp
//! comes out algebraically as g(s) = (f(V(s))/s_{n-1})^{1/(n-1)}, and the
//! cone angle at the origin is α^n/(n^{n-1}·s_{n-1}).

use crate::error::{Error, Result};
use crate::modelgeom::{unit_ball_volume, unit_sphere_area};
use crate::num::ode;
use crate::radial::profile::ProfileTable;
use crate::radial::space::{RadialSpace, Trumpet};

/// Cone angle α^n/(n^{n-1}·s_{n-1}) produced by a profile with small-volume
/// asymptote f(t) ≈ α·t^{1-1/n}.
pub fn cone_angle_from_alpha(alpha: f64, n: u32) -> Result<f64> {
    let nf = n as f64;
    Ok(alpha.powi(n as i32) / (nf.powi(n as i32 - 1) * unit_sphere_area(n)?))
}

/// Measure α = lim_{t→0} f(t)/t^{1-1/n} from the smallest decile of the
/// table; errors out if the ratio has not stabilized in the window.
fn measure_alpha(f: &ProfileTable, n: u32) -> Result<f64> {
    let window = (f.len() / 10).max(3).min(f.len());
    let expo = 1.0 - 1.0 / n as f64;
    let mut ratios = Vec::with_capacity(window);
    for j in 0..window {
        ratios.push(f.perimeters()[j] / f.volumes()[j].powf(expo));
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0) {
        return Err(Error::SingularProfile(format!(
            "profile ratio f(t)/t^{{1-1/{n}}} is not positive near 0 (min {min})"
        )));
    }
    if max / min > 1.10 {
        return Err(Error::Asymptote(format!(
            "profile ratio f(t)/t^{{1-1/{n}}} has not converged over the smallest decile \
             (spread {min:.6e}..{max:.6e}); cannot extract the cone asymptote"
        )));
    }
    Ok(ratios[0])
}

/// Synthesize the radial space whose radial profile matches the table.
///
/// Integrates the synthesis ODE with an adaptive embedded Runge-Kutta
/// scheme, seeded near s = 0 by the series F ≈ F'(0)·s until F exceeds
/// 1e-8. The returned space is tabulated on a geometric radius grid (ratio
/// ~1.004, at most 4000 nodes) spanning the table's volume range — dense
/// enough that the space's own interpolation stays below ~1e-5 relative on
/// exponentially growing warps; its label records the cone angle
/// α^n/(n^{n-1}s_{n-1}) implied by the measured α.
pub fn synthesize_from_profile(f: &ProfileTable, n: u32) -> Result<RadialSpace> {
    if n < 2 {
        return Err(Error::domain(format!("synthesis needs n >= 2, got {n}")));
    }
    if f.len() < 2 {
        return Err(Error::input(format!(
            "synthesis needs a profile with at least 2 points, got {}",
            f.len()
        )));
    }
    let alpha = measure_alpha(f, n)?;
    let s_const = unit_sphere_area(n)?;
    let fp0 = alpha / (n as f64 * s_const.powf(1.0 / n as f64));

    let s_min = f.arc_length(f.t_min())?;
    let s_max = f.arc_length(f.t_max())?;
    if !s_max.is_finite() {
        return Err(Error::Asymptote(
            "profile arc length diverges at 0; small-volume exponent must be < 1".to_string(),
        ));
    }
    if !(s_min > 0.0 && s_max > s_min * (1.0 + 1e-9)) {
        return Err(Error::input(format!(
            "degenerate arc-length range [{s_min}, {s_max}] for synthesis"
        )));
    }

    let span = (s_max / s_min).ln();
    let m = ((span / 1.004f64.ln()).ceil() as usize + 1).clamp(32, 4000);
    let step = span / (m as f64 - 1.0);
    let grid: Vec<f64> = (0..m).map(|i| s_min * (step * i as f64).exp()).collect();

    // series region: F = F'(0)·s until F > 1e-8
    let s_start = 1e-8 / fp0;
    let nf = n as f64;
    let rhs = move |_s: f64, big_f: f64| -> f64 {
        let big_f = big_f.max(1e-300);
        let vol = s_const * big_f.powf(nf);
        f.eval_clamped(vol) / (nf * s_const * big_f.powf(nf - 1.0))
    };

    let mut f_values = vec![0.0; m];
    let first_ode = grid.partition_point(|&s| s <= s_start);
    for (i, &s) in grid.iter().take(first_ode).enumerate() {
        f_values[i] = fp0 * s;
    }
    if first_ode < m {
        let y = ode::integrate_to_grid(&rhs, s_start, fp0 * s_start, &grid[first_ode..], 1e-10, 1e-14 * fp0);
        f_values[first_ode..].copy_from_slice(&y);
    }

    let mut warp = Vec::with_capacity(m);
    for &fi in &f_values {
        let vol = s_const * fi.powf(nf);
        let g = (f.eval_clamped(vol) / s_const).powf(1.0 / (nf - 1.0));
        warp.push(g);
    }

    let cone = cone_angle_from_alpha(alpha, n)?;
    RadialSpace::new(n, grid, warp, &format!("synthesized(n={n}, coneAngle={cone:.6})"))
}

/// Construct the profile of a space bilipschitz to a hyperbolic trumpet that
/// a space with Cheeger slope `h` and asymptotic isoperimetric ratio
/// `l_inf` (in dimension `m`) dominates:
///
/// ```text
/// f(t) = (1-δ) · max( m·(l_inf·ω_m)^{1/m}·t^{1-1/m},  h·t ),    δ = 1e-3.
/// ```
///
/// Both branches are certified lower bounds for the dominating profile (the
/// cusp branch near 0, the linear branch everywhere), so their pointwise max
/// with the δ safety margin stays below it. The crossing volume is inserted
/// as a table node, making the tabulated glue exact under log-log
/// interpolation. Returns the trumpet parameters (dimension m, cone angle
/// l_inf) together with the glue table.
pub fn dominating_trumpet(h: f64, l_inf: f64, m: u32) -> Result<(Trumpet, ProfileTable)> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("Cheeger slope must be positive and finite, got {h}")));
    }
    let trumpet = Trumpet::new(m, l_inf)?;
    let delta = 1e-3;
    let mf = m as f64;
    let omega = unit_ball_volume(m)?;
    let cusp_coeff = mf * (l_inf * omega).powf(1.0 / mf);
    // crossing of the two branches
    let t_star = mf.powi(m as i32) * l_inf * omega / h.powi(m as i32);

    let decades = 8.0;
    let pts_per_side = 256usize;
    let mut ts = Vec::with_capacity(2 * pts_per_side + 1);
    for i in 0..pts_per_side {
        let e = -decades + decades * i as f64 / pts_per_side as f64;
        ts.push(t_star * 10f64.powf(e));
    }
    ts.push(t_star);
    for i in 1..=pts_per_side {
        let e = decades * i as f64 / pts_per_side as f64;
        ts.push(t_star * 10f64.powf(e));
    }
    let phis: Vec<f64> = ts
        .iter()
        .map(|&t| (1.0 - delta) * (cusp_coeff * t.powf(1.0 - 1.0 / mf)).max(h * t))
        .collect();
    let table = ProfileTable::new(ts, phis, f64::INFINITY)?;
    Ok((trumpet, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::profile::radial_profile;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn euclidean_table(n: u32) -> ProfileTable {
        let omega = unit_ball_volume(n).unwrap();
        let alpha = n as f64 * omega.powf(1.0 / n as f64);
        let expo = 1.0 - 1.0 / n as f64;
        let ts: Vec<f64> = (0..240).map(|i| 1e-8 * 10f64.powf(i as f64 / 20.0)).collect();
        let phis: Vec<f64> = ts.iter().map(|&t| alpha * t.powf(expo)).collect();
        ProfileTable::new(ts, phis, f64::INFINITY).unwrap()
    }

    #[test]
    fn euclidean_synthesis_recovers_identity_warp() {
        for n in [2u32, 3] {
            let space = synthesize_from_profile(&euclidean_table(n), n).unwrap();
            let mut worst: f64 = 0.0;
            for (&r, &g) in space.radii().iter().zip(space.warp_values()) {
                worst = worst.max((g / r - 1.0).abs());
            }
            assert!(worst <= 1e-6, "n={n}: worst warp error {worst}");
        }
    }

    #[test]
    fn hyperbolic_round_trip() {
        let tr = Trumpet::new(2, 1.0).unwrap();
        let table = tr.profile_table_by_volume(1e-6, 1e3, 1600).unwrap();
        let space = synthesize_from_profile(&table, 2).unwrap();
        let mut worst: f64 = 0.0;
        for &t in table.volumes().iter().filter(|&&t| t > 1e-6 && t < 0.99e3) {
            let phi = radial_profile(&space, t).unwrap();
            worst = worst.max((phi / tr.profile(t).unwrap() - 1.0).abs());
        }
        assert!(worst <= 1e-5, "worst profile error {worst}");
        // warp should be sinh
        let mid = space.radii().len() / 2;
        let r = space.radii()[mid];
        assert_relative_eq!(space.warp_values()[mid], r.sinh(), max_relative = 1e-5);
    }

    #[test]
    fn synthesized_cone_angle_matches_alpha_formula() {
        // α chosen so the cone angle formula gives exactly 1 (smooth point)
        let n = 3u32;
        let alpha = (n as f64).powf((n as f64 - 1.0) / n as f64)
            * unit_sphere_area(n).unwrap().powf(1.0 / n as f64);
        assert_relative_eq!(cone_angle_from_alpha(alpha, n).unwrap(), 1.0, max_relative = 1e-14);
        // trumpet asymptote α = n(βω_n)^{1/n} gives back β
        let beta = 0.37;
        let a = n as f64 * (beta * unit_ball_volume(n).unwrap()).powf(1.0 / n as f64);
        assert_relative_eq!(cone_angle_from_alpha(a, n).unwrap(), beta, max_relative = 1e-13);
    }

    #[test]
    fn linear_tail_gives_exponential_warp() {
        let (_, glue) = dominating_trumpet(1.0, 1.0, 2).unwrap();
        let space = synthesize_from_profile(&glue, 2).unwrap();
        // deep in the linear tail the warp must grow like exp((1-δ)h·s/(n-1))
        let radii = space.radii();
        let m = radii.len();
        let (i, j) = (m - 40, m - 10);
        let measured = (space.warp_values()[j] / space.warp_values()[i]).ln() / (radii[j] - radii[i]);
        let expected = (1.0 - 1e-3) * 1.0 / (2.0 - 1.0);
        assert_relative_eq!(measured, expected, max_relative = 1e-4);
    }

    #[test]
    fn pure_linear_profile_is_refused() {
        let ts: Vec<f64> = (0..100).map(|i| 1e-4 * 10f64.powf(i as f64 / 12.0)).collect();
        let phis: Vec<f64> = ts.iter().map(|&t| 2.0 * t).collect();
        let table = ProfileTable::new(ts, phis, f64::INFINITY).unwrap();
        let err = synthesize_from_profile(&table, 2).unwrap_err();
        assert!(matches!(err, Error::Asymptote(_)), "got {err:?}");
    }

    #[test]
    fn dominating_trumpet_h2_invariants() {
        // H² has h = 1, l_∞ = 1, m = 2; the glue must stay below Φ_{H²}
        let (trumpet, glue) = dominating_trumpet(1.0, 1.0, 2).unwrap();
        assert_eq!(trumpet.n, 2);
        assert_relative_eq!(trumpet.beta, 1.0);
        for (&t, &f) in glue.volumes().iter().zip(glue.perimeters()) {
            let phi_h2 = (t * t + 4.0 * PI * t).sqrt();
            assert!(f <= phi_h2, "glue pokes above the hyperbolic profile at t={t}");
        }
        // glue is exact under interpolation: check between nodes too
        let t_star = 4.0 * PI;
        for t in [t_star * 0.9997, t_star * 1.0003, 0.37e-2, 3.3e4] {
            let expect = (1.0 - 1e-3) * (2.0 * (PI * t).sqrt()).max(t);
            assert_relative_eq!(glue.eval(t).unwrap(), expect, max_relative = 1e-12);
        }
        assert!(dominating_trumpet(0.0, 1.0, 2).is_err());
        assert!(dominating_trumpet(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn synthesis_rejects_bad_dimension() {
        assert!(synthesize_from_profile(&euclidean_table(2), 1).is_err());
    }
}
