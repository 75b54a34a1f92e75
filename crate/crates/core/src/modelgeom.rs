//! Constant-curvature model geometry.
//!
//! The reference objects every comparison in the laboratory leans on: the
//! volume `ω_n` of the Euclidean unit ball, the area `s_{n-1} = n·ω_n` of the
//! unit sphere, and the sphere areas / ball volumes of the simply connected
//! model space of curvature `k`,
//!
//! ```text
//! sn_k(r) = r                    (k = 0)
//!           sinh(r·√-k)/√-k      (k < 0)
//!           sin(r·√k)/√k         (k > 0)
//!
//! s(n, k, r) = s_{n-1} · sn_k(r)^{n-1},    v(n, k, r) = ∫_0^r s(n, k, ρ) dρ.
//! ```
//!
//! Throughout the crate the normalisation is the *sphere-area* one: the
//! boundary-area constant that multiplies warp powers is `s_{n-1}`, so that in
//! dimension 2 the sharp Moser threshold comes out as the classical `4π`.
//!
//! [`bishop_gromov_check`] validates sampled growth data against the model
//! monotonicity statements, and [`asymptotic_growth_ratio`] estimates the
//! small-radius density `lim inf Vol(B_r)/(ω_n r^n)` from samples.

use crate::error::{ensure_finite, Error, Result};
use crate::num::{gauss, special};
use serde::{Deserialize, Serialize};

/// Volume ω_n of the unit ball in R^n (n >= 1): π^{n/2} / Γ(n/2 + 1).
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain(format!("unit ball volume needs n >= 1, got {n}")));
    }
    let half_pow = std::f64::consts::PI.powf(n as f64 / 2.0);
    Ok(half_pow / special::gamma_half_plus_one(n))
}

/// Area s_{n-1} = n·ω_n of the unit sphere S^{n-1} in R^n (n >= 1).
pub fn unit_sphere_area(n: u32) -> Result<f64> {
    Ok(n as f64 * unit_ball_volume(n)?)
}

/// The warp function sn_k of the curvature-k model.
pub fn sn_k(k: f64, r: f64) -> f64 {
    if k == 0.0 {
        r
    } else if k < 0.0 {
        let a = (-k).sqrt();
        (a * r).sinh() / a
    } else {
        let a = k.sqrt();
        (a * r).sin() / a
    }
}

/// Simply connected n-dimensional model space of constant curvature k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub n: u32,
    pub k: f64,
}

impl ModelSpace {
    pub fn new(n: u32, k: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("model space needs n >= 2, got {n}")));
        }
        if !k.is_finite() {
            return Err(Error::input(format!("curvature must be finite, got {k}")));
        }
        Ok(ModelSpace { n, k })
    }

    /// Horizon radius: ∞ for k <= 0, π·√((n-1)/k) for k > 0.
    pub fn horizon(&self) -> f64 {
        if self.k <= 0.0 {
            f64::INFINITY
        } else {
            std::f64::consts::PI * ((self.n as f64 - 1.0) / self.k).sqrt()
        }
    }

    /// Sphere area s(n, k, r) = s_{n-1}·sn_k(r)^{n-1} for 0 < r < horizon.
    ///
    /// For k > 0 and n >= 3 the horizon `π√((n-1)/k)` lies beyond the zero of
    /// `sn_k` at `π/√k`; radii in that gap have degenerate (non-positive)
    /// spheres and are rejected as out of domain too.
    pub fn sphere_area(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("sphere radius must be positive and finite, got {r}")));
        }
        if r >= self.horizon() {
            return Err(Error::domain(format!(
                "radius {r} is at or beyond the horizon {} of the curvature-{} model",
                self.horizon(),
                self.k
            )));
        }
        let s = sn_k(self.k, r);
        if s <= 0.0 {
            return Err(Error::domain(format!(
                "sphere of radius {r} degenerates in the curvature-{} model",
                self.k
            )));
        }
        Ok(unit_sphere_area(self.n)? * s.powi(self.n as i32 - 1))
    }

    /// Ball volume v(n, k, r) = ∫_0^r s(n, k, ρ) dρ.
    ///
    /// Closed forms for n = 2, 3 and flat space; adaptive quadrature to
    /// absolute tolerance 1e-10 otherwise.
    pub fn ball_volume(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("ball radius must be positive and finite, got {r}")));
        }
        if r >= self.horizon() {
            return Err(Error::domain(format!(
                "radius {r} is at or beyond the horizon {} of the curvature-{} model",
                self.horizon(),
                self.k
            )));
        }
        let n = self.n;
        let k = self.k;
        if k == 0.0 {
            return Ok(unit_ball_volume(n)? * r.powi(n as i32));
        }
        let s_area = unit_sphere_area(n)?;
        let a = k.abs().sqrt();
        match n {
            2 => {
                // ∫ sn_k = (1 - cos(ar))/k  (k>0),  (cosh(ar) - 1)/(-k) (k<0)
                let integral = if k > 0.0 {
                    (1.0 - (a * r).cos()) / k
                } else {
                    ((a * r).cosh() - 1.0) / (-k)
                };
                Ok(s_area * integral)
            }
            3 => {
                // ∫ sn_k² = (ar - sin·cos)/(2a³) (k>0), (sinh·cosh - ar)/(2a³) (k<0)
                let integral = if k > 0.0 {
                    (a * r - (a * r).sin() * (a * r).cos()) / (2.0 * a.powi(3))
                } else {
                    ((a * r).sinh() * (a * r).cosh() - a * r) / (2.0 * a.powi(3))
                };
                Ok(s_area * integral)
            }
            _ => {
                let nn = n as i32;
                let f = move |rho: f64| sn_k(k, rho).powi(nn - 1);
                Ok(s_area * gauss::adaptive(&f, 0.0, r, 1e-10))
            }
        }
    }
}

/// Sampled metric growth data around a point: ball volumes (and optionally
/// sphere perimeters) at strictly increasing radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthSamples {
    pub radii: Vec<f64>,
    pub ball_volumes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perimeters: Option<Vec<f64>>,
}

impl GrowthSamples {
    pub fn new(radii: Vec<f64>, ball_volumes: Vec<f64>, perimeters: Option<Vec<f64>>) -> Result<Self> {
        if radii.len() != ball_volumes.len() {
            return Err(Error::input(format!(
                "radii ({}) and ball volumes ({}) must have equal length",
                radii.len(),
                ball_volumes.len()
            )));
        }
        if let Some(p) = &perimeters {
            if p.len() != radii.len() {
                return Err(Error::input(format!(
                    "perimeters ({}) and radii ({}) must have equal length",
                    p.len(),
                    radii.len()
                )));
            }
            ensure_finite(p, "perimeters")?;
            if p.iter().any(|&x| x <= 0.0) {
                return Err(Error::input("perimeters must be positive".to_string()));
            }
        }
        ensure_finite(&radii, "radii")?;
        ensure_finite(&ball_volumes, "ballVolumes")?;
        if radii.windows(2).any(|w| w[0] >= w[1]) || radii.first().is_some_and(|&r| r <= 0.0) {
            return Err(Error::input("radii must be strictly increasing and positive".to_string()));
        }
        if ball_volumes.iter().any(|&v| v <= 0.0) {
            return Err(Error::input("ball volumes must be positive".to_string()));
        }
        if ball_volumes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("ball volumes must be nondecreasing in the radius".to_string()));
        }
        Ok(GrowthSamples {
            radii,
            ball_volumes,
            perimeters,
        })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Outcome of the Bishop–Gromov comparison on sampled data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BishopGromovReport {
    /// Vol(B_r)/v(n,k,r) nonincreasing in r.
    pub monotone_volume_ratio: bool,
    /// Per(B_R)/s(n,k,R) <= Per(B_r)/s(n,k,r) for r <= R (vacuously true
    /// without perimeter samples).
    pub perimeter_ratio_monotone: bool,
    /// Per(B_r)/s(n,k,r) <= Vol(B_r)/v(n,k,r) at every sample (vacuously true
    /// without perimeter samples).
    pub perimeter_leq_volume_ratio: bool,
    /// Largest positive violation found across all three comparisons.
    pub worst_violation: f64,
}

impl BishopGromovReport {
    pub fn all_hold(&self) -> bool {
        self.monotone_volume_ratio && self.perimeter_ratio_monotone && self.perimeter_leq_volume_ratio
    }
}

/// Check the sampled growth data against Bishop–Gromov monotonicity relative
/// to the curvature-k model. Violations up to `tol` are tolerated.
pub fn bishop_gromov_check(
    samples: &GrowthSamples,
    model: &ModelSpace,
    tol: f64,
) -> Result<BishopGromovReport> {
    if samples.len() < 2 {
        return Err(Error::input(format!(
            "Bishop-Gromov check needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let horizon = model.horizon();
    if let Some(&r_max) = samples.radii.last() {
        if r_max >= horizon {
            return Err(Error::domain(format!(
                "sample radius {r_max} is at or beyond the model horizon {horizon}"
            )));
        }
    }

    let vol_ratio: Vec<f64> = samples
        .radii
        .iter()
        .zip(&samples.ball_volumes)
        .map(|(&r, &v)| Ok(v / model.ball_volume(r)?))
        .collect::<Result<_>>()?;
    let per_ratio: Option<Vec<f64>> = match &samples.perimeters {
        Some(ps) => Some(
            samples
                .radii
                .iter()
                .zip(ps)
                .map(|(&r, &p)| Ok(p / model.sphere_area(r)?))
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => None,
    };

    let mut worst: f64 = 0.0;
    let mut vol_mono = true;
    for w in vol_ratio.windows(2) {
        let excess = w[1] - w[0];
        if excess > tol {
            vol_mono = false;
        }
        worst = worst.max(excess);
    }

    let mut per_mono = true;
    let mut per_leq_vol = true;
    if let Some(pr) = &per_ratio {
        for w in pr.windows(2) {
            let excess = w[1] - w[0];
            if excess > tol {
                per_mono = false;
            }
            worst = worst.max(excess);
        }
        for (p, v) in pr.iter().zip(&vol_ratio) {
            let excess = p - v;
            if excess > tol {
                per_leq_vol = false;
            }
            worst = worst.max(excess);
        }
    }

    Ok(BishopGromovReport {
        monotone_volume_ratio: vol_mono,
        perimeter_ratio_monotone: per_mono,
        perimeter_leq_volume_ratio: per_leq_vol,
        worst_violation: worst.max(0.0),
    })
}

/// Windowed estimate of the small-radius density
/// `lim inf_{r→0} Vol(B_r)/(ω_n r^n)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GrowthRatioEstimate {
    /// Minimum density ratio over the window of smallest radii.
    pub value: f64,
    /// Radius window [min, max] the estimate was taken over.
    pub window: (f64, f64),
    /// Number of samples in the window.
    pub samples_used: usize,
    /// Relative spread (max-min)/max of the ratios in the window.
    pub spread: f64,
    /// True when the window ratios are flat enough (spread <= 2%) for the
    /// windowed minimum to stand in for the r → 0 liminf.
    pub reliable: bool,
}

/// Estimate the asymptotic volume growth ratio from samples: the minimum of
/// `Vol(B_r)/(ω_n r^n)` over the smallest decile of radii (at least 3
/// samples). The estimate is flagged unreliable when the window ratios are
/// not flat, e.g. because the data has no genuinely small radii.
pub fn asymptotic_growth_ratio(samples: &GrowthSamples, n: u32) -> Result<GrowthRatioEstimate> {
    if samples.len() < 3 {
        return Err(Error::input(format!(
            "asymptotic growth ratio needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let omega = unit_ball_volume(n)?;
    let window = (samples.len() / 10).max(3).min(samples.len());
    let ratios: Vec<f64> = samples.radii[..window]
        .iter()
        .zip(&samples.ball_volumes[..window])
        .map(|(&r, &v)| v / (omega * r.powi(n as i32)))
        .collect();
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = if max > 0.0 { (max - min) / max } else { 0.0 };
    Ok(GrowthRatioEstimate {
        value: min,
        window: (samples.radii[0], samples.radii[window - 1]),
        samples_used: window,
        spread,
        reliable: spread <= 0.02,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(2).unwrap(), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4).unwrap(), PI * PI / 2.0, max_relative = 1e-15);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn unit_sphere_areas() {
        assert_relative_eq!(unit_sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn model_sphere_areas() {
        let hyp = ModelSpace::new(2, -1.0).unwrap();
        assert_relative_eq!(hyp.sphere_area(1.0).unwrap(), 2.0 * PI * 1.0_f64.sinh(), max_relative = 1e-14);
        let sph = ModelSpace::new(3, 1.0).unwrap();
        assert_relative_eq!(sph.sphere_area(PI / 2.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        // beyond the horizon
        let m2 = ModelSpace::new(2, 1.0).unwrap();
        assert!(m2.sphere_area(PI + 0.1).is_err());
        // degenerate window for n >= 3, k > 0: zero of sn at π < horizon π√2
        assert!(sph.sphere_area(PI + 0.05).is_err());
    }

    #[test]
    fn model_ball_volumes() {
        let hyp = ModelSpace::new(2, -1.0).unwrap();
        assert_relative_eq!(hyp.ball_volume(1.0).unwrap(), 2.0 * PI * (1.0_f64.cosh() - 1.0), max_relative = 1e-14);
        let flat = ModelSpace::new(2, 0.0).unwrap();
        assert_relative_eq!(flat.ball_volume(2.0).unwrap(), 4.0 * PI, max_relative = 1e-15);
        // n = 4 goes through quadrature; compare with the closed form
        // v(4,-1,r) = s_3 ∫ sinh³ = 2π² (cosh³r/3 - cosh r + 2/3)
        let h4 = ModelSpace::new(4, -1.0).unwrap();
        let r = 1.3f64;
        let c = r.cosh();
        let exact = 2.0 * PI * PI * (c.powi(3) / 3.0 - c + 2.0 / 3.0);
        assert_relative_eq!(h4.ball_volume(r).unwrap(), exact, max_relative = 1e-10);
    }

    #[test]
    fn sphere_area_is_volume_derivative() {
        let m = ModelSpace::new(3, -0.7).unwrap();
        for r in [0.3, 1.0, 2.4] {
            let h = 1e-5;
            let fd = (m.ball_volume(r + h).unwrap() - m.ball_volume(r - h).unwrap()) / (2.0 * h);
            let s = m.sphere_area(r).unwrap();
            assert_relative_eq!(fd, s, max_relative = 1e-6);
        }
    }

    #[test]
    fn curvature_comparison() {
        // v(n,k,r) decreasing in k
        let r = 1.1;
        let v_neg = ModelSpace::new(3, -1.0).unwrap().ball_volume(r).unwrap();
        let v_flat = ModelSpace::new(3, 0.0).unwrap().ball_volume(r).unwrap();
        let v_pos = ModelSpace::new(3, 1.0).unwrap().ball_volume(r).unwrap();
        assert!(v_neg > v_flat && v_flat > v_pos);
    }

    fn model_samples(m: &ModelSpace, radii: &[f64]) -> GrowthSamples {
        let vols: Vec<f64> = radii.iter().map(|&r| m.ball_volume(r).unwrap()).collect();
        let pers: Vec<f64> = radii.iter().map(|&r| m.sphere_area(r).unwrap()).collect();
        GrowthSamples::new(radii.to_vec(), vols, Some(pers)).unwrap()
    }

    #[test]
    fn bishop_gromov_model_data_is_clean() {
        let radii: Vec<f64> = (1..=40).map(|i| i as f64 * 0.05).collect();
        for k in [-1.0, 0.0, 1.0] {
            let m = ModelSpace::new(2, k).unwrap();
            let s = model_samples(&m, &radii);
            let rep = bishop_gromov_check(&s, &m, 1e-12).unwrap();
            assert!(rep.all_hold(), "k={k}: {rep:?}");
            assert!(rep.worst_violation <= 1e-12);
        }
    }

    #[test]
    fn bishop_gromov_detects_planted_violation() {
        let radii: Vec<f64> = (1..=40).map(|i| i as f64 * 0.05).collect();
        let m = ModelSpace::new(2, 0.0).unwrap();
        let mut s = model_samples(&m, &radii);
        s.ball_volumes[20] *= 1.02;
        let rep = bishop_gromov_check(&s, &m, 1e-9).unwrap();
        assert!(!rep.monotone_volume_ratio);
        assert!(rep.worst_violation > 0.01);
    }

    #[test]
    fn growth_ratio_euclidean_and_window_flag() {
        let omega = unit_ball_volume(2).unwrap();
        let radii: Vec<f64> = (1..=50).map(|i| i as f64 * 1e-3).collect();
        let vols: Vec<f64> = radii.iter().map(|&r| omega * r * r).collect();
        let s = GrowthSamples::new(radii, vols, None).unwrap();
        let est = asymptotic_growth_ratio(&s, 2).unwrap();
        assert_relative_eq!(est.value, 1.0, max_relative = 1e-12);
        assert!(est.reliable);

        // hyperbolic data with only large radii: curvature correction is
        // visible across the window, so the estimate must be flagged
        let m = ModelSpace::new(2, -1.0).unwrap();
        let radii: Vec<f64> = (0..30).map(|i| 1.0 + i as f64 * 0.1).collect();
        let vols: Vec<f64> = radii.iter().map(|&r| m.ball_volume(r).unwrap()).collect();
        let s = GrowthSamples::new(radii, vols, None).unwrap();
        let est = asymptotic_growth_ratio(&s, 2).unwrap();
        assert!(!est.reliable);
    }
}
