//! Warped radial spaces with power-law segment arithmetic.

use crate::error::{ensure_finite, Error, Result};
use crate::modelgeom::{unit_ball_volume, unit_sphere_area, ModelSpace};
use crate::radial::profile::ProfileTable;
use serde::{Deserialize, Serialize};

/// Rotationally symmetric n-dimensional space `dr² + g(r)² dθ²`.
///
/// The warp is tabulated at strictly increasing radii `r_1 < … < r_M` and
/// interpolated log-linearly, so each segment `[r_i, r_{i+1}]` carries an
/// exact power law `g(ρ) = g_i (ρ/r_i)^{γ_i}`. Below `r_1` the first
/// segment's power law is extended down to the origin. Boundary areas,
/// volumes, the inverse volume map, and `∫ X^q dρ` power integrals are all
/// evaluated in closed form per segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpaceDto", into = "SpaceDto")]
pub struct RadialSpace {
    n: u32,
    label: String,
    radii: Vec<f64>,
    warp: Vec<f64>,
    /// log-log slope of segment i = [r_i, r_{i+1}] (len M-1).
    gammas: Vec<f64>,
    /// cumulative volume V(r_i) at each node (len M).
    node_volumes: Vec<f64>,
    /// s_{n-1}, cached.
    sphere_const: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SpaceDto {
    n: u32,
    #[serde(default)]
    label: String,
    points: Vec<SpacePoint>,
}

#[derive(Serialize, Deserialize)]
struct SpacePoint {
    r: f64,
    g: f64,
}

impl From<RadialSpace> for SpaceDto {
    fn from(s: RadialSpace) -> Self {
        SpaceDto {
            n: s.n,
            label: s.label.clone(),
            points: s
                .radii
                .iter()
                .zip(&s.warp)
                .map(|(&r, &g)| SpacePoint { r, g })
                .collect(),
        }
    }
}

impl TryFrom<SpaceDto> for RadialSpace {
    type Error = Error;
    fn try_from(d: SpaceDto) -> Result<Self> {
        let (radii, warp) = d.points.iter().map(|p| (p.r, p.g)).unzip();
        RadialSpace::new(d.n, radii, warp, &d.label)
    }
}

/// One power-law piece: X(ρ) = base_x · (ρ/base_r)^{e} on some radius range.
#[derive(Debug, Clone, Copy)]
struct PowerPiece {
    base_r: f64,
    base_x: f64,
    e: f64,
}

impl PowerPiece {
    /// ∫_a^b base_x (ρ/base_r)^e dρ in closed form; returns +∞ for a
    /// divergent endpoint at a = 0.
    fn integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        if a == b {
            return 0.0;
        }
        let ep1 = self.e + 1.0;
        if a == 0.0 {
            if ep1 <= 0.0 {
                return f64::INFINITY;
            }
            return self.base_x * self.base_r / ep1 * (b / self.base_r).powf(ep1);
        }
        if ep1.abs() < 1e-12 {
            return self.base_x * self.base_r * (b / a).ln();
        }
        // (b/R)^{e+1} - (a/R)^{e+1} = (a/R)^{e+1} · expm1((e+1)·ln(b/a))
        let lead = self.base_x * self.base_r / ep1 * (a / self.base_r).powf(ep1);
        lead * ((b / a).ln() * ep1).exp_m1()
    }

    /// Solve ∫_{base of piece}^{r} … = target within this piece, where the
    /// lower limit is `from` (either 0 or a node radius) and the integral
    /// from `from` to r must equal `target`.
    fn invert(&self, from: f64, target: f64) -> f64 {
        let ep1 = self.e + 1.0;
        if from == 0.0 {
            // target = base_x·base_r/ep1 · (r/base_r)^{ep1}
            let z = target * ep1 / (self.base_x * self.base_r);
            return self.base_r * z.powf(1.0 / ep1);
        }
        if ep1.abs() < 1e-12 {
            return from * (target / (self.base_x * self.base_r)).exp();
        }
        // (r/R)^{ep1} = (from/R)^{ep1} + target·ep1/(base_x·R)
        let f_pow = (from / self.base_r).powf(ep1);
        let z = target * ep1 / (self.base_x * self.base_r) / f_pow;
        from * ((z.ln_1p()) / ep1).exp()
    }

    fn value(&self, r: f64) -> f64 {
        self.base_x * (r / self.base_r).powf(self.e)
    }
}

impl RadialSpace {
    /// Build a space from warp samples. Radii must be strictly increasing
    /// and positive, warps positive; the power-law extension toward the
    /// origin must have integrable boundary area ((n-1)·γ_1 > -1).
    pub fn new(n: u32, radii: Vec<f64>, warp: Vec<f64>, label: &str) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("radial space needs n >= 2, got {n}")));
        }
        if radii.len() < 2 || radii.len() != warp.len() {
            return Err(Error::input(format!(
                "warp table needs >= 2 nodes with matching lengths, got {} radii / {} warps",
                radii.len(),
                warp.len()
            )));
        }
        ensure_finite(&radii, "radii")?;
        ensure_finite(&warp, "warp")?;
        if radii.first().is_some_and(|&r| r <= 0.0) || radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("radii must be strictly increasing and positive".to_string()));
        }
        if warp.iter().any(|&g| g <= 0.0) {
            return Err(Error::input("warp values must be positive".to_string()));
        }
        let gammas: Vec<f64> = radii
            .windows(2)
            .zip(warp.windows(2))
            .map(|(r, g)| (g[1] / g[0]).ln() / (r[1] / r[0]).ln())
            .collect();
        let nm1 = (n - 1) as f64;
        if nm1 * gammas[0] + 1.0 <= 1e-9 {
            return Err(Error::domain(format!(
                "warp slope {} at the origin makes the volume integral divergent",
                gammas[0]
            )));
        }
        let sphere_const = unit_sphere_area(n)?;
        let mut s = RadialSpace {
            n,
            label: label.to_string(),
            radii,
            warp,
            gammas,
            node_volumes: Vec::new(),
            sphere_const,
        };
        let mut acc = s.piece(0).integral(0.0, s.radii[0]);
        let mut node_volumes = vec![acc];
        for i in 0..s.radii.len() - 1 {
            acc += s.piece(i + 1).integral(s.radii[i], s.radii[i + 1]);
            node_volumes.push(acc);
        }
        if !acc.is_finite() {
            return Err(Error::domain("warp produces an infinite ball volume".to_string()));
        }
        s.node_volumes = node_volumes;
        Ok(s)
    }

    /// The boundary-area power piece for q = 1 (X itself) with index
    /// 0 = origin extension, i >= 1 = segment [r_i, r_{i+1}].
    fn piece(&self, idx: usize) -> PowerPiece {
        self.piece_pow(idx, 1.0)
    }

    /// Power piece describing X(ρ)^q on piece `idx`.
    fn piece_pow(&self, idx: usize, q: f64) -> PowerPiece {
        let nm1 = (self.n - 1) as f64;
        let (base_i, gamma) = if idx == 0 {
            (0, self.gammas[0])
        } else {
            (idx - 1, self.gammas[idx - 1])
        };
        let base_x = self.sphere_const * self.warp[base_i].powf(nm1);
        PowerPiece {
            base_r: self.radii[base_i],
            base_x: base_x.powf(q),
            e: nm1 * gamma * q,
        }
    }

    /// Piece index covering radius r (0 for r <= r_1).
    fn piece_index(&self, r: f64) -> usize {
        self.radii.partition_point(|&ri| ri < r)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn warp_values(&self) -> &[f64] {
        &self.warp
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    /// s_{n-1}, the unit-sphere area constant of the dimension.
    pub fn sphere_constant(&self) -> f64 {
        self.sphere_const
    }

    /// Warp value g(r), 0 < r <= r_max (power-law extended below r_1).
    pub fn warp(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let r = r.min(self.r_max());
        let idx = self.piece_index(r);
        if idx < self.radii.len() && self.radii[idx] == r {
            return Ok(self.warp[idx]);
        }
        let (base_i, gamma) = if idx == 0 { (0, self.gammas[0]) } else { (idx - 1, self.gammas[idx - 1]) };
        Ok(self.warp[base_i] * (r / self.radii[base_i]).powf(gamma))
    }

    /// Boundary area X(r) = s_{n-1}·g(r)^{n-1} of the centered sphere.
    /// Node radii evaluate to the tabulated value bitwise.
    pub fn boundary_area(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let r = r.min(self.r_max());
        let idx = self.piece_index(r);
        if idx < self.radii.len() && self.radii[idx] == r {
            return Ok(self.sphere_const * self.warp[idx].powf((self.n - 1) as f64));
        }
        Ok(self.piece(idx).value(r))
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
        }
        if r > self.r_max() * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "radius {r} beyond the tabulated maximum {}",
                self.r_max()
            )));
        }
        Ok(())
    }

    /// Ball volume V(r) = ∫_0^r X(ρ) dρ, closed form per segment. Node radii
    /// return the accumulated node volume bitwise.
    pub fn volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        let r = r.min(self.r_max());
        let idx = self.piece_index(r);
        if idx < self.radii.len() && self.radii[idx] == r {
            return Ok(self.node_volumes[idx]);
        }
        if idx == 0 {
            return Ok(self.piece(0).integral(0.0, r));
        }
        let base = self.node_volumes[idx - 1];
        Ok(base + self.piece(idx).integral(self.radii[idx - 1], r))
    }

    /// Total volume V(r_max) of the (truncated) space.
    pub fn total_volume(&self) -> f64 {
        *self.node_volumes.last().unwrap()
    }

    /// Inverse of the volume map: the radius T with V(T) = v.
    pub fn radius_at_volume(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::range(format!("volume must be positive and finite, got {v}")));
        }
        if v > self.total_volume() * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "volume {v} exceeds the space total {}",
                self.total_volume()
            )));
        }
        let v = v.min(self.total_volume());
        let idx = self.node_volumes.partition_point(|&nv| nv < v);
        if idx < self.node_volumes.len() && self.node_volumes[idx] == v {
            return Ok(self.radii[idx]);
        }
        if idx == 0 {
            return Ok(self.piece(0).invert(0.0, v));
        }
        let from = self.radii[idx - 1];
        Ok(self.piece(idx).invert(from, v - self.node_volumes[idx - 1]))
    }

    /// Boundary area of the centered ball of volume v (the radial profile).
    pub fn boundary_area_at_volume(&self, v: f64) -> Result<f64> {
        let r = self.radius_at_volume(v)?;
        self.boundary_area(r)
    }

    /// Closed-form ∫_a^b X(ρ)^q dρ across segments, 0 <= a <= b <= r_max.
    /// Returns +∞ when the integrand is non-integrable at a = 0.
    pub fn power_integral(&self, q: f64, a: f64, b: f64) -> Result<f64> {
        if !(q.is_finite() && a.is_finite() && b.is_finite()) || a < 0.0 || b < a {
            return Err(Error::input(format!("bad power integral bounds q={q}, a={a}, b={b}")));
        }
        if b > self.r_max() * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "integral endpoint {b} beyond the tabulated maximum {}",
                self.r_max()
            )));
        }
        let b = b.min(self.r_max());
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            // piece whose interior starts at lo: a node radius belongs to the
            // segment it opens, not the one it closes
            let idx = self.radii.partition_point(|&ri| ri <= lo);
            let hi_bound = if idx < self.radii.len() { self.radii[idx] } else { self.r_max() };
            let hi = b.min(hi_bound);
            total += self.piece_pow(idx, q).integral(lo, hi);
            if !total.is_finite() {
                return Ok(f64::INFINITY);
            }
            if hi >= b {
                break;
            }
            lo = hi;
        }
        Ok(total)
    }

    /// Tabulate the radial profile t ↦ X(V^{-1}(t)) as a ProfileTable.
    ///
    /// Uses up to `m` of the space's own nodes (always including the first
    /// and last), so every emitted point is exact — no interpolation error
    /// enters the table itself.
    pub fn profile_table(&self, m: usize) -> Result<ProfileTable> {
        if m < 2 {
            return Err(Error::input(format!("profile table needs at least 2 points, got {m}")));
        }
        let total = self.total_volume();
        let count = m.min(self.radii.len());
        let last = self.radii.len() - 1;
        let nm1 = (self.n - 1) as f64;
        let mut vols = Vec::with_capacity(count);
        let mut pers = Vec::with_capacity(count);
        let mut prev_idx = usize::MAX;
        for j in 0..count {
            let idx = if count == 1 { last } else { j * last / (count - 1) };
            if idx == prev_idx {
                continue;
            }
            prev_idx = idx;
            vols.push(self.node_volumes[idx]);
            pers.push(self.sphere_const * self.warp[idx].powf(nm1));
        }
        ProfileTable::new(vols, pers, total)
    }
}

/// Hyperbolic trumpet H^n_β: warp g(r) = β^{1/(n-1)}·sinh(r), cone angle β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trumpet {
    pub n: u32,
    pub beta: f64,
}

impl Trumpet {
    pub fn new(n: u32, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("trumpet needs n >= 2, got {n}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::domain(format!("cone angle must lie in (0, 1], got {beta}")));
        }
        Ok(Trumpet { n, beta })
    }

    pub fn warp(&self, r: f64) -> f64 {
        self.beta.powf(1.0 / (self.n as f64 - 1.0)) * r.sinh()
    }

    /// Ball volume: β times the hyperbolic model volume.
    pub fn volume(&self, r: f64) -> Result<f64> {
        Ok(self.beta * ModelSpace::new(self.n, -1.0)?.ball_volume(r)?)
    }

    /// Boundary area: β times the hyperbolic model sphere area.
    pub fn boundary_area(&self, r: f64) -> Result<f64> {
        Ok(self.beta * ModelSpace::new(self.n, -1.0)?.sphere_area(r)?)
    }

    /// Radial profile φ_β(t). In dimension 2 this is the closed form
    /// √(t² + 4πβt); otherwise it goes through the volume inverse.
    pub fn profile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::range(format!("profile argument must be positive and finite, got {t}")));
        }
        if self.n == 2 {
            let b = self.beta;
            return Ok((t * t + 4.0 * std::f64::consts::PI * b * t).sqrt());
        }
        let r = self.radius_at_volume(t)?;
        self.boundary_area(r)
    }

    /// Inverse volume map by bisection on the closed-form volume.
    pub fn radius_at_volume(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::range(format!("volume must be positive and finite, got {v}")));
        }
        let mut hi = 1.0;
        while self.volume(hi)? < v {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::range(format!("volume {v} unreachable (radius > 1e4)")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.volume(mid)? < v {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Materialize the trumpet as a RadialSpace on a geometric grid of `m`
    /// nodes spanning four decades below r_max.
    pub fn space(&self, r_max: f64, m: usize) -> Result<RadialSpace> {
        trumpet_space(self.n, self.beta, r_max, m)
    }

    /// Tabulated profile between two volumes, log-spaced in radius, with
    /// infinite total volume (the trumpet is unbounded).
    pub fn profile_table_by_volume(&self, t_min: f64, t_max: f64, m: usize) -> Result<ProfileTable> {
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::input(format!("need 0 < tMin < tMax, got {t_min}, {t_max}")));
        }
        if m < 2 {
            return Err(Error::input(format!("profile table needs at least 2 points, got {m}")));
        }
        let r_lo = self.radius_at_volume(t_min)?;
        let r_hi = self.radius_at_volume(t_max)?;
        let mut vols = Vec::with_capacity(m);
        let mut pers = Vec::with_capacity(m);
        let ratio = (r_hi / r_lo).ln() / (m as f64 - 1.0);
        for i in 0..m {
            let r = r_lo * (ratio * i as f64).exp();
            vols.push(self.volume(r)?);
            pers.push(self.boundary_area(r)?);
        }
        ProfileTable::new(vols, pers, f64::INFINITY)
    }
}

/// Materialize the trumpet H^n_β on a geometric radius grid of `m >= 16`
/// nodes, refined toward the origin (grid spans four decades below r_max).
pub fn trumpet_space(n: u32, beta: f64, r_max: f64, m: usize) -> Result<RadialSpace> {
    let t = Trumpet::new(n, beta)?;
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::domain(format!("rMax must be positive and finite, got {r_max}")));
    }
    if m < 16 {
        return Err(Error::input(format!("trumpet grid needs at least 16 nodes, got {m}")));
    }
    let r_min = r_max * 1e-4;
    let step = (r_max / r_min).ln() / (m as f64 - 1.0);
    let radii: Vec<f64> = (0..m).map(|i| r_min * (step * i as f64).exp()).collect();
    let warp: Vec<f64> = radii.iter().map(|&r| t.warp(r)).collect();
    RadialSpace::new(n, radii, warp, &format!("trumpet(n={n}, beta={beta})"))
}

/// Windowed estimate of a space's cone angle at the origin: the small-ball
/// density V(r)/(ω_n r^n) minimized over the smallest decile of grid radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConeAngleEstimate {
    pub value: f64,
    pub window: (f64, f64),
    pub spread: f64,
    pub reliable: bool,
}

impl RadialSpace {
    /// Estimate the cone angle at the origin (1 = smooth point, β for the
    /// trumpet H^n_β). Flagged unreliable when the density has not settled
    /// over the window.
    pub fn cone_angle(&self) -> Result<ConeAngleEstimate> {
        let omega = unit_ball_volume(self.n)?;
        let window = (self.radii.len() / 10).max(3).min(self.radii.len());
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for i in 0..window {
            let r = self.radii[i];
            let d = self.node_volumes[i] / (omega * r.powi(self.n as i32));
            min = min.min(d);
            max = max.max(d);
        }
        let spread = if max > 0.0 { (max - min) / max } else { 0.0 };
        Ok(ConeAngleEstimate {
            value: min,
            window: (self.radii[0], self.radii[window - 1]),
            spread,
            reliable: spread <= 0.01,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::gauss;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn euclidean(n: u32, m: usize, r_max: f64) -> RadialSpace {
        let r_min = r_max * 1e-4;
        let step = (r_max / r_min).ln() / (m as f64 - 1.0);
        let radii: Vec<f64> = (0..m).map(|i| r_min * (step * i as f64).exp()).collect();
        let warp = radii.clone();
        RadialSpace::new(n, radii, warp, "euclidean").unwrap()
    }

    #[test]
    fn euclidean_volumes_are_exact() {
        let s = euclidean(2, 64, 3.0);
        for r in [0.5e-4, 0.01, 0.5, 1.0, 2.9999] {
            assert_relative_eq!(s.volume(r).unwrap(), PI * r * r, max_relative = 1e-13);
            assert_relative_eq!(s.boundary_area(r).unwrap(), 2.0 * PI * r, max_relative = 1e-13);
        }
        let s3 = euclidean(3, 64, 2.0);
        for r in [0.01, 1.3] {
            assert_relative_eq!(s3.volume(r).unwrap(), 4.0 * PI / 3.0 * r.powi(3), max_relative = 1e-13);
        }
    }

    #[test]
    fn volume_inverse_round_trips() {
        let s = euclidean(3, 80, 2.0);
        for v in [1e-9, 1e-4, 0.3, 4.1, s.total_volume()] {
            let r = s.radius_at_volume(v).unwrap();
            assert_relative_eq!(s.volume(r).unwrap(), v, max_relative = 1e-12);
        }
        assert!(s.radius_at_volume(s.total_volume() * 1.01).is_err());
    }

    #[test]
    fn trumpet_profile_matches_closed_form() {
        let t = Trumpet::new(2, 0.5).unwrap();
        let s = t.space(6.0, 2560).unwrap();
        for v in [1e-5, 1e-2, 1.0, 30.0] {
            let phi_exact = (v * v + 4.0 * PI * 0.5 * v).sqrt();
            assert_relative_eq!(t.profile(v).unwrap(), phi_exact, max_relative = 1e-12);
            let phi_grid = s.boundary_area_at_volume(v).unwrap();
            assert_relative_eq!(phi_grid, phi_exact, max_relative = 1e-5);
        }
    }

    #[test]
    fn trumpet_profile_dominates_volume() {
        // φ_β(t) >= t for every β <= 1
        for beta in [1.0, 0.5, 0.1] {
            let t = Trumpet::new(2, beta).unwrap();
            for v in [1e-6, 1e-2, 1.0, 1e3, 1e6] {
                assert!(t.profile(v).unwrap() >= v, "beta={beta}, v={v}");
            }
        }
    }

    #[test]
    fn trumpet_small_ball_asymptote() {
        // φ(t) / (n (β ω_n)^{1/n} t^{1-1/n}) → 1
        let t = Trumpet::new(3, 0.5).unwrap();
        let alpha = 3.0 * (0.5 * unit_ball_volume(3).unwrap()).powf(1.0 / 3.0);
        let ratio = t.profile(1e-9).unwrap() / (alpha * 1e-9f64.powf(2.0 / 3.0));
        assert_relative_eq!(ratio, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn power_integral_matches_quadrature() {
        let t = Trumpet::new(2, 0.7).unwrap();
        let s = t.space(4.0, 300).unwrap();
        for (q, a, b) in [(3.0, 0.01, 2.5), (2.5, 0.0, 1.0), (1.0, 0.2, 0.21)] {
            let exact = s.power_integral(q, a, b).unwrap();
            let quad = gauss::adaptive(&|r: f64| s.boundary_area(r).unwrap().powf(q), a.max(1e-12), b, 1e-12);
            assert_relative_eq!(exact, quad, max_relative = 1e-8);
        }
    }

    #[test]
    fn volume_is_power_integral_q1() {
        let t = Trumpet::new(3, 1.0).unwrap();
        let s = t.space(3.0, 200).unwrap();
        for r in [0.001, 0.4, 2.7] {
            assert_relative_eq!(
                s.volume(r).unwrap(),
                s.power_integral(1.0, 0.0, r).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn cone_angles() {
        let e = euclidean(2, 190, 5.0);
        let est = e.cone_angle().unwrap();
        assert_relative_eq!(est.value, 1.0, max_relative = 1e-12);
        assert!(est.reliable);

        for (n, beta) in [(2u32, 0.25), (3, 0.6), (2, 1.0)] {
            let s = trumpet_space(n, beta, 5.0, 240).unwrap();
            let est = s.cone_angle().unwrap();
            assert_relative_eq!(est.value, beta, max_relative = 1e-4);
            assert!(est.reliable, "n={n} beta={beta}: {est:?}");
        }
    }

    #[test]
    fn trumpet_validation() {
        assert!(Trumpet::new(2, 0.0).is_err());
        assert!(Trumpet::new(2, 1.2).is_err());
        assert!(trumpet_space(2, 0.5, 5.0, 8).is_err());
        let s = trumpet_space(2, 1.0, 5.0, 64).unwrap();
        // β=1 is H²: warp equals sinh on the grid
        for (r, g) in s.radii().iter().zip(s.warp_values()) {
            assert_relative_eq!(*g, r.sinh(), max_relative = 1e-14);
        }
        // formula evaluation at n=3, β=0.5, r=1
        let t = Trumpet::new(3, 0.5).unwrap();
        assert_relative_eq!(t.warp(1.0), 0.5f64.sqrt() * 1.0f64.sinh(), max_relative = 1e-14);
        assert_relative_eq!(t.warp(1.0), 0.8309927, max_relative = 1e-6);
    }

    #[test]
    fn profile_table_nodes_are_exact() {
        let t = Trumpet::new(2, 0.5).unwrap();
        let s = t.space(5.0, 128).unwrap();
        let table = s.profile_table(64).unwrap();
        for (v, phi) in table.volumes().iter().zip(table.perimeters()) {
            assert_relative_eq!(*phi, s.boundary_area_at_volume(*v).unwrap(), max_relative = 1e-13);
        }
        assert_relative_eq!(table.total_volume(), s.total_volume(), max_relative = 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let s = trumpet_space(2, 0.5, 4.0, 32).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: RadialSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back.n(), 2);
        assert_eq!(back.radii().len(), 32);
        assert_relative_eq!(back.total_volume(), s.total_volume(), max_relative = 1e-12);
    }
}
