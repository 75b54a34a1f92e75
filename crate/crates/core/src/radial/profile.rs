//! Tabulated isoperimetric profiles.

use crate::error::{ensure_finite, Error, Result};
use crate::radial::space::RadialSpace;
use serde::{Deserialize, Serialize};

/// A perimeter-vs-volume table Φ(t_j), interpolated log-linearly so every
/// segment is an exact power law. Below the first tabulated volume the first
/// segment's power law extends toward t = 0; above the last one the table
/// extends only when the underlying space has infinite total volume.
///
/// A single-point table (the complete isoperimetric profile of a two-vertex
/// graph, say) is valid as point data, but carries no segment to extend:
/// interpolating it is an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProfileDto", into = "ProfileDto")]
pub struct ProfileTable {
    volumes: Vec<f64>,
    perimeters: Vec<f64>,
    /// Total volume of the space the profile belongs to; `f64::INFINITY`
    /// for unbounded spaces (serialized as null).
    total_volume: f64,
    /// log-log slope of each table segment.
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ProfileDto {
    total_volume: Option<f64>,
    points: Vec<ProfilePoint>,
}

#[derive(Serialize, Deserialize)]
struct ProfilePoint {
    t: f64,
    phi: f64,
}

impl From<ProfileTable> for ProfileDto {
    fn from(p: ProfileTable) -> Self {
        ProfileDto {
            total_volume: if p.total_volume.is_finite() { Some(p.total_volume) } else { None },
            points: p
                .volumes
                .iter()
                .zip(&p.perimeters)
                .map(|(&t, &phi)| ProfilePoint { t, phi })
                .collect(),
        }
    }
}

impl TryFrom<ProfileDto> for ProfileTable {
    type Error = Error;
    fn try_from(d: ProfileDto) -> Result<Self> {
        let (volumes, perimeters) = d.points.iter().map(|p| (p.t, p.phi)).unzip();
        ProfileTable::new(volumes, perimeters, d.total_volume.unwrap_or(f64::INFINITY))
    }
}

impl ProfileTable {
    /// Build a table. A leading (0, φ) point is dropped; the remaining
    /// volumes must be strictly increasing and positive with positive
    /// perimeters, and `total_volume` (∞ allowed) must cover the table.
    pub fn new(mut volumes: Vec<f64>, mut perimeters: Vec<f64>, total_volume: f64) -> Result<Self> {
        if volumes.len() != perimeters.len() {
            return Err(Error::input(format!(
                "volumes ({}) and perimeters ({}) must have equal length",
                volumes.len(),
                perimeters.len()
            )));
        }
        if volumes.first() == Some(&0.0) {
            volumes.remove(0);
            perimeters.remove(0);
        }
        if volumes.is_empty() {
            return Err(Error::input(
                "profile table needs at least 1 positive-volume point".to_string(),
            ));
        }
        ensure_finite(&volumes, "volumes")?;
        ensure_finite(&perimeters, "perimeters")?;
        if volumes[0] <= 0.0 || volumes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("volumes must be strictly increasing and positive".to_string()));
        }
        if perimeters.iter().any(|&p| p <= 0.0) {
            return Err(Error::input("perimeters must be positive".to_string()));
        }
        if total_volume.is_nan() || total_volume < *volumes.last().unwrap() * (1.0 - 1e-12) {
            return Err(Error::input(format!(
                "total volume {total_volume} does not cover the tabulated range (max {})",
                volumes.last().unwrap()
            )));
        }
        let slopes = volumes
            .windows(2)
            .zip(perimeters.windows(2))
            .map(|(t, p)| (p[1] / p[0]).ln() / (t[1] / t[0]).ln())
            .collect();
        Ok(ProfileTable {
            volumes,
            perimeters,
            total_volume,
            slopes,
        })
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn perimeters(&self) -> &[f64] {
        &self.perimeters
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn t_min(&self) -> f64 {
        self.volumes[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.volumes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// log-log slope of the segment containing t (clamped to the table);
    /// 0 for a single-point table, which has no segments.
    pub fn slope_at(&self, t: f64) -> f64 {
        if self.slopes.is_empty() {
            return 0.0;
        }
        let idx = self.volumes.partition_point(|&v| v < t);
        self.slopes[idx.saturating_sub(1).min(self.slopes.len() - 1)]
    }

    /// Evaluate Φ(t). Below t_min the first segment's power law extends to
    /// 0; above t_max extension is allowed only for infinite-volume tables.
    /// Single-point tables only evaluate at their one tabulated volume.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::range(format!("profile argument must be positive and finite, got {t}")));
        }
        if self.slopes.is_empty() && t != self.t_min() {
            return Err(Error::input(format!(
                "single-point profile table cannot be interpolated at {t}"
            )));
        }
        if t > self.t_max() {
            if self.total_volume.is_finite() {
                return Err(Error::range(format!(
                    "profile argument {t} beyond the tabulated maximum {} of a finite-volume table",
                    self.t_max()
                )));
            }
            let s = *self.slopes.last().unwrap();
            let (tm, pm) = (self.t_max(), *self.perimeters.last().unwrap());
            return Ok(pm * (t / tm).powf(s));
        }
        Ok(self.eval_inner(t))
    }

    /// Interpolate for 0 < t <= t_max (power-law extension below the table).
    /// A single-point table reads as its one constant value.
    fn eval_inner(&self, t: f64) -> f64 {
        if self.slopes.is_empty() {
            return self.perimeters[0];
        }
        if t < self.t_min() {
            return self.perimeters[0] * (t / self.t_min()).powf(self.slopes[0]);
        }
        let idx = self.volumes.partition_point(|&v| v < t).max(1);
        let (t0, p0) = (self.volumes[idx - 1], self.perimeters[idx - 1]);
        let s = self.slopes[(idx - 1).min(self.slopes.len() - 1)];
        p0 * (t / t0).powf(s)
    }

    /// Evaluate with the argument clamped to the tabulated range (shields
    /// integrators from harmless overshoot at the top of the table).
    pub(crate) fn eval_clamped(&self, t: f64) -> f64 {
        self.eval_inner(t.min(self.t_max()).max(f64::MIN_POSITIVE))
    }

    /// Closed-form arc length s(t) = ∫_0^t dτ/Φ(τ) of the radial coordinate
    /// in a space whose profile is this table (power-law extension below
    /// t_min). Returns +∞ if the integral diverges at 0 (slope >= 1 there).
    pub fn arc_length(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || t > self.t_max() * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "arc length argument must lie in (0, {}], got {t}",
                self.t_max()
            )));
        }
        let t = t.min(self.t_max());
        if self.slopes.is_empty() {
            return Err(Error::input(
                "single-point profile table has no arc-length extension".to_string(),
            ));
        }
        // below-table piece: Φ(τ) = φ_1 (τ/t_1)^{s_0}
        let s0 = self.slopes[0];
        if s0 >= 1.0 {
            return Ok(f64::INFINITY);
        }
        let t1 = self.t_min();
        let seg0 = |x: f64| t1 / self.perimeters[0] * (x / t1).powf(1.0 - s0) / (1.0 - s0);
        if t <= t1 {
            return Ok(seg0(t));
        }
        let mut acc = seg0(t1);
        for i in 0..self.slopes.len() {
            let (ta, pa) = (self.volumes[i], self.perimeters[i]);
            let tb = self.volumes[i + 1];
            let hi = t.min(tb);
            if hi <= ta {
                break;
            }
            let s = self.slopes[i];
            // ∫_ta^hi (τ/ta)^{-s}/pa dτ
            acc += if (1.0 - s).abs() < 1e-12 {
                ta / pa * (hi / ta).ln()
            } else {
                ta / pa * ((hi / ta).powf(1.0 - s) - 1.0) / (1.0 - s)
            };
            if hi >= t {
                break;
            }
        }
        Ok(acc)
    }
}

/// The radial profile of a space at one volume: the boundary area of the
/// centered ball holding volume t. Exact per-segment inversion (well within
/// the 1e-10 relative tolerance a root-find would be held to).
pub fn radial_profile(space: &RadialSpace, t: f64) -> Result<f64> {
    space.boundary_area_at_volume(t)
}
