//! Profile comparison and asymptotic isoperimetric invariants.

use crate::error::{Error, Result};
use crate::modelgeom::unit_ball_volume;
use crate::radial::profile::ProfileTable;
use crate::radial::space::RadialSpace;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

fn decile_window(len: usize) -> usize {
    (len / 10).max(3).min(len)
}

/// Result of checking that a profile dominates a radial space's profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DominationReport {
    pub dominated: bool,
    /// Smallest signed gap Φ(t) - φ_σ(t) over the tested volumes (>= 0 when
    /// domination holds).
    pub worst_gap: f64,
    /// Half-volume cutoff actually applied (last tested volume for
    /// infinite-volume tables).
    pub half_volume_used: f64,
    pub points_tested: usize,
    /// Whether the candidate space is large enough to host half the total
    /// volume (always true for infinite-volume tables).
    pub volume_covered: bool,
}

/// Verify Φ(t) >= φ_σ(t) on the tabulated volumes up to half the total
/// volume, and that the space can hold that half volume at all.
pub fn check_domination(phi: &ProfileTable, s: &RadialSpace) -> Result<DominationReport> {
    let cap = phi.total_volume() / 2.0;
    let space_total = s.total_volume();
    let mut worst = f64::INFINITY;
    let mut scale: f64 = 0.0;
    let mut tested = 0usize;
    let mut last_t = 0.0;
    for (&t, &big_phi) in phi.volumes().iter().zip(phi.perimeters()) {
        if t > cap || t > space_total {
            break;
        }
        let small_phi = s.boundary_area_at_volume(t)?;
        worst = worst.min(big_phi - small_phi);
        scale = scale.max(big_phi.abs());
        tested += 1;
        last_t = t;
    }
    if tested == 0 {
        return Err(Error::input(format!(
            "profile volumes start at {} but the space only holds {}; ranges are disjoint",
            phi.t_min(),
            space_total
        )));
    }
    let volume_covered = if cap.is_finite() { space_total >= cap * (1.0 - 1e-12) } else { true };
    let dominated = volume_covered && worst >= -1e-12 * scale;
    Ok(DominationReport {
        dominated,
        worst_gap: worst,
        half_volume_used: if cap.is_finite() { cap } else { last_t },
        points_tested: tested,
        volume_covered,
    })
}

/// One windowed liminf estimate with its stability diagnostics.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioEstimate {
    /// Windowed minimum of the ratio.
    pub value: f64,
    /// log-drift of the ratio across the window (0 = flat).
    pub drift: f64,
    /// True when the window is flat enough to trust the value.
    pub stable: bool,
}

/// Asymptotic isoperimetric invariants extracted from a profile table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IsoInvariants {
    /// Estimated isoperimetric dimension: smallest m whose ratio window is
    /// flat; None when no tested m stabilizes.
    pub iso_dimension: Option<f64>,
    /// m ↦ windowed estimate of l_∞^{(m)} = liminf Φ(t)^m/(m^m ω_m t^{m-1}).
    pub ratios: BTreeMap<u32, RatioEstimate>,
    /// Largest h with Φ(t) >= h·t across the whole table.
    pub cheeger_slope: f64,
    /// Volume window the small-t estimates were taken over.
    pub window: (f64, f64),
}

/// Estimate l_∞^{(m)} for each requested m, the isoperimetric dimension, and
/// the Cheeger slope of a profile table. Windowed minima over the smallest
/// decile stand in for the liminf; each estimate carries a stability flag
/// (ratios drifting to 0 or ∞ across the window are flagged).
pub fn iso_invariants(phi: &ProfileTable, m_range: &[u32]) -> Result<IsoInvariants> {
    if m_range.is_empty() {
        return Err(Error::input("need at least one dimension m to estimate".to_string()));
    }
    let window = decile_window(phi.len());
    let mut ratios = BTreeMap::new();
    for &m in m_range {
        if m < 1 {
            return Err(Error::input("dimensions m must be >= 1".to_string()));
        }
        let omega = unit_ball_volume(m)?;
        let mf = m as f64;
        let denom = mf.powi(m as i32) * omega;
        let ratio = |j: usize| -> f64 {
            let t = phi.volumes()[j];
            phi.perimeters()[j].powi(m as i32) / (denom * t.powf(mf - 1.0))
        };
        let mut min = f64::INFINITY;
        for j in 0..window {
            min = min.min(ratio(j));
        }
        let drift = (ratio(window - 1) / ratio(0)).ln();
        ratios.insert(
            m,
            RatioEstimate {
                value: min,
                drift,
                stable: drift.abs() <= 0.15,
            },
        );
    }
    let iso_dimension = ratios
        .iter()
        .find(|(_, est)| est.stable)
        .map(|(&m, _)| m as f64);
    let cheeger_slope = phi
        .volumes()
        .iter()
        .zip(phi.perimeters())
        .map(|(&t, &p)| p / t)
        .fold(f64::INFINITY, f64::min);
    Ok(IsoInvariants {
        iso_dimension,
        ratios,
        cheeger_slope,
        window: (phi.volumes()[0], phi.volumes()[window - 1]),
    })
}

/// Outcome of fitting the small-volume bound Φ(t) >= C·t^{(n-1)/n}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SmallVolumeBound {
    /// Largest C valid on the window.
    pub c: f64,
    /// Volume threshold the bound was certified below.
    pub eta: f64,
    pub holds: bool,
    /// False when the windowed ratio has the wrong small-t exponent (the
    /// constant keeps sliding as the window shrinks).
    pub stable: bool,
}

/// Find the largest C with Φ(t) >= C·t^{(n-1)/n} on the smallest decile of
/// the table.
pub fn small_volume_bound_check(phi: &ProfileTable, n: u32) -> Result<SmallVolumeBound> {
    if n < 1 {
        return Err(Error::domain(format!("need n >= 1, got {n}")));
    }
    let window = decile_window(phi.len());
    let expo = 1.0 - 1.0 / n as f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for j in 0..window {
        let ratio = phi.perimeters()[j] / phi.volumes()[j].powf(expo);
        min = min.min(ratio);
        max = max.max(ratio);
    }
    Ok(SmallVolumeBound {
        c: min,
        eta: phi.volumes()[window - 1],
        holds: min > 0.0,
        stable: max / min <= 1.1,
    })
}

/// A certified lower bound on the volume of balls of a given radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BallVolumeBound {
    /// Certified bound min(η, (C·r/n)^n) from integrating the differential
    /// inequality ∂_r μ(B_r) >= C·μ(B_r)^{1-1/n} while μ <= η.
    pub bound: f64,
    /// The (n·C·r)^n variant, reported for comparison only.
    pub displayed_constant_bound: f64,
    pub c: f64,
    pub eta: f64,
    pub holds: bool,
}

/// Turn the small-volume isoperimetric bound into a ball-volume lower bound
/// at radius r. Returns a zero bound (flagged) when no positive C exists.
pub fn ball_volume_lower_bound(phi: &ProfileTable, n: u32, r: f64) -> Result<BallVolumeBound> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("radius must be positive and finite, got {r}")));
    }
    let svb = small_volume_bound_check(phi, n)?;
    if !svb.holds {
        return Ok(BallVolumeBound {
            bound: 0.0,
            displayed_constant_bound: 0.0,
            c: svb.c,
            eta: svb.eta,
            holds: false,
        });
    }
    let nf = n as f64;
    let integrated = (svb.c * r / nf).powi(n as i32);
    Ok(BallVolumeBound {
        bound: integrated.min(svb.eta),
        displayed_constant_bound: (nf * svb.c * r).powi(n as i32),
        c: svb.c,
        eta: svb.eta,
        holds: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::space::{trumpet_space, Trumpet};
    use approx::assert_relative_eq;

    fn euclidean_table(n: u32, total: f64) -> ProfileTable {
        let omega = unit_ball_volume(n).unwrap();
        let alpha = n as f64 * omega.powf(1.0 / n as f64);
        let expo = 1.0 - 1.0 / n as f64;
        let ts: Vec<f64> = (0..120).map(|i| 1e-7 * 10f64.powf(i as f64 / 12.0)).collect();
        let phis: Vec<f64> = ts.iter().map(|&t| alpha * t.powf(expo)).collect();
        ProfileTable::new(ts, phis, total).unwrap()
    }

    #[test]
    fn self_domination_is_exact() {
        let s = trumpet_space(2, 0.6, 5.0, 200).unwrap();
        let phi = s.profile_table(200).unwrap();
        let rep = check_domination(&phi, &s).unwrap();
        assert!(rep.dominated);
        assert_eq!(rep.worst_gap, 0.0);
    }

    #[test]
    fn planted_deficit_is_detected() {
        let s = trumpet_space(2, 0.6, 5.0, 128).unwrap();
        let table = s.profile_table(128).unwrap();
        let scaled: Vec<f64> = table.perimeters().iter().map(|p| 0.9 * p).collect();
        let phi = ProfileTable::new(table.volumes().to_vec(), scaled, table.total_volume()).unwrap();
        let rep = check_domination(&phi, &s).unwrap();
        assert!(!rep.dominated);
        assert!(rep.worst_gap < 0.0);
    }

    #[test]
    fn domination_requires_half_volume_coverage() {
        // table claims a big finite total the small space cannot host
        let s = trumpet_space(2, 1.0, 1.0, 64).unwrap();
        let big = Trumpet::new(2, 1.0).unwrap();
        let table = big.profile_table_by_volume(1e-4, s.total_volume() * 0.9, 64).unwrap();
        let finite = ProfileTable::new(
            table.volumes().to_vec(),
            table.perimeters().to_vec(),
            s.total_volume() * 40.0,
        )
        .unwrap();
        let rep = check_domination(&finite, &s).unwrap();
        assert!(!rep.volume_covered);
        assert!(!rep.dominated);
    }

    #[test]
    fn iso_invariants_euclidean() {
        let phi = euclidean_table(2, f64::INFINITY);
        let inv = iso_invariants(&phi, &[1, 2, 3]).unwrap();
        let r2 = inv.ratios[&2];
        assert!(r2.stable);
        assert_relative_eq!(r2.value, 1.0, max_relative = 1e-10);
        assert!(!inv.ratios[&1].stable); // ratio → 0: wrong exponent
        assert!(!inv.ratios[&3].stable); // ratio → ∞
        assert_eq!(inv.iso_dimension, Some(2.0));
    }

    #[test]
    fn iso_invariants_trumpet_beta() {
        let tr = Trumpet::new(3, 0.5).unwrap();
        let phi = tr.profile_table_by_volume(1e-9, 1e3, 400).unwrap();
        let inv = iso_invariants(&phi, &[3]).unwrap();
        let r3 = inv.ratios[&3];
        assert!(r3.stable);
        assert_relative_eq!(r3.value, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn cheeger_slope_of_h2_is_one() {
        let tr = Trumpet::new(2, 1.0).unwrap();
        let phi = tr.profile_table_by_volume(1e-4, 1e6, 600).unwrap();
        let inv = iso_invariants(&phi, &[2]).unwrap();
        // Φ(t)/t = √(1 + 4π/t) → 1 from above; the table minimum sits at t_max
        assert!(inv.cheeger_slope >= 1.0);
        assert_relative_eq!(inv.cheeger_slope, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn scaling_total_volume_leaves_small_t_ratios_alone() {
        let a = euclidean_table(2, 1e4);
        let b = euclidean_table(2, 2e4);
        let ia = iso_invariants(&a, &[2]).unwrap();
        let ib = iso_invariants(&b, &[2]).unwrap();
        assert_eq!(ia.ratios[&2].value, ib.ratios[&2].value);
    }

    #[test]
    fn small_volume_bound_euclidean_exact() {
        let phi = euclidean_table(2, f64::INFINITY);
        let b = small_volume_bound_check(&phi, 2).unwrap();
        assert!(b.holds && b.stable);
        let expect = 2.0 * std::f64::consts::PI.sqrt();
        assert_relative_eq!(b.c, expect, max_relative = 1e-12);
    }

    #[test]
    fn small_volume_bound_flags_linear_profile() {
        let ts: Vec<f64> = (0..100).map(|i| 1e-5 * 10f64.powf(i as f64 / 10.0)).collect();
        let phis: Vec<f64> = ts.iter().map(|&t| t).collect();
        let phi = ProfileTable::new(ts, phis, f64::INFINITY).unwrap();
        let b = small_volume_bound_check(&phi, 2).unwrap();
        assert!(!b.stable);
    }

    #[test]
    fn ball_volume_bound_integrates_back_to_euclidean() {
        let phi = euclidean_table(2, f64::INFINITY);
        let omega = unit_ball_volume(2).unwrap();
        // keep (C r / n)^n below the certified window top η = 8.25e-7
        let r = 1e-4;
        let b = ball_volume_lower_bound(&phi, 2, r).unwrap();
        assert!(b.holds);
        assert!(b.bound <= b.eta);
        assert_relative_eq!(b.bound, omega * r * r, max_relative = 1e-10);
        // the displayed variant is n^{2n} times larger
        assert_relative_eq!(
            b.displayed_constant_bound,
            omega * r * r * 16.0,
            max_relative = 1e-10
        );
        // large radii saturate at η
        let big = ball_volume_lower_bound(&phi, 2, 1e3).unwrap();
        assert_relative_eq!(big.bound, big.eta, max_relative = 1e-14);
    }

    #[test]
    fn trumpet_ball_volume_bound() {
        let tr = Trumpet::new(2, 0.5).unwrap();
        let phi = tr.profile_table_by_volume(1e-10, 1e2, 500).unwrap();
        // window top η ≈ 1.3e-9 certifies radii up to ~2.9e-5 before clamping
        let r = 1e-5;
        let b = ball_volume_lower_bound(&phi, 2, r).unwrap();
        let omega = unit_ball_volume(2).unwrap();
        assert!(b.bound <= b.eta);
        assert_relative_eq!(b.bound, 0.5 * omega * r * r, max_relative = 1e-3);
    }
}
