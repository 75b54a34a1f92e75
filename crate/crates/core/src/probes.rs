//! Counterexample probes: the concentrating log-profiles and vanishing-volume
//! bumps that witness blow-up of the truncated-exponential functional, plus
//! the scan machinery that turns their values into verdicts.
//!
//! A [`MoserProbe`] is the classical unit-energy spike adapted to a weighted
//! cone comparison: constant `C t_0` on the ball of radius `r`, then
//! `C n ln(R/ρ)` down to zero at `R`, with `C` normalised so that the energy
//! bound `C^n n^{n-1} θ(1+η) s_{n-1} t_0 = 1` holds whenever the sphere
//! perimeters stay below `θ s_{n-1} ρ^{n-1} (1+η)` on the window
//! ([`moser_energy_bound_check`] verifies exactly that hypothesis first).
//! Sending `r → 0` drives the functional to infinity above the sharp
//! threshold and leaves it tame below; [`blowup_scan`] tabulates the values
//! over an `(α, r)` grid and attaches a [`Verdict`] per `α`, and
//! [`threshold_estimate`] bisects on `α` until the verdict flips, recovering
//! the threshold from scan data alone.
//!
//! [`bump_sequence_check`] covers the complementary mechanism: on a family
//! whose unit-ball volume `r_m` vanishes while balls stay `C`-doubling at
//! scale one, plateau bumps of height `T_m = ((C-1) r_m)^{-1/n}` keep unit
//! energy while their functional values explode.
//!
//! Verdict calibration. For a probe at inner radius `r` the leading value is
//! `μ(B_r) e^{α (C t_0)^{n/(n-1)}} ≈ const · e^{t_0 (α/α_η - 1)}` with
//! `t_0 = n ln(R/r)` and `α_η` the `(1+η)`-inflated threshold, so the log
//! value drifts by `n ln 10 · (α/α_η - 1)` nats per decade of `r`. A scan is
//! declared divergent when the values rise strictly through the final two
//! decades at a mean rate of at least [`DIVERGENCE_RATE`] nats per decade,
//! which places the detection edge about `4%` above the sharp threshold at
//! `n = 2` (`3%` at `n = 3`) while sequences settling below it drift two
//! orders of magnitude slower. It is declared bounded when the last-decade
//! values move by at most `1%` of the scan's largest value — an absolute
//! yardstick, because below the threshold the probe values decay to zero
//! like `1/t_0` and no fixed relative window would ever close. Everything
//! else is inconclusive, including `α` pinned exactly at the threshold,
//! where finite scans cannot decide.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::functionals::{mt_functional_radial, mt_threshold, MTParams};
use crate::functions::RadialFunction;
use crate::modelgeom::unit_sphere_area;
use crate::par::{self, Parallelism};
use crate::radial::{ProfileTable, RadialSpace};

/// Default perimeter slack `η` when the caller does not measure one.
const DEFAULT_ETA: f64 = 0.01;

/// Largest log-step between probe breakpoints, `ln(1.01)`. Sampling the log
/// profile this densely keeps the piecewise-linear chord energy within
/// `step²/12 ≈ 8e-6` of the smooth value, far inside the `η/(1+η)` slack the
/// normalisation leaves.
const MAX_RAMP_STEP: f64 = 0.009_950_330_853_155_723;

/// Smallest admissible log-step; guards pathological `η` from demanding
/// millions of breakpoints.
const MIN_RAMP_STEP: f64 = 1e-4;

/// Divergence criterion: mean log-value growth (nats per decade of `r`)
/// required across the final two decades of a scan.
const DIVERGENCE_RATE: f64 = 0.2;

/// Bounded criterion: the last-decade values may move by at most this
/// fraction of the scan's largest value.
const CAUCHY_FRACTION: f64 = 0.01;

/// Iteration cap for the threshold bisection.
const BISECTION_CAP: u32 = 40;

/// A concentrating log-profile probe against the cone comparison
/// `Per(S(ρ)) ≤ θ s_{n-1} ρ^{n-1} (1+η)` on `(0, R)`.
///
/// The derived quantities are fixed by the construction: `t_0 = n ln(R/r)`
/// is the plateau exponent and
/// `C = 1 / (n (θ (1+η) s_{n-1} ln(R/r))^{1/n})` the height scale that
/// makes the comparison energy bound exactly one.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MoserProbe {
    /// Dimension of the target space.
    pub n: u32,
    /// Cone opening density of the comparison, `1` for a smooth point.
    pub theta: f64,
    /// Perimeter slack, in `(0, 1)`.
    pub eta: f64,
    /// Outer radius `R` where the profile reaches zero.
    pub outer_radius: f64,
    /// Inner radius `r` of the plateau, in `(0, R)`.
    pub inner_radius: f64,
    /// Plateau exponent `t_0 = n ln(R/r)`.
    pub t0: f64,
    /// Height scale `C`; the plateau value is `C t_0`.
    pub c: f64,
}

impl MoserProbe {
    pub fn new(n: u32, theta: f64, eta: f64, outer_radius: f64, inner_radius: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("Moser probes need n >= 2, got {n}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!(
                "comparison density theta must be positive and finite, got {theta}"
            )));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::domain(format!("slack eta must lie in (0, 1), got {eta}")));
        }
        if !(outer_radius > 0.0 && outer_radius.is_finite()) {
            return Err(Error::domain(format!(
                "outer radius must be positive and finite, got {outer_radius}"
            )));
        }
        if !(inner_radius > 0.0 && inner_radius < outer_radius) {
            return Err(Error::domain(format!(
                "inner radius must lie in (0, {outer_radius}), got {inner_radius}"
            )));
        }
        let s = unit_sphere_area(n)?;
        let nf = f64::from(n);
        let l = (outer_radius / inner_radius).ln();
        let t0 = nf * l;
        let c = 1.0 / (nf * (theta * (1.0 + eta) * s * l).powf(1.0 / nf));
        Ok(MoserProbe { n, theta, eta, outer_radius, inner_radius, t0, c })
    }
}

/// Build the probe as a radial function on `space`: `C t_0` inside the inner
/// radius, `C n ln(R/ρ)` sampled log-densely on the annulus, zero outside.
pub fn moser_function(p: &MoserProbe, space: &Arc<RadialSpace>) -> Result<RadialFunction> {
    if p.n != space.n() {
        return Err(Error::input(format!(
            "probe dimension {} does not match the space dimension {}",
            p.n,
            space.n()
        )));
    }
    if p.outer_radius > space.r_max() * (1.0 + 1e-12) {
        return Err(Error::range(format!(
            "probe outer radius {:.6e} lies beyond the grid (rMax = {:.6e})",
            p.outer_radius,
            space.r_max()
        )));
    }
    let step = (p.eta / 120.0).sqrt().clamp(MIN_RAMP_STEP, MAX_RAMP_STEP);
    let l = (p.outer_radius / p.inner_radius).ln();
    let k = ((l / step).ceil() as usize + 1).max(2);
    let nf = f64::from(p.n);
    let mut radii = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for i in 0..k {
        let frac = i as f64 / (k - 1) as f64;
        let rho = p.inner_radius * (l * frac).exp();
        radii.push(rho);
        values.push(p.c * nf * (p.outer_radius / rho).ln());
    }
    radii[0] = p.inner_radius;
    values[0] = p.c * p.t0;
    radii[k - 1] = p.outer_radius;
    values[k - 1] = 0.0;
    RadialFunction::new(space.clone(), radii, values)
}

/// Outcome of [`moser_energy_bound_check`].
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MoserEnergyReport {
    /// Measured gradient energy `‖lip u‖_n^n` of the probe.
    pub energy: f64,
    /// Comparison bound `C^n n^{n-1} θ (1+η) s_{n-1} t_0`; the normalisation
    /// of `C` makes this exactly one.
    pub bound: f64,
    /// Whether `energy ≤ bound + tol`.
    pub holds: bool,
    /// Largest sampled value of `Per(S(ρ)) / (θ s_{n-1} ρ^{n-1})` on `(0, R]`.
    pub worst_perimeter_ratio: f64,
    /// Radius attaining the worst ratio.
    pub worst_radius: f64,
    pub tol: f64,
}

/// Verify the perimeter comparison on the probe window, then check the
/// probe's energy against the normalised bound.
///
/// The comparison `Per(S(ρ)) ≤ θ s_{n-1} ρ^{n-1} (1+η)` is sampled at every
/// grid node inside `(0, R]`, at `R` itself, and at six sub-grid radii
/// (node checks suffice between samples: both sides are power laws on each
/// grid segment, so their ratio is monotone there). A violation is a
/// precondition failure naming the worst radius; otherwise the report
/// carries the exact energy and the bound.
pub fn moser_energy_bound_check(
    p: &MoserProbe,
    space: &Arc<RadialSpace>,
) -> Result<MoserEnergyReport> {
    if p.n != space.n() {
        return Err(Error::input(format!(
            "probe dimension {} does not match the space dimension {}",
            p.n,
            space.n()
        )));
    }
    if p.outer_radius > space.r_max() * (1.0 + 1e-12) {
        return Err(Error::range(format!(
            "probe outer radius {:.6e} lies beyond the grid (rMax = {:.6e})",
            p.outer_radius,
            space.r_max()
        )));
    }
    let s = unit_sphere_area(p.n)?;
    let nm1 = f64::from(p.n) - 1.0;
    let mut samples: Vec<f64> = space
        .radii()
        .iter()
        .copied()
        .filter(|&rho| rho <= p.outer_radius)
        .collect();
    samples.push(p.outer_radius);
    for k in 1..=6 {
        samples.push(p.outer_radius * 10f64.powi(-k));
    }
    let mut worst_ratio = 0.0;
    let mut worst_radius = f64::NAN;
    for &rho in &samples {
        let ratio = space.boundary_area(rho)? / (p.theta * s * rho.powf(nm1));
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_radius = rho;
        }
    }
    if worst_ratio > (1.0 + p.eta) * (1.0 + 1e-9) {
        return Err(Error::Precondition(vec![format!(
            "perimeter comparison fails on (0, R): Per(S(rho)) / (theta s_{{n-1}} rho^{{n-1}}) = \
             {:.12} > 1 + eta = {:.12} at rho = {:.6e}",
            worst_ratio,
            1.0 + p.eta,
            worst_radius
        )]));
    }
    let u = moser_function(p, space)?;
    let energy = u.gradient_energy(f64::from(p.n))?;
    let bound = p.c.powi(p.n as i32)
        * f64::from(p.n).powi(p.n as i32 - 1)
        * p.theta
        * (1.0 + p.eta)
        * s
        * p.t0;
    let tol = 1e-9;
    Ok(MoserEnergyReport {
        energy,
        bound,
        holds: energy <= bound + tol,
        worst_perimeter_ratio: worst_ratio,
        worst_radius,
        tol,
    })
}

/// Decision attached to one `α` column of a blow-up scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Values rise monotonically through the final two decades at
    /// [`DIVERGENCE_RATE`] or more nats per decade.
    Divergent,
    /// Last-decade values move by at most [`CAUCHY_FRACTION`] of the scan's
    /// largest value.
    Bounded,
    /// Neither criterion met on the scanned window.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Divergent => write!(f, "divergent"),
            Verdict::Bounded => write!(f, "bounded"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// One `(α, r)` cell of a blow-up scan.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanRow {
    /// Inner radius of the probe.
    pub r: f64,
    /// Gradient energy of the probe (stays ≤ 1 on a certified window).
    pub energy: f64,
    /// Functional value; `+∞` once the true value overflows f64.
    pub functional_value: f64,
    /// Natural log of the value, exact through overflow; `-∞` for zero.
    pub log_functional_value: f64,
}

/// All rows of one `α` column, with its verdict.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlphaScan {
    pub alpha: f64,
    pub verdict: Verdict,
    pub rows: Vec<ScanRow>,
}

/// Result of [`blowup_scan`]: the measured probe window plus one
/// [`AlphaScan`] per `α`.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BlowupScanReport {
    /// Cone opening density measured at the tip.
    pub theta: f64,
    /// Perimeter slack in force (default `0.01`, widened to the measured
    /// excess when the first node already overshoots).
    pub eta: f64,
    /// Outer end of the certified window; every probe lives inside it.
    pub outer_radius: f64,
    pub scans: Vec<AlphaScan>,
}

/// Measure the probe window of a space: tip density `θ`, slack `η`, and the
/// largest radius `R` below which every grid node satisfies the perimeter
/// comparison `Per ≤ θ s_{n-1} ρ^{n-1} (1+η)`.
fn probe_window(space: &Arc<RadialSpace>) -> Result<(f64, f64, f64)> {
    let est = space.cone_angle()?;
    if !est.reliable {
        return Err(Error::Asymptote(format!(
            "cone angle did not stabilise near the tip (spread {:.3e}); cannot size a probe window",
            est.spread
        )));
    }
    let theta = est.value;
    if !(theta > 0.0) {
        return Err(Error::domain(format!("measured cone angle must be positive, got {theta}")));
    }
    let nm1 = f64::from(space.n()) - 1.0;
    let radii = space.radii();
    let warps = space.warp_values();
    let ratio_at = |i: usize| (warps[i] / radii[i]).powf(nm1) / theta;
    let mut eta = DEFAULT_ETA;
    let first = ratio_at(0);
    if first > 1.0 + eta {
        eta = 2.0 * (first - 1.0);
        if !(eta < 1.0) {
            return Err(Error::domain(format!(
                "perimeter exceeds the cone comparison by {:.3e} already at the first node; \
                 no admissible slack eta < 1",
                first - 1.0
            )));
        }
    }
    let mut outer = space.r_max();
    for i in 1..radii.len() {
        if ratio_at(i) > 1.0 + eta {
            outer = radii[i - 1];
            break;
        }
    }
    Ok((theta, eta, outer))
}

/// Evaluate one scan cell: build the probe at `(α, r)`, record its energy
/// and functional value. `α = 0` contributes exact zeros.
fn scan_cell(
    space: &Arc<RadialSpace>,
    theta: f64,
    eta: f64,
    outer: f64,
    alpha: f64,
    r: f64,
) -> Result<ScanRow> {
    let probe = MoserProbe::new(space.n(), theta, eta, outer, r)?;
    let u = moser_function(&probe, space)?;
    let energy = u.gradient_energy(f64::from(space.n()))?;
    if alpha == 0.0 {
        return Ok(ScanRow {
            r,
            energy,
            functional_value: 0.0,
            log_functional_value: f64::NEG_INFINITY,
        });
    }
    let rep = mt_functional_radial(&u, MTParams::new(space.n(), alpha)?)?;
    Ok(ScanRow {
        r,
        energy,
        functional_value: rep.functional_value,
        log_functional_value: rep.log_functional_value,
    })
}

/// Classify one `α` column. Rows arrive ordered by decreasing `r`.
fn scan_verdict(rows: &[ScanRow]) -> Verdict {
    let r_min = rows[rows.len() - 1].r;
    let two: Vec<&ScanRow> =
        rows.iter().filter(|w| w.r <= 100.0 * r_min * (1.0 + 1e-9)).collect();
    if two.len() >= 3 {
        let span = (two[0].r / r_min).log10();
        let logs: Vec<f64> = two.iter().map(|w| w.log_functional_value).collect();
        let increasing = logs.windows(2).all(|w| w[1] > w[0]);
        if increasing && span > 0.5 && logs[0] > f64::NEG_INFINITY {
            let rate = (logs[logs.len() - 1] - logs[0]) / span;
            if rate >= DIVERGENCE_RATE {
                return Verdict::Divergent;
            }
        }
    }
    let one: Vec<&ScanRow> =
        rows.iter().filter(|w| w.r <= 10.0 * r_min * (1.0 + 1e-9)).collect();
    if one.len() >= 2 && rows.iter().all(|w| w.functional_value.is_finite()) {
        let scan_max = rows.iter().fold(0.0f64, |m, w| m.max(w.functional_value));
        let lo = one.iter().fold(f64::INFINITY, |m, w| m.min(w.functional_value));
        let hi = one.iter().fold(f64::NEG_INFINITY, |m, w| m.max(w.functional_value));
        if hi - lo <= CAUCHY_FRACTION * scan_max {
            return Verdict::Bounded;
        }
    }
    Verdict::Inconclusive
}

/// Tabulate the probe functional over an `(α, r)` grid and attach a verdict
/// per `α`.
///
/// The probe window (`θ`, `η`, `R`) is measured from the space; `r_grid`
/// must be strictly decreasing, positive, and start inside the window.
/// Cells are independent and evaluated data-parallel. Verdicts follow the
/// module-level calibration; at least three points in the final two decades
/// (and two in the final decade) are needed for anything but inconclusive.
pub fn blowup_scan(
    space: &Arc<RadialSpace>,
    alpha_grid: &[f64],
    r_grid: &[f64],
) -> Result<BlowupScanReport> {
    ensure_finite(alpha_grid, "alphaGrid")?;
    ensure_finite(r_grid, "rGrid")?;
    if alpha_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::input(format!(
            "scan grids must be nonempty, got {} alphas and {} radii",
            alpha_grid.len(),
            r_grid.len()
        )));
    }
    if alpha_grid.iter().any(|&a| a < 0.0) {
        return Err(Error::input("alphaGrid entries must be nonnegative".to_string()));
    }
    if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] >= w[0] || w[1] <= 0.0) {
        return Err(Error::input(
            "rGrid must be positive and strictly decreasing toward 0".to_string(),
        ));
    }
    let (theta, eta, outer) = probe_window(space)?;
    if r_grid[0] >= outer {
        return Err(Error::range(format!(
            "rGrid must start inside the certified window (0, {:.6e}), got {:.6e}",
            outer, r_grid[0]
        )));
    }
    let cells: Vec<Result<ScanRow>> =
        par::map_indexed(Parallelism::Auto, alpha_grid.len() * r_grid.len(), |idx| {
            let alpha = alpha_grid[idx / r_grid.len()];
            let r = r_grid[idx % r_grid.len()];
            scan_cell(space, theta, eta, outer, alpha, r)
        });
    let mut cells = cells.into_iter();
    let mut scans = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        let rows: Vec<ScanRow> =
            cells.by_ref().take(r_grid.len()).collect::<Result<Vec<_>>>()?;
        let verdict = scan_verdict(&rows);
        scans.push(AlphaScan { alpha, verdict, rows });
    }
    Ok(BlowupScanReport { theta, eta, outer_radius: outer, scans })
}

/// Parameters of a vanishing-volume bump: the unit-ball volume `r_m` and the
/// doubling constant `C` at scales one to two.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BumpProbe {
    pub r_m: f64,
    pub doubling_c: f64,
}

impl BumpProbe {
    pub fn new(r_m: f64, doubling_c: f64) -> Result<Self> {
        if !(r_m > 0.0 && r_m.is_finite()) {
            return Err(Error::domain(format!(
                "unit-ball volume must be positive and finite, got {r_m}"
            )));
        }
        if !(doubling_c > 1.0 && doubling_c.is_finite()) {
            return Err(Error::domain(format!(
                "doubling constant must exceed 1, got {doubling_c}"
            )));
        }
        Ok(BumpProbe { r_m, doubling_c })
    }

    /// Plateau height `T_m = (1 / ((C-1) r_m))^{1/n}`: the tallest plateau
    /// whose cone to zero at radius two still has unit energy under the
    /// doubling bound.
    pub fn plateau_height(&self, n: u32) -> Result<f64> {
        if n < 2 {
            return Err(Error::domain(format!("bump probes need n >= 2, got {n}")));
        }
        Ok(((self.doubling_c - 1.0) * self.r_m).recip().powf(1.0 / f64::from(n)))
    }
}

/// One member of a bump sequence.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BumpRow {
    /// Measured unit-ball volume of the space.
    pub r_m: f64,
    /// Plateau height `T_m`.
    pub plateau_height: f64,
    /// Gradient energy of the bump (≤ 1, with equality when the doubling
    /// bound is tight).
    pub energy: f64,
    pub functional_value: f64,
    pub log_functional_value: f64,
}

/// Run the bump construction along a family of spaces with vanishing
/// unit-ball volume.
///
/// For each space the doubling hypothesis `μ(B(0,2)) ≤ C μ(B(0,1))` is
/// verified first (its failure is a precondition error naming the space),
/// then the bump — plateau `T_m` inside radius one, linear to zero at radius
/// two — is evaluated. Energies satisfy
/// `T_m^n (μ(B_2) - μ(B_1)) ≤ 1` exactly, with equality when the doubling
/// bound is tight.
pub fn bump_sequence_check(
    family: &[Arc<RadialSpace>],
    doubling_c: f64,
    alpha: f64,
) -> Result<Vec<BumpRow>> {
    if family.is_empty() {
        return Err(Error::input("bump sequence needs at least one space".to_string()));
    }
    if !(doubling_c > 1.0 && doubling_c.is_finite()) {
        return Err(Error::domain(format!(
            "doubling constant must exceed 1, got {doubling_c}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive and finite, got {alpha}")));
    }
    let n = family[0].n();
    let rows: Vec<Result<BumpRow>> = par::map_slice(Parallelism::Auto, family, |space| {
        if space.n() != n {
            return Err(Error::input(format!(
                "family mixes dimensions: {} has n = {}, expected {}",
                space.label(),
                space.n(),
                n
            )));
        }
        if space.r_max() < 2.0 * (1.0 - 1e-12) {
            return Err(Error::range(format!(
                "bump probes need balls of radius 2; {} extends only to rMax = {}",
                space.label(),
                space.r_max()
            )));
        }
        let mu1 = space.volume(1.0)?;
        let mu2 = space.volume(2.0)?;
        if mu2 > doubling_c * mu1 * (1.0 + 1e-9) {
            return Err(Error::Precondition(vec![format!(
                "doubling fails for {}: mu(B(0,2)) = {:.12e} exceeds C mu(B(0,1)) = {:.12e}",
                space.label(),
                mu2,
                doubling_c * mu1
            )]));
        }
        let probe = BumpProbe::new(mu1, doubling_c)?;
        let height = probe.plateau_height(n)?;
        let u = RadialFunction::new(space.clone(), vec![1.0, 2.0], vec![height, 0.0])?;
        let energy = u.gradient_energy(f64::from(n))?;
        let rep = mt_functional_radial(&u, MTParams::new(n, alpha)?)?;
        Ok(BumpRow {
            r_m: mu1,
            plateau_height: height,
            energy,
            functional_value: rep.functional_value,
            log_functional_value: rep.log_functional_value,
        })
    });
    rows.into_iter().collect()
}

/// Result of [`threshold_estimate`].
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdEstimate {
    /// Midpoint of the final bisection bracket.
    pub estimate: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    /// Bisection steps taken (capped at 40).
    pub iterations: u32,
    /// Closed-form threshold at the measured cone angle, for comparison.
    pub reference: f64,
    /// `|estimate - reference| / reference`.
    pub relative_gap: f64,
    /// Measured cone angle.
    pub theta: f64,
    /// Perimeter slack in force.
    pub eta: f64,
    /// Outer end of the probe window.
    pub outer_radius: f64,
}

/// Chord log-log slope of the profile over its top decade of volume.
fn profile_tail_slope(table: &ProfileTable) -> f64 {
    let vols = table.volumes();
    let pers = table.perimeters();
    let last = vols.len() - 1;
    let cutoff = vols[last] / 10.0;
    let start = vols.iter().position(|&t| t >= cutoff).unwrap_or(0).min(last - 1);
    (pers[last] / pers[start]).ln() / (vols[last] / vols[start]).ln()
}

/// Estimate the blow-up threshold of a space by bisecting on `α` between a
/// scan-verdict-bounded and a scan-verdict-divergent value.
///
/// The method needs probe values that keep growing once `α` passes the
/// threshold, which requires the mass profile to dominate a line; spaces
/// whose profile tail has log-log slope below `0.95` over its top decade
/// (e.g. Euclidean balls, slope `1 - 1/n`) are refused. Bisection starts
/// from `[0.5, 2.5] ×` the closed-form threshold at the measured cone angle,
/// demands a bounded/divergent verdict pair there, then narrows the bracket
/// — divergent verdicts move the top down, anything else moves the bottom
/// up, so the estimate tracks the divergence edge (≈ `4%` above sharp at
/// `n = 2` by the verdict calibration) — until the bracket is within `1%` or
/// 40 iterations are spent. The final bracket is always reported.
pub fn threshold_estimate(space: &Arc<RadialSpace>, n: u32) -> Result<ThresholdEstimate> {
    if n != space.n() {
        return Err(Error::input(format!(
            "requested dimension {} does not match the space dimension {}",
            n,
            space.n()
        )));
    }
    let table = space.profile_table(space.radii().len().min(512))?;
    let slope = profile_tail_slope(&table);
    if slope < 0.95 {
        return Err(Error::domain(format!(
            "profile tail grows like t^{slope:.3} over its top decade; threshold scans need a \
             linear lower bound on the profile (log-log slope >= 0.95)"
        )));
    }
    let (theta, eta, outer) = probe_window(space)?;
    let theta_ref = if theta <= 1.0 {
        theta
    } else if theta <= 1.0 + 1e-6 {
        1.0
    } else {
        return Err(Error::domain(format!(
            "measured cone angle {theta:.8} exceeds 1; no sharp threshold to compare against"
        )));
    };
    let reference = mt_threshold(n, theta_ref)?;
    let exponents = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 9.5, 10.0, 10.5, 11.0];
    let r_grid: Vec<f64> = exponents.iter().map(|e| outer * 10f64.powf(-e)).collect();
    let verdict_at = |alpha: f64| -> Result<Verdict> {
        let rows: Vec<Result<ScanRow>> = par::map_indexed(Parallelism::Auto, r_grid.len(), |i| {
            scan_cell(space, theta, eta, outer, alpha, r_grid[i])
        });
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(scan_verdict(&rows))
    };
    let mut lo = 0.5 * reference;
    let mut hi = 2.5 * reference;
    let v_lo = verdict_at(lo)?;
    let v_hi = verdict_at(hi)?;
    if v_lo != Verdict::Bounded || v_hi != Verdict::Divergent {
        return Err(Error::Precondition(vec![format!(
            "bisection bracket failed: alpha = {:.6e} scans {}, alpha = {:.6e} scans {} \
             (need bounded below and divergent above); no estimate",
            lo, v_lo, hi, v_hi
        )]));
    }
    let mut iterations = 0u32;
    while iterations < BISECTION_CAP && (hi - lo) > 0.01 * (0.5 * (hi + lo)) {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if verdict_at(mid)? == Verdict::Divergent {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let estimate = 0.5 * (lo + hi);
    Ok(ThresholdEstimate {
        estimate,
        bracket_lo: lo,
        bracket_hi: hi,
        iterations,
        reference,
        relative_gap: (estimate - reference).abs() / reference,
        theta,
        eta,
        outer_radius: outer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::trumpet_space;
    use approx::assert_relative_eq;

    fn disk(scale: f64, r_max: f64, m: usize) -> Arc<RadialSpace> {
        let r_min = r_max * 1e-4;
        let step = (r_max / r_min).ln() / (m as f64 - 1.0);
        let radii: Vec<f64> = (0..m).map(|i| r_min * (step * i as f64).exp()).collect();
        let warp: Vec<f64> = radii.iter().map(|&r| scale * r).collect();
        Arc::new(RadialSpace::new(2, radii, warp, "disk").unwrap())
    }

    fn trumpet(n: u32, beta: f64) -> Arc<RadialSpace> {
        Arc::new(trumpet_space(n, beta, 6.0, 480).unwrap())
    }

    #[test]
    fn probe_constants_match_the_worked_example() {
        let p = MoserProbe::new(2, 1.0, 0.01, 1.0, 0.1).unwrap();
        assert_relative_eq!(p.t0, 2.0 * 10f64.ln(), max_relative = 1e-14);
        // 1 / (2 sqrt(1.01 · 2π · ln 10)) ≈ 0.1308
        assert!((p.c - 0.13076).abs() < 1e-4, "C = {}", p.c);
        let s = unit_sphere_area(2).unwrap();
        let normalization = p.c.powi(2) * 2.0 * p.theta * (1.0 + p.eta) * s * p.t0;
        assert_relative_eq!(normalization, 1.0, max_relative = 1e-12);

        assert!(MoserProbe::new(1, 1.0, 0.01, 1.0, 0.1).is_err());
        assert!(MoserProbe::new(2, 0.0, 0.01, 1.0, 0.1).is_err());
        assert!(MoserProbe::new(2, 1.0, 0.0, 1.0, 0.1).is_err());
        assert!(MoserProbe::new(2, 1.0, 1.0, 1.0, 0.1).is_err());
        assert!(MoserProbe::new(2, 1.0, 0.01, 1.0, 1.0).is_err());
        assert!(MoserProbe::new(2, 1.0, 0.01, 1.0, 0.0).is_err());
    }

    #[test]
    fn moser_function_traces_the_log_profile() {
        let space = disk(1.0, 2.0, 512);
        let p = MoserProbe::new(2, 1.0, 0.01, 1.0, 0.1).unwrap();
        let u = moser_function(&p, &space).unwrap();
        let plateau = p.c * p.t0;
        assert_eq!(u.eval(0.05).unwrap(), plateau);
        assert_eq!(u.eval(0.1).unwrap(), plateau);
        assert_eq!(u.eval(1.0).unwrap(), 0.0);
        assert_eq!(u.eval(1.7).unwrap(), 0.0);
        assert_relative_eq!(
            u.eval(0.5).unwrap(),
            p.c * 2.0 * 2f64.ln(),
            max_relative = 1e-4
        );

        let beyond = MoserProbe::new(2, 1.0, 0.01, 3.0, 0.1).unwrap();
        assert!(matches!(moser_function(&beyond, &space), Err(Error::Range(_))));
        let wrong_dim = MoserProbe::new(3, 1.0, 0.01, 1.0, 0.1).unwrap();
        assert!(matches!(moser_function(&wrong_dim, &space), Err(Error::Input(_))));
    }

    #[test]
    fn probe_energy_tracks_the_comparison_slack() {
        let space = disk(1.0, 2.0, 512);
        let mut previous = f64::INFINITY;
        for &eta in &[0.002, 0.01, 0.05, 0.2] {
            let p = MoserProbe::new(2, 1.0, eta, 1.0, 0.1).unwrap();
            let report = moser_energy_bound_check(&p, &space).unwrap();
            assert!(report.holds);
            assert!(report.energy > 0.0 && report.energy <= 1.0);
            // On the flat disk the smooth probe energy is exactly 1/(1+η).
            assert_relative_eq!(report.energy, 1.0 / (1.0 + eta), max_relative = 1e-5);
            assert_relative_eq!(report.bound, 1.0, max_relative = 1e-12);
            assert!((report.worst_perimeter_ratio - 1.0).abs() < 1e-9);
            assert!(report.energy < previous);
            previous = report.energy;
        }
    }

    #[test]
    fn halving_the_perimeter_halves_the_energy() {
        let p = MoserProbe::new(2, 1.0, 0.01, 1.0, 0.1).unwrap();
        let full = moser_energy_bound_check(&p, &disk(1.0, 2.0, 512)).unwrap();
        let half = moser_energy_bound_check(&p, &disk(0.5, 2.0, 512)).unwrap();
        assert_relative_eq!(half.energy, 0.5 * full.energy, max_relative = 1e-12);
    }

    #[test]
    fn perimeter_precondition_failures_are_reported() {
        let space = disk(1.0, 2.0, 512);
        let p = MoserProbe::new(2, 0.4, 0.01, 1.0, 0.1).unwrap();
        match moser_energy_bound_check(&p, &space) {
            Err(Error::Precondition(lines)) => {
                assert!(lines[0].contains("perimeter comparison fails"));
                assert!(lines[0].contains("rho ="));
            }
            other => panic!("expected a precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn blowup_scan_verdicts_bracket_the_threshold() {
        let space = trumpet(2, 0.5);
        let tau = mt_threshold(2, 0.5).unwrap();
        let r_grid: Vec<f64> = (0..21).map(|j| 0.02 * 10f64.powf(-0.5 * j as f64)).collect();
        let report = blowup_scan(&space, &[0.0, 0.8 * tau, 1.2 * tau], &r_grid).unwrap();
        assert!((report.theta - 0.5).abs() < 1e-3);
        assert_eq!(report.scans[0].verdict, Verdict::Bounded);
        assert_eq!(report.scans[1].verdict, Verdict::Bounded);
        assert_eq!(report.scans[2].verdict, Verdict::Divergent);
        for scan in &report.scans {
            for row in &scan.rows {
                assert!(row.energy > 0.9 && row.energy <= 1.0 + 1e-9);
            }
        }
        // Above the threshold the values climb monotonically through the
        // last four decades of the scan.
        let rows = &report.scans[2].rows;
        let r_min = rows.last().unwrap().r;
        let tail: Vec<f64> = rows
            .iter()
            .filter(|w| w.r <= 1e4 * r_min * (1.0 + 1e-9))
            .map(|w| w.log_functional_value)
            .collect();
        assert!(tail.len() >= 9);
        assert!(tail.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn scan_inputs_are_validated() {
        let space = trumpet(2, 0.5);
        let ok_r = [0.02, 0.002];
        assert!(matches!(blowup_scan(&space, &[], &ok_r), Err(Error::Input(_))));
        assert!(matches!(blowup_scan(&space, &[1.0], &[]), Err(Error::Input(_))));
        assert!(matches!(blowup_scan(&space, &[-1.0], &ok_r), Err(Error::Input(_))));
        assert!(matches!(
            blowup_scan(&space, &[1.0], &[0.002, 0.02]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            blowup_scan(&space, &[1.0], &[0.5, 0.05]),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn threshold_estimate_recovers_sharp_constants_n2() {
        for &beta in &[1.0, 0.5, 0.25] {
            let est = threshold_estimate(&trumpet(2, beta), 2).unwrap();
            let nominal = mt_threshold(2, beta).unwrap();
            assert!(
                (est.estimate - nominal).abs() <= 0.10 * nominal,
                "beta = {beta}: estimate {} vs nominal {}",
                est.estimate,
                nominal
            );
            assert!(est.bracket_hi - est.bracket_lo <= 0.011 * est.estimate);
            assert!(est.iterations <= BISECTION_CAP);
        }
    }

    #[test]
    fn threshold_estimate_recovers_sharp_constants_n3() {
        for &beta in &[1.0, 0.5, 0.25] {
            let est = threshold_estimate(&trumpet(3, beta), 3).unwrap();
            let nominal = mt_threshold(3, beta).unwrap();
            assert!(
                (est.estimate - nominal).abs() <= 0.10 * nominal,
                "beta = {beta}: estimate {} vs nominal {}",
                est.estimate,
                nominal
            );
        }
    }

    #[test]
    fn threshold_estimate_refuses_profiles_without_linear_growth() {
        match threshold_estimate(&disk(1.0, 2.0, 512), 2) {
            Err(Error::Domain(msg)) => assert!(msg.contains("linear")),
            other => panic!("expected a domain refusal, got {other:?}"),
        }
    }

    #[test]
    fn bump_probe_matches_the_doubling_arithmetic() {
        let p = BumpProbe::new(0.1, 2.0).unwrap();
        let t = p.plateau_height(2).unwrap();
        assert_relative_eq!(t * t, 10.0, max_relative = 1e-12);
        // Halving the vanishing volume doubles T^n.
        let half = BumpProbe::new(0.05, 2.0).unwrap();
        let t_half = half.plateau_height(2).unwrap();
        assert_relative_eq!(t_half * t_half, 2.0 * t * t, max_relative = 1e-12);

        assert!(BumpProbe::new(0.0, 2.0).is_err());
        assert!(BumpProbe::new(0.1, 1.0).is_err());
        assert!(p.plateau_height(1).is_err());
    }

    #[test]
    fn bump_sequence_tightens_and_grows() {
        // Trumpets scaled so the unit-ball volume is 10^{-k}; the doubling
        // ratio mu(B_2)/mu(B_1) is shared across the family.
        let reference = trumpet_space(2, 0.5, 5.0, 256).unwrap();
        let ratio = reference.volume(2.0).unwrap() / reference.volume(1.0).unwrap();
        let unit_vol = trumpet_space(2, 1.0, 5.0, 256).unwrap().volume(1.0).unwrap();
        let family: Vec<Arc<RadialSpace>> = (1..=4)
            .map(|k| {
                let beta = 10f64.powi(-k) / unit_vol;
                Arc::new(trumpet_space(2, beta, 5.0, 256).unwrap())
            })
            .collect();
        let rows = bump_sequence_check(&family, ratio * (1.0 + 1e-9), 1.0).unwrap();
        assert_eq!(rows.len(), 4);
        for (k, row) in rows.iter().enumerate() {
            let target = 10f64.powi(-(k as i32 + 1));
            assert_relative_eq!(row.r_m, target, max_relative = 1e-3);
            // Tight doubling makes the energy exactly 1 up to the slack.
            assert!(row.energy <= 1.0 + 1e-8);
            assert!(row.energy >= 1.0 - 1e-4);
            assert!(row.log_functional_value.is_finite());
        }
        // Functional values explode as the volume vanishes (compared in log
        // space once they overflow f64).
        for pair in rows.windows(2) {
            assert!(pair[1].log_functional_value > pair[0].log_functional_value);
        }
    }

    #[test]
    fn bump_sequence_preconditions_are_enforced() {
        let reference = trumpet_space(2, 0.5, 5.0, 256).unwrap();
        let ratio = reference.volume(2.0).unwrap() / reference.volume(1.0).unwrap();
        let family = vec![Arc::new(trumpet_space(2, 0.5, 5.0, 256).unwrap())];
        assert!(matches!(
            bump_sequence_check(&family, ratio * (1.0 - 1e-3), 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            bump_sequence_check(&family, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            bump_sequence_check(&family, ratio, 0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(bump_sequence_check(&[], ratio, 1.0), Err(Error::Input(_))));

        let shallow = vec![Arc::new(trumpet_space(2, 0.5, 1.5, 64).unwrap())];
        assert!(matches!(
            bump_sequence_check(&shallow, ratio, 1.0),
            Err(Error::Range(_))
        ));

        let mixed = vec![
            Arc::new(trumpet_space(2, 0.5, 5.0, 256).unwrap()),
            Arc::new(trumpet_space(3, 0.5, 5.0, 256).unwrap()),
        ];
        assert!(matches!(
            bump_sequence_check(&mixed, ratio * 1.5, 1.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn reports_serialize_in_camel_case() {
        let p = MoserProbe::new(2, 1.0, 0.01, 1.0, 0.1).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"outerRadius\""));
        assert!(json.contains("\"innerRadius\""));
        let verdict = serde_json::to_string(&Verdict::Divergent).unwrap();
        assert_eq!(verdict, "\"divergent\"");
    }
}
