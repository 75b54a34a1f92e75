//! Moser–Trudinger-type functionals and the certified constants of the
//! compact-case energy argument.
//!
//! The central object is the truncated-exponential functional
//! `∫ F_m(α |u|^{m/(m-1)}) dμ` with `F_m(t) = e^t - Σ_{j≤m-2} t^j/j!`
//! ([`truncated_exp`], [`mt_functional_radial`], [`mt_functional_discrete`])
//! together with its sharp admissibility threshold
//! `α_β = m (β s_{m-1})^{1/(m-1)}` ([`mt_threshold`]).
//!
//! Around it sit the quantitative certificates the compactness proof
//! consumes: the exact scaling between a β-trumpet and its β = 1 companion
//! ([`trumpet_scaling_check`]), the gradient lower bound for deep wells
//! ([`better_gradient_bound`]), the energy budget of a median split
//! ([`step2_certificate`]), the envelope minimum behind the pointwise
//! exponential bound ([`step3_envelope`]), and the p-Laplacian spectral
//! lower bound of the trumpet ([`plaplacian_lower_bound_trumpet`]).
//!
//! Functional values can exceed the f64 range long before the inputs look
//! extreme (`F_2(α u²)` is an exponential of a square); every evaluator
//! therefore reports the natural log of the value alongside the value
//! itself and switches to a rescaled integrand once the peak exponent
//! passes 700, so reports stay meaningful arbitrarily far into blow-up.

use std::sync::Arc;

use serde::Serialize;

use crate::discrete::DiscreteMMS;
use crate::error::{ensure_finite, Error, Result};
use crate::functions::RadialFunction;
use crate::modelgeom::unit_sphere_area;
use crate::num::optim::log_grid_then_golden;
use crate::radial::{trumpet_space, RadialSpace};
use crate::rearrange::{superlevel_measure, MedianSplit};

/// Largest peak exponent evaluated by direct exponentiation; above it the
/// integrand is rescaled by `e^{-peak}` and only the log of the value is
/// exact.  Chosen below `ln(f64::MAX) ≈ 709.8` with headroom for the measure
/// factors.
const LOG_DIRECT_CAP: f64 = 700.0;

/// `ln(1e300)`, the flagging level for [`MTReport::overflow`].
const OVERFLOW_LOG: f64 = 300.0 * std::f64::consts::LN_10;

/// `F_m(t) = e^{|t|} - Σ_{j=0}^{m-2} |t|^j / j!`, the truncated exponential
/// driving the Moser–Trudinger functional.
///
/// Even in `t`, nonnegative, strictly increasing in `|t|`, with
/// `F_m(t)/e^t → 1` as `t → ∞`.  For `|t| ≤ m - 1` it is summed as the tail
/// series `Σ_{j≥m-1} |t|^j / j!` — all terms positive, so no cancellation
/// even at `|t| = 1e-3` and below, where the direct difference would lose
/// every significant digit; beyond `m - 1` the direct formula is both cheap
/// and benign (the truncated polynomial is at most half of `e^{|t|}` there).
pub fn truncated_exp(m: u32, t: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("truncated exponential needs m >= 2, got {m}")));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("truncated exponential needs finite t, got {t}")));
    }
    Ok(trunc_exp(m, t))
}

/// Unvalidated core of [`truncated_exp`] for integrand loops.
fn trunc_exp(m: u32, t: f64) -> f64 {
    let a = t.abs();
    if a <= (m - 1) as f64 {
        // Tail series from j = m-1 upwards; terms decrease from the start.
        let mut term = 1.0;
        for j in 1..m {
            term *= a / j as f64;
        }
        let mut sum = term;
        let mut j = m as f64;
        while term > 0.0 {
            term *= a / j;
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
            j += 1.0;
        }
        sum
    } else {
        let mut poly = 1.0;
        let mut term = 1.0;
        for j in 1..=(m - 2) {
            term *= a / j as f64;
            poly += term;
        }
        a.exp() - poly
    }
}

/// `F_m(t) e^{-peak}` for `t ≤ peak`, computed without overflow as
/// `e^{t-peak} (1 - P_{m-2}(t) e^{-t})` with `P` the truncated Taylor
/// polynomial.  Exact algebraic rewrite of the integrand; regions with
/// `t - peak < -745` underflow to an honestly negligible zero.
fn scaled_integrand(m: u32, t: f64, peak: f64) -> f64 {
    let lead = (t - peak).exp();
    if lead == 0.0 {
        return 0.0;
    }
    let mut poly_over_exp = (-t).exp();
    let mut term = poly_over_exp;
    for j in 1..=(m as i64 - 2) {
        term *= t / j as f64;
        poly_over_exp += term;
    }
    lead * (1.0 - poly_over_exp).max(0.0)
}

/// Parameters of the Moser–Trudinger functional
/// `∫ F_m(alpha |u|^{m/(m-1)}) dμ`.
#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MTParams {
    /// Truncation order and energy exponent (`m >= 2`).
    pub m: u32,
    /// Coefficient in the exponent (`alpha > 0`).
    pub alpha: f64,
}

impl MTParams {
    pub fn new(m: u32, alpha: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("MT functional needs m >= 2, got {m}")));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("MT functional needs alpha > 0, got {alpha}")));
        }
        Ok(Self { m, alpha })
    }

    /// The conjugate exponent `m/(m-1)` applied to `|u|`.
    pub fn exponent(self) -> f64 {
        let mf = self.m as f64;
        mf / (mf - 1.0)
    }
}

/// Outcome of one Moser–Trudinger evaluation.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MTReport {
    /// `||∇u||_m^m` (graphs: `Ch_m`), the admissibility energy.
    pub energy: f64,
    /// `∫ F_m(alpha |u|^{m/(m-1)}) dμ`; `+∞` once past the f64 range.
    pub functional_value: f64,
    /// Natural log of the functional value (`-∞` for the zero functional);
    /// finite and exact even when `functional_value` overflows.
    pub log_functional_value: f64,
    /// Whether the energy constraint `energy <= 1` holds.
    pub admissible: bool,
    /// Whether the functional value exceeds 1e300.
    pub overflow: bool,
}

fn assemble(energy: f64, value: f64, log_value: f64) -> MTReport {
    MTReport {
        energy,
        functional_value: value,
        log_functional_value: log_value,
        admissible: energy <= 1.0 + 1e-12,
        overflow: log_value > OVERFLOW_LOG,
    }
}

/// `(value, log value)` of the MT integral of a radial function; `use_log`
/// selects the rescaled path (the two agree on their common range, which
/// [`tests::log_and_direct_paths_agree`] pins down).
fn radial_mt_value(u: &RadialFunction, m: u32, alpha: f64, use_log: bool) -> Result<(f64, f64)> {
    let q = m as f64 / (m as f64 - 1.0);
    let max_abs = u.max_value().abs().max(u.min_value().abs());
    let peak = alpha * max_abs.powf(q);
    let support_radius = u.support_radius();
    let support_vol = if support_radius > 0.0 { u.space().volume(support_radius)? } else { 0.0 };
    if !use_log {
        // Absolute quadrature tolerance from the crude bound F(peak)·|supp u|,
        // clamped so the product stays finite near the direct cap.
        let cap = trunc_exp(m, peak);
        let tol = 1e-13 * cap.min(1e260) * support_vol.min(1e30);
        let value = u
            .integral_of(&|v| trunc_exp(m, alpha * v.abs().powf(q)), tol)?
            .max(0.0);
        Ok((value, value.ln()))
    } else {
        let tol = 1e-13 * support_vol.min(1e30);
        let scaled = u
            .integral_of(&|v| scaled_integrand(m, alpha * v.abs().powf(q), peak), tol)?
            .max(0.0);
        let log_value = peak + scaled.ln();
        Ok((log_value.exp(), log_value))
    }
}

/// Moser–Trudinger functional of a piecewise-linear radial function:
/// `functional_value = ∫ F_m(alpha |u|^{m/(m-1)}) dμ` with energy
/// `||∇u||_m^m`.
///
/// Constant plateaus (and the zero tail) integrate exactly; ramps use
/// adaptive quadrature.  Once the peak exponent `alpha·max|u|^{m/(m-1)}`
/// passes 700 the integrand is rescaled by `e^{-peak}` and the log of the
/// value stays exact while `functional_value` saturates at `+∞`.
pub fn mt_functional_radial(u: &RadialFunction, params: MTParams) -> Result<MTReport> {
    let energy = u.gradient_energy(params.m as f64)?;
    let q = params.exponent();
    let max_abs = u.max_value().abs().max(u.min_value().abs());
    let peak = params.alpha * max_abs.powf(q);
    let (value, log_value) = radial_mt_value(u, params.m, params.alpha, peak > LOG_DIRECT_CAP)?;
    Ok(assemble(energy, value, log_value))
}

/// `(value, log value)` of the exact MT vertex sum; see [`radial_mt_value`].
fn discrete_mt_value(
    values: &[f64],
    masses: &[f64],
    m: u32,
    alpha: f64,
    use_log: bool,
) -> (f64, f64) {
    let q = m as f64 / (m as f64 - 1.0);
    if !use_log {
        let value: f64 = values
            .iter()
            .zip(masses)
            .map(|(&v, &mu)| mu * trunc_exp(m, alpha * v.abs().powf(q)))
            .sum();
        let value = value.max(0.0);
        (value, value.ln())
    } else {
        let peak = values
            .iter()
            .fold(0.0f64, |acc, v| acc.max(alpha * v.abs().powf(q)));
        let scaled: f64 = values
            .iter()
            .zip(masses)
            .map(|(&v, &mu)| mu * scaled_integrand(m, alpha * v.abs().powf(q), peak))
            .sum();
        let log_value = peak + scaled.max(0.0).ln();
        (log_value.exp(), log_value)
    }
}

/// Moser–Trudinger functional on a weighted graph: the exact vertex sum
/// `Σ_i μ_i F_m(alpha |u_i|^{m/(m-1)})` with `Ch_m(u)` as the energy.
///
/// Shares the log-space fallback of [`mt_functional_radial`].
pub fn mt_functional_discrete(
    graph: &DiscreteMMS,
    values: &[f64],
    params: MTParams,
) -> Result<MTReport> {
    if values.len() != graph.n_vertices() {
        return Err(Error::input(format!(
            "expected one value per vertex ({}), got {}",
            graph.n_vertices(),
            values.len()
        )));
    }
    ensure_finite(values, "vertex values")?;
    let energy = graph.ch_p(values, params.m as f64)?;
    let q = params.exponent();
    let peak = values
        .iter()
        .fold(0.0f64, |acc, v| acc.max(params.alpha * v.abs().powf(q)));
    let (value, log_value) = discrete_mt_value(
        values,
        graph.vertex_measures(),
        params.m,
        params.alpha,
        peak > LOG_DIRECT_CAP,
    );
    Ok(assemble(energy, value, log_value))
}

/// Sharp admissibility threshold `alpha_beta = m (beta s_{m-1})^{1/(m-1)}`
/// of the Moser–Trudinger functional on a space of cone opening `beta`:
/// below it the functional stays bounded over unit-energy functions, above
/// it Moser-style probes blow up.
///
/// `m = 2, beta = 1` gives the classical `4π`; halving the opening halves
/// the threshold to `2π`.
pub fn mt_threshold(m: u32, beta: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("MT threshold needs m >= 2, got {m}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("cone opening beta must lie in (0, 1], got {beta}")));
    }
    let mf = m as f64;
    Ok(mf * (beta * unit_sphere_area(m)?).powf(1.0 / (mf - 1.0)))
}

/// Outcome of [`trumpet_scaling_check`].
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrumpetScalingReport {
    pub beta: f64,
    /// `(E_beta / E_1)^{1/n}`, the gradient-norm ratio (NaN when both vanish).
    pub energy_ratio: f64,
    /// `beta^{1/n}`.
    pub expected_energy_ratio: f64,
    /// Ratio of the MT measure integrals (NaN when both vanish).
    pub integral_ratio: f64,
    /// `beta`.
    pub expected_integral_ratio: f64,
    pub energy_holds: bool,
    pub integral_holds: bool,
    pub holds: bool,
    pub tol: f64,
}

/// Verifies the exact scaling between a β-trumpet and its β = 1 companion.
///
/// Transporting `u` along the radial identity map to the space whose warp is
/// divided by `beta^{1/(n-1)}` divides every boundary area and volume by
/// `beta`; hence the n-energy **norm** scales by `beta^{1/n}` and any measure
/// integral by `beta`, level by level.  The measure integral is taken to be
/// the MT integrand at `alpha = 1, m = n` (any positive integrand gives the
/// same ratio) and the comparison is made in log space, so the check still
/// works deep into blow-up.  Nothing trumpet-specific is assumed: the
/// identity holds for any radial space whose warp is rescaled uniformly.
pub fn trumpet_scaling_check(u: &RadialFunction, n: u32, beta: f64) -> Result<TrumpetScalingReport> {
    let space = u.space();
    if space.n() != n {
        return Err(Error::input(format!(
            "scaling check at n = {n} against a space of dimension {}",
            space.n()
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    let nf = n as f64;
    let scale = beta.powf(1.0 / (nf - 1.0));
    let warp: Vec<f64> = space.warp_values().iter().map(|&w| w / scale).collect();
    let companion =
        Arc::new(RadialSpace::new(n, space.radii().to_vec(), warp, "unit-beta companion")?);
    let v = RadialFunction::new(companion, u.radii().to_vec(), u.values().to_vec())?;
    let params = MTParams::new(n, 1.0)?;
    let on_beta = mt_functional_radial(u, params)?;
    let on_one = mt_functional_radial(&v, params)?;

    let tol = 1e-10;
    let expected_energy_ratio = beta.powf(1.0 / nf);
    let (energy_ratio, energy_holds) = if on_one.energy == 0.0 {
        (f64::NAN, on_beta.energy == 0.0)
    } else {
        let r = (on_beta.energy / on_one.energy).powf(1.0 / nf);
        (r, (r - expected_energy_ratio).abs() <= tol)
    };
    let (integral_ratio, integral_holds) = if on_one.log_functional_value == f64::NEG_INFINITY {
        (f64::NAN, on_beta.log_functional_value == f64::NEG_INFINITY)
    } else {
        let r = (on_beta.log_functional_value - on_one.log_functional_value).exp();
        (r, (r - beta).abs() <= tol)
    };
    Ok(TrumpetScalingReport {
        beta,
        energy_ratio,
        expected_energy_ratio,
        integral_ratio,
        expected_integral_ratio: beta,
        energy_holds,
        integral_holds,
        holds: energy_holds && integral_holds,
        tol,
    })
}

/// Outcome of [`better_gradient_bound`].
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BetterGradientReport {
    /// `||∇u||_n^n`.
    pub lhs: f64,
    /// `beta^{1/(n-1)} (3(1-1/n))^n c^n σ(Ω)`.
    pub rhs: f64,
    /// Measured volume of `Ω = {u < c}`.
    pub sigma: f64,
    /// Measured `∫_Ω u dμ`.
    pub integral_over_omega: f64,
    pub holds: bool,
    pub tol: f64,
}

/// Certified gradient lower bound for a deep well on a β-trumpet-dominated
/// space: if `u ≤ c`, `u - c` is supported in a region `Ω` of measure
/// `σ(Ω)`, and `∫_Ω u dμ ≤ -2cσ(Ω)`, then
///
/// `||∇u||_n^n ≥ beta^{1/(n-1)} (3(1-1/n))^n c^n σ(Ω)`.
///
/// All three hypotheses are verified numerically — `Ω` is measured as the
/// open superlevel set of `c - u`, cross-checked against `omega_volume` —
/// and every failed hypothesis is reported by name in a single
/// [`Error::Precondition`].
pub fn better_gradient_bound(
    u: &RadialFunction,
    c: f64,
    omega_volume: f64,
    beta: f64,
    n: u32,
) -> Result<BetterGradientReport> {
    if n < 2 {
        return Err(Error::domain(format!("gradient bound needs n >= 2, got {n}")));
    }
    if u.space().n() != n {
        return Err(Error::input(format!(
            "gradient bound at n = {n} against a space of dimension {}",
            u.space().n()
        )));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("plateau level c must be positive, got {c}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(omega_volume > 0.0) || !omega_volume.is_finite() {
        return Err(Error::domain(format!("omega volume must be positive, got {omega_volume}")));
    }

    let mut failures = Vec::new();
    let max = u.max_value();
    if max > c * (1.0 + 1e-12) {
        // The remaining hypotheses quantify over {u < c} and are meaningless
        // when u pokes above the plateau; report just this one.
        return Err(Error::Precondition(vec![format!(
            "u must not exceed the plateau level: max u = {max} > c = {c}"
        )]));
    }
    // w = c - u >= 0 vanishes exactly off Omega.
    let w_values: Vec<f64> = u.values().iter().map(|&v| c - v).collect();
    let w = RadialFunction::new(u.space().clone(), u.radii().to_vec(), w_values)?;
    let sigma = superlevel_measure(&w, 0.0)?;
    if (sigma - omega_volume).abs() > 1e-9 * omega_volume.max(u.total_volume()) {
        failures.push(format!(
            "support of u - c has measure {sigma}, but omega volume {omega_volume} was declared"
        ));
    }
    let w_int = w.integral()?;
    let integral_over_omega = c * sigma - w_int;
    let slack = 1e-9 * (c * sigma).abs().max(w_int.abs());
    if integral_over_omega > -2.0 * c * sigma + slack {
        failures.push(format!(
            "well is too shallow: int_Omega u = {integral_over_omega} exceeds -2 c sigma = {}",
            -2.0 * c * sigma
        ));
    }
    if !failures.is_empty() {
        return Err(Error::Precondition(failures));
    }

    let nf = n as f64;
    let lhs = u.gradient_energy(nf)?;
    let rhs = beta.powf(1.0 / (nf - 1.0))
        * (3.0 * (1.0 - 1.0 / nf)).powi(n as i32)
        * c.powi(n as i32)
        * sigma;
    let tol = 1e-10 * rhs;
    Ok(BetterGradientReport { lhs, rhs, sigma, integral_over_omega, holds: lhs >= rhs - tol, tol })
}

/// Outcome of [`step2_certificate`].
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Step2Report {
    /// `beta^{1/(m-1)} (3(1-1/m))^m`, the deep-well constant.
    pub c6: f64,
    pub median: f64,
    /// Half-mass volume supporting both rearranged halves.
    pub sigma: f64,
    /// `||∇u_+||_m^m` of the smoothed super-median rearrangement.
    pub grad_plus_energy: f64,
    /// `||∇u_-||_m^m` of the smoothed sub-median rearrangement.
    pub grad_minus_energy: f64,
    /// `1 - C_6 c^m σ(Ω)`, the certified ceiling for `||∇u_+||_m^m`.
    pub grad_plus_bound: f64,
    /// `||∇u_+||_m^m ≤ 1 - ||∇u_-||_m^m`.
    pub plus_within_complement: bool,
    /// `1 - ||∇u_-||_m^m ≤ 1 - C_6 c^m σ(Ω) + tol`.
    pub complement_within_bound: bool,
    pub holds: bool,
    pub tol: f64,
}

/// Energy budget of the super-median half of a median split taken from a
/// unit-energy, zero-average source with positive median `c`: with
/// `C_6 = beta^{1/(m-1)} (3(1-1/m))^m` it checks the chain
///
/// `||∇u_+||_m^m ≤ 1 - ||∇u_-||_m^m ≤ 1 - C_6 c^m σ(Ω) + tol`.
///
/// The first link is the Pólya–Szegő energy split of the unit budget, the
/// second is [`better_gradient_bound`] applied to the sub-median well.  The
/// split cannot carry its source's normalisation, so `energy = 1` is the
/// caller's contract; a violated normalisation surfaces as `holds = false`.
pub fn step2_certificate(split: &MedianSplit, m: u32, beta: f64) -> Result<Step2Report> {
    if m < 2 {
        return Err(Error::domain(format!("certificate needs m >= 2, got {m}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(split.c > 0.0) {
        return Err(Error::Precondition(vec![format!(
            "certificate needs a positive median, got {}",
            split.c
        )]));
    }
    let mf = m as f64;
    let grad_plus_energy = split.u_plus_smooth.gradient_energy(mf)?;
    let grad_minus_energy = split.u_minus_smooth.gradient_energy(mf)?;
    let c6 = beta.powf(1.0 / (mf - 1.0)) * (3.0 * (1.0 - 1.0 / mf)).powi(m as i32);
    let sigma = split.omega_volume;
    let grad_plus_bound = 1.0 - c6 * split.c.powi(m as i32) * sigma;
    let tol = 1e-9;
    let plus_within_complement = grad_plus_energy <= 1.0 - grad_minus_energy + tol;
    let complement_within_bound = 1.0 - grad_minus_energy <= grad_plus_bound + tol;
    Ok(Step2Report {
        c6,
        median: split.c,
        sigma,
        grad_plus_energy,
        grad_minus_energy,
        grad_plus_bound,
        plus_within_complement,
        complement_within_bound,
        holds: plus_within_complement && complement_within_bound,
        tol,
    })
}

/// Outcome of [`step3_envelope`].
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Step3Report {
    pub min_numeric: f64,
    pub min_closed: f64,
    /// `|min_closed|`, the magnitude the subsequent exponential bound uses.
    pub magnitude: f64,
    pub argmin_numeric: f64,
    pub argmin_closed: f64,
    /// `|min_numeric - min_closed| ≤ 1e-6 |min_closed|`.
    pub agrees: bool,
}

/// Envelope minimum of `h(t) = t^{m'}/R - (t + c)^{m'}` over `t ≥ 0`, with
/// `m' = m/(m-1)` and `R ∈ (0, 1)`: minimised numerically (log grid plus
/// golden-section refinement) and compared against the closed form
///
/// `min h = -c^{m'} / (1 - R^{m-1})^{1/(m-1)}`, attained at
/// `t = c R^{m-1} / (1 - R^{m-1})`.
///
/// The exponential bound downstream consumes the magnitude of this minimum,
/// exposed as [`Step3Report::magnitude`].
pub fn step3_envelope(m: u32, big_r: f64, c: f64) -> Result<Step3Report> {
    if m < 2 {
        return Err(Error::domain(format!("envelope needs m >= 2, got {m}")));
    }
    if !(big_r > 0.0 && big_r < 1.0) {
        return Err(Error::domain(format!("R must lie in (0, 1), got {big_r}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("offset c must be positive, got {c}")));
    }
    let mf = m as f64;
    let q = mf / (mf - 1.0);
    let h = move |t: f64| t.powf(q) / big_r - (t + c).powf(q);
    let rm = big_r.powi(m as i32 - 1);
    let denom = 1.0 - rm;
    let min_closed = -c.powf(q) / denom.powf(1.0 / (mf - 1.0));
    let argmin_closed = c * rm / denom;
    let lo = 1e-4 * c.min(argmin_closed);
    let hi = 1e2 * c.max(argmin_closed);
    let (argmin_numeric, min_numeric) =
        log_grid_then_golden(&h, lo, hi, 200, 1e-9 * argmin_closed.max(lo));
    let agrees = (min_numeric - min_closed).abs() <= 1e-6 * min_closed.abs();
    Ok(Step3Report {
        min_numeric,
        min_closed,
        magnitude: min_closed.abs(),
        argmin_numeric,
        argmin_closed,
        agrees,
    })
}

/// Outcome of [`plaplacian_lower_bound_trumpet`].
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlaplacianBound {
    /// `beta^{1/(n-1)} ((n-1)/n)^n`, the certified spectral lower bound.
    pub bound: f64,
    /// Smallest Rayleigh quotient found over the radial test family — an
    /// upper estimate of the true infimum.
    pub numeric_infimum: f64,
    /// `numeric_infimum >= bound`, as any lower bound must satisfy.
    pub consistent: bool,
}

/// Certified lower bound `beta^{1/(n-1)} ((n-1)/n)^n` for the n-Laplacian
/// spectral infimum `inf ||∇u||_n^n / ||u||_n^n` of the β-trumpet.
///
/// As a cross-check the infimum is estimated from above over a family of
/// compactly supported radial test functions — tents `(1 - r/a)_+` and
/// truncated exponentials `e^{-sr}` with `s` just above `(n-1)/n`, whose
/// quotients approach `((n-1)/n)^n` as the support grows — and the report
/// records that the estimate indeed sits above the bound.
pub fn plaplacian_lower_bound_trumpet(n: u32, beta: f64) -> Result<PlaplacianBound> {
    if n < 2 {
        return Err(Error::domain(format!("spectral bound needs n >= 2, got {n}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    let nf = n as f64;
    let bound = beta.powf(1.0 / (nf - 1.0)) * ((nf - 1.0) / nf).powi(n as i32);

    let r_max = 24.0;
    let space = Arc::new(trumpet_space(n, beta, r_max, 360)?);
    let mut numeric_infimum = f64::INFINITY;
    let mut rayleigh = |u: &RadialFunction| -> Result<()> {
        let num = u.gradient_energy(nf)?;
        let den = u.lp_norm_pth_power(nf)?;
        if den > 0.0 {
            numeric_infimum = numeric_infimum.min(num / den);
        }
        Ok(())
    };
    for k in 0..10 {
        let a = 2.0 * (19.0f64 / 2.0).powf(k as f64 / 9.0);
        let tent = RadialFunction::from_fn(space.clone(), |r| (1.0 - r / a).max(0.0))?;
        rayleigh(&tent)?;
    }
    let cutoff = 20.0;
    for factor in [1.05, 1.1, 1.2, 1.35, 1.6, 2.0] {
        let s = (nf - 1.0) / nf * factor;
        let shoulder = (-s * cutoff).exp();
        let exp_fn = RadialFunction::from_fn(space.clone(), |r| {
            if r <= cutoff {
                (-s * r).exp()
            } else {
                shoulder * (1.0 - (r - cutoff) / (r_max - cutoff)).max(0.0)
            }
        })?;
        rayleigh(&exp_fn)?;
    }
    Ok(PlaplacianBound {
        bound,
        numeric_infimum,
        consistent: numeric_infimum >= bound - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::unit_path;
    use crate::rearrange::double_rearrangement;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{E, PI};

    fn trumpet(n: u32, beta: f64, r_max: f64, m: usize) -> Arc<RadialSpace> {
        Arc::new(trumpet_space(n, beta, r_max, m).unwrap())
    }

    #[test]
    fn truncated_exp_reproduces_known_values() {
        for m in 2..=6 {
            assert_eq!(truncated_exp(m, 0.0).unwrap(), 0.0);
        }
        assert_relative_eq!(truncated_exp(2, 1.0).unwrap(), E - 1.0, max_relative = 1e-14);
        assert_relative_eq!(truncated_exp(3, 1.0).unwrap(), E - 2.0, max_relative = 1e-14);
        // Series regime: m = 2 matches exp_m1 to machine precision.
        assert_relative_eq!(truncated_exp(2, 1e-4).unwrap(), 1e-4f64.exp_m1(), max_relative = 1e-15);
        // m = 6 at t = 2e-3: the direct difference would lose every digit;
        // oracle from the first five tail terms (the sixth is ~1e-16 relative).
        let t: f64 = 2e-3;
        let oracle: f64 = (5..=9).map(|j| t.powi(j) / (1..=j).product::<i32>() as f64).sum();
        assert_relative_eq!(truncated_exp(6, t).unwrap(), oracle, max_relative = 1e-13);
        // Even in t.
        assert_eq!(truncated_exp(4, -1.7).unwrap(), truncated_exp(4, 1.7).unwrap());
        assert!(truncated_exp(1, 1.0).is_err());
        assert!(truncated_exp(2, f64::INFINITY).is_err());
    }

    #[test]
    fn truncated_exp_is_monotone_with_exponential_tail() {
        for m in 2..=4 {
            let mut prev = 0.0;
            for k in 1..=100 {
                let v = truncated_exp(m, 0.5 * k as f64).unwrap();
                assert!(v > prev, "F_{m} must increase, got {v} after {prev}");
                prev = v;
            }
            // F_m(t)/e^t -> 1: at t = 30 the truncated polynomial is still
            // resolvable (P_2(30)/e^30 ~ 4.5e-11), at t = 200 it is below
            // one ulp and the ratio must be exactly 1.
            let ratio = truncated_exp(m, 30.0).unwrap() / 30.0f64.exp();
            assert!(ratio < 1.0 && ratio > 1.0 - 1e-9);
            assert_eq!(truncated_exp(m, 200.0).unwrap() / 200.0f64.exp(), 1.0);
        }
    }

    #[test]
    fn threshold_matches_sharp_constants() {
        assert_relative_eq!(mt_threshold(2, 1.0).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(mt_threshold(2, 0.5).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(
            mt_threshold(3, 1.0).unwrap(),
            3.0 * (4.0 * PI).sqrt(),
            max_relative = 1e-14
        );
        assert!(mt_threshold(2, 0.25).unwrap() < mt_threshold(2, 0.5).unwrap());
        assert!(mt_threshold(1, 1.0).is_err());
        assert!(mt_threshold(2, 0.0).is_err());
        assert!(mt_threshold(2, 1.5).is_err());
    }

    #[test]
    fn zero_and_constant_functions_evaluate_in_closed_form() {
        let space = trumpet(2, 1.0, 4.0, 80);
        let zero = RadialFunction::from_fn(space, |_| 0.0).unwrap();
        let report = mt_functional_radial(&zero, MTParams::new(2, 4.0 * PI).unwrap()).unwrap();
        assert_eq!(report.functional_value, 0.0);
        assert_eq!(report.log_functional_value, f64::NEG_INFINITY);
        assert_eq!(report.energy, 0.0);
        assert!(report.admissible && !report.overflow);

        // Constant c on total mass V: exactly V (e^{alpha c^2} - 1) at m = 2.
        let graph = unit_path(4);
        let (c, alpha) = (0.7, 1.3);
        let report =
            mt_functional_discrete(&graph, &[c; 4], MTParams::new(2, alpha).unwrap()).unwrap();
        let expected = 4.0 * ((alpha * c * c).exp() - 1.0);
        assert_relative_eq!(report.functional_value, expected, max_relative = 1e-13);
        assert_eq!(report.energy, 0.0);
        assert!(report.admissible);
    }

    #[test]
    fn log_and_direct_paths_agree() {
        // Discrete, peak exponent 650: both paths are exact here.
        let values = [25.49509756796392, 10.0, 0.0]; // v^2 = 650 at the head
        let masses = [1.0, 2.0, 0.5];
        let (direct, log_direct) = discrete_mt_value(&values, &masses, 2, 1.0, false);
        let (via_log, log_log) = discrete_mt_value(&values, &masses, 2, 1.0, true);
        assert_relative_eq!(direct, via_log, max_relative = 1e-12);
        assert_relative_eq!(log_direct, log_log, max_relative = 1e-14);

        // Radial: a plateau-and-ramp profile evaluated both ways.
        let space = trumpet(2, 1.0, 4.0, 120);
        let u = RadialFunction::new(space, vec![0.5, 1.5], vec![24.0, 0.0]).unwrap();
        let (direct, _) = radial_mt_value(&u, 2, 1.0, false).unwrap();
        let (via_log, _) = radial_mt_value(&u, 2, 1.0, true).unwrap();
        assert_relative_eq!(direct, via_log, max_relative = 1e-10);
    }

    #[test]
    fn blown_up_values_report_in_log_space() {
        let graph = unit_path(2);
        let report =
            mt_functional_discrete(&graph, &[30.0, 30.0], MTParams::new(2, 1.0).unwrap()).unwrap();
        // F_2(900) = e^900 - 1 on total mass 2: log = 900 + ln 2 exactly.
        assert!((report.log_functional_value - (900.0 + 2.0f64.ln())).abs() < 1e-9);
        assert!(report.overflow);
        assert!(report.functional_value.is_infinite());
        assert!(report.admissible); // a constant pair has zero energy

        // Radial plateau at value 30: the integral is sandwiched between the
        // plateau contribution and the whole-space ceiling.
        let space = trumpet(2, 1.0, 4.0, 120);
        let u = RadialFunction::new(space.clone(), vec![1.0, 2.0], vec![30.0, 0.0]).unwrap();
        let report = mt_functional_radial(&u, MTParams::new(2, 1.0).unwrap()).unwrap();
        let plateau_log = 900.0 + space.volume(1.0).unwrap().ln();
        let ceiling_log = 900.0 + space.total_volume().ln();
        assert!(report.log_functional_value >= plateau_log - 1e-9);
        assert!(report.log_functional_value <= ceiling_log);
        assert!(report.overflow && report.functional_value.is_infinite());
    }

    #[test]
    fn functional_is_monotone_in_alpha_and_magnitude() {
        let graph = unit_path(6);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let values: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let m = if rng.gen_bool(0.5) { 2 } else { 3 };
            let a1 = rng.gen_range(0.1..1.5);
            let a2 = a1 + rng.gen_range(0.1..1.5);
            let v1 = mt_functional_discrete(&graph, &values, MTParams::new(m, a1).unwrap())
                .unwrap()
                .functional_value;
            let v2 = mt_functional_discrete(&graph, &values, MTParams::new(m, a2).unwrap())
                .unwrap()
                .functional_value;
            assert!(v1 <= v2 * (1.0 + 1e-12), "alpha monotonicity: {v1} vs {v2}");
            let scaled: Vec<f64> = values.iter().map(|v| 1.3 * v).collect();
            let v3 = mt_functional_discrete(&graph, &scaled, MTParams::new(m, a1).unwrap())
                .unwrap()
                .functional_value;
            assert!(v1 <= v3 * (1.0 + 1e-12), "magnitude monotonicity: {v1} vs {v3}");
        }
    }

    #[test]
    fn trumpet_scaling_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &beta in &[1.0, 0.5, 0.25] {
            for n in 2..=4u32 {
                let space = trumpet(n, beta, 5.0, 80);
                for _ in 0..5 {
                    let mut radii: Vec<f64> =
                        (0..4).map(|_| rng.gen_range(0.05..4.8)).collect();
                    radii.sort_by(f64::total_cmp);
                    let values: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.5)).collect();
                    let u = RadialFunction::new(space.clone(), radii, values).unwrap();
                    let report = trumpet_scaling_check(&u, n, beta).unwrap();
                    assert!(report.holds, "beta={beta} n={n}: {report:?}");
                    assert!((report.energy_ratio - beta.powf(1.0 / n as f64)).abs() <= 1e-10);
                    assert!((report.integral_ratio - beta).abs() <= 1e-10);
                }
            }
        }
        // Dimension mismatch is refused.
        let space = trumpet(3, 1.0, 5.0, 40);
        let u = RadialFunction::from_fn(space, |r| (1.0 - r).max(0.0)).unwrap();
        assert!(trumpet_scaling_check(&u, 2, 1.0).is_err());
    }

    /// A radial well: plateau `-depth` inside `f·r0`, linear up to `c` at
    /// `r0`, constant `c` outside.
    fn well(
        space: &Arc<RadialSpace>,
        r0: f64,
        inner_fraction: f64,
        depth: f64,
        c: f64,
    ) -> RadialFunction {
        RadialFunction::new(
            space.clone(),
            vec![inner_fraction * r0, r0],
            vec![-depth, c],
        )
        .unwrap()
    }

    #[test]
    fn deep_well_gradient_bound_holds_and_matches_the_plugin_constant() {
        let space = trumpet(2, 1.0, 6.0, 400);
        let r0 = space.radius_at_volume(1.0).unwrap();
        let sigma = space.volume(r0).unwrap();
        // c = 1, sigma = 1: rhs must be the plug-in constant 2.25.
        let u = well(&space, r0, 0.5, 8.0, 1.0);
        let report = better_gradient_bound(&u, 1.0, sigma, 1.0, 2).unwrap();
        assert_relative_eq!(report.rhs, 2.25 * report.sigma, max_relative = 1e-12);
        assert_relative_eq!(report.sigma, 1.0, max_relative = 1e-9);
        assert!(report.holds, "{report:?}");
        assert!(report.integral_over_omega <= -2.0 * report.sigma);
        assert!(report.lhs >= report.rhs);
    }

    #[test]
    fn shallow_or_misdeclared_wells_fail_their_preconditions() {
        let space = trumpet(2, 1.0, 6.0, 400);
        let r0 = space.radius_at_volume(1.0).unwrap();
        let sigma = space.volume(r0).unwrap();

        // Too shallow: the mean over the well sits above -2c.
        let shallow = well(&space, r0, 0.5, 0.5, 1.0);
        match better_gradient_bound(&shallow, 1.0, sigma, 1.0, 2) {
            Err(Error::Precondition(msgs)) => {
                assert_eq!(msgs.len(), 1);
                assert!(msgs[0].contains("too shallow"), "{msgs:?}");
            }
            other => panic!("expected a precondition failure, got {other:?}"),
        }

        // Pokes above the plateau level.
        let above = RadialFunction::new(space.clone(), vec![r0, 2.0 * r0], vec![-8.0, 1.5]).unwrap();
        match better_gradient_bound(&above, 1.0, sigma, 1.0, 2) {
            Err(Error::Precondition(msgs)) => assert!(msgs[0].contains("must not exceed")),
            other => panic!("expected a precondition failure, got {other:?}"),
        }

        // Declared support volume disagrees with the measured one.
        let deep = well(&space, r0, 0.5, 8.0, 1.0);
        match better_gradient_bound(&deep, 1.0, 2.0 * sigma, 1.0, 2) {
            Err(Error::Precondition(msgs)) => assert!(msgs[0].contains("measure"), "{msgs:?}"),
            other => panic!("expected a precondition failure, got {other:?}"),
        }
    }

    #[test]
    fn gradient_bound_holds_across_a_randomized_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let betas = [1.0, 0.5, 0.25];
        let mut cases = 0;
        while cases < 500 {
            let n = if cases % 2 == 0 { 2 } else { 3 };
            let beta = betas[cases % 3];
            let space = trumpet(n, beta, 5.0, 64);
            let c = rng.gen_range(0.05..0.8);
            let r0 = rng.gen_range(0.2..3.0);
            let f = rng.gen_range(0.3..0.85);
            let sigma = space.volume(r0).unwrap();
            // The well integral is linear in the depth: solve for the depth
            // that pins int_Omega u at -2 c sigma times a random margin.
            let w0 = well(&space, r0, f, 0.0, c); // depth 0
            let w1 = well(&space, r0, f, 1.0, c); // depth 1
            let i0 = w0.integral().unwrap() - c * (space.total_volume() - sigma);
            let i1 = w1.integral().unwrap() - c * (space.total_volume() - sigma);
            let slope = i0 - i1; // integral drop per unit depth, > 0
            let margin = rng.gen_range(1.05..3.0);
            let depth = (i0 + 2.0 * c * sigma * margin) / slope;
            let u = well(&space, r0, f, depth, c);
            let report = better_gradient_bound(&u, c, sigma, beta, n).unwrap();
            assert!(
                report.holds,
                "case {cases}: n={n} beta={beta} c={c} r0={r0} f={f} depth={depth}: {report:?}"
            );
            cases += 1;
        }
    }

    #[test]
    fn median_split_certificate_holds_on_a_strong_edged_path() {
        // Zero-average source with a positive median and one deep negative atom.
        let graph = DiscreteMMS::new(
            vec![1.0; 8],
            (0..7).map(|i| (i, i + 1, 0.05, 10.0)).collect(),
            "strong path",
        )
        .unwrap();
        let raw = [3.0, 2.0, 1.0, 0.5, 0.5, 0.5, -1.0, -6.5];
        let energy = graph.ch_p(&raw, 2.0).unwrap();
        let values: Vec<f64> = raw.iter().map(|v| v / energy.sqrt()).collect();
        assert!((graph.ch_p(&values, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let f = graph.function(values).unwrap();
        assert!(f.mean().abs() < 1e-12);

        let target = trumpet(2, 0.5, 5.0, 200);
        let split = double_rearrangement(&f, target).unwrap();
        assert!(split.c > 0.0);
        let report = step2_certificate(&split, 2, 0.5).unwrap();
        assert_relative_eq!(report.c6, 0.5 * 2.25, max_relative = 1e-14);
        assert_relative_eq!(
            report.grad_plus_bound,
            1.0 - report.c6 * split.c * split.c * split.omega_volume,
            max_relative = 1e-12
        );
        assert!(report.holds, "{report:?}");
        assert!(report.grad_plus_energy + report.grad_minus_energy <= 1.0 + 1e-9);

        // A negative median violates the certificate's precondition.
        let mut neg = split;
        neg.c = -neg.c;
        assert!(matches!(step2_certificate(&neg, 2, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn envelope_minimum_matches_the_closed_form() {
        // m = 2, R = 1/2, c = 1: h(t) = t^2 - 2t - 1, minimum -2 at t = 1.
        let report = step3_envelope(2, 0.5, 1.0).unwrap();
        assert_relative_eq!(report.min_closed, -2.0, max_relative = 1e-15);
        assert_relative_eq!(report.min_numeric, -2.0, max_relative = 1e-9);
        assert!((report.argmin_numeric - 1.0).abs() < 1e-4);
        assert!(report.agrees);
        assert_eq!(report.magnitude, 2.0);

        // m = 3, R = 1/2, c = 1: -1/sqrt(0.75).
        let report = step3_envelope(3, 0.5, 1.0).unwrap();
        assert_relative_eq!(report.min_closed, -1.0 / 0.75f64.sqrt(), max_relative = 1e-15);
        assert!(report.agrees);

        assert!(step3_envelope(2, 1.0, 1.0).is_err());
        assert!(step3_envelope(2, 0.0, 1.0).is_err());
        assert!(step3_envelope(2, 0.5, 0.0).is_err());
        assert!(step3_envelope(1, 0.5, 1.0).is_err());
    }

    #[test]
    fn envelope_agreement_survives_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let ms = [2u32, 3, 4, 6];
        for k in 0..100 {
            let m = ms[k % ms.len()];
            let big_r = rng.gen_range(0.05..0.95);
            let c = rng.gen_range(0.01..10.0);
            let report = step3_envelope(m, big_r, c).unwrap();
            assert!(
                report.agrees,
                "m={m} R={big_r} c={c}: numeric {} vs closed {}",
                report.min_numeric, report.min_closed
            );
        }
    }

    #[test]
    fn plaplacian_bound_reproduces_the_model_constants() {
        let b = plaplacian_lower_bound_trumpet(2, 1.0).unwrap();
        assert_relative_eq!(b.bound, 0.25, max_relative = 1e-15);
        assert!(b.consistent, "{b:?}");
        assert!(b.numeric_infimum < 0.25 * 1.8, "family should approach the bound: {b:?}");

        let b = plaplacian_lower_bound_trumpet(3, 1.0).unwrap();
        assert_relative_eq!(b.bound, 8.0 / 27.0, max_relative = 1e-15);
        assert!(b.consistent);

        let b = plaplacian_lower_bound_trumpet(2, 0.25).unwrap();
        assert_relative_eq!(b.bound, 0.0625, max_relative = 1e-15);
        assert!(b.consistent);

        assert!(plaplacian_lower_bound_trumpet(1, 1.0).is_err());
        assert!(plaplacian_lower_bound_trumpet(2, 0.0).is_err());
    }

    #[test]
    fn reports_serialize_in_camel_case() {
        let graph = unit_path(3);
        let report =
            mt_functional_discrete(&graph, &[1.0, 0.5, 0.0], MTParams::new(2, 1.0).unwrap())
                .unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("functionalValue").is_some());
        assert!(json.get("logFunctionalValue").is_some());
        assert!(json.get("admissible").is_some());
    }
}
