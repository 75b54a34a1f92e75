//! Medians, the median–average gap, and the median-split double
//! rearrangement used by the compact-case certificates.

use std::sync::Arc;

use crate::discrete::DiscreteMMS;
use crate::error::{Error, Result};
use crate::functions::{DiscreteFunction, RadialFunction};
use crate::radial::RadialSpace;
use crate::rearrange::distribution::{
    closed_superlevel_measure, distribution_discrete, superlevel_measure,
};
use crate::rearrange::rearrangement::{decreasing_rearrangement, RearrangementMode};

/// Median of a function on a finite measure space: the midpoint of the
/// closed interval of valid medians `[lower, upper]`, where both
/// `mu({u <= c})` and `mu({u >= c})` are at least half the total mass.
/// Both defining inequalities are re-verified on the returned value.
pub fn median_discrete(f: &DiscreteFunction) -> Result<f64> {
    let total = f.total_mass();
    if !total.is_finite() {
        return Err(Error::domain(format!("median needs a finite total measure, got {total}")));
    }
    let half = 0.5 * total;
    let slack = 1e-12 * total;
    // Group equal values so ties accumulate their whole mass at once.
    let mut atoms: Vec<(f64, f64)> = f.values().iter().copied().zip(f.masses().iter().copied()).collect();
    atoms.sort_unstable_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut grouped: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, m) in atoms {
        match grouped.last_mut() {
            Some(last) if last.0 == v => last.1 += m,
            _ => grouped.push((v, m)),
        }
    }
    let mut cum = 0.0;
    let mut lower = grouped[0].0;
    for &(v, m) in &grouped {
        cum += m;
        if cum >= half - slack {
            lower = v;
            break;
        }
    }
    let mut cum = 0.0;
    let mut upper = grouped[grouped.len() - 1].0;
    for &(v, m) in grouped.iter().rev() {
        cum += m;
        if cum >= half - slack {
            upper = v;
            break;
        }
    }
    let c = 0.5 * (lower + upper);
    verify_median(
        c,
        half,
        total,
        f.values().iter().zip(f.masses()).filter(|(&v, _)| v <= c).map(|(_, &m)| m).sum(),
        f.values().iter().zip(f.masses()).filter(|(&v, _)| v >= c).map(|(_, &m)| m).sum(),
    )?;
    Ok(c)
}

/// Median of a nonnegative radial function with respect to the space's
/// volume measure, found by bisecting the exact superlevel measures.
pub fn median_radial(u: &RadialFunction) -> Result<f64> {
    if u.min_value() < 0.0 {
        return Err(Error::domain(format!(
            "median of radial functions is implemented for nonnegative data (min value {})",
            u.min_value()
        )));
    }
    let total = u.total_volume();
    if !total.is_finite() {
        return Err(Error::domain(format!("median needs a finite total measure, got {total}")));
    }
    let half = 0.5 * total;
    let max = u.max_value();
    let a_of = |v: f64| superlevel_measure(u, v);
    let c_of = |v: f64| -> Result<f64> {
        if v <= 0.0 {
            Ok(total)
        } else {
            closed_superlevel_measure(u, v)
        }
    };
    // Lower endpoint: inf { v : mu({u <= v}) >= half }  <=>  A(v) <= half.
    let lower = if a_of(0.0)? <= half {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = max;
        for _ in 0..200 {
            if hi - lo <= f64::EPSILON * max {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if a_of(mid)? <= half {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    // Upper endpoint: sup { v : mu({u >= v}) >= half }.
    let upper = if c_of(max)? >= half {
        max
    } else {
        let mut lo = 0.0;
        let mut hi = max;
        for _ in 0..200 {
            if hi - lo <= f64::EPSILON * max {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if c_of(mid)? >= half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let c = (0.5 * (lower + upper)).clamp(0.0, max);
    verify_median(c, half, total, total - a_of(c)?, c_of(c)?)?;
    Ok(c)
}

fn verify_median(c: f64, half: f64, total: f64, below: f64, above: f64) -> Result<()> {
    let slack = 1e-9 * total;
    if below < half - slack || above < half - slack {
        return Err(Error::domain(format!(
            "median witness failed at c = {c}: mu(u <= c) = {below}, mu(u >= c) = {above}, half mass = {half}"
        )));
    }
    Ok(())
}

/// Outcome of a median–average gap comparison
/// `|c - mean| <= (2/mu(X))^(1/p) * ||u - mean||_p`.
#[derive(Debug, Clone)]
pub struct MedianGapReport {
    pub median: f64,
    pub mean: f64,
    /// `|median - mean|`.
    pub lhs: f64,
    /// `(2/mu(X))^(1/p) * ||u - mean||_p`.
    pub rhs: f64,
    pub holds: bool,
    pub tol: f64,
}

fn gap_verdict(median: f64, mean: f64, total: f64, norm_pth: f64, p: f64) -> MedianGapReport {
    let lhs = (median - mean).abs();
    let rhs = (2.0 / total).powf(1.0 / p) * norm_pth.powf(1.0 / p);
    let tol = 1e-8 * lhs.abs().max(rhs.abs()) + 1e-12;
    MedianGapReport { median, mean, lhs, rhs, holds: lhs <= rhs + tol, tol }
}

/// Markov-type bound between the median and the mean for a discrete
/// function.
pub fn median_average_gap_check_discrete(f: &DiscreteFunction, p: f64) -> Result<MedianGapReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("median–average gap needs p >= 1, got {p}")));
    }
    let c = median_discrete(f)?;
    let mean = f.mean();
    let norm_pth: f64 = f
        .values()
        .iter()
        .zip(f.masses())
        .map(|(&v, &m)| m * (v - mean).abs().powf(p))
        .sum();
    Ok(gap_verdict(c, mean, f.total_mass(), norm_pth, p))
}

/// Markov-type bound between the median and the mean for a nonnegative
/// radial function.
pub fn median_average_gap_check_radial(u: &RadialFunction, p: f64) -> Result<MedianGapReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("median–average gap needs p >= 1, got {p}")));
    }
    let c = median_radial(u)?;
    let mean = u.mean()?;
    let norm_pth = u.integral_of(&|t| (t - mean).abs().powf(p), 1e-11)?;
    Ok(gap_verdict(c, mean, u.total_volume(), norm_pth, p))
}

/// Median split of a function plus the decreasing rearrangements of both
/// halves onto a common target space.
///
/// `u_plus`/`u_minus` are the exact rearrangements (plateaus and jumps
/// reproduced: the right objects for layer-cake integral identities), while
/// `u_plus_smooth`/`u_minus_smooth` are the continuous finite-energy
/// representatives entering gradient comparisons.
#[derive(Debug, Clone)]
pub struct MedianSplit {
    /// The median the split was taken at.
    pub c: f64,
    /// Half the source's total mass: the volume of the centered ball that
    /// supports both rearranged halves.
    pub omega_volume: f64,
    /// Exact rearrangement of `(u - c)_+`.
    pub u_plus: RadialFunction,
    /// Exact rearrangement of `(c - u)_+`.
    pub u_minus: RadialFunction,
    /// Smoothed rearrangement of `(u - c)_+`.
    pub u_plus_smooth: RadialFunction,
    /// Smoothed rearrangement of `(c - u)_+`.
    pub u_minus_smooth: RadialFunction,
}

/// Splits a discrete function at its median and rearranges the super- and
/// sub-median parts separately onto `target`.
pub fn double_rearrangement(
    f: &DiscreteFunction,
    target: Arc<RadialSpace>,
) -> Result<MedianSplit> {
    let total = f.total_mass();
    let half = 0.5 * total;
    if target.total_volume() < half * (1.0 - 1e-12) {
        return Err(Error::range(format!(
            "double rearrangement needs capacity for half the mass ({half}), target holds {}",
            target.total_volume()
        )));
    }
    let c = median_discrete(f)?;
    let plus = DiscreteFunction::new(
        f.values().iter().map(|&v| (v - c).max(0.0)).collect(),
        f.masses().to_vec(),
    )?;
    let minus = DiscreteFunction::new(
        f.values().iter().map(|&v| (c - v).max(0.0)).collect(),
        f.masses().to_vec(),
    )?;
    let dp = distribution_discrete(&plus)?;
    let dm = distribution_discrete(&minus)?;
    Ok(MedianSplit {
        c,
        omega_volume: half,
        u_plus: decreasing_rearrangement(&dp, target.clone(), RearrangementMode::Exact)?,
        u_minus: decreasing_rearrangement(&dm, target.clone(), RearrangementMode::Exact)?,
        u_plus_smooth: decreasing_rearrangement(&dp, target.clone(), RearrangementMode::Smoothed)?,
        u_minus_smooth: decreasing_rearrangement(&dm, target, RearrangementMode::Smoothed)?,
    })
}

/// Outcome of [`split_identity_check`]: the layer-cake integral
/// decomposition across the median and the split gradient bound.
#[derive(Debug, Clone)]
pub struct SplitIdentityReport {
    pub median: f64,
    /// `sum_i mu_i F(u_i - c)` over the source atoms.
    pub integral_lhs: f64,
    /// `int F(u_plus) + int F(-u_minus)` over the target space.
    pub integral_rhs: f64,
    pub integral_holds: bool,
    pub integral_tol: f64,
    /// Gradient p-energies of the smoothed rearranged halves, summed.
    pub energy_sum: f64,
    /// Discrete Cheeger p-energy of the source.
    pub energy_bound: f64,
    pub gradient_holds: bool,
    pub energy_tol: f64,
}

/// Verifies the two halves of the compact-case splitting argument on a
/// concrete graph function: the integral identity
/// `int F(u - c) dmu = int F(u_plus) dsigma + int F(-u_minus) dsigma`
/// (exact for step data) and the gradient comparison
/// `||grad u_plus||_p^p + ||grad u_minus||_p^p <= Ch_p(u)`.
///
/// `big_f` must vanish at 0 (the composed map is `F(. - c)` and atoms at the
/// median must drop out); otherwise the identity cannot close and the check
/// refuses to run.
pub fn split_identity_check(
    split: &MedianSplit,
    source: &DiscreteFunction,
    graph: &DiscreteMMS,
    big_f: &dyn Fn(f64) -> f64,
    p: f64,
) -> Result<SplitIdentityReport> {
    if source.masses() != graph.vertex_measures() {
        return Err(Error::input("source masses disagree with the graph's vertex measures"));
    }
    let f0 = big_f(0.0);
    if !(f0.abs() <= 1e-13 * (1.0 + big_f(1.0).abs())) {
        return Err(Error::Precondition(vec![format!(
            "F(0) = {f0} must vanish so that median atoms drop out of the identity"
        )]));
    }
    let c = split.c;
    let integral_lhs: f64 = source
        .values()
        .iter()
        .zip(source.masses())
        .map(|(&v, &m)| m * big_f(v - c))
        .sum();
    let plus_part = split.u_plus.integral_of(big_f, 1e-12)?;
    let reflected = |t: f64| big_f(-t);
    let minus_part = split.u_minus.integral_of(&reflected, 1e-12)?;
    let integral_rhs = plus_part + minus_part;
    let integral_tol = 1e-10 * integral_lhs.abs().max(integral_rhs.abs()) + 1e-14;
    let integral_holds = (integral_lhs - integral_rhs).abs() <= integral_tol;

    let energy_sum =
        split.u_plus_smooth.gradient_energy(p)? + split.u_minus_smooth.gradient_energy(p)?;
    let energy_bound = graph.ch_p(source.values(), p)?;
    let energy_tol = 1e-8 * energy_sum.abs().max(energy_bound.abs()) + 1e-12;
    let gradient_holds = energy_sum <= energy_bound + energy_tol;
    Ok(SplitIdentityReport {
        median: c,
        integral_lhs,
        integral_rhs,
        integral_holds,
        integral_tol,
        energy_sum,
        energy_bound,
        gradient_holds,
        energy_tol,
    })
}
