//! Decreasing rearrangement onto a radial space and the Pólya–Szegő
//! comparison it feeds.
//!
//! The rearranged function is reconstructed from a [`DistributionTable`] as
//! a piecewise-linear radial function whose breakpoints sit at the exact
//! radii enclosing the tabulated superlevel volumes.  At every tabulated
//! level the open superlevel measure is reproduced exactly; between levels
//! the function is linear in the radius.

use std::sync::Arc;

use crate::discrete::DiscreteMMS;
use crate::error::{Error, Result};
use crate::functions::RadialFunction;
use crate::radial::{DominationReport, RadialSpace};
use crate::rearrange::distribution::{
    distribution_discrete_on_graph, distribution_radial, DistributionTable,
};

/// How plateaus and value gaps of the distribution are realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RearrangementMode {
    /// Reproduce the distribution faithfully: atoms become plateaus and
    /// value gaps become jump discontinuities (so indicator-like data keeps
    /// its infinite gradient energy).
    Exact,
    /// Continuous representative: atoms are spread linearly across their
    /// volume range and jumps are suppressed, giving a finite-energy
    /// function with the same superlevel volumes at the tabulated levels.
    /// For atomless data (all closures equal to the open measures) this
    /// coincides with [`RearrangementMode::Exact`].
    Smoothed,
}

/// Decreasing rearrangement of a tabulated distribution onto `target`.
///
/// Fails with [`Error::Range`] when the support does not fit into the
/// target's total volume.  The zero table rearranges to the zero function.
///
/// When the top tabulated level is attained only on a null set (both its
/// measure and closure vanish), a piecewise-linear function cannot have
/// `mu({u >= max}) = 0`; the representative caps at the top level over half
/// the first positive tabulated volume, which keeps every *open* superlevel
/// measure exact.
pub fn decreasing_rearrangement(
    d: &DistributionTable,
    target: Arc<RadialSpace>,
    mode: RearrangementMode,
) -> Result<RadialFunction> {
    let cap = target.total_volume();
    let support = d.support_measure();
    if support > cap * (1.0 + 1e-12) {
        return Err(Error::range(format!(
            "support volume {support} does not fit into the target's total volume {cap}"
        )));
    }
    let r_max = target.r_max();
    if d.is_empty() || !(support > 0.0) {
        return RadialFunction::new(target, vec![r_max], vec![0.0]);
    }
    let levels = d.levels();
    let measures = d.measures();
    let closures = d.closures();
    let k = levels.len();

    // First positive volume in the interleaved chain A_1 <= C_1 <= A_2 <= ...
    let next_positive = measures
        .iter()
        .zip(closures)
        .flat_map(|(&a, &c)| [a, c])
        .find(|&v| v > 0.0)
        .unwrap_or(support);

    // (volume, value) nodes, volumes nondecreasing, values nonincreasing.
    let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(2 * k + 2);
    let needs_anchor = match mode {
        RearrangementMode::Exact => measures[0] <= 0.0 && closures[0] <= 0.0,
        RearrangementMode::Smoothed => measures[0] <= 0.0,
    };
    if needs_anchor {
        nodes.push((next_positive / 2.0, levels[0]));
    }
    for j in 0..k {
        if measures[j] > 0.0 {
            nodes.push((measures[j], levels[j]));
        }
        if mode == RearrangementMode::Exact && closures[j] > measures[j] {
            nodes.push((closures[j], levels[j]));
        }
    }
    nodes.push((support, 0.0));

    // Map volumes to radii.  Inversion noise is snapped so that volumes the
    // table reports as equal (a zero-mass value gap) land on one radius and
    // become a jump, while even the thinnest genuine shell stays a ramp.
    let mut radii: Vec<f64> = Vec::with_capacity(nodes.len());
    let mut values: Vec<f64> = Vec::with_capacity(nodes.len());
    for (v, t) in nodes {
        let mut r = if v >= cap * (1.0 - 1e-12) {
            r_max
        } else {
            target.radius_at_volume(v)?.min(r_max)
        };
        if let Some(&last) = radii.last() {
            if r <= last * (1.0 + 1e-12) {
                r = last;
            }
        }
        match radii.last() {
            Some(&last) if r == last => {
                let n = radii.len();
                if t == values[n - 1] {
                    continue; // identical node
                }
                if mode == RearrangementMode::Smoothed {
                    continue; // never create a jump in the smoothed variant
                }
                if n >= 2 && radii[n - 2] == r {
                    // Third node at one radius: the middle level of a double
                    // jump is redundant; keep the outer pair.
                    values[n - 1] = t;
                    if values[n - 1] == values[n - 2] {
                        radii.pop();
                        values.pop();
                    }
                } else {
                    radii.push(r);
                    values.push(t);
                }
            }
            _ => {
                radii.push(r);
                values.push(t);
            }
        }
    }
    RadialFunction::new(target, radii, values)
}

/// Outcome of a Pólya–Szegő comparison.
#[derive(Debug, Clone)]
pub struct PsReport {
    /// Gradient p-energy of the rearranged function on the target space.
    pub lhs: f64,
    /// Gradient p-energy (or discrete Cheeger p-energy) of the source.
    pub rhs: f64,
    /// Whether `lhs <= rhs` up to `tol`.
    pub holds: bool,
    /// Comparison slack actually used.
    pub tol: f64,
}

fn ps_verdict(lhs: f64, rhs: f64) -> PsReport {
    if lhs.is_infinite() || rhs.is_infinite() {
        return PsReport { lhs, rhs, holds: lhs <= rhs, tol: 0.0 };
    }
    let tol = 1e-8 * lhs.abs().max(rhs.abs()) + 1e-12;
    PsReport { lhs, rhs, holds: lhs <= rhs + tol, tol }
}

fn ensure_dominated(domination: &DominationReport) -> Result<()> {
    if !domination.dominated {
        let mut reasons = Vec::new();
        if !domination.volume_covered {
            reasons.push(
                "the target space cannot hold half the source volume".to_string(),
            );
        }
        if domination.worst_gap < 0.0 {
            reasons.push(format!(
                "the source profile fails to dominate the target profile (worst gap {:.6e})",
                domination.worst_gap
            ));
        }
        if reasons.is_empty() {
            reasons.push("profile domination was not established".to_string());
        }
        return Err(Error::Precondition(reasons));
    }
    Ok(())
}

/// Pólya–Szegő check for a nonnegative radial source: the decreasing
/// rearrangement onto a dominated target must not increase the gradient
/// p-energy.
///
/// `domination` is the verdict of [`crate::radial::check_domination`] for
/// the source's isoperimetric data against the target space; the check
/// refuses to run when domination was not established.  The rearrangement
/// uses [`RearrangementMode::Exact`], whose gradient energy equals the
/// coarea integral of the tabulated distribution.
pub fn polya_szego_check_radial(
    u: &RadialFunction,
    target: Arc<RadialSpace>,
    p: f64,
    domination: &DominationReport,
) -> Result<PsReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("Pólya–Szegő comparison needs p > 1, got {p}")));
    }
    ensure_dominated(domination)?;
    let d = distribution_radial(u)?;
    let rearranged = decreasing_rearrangement(&d, target, RearrangementMode::Exact)?;
    let lhs = rearranged.gradient_energy(p)?;
    let rhs = u.gradient_energy(p)?;
    Ok(ps_verdict(lhs, rhs))
}

/// Pólya–Szegő check for a nonnegative function on a graph: the smoothed
/// decreasing rearrangement onto a dominated target must not increase the
/// energy, with the discrete side measured by the Cheeger p-energy.
pub fn polya_szego_check_discrete(
    graph: &DiscreteMMS,
    values: &[f64],
    target: Arc<RadialSpace>,
    p: f64,
    domination: &DominationReport,
) -> Result<PsReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("Pólya–Szegő comparison needs p > 1, got {p}")));
    }
    ensure_dominated(domination)?;
    let f = graph.function(values.to_vec())?;
    let d = distribution_discrete_on_graph(&f, graph)?;
    let rearranged = decreasing_rearrangement(&d, target, RearrangementMode::Smoothed)?;
    let lhs = rearranged.gradient_energy(p)?;
    let rhs = graph.ch_p(values, p)?;
    Ok(ps_verdict(lhs, rhs))
}
