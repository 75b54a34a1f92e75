//! Distribution functions of nonnegative functions and the coarea-based
//! gradient norm evaluated from a tabulated distribution.
//!
//! The table stores, per level `t_j` (strictly decreasing), the open and
//! closed superlevel measures `A(t_j) = mu({u > t_j})` and `mu({u >= t_j})`
//! together with the perimeters of both superlevel sets, plus the support
//! data `mu({u > 0})` and `Per({u > 0})`.  Carrying the closed measures makes
//! plateaus (atoms of the value distribution) explicit, so rearrangements
//! reproduce jumps exactly and the coarea integral can tell a plateau (which
//! costs no gradient) from a value gap (which costs infinitely much).
//!
//! All radial quantities are evaluated in closed form: level-set radii are
//! solved exactly on each linear piece, and set measures come from the
//! space's per-segment volume forms.

use serde::{Deserialize, Serialize};

use crate::discrete::DiscreteMMS;
use crate::error::{Error, Result};
use crate::functions::{DiscreteFunction, Piece, RadialFunction};

/// Tabulated distribution data of a nonnegative function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DistributionTable {
    /// Strictly decreasing positive levels `t_1 > t_2 > ...`.
    levels: Vec<f64>,
    /// Open superlevel measures `A(t_j) = mu({u > t_j})`, nondecreasing
    /// along the vector.
    measures: Vec<f64>,
    /// Closed superlevel measures `mu({u >= t_j})`.
    closures: Vec<f64>,
    /// Perimeters of the open superlevel sets `Per({u > t_j})`.
    level_perimeters: Vec<f64>,
    /// Perimeters of the closed superlevel sets `Per({u >= t_j})`.
    closure_perimeters: Vec<f64>,
    /// `mu({u > 0})`.
    support_measure: f64,
    /// `Per({u > 0})`.
    support_perimeter: f64,
    /// Total mass of the underlying space.
    total_mass: f64,
}

impl DistributionTable {
    /// Assembles and validates a table.  Tiny monotonicity violations (below
    /// `1e-12` of the total mass, from floating-point summation) are
    /// repaired; larger ones are rejected.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        levels: Vec<f64>,
        measures: Vec<f64>,
        closures: Vec<f64>,
        level_perimeters: Vec<f64>,
        closure_perimeters: Vec<f64>,
        support_measure: f64,
        support_perimeter: f64,
        total_mass: f64,
    ) -> Result<Self> {
        let k = levels.len();
        if measures.len() != k
            || closures.len() != k
            || level_perimeters.len() != k
            || closure_perimeters.len() != k
        {
            return Err(Error::input("distribution table arrays must share one length"));
        }
        if !(total_mass > 0.0) || !total_mass.is_finite() {
            return Err(Error::input(format!("total mass must be positive and finite, got {total_mass}")));
        }
        crate::error::ensure_finite(&levels, "levels")?;
        crate::error::ensure_finite(&measures, "measures")?;
        crate::error::ensure_finite(&closures, "closures")?;
        crate::error::ensure_finite(&level_perimeters, "level perimeters")?;
        crate::error::ensure_finite(&closure_perimeters, "closure perimeters")?;
        for w in levels.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::input(format!(
                    "levels must strictly decrease, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        if k > 0 && !(levels[k - 1] > 0.0) {
            return Err(Error::input(format!("levels must be positive, got {}", levels[k - 1])));
        }
        if level_perimeters.iter().chain(&closure_perimeters).any(|&l| l < 0.0)
            || support_perimeter < 0.0
        {
            return Err(Error::input("perimeters must be nonnegative"));
        }
        // The interleaved chain A_1 <= C_1 <= A_2 <= ... <= C_k <= support
        // must be nondecreasing up to summation noise.
        let slack = 1e-12 * total_mass;
        let mut measures = measures;
        let mut closures = closures;
        let mut support_measure = support_measure;
        let mut prev = 0.0f64;
        for j in 0..k {
            for x in [&mut measures[j], &mut closures[j]] {
                if *x < prev - slack {
                    return Err(Error::input(format!(
                        "superlevel measures must be nondecreasing down the levels, got {x} after {prev}"
                    )));
                }
                *x = x.max(prev);
                prev = *x;
            }
        }
        if support_measure < prev - slack {
            return Err(Error::input(format!(
                "support measure {support_measure} below the last closed measure {prev}"
            )));
        }
        support_measure = support_measure.max(prev);
        if support_measure > total_mass * (1.0 + 1e-12) {
            return Err(Error::input(format!(
                "support measure {support_measure} exceeds the total mass {total_mass}"
            )));
        }
        Ok(Self {
            levels,
            measures,
            closures,
            level_perimeters,
            closure_perimeters,
            support_measure: support_measure.min(total_mass),
            support_perimeter,
            total_mass,
        })
    }

    /// Levels `t_1 > t_2 > ...` (empty for the zero function).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `mu({u > t_j})` per level.
    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// `mu({u >= t_j})` per level.
    pub fn closures(&self) -> &[f64] {
        &self.closures
    }

    /// `Per({u > t_j})` per level.
    pub fn level_perimeters(&self) -> &[f64] {
        &self.level_perimeters
    }

    /// `Per({u >= t_j})` per level.
    pub fn closure_perimeters(&self) -> &[f64] {
        &self.closure_perimeters
    }

    /// `mu({u > 0})`.
    pub fn support_measure(&self) -> f64 {
        self.support_measure
    }

    /// `Per({u > 0})`.
    pub fn support_perimeter(&self) -> f64 {
        self.support_perimeter
    }

    /// Total mass of the underlying space.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Number of tabulated levels.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    /// Whether the table is empty (the function vanishes a.e. or has no
    /// positive levels).
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Exact superlevel statistics of a piecewise-linear radial function at one
/// level `t > 0`: open measure, closed measure, open perimeter, closed
/// perimeter.
fn superlevel_stats_at(u: &RadialFunction, t: f64) -> Result<(f64, f64, f64, f64)> {
    let space = u.space();
    let vol = |a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let vb = space.volume(b)?;
        let va = if a > 0.0 { space.volume(a)? } else { 0.0 };
        Ok((vb - va).max(0.0))
    };
    let mut open = 0.0;
    let mut closed = 0.0;
    // Signed boundary crossings: +1 where the superlevel set ends with
    // increasing radius, -1 where it begins.  A radius carrying both is a
    // density point of the set or its complement and is not essential
    // boundary.
    let mut open_crossings: Vec<(u64, i32)> = Vec::new();
    let mut closed_crossings: Vec<(u64, i32)> = Vec::new();
    for piece in u.pieces() {
        match piece {
            Piece::Constant { a, b, v } => {
                if v > t {
                    open += vol(a, b)?;
                }
                if v >= t {
                    closed += vol(a, b)?;
                }
            }
            Piece::Ramp { a, b, va, vb } => {
                // Hitting an endpoint value exactly must land bitwise on the
                // endpoint radius: crossing cancellation and rearrangement
                // node dedup both match radii exactly.
                let crossing = |lvl: f64| {
                    if lvl == va {
                        a
                    } else if lvl == vb {
                        b
                    } else {
                        a + (b - a) * (lvl - va) / (vb - va)
                    }
                };
                // Open superlevel {u > t}.
                match (va > t, vb > t) {
                    (true, true) => open += vol(a, b)?,
                    (false, false) => {}
                    (true, false) => {
                        let r = crossing(t).clamp(a, b);
                        open += vol(a, r)?;
                        open_crossings.push((r.to_bits(), 1));
                    }
                    (false, true) => {
                        let r = crossing(t).clamp(a, b);
                        open += vol(r, b)?;
                        open_crossings.push((r.to_bits(), -1));
                    }
                }
                // Closed superlevel {u >= t}.
                match (va >= t, vb >= t) {
                    (true, true) => closed += vol(a, b)?,
                    (false, false) => {}
                    (true, false) => {
                        let r = crossing(t).clamp(a, b);
                        closed += vol(a, r)?;
                        closed_crossings.push((r.to_bits(), 1));
                    }
                    (false, true) => {
                        let r = crossing(t).clamp(a, b);
                        closed += vol(r, b)?;
                        closed_crossings.push((r.to_bits(), -1));
                    }
                }
            }
            Piece::Jump { r, left, right } => {
                if (left > t) != (right > t) {
                    open_crossings.push((r.to_bits(), if left > t { 1 } else { -1 }));
                }
                if (left >= t) != (right >= t) {
                    closed_crossings.push((r.to_bits(), if left >= t { 1 } else { -1 }));
                }
            }
        }
    }
    let perimeter = |crossings: &mut Vec<(u64, i32)>| -> Result<f64> {
        // Cancel entering/leaving pairs at the same radius (touching level
        // sets have no essential boundary there), then sum boundary areas.
        crossings.sort_unstable();
        let mut total = 0.0;
        let mut i = 0;
        while i < crossings.len() {
            let r_bits = crossings[i].0;
            let mut net = 0i32;
            while i < crossings.len() && crossings[i].0 == r_bits {
                net += crossings[i].1;
                i += 1;
            }
            // Coinciding circles beyond the net crossing come in
            // entering/leaving pairs and are not essential boundary.
            if net != 0 {
                total += net.unsigned_abs() as f64 * space.boundary_area(f64::from_bits(r_bits))?;
            }
        }
        Ok(total)
    };
    let lo = perimeter(&mut open_crossings)?;
    let lc = perimeter(&mut closed_crossings)?;
    Ok((open, closed, lo, lc))
}

/// Exact measure of the open superlevel set `{u > t}` for `t >= 0`.
pub fn superlevel_measure(u: &RadialFunction, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("level must be nonnegative and finite, got {t}")));
    }
    Ok(superlevel_stats_at(u, t)?.0)
}

/// Exact measure of the closed superlevel set `{u >= t}` for `t > 0`.
pub fn closed_superlevel_measure(u: &RadialFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("level must be positive and finite, got {t}")));
    }
    Ok(superlevel_stats_at(u, t)?.1)
}

fn ensure_nonnegative_radial(u: &RadialFunction) -> Result<()> {
    if u.min_value() < 0.0 {
        return Err(Error::domain(format!(
            "distribution needs u >= 0 (min value {}); split the sign first",
            u.min_value()
        )));
    }
    Ok(())
}

/// Distribution table of a piecewise-linear radial function at the given
/// strictly decreasing positive levels.
pub fn distribution_radial_at_levels(u: &RadialFunction, levels: &[f64]) -> Result<DistributionTable> {
    ensure_nonnegative_radial(u)?;
    for w in levels.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::input(format!(
                "levels must strictly decrease, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if let Some(&last) = levels.last() {
        if !(last > 0.0) {
            return Err(Error::input(format!("levels must be positive, got {last}")));
        }
    }
    let k = levels.len();
    let mut measures = Vec::with_capacity(k);
    let mut closures = Vec::with_capacity(k);
    let mut level_perimeters = Vec::with_capacity(k);
    let mut closure_perimeters = Vec::with_capacity(k);
    for &t in levels {
        let (a, c, lo, lc) = superlevel_stats_at(u, t)?;
        measures.push(a);
        closures.push(c);
        level_perimeters.push(lo);
        closure_perimeters.push(lc);
    }
    let (support_measure, _, support_perimeter, _) = superlevel_stats_at(u, 0.0)?;
    DistributionTable::new(
        levels.to_vec(),
        measures,
        closures,
        level_perimeters,
        closure_perimeters,
        support_measure,
        support_perimeter,
        u.total_volume(),
    )
}

fn distinct_positive_levels_desc(values: &[f64]) -> Vec<f64> {
    let mut levels: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    levels.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    levels
}

/// Distribution table of a radial function, with levels at all of its
/// breakpoint values.  Exact: level-set radii are solved in closed form on
/// each linear piece.
pub fn distribution_radial(u: &RadialFunction) -> Result<DistributionTable> {
    distribution_radial_at_levels(u, &distinct_positive_levels_desc(u.values()))
}

/// Distribution table of a radial function with each value gap (and the gap
/// down to zero) subdivided into `kappa` uniform sublevels, for
/// quadrature-grade tables.
pub fn distribution_radial_refined(u: &RadialFunction, kappa: usize) -> Result<DistributionTable> {
    if kappa == 0 {
        return Err(Error::input("refinement factor must be at least 1"));
    }
    let base = distinct_positive_levels_desc(u.values());
    let mut levels: Vec<f64> = Vec::with_capacity(base.len() * kappa + kappa);
    for (i, &t) in base.iter().enumerate() {
        levels.push(t);
        let below = if i + 1 < base.len() { base[i + 1] } else { 0.0 };
        for s in 1..kappa {
            let lvl = t + (below - t) * s as f64 / kappa as f64;
            if lvl > below && lvl < t {
                levels.push(lvl);
            }
        }
    }
    // Rounding can collide sublevels of a near-degenerate gap; keep the
    // strictly decreasing subsequence.
    let mut strict = Vec::with_capacity(levels.len());
    for l in levels {
        if strict.last().map_or(true, |&prev| l < prev) {
            strict.push(l);
        }
    }
    distribution_radial_at_levels(u, &strict)
}

/// Distribution table of a measure-space function by mass summation over
/// atoms.  Without metric structure all perimeters are zero; use
/// [`distribution_discrete_on_graph`] when cut perimeters are needed.
pub fn distribution_discrete(f: &DiscreteFunction) -> Result<DistributionTable> {
    distribution_discrete_inner(f, None)
}

/// Distribution table of a function on a graph: measures by mass summation,
/// perimeters as cut weights of the superlevel sets.
///
/// The function's masses must coincide with the graph's vertex measures.
pub fn distribution_discrete_on_graph(
    f: &DiscreteFunction,
    graph: &DiscreteMMS,
) -> Result<DistributionTable> {
    if f.masses() != graph.vertex_measures() {
        return Err(Error::input(
            "function masses disagree with the graph's vertex measures",
        ));
    }
    distribution_discrete_inner(f, Some(graph))
}

fn distribution_discrete_inner(
    f: &DiscreteFunction,
    graph: Option<&DiscreteMMS>,
) -> Result<DistributionTable> {
    if f.min_value() < 0.0 {
        return Err(Error::domain(format!(
            "distribution needs u >= 0 (min value {}); split the sign first",
            f.min_value()
        )));
    }
    let levels = distinct_positive_levels_desc(f.values());
    let mass_where = |pred: &dyn Fn(f64) -> bool| -> f64 {
        f.values()
            .iter()
            .zip(f.masses())
            .filter(|(&v, _)| pred(v))
            .map(|(_, &m)| m)
            .sum()
    };
    let cut_where = |pred: &dyn Fn(f64) -> bool| -> Result<f64> {
        match graph {
            None => Ok(0.0),
            Some(g) => {
                let subset: Vec<usize> = f
                    .values()
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| pred(v))
                    .map(|(i, _)| i)
                    .collect();
                g.perimeter(&subset)
            }
        }
    };
    let mut measures = Vec::with_capacity(levels.len());
    let mut closures = Vec::with_capacity(levels.len());
    let mut level_perimeters = Vec::with_capacity(levels.len());
    let mut closure_perimeters = Vec::with_capacity(levels.len());
    for &t in &levels {
        measures.push(mass_where(&|v| v > t));
        closures.push(mass_where(&|v| v >= t));
        level_perimeters.push(cut_where(&|v| v > t)?);
        closure_perimeters.push(cut_where(&|v| v >= t)?);
    }
    DistributionTable::new(
        levels,
        measures,
        closures,
        level_perimeters,
        closure_perimeters,
        mass_where(&|v| v > 0.0),
        cut_where(&|v| v > 0.0)?,
        f.total_mass(),
    )
}

/// Result of [`coarea_gradient_norm`].
#[derive(Debug, Clone)]
pub struct CoareaEnergy {
    /// The p-energy `∫ (-A'(s))^{1-p} ℓ(s)^p ds`; +∞ when a flat band was
    /// found.
    pub value: f64,
    /// Whether any flat band contributed +∞.
    pub is_infinite: bool,
    /// Level bands `(lower, upper)` where `A' = 0` but the level sets keep
    /// positive perimeter (value gaps: the function is not in W^{1,p}).
    pub flat_bands: Vec<(f64, f64)>,
}

/// Evaluates the coarea form of the rearranged p-energy from a distribution
/// table: `∫ (-A'(s))^{1-p} ℓ(s)^p ds` with `A` piecewise linear between
/// levels and `ℓ` interpolated linearly on each band (integrated in closed
/// form).
///
/// A band of levels with no mass (`A' = 0`) but positive perimeter is a
/// value gap — the rearranged function jumps — and contributes +∞, reported
/// in [`CoareaEnergy::flat_bands`].  Plateaus of the function (atoms of the
/// value distribution, visible as `closures > measures`) sit *at* single
/// levels, carry no level-measure, and correctly contribute nothing.
pub fn coarea_gradient_norm(d: &DistributionTable, p: f64) -> Result<CoareaEnergy> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("coarea energy needs p > 1, got {p}")));
    }
    let mut value = 0.0;
    let mut flat_bands = Vec::new();
    let k = d.levels.len();
    if k == 0 {
        return Ok(CoareaEnergy { value: 0.0, is_infinite: false, flat_bands });
    }
    // Mean of the p-th power of a linear interpolant over one band.
    let pl_pow_mean = |x: f64, y: f64| -> f64 {
        if x == y {
            x.powf(p)
        } else {
            (y.powf(p + 1.0) - x.powf(p + 1.0)) / ((p + 1.0) * (y - x))
        }
    };
    // Bands: (t_{j+1}, t_j) for j = 0..k-1, then the bottom band (0, t_k).
    for j in 0..k {
        let upper = d.levels[j];
        let upper_mass = d.closures[j];
        let upper_perim = d.closure_perimeters[j];
        let (lower, lower_mass, lower_perim) = if j + 1 < k {
            (d.levels[j + 1], d.measures[j + 1], d.level_perimeters[j + 1])
        } else {
            (0.0, d.support_measure, d.support_perimeter)
        };
        let dt = upper - lower;
        let band_mass = (lower_mass - upper_mass).max(0.0);
        if band_mass == 0.0 {
            if lower_perim.max(upper_perim) > 0.0 {
                flat_bands.push((lower, upper));
            }
            continue;
        }
        let slope = band_mass / dt; // -A' on the band
        value += dt * pl_pow_mean(lower_perim, upper_perim) * slope.powf(1.0 - p);
    }
    let is_infinite = !flat_bands.is_empty();
    Ok(CoareaEnergy { value: if is_infinite { f64::INFINITY } else { value }, is_infinite, flat_bands })
}
