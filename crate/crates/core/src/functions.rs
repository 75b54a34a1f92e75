//! Functions on radial model spaces and on plain finite measure spaces.
//!
//! A [`RadialFunction`] is piecewise linear in the radius with its own
//! breakpoint grid, independent of (but bounded by) the space's tabulation.
//! Repeating a breakpoint radius encodes a jump discontinuity, which is how
//! rearrangements of step functions are represented exactly; the function is
//! left-continuous at jumps.  Below its first breakpoint the function is
//! constant, and beyond its last breakpoint it continues with the last value.
//!
//! Gradient energies and integrals of composed functions are evaluated in
//! closed form on constant and linear pieces wherever possible, so the
//! rearrangement identities downstream hold to near machine precision.
//!
//! A [`DiscreteFunction`] is a plain finite measure-space function: values
//! with positive masses.  Graph structure, when needed, comes separately
//! from [`crate::discrete::DiscreteMMS`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::num::gauss;
use crate::radial::RadialSpace;

/// Piecewise-linear function of the radius on a [`RadialSpace`].
#[derive(Debug, Clone)]
pub struct RadialFunction {
    space: Arc<RadialSpace>,
    /// Nondecreasing breakpoint radii in (0, r_max]; an adjacent equal pair
    /// encodes a jump at that radius.
    radii: Vec<f64>,
    /// Value at each breakpoint; at a jump pair the first entry is the left
    /// limit and the second the right limit.
    values: Vec<f64>,
}

impl RadialFunction {
    /// Builds a function from its breakpoints.
    ///
    /// Radii must be nondecreasing, positive, and within the space; a radius
    /// may repeat at most once (a jump), and a jump must actually jump.
    pub fn new(space: Arc<RadialSpace>, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::input(format!(
                "breakpoint radii and values must be nonempty and equal length, got {} and {}",
                radii.len(),
                values.len()
            )));
        }
        ensure_finite(&radii, "breakpoint radii")?;
        ensure_finite(&values, "breakpoint values")?;
        let r_max = space.r_max();
        if !(radii[0] > 0.0) {
            return Err(Error::input(format!("first breakpoint {} must be positive", radii[0])));
        }
        for w in radii.windows(2) {
            if w[1] < w[0] {
                return Err(Error::input(format!(
                    "breakpoint radii must be nondecreasing, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        for w in radii.windows(3) {
            if w[0] == w[2] {
                return Err(Error::input(format!("radius {} repeats more than twice", w[0])));
            }
        }
        for (w, v) in radii.windows(2).zip(values.windows(2)) {
            if w[0] == w[1] && v[0] == v[1] {
                return Err(Error::input(format!(
                    "repeated radius {} must encode a jump, but both values are {}",
                    w[0], v[0]
                )));
            }
        }
        if *radii.last().unwrap() > r_max * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "last breakpoint {} beyond the space maximum {r_max}",
                radii.last().unwrap()
            )));
        }
        let radii = radii.into_iter().map(|r| r.min(r_max)).collect();
        Ok(Self { space, radii, values })
    }

    /// Function with breakpoints at the space's own grid nodes.
    pub fn on_nodes(space: Arc<RadialSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.radii().len() {
            return Err(Error::input(format!(
                "expected one value per space node ({}), got {}",
                space.radii().len(),
                values.len()
            )));
        }
        let radii = space.radii().to_vec();
        Self::new(space, radii, values)
    }

    /// Samples a scalar map at the space's grid nodes.
    pub fn from_fn(space: Arc<RadialSpace>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values: Vec<f64> = space.radii().iter().map(|&r| f(r)).collect();
        Self::on_nodes(space, values)
    }

    /// The underlying space.
    pub fn space(&self) -> &Arc<RadialSpace> {
        &self.space
    }

    /// Breakpoint radii.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Breakpoint values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest value attained.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value attained.
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Total volume of the carrying space.
    pub fn total_volume(&self) -> f64 {
        self.space.total_volume()
    }

    /// Whether the breakpoint values never increase with the radius.
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Whether the function has a jump discontinuity.
    pub fn has_jumps(&self) -> bool {
        self.radii.windows(2).any(|w| w[0] == w[1])
    }

    /// Radius of the support closure of {u != 0}: 0 for the zero function,
    /// r_max when the outer tail is nonzero.
    pub fn support_radius(&self) -> f64 {
        let last_nonzero = self.values.iter().rposition(|&v| v != 0.0);
        match last_nonzero {
            None => 0.0,
            Some(k) if k + 1 == self.values.len() => self.space.r_max(),
            // u ramps (or jumps) to zero right after breakpoint k and stays
            // zero; the closure of the support ends at the next breakpoint.
            Some(k) => self.radii[k + 1],
        }
    }

    /// Evaluates the function; left-continuous at jumps.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("radius must be nonnegative and finite, got {r}")));
        }
        if r > self.space.r_max() * (1.0 + 1e-12) {
            return Err(Error::range(format!(
                "radius {r} beyond the space maximum {}",
                self.space.r_max()
            )));
        }
        if r <= self.radii[0] {
            return Ok(self.values[0]);
        }
        if r >= *self.radii.last().unwrap() {
            return Ok(*self.values.last().unwrap());
        }
        let i = self.radii.partition_point(|&ri| ri < r);
        if self.radii[i] == r {
            return Ok(self.values[i]);
        }
        let (a, b) = (self.radii[i - 1], self.radii[i]);
        let t = (r - a) / (b - a);
        Ok(self.values[i - 1] + t * (self.values[i] - self.values[i - 1]))
    }

    /// Exact p-th power of the gradient L^p norm,
    /// `sum over linear pieces of |slope|^p ∫ X(ρ) dρ`.
    ///
    /// Returns +∞ when the function has a jump: the distributional gradient
    /// then has a singular part and u is not in W^{1,p}.
    pub fn gradient_energy(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("gradient energy needs p >= 1, got {p}")));
        }
        let mut total = 0.0;
        for i in 0..self.radii.len() - 1 {
            let (a, b) = (self.radii[i], self.radii[i + 1]);
            let dv = self.values[i + 1] - self.values[i];
            if a == b {
                if dv != 0.0 {
                    return Ok(f64::INFINITY);
                }
                continue;
            }
            if dv == 0.0 {
                continue;
            }
            let slope = dv / (b - a);
            total += slope.abs().powf(p) * self.space.power_integral(1.0, a, b)?;
        }
        Ok(total)
    }

    /// Integral of `F(u)` against the space measure, `∫ F(u(ρ)) X(ρ) dρ`
    /// over the whole space.
    ///
    /// Constant pieces (including both tails) contribute exactly; linear
    /// pieces are integrated adaptively to the given tolerance.
    pub fn integral_of(&self, f: &dyn Fn(f64) -> f64, tol: f64) -> Result<f64> {
        let r_max = self.space.r_max();
        let mut total = 0.0;
        // Inner tail [0, radii[0]] at the first value.
        total += f(self.values[0]) * self.space.volume(self.radii[0])?;
        for i in 0..self.radii.len() - 1 {
            let (a, b) = (self.radii[i], self.radii[i + 1]);
            if a == b {
                continue;
            }
            let (va, vb) = (self.values[i], self.values[i + 1]);
            if va == vb {
                total += f(va) * self.space.power_integral(1.0, a, b)?;
            } else {
                let slope = (vb - va) / (b - a);
                let space = &self.space;
                let integrand = |r: f64| -> f64 {
                    let u = va + slope * (r - a);
                    f(u) * space.boundary_area(r).unwrap_or(0.0)
                };
                total += gauss::adaptive(&integrand, a, b, tol);
            }
        }
        // Outer tail [last breakpoint, r_max] at the last value.
        let last = *self.radii.last().unwrap();
        if last < r_max {
            total += f(*self.values.last().unwrap()) * self.space.power_integral(1.0, last, r_max)?;
        }
        Ok(total)
    }

    /// `∫ |u|^p dμ` over the space.
    pub fn lp_norm_pth_power(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain(format!("L^p norm needs p > 0, got {p}")));
        }
        self.integral_of(&|u: f64| u.abs().powf(p), 1e-12)
    }

    /// `∫ u dμ` over the space.
    pub fn integral(&self) -> Result<f64> {
        self.integral_of(&|u| u, 1e-12)
    }

    /// Measure-weighted mean value.
    pub fn mean(&self) -> Result<f64> {
        Ok(self.integral()? / self.total_volume())
    }

    /// Decomposes the function into maximal pieces: the constant inner tail,
    /// each breakpoint segment (constant, ramp, or jump), and the constant
    /// outer tail.  Zero-width non-jump segments are dropped.
    pub(crate) fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::with_capacity(self.radii.len() + 2);
        out.push(Piece::Constant { a: 0.0, b: self.radii[0], v: self.values[0] });
        for i in 0..self.radii.len() - 1 {
            let (a, b) = (self.radii[i], self.radii[i + 1]);
            let (va, vb) = (self.values[i], self.values[i + 1]);
            if a == b {
                out.push(Piece::Jump { r: a, left: va, right: vb });
            } else if va == vb {
                out.push(Piece::Constant { a, b, v: va });
            } else {
                out.push(Piece::Ramp { a, b, va, vb });
            }
        }
        let last = *self.radii.last().unwrap();
        if last < self.space.r_max() {
            out.push(Piece::Constant { a: last, b: self.space.r_max(), v: *self.values.last().unwrap() });
        }
        out
    }
}

/// Maximal monotone piece of a [`RadialFunction`].
#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    /// Constant value `v` on `[a, b]`.
    Constant { a: f64, b: f64, v: f64 },
    /// Linear from `va` at `a` to `vb` at `b`, with `va != vb`.
    Ramp { a: f64, b: f64, va: f64, vb: f64 },
    /// Jump at radius `r` from the left value to the right value.
    Jump { r: f64, left: f64, right: f64 },
}

/// Function on a plain finite measure space: one value per atom, with
/// positive masses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DiscreteFunction {
    values: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteFunction {
    /// Builds a measure-space function; masses must be positive and finite.
    pub fn new(values: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != masses.len() {
            return Err(Error::input(format!(
                "values and masses must be nonempty and equal length, got {} and {}",
                values.len(),
                masses.len()
            )));
        }
        ensure_finite(&values, "values")?;
        for (i, &m) in masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::input(format!("mass {i} = {m} must be positive and finite")));
            }
        }
        Ok(Self { values, masses })
    }

    /// Uniform unit masses.
    pub fn with_unit_masses(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::new(values, vec![1.0; n])
    }

    /// Atom values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Atom masses.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Whether the function has no atoms (never true for a valid instance).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total mass of the space.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `∫ u dμ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.masses).map(|(&v, &m)| v * m).sum()
    }

    /// Mass-weighted mean value.
    pub fn mean(&self) -> f64 {
        self.integral() / self.total_mass()
    }

    /// `∫ |u|^p dμ`.
    pub fn lp_norm_pth_power(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::domain(format!("L^p norm needs p > 0, got {p}")));
        }
        Ok(self.values.iter().zip(&self.masses).map(|(&v, &m)| m * v.abs().powf(p)).sum())
    }

    /// `∫ F(u) dμ`, exact.
    pub fn integral_of(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        self.values.iter().zip(&self.masses).map(|(&v, &m)| m * f(v)).sum()
    }

    /// Largest value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value.
    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}
