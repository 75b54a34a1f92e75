//! Numerical laboratory for rearrangement machinery and Moser–Trudinger-type
//! inequalities.
//!
//! The crate is organised around a handful of concrete, testable objects:
//!
//! * [`modelgeom`] — constant-curvature model geometry: unit ball volumes,
//!   sphere areas, Bishop–Gromov monotonicity checks on sampled growth data,
//!   and small-radius density estimates.
//! * [`radial`] — radial model spaces `dr² + g(r)² dθ²` with tabulated warp,
//!   hyperbolic trumpets, isoperimetric profiles, and the ODE that synthesises
//!   a radial space back from a candidate profile.
//! * [`rearrange`] — distribution functions, decreasing rearrangement onto a
//!   radial target, coarea-based gradient norms, Pólya–Szegő comparisons,
//!   medians and the double rearrangement used in compactness arguments.
//! * [`functionals`] — truncated-exponential Moser–Trudinger functionals,
//!   sharp thresholds, trumpet scaling identities, and the quantitative
//!   gradient/envelope certificates used in concentration-compactness steps.
//! * [`discrete`] — finite metric-measure graphs: exact cut perimeters,
//!   brute-force isoperimetric profiles, Cheeger constants and p-spectral-gap
//!   estimates with the Cheeger inequality as a cross-check.
//! * [`probes`] — Moser-style logarithmic probes and bump sequences that
//!   witness blow-up above the sharp threshold, plus a bisection threshold
//!   estimator.
//!
//! Everything is deterministic: randomised sweeps take explicit seeds, and
//! parallel reductions are order-independent. The `parallel` feature (on by
//! default) routes the embarrassingly parallel inner loops through rayon;
//! disabling it leaves a pure sequential build with the same results.

pub mod error;
pub mod num;
pub mod par;

pub mod modelgeom;
pub mod radial;

// remaining modules land one by one; keep the build green meanwhile
pub mod functions;
pub mod discrete;
pub mod rearrange;
pub mod functionals;
pub mod probes;

pub use error::{Error, Result};
pub use par::Parallelism;
