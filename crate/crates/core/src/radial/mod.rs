//! Radial warped spaces and isoperimetric profile machinery.
//!
//! A [`RadialSpace`] is an n-dimensional rotationally symmetric metric
//! `dr² + g(r)²·dθ²` described by its warp `g` on a finite grid, interpolated
//! *log-linearly* (each grid segment is an exact power law `g(ρ) ∝ ρ^γ`).
//! That choice makes every quantity the laboratory needs — ball volumes,
//! inverse volume maps, boundary areas, and the `∫ X(ρ)^q dρ` power integrals
//! behind rearranged gradient energies — a closed-form per-segment expression
//! with no quadrature error.
//!
//! On top of the spaces sit isoperimetric [`ProfileTable`]s, the ODE
//! synthesis of a space from a prescribed profile ([`synthesize_from_profile`]),
//! domination checks, asymptotic invariants (`l_∞^{(m)}`, Cheeger slope,
//! isoperimetric dimension), and the hyperbolic trumpet family `H^n_β`.

mod invariants;
mod profile;
mod space;
mod synthesis;

pub use invariants::{
    ball_volume_lower_bound, check_domination, iso_invariants, small_volume_bound_check,
    BallVolumeBound, DominationReport, IsoInvariants, RatioEstimate, SmallVolumeBound,
};
pub use profile::{radial_profile, ProfileTable};
pub use space::{trumpet_space, ConeAngleEstimate, RadialSpace, Trumpet};
pub use synthesis::{dominating_trumpet, synthesize_from_profile};
