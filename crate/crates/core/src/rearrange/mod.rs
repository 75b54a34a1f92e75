//! Rearrangement machinery: distribution tables, decreasing rearrangement
//! onto radial spaces, coarea gradient norms, Pólya–Szegő comparisons, and
//! the median-split double rearrangement.
//!
//! The pipeline is: take a nonnegative function (piecewise-linear radial or
//! discrete), tabulate its superlevel measures and perimeters exactly
//! ([`DistributionTable`]), reconstruct the decreasing rearrangement on a
//! target space ([`decreasing_rearrangement`]), and compare gradient
//! energies across the rearrangement ([`polya_szego_check_radial`],
//! [`polya_szego_check_discrete`]).  Medians and the double rearrangement
//! ([`double_rearrangement`], [`split_identity_check`]) drive the
//! compact-case certificates.

mod distribution;
mod median;
mod rearrangement;

pub use distribution::{
    closed_superlevel_measure, coarea_gradient_norm, distribution_discrete,
    distribution_discrete_on_graph, distribution_radial, distribution_radial_at_levels,
    distribution_radial_refined, superlevel_measure, CoareaEnergy, DistributionTable,
};
pub use median::{
    double_rearrangement, median_average_gap_check_discrete, median_average_gap_check_radial,
    median_discrete, median_radial, split_identity_check, MedianGapReport, MedianSplit,
    SplitIdentityReport,
};
pub use rearrangement::{
    decreasing_rearrangement, polya_szego_check_discrete, polya_szego_check_radial,
    PsReport, RearrangementMode,
};
