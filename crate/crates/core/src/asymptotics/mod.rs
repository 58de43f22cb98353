//! Heat kernels of cones, their candidate decay exponents, and numerical
//! rationality tests of those exponents.

mod bessel;
mod heat;
mod ladder;
mod rational;

pub use bessel::{bessel_i, BESSEL_MAX_ARG};
pub use heat::{heat_kernel, quarter_plane_reflection, ConeSpectrum, HeatKernelValue};
pub use ladder::{
    arc_exponent, bessel_order, excursion_exponent, exponent_ladder, ladder_candidates, rationality_scan,
    ExponentLadder, LadderEntry, ScanEntry, ScanOptions, ScanRecord, LADDER_DEDUP,
};
pub use rational::{best_rational, rationality_check, Rational, RationalityVerdict, Verdict};
