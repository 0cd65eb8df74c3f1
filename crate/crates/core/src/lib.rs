//! Counterexamples to sums-differences statements via the entropy
//! formulation.
//!
//! A configuration is a finite set `G ⊂ Q²` on which the difference map
//! `(a, b) ↦ a − b` is injective, together with slopes `r_1, …, r_n`. For a
//! probability measure `P` on `G` the entropy ratio
//! `α(P) = H(P) / max_j H(π_{r_j} P)` witnesses `¬SD(r_1, …, r_n; α)`,
//! and the multinomial blow-up turns it into an explicit set with the same
//! ratio in the limit.
//!
//! - [`config`]: exact points, slopes, projections and fibers.
//! - [`entropy`]: measures, push-forwards and entropy profiles.
//! - [`optimizer`]: maximin optimization of `α(P)` and equalization ansätze.
//! - [`blowup`]: rational approximation and exact multinomial counts.
//! - [`search`]: staircase family and grid enumeration.
//! - [`constructions`]: the four reference constructions.

pub mod blowup;
pub mod config;
pub mod constructions;
pub mod entropy;
pub mod error;
pub mod factorial;
pub mod numfmt;
pub mod optimizer;
pub mod search;

pub use blowup::{
    approximate_measure, blowup_counts, convergence_sweep, stirling_check, BlowupOptions,
    BlowupReport, RationalApprox,
};
pub use config::{
    cardinality_alpha, check_difference_injective, fibers, project, Configuration, FiberPartition,
    Point, Rational, Slope,
};
pub use entropy::{entropy, entropy_ratio, phi, psi, pushforward, EntropyProfile, Measure};
pub use error::{ConfigError, Error, Result};
pub use optimizer::{
    equalize_profile, maximize_alpha, solve_equalization_root, OptimizationResult,
    OptimizerOptions, SymmetryAnsatz,
};
pub use search::{
    canonical_form, enumerate_and_rank, extension_check, staircase, ExtensionCheck, RankedResult,
    SearchSpec,
};
