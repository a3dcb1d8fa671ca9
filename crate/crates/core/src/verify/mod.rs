//! Sampled checks of the comparison and determination results for prox
//! maps, each producing a [`CheckReport`].
//!
//! A check never reports `verified` when a sampled residual exceeds its
//! tolerance, and one-directional results are only tested in their stated
//! direction: a failed hypothesis yields `hypothesis_fails`, and the
//! conclusion residual is reported without being judged.

mod checks;
mod report;

pub use checks::{
    check_comparison, check_equivalences, check_gradient_comparison, check_lipschitz, check_norm_lower_bound,
    check_support_distance, conjugate_infimum, default_tolerance, verify_all, BatteryConfig, EquivalenceReport,
    Infimum, ItemOutcome, LipschitzReport, SupportDistanceReport,
};
pub use report::{write_reports_csv, write_reports_json, CheckReport, Status, Tolerances, Witness, WitnessLog};

/// Tolerance for results computed entirely in closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
/// Tolerance when a numerical prox is involved.
pub const NUMERICAL_TOL: f64 = 1e-4;
/// Tolerance for anything routed through grid conjugation.
pub const GRID_TOL: f64 = 2e-3;
