//! Hub screening for high-dimensional correlation and partial correlation graphs.
//!
//! Given an n×p data matrix with n ≪ p, this crate screens for "hub"
//! variables: variables whose sample correlation (or pseudo-inverse partial
//! correlation) with at least δ other variables has magnitude ≥ ρ. Screening
//! works on unit-norm Z-score columns, so thresholding the correlation matrix
//! becomes a range search on the sphere S_{n-2} and the p×p matrix is never
//! materialized. Each discovery carries a per-degree threshold profile,
//! Poisson-rate λ-values and approximate p-values; closed-form phase
//! transition thresholds and expected-count predictions guide the choice of
//! (ρ, δ). A simulation harness validates the asymptotics by Monte Carlo.

pub mod error;
pub mod graph;
pub mod io;
pub mod sim;
pub mod special;
pub mod stats;
#[cfg(test)]
pub(crate) mod testutil;
pub mod waterfall;
pub mod zscore;

pub use error::{Error, Result};
pub use graph::{
    build_graph_exact, build_graph_range, count_stars, hub_discoveries, screen,
    threshold_profile, DiscoveryRecord, GraphEngine, Neighbor, ScreeningReport, ThresholdGraph,
};
pub use stats::{
    asymptotic_mean_limit, cap_probability, critical_threshold, discovery_pvalue, eta_diagnostic,
    expected_hub_count, fwer, pvalue_from_rate, sphere_constant, ExpectedCount, LogScaled,
    PhiConvention, ScreeningMode, ScreeningParams,
};
pub use waterfall::{build_waterfall, trajectory, Trajectory, WaterfallCurves};
pub use zscore::{
    build_basis, gram_spectrum, moore_penrose_residuals, standardize, u_scores, y_scores,
    DataMatrix, GramSpectrum, ScoreKind, ScoreMatrix,
};
