//! Synthetic data generation and Monte Carlo validation of the screening
//! theory.
//!
//! Streams are counter-based: trial t of seed s draws from ChaCha12 stream t
//! seeded with s, so every matrix is reproducible independently of scheduling
//! order or thread count.

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{build_graph_exact, hub_discoveries};
use crate::stats::{
    critical_threshold, expected_hub_count, fwer, PhiConvention, ScreeningMode, ScreeningParams,
};
use crate::zscore::{gram_spectrum, u_scores_from_data, y_scores, DataMatrix, ScoreMatrix};

/// Covariance shape shared by the Gaussian and elliptical generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Identity,
    /// One k×k constant-correlation block, identity elsewhere.
    Block { k: usize, block_rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimModel {
    IdentityGaussian,
    BlockSparseGaussian { k: usize, block_rho: f64 },
    /// Multivariate-t style rows: Gaussian rows scaled by √(dof/χ²_dof).
    EllipticalT { dof: f64, shape: Shape },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub model: SimModel,
    pub trials: usize,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParams(format!(
                "simulation needs n >= 3, got {}",
                self.n
            )));
        }
        if self.p < 2 {
            return Err(Error::InvalidParams(format!(
                "simulation needs p >= 2, got {}",
                self.p
            )));
        }
        if self.trials < 1 {
            return Err(Error::InvalidParams("need at least one trial".into()));
        }
        let shape = match self.model {
            SimModel::IdentityGaussian => Shape::Identity,
            SimModel::BlockSparseGaussian { k, block_rho } => Shape::Block { k, block_rho },
            SimModel::EllipticalT { dof, shape } => {
                if !(dof > 2.0) {
                    return Err(Error::InvalidParams(format!(
                        "elliptical dof must exceed 2, got {dof}"
                    )));
                }
                shape
            }
        };
        if let Shape::Block { k, block_rho } = shape {
            if k < 2 || k >= self.p {
                return Err(Error::InvalidParams(format!(
                    "block size must satisfy 2 <= k < p, got k={k}, p={}",
                    self.p
                )));
            }
            if block_rho.abs() >= 1.0 {
                return Err(Error::InvalidParams(format!(
                    "|block_rho| must be below 1, got {block_rho}"
                )));
            }
            if 1.0 + (k as f64 - 1.0) * block_rho < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "block correlation {block_rho} is infeasible for k={k}"
                )));
            }
        }
        Ok(())
    }
}

/// Aggregated Monte Carlo outcome with the matching theoretical quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub rho: f64,
    pub delta: usize,
    pub mode: ScreeningMode,
    pub trials: usize,
    /// Fraction of trials with N_{δ,ρ} > 0.
    pub empirical_p_n_positive: f64,
    /// √(f(1−f)/trials) for the frequency above.
    pub standard_error: f64,
    pub empirical_mean_n: f64,
    /// Standard error of the mean count: sd(N)/√trials.
    pub mean_n_standard_error: f64,
    /// 1 − exp(−ξJ) — the rate used verbatim.
    pub theoretical_fwer_paper: f64,
    /// 1 − exp(−ξJ/φ(δ)).
    pub theoretical_fwer_poisson: f64,
    /// Binomial per-vertex tail model for E[N].
    pub theoretical_expected_count: f64,
    /// The Poisson surrogate ξ·J (linear, capped for serialization).
    pub xi_rate: f64,
}

/// One grid point of a phase-transition sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub rho: f64,
    pub empirical_mean_n: f64,
    pub predicted_expected_count: f64,
    pub predicted_xi: f64,
    /// True on the grid row closest to the critical threshold.
    pub nearest_critical: bool,
}

/// Deterministic data matrix for (spec.seed, trial).
pub fn generate(spec: &SimSpec, trial: usize) -> Result<DataMatrix> {
    spec.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial as u64);
    let (n, p) = (spec.n, spec.p);

    // fill row-major so the draw order is part of the format
    let mut values = DMatrix::<f64>::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            values[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }

    let shape = match spec.model {
        SimModel::IdentityGaussian => Shape::Identity,
        SimModel::BlockSparseGaussian { k, block_rho } => Shape::Block { k, block_rho },
        SimModel::EllipticalT { shape, .. } => shape,
    };
    if let Shape::Block { k, block_rho } = shape {
        // closed-form square root of (1−r)I + r·11ᵀ on the first k columns:
        // x = a·z + b·(Σz)·1 with a = √(1−r), b = (√(1+(k−1)r) − a)/k
        let a = (1.0 - block_rho).sqrt();
        let b = ((1.0 + (k as f64 - 1.0) * block_rho).sqrt() - a) / k as f64;
        for i in 0..n {
            let s: f64 = (0..k).map(|j| values[(i, j)]).sum();
            for j in 0..k {
                values[(i, j)] = a * values[(i, j)] + b * s;
            }
        }
    }
    if let SimModel::EllipticalT { dof, .. } = spec.model {
        let chi = ChiSquared::new(dof).map_err(|e| Error::InvalidParams(e.to_string()))?;
        for i in 0..n {
            let q: f64 = rng.sample(chi);
            let scale = (dof / q).sqrt();
            for j in 0..p {
                values[(i, j)] *= scale;
            }
        }
    }

    let labels = (0..p).map(|j| format!("v{:04}", j + 1)).collect();
    DataMatrix::new(values, labels)
}

fn scores_for_mode(x: &DataMatrix, mode: ScreeningMode) -> Result<ScoreMatrix> {
    let u = u_scores_from_data(x)?;
    match mode {
        ScreeningMode::Correlation => Ok(u),
        ScreeningMode::PartialCorrelation => {
            let spectrum = gram_spectrum(&u)?;
            y_scores(&u, &spectrum)
        }
    }
}

/// Per-trial discovery counts N_{δ,ρ} over the spec's trials.
fn trial_counts(spec: &SimSpec, rho: f64, delta: usize, mode: ScreeningMode) -> Result<Vec<usize>> {
    (0..spec.trials)
        .into_par_iter()
        .map(|trial| -> Result<usize> {
            let x = generate(spec, trial)?;
            let z = scores_for_mode(&x, mode)?;
            let graph = build_graph_exact(&z, rho);
            let (_, n_discoveries) = hub_discoveries(&graph, delta);
            Ok(n_discoveries)
        })
        .collect()
}

/// Screen `trials` independent matrices at (rho, delta) and aggregate the
/// discovery counts against both theoretical conventions.
pub fn run_monte_carlo(
    spec: &SimSpec,
    rho: f64,
    delta: usize,
    mode: ScreeningMode,
) -> Result<MonteCarloResult> {
    spec.validate()?;
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParams(format!(
            "monte carlo threshold must lie in (0, 1), got {rho}"
        )));
    }
    if delta < 1 {
        return Err(Error::InvalidParams("delta must be at least 1".into()));
    }

    let counts = trial_counts(spec, rho, delta, mode)?;
    let t = spec.trials as f64;
    let positives = counts.iter().filter(|&&c| c > 0).count() as f64;
    let freq = positives / t;
    let mean = counts.iter().sum::<usize>() as f64 / t;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / (t - 1.0).max(1.0);

    let params = ScreeningParams::new(spec.n, spec.p, delta, rho, mode);
    let expected = expected_hub_count(&params)?;
    let fwer_paper = fwer(&params.clone().with_convention(PhiConvention::PaperPvalue))?;
    let fwer_poisson = fwer(&params.clone().with_convention(PhiConvention::PoissonLimit))?;

    Ok(MonteCarloResult {
        rho,
        delta,
        mode,
        trials: spec.trials,
        empirical_p_n_positive: freq,
        standard_error: (freq * (1.0 - freq) / t).sqrt(),
        empirical_mean_n: mean,
        mean_n_standard_error: (var / t).sqrt(),
        theoretical_fwer_paper: fwer_paper,
        theoretical_fwer_poisson: fwer_poisson,
        theoretical_expected_count: expected.binomial,
        xi_rate: expected.poisson_surrogate.linear.min(1e300),
    })
}

/// Sweep a threshold grid, reporting the empirical mean count next to the
/// binomial prediction and the ξ·J surrogate; the row nearest the critical
/// threshold ρ_{c,δ} (default convention, J = 1) is flagged.
pub fn phase_sweep(
    spec: &SimSpec,
    delta: usize,
    rho_grid: &[f64],
    mode: ScreeningMode,
) -> Result<Vec<PhaseRow>> {
    spec.validate()?;
    if rho_grid.is_empty() {
        return Err(Error::InvalidParams("empty threshold grid".into()));
    }
    for &rho in rho_grid {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "grid thresholds must lie in (0, 1], got {rho}"
            )));
        }
    }
    let critical = critical_threshold(spec.p, spec.n, delta, 1.0, PhiConvention::default()).ok();
    let nearest = critical.map(|rc| {
        rho_grid
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - rc).abs().partial_cmp(&(*b - rc).abs()).unwrap()
            })
            .map(|(idx, _)| idx)
            .unwrap()
    });

    let mut rows = Vec::with_capacity(rho_grid.len());
    for (idx, &rho) in rho_grid.iter().enumerate() {
        let counts = trial_counts(spec, rho, delta, mode)?;
        let mean = counts.iter().sum::<usize>() as f64 / spec.trials as f64;
        let params = ScreeningParams::new(spec.n, spec.p, delta, rho, mode);
        let expected = expected_hub_count(&params)?;
        rows.push(PhaseRow {
            rho,
            empirical_mean_n: mean,
            predicted_expected_count: expected.binomial,
            predicted_xi: expected.poisson_surrogate.linear.min(1e300),
            nearest_critical: nearest == Some(idx),
        });
    }
    Ok(rows)
}
