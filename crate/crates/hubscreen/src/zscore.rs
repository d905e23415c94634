//! Z-score representations: the standardized T matrix, U-scores on S_{n−2},
//! and the pseudo-inverse partial correlation Y-scores.
//!
//! Everything is factored through the (n−1)×(n−1) Gram matrix U·Uᵀ so the
//! p×p correlation matrix is never formed at scale.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative eigenvalue cutoff for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Guard against division by a vanishing column norm in the Y-score
/// normalization.
const DIAGONAL_GUARD: f64 = 1e-14;

/// Raw n×p observation matrix, samples as rows.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    labels: Vec<String>,
}

impl DataMatrix {
    /// Requires n ≥ 3, p ≥ 2, one label per column and finite entries.
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let (n, p) = values.shape();
        if n < 3 {
            return Err(Error::InvalidParams(format!(
                "need at least 3 samples, got {n}"
            )));
        }
        if p < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 variables, got {p}"
            )));
        }
        if labels.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {p} columns",
                labels.len()
            )));
        }
        for j in 0..p {
            for i in 0..n {
                if !values[(i, j)].is_finite() {
                    return Err(Error::NonFiniteValue {
                        label: labels[j].clone(),
                        row: i + 1,
                    });
                }
            }
        }
        Ok(DataMatrix { values, labels })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Flip the sign of one column in place (used by symmetry tests).
    pub fn negate_column(&mut self, j: usize) {
        for i in 0..self.values.nrows() {
            self.values[(i, j)] = -self.values[(i, j)];
        }
    }
}

/// Which sphere the score columns live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    /// U-scores: UᵀU is the sample correlation matrix.
    UScore,
    /// Y-scores: YᵀY is the pseudo-inverse partial correlation matrix.
    YScore,
}

/// (n−1)×p matrix of unit-norm score columns.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    scores: DMatrix<f64>,
    kind: ScoreKind,
    n: usize,
    labels: Vec<String>,
}

impl ScoreMatrix {
    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    /// Original sample count of the data the scores came from.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.scores.ncols()
    }

    /// Score-space dimension n − 1.
    pub fn dim(&self) -> usize {
        self.scores.nrows()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    /// Contiguous slice of one score column.
    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.scores.nrows();
        &self.scores.as_slice()[j * m..(j + 1) * m]
    }

    /// ZᵀZ materialized; for test-scale p only.
    pub fn inner_product_matrix(&self) -> DMatrix<f64> {
        self.scores.transpose() * &self.scores
    }
}

/// Standardize X into the T matrix of Z-scores:
/// T = (n−1)^{−1/2} (I − n^{−1}·1·1ᵀ) X D_S^{−1/2}.
///
/// Every T column has zero mean and unit norm, and TᵀT is the sample
/// correlation matrix.
pub fn standardize(x: &DataMatrix) -> Result<DMatrix<f64>> {
    let (n, p) = x.values().shape();
    let mut t = DMatrix::<f64>::zeros(n, p);
    let mut degenerate: Vec<String> = Vec::new();
    for j in 0..p {
        let col = x.values().column(j);
        let mean = col.sum() / n as f64;
        let mut sumsq = 0.0;
        let mut max_dev: f64 = 0.0;
        for i in 0..n {
            let c = col[i] - mean;
            sumsq += c * c;
            max_dev = max_dev.max(c.abs());
        }
        // a column is constant when its centered entries are pure rounding
        // noise relative to its scale
        if max_dev <= 1e-12 * mean.abs().max(1.0) || sumsq == 0.0 {
            degenerate.push(x.labels()[j].clone());
            continue;
        }
        // (n−1)^{−1/2} / s_j = 1/‖centered‖
        let inv_norm = 1.0 / sumsq.sqrt();
        for i in 0..n {
            t[(i, j)] = (col[i] - mean) * inv_norm;
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::ZeroVarianceColumn(degenerate));
    }
    Ok(t)
}

/// Deterministic orthonormal basis H_{2:n} of the orthocomplement of the
/// all-ones vector, as an n×(n−1) matrix.
///
/// Built from the Householder reflection mapping e₁ to 1/√n; every column's
/// first nonzero entry is made positive so the construction is a fixed
/// convention rather than an accident of the arithmetic.
pub fn build_basis(n: usize) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::DomainError(format!(
            "basis requires n >= 2, got {n}"
        )));
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    // v = normalize(e1 - u) with u = 1/sqrt(n) * ones
    let mut v = DVector::<f64>::from_element(n, -inv_sqrt_n);
    v[0] += 1.0;
    let v_norm = v.norm();
    v /= v_norm;
    // columns 2..n of Q = I - 2vvᵀ
    let mut h = DMatrix::<f64>::zeros(n, n - 1);
    for j in 0..n - 1 {
        let coef = 2.0 * v[j + 1];
        for i in 0..n {
            h[(i, j)] = -coef * v[i];
        }
        h[(j + 1, j)] += 1.0;
    }
    // first-nonzero-positive sign convention
    for j in 0..n - 1 {
        if let Some(i) = (0..n).find(|&i| h[(i, j)] != 0.0) {
            if h[(i, j)] < 0.0 {
                for k in 0..n {
                    h[(k, j)] = -h[(k, j)];
                }
            }
        }
    }
    Ok(h)
}

/// Project the T matrix onto S_{n−2}: U = H_{2:n}ᵀ T, so that UᵀU equals the
/// sample correlation matrix.
pub fn u_scores(t: &DMatrix<f64>, labels: &[String]) -> Result<ScoreMatrix> {
    let (n, p) = t.shape();
    if labels.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {p} columns",
            labels.len()
        )));
    }
    let h = build_basis(n)?;
    let scores = h.transpose() * t;
    Ok(ScoreMatrix {
        scores,
        kind: ScoreKind::UScore,
        n,
        labels: labels.to_vec(),
    })
}

/// Convenience path from raw data to U-scores.
pub fn u_scores_from_data(x: &DataMatrix) -> Result<ScoreMatrix> {
    let t = standardize(x)?;
    u_scores(&t, x.labels())
}

/// Eigendecomposition of the (n−1)×(n−1) Gram matrix U·Uᵀ.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    /// Eigenvalues in descending order; they sum to p.
    pub eigenvalues: DVector<f64>,
    /// Matching orthonormal eigenvectors as columns.
    pub eigenvectors: DMatrix<f64>,
    /// Relative cutoff used for the rank decision.
    pub rank_tolerance: f64,
}

impl GramSpectrum {
    /// Number of eigenvalues above `rank_tolerance × max eigenvalue`.
    pub fn rank(&self) -> usize {
        let max = self.eigenvalues[0].max(0.0);
        self.eigenvalues
            .iter()
            .filter(|&&ev| ev > self.rank_tolerance * max)
            .count()
    }

    /// Rebuild U·Uᵀ from the factors (test-scale check).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = {
            let mut m = self.eigenvectors.clone();
            for (j, mut col) in m.column_iter_mut().enumerate() {
                col *= self.eigenvalues[j];
            }
            m
        };
        scaled * self.eigenvectors.transpose()
    }
}

/// Eigendecompose U·Uᵀ with the default rank tolerance, failing when the
/// Gram matrix is rank deficient (then Y-scores are undefined).
pub fn gram_spectrum(u: &ScoreMatrix) -> Result<GramSpectrum> {
    gram_spectrum_with_tolerance(u, RANK_TOLERANCE)
}

pub fn gram_spectrum_with_tolerance(u: &ScoreMatrix, tol: f64) -> Result<GramSpectrum> {
    if u.kind() != ScoreKind::UScore {
        return Err(Error::InvalidParams(
            "gram spectrum is defined for U-scores".into(),
        ));
    }
    let m = u.dim();
    if u.p() < m {
        return Err(Error::RankDeficientGram(format!(
            "rank(U Uᵀ) <= p = {} < n - 1 = {m}",
            u.p()
        )));
    }
    let gram = u.scores() * u.scores().transpose();
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues = DVector::from_iterator(m, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    let spectrum = GramSpectrum {
        eigenvalues,
        eigenvectors,
        rank_tolerance: tol,
    };
    if spectrum.rank() < m {
        return Err(Error::RankDeficientGram(format!(
            "{} of {m} Gram eigenvalues above tolerance {tol:.1e}",
            spectrum.rank()
        )));
    }
    Ok(spectrum)
}

/// Partial correlation Y-scores: Y = [U Uᵀ]^{−1} U D^{−1/2} with
/// D = diag of squared column norms of [U Uᵀ]^{−1} U, computed through the
/// Gram spectrum so no p×p matrix is ever formed. YᵀY is the pseudo-inverse
/// partial correlation matrix.
pub fn y_scores(u: &ScoreMatrix, spectrum: &GramSpectrum) -> Result<ScoreMatrix> {
    let m = u.dim();
    if spectrum.rank() < m {
        return Err(Error::RankDeficientGram(format!(
            "rank {} < n - 1 = {m}",
            spectrum.rank()
        )));
    }
    // W = V diag(1/λ) Vᵀ U
    let mut projected = spectrum.eigenvectors.transpose() * u.scores();
    for i in 0..m {
        let inv = 1.0 / spectrum.eigenvalues[i];
        for j in 0..projected.ncols() {
            projected[(i, j)] *= inv;
        }
    }
    let mut w = &spectrum.eigenvectors * projected;
    for (j, mut col) in w.column_iter_mut().enumerate() {
        let d = col.norm_squared();
        if d < DIAGONAL_GUARD {
            return Err(Error::RankDeficientGram(format!(
                "vanishing partial-correlation norm for column {:?}",
                u.labels()[j]
            )));
        }
        col /= d.sqrt();
    }
    Ok(ScoreMatrix {
        scores: w,
        kind: ScoreKind::YScore,
        n: u.n(),
        labels: u.labels().to_vec(),
    })
}

/// Moore–Penrose condition residuals for a candidate pseudo-inverse Q of R:
/// (asymmetry of QR, asymmetry of RQ, ‖RQR − R‖_max, ‖QRQ − Q‖_max).
/// All four below 1e−8 certify Q = R†.
pub fn moore_penrose_residuals(r: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<[f64; 4]> {
    if !r.is_square() || r.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrices of equal size, got {:?} and {:?}",
            r.shape(),
            q.shape()
        )));
    }
    let qr = q * r;
    let rq = r * q;
    let asym = |m: &DMatrix<f64>| {
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    };
    let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let rqr_minus_r = &rq * r - r;
    let qrq_minus_q = &qr * q - q;
    Ok([
        asym(&qr),
        asym(&rq),
        max_abs(&rqr_minus_r),
        max_abs(&qrq_minus_q),
    ])
}
