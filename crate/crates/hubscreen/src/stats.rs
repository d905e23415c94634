//! Closed-form screening statistics: spherical cap probability, phase
//! transition thresholds, Poisson rates, expected counts, p-values and FWER.
//!
//! Everything multiplicative lives in log space so that p up to 10^6 cannot
//! overflow; linear values past exp(700) are reported as +inf.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_binomial, ln_gamma, reg_inc_beta};

/// Threshold past which `exp(ln)` is reported as +inf.
const LN_OVERFLOW: f64 = 700.0;

/// Correlation-type screened by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningMode {
    Correlation,
    PartialCorrelation,
}

impl std::fmt::Display for ScreeningMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScreeningMode::Correlation => write!(f, "correlation"),
            ScreeningMode::PartialCorrelation => write!(f, "partial_correlation"),
        }
    }
}

/// Where the φ(δ) divisor enters the Poisson rate.
///
/// `PaperPvalue` uses the rate λ = ξ·J directly. `PoissonLimit` divides the
/// rate by φ(δ) (2 for δ = 1, 1 otherwise), which accounts for the fact that
/// at δ = 1 every edge is counted from both endpoints. The Poisson-limit
/// convention is the default: it is the one confirmed by Monte Carlo and the
/// one under which the critical threshold for n=266, p=24481 lands at 0.296.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiConvention {
    PaperPvalue,
    PoissonLimit,
}

impl Default for PhiConvention {
    fn default() -> Self {
        PhiConvention::PoissonLimit
    }
}

/// φ(δ): 2 for δ = 1, 1 for δ > 1.
pub fn phi(delta: usize) -> f64 {
    if delta == 1 {
        2.0
    } else {
        1.0
    }
}

/// The divisor actually applied to rates under `convention`.
pub fn phi_divisor(convention: PhiConvention, delta: usize) -> f64 {
    match convention {
        PhiConvention::PaperPvalue => 1.0,
        PhiConvention::PoissonLimit => phi(delta),
    }
}

/// Parameter bundle driving all statistical formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningParams {
    /// Sample count of the underlying data matrix.
    pub n: usize,
    /// Variable count.
    pub p: usize,
    /// Degree threshold δ ≥ 1.
    pub delta: usize,
    /// Correlation threshold in [0, 1].
    pub rho: f64,
    /// Dependency constant J (1 under the sparse null).
    #[serde(default = "default_j")]
    pub j_factor: f64,
    pub mode: ScreeningMode,
    #[serde(default)]
    pub phi_convention: PhiConvention,
}

fn default_j() -> f64 {
    1.0
}

impl ScreeningParams {
    pub fn new(n: usize, p: usize, delta: usize, rho: f64, mode: ScreeningMode) -> Self {
        ScreeningParams {
            n,
            p,
            delta,
            rho,
            j_factor: 1.0,
            mode,
            phi_convention: PhiConvention::default(),
        }
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j_factor = j;
        self
    }

    pub fn with_convention(mut self, convention: PhiConvention) -> Self {
        self.phi_convention = convention;
        self
    }

    pub fn with_delta(mut self, delta: usize) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n <= 2 {
            return Err(Error::InvalidParams(format!(
                "n must exceed 2, got {}",
                self.n
            )));
        }
        if self.p < 2 {
            return Err(Error::InvalidParams(format!(
                "p must be at least 2, got {}",
                self.p
            )));
        }
        if self.delta < 1 {
            return Err(Error::InvalidParams("delta must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParams(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if !(self.j_factor > 0.0) {
            return Err(Error::InvalidParams(format!(
                "J must be positive, got {}",
                self.j_factor
            )));
        }
        Ok(())
    }
}

/// A quantity carried in log space with its (possibly overflowed) linear value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaled {
    pub ln: f64,
    pub linear: f64,
}

impl LogScaled {
    pub fn from_ln(ln: f64) -> Self {
        let linear = if ln > LN_OVERFLOW {
            f64::INFINITY
        } else {
            ln.exp()
        };
        LogScaled { ln, linear }
    }

    pub fn zero() -> Self {
        LogScaled {
            ln: f64::NEG_INFINITY,
            linear: 0.0,
        }
    }
}

/// Normalization constant a_n = 2Γ((n−1)/2) / (√π Γ((n−2)/2)).
///
/// This is the constant that makes the spherical cap probability a true
/// probability, i.e. `cap_probability(0, n) = 1`.
pub fn sphere_constant(n: usize) -> Result<f64> {
    if n <= 2 {
        return Err(Error::DomainError(format!(
            "sphere constant requires n > 2, got {n}"
        )));
    }
    let nf = n as f64;
    let ln = std::f64::consts::LN_2 + ln_gamma((nf - 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma((nf - 2.0) / 2.0);
    Ok(ln.exp())
}

/// Spherical cap probability P0(ρ, n): the probability that a uniform point
/// on S_{n−2} lands within angle arccos(ρ) of a fixed axis or its antipode.
///
/// P0 = a_n ∫_ρ^1 (1−u²)^{(n−4)/2} du = I_{1−ρ²}((n−2)/2, 1/2).
pub fn cap_probability(rho: f64, n: usize) -> Result<f64> {
    if n <= 2 {
        return Err(Error::DomainError(format!(
            "cap probability requires n > 2, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::DomainError(format!(
            "cap probability requires rho in [0, 1], got {rho}"
        )));
    }
    if rho == 0.0 {
        return Ok(1.0);
    }
    if rho == 1.0 {
        return Ok(0.0);
    }
    reg_inc_beta((n as f64 - 2.0) / 2.0, 0.5, 1.0 - rho * rho)
}

/// Critical phase-transition threshold ρ_{c,δ}.
///
/// ρ_{c,δ} = √(1 − (c(p−1))^{−2δ/(δ(n−2)−2)}) with c = a_n·δ·J, divided by
/// φ(δ) under the Poisson-limit convention.
pub fn critical_threshold(
    p: usize,
    n: usize,
    delta: usize,
    j: f64,
    convention: PhiConvention,
) -> Result<f64> {
    if delta < 1 {
        return Err(Error::DomainError("delta must be at least 1".into()));
    }
    let denom = delta as f64 * (n as f64 - 2.0) - 2.0;
    if denom <= 0.0 {
        return Err(Error::DomainError(format!(
            "critical threshold requires delta(n-2) - 2 > 0, got delta={delta}, n={n}"
        )));
    }
    if p < 2 {
        return Err(Error::DomainError(format!(
            "critical threshold requires p >= 2, got {p}"
        )));
    }
    if !(j > 0.0) {
        return Err(Error::DomainError(format!("J must be positive, got {j}")));
    }
    let c = sphere_constant(n)? * delta as f64 * j / phi_divisor(convention, delta);
    let base = c * (p as f64 - 1.0);
    if base <= 1.0 {
        return Err(Error::DegenerateThreshold(format!(
            "c(p-1) = {base} <= 1: no phase transition inside (0, 1)"
        )));
    }
    let inner = base.powf(-2.0 * delta as f64 / denom);
    Ok((1.0 - inner).sqrt())
}

/// Poisson rate factor ξ_{p,n,δ,ρ} = p·C(p−1, δ)·P0^δ, in log space.
pub fn xi_rate(params: &ScreeningParams) -> Result<LogScaled> {
    params.validate()?;
    xi_rate_at(params, params.rho)
}

/// ξ evaluated at an explicit threshold, reusing the remaining parameters.
pub fn xi_rate_at(params: &ScreeningParams, rho: f64) -> Result<LogScaled> {
    let p0 = cap_probability(rho, params.n)?;
    if p0 == 0.0 {
        return Ok(LogScaled::zero());
    }
    let ln_choose = ln_binomial(params.p as u64 - 1, params.delta as u64);
    if ln_choose == f64::NEG_INFINITY {
        return Ok(LogScaled::zero());
    }
    let ln = (params.p as f64).ln() + ln_choose + params.delta as f64 * p0.ln();
    Ok(LogScaled::from_ln(ln))
}

/// Asymptotic regime diagnostic η_{p,δ} = p^{1/δ}·(p−1)·P0.
pub fn eta_diagnostic(params: &ScreeningParams) -> Result<f64> {
    params.validate()?;
    let p0 = cap_probability(params.rho, params.n)?;
    if p0 == 0.0 {
        return Ok(0.0);
    }
    let pf = params.p as f64;
    let ln = pf.ln() / params.delta as f64 + (pf - 1.0).ln() + p0.ln();
    Ok(LogScaled::from_ln(ln).linear)
}

/// Expected hub count: the binomial per-vertex tail model plus the asymptotic
/// Poisson surrogate ξ·J for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCount {
    /// p · P(Binomial(p−1, P0) ≥ δ): the production prediction. Exact for
    /// i.i.d. data in correlation mode, since neighbor events are
    /// conditionally independent given the vertex's own score.
    pub binomial: f64,
    /// ξ·J, the rate used by the asymptotic theory.
    pub poisson_surrogate: LogScaled,
}

/// Mean number of degree-δ discoveries under the null.
pub fn expected_hub_count(params: &ScreeningParams) -> Result<ExpectedCount> {
    params.validate()?;
    let p0 = cap_probability(params.rho, params.n)?;
    let xi = xi_rate(params)?;
    let surrogate = LogScaled::from_ln(xi.ln + params.j_factor.ln());
    let pf = params.p as f64;
    let binomial = if params.delta > params.p - 1 || p0 == 0.0 {
        0.0
    } else {
        // P(Binom(m, q) >= k) = I_q(k, m-k+1) with m = p-1, k = delta
        pf * reg_inc_beta(
            params.delta as f64,
            (params.p - params.delta) as f64,
            p0,
        )?
    };
    Ok(ExpectedCount {
        binomial,
        poisson_surrogate: surrogate,
    })
}

/// κ_{n,δ} = (e_{n,δ}·a_n/(n−2))^δ / δ!, the limit of the mean discovery
/// count along thresholds ρ_p with p^{1/δ}(p−1)(1−ρ_p²)^{(n−2)/2} → e_{n,δ}.
pub fn asymptotic_mean_limit(n: usize, delta: usize, e_nd: f64) -> Result<f64> {
    if n <= 2 {
        return Err(Error::DomainError(format!(
            "asymptotic mean limit requires n > 2, got {n}"
        )));
    }
    if delta < 1 {
        return Err(Error::DomainError("delta must be at least 1".into()));
    }
    if e_nd < 0.0 {
        return Err(Error::DomainError(format!(
            "e_nd must be nonnegative, got {e_nd}"
        )));
    }
    if e_nd == 0.0 {
        return Ok(0.0);
    }
    let base = e_nd * sphere_constant(n)? / (n as f64 - 2.0);
    let ln = delta as f64 * base.ln() - ln_gamma(delta as f64 + 1.0);
    Ok(LogScaled::from_ln(ln).linear)
}

/// p-value from a Poisson rate: 1 − exp(−λ/φ) via the stable expm1 form,
/// where φ is 1 under `PaperPvalue` and φ(δ) under `PoissonLimit`.
pub fn pvalue_from_rate(lambda: f64, delta: usize, convention: PhiConvention) -> f64 {
    assert!(lambda >= 0.0, "rate must be nonnegative, got {lambda}");
    -(-lambda / phi_divisor(convention, delta)).exp_m1()
}

/// λ-value and p-value attached to a discovery with δ-th neighbor threshold
/// `rho_i_delta`.
///
/// The stored λ is the effective Poisson rate ξ·J/φ so that
/// λ = −log(1 − pv) round-trips whenever pv < 1. Rates are capped at 1e300
/// to stay serializable.
pub fn discovery_pvalue(
    delta: usize,
    rho_i_delta: f64,
    params: &ScreeningParams,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&rho_i_delta) {
        return Err(Error::DomainError(format!(
            "rho_i(delta) must lie in [0, 1], got {rho_i_delta}"
        )));
    }
    let per_delta = params.clone().with_delta(delta);
    let xi = xi_rate_at(&per_delta, rho_i_delta)?;
    let rate = xi.linear * params.j_factor;
    let pv = pvalue_from_rate(rate, delta, params.phi_convention);
    let lambda = (rate / phi_divisor(params.phi_convention, delta)).min(1e300);
    Ok((lambda, pv))
}

/// Familywise error rate approximation P(N_{δ,ρ} > 0) ≈ 1 − exp(−ξJ/φ).
pub fn fwer(params: &ScreeningParams) -> Result<f64> {
    let xi = xi_rate(params)?;
    Ok(pvalue_from_rate(
        xi.linear * params.j_factor,
        params.delta,
        params.phi_convention,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson quadrature of a_n ∫_ρ^1 (1−u²)^{(n−4)/2} du via the
    /// substitution u = sin θ, which removes the n = 3 endpoint singularity:
    /// ∫ = ∫_{asin ρ}^{π/2} cos^{n−3}θ dθ.
    fn cap_probability_quadrature(rho: f64, n: usize) -> f64 {
        let k = n as f64 - 3.0;
        let f = |t: f64| t.cos().powf(k);
        let a = rho.asin();
        let b = std::f64::consts::FRAC_PI_2;
        sphere_constant(n).unwrap() * adaptive_simpson(&f, a, b, 1e-13, 40)
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, left, tol / 2.0, depth - 1)
                    + rec(f, m, b, right, tol / 2.0, depth - 1)
            }
        }
        rec(f, a, b, simpson(f, a, b), tol, depth)
    }

    #[test]
    fn sphere_constant_small_n() {
        // a_4 = 2Γ(3/2)/(√π Γ(1)) = 1, a_3 = 2Γ(1)/(√π Γ(1/2)) = 2/π
        assert!((sphere_constant(4).unwrap() - 1.0).abs() < 1e-12);
        assert!((sphere_constant(3).unwrap() - 2.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!(sphere_constant(2).is_err());
    }

    #[test]
    fn sphere_constant_normalizes_the_cap_integral() {
        for &n in &[3usize, 4, 5, 10, 37, 266] {
            let total = cap_probability_quadrature(0.0, n);
            assert!((total - 1.0).abs() < 1e-10, "n={n}: {total}");
        }
    }

    #[test]
    fn cap_probability_endpoints_and_n4() {
        for n in 3..=60 {
            assert_eq!(cap_probability(0.0, n).unwrap(), 1.0);
            assert_eq!(cap_probability(1.0, n).unwrap(), 0.0);
        }
        for i in 1..=99 {
            let rho = i as f64 / 100.0;
            let p0 = cap_probability(rho, 4).unwrap();
            assert!((p0 - (1.0 - rho)).abs() < 1e-12, "rho={rho}: {p0}");
        }
    }

    #[test]
    fn cap_probability_closed_form_n3() {
        // P0(ρ, 3) = 1 − (2/π) asin ρ
        for &rho in &[0.05, 0.3, 0.6, 0.95] {
            let expect = 1.0 - 2.0 / std::f64::consts::PI * rho.asin();
            assert!((cap_probability(rho, 3).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_probability_matches_quadrature() {
        for &n in &[3usize, 5, 12, 80, 266] {
            for i in 0..10 {
                let rho = i as f64 * 0.1;
                let beta = cap_probability(rho, n).unwrap();
                let quad = cap_probability_quadrature(rho, n);
                assert!(
                    (beta - quad).abs() < 1e-10,
                    "n={n} rho={rho}: beta={beta} quad={quad}"
                );
            }
        }
    }

    #[test]
    fn cap_probability_sham_value() {
        // Frozen from the defining integral by adaptive quadrature.
        let p0 = cap_probability(0.26, 266).unwrap();
        assert!(
            (p0 - 1.7501761859645e-5).abs() < 1e-16,
            "P0(0.26, 266) = {p0}"
        );
    }

    #[test]
    fn critical_threshold_conventions() {
        // PoissonLimit reproduces the published 0.296 for the sham geometry;
        // PaperPvalue lands visibly higher.
        let poisson = critical_threshold(24481, 266, 1, 1.0, PhiConvention::PoissonLimit).unwrap();
        let paper = critical_threshold(24481, 266, 1, 1.0, PhiConvention::PaperPvalue).unwrap();
        assert!((poisson - 0.29554951984714545).abs() < 1e-10, "{poisson}");
        assert!((paper - 0.3035881776875305).abs() < 1e-10, "{paper}");
    }

    #[test]
    fn critical_threshold_bisection_oracle() {
        // The closed form must agree with a bisection root of
        // (c(p-1))^{-2δ/(δ(n-2)-2)} = 1 - ρ².
        for &(p, n, delta) in &[(24481usize, 266usize, 1usize), (100, 4, 3), (5000, 20, 2)] {
            let rc = critical_threshold(p, n, delta, 1.0, PhiConvention::PaperPvalue).unwrap();
            let c = sphere_constant(n).unwrap() * delta as f64;
            let target = (c * (p as f64 - 1.0))
                .powf(-2.0 * delta as f64 / (delta as f64 * (n as f64 - 2.0) - 2.0));
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if 1.0 - mid * mid > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((rc - lo).abs() < 1e-12, "p={p} n={n} delta={delta}");
        }
    }

    #[test]
    fn critical_threshold_increases_in_p() {
        let mut last = 0.0;
        for &p in &[100usize, 1000, 10000, 100000] {
            let rc = critical_threshold(p, 26, 2, 1.0, PhiConvention::PoissonLimit).unwrap();
            assert!(rc > last, "p={p}: {rc} <= {last}");
            last = rc;
        }
    }

    #[test]
    fn critical_threshold_domain_errors() {
        // δ(n−2) − 2 = 0 for n = 4, δ = 1
        assert!(matches!(
            critical_threshold(100, 4, 1, 1.0, PhiConvention::PaperPvalue),
            Err(Error::DomainError(_))
        ));
        // tiny J forces c(p−1) <= 1
        assert!(matches!(
            critical_threshold(2, 10, 1, 1e-9, PhiConvention::PaperPvalue),
            Err(Error::DegenerateThreshold(_))
        ));
    }

    #[test]
    fn xi_rate_delta_one_closed_form() {
        let params = ScreeningParams::new(12, 300, 1, 0.4, ScreeningMode::Correlation);
        let p0 = cap_probability(0.4, 12).unwrap();
        let expect = 300.0 * 299.0 * p0;
        let xi = xi_rate(&params).unwrap();
        assert!((xi.linear - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn xi_rate_vanishes_at_one() {
        let params = ScreeningParams::new(12, 300, 2, 1.0, ScreeningMode::Correlation);
        let xi = xi_rate(&params).unwrap();
        assert_eq!(xi.linear, 0.0);
        assert_eq!(xi.ln, f64::NEG_INFINITY);
    }

    #[test]
    fn xi_rate_exact_arithmetic_oracle() {
        // p·C(p−1,δ)·P0^δ with the binomial in exact integer arithmetic.
        use crate::special::binomial_u128;
        let params = ScreeningParams::new(10, 30, 3, 0.5, ScreeningMode::Correlation);
        let p0 = cap_probability(0.5, 10).unwrap();
        let exact = 30.0 * binomial_u128(29, 3) as f64 * p0.powi(3);
        let xi = xi_rate(&params).unwrap();
        assert!((xi.linear - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn eta_matches_xi_at_delta_one() {
        let params = ScreeningParams::new(10, 120, 1, 0.55, ScreeningMode::Correlation);
        let eta = eta_diagnostic(&params).unwrap();
        let xi = xi_rate(&params).unwrap();
        assert!((eta - xi.linear).abs() / xi.linear < 1e-12);
        let at_one = eta_diagnostic(&params.clone().with_rho(1.0)).unwrap();
        assert_eq!(at_one, 0.0);
    }

    #[test]
    fn eta_direct_formula() {
        let params = ScreeningParams::new(12, 100, 2, 0.6, ScreeningMode::Correlation);
        let p0 = cap_probability(0.6, 12).unwrap();
        let expect = 100.0f64.powf(0.5) * 99.0 * p0;
        assert!((eta_diagnostic(&params).unwrap() - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn expected_count_zero_at_rho_one() {
        let params = ScreeningParams::new(266, 24481, 1, 1.0, ScreeningMode::PartialCorrelation);
        let e = expected_hub_count(&params).unwrap();
        assert_eq!(e.binomial, 0.0);
        assert_eq!(e.poisson_surrogate.linear, 0.0);
    }

    #[test]
    fn asymptotic_mean_limit_values() {
        // δ = 1: κ = e·a_n/(n−2)
        let a10 = sphere_constant(10).unwrap();
        let k1 = asymptotic_mean_limit(10, 1, 3.0).unwrap();
        assert!((k1 - 3.0 * a10 / 8.0).abs() < 1e-12);
        // e = 0 → κ = 0
        assert_eq!(asymptotic_mean_limit(10, 2, 0.0).unwrap(), 0.0);
        // n=10, δ=2, e=3: a_10 = 2.1875 exactly, κ = (3·2.1875/8)²/2
        let k2 = asymptotic_mean_limit(10, 2, 3.0).unwrap();
        assert!((k2 - 0.336456298828125).abs() < 1e-12, "{k2}");
    }

    #[test]
    fn pvalue_from_rate_values() {
        assert_eq!(pvalue_from_rate(0.0, 1, PhiConvention::PoissonLimit), 0.0);
        let ln2 = std::f64::consts::LN_2;
        for conv in [PhiConvention::PaperPvalue, PhiConvention::PoissonLimit] {
            assert!((pvalue_from_rate(ln2, 2, conv) - 0.5).abs() < 1e-15);
        }
        let pv = pvalue_from_rate(ln2, 1, PhiConvention::PoissonLimit);
        assert!((pv - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn discovery_pvalue_round_trip_and_edges() {
        let params = ScreeningParams::new(266, 24481, 1, 0.26, ScreeningMode::PartialCorrelation);
        let (lambda, pv) = discovery_pvalue(1, 1.0, &params).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(pv, 0.0);
        // at the initial threshold the p-value equals the FWER approximation
        let (_, pv_star) = discovery_pvalue(1, 0.26, &params).unwrap();
        assert_eq!(pv_star, fwer(&params).unwrap());
    }

    #[test]
    fn fwer_values() {
        let params = ScreeningParams::new(12, 50, 2, 1.0, ScreeningMode::Correlation);
        assert_eq!(fwer(&params).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn cap_probability_monotone(n in 3usize..200, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p_lo = cap_probability(lo, n).unwrap();
            let p_hi = cap_probability(hi, n).unwrap();
            prop_assert!(p_lo >= p_hi - 1e-15);
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }

        #[test]
        fn xi_log_space_matches_exact_rationals(
            p in 4usize..=40,
            n in 4usize..=16,
            delta in 1usize..=3,
            rho_q in 1u32..=9,
        ) {
            use crate::special::binomial_u128;
            let rho = rho_q as f64 / 10.0;
            let delta = delta.min(p - 1);
            let params = ScreeningParams::new(n, p, delta, rho, ScreeningMode::Correlation);
            let p0 = cap_probability(rho, n).unwrap();
            let exact = p as f64 * binomial_u128(p as u64 - 1, delta as u64) as f64 * p0.powi(delta as i32);
            let xi = xi_rate(&params).unwrap();
            if exact > 0.0 {
                prop_assert!((xi.linear - exact).abs() / exact < 1e-10);
            }
        }

        #[test]
        fn pvalue_lambda_round_trip(lambda in 0.0f64..30.0, delta in 1usize..5) {
            for conv in [PhiConvention::PaperPvalue, PhiConvention::PoissonLimit] {
                let pv = pvalue_from_rate(lambda, delta, conv);
                let effective = lambda / phi_divisor(conv, delta);
                let back = -(-pv).ln_1p();
                prop_assert!((back - effective).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&pv));
            }
        }
    }
}
