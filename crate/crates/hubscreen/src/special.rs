//! Special functions: regularized incomplete beta and log-space helpers.
//!
//! The incomplete beta is evaluated by the modified Lentz continued fraction
//! with the usual symmetry switch for convergence; the defining integral is
//! only used as a cross-check oracle in tests.

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// Convergence target for the continued fraction. Tighter than strictly
/// needed so downstream 1e-12 accuracy requirements hold with margin.
const CF_EPS: f64 = 1e-15;
const CF_MAX_ITER: usize = 300;
const CF_TINY: f64 = 1e-300;

/// log B(a, b)
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// log C(n, k), with C(n, k) = 0 for k > n mapping to -inf.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// C(n, k) in exact integer arithmetic, saturating at `u128::MAX`.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (n - k + i) is divisible by i at every step
        match acc.checked_mul((n - k + i) as u128) {
            Some(v) => acc = v / i as u128,
            None => return u128::MAX,
        }
    }
    acc
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Domain: a > 0, b > 0, 0 ≤ x ≤ 1. Exact at the endpoints.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::DomainError(format!(
            "incomplete beta requires a > 0 and b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainError(format!(
            "incomplete beta requires x in [0, 1], got x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // Symmetry switch keeps the continued fraction in its fast-convergence
    // region: I_x(a,b) = 1 - I_{1-x}(b,a).
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_cf(b, a, 1.0 - x)?)
    } else {
        beta_cf(a, b, x)
    }
}

/// Continued fraction for I_x(a, b), modified Lentz method.
fn beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    let ln_prefix = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let prefix = ln_prefix.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=CF_MAX_ITER {
        let fm = m as f64;
        let m2 = 2.0 * fm;

        // even step: a_{2m} = m (b-m) x / ((a+2m-1)(a+2m))
        let aa = fm * (b - fm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // odd step: a_{2m+1} = -(a+m)(a+b+m) x / ((a+2m)(a+2m+1))
        let aa = -(a + fm) * (qab + fm) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < CF_EPS {
            return Ok((prefix * h).clamp(0.0, 1.0));
        }
    }
    Err(Error::NonConvergence(format!(
        "incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        assert_eq!(reg_inc_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn uniform_case() {
        // I_x(1, 1) = x
        for &x in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            assert!((reg_inc_beta(1.0, 1.0, x).unwrap() - x).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_a1() {
        // I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.05, 0.3, 0.7, 0.95] {
            for &b in &[0.5, 2.0, 7.5] {
                let expect = 1.0 - (1.0 - x).powf(b);
                assert!((reg_inc_beta(1.0, b, x).unwrap() - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn complement_identity() {
        for &(a, b, x) in &[(132.0, 0.5, 0.93), (4.0, 0.5, 0.2), (2.5, 9.0, 0.4)] {
            let lhs = reg_inc_beta(a, b, x).unwrap();
            let rhs = 1.0 - reg_inc_beta(b, a, 1.0 - x).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b} x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(reg_inc_beta(0.0, 1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, -1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn binomial_exact_small() {
        assert_eq!(binomial_u128(0, 0), 1);
        assert_eq!(binomial_u128(5, 2), 10);
        assert_eq!(binomial_u128(29, 3), 3654);
        assert_eq!(binomial_u128(24480, 1), 24480);
        assert_eq!(binomial_u128(10, 11), 0);
    }

    #[test]
    fn ln_binomial_matches_exact() {
        for n in 1..=40u64 {
            for k in 0..=n {
                let exact = binomial_u128(n, k) as f64;
                let vialn = ln_binomial(n, k).exp();
                assert!(
                    ((vialn_rel(exact, vialn)) < 1e-12),
                    "C({n},{k}): {exact} vs {vialn}"
                );
            }
        }
    }

    fn vialn_rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.max(1.0)
    }
}
