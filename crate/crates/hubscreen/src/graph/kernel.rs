//! Inner-product kernel shared by every graph construction path.
//!
//! Both engines decide edge membership through `pair_correlation`, so their
//! edge sets and stored magnitudes agree bit for bit.

/// Columns this close to ±1 are checked for exact (sign-flipped) equality.
const SNAP_THRESHOLD: f64 = 1.0 - 1e-9;

/// Dot product with four independent accumulators. The fixed summation order
/// makes the result identical regardless of caller, thread count or argument
/// order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let chunks = a.len() / 4;
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..chunks {
        let i = 4 * k;
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (s0 + s1) + (s2 + s3) + tail
}

/// Correlation between two unit-norm score columns, clamped to [−1, 1].
///
/// Columns that are bitwise identical up to sign return exactly ±1, so
/// duplicated variables stay adjacent even at ρ = 1.
#[inline]
pub fn pair_correlation(a: &[f64], b: &[f64]) -> f64 {
    let r = dot(a, b);
    if r.abs() > SNAP_THRESHOLD {
        if a.iter().zip(b).all(|(x, y)| x == y) {
            return 1.0;
        }
        if a.iter().zip(b).all(|(x, y)| *x == -*y) {
            return -1.0;
        }
    }
    r.clamp(-1.0, 1.0)
}
