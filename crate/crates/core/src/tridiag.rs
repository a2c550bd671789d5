//! Symmetric tridiagonal eigenvalue extraction by Sturm bisection.
//!
//! Used for Gauss-Hermite node generation and by the grid oracles. Only
//! eigenvalues are produced; no vectors are needed on these paths.

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let e2 = off[i - 1] * off[i - 1];
        // shifted LDL^T recurrence with underflow guard
        let denom = if q.abs() < f64::MIN_POSITIVE.sqrt() {
            f64::MIN_POSITIVE.sqrt().copysign(q)
        } else {
            q
        };
        q = diag[i] - x - e2 / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds for the spectrum.
fn bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) of the symmetric tridiagonal
/// matrix with main diagonal `diag` and off-diagonal `off`.
pub fn eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    assert!(k < diag.len());
    assert_eq!(off.len() + 1, diag.len());
    let (mut lo, mut hi) = bounds(diag, off);
    // bisect until the bracket is at roundoff scale
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count_below(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All eigenvalues in ascending order.
pub fn eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    (0..diag.len()).map(|k| eigenvalue(diag, off, k)).collect()
}
