use crate::error::{check_domain, Result};

/// Binary Shannon entropy in bits, with `H2(0) = H2(1) = 0` by continuity.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_domain("x", x, (0.0..=1.0).contains(&x), "[0, 1]")?;
    Ok(h2(x))
}

pub(crate) fn h2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Inverse of [`binary_entropy`] on the branch `[0, 0.5]`.
///
/// Bisection on the increasing branch; the result satisfies
/// `|H2(x) - y| <= 1e-12`.
pub fn inverse_binary_entropy(y: f64) -> Result<f64> {
    check_domain("y", y, (0.0..=1.0).contains(&y), "[0, 1]")?;
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h2(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
