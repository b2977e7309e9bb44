//! Chernoff-bound inversions relating observed, expected and realized counts.

use crate::error::{check_domain, Infeasibility, Result};

/// Alternating-sign tail `sum_{k>=2} c_k d^k` used where the closed forms
/// cancel; `sign` is -1 for alternating terms.
fn series(d: f64, sign: f64, coeff: impl Fn(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = d * d;
    let mut s = 1.0;
    for k in 2..40 {
        sum += s * pow * coeff(k as f64);
        pow *= d;
        s *= sign;
    }
    sum
}

/// `(1 + d) ln(1 + d) - d`.
fn h_plus(d: f64) -> f64 {
    if d < 1e-2 {
        series(d, -1.0, |k| 1.0 / (k * (k - 1.0)))
    } else {
        (1.0 + d) * d.ln_1p() - d
    }
}

/// `(1 - d) ln(1 - d) + d`, equal to 1 at `d = 1`.
fn h_minus(d: f64) -> f64 {
    if d >= 1.0 {
        1.0
    } else if d < 1e-2 {
        series(d, 1.0, |k| 1.0 / (k * (k - 1.0)))
    } else {
        (1.0 - d) * (-d).ln_1p() + d
    }
}

/// `e^{-u} - 1 + u`.
fn g_lower(u: f64) -> f64 {
    if u < 1e-2 {
        series(u, -1.0, |k| 1.0 / libm::tgamma(k + 1.0))
    } else {
        (-u).exp_m1() + u
    }
}

/// `v - ln(1 + v)`.
fn g_upper(v: f64) -> f64 {
    if v < 1e-2 {
        series(v, -1.0, |k| 1.0 / k)
    } else {
        v - v.ln_1p()
    }
}

/// `s ln s + 1 - s`, which is [`h_minus`] at `d = 1 - s`.
fn g_survive(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s > 0.99 {
        h_minus(1.0 - s)
    } else {
        s * s.ln() + 1.0 - s
    }
}

/// Root of an increasing `f` on `[0, hi)` with `f(0) = 0 < target`; `hi`
/// doubles until `f(hi) >= target`. Returns `None` if that never happens
/// below `f64::MAX`.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut hi: f64) -> Option<f64> {
    if target <= 0.0 {
        return Some(0.0);
    }
    while f(hi) < target {
        if !hi.is_finite() {
            return None;
        }
        hi *= 2.0;
    }
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn log_two_over(xi: f64) -> Result<f64> {
    check_domain("xi", xi, xi > 0.0 && xi <= 2.0, "(0, 2]")?;
    Ok((2.0 / xi).ln().max(0.0))
}

/// `(u, v)` with `X e^{-u}` and `X (1 + v)` the two expected-value bounds.
///
/// Both bounds solve `a - X + X ln(X / a) = ln(2 / xi)`, written as
/// `X g(u) = L` below the observation and `X g(v) = L` above it.
fn expected_log_ratios(x: f64, xi: f64) -> Result<(f64, f64)> {
    check_domain("X", x, x > 0.0 && x.is_finite(), "(0, inf)")?;
    let t = log_two_over(xi)? / x;
    let u = bisect(g_lower, t, 1.0).ok_or(Infeasibility::NoChernoffRoot)?;
    let v = bisect(g_upper, t, 1.0).ok_or(Infeasibility::NoChernoffRoot)?;
    Ok((u, v))
}

/// `(delta_1, delta_2)` for the expected-value bounds of an observation `x`:
/// `x / (1 + delta_1)` and `x / (1 - delta_2)`.
pub fn chernoff_expected_deltas(x: f64, xi: f64) -> Result<(f64, f64)> {
    let (u, v) = expected_log_ratios(x, xi)?;
    Ok((u.exp_m1(), v / (1.0 + v)))
}

/// Lower and upper bounds on the expectation behind an observed count `X`.
///
/// `X = 0` gives `(0, ln(2 / xi))`, the limit of the same equations. So
/// does an `X` small enough that `ln(2 / xi) / X` overflows.
pub fn chernoff_expected_bounds(x: f64, xi: f64) -> Result<(f64, f64)> {
    let l = log_two_over(xi)?;
    if x == 0.0 || (x > 0.0 && !(l / x).is_finite()) {
        return Ok((0.0, l + x));
    }
    let (u, v) = expected_log_ratios(x, xi)?;
    Ok((x * (-u).exp(), x * (1.0 + v)))
}

/// Upper bound `(1 + d1') Y` on a realized count with expectation `Y`.
pub fn chernoff_real_upper(y: f64, xi: f64) -> Result<f64> {
    check_domain("Y", y, y >= 0.0 && y.is_finite(), "[0, inf)")?;
    let l = log_two_over(xi)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let d = bisect(h_plus, l / y, 1.0).ok_or(Infeasibility::NoChernoffRoot)?;
    Ok((1.0 + d) * y)
}

/// Lower bound `(1 - d2') Y` on a realized count with expectation `Y`.
///
/// A root in `(0, 1)` exists only when `Y > ln(2 / xi)`; otherwise the
/// result is [`Infeasibility::NoChernoffRoot`].
pub fn chernoff_real_lower(y: f64, xi: f64) -> Result<f64> {
    check_domain("Y", y, y >= 0.0 && y.is_finite(), "[0, inf)")?;
    let l = log_two_over(xi)?;
    if l == 0.0 {
        return Ok(y);
    }
    if y <= l {
        return Err(Infeasibility::NoChernoffRoot.into());
    }
    // g_survive falls from 1 at s = 0 to 0 at s = 1
    let t = l / y;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g_survive(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) * y)
}

/// `(varphi_L, varphi_U)`.
pub fn chernoff_real_bounds(y: f64, xi: f64) -> Result<(f64, f64)> {
    Ok((chernoff_real_lower(y, xi)?, chernoff_real_upper(y, xi)?))
}
