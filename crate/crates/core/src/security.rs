//! Forgery, repudiation and robustness bounds and the resulting security
//! level.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::bitcore::{h2, inverse_binary_entropy, log2_ball_size, log2_biguint};
use crate::error::{check_domain, Result};
use crate::lfsr_hash::{collision_bound, log2_collision_bound};
use crate::protocol::radius_for;
use crate::sns_model::KgpEstimates;

/// Below this the double value of a probability is subnormal or zero and
/// only the log is meaningful.
const LOG2_FLOOR: f64 = -1000.0;

/// A probability carried together with its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prob {
    value: f64,
    log2: f64,
}

impl Prob {
    pub const ZERO: Prob = Prob {
        value: 0.0,
        log2: f64::NEG_INFINITY,
    };
    pub const ONE: Prob = Prob { value: 1.0, log2: 0.0 };

    /// Clamps into `[0, 1]`.
    pub fn from_value(v: f64) -> Self {
        let value = if v.is_nan() { 1.0 } else { v.clamp(0.0, 1.0) };
        Self {
            value,
            log2: value.log2(),
        }
    }

    /// Clamps the log at 0.
    pub fn from_log2(l: f64) -> Self {
        let log2 = if l.is_nan() { 0.0 } else { l.min(0.0) };
        Self {
            value: log2.exp2(),
            log2,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn log2(&self) -> f64 {
        self.log2
    }

    pub fn max(self, other: Self) -> Self {
        if other.log2 > self.log2 {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for Prob {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log2.partial_cmp(&other.log2)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} (2^{})", self.value, self.log2)
    }
}

/// `log2(2^a + 2^b)`.
fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuessingBound {
    /// Minimum per-bit error rate of a guessing receiver.
    pub p_e: f64,
    pub p_g: Prob,
}

/// `H2(p_e) = Delta1 (1 - H2(e_ph))` and `p_g = 2^{-n H2(p_e)}`.
pub fn guessing_bound(n: u64, delta1: f64, e_ph: f64) -> Result<GuessingBound> {
    check_domain("n", n as f64, n >= 1, "[1, inf)")?;
    check_domain("Delta1", delta1, (0.0..=1.0).contains(&delta1), "[0, 1]")?;
    check_domain("e_ph", e_ph, (0.0..=0.5).contains(&e_ph), "[0, 0.5]")?;
    let y = (delta1 * (1.0 - h2(e_ph))).clamp(0.0, 1.0);
    Ok(GuessingBound {
        p_e: inverse_binary_entropy(y)?,
        p_g: Prob::from_log2(-(n as f64) * y),
    })
}

/// `1 - (1 - a)(1 - a^2)^{K - 1}` with `a = m / 2^{n-1}` and
/// `K = n_x n_y`.
pub fn hash_forgery_bound(m: u128, n: u64, n_x: &BigUint, n_y: &BigUint) -> Result<Prob> {
    check_domain("n_x", log2_biguint(n_x), *n_x >= BigUint::one(), "[1, inf)")?;
    check_domain("n_y", log2_biguint(n_y), *n_y >= BigUint::one(), "[1, inf)")?;
    let k = n_x * n_y;
    if k.is_one() {
        check_forgery_args(m, n)?;
        return Ok(collision_prob(m, n));
    }
    forgery_from_log2(m, n, log2_biguint(&(k - 1u32)))
}

/// [`hash_forgery_bound`] with `log2 n_x + log2 n_y` given in floating point,
/// for lengths where exact ball sizes are impractical.
pub fn hash_forgery_bound_log2(m: u128, n: u64, log2_k: f64) -> Result<Prob> {
    check_domain("log2(n_x n_y)", log2_k, log2_k >= 0.0, "[0, inf)")?;
    if log2_k == 0.0 {
        check_forgery_args(m, n)?;
        return Ok(collision_prob(m, n));
    }
    // log2(K - 1) = log2 K + log2(1 - 2^-log2K)
    let log2_km1 = log2_k + (-(-log2_k * std::f64::consts::LN_2).exp_m1()).log2();
    forgery_from_log2(m, n, log2_km1)
}

fn check_forgery_args(m: u128, n: u64) -> Result<()> {
    check_domain("n", n as f64, n >= 2, "[2, inf)")?;
    check_domain("m", m as f64, m >= 1, "[1, inf)")
}

fn collision_prob(m: u128, n: u64) -> Prob {
    let log2 = log2_collision_bound(m, n);
    if log2 < LOG2_FLOOR {
        Prob::from_log2(log2)
    } else {
        Prob {
            value: collision_bound(m, n),
            log2,
        }
    }
}

fn forgery_from_log2(m: u128, n: u64, log2_km1: f64) -> Result<Prob> {
    check_forgery_args(m, n)?;
    let log2_a = (m as f64).log2() - (n as f64 - 1.0);
    if log2_a >= 0.0 {
        return Ok(Prob::ONE);
    }
    // -ln(1 - bound) = -ln1p(-a) - (K - 1) ln1p(-a^2); both terms ~ a and (K-1) a^2
    let approx = log2_add(log2_a, log2_km1 + 2.0 * log2_a);
    if approx < LOG2_FLOOR {
        return Ok(Prob::from_log2(approx));
    }
    let a = log2_a.exp2();
    let first = if log2_a > LOG2_FLOOR { -(-a).ln_1p() } else { a };
    let second = if 2.0 * log2_a > LOG2_FLOOR {
        -log2_km1.exp2() * (-(a * a)).ln_1p()
    } else {
        (log2_km1 + 2.0 * log2_a).exp2()
    };
    let l = first + second;
    Ok(Prob::from_value(-(-l).exp_m1()))
}

/// `p_f = max(p_g, p_h)`, `p_re = p_ro = 0`, `epsilon = max(p_f, p_re, p_ro)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityLevel {
    pub p_f: Prob,
    pub p_re: Prob,
    pub p_ro: Prob,
    pub epsilon: Prob,
}

pub fn security_level(p_g: Prob, p_h: Prob) -> SecurityLevel {
    let p_f = p_g.max(p_h);
    let p_re = Prob::ZERO;
    let p_ro = Prob::ZERO;
    SecurityLevel {
        p_f,
        p_re,
        p_ro,
        epsilon: p_f.max(p_re).max(p_ro),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    pub n: u64,
    pub m: u128,
    pub log2_nx: f64,
    pub log2_ny: f64,
    pub p_e: f64,
    pub p_g: Prob,
    pub p_h: Prob,
    pub level: SecurityLevel,
}

impl SecurityReport {
    pub fn epsilon(&self) -> Prob {
        self.level.epsilon
    }

    /// Stable `key=value` lines.
    pub fn to_lines(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.16e}");
        vec![
            format!("n={}", self.n),
            format!("m={}", self.m),
            format!("log2_nx={}", f(self.log2_nx)),
            format!("log2_ny={}", f(self.log2_ny)),
            format!("p_e={}", f(self.p_e)),
            format!("p_g={}", f(self.p_g.value)),
            format!("log2_pg={}", f(self.p_g.log2)),
            format!("p_h={}", f(self.p_h.value)),
            format!("log2_ph={}", f(self.p_h.log2)),
            format!("p_f={}", f(self.level.p_f.value)),
            format!("p_re={}", f(self.level.p_re.value)),
            format!("p_ro={}", f(self.level.p_ro.value)),
            format!("epsilon={}", f(self.level.epsilon.value)),
            format!("log2_eps={}", f(self.level.epsilon.log2)),
        ]
    }
}

/// Full report from exact likely-set sizes.
pub fn analyze(
    n: u64,
    delta1: f64,
    e_ph: f64,
    m: u128,
    n_x: &BigUint,
    n_y: &BigUint,
) -> Result<SecurityReport> {
    let g = guessing_bound(n, delta1, e_ph)?;
    let p_h = hash_forgery_bound(m, n, n_x, n_y)?;
    Ok(SecurityReport {
        n,
        m,
        log2_nx: log2_biguint(n_x),
        log2_ny: log2_biguint(n_y),
        p_e: g.p_e,
        p_g: g.p_g,
        p_h,
        level: security_level(g.p_g, p_h),
    })
}

/// Full report from `log2` likely-set sizes.
pub fn analyze_log2(
    n: u64,
    delta1: f64,
    e_ph: f64,
    m: u128,
    log2_nx: f64,
    log2_ny: f64,
) -> Result<SecurityReport> {
    let g = guessing_bound(n, delta1, e_ph)?;
    let p_h = hash_forgery_bound_log2(m, n, log2_nx + log2_ny)?;
    Ok(SecurityReport {
        n,
        m,
        log2_nx,
        log2_ny,
        p_e: g.p_e,
        p_g: g.p_g,
        p_h,
        level: security_level(g.p_g, p_h),
    })
}

/// Likely-set radii for keys of length `n` (X) and `2n` (Y) when each
/// receiver's copy differs from Alice's at rate `e`, so the two receivers
/// differ from each other at rate up to `2e`.
pub fn likely_radii(n: u64, e: f64) -> (u64, u64) {
    let r_x = radius_for(n as usize, 2.0 * e) as u64;
    let r_y = radius_for(2 * n as usize, 2.0 * e) as u64;
    (r_x.min(n), r_y.min(2 * n))
}

/// Report for the keys produced by one model run.
pub fn report_for_estimates(est: &KgpEstimates, m: u128) -> Result<SecurityReport> {
    let n = est.counts.n;
    let (r_x, r_y) = likely_radii(n, est.e);
    analyze_log2(
        n,
        est.delta1,
        est.e_ph,
        m,
        log2_ball_size(n, r_x),
        log2_ball_size(2 * n, r_y),
    )
}
