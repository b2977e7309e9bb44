//! Finite-size model of sending-or-not-sending key generation: counting
//! rates, event counts, the Serfling and Chernoff corrections, decoy-state
//! bounds and the realized single-photon fraction and phase-flip rate.

mod bessel;
mod chernoff;
mod quadrature;

pub use bessel::bessel_i0;
pub use chernoff::{
    chernoff_expected_bounds, chernoff_expected_deltas, chernoff_real_bounds, chernoff_real_lower,
    chernoff_real_upper,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Error, Infeasibility, Result};
use bessel::i0_minus_one;
use quadrature::romberg;

/// Largest double below one half.
pub const HALF_MINUS: f64 = 0.499_999_999_999_999_94;

/// Fiber and detector constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Fiber loss in dB/km.
    pub alpha: f64,
    /// Half of the distance between the two parties, in km.
    pub l: f64,
    pub eta_d: f64,
    /// Dark-count probability per window.
    pub p_d: f64,
    /// Misalignment error rate.
    pub e_d: f64,
}

impl ChannelParams {
    /// Reference fiber and detector constants at the given end-to-end distance.
    pub fn reference(distance_km: f64) -> Self {
        Self {
            alpha: 0.2,
            l: distance_km / 2.0,
            eta_d: 0.5,
            p_d: 1e-8,
            e_d: 0.02,
        }
    }

    pub fn at_distance(mut self, distance_km: f64) -> Self {
        self.l = distance_km / 2.0;
        self
    }

    pub fn distance_km(&self) -> f64 {
        2.0 * self.l
    }

    /// Total efficiency `10^(-alpha l / 10) eta_d`.
    pub fn eta(&self) -> f64 {
        10f64.powf(-self.alpha * self.l / 10.0) * self.eta_d
    }

    pub fn validate(&self) -> Result<()> {
        check_domain("alpha", self.alpha, self.alpha > 0.0 && self.alpha.is_finite(), "(0, inf)")?;
        check_domain("l", self.l, self.l >= 0.0 && self.l.is_finite(), "[0, inf)")?;
        check_domain("eta_d", self.eta_d, (0.0..=1.0).contains(&self.eta_d), "[0, 1]")?;
        check_domain("p_d", self.p_d, (0.0..1.0).contains(&self.p_d), "[0, 1)")?;
        check_domain("e_d", self.e_d, (0.0..=0.5).contains(&self.e_d), "[0, 0.5]")
    }
}

/// Tunable source parameters. `mu0 = 0` is implicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnsParams {
    /// Total pulse count `N`.
    #[serde(rename = "N")]
    pub n_pulses: f64,
    pub mu: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub q: f64,
    pub p_z: f64,
    pub p0: f64,
    pub p1: f64,
    /// Phase-slice width in radians.
    pub delta: f64,
    /// Fraction of effective events sacrificed for testing.
    pub gamma: f64,
}

impl Default for SnsParams {
    fn default() -> Self {
        Self {
            n_pulses: 1e10,
            mu: 0.5,
            mu1: 0.1,
            mu2: 0.3,
            q: 0.04,
            p_z: 0.8,
            p0: 0.2,
            p1: 0.7,
            delta: PI / 15.0,
            gamma: 0.1,
        }
    }
}

impl SnsParams {
    pub fn with_n(mut self, n_pulses: f64) -> Self {
        self.n_pulses = n_pulses;
        self
    }

    /// `1 - p0 - p1`.
    pub fn p2(&self) -> f64 {
        1.0 - self.p0 - self.p1
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        check_domain("N", self.n_pulses, self.n_pulses >= 1.0 && self.n_pulses.is_finite(), "[1, inf)")?;
        for (name, v) in [("mu", self.mu), ("mu1", self.mu1), ("mu2", self.mu2)] {
            check_domain(name, v, v > 0.0 && v.is_finite(), "(0, inf)")?;
        }
        if self.mu2 <= self.mu1 {
            return Err(Error::InvalidArgument(format!(
                "decoy intensities must satisfy mu1 < mu2 (got {} and {})",
                self.mu1, self.mu2
            )));
        }
        for (name, v) in [("q", self.q), ("p_z", self.p_z), ("p0", self.p0), ("p1", self.p1), ("gamma", self.gamma)] {
            check_domain(name, v, unit(v), "(0, 1)")?;
        }
        check_domain("p0 + p1", self.p0 + self.p1, self.p0 + self.p1 < 1.0, "(0, 1)")?;
        check_domain("delta", self.delta, self.delta > 0.0 && self.delta <= 2.0 * PI, "(0, 2 pi]")
    }
}

/// Failure probabilities of the Chernoff (`xi`) and Serfling (`eps_p`) steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FailureProbs {
    pub xi: f64,
    pub eps_p: f64,
}

impl Default for FailureProbs {
    fn default() -> Self {
        Self {
            xi: 1e-12,
            eps_p: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingRates {
    pub s_c: f64,
    pub s_d: f64,
    pub s_v: f64,
}

/// `2 (1 - p_d) e^{-x} [expm1(x / 2) + p_d]`: one party sends intensity
/// `x / eta`, the other nothing.
fn one_sided_rate(x: f64, p_d: f64) -> f64 {
    2.0 * (1.0 - p_d) * (-x).exp() * ((0.5 * x).exp_m1() + p_d)
}

/// Rates of the three effective-event classes: exactly one party sends
/// (`S_C`), both send (`S_D`), neither sends (`S_V`).
pub fn counting_rates(ch: &ChannelParams, p: &SnsParams) -> CountingRates {
    let x = ch.eta() * p.mu;
    let pd = ch.p_d;
    // e^x I0(x) - 1 = expm1(x) I0(x) + (I0(x) - 1)
    let i0m1 = i0_minus_one(x);
    let s_d = 2.0 * (1.0 - pd) * (-2.0 * x).exp() * (x.exp_m1() * (1.0 + i0m1) + i0m1 + pd);
    CountingRates {
        s_c: one_sided_rate(x, pd),
        s_d,
        s_v: 2.0 * pd * (1.0 - pd),
    }
}

/// Expected effective-event numbers; only `n` is rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCounts {
    pub n_c: f64,
    pub n_d: f64,
    pub n_v: f64,
    pub n_t: f64,
    pub t: f64,
    /// Raw key length `floor((N_t - T) / 3)`.
    pub n: u64,
}

pub fn event_counts(p: &SnsParams, rates: &CountingRates) -> Result<EventCounts> {
    let base = p.n_pulses * p.p_z * p.p_z;
    let n_c = 2.0 * base * p.q * (1.0 - p.q) * rates.s_c;
    let n_d = base * p.q * p.q * rates.s_d;
    let n_v = base * (1.0 - p.q) * (1.0 - p.q) * rates.s_v;
    let n_t = n_c + n_d + n_v;
    let t = p.gamma * n_t;
    if n_t <= 0.0 {
        return Err(Infeasibility::NoEvents.into());
    }
    if n_t <= t {
        return Err(Infeasibility::SampleExhausted.into());
    }
    Ok(EventCounts {
        n_c,
        n_d,
        n_v,
        n_t,
        t,
        n: ((n_t - t) / 3.0).floor() as u64,
    })
}

/// `E_T = (n_D + n_V) / N_t`.
pub fn bit_flip_error(n_d: f64, n_v: f64, n_t: f64) -> Result<f64> {
    if n_t <= 0.0 {
        return Err(Infeasibility::NoEvents.into());
    }
    Ok(((n_d + n_v) / n_t).clamp(0.0, 1.0))
}

/// `sqrt((n - T + 1) ln(1 / eps_p) / (2 n T))`.
pub fn serfling_margin(n: f64, t: f64, eps_p: f64) -> Result<f64> {
    check_domain("n", n, n >= 1.0 && n.is_finite(), "[1, inf)")?;
    check_domain("T", t, t > 0.0 && t.is_finite(), "(0, inf)")?;
    check_domain("eps_p", eps_p, eps_p > 0.0 && eps_p <= 1.0, "(0, 1]")?;
    check_domain("n - T + 1", n - t + 1.0, n - t + 1.0 >= 0.0, "[0, inf)")?;
    Ok(((n - t + 1.0) * (1.0 / eps_p).ln() / (2.0 * n * t)).sqrt())
}

/// Forward-model rates of the decoy sources `mu_i mu_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyRates {
    pub s00: f64,
    pub s01: f64,
    pub s10: f64,
    pub s02: f64,
    pub s20: f64,
}

pub fn model_decoy_counting_rates(ch: &ChannelParams, p: &SnsParams) -> DecoyRates {
    let eta = ch.eta();
    let s01 = one_sided_rate(eta * p.mu1, ch.p_d);
    let s02 = one_sided_rate(eta * p.mu2, ch.p_d);
    DecoyRates {
        s00: 2.0 * ch.p_d * (1.0 - ch.p_d),
        s01,
        s10: s01,
        s02,
        s20: s02,
    }
}

/// Chernoff-corrected expected decoy rates, named by the bound direction
/// each one enters the estimates with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub s01_l: f64,
    pub s10_l: f64,
    pub s02_u: f64,
    pub s20_u: f64,
    pub s00_u: f64,
    pub s00_l: f64,
}

impl DecoyBounds {
    /// No statistical correction: every bound equals its rate.
    pub fn exact(r: &DecoyRates) -> Self {
        Self {
            s01_l: r.s01,
            s10_l: r.s10,
            s02_u: r.s02,
            s20_u: r.s20,
            s00_u: r.s00,
            s00_l: r.s00,
        }
    }
}

/// Applies the expected-value Chernoff bounds to each decoy window count
/// `N (1 - p_z)^2 p_i p_j S_ij` and converts back to rates.
pub fn decoy_expected_bounds(p: &SnsParams, r: &DecoyRates, xi: f64) -> Result<DecoyBounds> {
    let base = p.n_pulses * (1.0 - p.p_z) * (1.0 - p.p_z);
    let (p0, p1, p2) = (p.p0, p.p1, p.p2());
    let bound = |rate: f64, windows: f64, upper: bool| -> Result<f64> {
        if windows <= 0.0 {
            return Err(Infeasibility::WindowCount.into());
        }
        let (lo, hi) = chernoff_expected_bounds(rate * windows, xi)?;
        Ok(if upper { hi } else { lo } / windows)
    };
    Ok(DecoyBounds {
        s01_l: bound(r.s01, base * p0 * p1, false)?,
        s10_l: bound(r.s10, base * p1 * p0, false)?,
        s02_u: bound(r.s02, base * p0 * p2, true)?,
        s20_u: bound(r.s20, base * p2 * p0, true)?,
        s00_u: bound(r.s00, base * p0 * p0, true)?,
        s00_l: bound(r.s00, base * p0 * p0, false)?,
    })
}

/// Single-photon yield lower bounds; `clamped` records a negative raw value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S1Lower {
    pub s01_l: f64,
    pub s10_l: f64,
    pub s1_l: f64,
    pub clamped: bool,
}

/// Two-decoy lower bound on the single-photon yield, averaged over the two
/// one-sided configurations.
pub fn decoy_s1_lower(b: &DecoyBounds, mu1: f64, mu2: f64) -> Result<S1Lower> {
    if !(mu1 > 0.0 && mu2 > mu1) {
        return Err(Error::InvalidArgument(format!(
            "decoy intensities must satisfy 0 < mu1 < mu2 (got {mu1} and {mu2})"
        )));
    }
    let denom = mu1 * mu2 * (mu2 - mu1);
    let one = |s_l: f64, s_u: f64| {
        (mu2 * mu2 * mu1.exp() * s_l - mu1 * mu1 * mu2.exp() * s_u - (mu2 * mu2 - mu1 * mu1) * b.s00_u)
            / denom
    };
    let raw01 = one(b.s01_l, b.s02_u);
    let raw10 = one(b.s10_l, b.s20_u);
    let clamped = !(0.0..=1.0).contains(&raw01) || !(0.0..=1.0).contains(&raw10);
    let s01_l = raw01.clamp(0.0, 1.0);
    let s10_l = raw10.clamp(0.0, 1.0);
    Ok(S1Lower {
        s01_l,
        s10_l,
        s1_l: 0.5 * (s01_l + s10_l),
        clamped,
    })
}

/// Phase-slice averages `(T_X, S_X)` for the decoy intensity `mu1`.
pub fn tx_sx(ch: &ChannelParams, p: &SnsParams) -> (f64, f64) {
    let x = ch.eta() * p.mu1;
    let pd = ch.p_d;
    let half = 0.5 * p.delta;
    // (1/Delta) int_{-Delta/2}^{Delta/2} g = (2/Delta) int_0^{Delta/2} g for even g
    let avg = |g: &dyn Fn(f64) -> f64| 2.0 / p.delta * romberg(g, 0.0, half, 1e-15);
    let pre = (1.0 - pd) * (-2.0 * x).exp();
    let sin_term = avg(&|d: f64| (2.0 * x * (0.5 * d).sin().powi(2)).exp_m1());
    let cos_term = avg(&|d: f64| (2.0 * x * (0.5 * d).cos().powi(2)).exp_m1());
    let t_x = pre * (sin_term + pd);
    let s_x = pre * (cos_term + pd) + t_x;
    (t_x, s_x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TDelta {
    pub t_x: f64,
    pub s_x: f64,
    /// Window count `N_{Delta+-}`.
    pub n_delta: f64,
    pub t_delta_u: f64,
}

/// Upper bound on the expected phase-slice error rate.
pub fn t_delta_upper(ch: &ChannelParams, p: &SnsParams, xi: f64) -> Result<TDelta> {
    let (t_x, s_x) = tx_sx(ch, p);
    let n_delta = p.delta / (2.0 * PI) * (1.0 - p.p_z).powi(2) * p.p1 * p.p1 * p.n_pulses;
    if n_delta < 1.0 {
        return Err(Infeasibility::WindowCount.into());
    }
    let per_detector = (t_x * (1.0 - 2.0 * ch.e_d) + ch.e_d * s_x) * n_delta;
    let (_, upper) = chernoff_expected_bounds(2.0 * per_detector, xi)?;
    Ok(TDelta {
        t_x,
        s_x,
        n_delta,
        t_delta_u: upper / (2.0 * n_delta),
    })
}

/// Upper bound on the expected phase-flip rate, clamped to `[0, 0.5]`; the
/// flag reports whether the clamp fired.
pub fn phase_flip_upper(t_delta_u: f64, s00_l: f64, s1_l: f64, mu1: f64) -> Result<(f64, bool)> {
    if s1_l <= 0.0 {
        return Err(Infeasibility::ZeroSinglePhoton.into());
    }
    let decay = (-2.0 * mu1).exp();
    let raw = (t_delta_u - 0.5 * decay * s00_l) / (2.0 * mu1 * decay * s1_l);
    Ok((raw.clamp(0.0, 0.5), !(0.0..=0.5).contains(&raw)))
}

/// `<Delta_1^L> = 2 N p_z^2 q (1 - q) mu e^{-mu} <s_1^L> / N_t`.
pub fn expected_delta1_lower(p: &SnsParams, s1_l: f64, n_t: f64) -> f64 {
    2.0 * p.n_pulses * p.p_z * p.p_z * p.q * (1.0 - p.q) * p.mu * (-p.mu).exp() * s1_l / n_t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Realized {
    pub delta1: f64,
    pub e_ph: f64,
    /// The lower Chernoff bound on `n <Delta_1^L>` had no root.
    pub delta1_no_root: bool,
    pub clamped: bool,
}

/// Realized single-photon fraction and phase-flip rate of an `n`-bit key.
///
/// When `Delta_1` comes out zero the phase-flip rate is meaningless and is
/// reported as 0.5.
pub fn realize_estimates(delta1_l: f64, eph_u: f64, n: u64, xi: f64) -> Result<Realized> {
    if n == 0 {
        return Err(Infeasibility::KeyTooShort.into());
    }
    let nf = n as f64;
    let (delta1_raw, no_root) = match chernoff_real_lower(nf * delta1_l.max(0.0), xi) {
        Ok(v) => (v / nf, false),
        Err(Error::Infeasible(Infeasibility::NoChernoffRoot)) => (0.0, true),
        Err(e) => return Err(e),
    };
    let delta1 = delta1_raw.clamp(0.0, 1.0);
    let mut clamped = delta1 != delta1_raw;
    if delta1 == 0.0 {
        return Ok(Realized {
            delta1,
            e_ph: 0.5,
            delta1_no_root: no_root,
            clamped,
        });
    }
    let y = nf * delta1 * eph_u;
    let e_raw = chernoff_real_upper(y, xi)? / (nf * delta1);
    let e_ph = e_raw.clamp(0.0, 0.5);
    clamped |= e_ph != e_raw;
    Ok(Realized {
        delta1,
        e_ph,
        delta1_no_root: no_root,
        clamped,
    })
}

/// Which intermediate estimates were clamped into their physical range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Clamps {
    pub e: bool,
    pub s1: bool,
    pub eph_u: bool,
    pub realized: bool,
}

/// Every quantity produced by one run of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgpEstimates {
    pub rates: CountingRates,
    pub counts: EventCounts,
    pub e_t: f64,
    pub serfling: f64,
    /// Bit-flip rate bound `min(E_T + mu, 0.5^-)`.
    pub e: f64,
    pub decoy: DecoyRates,
    pub decoy_bounds: DecoyBounds,
    pub s1: S1Lower,
    pub t_delta: TDelta,
    pub eph_u: f64,
    pub delta1_l: f64,
    pub delta1: f64,
    pub e_ph: f64,
    pub delta1_no_root: bool,
    pub clamps: Clamps,
}

/// Runs the full model for one configuration.
pub fn estimate(ch: &ChannelParams, p: &SnsParams, fp: &FailureProbs) -> Result<KgpEstimates> {
    ch.validate()?;
    p.validate()?;
    check_domain("xi", fp.xi, fp.xi > 0.0 && fp.xi <= 2.0, "(0, 2]")?;
    let rates = counting_rates(ch, p);
    let counts = event_counts(p, &rates)?;
    if counts.n < 2 {
        return Err(Infeasibility::KeyTooShort.into());
    }
    let e_t = bit_flip_error(counts.n_d, counts.n_v, counts.n_t)?;
    let serfling = serfling_margin(counts.n as f64, counts.t, fp.eps_p)?;
    let e_raw = e_t + serfling;
    let e = e_raw.min(HALF_MINUS);
    let mut clamps = Clamps {
        e: e != e_raw,
        ..Clamps::default()
    };

    let decoy = model_decoy_counting_rates(ch, p);
    let decoy_bounds = decoy_expected_bounds(p, &decoy, fp.xi)?;
    let s1 = decoy_s1_lower(&decoy_bounds, p.mu1, p.mu2)?;
    clamps.s1 = s1.clamped;
    let t_delta = t_delta_upper(ch, p, fp.xi)?;
    let (eph_u, eph_clamped) = phase_flip_upper(t_delta.t_delta_u, decoy_bounds.s00_l, s1.s1_l, p.mu1)?;
    clamps.eph_u = eph_clamped;
    let delta1_l = expected_delta1_lower(p, s1.s1_l, counts.n_t);
    let realized = realize_estimates(delta1_l, eph_u, counts.n, fp.xi)?;
    clamps.realized = realized.clamped;
    debug_assert!(e <= 0.5 && (clamps.e || e_t <= e));
    Ok(KgpEstimates {
        rates,
        counts,
        e_t,
        serfling,
        e,
        decoy,
        decoy_bounds,
        s1,
        t_delta,
        eph_u,
        delta1_l,
        delta1: realized.delta1,
        e_ph: realized.e_ph,
        delta1_no_root: realized.delta1_no_root,
        clamps,
    })
}
