//! Signature-rate optimization over source parameters.
//!
//! [`search`] spends a fixed budget of [`evaluate`] calls: the starting
//! point, a coarse grid, then coordinate refinement in log (intensities) and
//! logit (probabilities) coordinates. Candidates are evaluated in parallel
//! batches and reduced in a fixed order, so results depend only on the
//! inputs and the budget.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility};
use crate::security::{report_for_estimates, SecurityReport};
use crate::sns_model::{estimate, ChannelParams, FailureProbs, SnsParams};

/// Relative resolution of the search over `N`.
pub const N_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBounds {
    /// Range of `mu`, `mu1` and `mu2`.
    pub intensity: (f64, f64),
    /// Range of `q`, `p_z`, `p0` and `p1`.
    pub probability: (f64, f64),
    pub max_p0_plus_p1: f64,
    /// Range of the pulse count `N`.
    pub pulses: (f64, f64),
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            intensity: (1e-4, 1.0),
            probability: (0.01, 0.99),
            max_p0_plus_p1: 0.99,
            pulses: (1e5, 1e14),
        }
    }
}

/// One optimization instance: channel, failure probabilities, message
/// length and security target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateProblem {
    pub channel: ChannelParams,
    pub failure: FailureProbs,
    pub m: u128,
    pub target: f64,
    pub bounds: SearchBounds,
}

impl RateProblem {
    pub fn reference(distance_km: f64) -> Self {
        Self {
            channel: ChannelParams::reference(distance_km),
            failure: FailureProbs::default(),
            m: 100_000_000_000_000_000_000,
            target: 1e-10,
            bounds: SearchBounds::default(),
        }
    }

    pub fn at_distance(&self, distance_km: f64) -> Self {
        Self {
            channel: self.channel.at_distance(distance_km),
            ..*self
        }
    }
}

/// Why a point is infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    Model(Infeasibility),
    InvalidParams,
    BitErrorTooHigh,
    ZeroDelta1,
    EpsilonAboveTarget,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Reason::Model(Infeasibility::NoEvents) => "no_events",
            Reason::Model(Infeasibility::SampleExhausted) => "sample_exhausted",
            Reason::Model(Infeasibility::KeyTooShort) => "key_too_short",
            Reason::Model(Infeasibility::ErrorRateTooHigh) => "error_rate_too_high",
            Reason::Model(Infeasibility::NoChernoffRoot) => "no_chernoff_root",
            Reason::Model(Infeasibility::WindowCount) => "window_count",
            Reason::Model(Infeasibility::ZeroSinglePhoton) => "zero_single_photon",
            Reason::Model(Infeasibility::ZeroDelta1) | Reason::ZeroDelta1 => "zero_delta1",
            Reason::InvalidParams => "invalid_params",
            Reason::BitErrorTooHigh => "bit_error_too_high",
            Reason::EpsilonAboveTarget => "epsilon_above_target",
        };
        f.write_str(s)
    }
}

/// Model outputs carried by a [`RatePoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimates {
    pub n: u64,
    pub e: f64,
    pub delta1: f64,
    pub e_ph: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub distance_km: f64,
    /// Signed message bits per pulse pair, `m / (2N)`.
    pub r: f64,
    pub params: SnsParams,
    pub estimates: Option<PointEstimates>,
    pub report: Option<SecurityReport>,
    pub feasible: bool,
    pub reason: Option<Reason>,
}

impl RatePoint {
    /// `log2(epsilon) - log2(target)` for infeasible points with a report,
    /// otherwise infinite.
    fn shortfall(&self, target: f64) -> f64 {
        self.report
            .map(|r| r.epsilon().log2() - target.log2())
            .filter(|v| !v.is_nan())
            .unwrap_or(f64::INFINITY)
    }
}

/// Runs the model and the security bounds for one parameter set.
pub fn evaluate(params: &SnsParams, problem: &RateProblem) -> RatePoint {
    let mut point = RatePoint {
        distance_km: problem.channel.distance_km(),
        r: problem.m as f64 / (2.0 * params.n_pulses),
        params: *params,
        estimates: None,
        report: None,
        feasible: false,
        reason: None,
    };
    let est = match estimate(&problem.channel, params, &problem.failure) {
        Ok(e) => e,
        Err(Error::Infeasible(i)) => {
            point.reason = Some(Reason::Model(i));
            return point;
        }
        Err(_) => {
            point.reason = Some(Reason::InvalidParams);
            return point;
        }
    };
    point.estimates = Some(PointEstimates {
        n: est.counts.n,
        e: est.e,
        delta1: est.delta1,
        e_ph: est.e_ph,
    });
    let report = match report_for_estimates(&est, problem.m) {
        Ok(r) => r,
        Err(_) => {
            point.reason = Some(Reason::InvalidParams);
            return point;
        }
    };
    point.report = Some(report);
    point.reason = if est.clamps.e || 2.0 * est.e >= 0.5 {
        Some(Reason::BitErrorTooHigh)
    } else if est.delta1 <= 0.0 {
        Some(Reason::ZeroDelta1)
    } else if report.epsilon().log2() > problem.target.log2() {
        Some(Reason::EpsilonAboveTarget)
    } else {
        None
    };
    point.feasible = point.reason.is_none();
    point
}

/// Smallest integer `N` in the problem's range (up to [`N_REL_TOL`]) at which
/// the parameters are feasible, with the evaluation there.
pub fn minimize_n(params: &SnsParams, problem: &RateProblem) -> Option<RatePoint> {
    minimize_n_counted(params, problem, problem.bounds.pulses.1, None).0
}

/// `known_hi` is an evaluation at `hi` that is already known to be feasible.
fn minimize_n_counted(
    params: &SnsParams,
    problem: &RateProblem,
    hi: f64,
    known_hi: Option<RatePoint>,
) -> (Option<RatePoint>, u64) {
    let at = |n: f64| evaluate(&params.with_n(n), problem);
    let mut evals = 0;
    let mut hi = hi.floor();
    let mut lo = problem.bounds.pulses.0.ceil();
    let mut best = match known_hi {
        Some(p) => p,
        None => {
            evals += 1;
            let p = at(hi);
            if !p.feasible {
                return (None, evals);
            }
            p
        }
    };
    if lo >= hi {
        return (Some(best), evals);
    }
    evals += 1;
    let p = at(lo);
    if p.feasible {
        return (Some(p), evals);
    }
    while hi > lo * (1.0 + N_REL_TOL) {
        let mid = (lo * hi).sqrt().round();
        if mid <= lo || mid >= hi {
            break;
        }
        evals += 1;
        let p = at(mid);
        if p.feasible {
            hi = mid;
            best = p;
        } else {
            lo = mid;
        }
    }
    (Some(best), evals)
}

/// Total order on candidates: feasible beats infeasible, then smaller `N`
/// (feasible) or smaller shortfall (infeasible), then smaller `N`, then the
/// parameters lexicographically.
fn compare(a: &RatePoint, b: &RatePoint, target: f64) -> Ordering {
    match (a.feasible, b.feasible) {
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        (false, false) => {
            let o = a.shortfall(target).total_cmp(&b.shortfall(target));
            if o != Ordering::Equal {
                return o;
            }
        }
        (true, true) => {}
    }
    a.params
        .n_pulses
        .total_cmp(&b.params.n_pulses)
        .then_with(|| lex(&a.params).cmp_by(&lex(&b.params)))
}

fn lex(p: &SnsParams) -> [f64; 8] {
    [p.mu, p.mu1, p.mu2, p.q, p.p_z, p.p0, p.p1, p.n_pulses]
}

trait CmpBy {
    fn cmp_by(&self, other: &Self) -> Ordering;
}

impl CmpBy for [f64; 8] {
    fn cmp_by(&self, other: &Self) -> Ordering {
        self.iter()
            .zip(other)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    }
}

/// Default starting point: the library defaults at the top of the `N` range.
pub fn default_start(problem: &RateProblem) -> SnsParams {
    SnsParams::default().with_n(problem.bounds.pulses.1)
}

struct Searcher<'a> {
    problem: &'a RateProblem,
    remaining: u64,
    best: RatePoint,
}

impl Searcher<'_> {
    /// Tries to beat the incumbent with `theta`; returns the candidate's
    /// best point (if any is worth comparing) and the evaluations spent.
    fn probe(&self, theta: &SnsParams) -> (Option<RatePoint>, u64) {
        let pr = self.problem;
        if self.best.feasible {
            let n_try = (self.best.params.n_pulses * (1.0 - N_REL_TOL)).floor();
            if n_try < pr.bounds.pulses.0 {
                return (None, 0);
            }
            let p = evaluate(&theta.with_n(n_try), pr);
            if !p.feasible {
                return (None, 1);
            }
            let (found, evals) = minimize_n_counted(theta, pr, n_try, Some(p));
            (found, evals + 1)
        } else {
            let p = evaluate(&theta.with_n(pr.bounds.pulses.1), pr);
            if !p.feasible {
                return (Some(p), 1);
            }
            let (found, evals) = minimize_n_counted(theta, pr, pr.bounds.pulses.1, Some(p));
            (found, evals + 1)
        }
    }

    /// Returns whether any candidate improved the incumbent; stops early
    /// when the budget runs out.
    fn batch(&mut self, thetas: &[SnsParams]) -> (bool, bool) {
        let results: Vec<_> = thetas.par_iter().map(|t| self.probe(t)).collect();
        let mut improved = false;
        for (found, cost) in results {
            if cost > self.remaining {
                self.remaining = 0;
                return (improved, true);
            }
            self.remaining -= cost;
            if let Some(p) = found {
                if compare(&p, &self.best, self.problem.target) == Ordering::Less {
                    self.best = p;
                    improved = true;
                }
            }
        }
        (improved, self.remaining == 0)
    }
}

fn coarse_grid(problem: &RateProblem) -> Vec<SnsParams> {
    let b = &problem.bounds;
    let mut out = Vec::new();
    for &mu in &[0.1, 0.3, 0.6] {
        for &mu1 in &[0.02, 0.1] {
            for &mu2 in &[0.3, 0.8] {
                for &q in &[0.01, 0.04, 0.15] {
                    for &p_z in &[0.6, 0.85] {
                        for &p1 in &[0.4, 0.7] {
                            let p = SnsParams {
                                mu,
                                mu1,
                                mu2,
                                q,
                                p_z,
                                p0: 0.2,
                                p1,
                                ..SnsParams::default()
                            };
                            if in_bounds(&p, b) {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn in_bounds(p: &SnsParams, b: &SearchBounds) -> bool {
    let within = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
    [p.mu, p.mu1, p.mu2].iter().all(|&v| within(v, b.intensity))
        && [p.q, p.p_z, p.p0, p.p1].iter().all(|&v| within(v, b.probability))
        && p.mu1 < p.mu2
        && p.p0 + p.p1 <= b.max_p0_plus_p1
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Moves coordinate `k` by `step` in its search coordinates, clamped to the
/// bounds.
fn nudge(p: &SnsParams, k: usize, step: f64, b: &SearchBounds) -> SnsParams {
    let mut q = *p;
    let log_move = |v: f64| (v.ln() + step).exp().clamp(b.intensity.0, b.intensity.1);
    let logit_move = |v: f64| logistic(logit(v) + step).clamp(b.probability.0, b.probability.1);
    match k {
        0 => q.mu = log_move(q.mu),
        1 => q.mu1 = log_move(q.mu1),
        2 => q.mu2 = log_move(q.mu2),
        3 => q.q = logit_move(q.q),
        4 => q.p_z = logit_move(q.p_z),
        5 => q.p0 = logit_move(q.p0),
        _ => q.p1 = logit_move(q.p1),
    }
    q
}

const FIRST_STEP: f64 = 0.4;
const LAST_STEP: f64 = 0.0125;

/// Best point found with at most `budget` evaluations, starting from
/// `start` (or [`default_start`]). The result is infeasible only if no
/// feasible point was found.
pub fn search(problem: &RateProblem, budget: u64, start: Option<SnsParams>) -> RatePoint {
    let start = start.unwrap_or_else(|| default_start(problem));
    let first = evaluate(&start, problem);
    let mut s = Searcher {
        problem,
        remaining: budget.saturating_sub(1),
        best: first,
    };
    if s.remaining == 0 {
        return s.best;
    }
    let (_, done) = s.batch(&[start]);
    if done {
        return s.best;
    }
    let (_, done) = s.batch(&coarse_grid(problem));
    if done {
        return s.best;
    }
    let mut step = FIRST_STEP;
    while step >= LAST_STEP {
        let base = s.best.params;
        let thetas: Vec<SnsParams> = (0..7)
            .flat_map(|k| [step, -step].map(|d| nudge(&base, k, d, &problem.bounds)))
            .filter(|t| in_bounds(t, &problem.bounds) && lex(t) != lex(&base))
            .collect();
        let (improved, done) = s.batch(&thetas);
        if done {
            break;
        }
        if !improved {
            step /= 2.0;
        }
    }
    s.best
}

/// Optimized points at each distance, warm-starting each search from the
/// previous optimum, followed by a pass that carries parameters from far
/// points back to nearer ones where they do better.
pub fn sweep(distances: &[f64], problem: &RateProblem, budget: u64) -> Vec<RatePoint> {
    sweep_with_start(distances, problem, budget, None)
}

/// [`sweep`] with an explicit starting point for the first distance.
pub fn sweep_with_start(
    distances: &[f64],
    problem: &RateProblem,
    budget: u64,
    mut start: Option<SnsParams>,
) -> Vec<RatePoint> {
    let mut out: Vec<RatePoint> = Vec::with_capacity(distances.len());
    for &d in distances {
        let pr = problem.at_distance(d);
        let p = search(&pr, budget, start);
        start = Some(if p.feasible { p.params } else { start.unwrap_or(p.params) });
        out.push(p);
    }
    for i in (0..out.len().saturating_sub(1)).rev() {
        let far = out[i + 1];
        if !far.feasible || (out[i].feasible && out[i].r >= far.r) {
            continue;
        }
        let pr = problem.at_distance(distances[i]);
        if let Some(p) = minimize_n(&far.params, &pr) {
            if compare(&p, &out[i], pr.target) == Ordering::Less {
                out[i] = p;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuned() -> SnsParams {
        SnsParams {
            n_pulses: 1e10,
            mu: 0.5,
            mu1: 0.1,
            mu2: 0.3,
            q: 0.04,
            p_z: 0.8,
            p0: 0.2,
            p1: 0.7,
            ..SnsParams::default()
        }
    }

    #[test]
    fn absurd_distance_is_infeasible() {
        let p = evaluate(&tuned(), &RateProblem::reference(2e4));
        assert!(!p.feasible);
        assert!(p.reason.is_some());
    }

    #[test]
    fn hand_tuned_point_at_100km_is_feasible() {
        let pr = RateProblem::reference(100.0);
        let p = evaluate(&tuned(), &pr);
        assert!(p.feasible, "{:?}", p.reason);
        assert!(p.report.unwrap().epsilon().value() <= 1e-10);
        assert_eq!(p.r, 1e20 / 2e10);
    }

    #[test]
    fn doubling_n_halves_rate() {
        let pr = RateProblem::reference(100.0);
        let a = evaluate(&tuned(), &pr);
        let b = evaluate(&tuned().with_n(2e10), &pr);
        assert!(a.feasible && b.feasible);
        assert_eq!(b.r, a.r / 2.0);
    }

    #[test]
    fn evaluate_is_deterministic() {
        let pr = RateProblem::reference(150.0);
        assert_eq!(evaluate(&tuned(), &pr), evaluate(&tuned(), &pr));
    }

    #[test]
    fn minimize_n_post_conditions() {
        let pr = RateProblem::reference(100.0);
        let p = minimize_n(&tuned(), &pr).unwrap();
        let n = p.params.n_pulses;
        assert!(evaluate(&tuned().with_n(n), &pr).feasible);
        assert!(!evaluate(&tuned().with_n((n / 2.0).floor()), &pr).feasible);
        // spot checks of monotonicity above N*
        for k in [1.01, 1.5, 3.0, 100.0] {
            assert!(evaluate(&tuned().with_n((n * k).round()), &pr).feasible);
        }
    }

    #[test]
    fn minimize_n_vacuous_target() {
        let mut pr = RateProblem::reference(100.0);
        pr.target = 1.0;
        let p = minimize_n(&tuned(), &pr).unwrap();
        assert!(p.feasible);
        let below = evaluate(&tuned().with_n((p.params.n_pulses / 2.0).floor()), &pr);
        assert!(!below.feasible);
        assert_ne!(below.reason, Some(Reason::EpsilonAboveTarget));
    }

    #[test]
    fn minimize_n_absent_on_dead_channel() {
        assert!(minimize_n(&tuned(), &RateProblem::reference(2e4)).is_none());
    }

    #[test]
    fn budget_one_returns_start() {
        let pr = RateProblem::reference(100.0);
        assert_eq!(search(&pr, 1, Some(tuned())), evaluate(&tuned(), &pr));
    }

    #[test]
    fn larger_budget_is_never_worse() {
        let pr = RateProblem::reference(200.0);
        let mut last = f64::INFINITY;
        for budget in [1, 5, 40, 300, 2000] {
            let p = search(&pr, budget, Some(tuned()));
            let n = if p.feasible { p.params.n_pulses } else { f64::INFINITY };
            assert!(n <= last, "budget {budget}");
            last = n;
        }
    }

    #[test]
    fn sweep_edges() {
        let pr = RateProblem::reference(100.0);
        assert!(sweep(&[], &pr, 100).is_empty());
        let one = sweep(&[120.0], &pr, 50);
        assert_eq!(one, vec![search(&pr.at_distance(120.0), 50, None)]);
    }

    #[test]
    fn reason_codes_are_distinct() {
        let codes: std::collections::BTreeSet<String> = [
            Reason::InvalidParams,
            Reason::BitErrorTooHigh,
            Reason::ZeroDelta1,
            Reason::EpsilonAboveTarget,
            Reason::Model(Infeasibility::WindowCount),
            Reason::Model(Infeasibility::NoEvents),
        ]
        .iter()
        .map(|r| r.to_string())
        .collect();
        assert_eq!(codes.len(), 6);
    }
}
