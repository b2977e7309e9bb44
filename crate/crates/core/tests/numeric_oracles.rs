//! Numerical kernels against frozen high-precision fixtures
//! (`oracle/fixtures.json`, regenerated by `oracle/gen_oracles.py`) and
//! brute-force checks computed here.

use qds_core::bitcore::{binary_entropy, log2_ball_size};
use qds_core::security::guessing_bound;
use qds_core::sns_model::{
    bessel_i0, chernoff_expected_bounds, chernoff_real_lower, chernoff_real_upper,
    counting_rates, decoy_s1_lower, estimate, serfling_margin, tx_sx, ChannelParams, DecoyBounds,
    DecoyRates, FailureProbs, SnsParams,
};
use serde_json::Value;

const REL: f64 = 1e-10;

fn fixtures() -> Value {
    serde_json::from_str(include_str!("oracle/fixtures.json")).unwrap()
}

fn rows<'a>(v: &'a Value, key: &str) -> &'a Vec<Value> {
    v[key].as_array().unwrap()
}

fn num(row: &Value, key: &str) -> f64 {
    row[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

fn assert_rel(actual: f64, expected: f64, rel: f64, what: &str) {
    let scale = actual.abs().max(expected.abs());
    assert!(
        (actual - expected).abs() <= rel * scale,
        "{what}: got {actual:e}, want {expected:e}"
    );
}

fn sns_at(row: &Value) -> SnsParams {
    SnsParams {
        mu: row.get("mu").and_then(Value::as_f64).unwrap_or(0.5),
        mu1: row.get("mu1").and_then(Value::as_f64).unwrap_or(0.1),
        ..SnsParams::default()
    }
}

#[test]
fn bessel_matches_fixture() {
    let f = fixtures();
    for row in rows(&f, "bessel_i0") {
        assert_rel(bessel_i0(num(row, "x")), num(row, "i0"), REL, "I0");
    }
}

#[test]
fn counting_rates_match_fixture() {
    let f = fixtures();
    for row in rows(&f, "counting_rates") {
        let ch = ChannelParams::reference(num(row, "distance_km"));
        let r = counting_rates(&ch, &sns_at(row));
        assert_rel(r.s_c, num(row, "s_c"), REL, "S_C");
        assert_rel(r.s_d, num(row, "s_d"), REL, "S_D");
        assert_rel(r.s_v, num(row, "s_v"), REL, "S_V");
    }
}

#[test]
fn tx_sx_match_fixture() {
    let f = fixtures();
    for row in rows(&f, "tx_sx") {
        let ch = ChannelParams::reference(num(row, "distance_km"));
        let p = SnsParams {
            delta: num(row, "delta"),
            ..sns_at(row)
        };
        let (t, s) = tx_sx(&ch, &p);
        assert_rel(t, num(row, "t_x"), REL, "T_X");
        assert_rel(s, num(row, "s_x"), REL, "S_X");
    }
}

#[test]
fn tx_sx_match_midpoint_sums() {
    // midpoint rule with 10^6 cells over the full symmetric slice
    let cells = 1_000_000;
    for (d, mu1, delta) in [(100.0, 0.1, std::f64::consts::PI / 15.0), (0.0, 0.8, 2.0), (400.0, 0.01, 6.0)] {
        let ch = ChannelParams::reference(d);
        let p = SnsParams {
            mu1,
            delta,
            ..SnsParams::default()
        };
        let x = ch.eta() * mu1;
        let c = 1.0 - ch.p_d;
        let h = delta / cells as f64;
        let (mut t_sum, mut s_sum) = (0.0, 0.0);
        for i in 0..cells {
            let th = -delta / 2.0 + (i as f64 + 0.5) * h;
            t_sum += (2.0 * x * (th / 2.0).sin().powi(2)).exp_m1();
            s_sum += (2.0 * x * (th / 2.0).cos().powi(2)).exp_m1();
        }
        let pre = c * (-2.0 * x).exp();
        let t = pre * (t_sum * h / delta + ch.p_d);
        let s = pre * (s_sum * h / delta + ch.p_d) + t;
        let (t_rs, s_rs) = tx_sx(&ch, &p);
        assert_rel(t_rs, t, 1e-9, "T_X midpoint");
        assert_rel(s_rs, s, 1e-9, "S_X midpoint");
    }
}

#[test]
fn serfling_matches_fixture() {
    let f = fixtures();
    for row in rows(&f, "serfling") {
        let v = serfling_margin(num(row, "n"), num(row, "t"), num(row, "eps_p")).unwrap();
        assert_rel(v, num(row, "margin"), REL, "serfling");
    }
}

#[test]
fn chernoff_matches_fixture() {
    let f = fixtures();
    for row in rows(&f, "chernoff") {
        let (x, xi) = (num(row, "x"), num(row, "xi"));
        let (lo, hi) = chernoff_expected_bounds(x, xi).unwrap();
        assert_rel(lo, num(row, "expected_lower"), REL, "phi^L");
        assert_rel(hi, num(row, "expected_upper"), REL, "phi^U");
        assert_rel(chernoff_real_upper(x, xi).unwrap(), num(row, "real_upper"), REL, "varphi^U");
        match row["real_lower"].as_f64() {
            Some(v) => assert_rel(chernoff_real_lower(x, xi).unwrap(), v, REL, "varphi^L"),
            None => assert!(chernoff_real_lower(x, xi).is_err()),
        }
    }
}

#[test]
fn chernoff_expected_bounds_are_kl_roots() {
    // a - X + X ln(X / a) = ln(2 / xi) at a = phi^L and a = phi^U
    for &x in &[0.5, 3.0, 40.0, 1e3, 1e6, 1e10] {
        for &xi in &[1e-12, 1e-6, 0.01, 0.5] {
            let (lo, hi) = chernoff_expected_bounds(x, xi).unwrap();
            let target = (2.0 / xi).ln();
            for a in [lo, hi] {
                let log_term = x * (x / a).ln();
                let kl = a - x + log_term;
                // residual limited by cancellation among the summed terms
                let slack = 1e-13 * (a + x + log_term.abs());
                assert!((kl - target).abs() <= slack.max(1e-12 * target), "KL root at X={x}, xi={xi}");
            }
            assert!(lo <= x && x <= hi);
        }
    }
}

#[test]
fn decoy_formula_matches_fixture() {
    let f = fixtures();
    for row in rows(&f, "decoy") {
        let rates = DecoyRates {
            s00: num(row, "s00"),
            s01: num(row, "s01"),
            s10: num(row, "s01"),
            s02: num(row, "s02"),
            s20: num(row, "s02"),
        };
        let r = decoy_s1_lower(&DecoyBounds::exact(&rates), num(row, "mu1"), num(row, "mu2")).unwrap();
        let raw = num(row, "s1_raw");
        if (0.0..=1.0).contains(&raw) {
            assert_rel(r.s1_l, raw, REL, "s1^L");
            assert!(!r.clamped);
        } else {
            assert!(r.clamped);
            assert_eq!(r.s1_l, raw.clamp(0.0, 1.0));
        }
    }
}

#[test]
fn degenerate_limits() {
    // eta -> 0: every counting rate reduces to the dark-count floor
    let mut dark = ChannelParams::reference(100.0);
    dark.eta_d = 0.0;
    let p = SnsParams::default();
    let r = counting_rates(&dark, &p);
    let floor = 2.0 * dark.p_d * (1.0 - dark.p_d);
    assert_rel(r.s_c, floor, REL, "S_C at eta=0");
    assert_rel(r.s_d, floor, REL, "S_D at eta=0");

    // Delta -> 0: the slice averages collapse to the point values at delta = 0
    let ch = ChannelParams::reference(150.0);
    let narrow = SnsParams { delta: 1e-9, ..p };
    let (t, s) = tx_sx(&ch, &narrow);
    let x = ch.eta() * p.mu1;
    let pd = ch.p_d;
    let t0 = pd * (1.0 - pd) * (-2.0 * x).exp();
    assert_rel(t, t0, REL, "T_X at Delta=0");
    assert_rel(s, (1.0 - pd) * (-2.0 * x).exp() * ((2.0 * x).exp_m1() + pd) + t0, REL, "S_X at Delta=0");

    // xi/2 -> 1: Chernoff widths vanish
    for &x in &[0.3, 7.0, 1e8] {
        let (lo, hi) = chernoff_expected_bounds(x, 2.0).unwrap();
        assert_rel(lo, x, REL, "phi^L at zero width");
        assert_rel(hi, x, REL, "phi^U at zero width");
        assert_rel(chernoff_real_upper(x, 2.0).unwrap(), x, REL, "varphi^U at zero width");
        assert_rel(chernoff_real_lower(x, 2.0).unwrap(), x, REL, "varphi^L at zero width");
    }
}

#[test]
fn entropy_and_ball_match_fixture() {
    let f = fixtures();
    for row in rows(&f, "entropy") {
        let got = binary_entropy(num(row, "p")).unwrap();
        let want = num(row, "h2");
        assert!((got - want).abs() <= 1e-14 + 1e-12 * want, "H2({})", num(row, "p"));
    }
    for row in rows(&f, "ball") {
        let (n, r) = (row["n"].as_u64().unwrap(), row["r"].as_u64().unwrap());
        let want = num(row, "log2_size");
        assert!((log2_ball_size(n, r) - want).abs() <= 1e-10 * want.max(1.0), "ball({n}, {r})");
    }
}

#[test]
fn pipeline_matches_fixture() {
    let f = fixtures();
    for row in rows(&f, "pipeline") {
        let ch = ChannelParams::reference(num(row, "distance_km"));
        let p = SnsParams {
            n_pulses: num(row, "N"),
            mu: num(row, "mu"),
            mu1: num(row, "mu1"),
            mu2: num(row, "mu2"),
            q: num(row, "q"),
            p_z: num(row, "p_z"),
            p0: num(row, "p0"),
            p1: num(row, "p1"),
            ..SnsParams::default()
        };
        let est = estimate(&ch, &p, &FailureProbs::default()).unwrap();
        assert_eq!(est.counts.n, row["n"].as_u64().unwrap());
        assert_rel(est.e_t, num(row, "e_t"), 1e-11, "E_T");
        assert_rel(est.e, num(row, "e"), 1e-11, "E");
        assert_rel(est.s1.s1_l, num(row, "s1_l"), 1e-9, "s1^L");
        assert_rel(est.t_delta.t_delta_u, num(row, "t_delta_u"), 1e-9, "T_Delta^U");
        assert_rel(est.eph_u, num(row, "eph_u"), 1e-9, "e^U");
        assert_rel(est.delta1_l, num(row, "delta1_l"), 1e-9, "Delta1^L");
        assert_rel(est.delta1, num(row, "delta1"), 1e-9, "Delta1");
        assert_rel(est.e_ph, num(row, "e_ph"), 1e-9, "e_ph");
        let g = guessing_bound(est.counts.n, est.delta1, est.e_ph).unwrap();
        assert_rel(g.p_g.log2(), num(row, "log2_pg"), 1e-9, "log2 p_g");
    }
}
