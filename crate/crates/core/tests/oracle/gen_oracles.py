#!/usr/bin/env python3
"""Regenerates the frozen fixtures in this directory.

Everything is evaluated with mpmath at 50 significant digits using direct
formulas, bracketing root-finders and adaptive quadrature, independently of
the Rust implementation. Run from this directory: python3 gen_oracles.py
"""
import json
import random

import mpmath as mp

mp.mp.dps = 50

ALPHA, ETA_D, P_D, E_D = mp.mpf("0.2"), mp.mpf("0.5"), mp.mpf("1e-8"), mp.mpf("0.02")


def eta(distance):
    return mp.power(10, -ALPHA * mp.mpf(distance) / 2 / 10) * ETA_D


def counting(distance, mu, pd=P_D):
    x = eta(distance) * mu
    s_c = 2 * ((1 - pd) * mp.e ** (-x / 2) - (1 - pd) ** 2 * mp.e ** (-x))
    s_d = 2 * ((1 - pd) * mp.e ** (-x) * mp.besseli(0, x) - (1 - pd) ** 2 * mp.e ** (-2 * x))
    s_v = 2 * pd * (1 - pd)
    return s_c, s_d, s_v


def tx_sx(distance, mu1, delta, pd=P_D):
    x = eta(distance) * mu1
    c = 1 - pd
    t_x = mp.quad(lambda d: c * mp.e ** (-2 * x * mp.cos(d / 2) ** 2) - c * c * mp.e ** (-2 * x), [-delta / 2, delta / 2]) / delta
    s_x = mp.quad(lambda d: c * mp.e ** (-2 * x * mp.sin(d / 2) ** 2) - c * c * mp.e ** (-2 * x), [-delta / 2, delta / 2]) / delta + t_x
    return t_x, s_x


def bisect(f, lo, hi):
    flo = f(lo)
    for _ in range(1200):
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def expected_bounds(x, xi):
    """phi^L, phi^U as the two roots a of a - X + X ln(X / a) = ln(2 / xi).

    Lower root bisected in u = ln(X / a), upper root in w = a / X.
    """
    x = mp.mpf(x)
    t = mp.log(2 / mp.mpf(xi))
    if x == 0:
        return mp.mpf(0), t
    u = bisect(lambda u: x * (mp.e ** (-u) - 1 + u) - t, mp.mpf(0), t / x + 2)
    w_hi = mp.mpf(2)
    while x * (w_hi - 1 - mp.log(w_hi)) < t:
        w_hi *= 2
    w = bisect(lambda w: x * (w - 1 - mp.log(w)) - t, mp.mpf(1), w_hi)
    return x * mp.e ** (-u), x * w


def real_bounds(y, xi):
    y = mp.mpf(y)
    t = mp.log(2 / mp.mpf(xi))
    if y == 0:
        return None, mp.mpf(0)
    hp = lambda d: (1 + d) * mp.log(1 + d) - d
    hm = lambda d: (1 - d) * mp.log(1 - d) + d
    hi_b = mp.mpf(1)
    while y * hp(hi_b) < t:
        hi_b *= 2
    up = (1 + bisect(lambda d: y * hp(d) - t, mp.mpf(0), hi_b)) * y
    low = None
    if y > t:
        low = bisect(lambda s: y * (s * mp.log(s) + 1 - s) - t, mp.mpf("1e-300"), mp.mpf(1)) * y
    return low, up


def h2(p):
    p = mp.mpf(p)
    if p in (0, 1):
        return mp.mpf(0)
    return -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)


def log2_ball(n, r):
    return mp.log(sum(mp.binomial(n, k) for k in range(min(r, n) + 1)), 2)


def pipeline(distance, N, mu, mu1, mu2, q, pz, p0, p1, xi, eps_p, delta=mp.pi / 15, gamma=mp.mpf("0.1")):
    N, mu, mu1, mu2, q, pz, p0, p1 = map(mp.mpf, (N, mu, mu1, mu2, q, pz, p0, p1))
    s_c, s_d, s_v = counting(distance, mu)
    base = N * pz ** 2
    n_c = 2 * base * q * (1 - q) * s_c
    n_d = base * q * q * s_d
    n_v = base * (1 - q) ** 2 * s_v
    n_t = n_c + n_d + n_v
    T = gamma * n_t
    n = int(mp.floor((n_t - T) / 3))
    e_t = (n_d + n_v) / n_t
    e = e_t + mp.sqrt((n - T + 1) * mp.log(1 / mp.mpf(eps_p)) / (2 * n * T))
    p2 = 1 - p0 - p1
    wb = N * (1 - pz) ** 2
    s01 = counting(distance, mu1)[0]
    s02 = counting(distance, mu2)[0]
    w00, w01, w02 = wb * p0 * p0, wb * p0 * p1, wb * p0 * p2
    s01_l = expected_bounds(w01 * s01, xi)[0] / w01
    s02_u = expected_bounds(w02 * s02, xi)[1] / w02
    s00_u = expected_bounds(w00 * s_v, xi)[1] / w00
    s00_l = expected_bounds(w00 * s_v, xi)[0] / w00
    s1 = (mu2 ** 2 * mp.e ** mu1 * s01_l - mu1 ** 2 * mp.e ** mu2 * s02_u - (mu2 ** 2 - mu1 ** 2) * s00_u) / (mu1 * mu2 * (mu2 - mu1))
    s1 = min(max(s1, 0), 1)
    t_x, s_x = tx_sx(distance, mu1, delta)
    n_delta = delta / (2 * mp.pi) * (1 - pz) ** 2 * p1 ** 2 * N
    t_du = expected_bounds(2 * (t_x * (1 - 2 * E_D) + E_D * s_x) * n_delta, xi)[1] / (2 * n_delta)
    decay = mp.e ** (-2 * mu1)
    eph_u = min(max((t_du - decay * s00_l / 2) / (2 * mu1 * decay * s1), 0), mp.mpf("0.5"))
    d1_l = 2 * N * pz ** 2 * q * (1 - q) * mu * mp.e ** (-mu) * s1 / n_t
    d1 = min(real_bounds(n * d1_l, xi)[0] / n, 1)
    e_ph = min(real_bounds(n * d1 * eph_u, xi)[1] / (n * d1), mp.mpf("0.5"))
    return dict(n=n, e_t=e_t, e=e, s1_l=s1, t_delta_u=t_du, eph_u=eph_u, delta1_l=d1_l,
                delta1=d1, e_ph=e_ph, log2_pg=-n * d1 * (1 - h2(e_ph)))


def f(v):
    return float(v)


def main():
    rng = random.Random(20240917)
    out = {}

    out["bessel_i0"] = [dict(x=x, i0=f(mp.besseli(0, x))) for x in
                        [0.0, 1e-8, 1e-3, 0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 35.0, 49.9, 50.1, 60.0, 80.0, 100.0, 150.0, 200.0, 300.0, 500.0]]

    rows = []
    for _ in range(20):
        d = rng.uniform(0.0, 600.0)
        mu = 10 ** rng.uniform(-4, 0)
        s_c, s_d, s_v = counting(d, mu)
        rows.append(dict(distance_km=d, mu=mu, s_c=f(s_c), s_d=f(s_d), s_v=f(s_v)))
    out["counting_rates"] = rows

    rows = []
    for _ in range(20):
        d = rng.uniform(0.0, 600.0)
        mu1 = 10 ** rng.uniform(-4, 0)
        delta = rng.uniform(0.01, 2 * float(mp.pi))
        t_x, s_x = tx_sx(d, mu1, mp.mpf(delta))
        rows.append(dict(distance_km=d, mu1=mu1, delta=delta, t_x=f(t_x), s_x=f(s_x)))
    out["tx_sx"] = rows

    rows = []
    for _ in range(20):
        n = rng.randint(10, 10 ** 9)
        t = rng.uniform(1.0, n + 1.0)
        eps = 10 ** rng.uniform(-15, 0)
        rows.append(dict(n=n, t=t, eps_p=eps, margin=f(mp.sqrt((n - mp.mpf(t) + 1) * mp.log(1 / mp.mpf(eps)) / (2 * n * mp.mpf(t))))))
    out["serfling"] = rows

    rows = []
    for _ in range(20):
        x = 10 ** rng.uniform(-2, 12)
        xi = 10 ** rng.uniform(-15, -1)
        lo, hi = expected_bounds(x, xi)
        rlo, rhi = real_bounds(x, xi)
        rows.append(dict(x=x, xi=xi, expected_lower=f(lo), expected_upper=f(hi),
                         real_lower=None if rlo is None else f(rlo), real_upper=f(rhi)))
    out["chernoff"] = rows

    rows = []
    for _ in range(20):
        mu1 = 10 ** rng.uniform(-3, -0.5)
        mu2 = mu1 * rng.uniform(1.2, 8.0)
        s00 = 10 ** rng.uniform(-9, -6)
        s01 = 10 ** rng.uniform(-6, -2)
        s02 = s01 * rng.uniform(1.0, 6.0)
        s1 = (mu2 ** 2 * mp.e ** mu1 * s01 - mu1 ** 2 * mp.e ** mu2 * s02 - (mu2 ** 2 - mu1 ** 2) * s00) / (mu1 * mu2 * (mu2 - mu1))
        rows.append(dict(mu1=mu1, mu2=mu2, s00=s00, s01=s01, s02=s02, s1_raw=f(s1)))
    out["decoy"] = rows

    out["entropy"] = [dict(p=p, h2=f(h2(p))) for p in
                      [1e-300, 1e-12, 1e-6, 1e-3, 0.01, 0.02, 0.05, 0.1, 0.11, 0.2, 0.25, 0.3, 1 / 3, 0.4, 0.45, 0.49, 0.499, 0.5 - 1e-9, 0.5, 0.75]]

    rows = []
    for n, r in [(1, 0), (1, 1), (10, 3), (16, 2), (64, 8), (128, 0), (128, 64), (255, 100), (1000, 40),
                 (1000, 499), (1000, 500), (1000, 501), (4096, 300), (5000, 2500), (6000, 900), (8192, 1024),
                 (10000, 840), (20000, 1600), (30000, 9000), (40000, 3300)]:
        rows.append(dict(n=n, r=r, log2_size=f(log2_ball(n, r))))
    out["ball"] = rows

    rows = []
    pts = [
        (100, 1e10, 0.5, 0.1, 0.3, 0.04, 0.8, 0.2, 0.7),
        (300, 1e11, 0.5, 0.1, 0.3, 0.04, 0.8, 0.2, 0.7),
        (50, 1e9, 0.3, 0.05, 0.4, 0.02, 0.7, 0.2, 0.5),
        (200, 1e12, 0.6, 0.2, 0.8, 0.08, 0.9, 0.2, 0.3),
    ]
    for d, N, mu, mu1, mu2, q, pz, p0, p1 in pts:
        r = pipeline(d, N, mu, mu1, mu2, q, pz, p0, p1, "1e-12", "1e-10")
        row = dict(distance_km=d, N=N, mu=mu, mu1=mu1, mu2=mu2, q=q, p_z=pz, p0=p0, p1=p1)
        row.update({k: (v if isinstance(v, int) else f(v)) for k, v in r.items()})
        rows.append(row)
    out["pipeline"] = rows

    with open("fixtures.json", "w") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
