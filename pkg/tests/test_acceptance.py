"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see every line. Monte
Carlo criteria run at fixed master seeds so the whole suite is
deterministic; the estimators behind them are unbiased and are checked as
such in the unit tests.
"""

import time

import numpy as np
import pytest

from collarlab import (
    BandRegion,
    BoxRegion,
    Disc,
    EllipseBandF,
    ShiftedDiscFamily,
    TwoLevelDensity,
    bracket_cover,
    brownian_field,
    derivative_deficit,
    excess_mass,
    make_schedule,
    measure_derivative_check,
    neighborhood_area,
    q_covariance,
    sample_ambient,
    sband,
    shatter_check,
    statement_a_statistic,
    statement_b_test,
    sup_functional_test,
    tv_distance,
    uniform_density,
    unit_square,
    upper_half,
)

DISC = Disc()
SQUARE = unit_square()
UNIFORM = uniform_density(2.0)


def report(num, name, passed, detail=""):
    mark = "PASS" if passed else "FAIL"
    line = f"[{mark}] criterion {num:2d} ({name})"
    if detail:
        line += f": {detail}"
    print(line)
    assert passed, line


def test_criterion_01_disc_tv_law():
    t0 = time.time()
    devs = {}
    for eps in (0.2, 0.1, 0.05):
        devs[eps] = abs(tv_distance(UNIFORM, DISC, eps) - eps / 4.0)
    ok = all(d <= 2e-3 for d in devs.values()) and time.time() - t0 < 10
    report(1, "disc TV law eps/4", ok,
           "max dev " + format(max(devs.values()), ".2e"))


def test_criterion_02_steiner_areas():
    t0 = time.time()
    disc_ok = all(
        abs(neighborhood_area(DISC, e) - 4 * np.pi * e) <= 1e-9
        for e in (0.2, 0.1, 0.05, 0.01)
    )
    rng = np.random.default_rng(0)
    lo, hi = -0.12, 1.12
    hits = 0
    total = 10**7
    for _ in range(10):
        pts = rng.uniform(lo, hi, size=(total // 10, 2))
        x, y = pts[:, 0], pts[:, 1]
        inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
        inner = np.minimum.reduce([x, 1 - x, y, 1 - y])
        outer = np.hypot(
            np.maximum(np.maximum(-x, x - 1), 0.0),
            np.maximum(np.maximum(-y, y - 1), 0.0),
        )
        dist = np.where(inside, inner, outer)
        hits += int(np.count_nonzero(dist <= 0.1))
    mc = hits / total * (hi - lo) ** 2
    closed = neighborhood_area(SQUARE, 0.1)
    square_ok = abs(closed - mc) <= 0.01 * mc
    ok = disc_ok and square_ok and time.time() - t0 < 30
    report(2, "Steiner collar areas", ok,
           f"square closed {closed:.6f} vs MC {mc:.6f}")


def test_criterion_03_differentiation_in_measure():
    t0 = time.time()
    family = ShiftedDiscFamily(DISC, 0.5)
    band = family.limit_band()
    eps_grid = (0.1, 0.05, 0.025, 0.0125)
    deficits = [derivative_deficit(family, band, e) for e in eps_grid]
    decreasing = all(a > b for a, b in zip(deficits, deficits[1:]))
    quartered = deficits[-1] < deficits[0] / 4.0
    rows = measure_derivative_check(family, band, UNIFORM, [0.01])
    _, ratio, mp_b = rows[0]
    ratio_ok = abs(ratio - mp_b) <= 0.02 * mp_b
    ok = decreasing and quartered and ratio_ok and time.time() - t0 < 60
    report(3, "differentiation in measure", ok,
           "deficits " + " ".join(f"{d:.4f}" for d in deficits)
           + f"; ratio {ratio:.5f} vs {mp_b:.5f}")


MASTER_SEED_B = 2  # fixed replication stream for criteria 4 and 5
_statement_b_cache = {}


def _statement_b_run():
    if "rep" not in _statement_b_cache:
        regions = [upper_half(), BoxRegion([(-1.0, 1.0)], [(0.0, np.pi)])]
        _statement_b_cache["rep"] = statement_b_test(
            DISC, UNIFORM, 10**5, 0.05, regions, reps=1000,
            master_seed=MASTER_SEED_B,
        )
    return _statement_b_cache["rep"]


def test_criterion_04_statement_b_marginal():
    t0 = time.time()
    rep = _statement_b_run()
    row = rep["per_region"][0]
    mean_ok = -0.05 <= row["mean"] <= 0.05
    var_ok = abs(row["var"] - 0.5) <= 0.05 * 0.5
    ks_ok = row["ks"] <= 0.06
    ok = mean_ok and var_ok and ks_ok and time.time() - t0 < 180
    report(4, "statement (b) marginal", ok,
           f"mean {row['mean']:.4f} var {row['var']:.4f} ks {row['ks']:.4f}")


def test_criterion_05_covariance_structure():
    t0 = time.time()
    rep = _statement_b_run()
    emp = rep["cov_empirical"][0][1]
    target = rep["cov_target"][0][1]
    assert target == pytest.approx(0.25, abs=1e-9)
    ok = abs(emp - target) <= 0.02 and time.time() - t0 < 180
    report(5, "covariance Q(B and B')", ok,
           f"emp {emp:.4f} target {target:.4f}")


def test_criterion_06_statement_a():
    t0 = time.time()
    grid = np.linspace(-0.25, 0.25, 7)
    rep = statement_a_statistic(
        DISC, UNIFORM, make_schedule([10**3, 10**4, 10**5], eps0=0.5),
        radial=grid, shift_x=grid, shift_y=grid, reps=200, master_seed=0,
    )
    ok = rep["non_increasing"] and rep["halved"] and time.time() - t0 < 600
    report(6, "statement (a) sup pairs", ok,
           "medians " + " ".join(f"{v:.4f}" for v in rep["medians"]))


def _supfun_regions():
    regs = [sband([iv]) for iv in [(0, 1), (-1, 0), (-0.5, 0.5), (0.25, 0.75),
                                   (-0.75, -0.25), (-0.25, 0.25), (0.5, 1),
                                   (-1, -0.5)]]
    regs += [BoxRegion([(-1, 1)], [t]) for t in
             [(0, np.pi / 2), (np.pi / 2, np.pi), (np.pi, 2 * np.pi),
              (0, np.pi)]]
    regs += [BandRegion(EllipseBandF(*p)) for p in
             [(0, 0, 0, 0.5, 0), (0, 0, 0.5, 0, 0), (0.3, 0, 0, 0.4, 0),
              (-0.2, 0, 0.6, 0, 0)]]
    return regs


def test_criterion_07_continuous_mapping():
    t0 = time.time()
    rep = sup_functional_test(
        DISC, UNIFORM, 10**5, 0.05, _supfun_regions(), reps=1000, draws=1000,
        master_seed=0,
    )
    ok = rep["ks"] <= 0.08 and time.time() - t0 < 300
    report(7, "sup functional two-sample KS", ok, f"ks {rep['ks']:.4f}")


def test_criterion_08_brownian_sampler():
    t0 = time.time()
    regs = _supfun_regions()[:4] + _supfun_regions()[8:12]
    cov = q_covariance(regs, UNIFORM, DISC)
    draw = brownian_field(regs, UNIFORM, DISC, seed=0, draws=5000, cov=cov)
    emp = (draw.values.T @ draw.values) / 5000
    dev = float(np.max(np.abs(emp - cov)))
    ok = dev <= 0.02 and time.time() - t0 < 60
    report(8, "Brownian sampler covariance", ok, f"max dev {dev:.4f}")


def test_criterion_09_vc_shattering():
    t0 = time.time()
    four = [(0.1, -0.5), (1.0, -0.1), (2.0, 0.3), (3.0, 0.8)]
    five = [(0.1, -0.8), (1.0, -0.4), (2.0, 0.05), (3.0, 0.45), (4.0, 0.9)]
    ok = (
        shatter_check("sband", four)
        and not shatter_check("sband", five)
        and time.time() - t0 < 10
    )
    report(9, "VC shattering of s-interval bands", ok)


def test_criterion_10_bracketing():
    t0 = time.time()
    cover = bracket_cover("interval_bands", 0.5, UNIFORM, DISC, 0.1)
    sized = bool(np.max(cover.sizes) <= 0.5)
    counted = cover.count <= 9**4
    rng = np.random.default_rng(0)
    tt = rng.uniform(0, 2 * np.pi, 500)
    ss = rng.uniform(-1, 1, 500)
    covered = True
    for _ in range(1000):
        p = np.sort(rng.uniform(-1, 1, 4))
        lower, upper = cover.brackets[cover.bracket_for(p)]
        member = sband([(p[0], p[1]), (p[2], p[3])]).contains(tt, ss)
        lo, hi = lower.contains(tt, ss), upper.contains(tt, ss)
        if np.any(lo & ~member) or np.any(member & ~hi) or np.any(lo & ~hi):
            covered = False
            break
    ok = sized and counted and covered and time.time() - t0 < 30
    report(10, "bracketing cover", ok,
           f"count {cover.count} <= {9**4}, max size "
           f"{float(np.max(cover.sizes)):.4f}")


def test_criterion_11_excess_mass_recovery():
    t0 = time.time()
    c_out = 1.0 / (16.0 + np.pi)
    dens = TwoLevelDensity(2.0 * c_out, c_out, 2.0)
    lam = (dens.c_in + dens.c_out) / 2.0
    pop = excess_mass(None, lam, mode="population", body=DISC, dens=dens)
    pop_ok = pop.center == (0.0, 0.0) and pop.radius == 1.0
    hits = 0
    for k in range(20):
        pts = sample_ambient(DISC, dens, 10**5, seed=1000 + k)
        fit = excess_mass(pts, lam, mode="sample")
        hits += int(
            abs(fit.center[0]) <= 0.05
            and abs(fit.center[1]) <= 0.05
            and abs(fit.radius - 1.0) <= 0.05
        )
    ok = pop_ok and hits >= 18 and time.time() - t0 < 300
    report(11, "excess-mass recovery", ok,
           f"population exact {pop_ok}, sample {hits}/20")
