"""Command-line front end.

Each subcommand loads an optional config file, applies flag overrides, runs
the corresponding experiment, writes a JSON report plus CSV tables and
matplotlib figures into the output directory, and prints one summary line
per criterion. Exit codes: 0 all criteria pass, 1 a criterion failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from . import reporting as rpt
from .empirical import (
    make_schedule,
    sample_ambient,
    sample_conditional,
    validate_schedule,
)
from .entropy import bracket_cover, shatter_check
from .errors import CollarLabError
from .families import DiscElement, EllipseBandF, ShiftedDiscFamily
from .fileio import (
    ConfigError,
    body_from_dict,
    body_to_dict,
    density_from_dict,
    family_from_dict,
    load_config,
    region_from_dict,
    schedule_from_dict,
    write_csv,
    write_report,
)
from .geometry import collar_areas, local_reach, neighborhood_area
from .measures import (
    TwoLevelDensity,
    derivative_deficit,
    measure_derivative_check,
    mp_measure,
    neighborhood_mass,
    q_measure,
    qn_measure,
    tv_distance,
)
from .regions import BandRegion, BoxRegion, FullRegion, sband
from .verify import (
    ChangeSetModel,
    changeset_counts,
    changeset_loglik,
    excess_mass,
    lens_area,
    min_volume_set,
    statement_a_generic,
    statement_a_statistic,
    statement_b_test,
    sup_functional_test,
)

DEFAULT_EPS_SWEEP = (0.2, 0.1, 0.05, 0.025)


def _add_common(sub):
    sub.add_argument("--config", help="JSON or TOML config file")
    sub.add_argument("--seed", type=int, default=None, help="master seed")
    sub.add_argument("--reps", type=int, default=None)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--eps", type=float, default=None)
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--grid", type=int, default=None, help="grid resolution")
    sub.add_argument("--jobs", type=int, default=1)


def _context(args, default_out):
    cfg = load_config(args.config) if args.config else {}
    body = body_from_dict(cfg.get("body", {"shape": "disc"}))
    dens = density_from_dict(cfg.get("density", {"model": "uniform", "R": 2.0}), body)
    dens.validate(body)
    seed = args.seed if args.seed is not None else int(cfg.get("master_seed", 0))
    out = Path(args.out or cfg.get("out", f"reports/{default_out}"))
    return cfg, body, dens, seed, out


def _finish(out, name, report, lines):
    path = write_report(out / f"{name}.json", report)
    for line in lines:
        print(line)
    print(f"report: {path}")
    return 0 if report.get("all_pass", True) else 1


# ---------------------------------------------------------------------------


def cmd_geometry(args) -> int:
    cfg, body, dens, seed, out = _context(args, "geometry")
    eps = args.eps if args.eps is not None else float(cfg.get("eps", 0.1))
    thetas = np.linspace(0.0, body.perimeter, 256, endpoint=False)
    reaches = [local_reach(body, t) for t in thetas]
    outer, inner = collar_areas(body, eps)
    sample = sample_conditional(body, dens, eps, 2000, seed=seed)
    report = {
        "body": body_to_dict(body),
        "eps": eps,
        "perimeter": body.perimeter,
        "area": body.area,
        "inradius": body.inradius,
        "collar_area": neighborhood_area(body, eps),
        "collar_area_outer": outer,
        "collar_area_inner": inner,
        "collar_mass": neighborhood_mass(body, dens, eps),
        "master_seed": seed,
        "all_pass": True,
    }
    write_csv(out / "reach.csv", ["theta", "local_reach"],
              list(zip(thetas.tolist(), reaches)))
    from .geometry import unmagnify_many

    pts, _ = unmagnify_many(body, eps, sample.thetas(), sample.ss(),
                            on_corner="mask")
    rpt.fig_body_collar(body, eps, out / "collar.png", points=pts,
                        title=f"collar eps={eps}")
    lines = [
        f"perimeter = {rpt.fmt(report['perimeter'])}",
        f"inradius = {rpt.fmt(report['inradius'])}",
        f"collar_area = {rpt.fmt(report['collar_area'])}",
        f"collar_mass = {rpt.fmt(report['collar_mass'])}",
    ]
    return _finish(out, "geometry", report, lines)


def cmd_measure(args) -> int:
    cfg, body, dens, seed, out = _context(args, "measure")
    eps = args.eps if args.eps is not None else float(cfg.get("eps", 0.1))
    region_spec = cfg.get("region")
    region = region_from_dict(region_spec, body) if region_spec else FullRegion()
    quantity = args.quantity
    report = {
        "quantity": quantity,
        "body": body_to_dict(body),
        "eps": eps,
        "all_pass": True,
    }
    lines = []
    if quantity == "tv":
        sweep = [float(e) for e in cfg.get("eps_sweep", DEFAULT_EPS_SWEEP)]
        if eps not in sweep:
            sweep = sorted(set(sweep + [eps]), reverse=True)
        values = {e: tv_distance(dens, body, e) for e in sweep}
        report["tv"] = {str(e): v for e, v in values.items()}
        report["tv_at_eps"] = values[eps]
        report["decreasing"] = bool(
            all(values[a] > values[b] for a, b in zip(sweep, sweep[1:]))
        )
        report["all_pass"] = report["decreasing"]
        write_csv(out / "tv.csv", ["eps", "tv"], sorted(values.items()))
        rpt.fig_curve(
            list(values.keys()), list(values.values()), "eps", "tv",
            out / "tv.png", label="tv(Q_n, Q)", logx=True, logy=True,
        )
        lines.append(f"tv(eps={rpt.fmt(eps)}) = {rpt.fmt(report['tv_at_eps'])}")
        lines.append(rpt.criterion_line("tv decreasing in eps", report["decreasing"]))
    else:
        if quantity == "mp":
            value = mp_measure(region, dens, body)
        elif quantity == "q":
            value = q_measure(region, dens, body)
        elif quantity == "qn":
            value = qn_measure(region, dens, body, eps)
        else:
            value = neighborhood_mass(body, dens, eps)
        report["value"] = float(value)
        write_csv(out / "measure.csv", ["quantity", "eps", "value"],
                  [(quantity, eps, float(value))])
        lines.append(f"{quantity} = {rpt.fmt(report['value'])}")
    return _finish(out, "measure", report, lines)


def cmd_derivative(args) -> int:
    cfg, body, dens, seed, out = _context(args, "derivative")
    delta = float(cfg.get("delta", 0.5))
    eps_grid = [float(e) for e in cfg.get("eps_grid", (0.1, 0.05, 0.025, 0.0125))]
    ratio_grid = [float(e) for e in cfg.get("ratio_grid", (0.04, 0.02, 0.01))]
    family = ShiftedDiscFamily(body, delta)
    band = family.limit_band()
    res = args.grid or 2048
    deficits = [derivative_deficit(family, band, e, resolution=(res, res))
                for e in eps_grid]
    rows = measure_derivative_check(family, band, dens, ratio_grid)
    decreasing = bool(all(a > b for a, b in zip(deficits, deficits[1:])))
    quartered = bool(deficits[-1] < deficits[0] / 4.0)
    final_dev = abs(rows[-1][1] - rows[-1][2]) / rows[-1][2]
    ratio_ok = bool(final_dev <= 0.02)
    report = {
        "delta": delta,
        "eps_grid": eps_grid,
        "deficits": deficits,
        "ratio_rows": [list(r) for r in rows],
        "mp_band": rows[0][2],
        "final_ratio_rel_dev": final_dev,
        "decreasing": decreasing,
        "quartered": quartered,
        "ratio_ok": ratio_ok,
        "all_pass": decreasing and quartered and ratio_ok,
    }
    write_csv(out / "deficits.csv", ["eps", "deficit"],
              list(zip(eps_grid, deficits)))
    write_csv(out / "ratios.csv", ["eps", "prob_over_eps", "mp_band"],
              [list(r) for r in rows])
    rpt.fig_curve(eps_grid, deficits, "eps", "M(tau A xor B)",
                  out / "deficit.png", label="deficit", logx=True, logy=True)
    lines = [
        rpt.criterion_line("deficit strictly decreasing", decreasing,
                           " ".join(rpt.fmt(d) for d in deficits)),
        rpt.criterion_line("deficit(last) < deficit(first)/4", quartered),
        rpt.criterion_line(
            "P(A(eps))/eps matches M_p(B) within 2%", ratio_ok,
            f"rel dev {rpt.fmt(final_dev)}"),
    ]
    return _finish(out, "derivative", report, lines)


def cmd_classes(args) -> int:
    cfg, body, dens, seed, out = _context(args, "classes")
    eps = args.eps if args.eps is not None else float(cfg.get("eps", 0.1))
    delta = float(cfg.get("delta", 0.5))
    cover = bracket_cover("interval_bands", delta, dens, body, eps)
    rng = np.random.default_rng(seed)
    covered = 0
    probes = 1000
    theta_probe = rng.uniform(0.0, body.perimeter, 400)
    s_probe = rng.uniform(-1.0, 1.0, 400)
    for _ in range(probes):
        p = np.sort(rng.uniform(-1.0, 1.0, 4))
        lower, upper = cover.brackets[cover.bracket_for(p)]
        member = sband([(p[0], p[1]), (p[2], p[3])]).contains(theta_probe, s_probe)
        lo = lower.contains(theta_probe, s_probe)
        hi = upper.contains(theta_probe, s_probe)
        if not (np.any(lo & ~member) or np.any(member & ~hi)):
            covered += 1
    pts4 = [(0.1, -0.5), (1.0, -0.1), (2.0, 0.3), (3.0, 0.8)]
    pts5 = [(0.1, -0.8), (1.0, -0.4), (2.0, 0.05), (3.0, 0.45), (4.0, 0.9)]
    shatter4 = shatter_check("sband", pts4)
    shatter5 = shatter_check("sband", pts5)
    sized = bool(np.max(cover.sizes) <= delta + 1e-9)
    report = {
        "delta": delta,
        "eps": eps,
        "bracket_count": cover.count,
        "bracket_max_size": float(np.max(cover.sizes)),
        "count_bound": int((np.ceil(2.0 / delta**2) + 1) ** 4),
        "covered": covered,
        "probes": probes,
        "shatter_4pt": bool(shatter4),
        "shatter_5pt_alternating": bool(shatter5),
        "bracket_set": cover.to_jsonable(),
        "master_seed": seed,
    }
    report["all_pass"] = (
        sized
        and cover.count <= report["count_bound"]
        and covered == probes
        and shatter4
        and not shatter5
    )
    write_csv(out / "brackets.csv", ["index", "size"],
              list(enumerate(cover.sizes.tolist())))
    rpt.fig_curve(
        np.arange(cover.count), np.sort(cover.sizes), "bracket (sorted)",
        "d_n size", out / "bracket_sizes.png", label=f"delta={delta}",
    )
    lines = [
        rpt.criterion_line(
            f"bracket count {report['bracket_count']} <= {report['count_bound']}",
            cover.count <= report["count_bound"]),
        rpt.criterion_line(
            f"bracket sizes <= delta={rpt.fmt(delta)}", sized,
            f"max {rpt.fmt(report['bracket_max_size'])}"),
        rpt.criterion_line(
            f"coverage probe {covered}/{probes}", covered == probes),
        rpt.criterion_line("sband shatters 4 points", shatter4),
        rpt.criterion_line("sband fails alternating 5", not shatter5),
    ]
    return _finish(out, "classes", report, lines)


def _default_b_regions(body):
    return [
        sband([(0.0, 1.0)]),
        sband([(-1.0, 0.0)]),
        sband([(-0.5, 0.5)]),
        BoxRegion([(-1.0, 1.0)], [(0.0, body.perimeter / 2.0)]),
        BandRegion(EllipseBandF(0.0, 0.0, 0.0, 0.5, 0.0, body.perimeter)),
        BandRegion(EllipseBandF(0.0, 0.0, 0.5, 0.0, 0.0, body.perimeter)),
    ]


def cmd_clt(args) -> int:
    cfg, body, dens, seed, out = _context(args, "clt")
    a_cfg = cfg.get("statement_a", {})
    b_cfg = cfg.get("statement_b", {})
    reps_a = args.reps or int(a_cfg.get("reps", 200))
    reps_b = args.reps or int(b_cfg.get("reps", 1000))
    schedule = (
        schedule_from_dict(a_cfg["schedule"])
        if "schedule" in a_cfg
        else make_schedule([10**3, 10**4, 10**5], eps0=0.5)
    )
    validate_schedule(body, schedule)
    if "family" in a_cfg:
        kind, grids = family_from_dict(a_cfg["family"])
    else:
        kind, grids = "ellipse_symmdiff", None
    if kind == "interval_bands":
        from .families import IntervalBandsElement, tau_image

        limits = [BoxRegion([p[:2], p[2:]]) for p in grids["params"]]

        def moving_fn(eps):
            return [
                tau_image(IntervalBandsElement(body, *p, eps), body, eps)
                for p in grids["params"]
            ]

        rep_a = statement_a_generic(
            body, dens, schedule, moving_fn, limits, reps=reps_a,
            master_seed=seed, jobs=args.jobs,
        )
        rep_a.setdefault("grid_size", len(limits))
        medians = rep_a["medians"]
        rep_a["non_increasing"] = bool(
            all(b <= a + 1e-12 for a, b in zip(medians, medians[1:]))
        )
        # the moving class equals its limit class here, so the gap is null
        rep_a["halved"] = bool(medians[-1] <= max(0.5 * medians[0], 1e-12))
    else:
        grid_pts = args.grid or int(a_cfg.get("grid_points", 7))
        half = float(a_cfg.get("grid_halfwidth", 0.25))
        if grids is not None:
            radial, shift_x, shift_y = (
                grids["radial"], grids["shift_x"], grids["shift_y"]
            )
        else:
            radial = shift_x = shift_y = np.linspace(-half, half, grid_pts)
        rep_a = statement_a_statistic(
            body, dens, schedule, radial, shift_x, shift_y,
            reps=reps_a, master_seed=seed, jobs=args.jobs,
        )
    n_b = args.n or int(b_cfg.get("n", 10**5))
    eps_b = args.eps or float(b_cfg.get("eps", 0.05))
    regions = [
        region_from_dict(spec, body) for spec in b_cfg.get("regions", [])
    ] or _default_b_regions(body)
    # the dev is a max over the whole covariance matrix, so the default
    # tolerance is wider than the single-pair acceptance tolerance
    rep_b = statement_b_test(
        body, dens, n_b, eps_b, regions, reps=reps_b, master_seed=seed,
        cov_atol=float(b_cfg.get("cov_atol", 0.07)), jobs=args.jobs,
    )
    a_pass = rep_a["non_increasing"] and rep_a["halved"]
    b_pass = (
        rep_b["frac_ks_fail"] <= 0.10
        and rep_b["cov_ok"]
        and all(r["mean_ok"] for r in rep_b["per_region"])
    )
    report = {
        "statement_a": {k: v for k, v in rep_a.items() if k != "per_n"}
        | {"per_n": [{k: v for k, v in row.items() if k != "sups"}
                     for row in rep_a["per_n"]]},
        "statement_b": rep_b,
        "a_pass": bool(a_pass),
        "b_pass": bool(b_pass),
        "all_pass": bool(a_pass and b_pass),
        "master_seed": seed,
    }
    rows = []
    for row in rep_a["per_n"]:
        for r, s in enumerate(row["sups"]):
            rows.append((row["n"], row["eps"], r, s))
    write_csv(out / "statement_a.csv", ["n", "eps", "rep", "sup_pair_gap"], rows)
    write_csv(
        out / "statement_b.csv",
        ["region", "mean", "var", "q_var", "ks"],
        [(r["index"], r["mean"], r["var"], r["q_var"], r["ks"])
         for r in rep_b["per_region"]],
    )
    ns = [row["n"] for row in rep_a["per_n"]]
    rpt.fig_curve(ns, rep_a["medians"], "n", "median sup gap",
                  out / "statement_a.png", label="median", logx=True,
                  logy=all(v > 0 for v in rep_a["medians"]))
    rpt.fig_heatmap(rep_b["cov_empirical"], out / "covariance.png",
                    title="empirical covariance")
    lines = [
        rpt.criterion_line(
            "statement (a) medians non-increasing and halved", a_pass,
            " ".join(rpt.fmt(v) for v in rep_a["medians"])),
        rpt.criterion_line(
            "statement (b) KS/cov/mean", b_pass,
            f"frac_ks_fail {rpt.fmt(rep_b['frac_ks_fail'])}, "
            f"cov dev {rpt.fmt(rep_b['cov_max_abs_dev'])}"),
    ]
    return _finish(out, "clt", report, lines)


def cmd_supfun(args) -> int:
    cfg, body, dens, seed, out = _context(args, "supfun")
    n = args.n or int(cfg.get("n", 10**5))
    eps = args.eps or float(cfg.get("eps", 0.05))
    reps = args.reps or int(cfg.get("reps", 1000))
    draws = int(cfg.get("draws", reps))
    regions = [
        region_from_dict(spec, body) for spec in cfg.get("regions", [])
    ] or _default_supfun_regions(body)
    rep = sup_functional_test(
        body, dens, n, eps, regions, reps=reps, draws=draws, master_seed=seed,
        jobs=args.jobs,
    )
    threshold = float(cfg.get("ks_threshold", 0.08))
    passed = rep["ks"] <= threshold
    report = {
        "ks": rep["ks"],
        "pvalue": rep["pvalue"],
        "threshold": threshold,
        "n": n,
        "eps": eps,
        "reps": reps,
        "draws": draws,
        "n_regions": len(regions),
        "master_seed": seed,
        "all_pass": bool(passed),
    }
    write_csv(out / "sup_vn.csv", ["rep", "sup_abs_vn"],
              list(enumerate(rep["sup_vn"])))
    write_csv(out / "sup_w.csv", ["draw", "sup_abs_w"],
              list(enumerate(rep["sup_w"])))
    rpt.fig_ecdf_pair(rep["sup_vn"], rep["sup_w"], ("sup |v_n|", "sup |W|"),
                      out / "supfun.png")
    lines = [
        rpt.criterion_line(
            f"two-sample KS <= {rpt.fmt(threshold)}", passed,
            f"ks {rpt.fmt(rep['ks'])}"),
    ]
    return _finish(out, "supfun", report, lines)


def _default_supfun_regions(body):
    regs = [sband([iv]) for iv in [(0, 1), (-1, 0), (-0.5, 0.5), (0.25, 0.75),
                                   (-0.75, -0.25), (-0.25, 0.25), (0.5, 1),
                                   (-1, -0.5)]]
    per = body.perimeter
    regs += [BoxRegion([(-1, 1)], [t]) for t in
             [(0, per / 4), (per / 4, per / 2), (per / 2, per), (0, per / 2)]]
    regs += [BandRegion(EllipseBandF(*p, perimeter=per)) for p in
             [(0, 0, 0, 0.5, 0), (0, 0, 0.5, 0, 0), (0.3, 0, 0, 0.4, 0),
              (-0.2, 0, 0.6, 0, 0)]]
    return regs


def cmd_changeset(args) -> int:
    cfg, body, dens, seed, out = _context(args, "changeset")
    n = args.n or int(cfg.get("n", 10**4))
    eps = args.eps or float(cfg.get("eps", 0.05))
    reps = args.reps or int(cfg.get("reps", 200))
    delta = float(cfg.get("delta", 0.5))
    mu2 = float(cfg.get("mark_shift", 0.5))
    model = ChangeSetModel(
        body,
        lambda e: DiscElement(body.center + np.array([delta * e, 0.0]),
                              body.radius),
        stats.norm(0.0, 1.0),
        stats.norm(mu2, 1.0),
    )
    rows = []
    from .empirical import rep_rng

    for r in range(reps):
        rng = rep_rng(seed, r)
        pts = sample_ambient(body, dens, n, rng=rng)
        in_k = body.contains(pts)
        marks = np.where(in_k, rng.normal(mu2, 1.0, n), rng.normal(0.0, 1.0, n))
        k_eps = model.k_eps(eps)
        added, removed = changeset_counts(pts, body, k_eps)
        ll = changeset_loglik(pts, marks, model, eps)
        rows.append((r, added, removed, ll))
    added = np.array([r[1] for r in rows], dtype=float)
    removed = np.array([r[2] for r in rows], dtype=float)
    lens = lens_area(delta * eps, body.radius, body.radius)
    sliver = np.pi * body.radius**2 - lens
    p_out = float(dens.density_at(body, np.array([[body.radius + 1e-9, 0.0]]))[0])
    p_in = float(dens.density_at(body, np.array([[0.0, 0.0]]))[0])
    expected_added = n * p_out * sliver
    expected_removed = n * p_in * sliver
    se_added = float(np.sqrt(expected_added / reps))
    add_ok = bool(abs(added.mean() - expected_added) <= 5 * se_added)
    report = {
        "n": n, "eps": eps, "delta": delta, "reps": reps,
        "mean_added": float(added.mean()),
        "mean_removed": float(removed.mean()),
        "expected_added": expected_added,
        "expected_removed": expected_removed,
        "mean_loglik": float(np.mean([r[3] for r in rows])),
        "master_seed": seed,
        "all_pass": add_ok,
    }
    write_csv(out / "changeset.csv", ["rep", "added", "removed", "loglik"], rows)
    rpt.fig_hist_vs_normal(
        np.array([r[3] for r in rows]) - np.mean([r[3] for r in rows]),
        max(np.std([r[3] for r in rows]), 1e-12),
        out / "loglik.png", title="centered change-set log-likelihood",
    )
    lines = [
        f"mean added = {rpt.fmt(report['mean_added'])} "
        f"(expected {rpt.fmt(expected_added)})",
        f"mean removed = {rpt.fmt(report['mean_removed'])} "
        f"(expected {rpt.fmt(expected_removed)})",
        rpt.criterion_line("added-count calibration", add_ok),
    ]
    return _finish(out, "changeset", report, lines)


def cmd_excess_mass(args) -> int:
    cfg, body, dens, seed, out = _context(args, "excess-mass")
    if isinstance(dens, TwoLevelDensity) and dens.c_in == dens.c_out:
        c_out = 1.0 / (16.0 + np.pi)
        dens = TwoLevelDensity(2.0 * c_out, c_out, 2.0)
    lam = float(cfg.get("lam", (dens.c_in + dens.c_out) / 2.0))
    n = args.n or int(cfg.get("n", 10**5))
    seeds = args.reps or int(cfg.get("seeds", 20))
    pop = excess_mass(None, lam, mode="population", body=body, dens=dens)
    pop_exact = (
        np.allclose(pop.center, body.center, atol=1e-12)
        and abs(pop.radius - body.radius) < 1e-12
    )
    rows, hits = [], 0
    for k in range(seeds):
        pts = sample_ambient(body, dens, n, seed=seed + 1000 + k)
        fit = excess_mass(pts, lam, mode="sample")
        ok = (
            abs(fit.center[0] - body.center[0]) <= 0.05
            and abs(fit.center[1] - body.center[1]) <= 0.05
            and abs(fit.radius - body.radius) <= 0.05
        )
        hits += ok
        rows.append((k, fit.center[0], fit.center[1], fit.radius,
                     fit.objective, int(ok)))
    need = int(np.ceil(0.9 * seeds))
    report = {
        "lam": lam, "n": n, "seeds": seeds,
        "population_center": list(pop.center),
        "population_radius": pop.radius,
        "population_exact": bool(pop_exact),
        "recovered": hits,
        "recovery_needed": need,
        "master_seed": seed,
        "all_pass": bool(pop_exact and hits >= need),
    }
    write_csv(out / "fits.csv",
              ["seed", "cx", "cy", "radius", "objective", "recovered"], rows)
    radii = np.linspace(0.7, 1.3, 61)
    centers = np.tile(body.center, (len(radii), 1))
    from .verify import _population_disc_mass

    landscape = _population_disc_mass(body, dens, centers, radii) \
        - lam * np.pi * radii**2
    rpt.fig_curve(radii, landscape, "radius", "excess mass objective",
                  out / "landscape.png", label="population objective")
    lines = [
        rpt.criterion_line("population recovery exact on grid", pop_exact,
                           f"center {pop.center} radius {rpt.fmt(pop.radius)}"),
        rpt.criterion_line(
            f"sample recovery {hits}/{seeds} (need {need})", hits >= need),
    ]
    return _finish(out, "excess-mass", report, lines)


def cmd_min_volume(args) -> int:
    cfg, body, dens, seed, out = _context(args, "min-volume")
    if isinstance(dens, TwoLevelDensity) and dens.c_in == dens.c_out:
        c_out = 1.0 / (16.0 + np.pi)
        dens = TwoLevelDensity(2.0 * c_out, c_out, 2.0)
    alpha = float(cfg.get("alpha", 0.9 * dens.c_in * np.pi * body.radius**2))
    n = args.n or int(cfg.get("n", 10**5))
    stages = int(cfg.get("stages", 5))
    pop = min_volume_set(None, alpha, mode="population", body=body, dens=dens,
                         stages=stages)
    pts = sample_ambient(body, dens, n, seed=seed + 1)
    fit = min_volume_set(pts, alpha, mode="sample", stages=stages)
    target_r = float(np.sqrt(alpha / (np.pi * dens.c_in)))
    pop_ok = bool(
        np.hypot(*(np.asarray(pop.center) - body.center)) <= 1e-9
        and abs(pop.radius - target_r) <= 0.02
    )
    report = {
        "alpha": alpha, "n": n,
        "population_center": list(pop.center),
        "population_radius": pop.radius,
        "population_area": pop.objective,
        "target_radius": target_r,
        "sample_center": list(fit.center),
        "sample_radius": fit.radius,
        "on_boundary": fit.on_boundary,
        "master_seed": seed,
        "all_pass": pop_ok,
    }
    write_csv(out / "minvol.csv",
              ["mode", "cx", "cy", "radius", "area"],
              [("population", *pop.center, pop.radius, pop.objective),
               ("sample", *fit.center, fit.radius, fit.objective)])
    radii = np.linspace(max(target_r - 0.2, 0.05), target_r + 0.2, 61)
    centers = np.tile(body.center, (len(radii), 1))
    from .verify import _population_disc_mass

    mass = _population_disc_mass(body, dens, centers, radii)
    rpt.fig_curve(radii, mass, "radius", "mass", out / "mass.png",
                  label="population mass", ref=np.full(len(radii), alpha),
                  ref_label=f"alpha={rpt.fmt(alpha)}")
    lines = [
        rpt.criterion_line(
            "population minimum-volume disc near-concentric at target radius",
            pop_ok,
            f"radius {rpt.fmt(pop.radius)} target {rpt.fmt(target_r)}"),
        f"sample radius = {rpt.fmt(report['sample_radius'])}",
    ]
    return _finish(out, "min-volume", report, lines)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collarlab",
        description="Local empirical processes in boundary collars: "
                    "experiments and verification suites.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    handlers = {
        "geometry": cmd_geometry,
        "derivative": cmd_derivative,
        "classes": cmd_classes,
        "clt": cmd_clt,
        "supfun": cmd_supfun,
        "changeset": cmd_changeset,
        "excess-mass": cmd_excess_mass,
        "min-volume": cmd_min_volume,
    }
    for name, fn in handlers.items():
        sub = subs.add_parser(name)
        _add_common(sub)
        sub.set_defaults(func=fn)

    sub = subs.add_parser("measure")
    sub.add_argument("quantity", choices=["mp", "q", "qn", "tv", "mass"])
    _add_common(sub)
    sub.set_defaults(func=cmd_measure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CollarLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
