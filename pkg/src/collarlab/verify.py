"""Verification suites: the two CLT statements, the sup functional, and the
set-parametric estimators (change-set statistics, excess mass, minimum
volume).

Suprema over set classes are always taken over explicit finite grids; the
pairing radius for the moving-class statement is the Hausdorff distance
between the discretized classes, computed, never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .empirical import (
    brownian_field,
    map_replications,
    neighborhood_mass,
    q_covariance,
    sample_conditional,
)
from .errors import DegenerateSolution, EmptyPairing, Infeasible
from .families import circle_perturbation_grid
from .geometry import ConvexBody, Disc, check_eps
from .measures import (
    TwoLevelDensity,
    band_collar_masses,
    band_d2_matrix,
    collar_prob,
)


def _band_member_counts(values_at_points, ss):
    member = ((ss > 0) & (ss <= values_at_points)) | (
        (ss <= 0) & (ss > values_at_points)
    )
    return member.sum(axis=-1)


def _circle_profiles(body: Disc, eps, centers, radii, thetas):
    """Stacked band profiles of circle perturbations; rows = elements."""
    ang = thetas / body.radius
    e = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    m = body.center + body.radius * e - centers[:, None, :]
    b = np.einsum("knj,nj->kn", m, e)
    c2 = np.einsum("knj,knj->kn", m, m) - radii[:, None] ** 2
    s_hi = (-b + np.sqrt(np.clip(b * b - c2, 0.0, None))) / eps
    return np.clip(s_hi, -1.0, 1.0)


def _trig_band_values(params, perimeter, thetas):
    """Stacked values of bands a + dx*cos + dy*sin; rows = (a, dx, dy)."""
    phi = 2.0 * np.pi * thetas / perimeter
    basis = np.stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    return np.asarray(params) @ basis


# ---------------------------------------------------------------------------
# statement (a): the moving class is uniformly close to the limit class


def statement_a_statistic(
    body,
    dens,
    schedule,
    radial,
    shift_x,
    shift_y,
    reps=200,
    master_seed=0,
    n_theta=2048,
    gamma=None,
    jobs=1,
):
    """Per-replication sup over admissible pairs of |v_n(B_n) - v_n(B)|.

    The moving class is the tau-image grid of circle perturbations of the
    disc; the limit class is the matching grid of trigonometric bands.
    """
    thetas = (np.arange(n_theta) + 0.5) * body.perimeter / n_theta
    per_n = []
    for n, eps in schedule:
        eps = check_eps(body, eps)
        elements, bands, params = circle_perturbation_grid(
            body, eps, radial, shift_x, shift_y
        )
        centers = np.stack([el.other.center for el in elements])
        radii = np.array([el.other.radius for el in elements])
        trig = np.array([(a0, dx, dy) for (a0, dx, dy) in params])
        moving = _circle_profiles(body, eps, centers, radii, thetas)
        limit = _trig_band_values(trig, body.perimeter, thetas)
        d_matrix = np.sqrt(
            np.clip(band_d2_matrix(moving, limit, thetas, dens, body), 0.0, None)
        )
        gamma_n = gamma if gamma is not None else float(
            max(d_matrix.min(axis=1).max(), d_matrix.min(axis=0).max())
        )
        pair_i, pair_j = np.nonzero(d_matrix <= gamma_n + 1e-12)
        if len(pair_i) == 0:
            raise EmptyPairing(f"no class pair within gamma_n={gamma_n}")
        a = neighborhood_mass(body, dens, eps)
        probs_moving = band_collar_masses(moving, thetas, dens, body, eps)
        probs_limit = band_collar_masses(limit, thetas, dens, body, eps)
        def one_rep(rng, r):
            total = int(rng.binomial(int(n), a))
            sample = sample_conditional(body, dens, eps, total, rng=rng)
            st, ss = sample.thetas(), sample.ss()
            g_at = _circle_profiles(body, eps, centers, radii, st)
            f_at = _trig_band_values(trig, body.perimeter, st)
            v_moving = (
                _band_member_counts(g_at, ss) - n * probs_moving
            ) / np.sqrt(n * a)
            v_limit = (
                _band_member_counts(f_at, ss) - n * probs_limit
            ) / np.sqrt(n * a)
            return float(np.max(np.abs(v_moving[pair_i] - v_limit[pair_j])))

        sups = np.array(map_replications(one_rep, reps, master_seed, jobs))
        per_n.append(
            {
                "n": int(n),
                "eps": float(eps),
                "gamma_n": float(gamma_n),
                "n_pairs": int(len(pair_i)),
                "median_sup": float(np.median(sups)),
                "q25": float(np.quantile(sups, 0.25)),
                "q75": float(np.quantile(sups, 0.75)),
                "sups": sups.tolist(),
            }
        )
    medians = [row["median_sup"] for row in per_n]
    return {
        "per_n": per_n,
        "medians": medians,
        "non_increasing": bool(
            all(b <= a + 1e-12 for a, b in zip(medians, medians[1:]))
        ),
        "halved": bool(medians[-1] <= 0.5 * medians[0]) if medians else False,
        "grid_size": len(radial) * len(shift_x) * len(shift_y),
        "reps": int(reps),
        "master_seed": int(master_seed),
    }


def statement_a_generic(
    body,
    dens,
    schedule,
    moving_regions_fn,
    limit_regions,
    reps=200,
    master_seed=0,
    gamma=None,
    jobs=1,
):
    """Statement (a) over arbitrary region grids.

    moving_regions_fn(eps) supplies the tau-image grid at each collar width;
    probabilities come from the collar quadrature rather than the band fast
    path, so this handles interval-band and raster grids too.
    """
    from .families import d_cross_matrix

    per_n = []
    for n, eps in schedule:
        eps = check_eps(body, eps)
        moving = list(moving_regions_fn(eps))
        d_matrix = d_cross_matrix(moving, limit_regions, dens, body)
        gamma_n = gamma if gamma is not None else float(
            max(d_matrix.min(axis=1).max(), d_matrix.min(axis=0).max())
        )
        pair_i, pair_j = np.nonzero(d_matrix <= gamma_n + 1e-12)
        if len(pair_i) == 0:
            raise EmptyPairing(f"no class pair within gamma_n={gamma_n}")
        a = neighborhood_mass(body, dens, eps)
        probs_moving = np.array(
            [collar_prob(r, dens, body, eps) for r in moving]
        )
        probs_limit = np.array(
            [collar_prob(r, dens, body, eps) for r in limit_regions]
        )
        def one_rep(rng, r):
            total = int(rng.binomial(int(n), a))
            sample = sample_conditional(body, dens, eps, total, rng=rng)
            tt, ss = sample.thetas(), sample.ss()
            counts_m = np.array(
                [np.count_nonzero(reg.contains(tt, ss)) for reg in moving],
                dtype=float,
            )
            counts_l = np.array(
                [np.count_nonzero(reg.contains(tt, ss)) for reg in limit_regions],
                dtype=float,
            )
            v_m = (counts_m - n * probs_moving) / np.sqrt(n * a)
            v_l = (counts_l - n * probs_limit) / np.sqrt(n * a)
            return float(np.max(np.abs(v_m[pair_i] - v_l[pair_j])))

        sups = np.array(map_replications(one_rep, reps, master_seed, jobs))
        per_n.append(
            {
                "n": int(n),
                "eps": float(eps),
                "gamma_n": float(gamma_n),
                "n_pairs": int(len(pair_i)),
                "median_sup": float(np.median(sups)),
                "sups": sups.tolist(),
            }
        )
    medians = [row["median_sup"] for row in per_n]
    return {"per_n": per_n, "medians": medians}


# ---------------------------------------------------------------------------
# statement (b): marginals, normality, covariance structure


def vn_replications(body, dens, n, eps, regions, reps, master_seed=0, jobs=1):
    """Matrix (reps, k) of v_n over a fixed region grid, two-stage sampling."""
    eps = check_eps(body, eps)
    a = neighborhood_mass(body, dens, eps)
    probs = np.array([collar_prob(r, dens, body, eps) for r in regions])

    def one_rep(rng, r):
        total = int(rng.binomial(int(n), a))
        sample = sample_conditional(body, dens, eps, total, rng=rng)
        counts = np.array(
            [
                np.count_nonzero(reg.contains(sample.thetas(), sample.ss()))
                for reg in regions
            ],
            dtype=float,
        )
        return (counts - n * probs) / np.sqrt(n * a)

    return np.array(map_replications(one_rep, reps, master_seed, jobs))


def statement_b_test(
    body,
    dens,
    n,
    eps,
    regions,
    reps=1000,
    master_seed=0,
    ks_threshold=0.06,
    var_rtol=0.05,
    cov_atol=0.02,
    mean_tol=0.05,
    jobs=1,
):
    """Normality of each v_n(B) against N(0, Q(B)) plus the covariance grid."""
    if len(regions) > 64:
        raise ValueError("statement (b) grid limited to 64 regions")
    values = vn_replications(body, dens, n, eps, regions, reps, master_seed, jobs)
    target_cov = q_covariance(regions, dens, body)
    emp_cov = np.cov(values.T, bias=True).reshape(len(regions), len(regions))
    per_region = []
    for i in range(len(regions)):
        q_var = target_cov[i, i]
        ks = stats.kstest(values[:, i], "norm", args=(0.0, np.sqrt(q_var)))
        mean = float(values[:, i].mean())
        var = float(values[:, i].var())
        per_region.append(
            {
                "index": i,
                "mean": mean,
                "var": var,
                "q_var": float(q_var),
                "ks": float(ks.statistic),
                "mean_ok": bool(abs(mean) <= mean_tol),
                "var_ok": bool(abs(var - q_var) <= var_rtol * q_var),
                "ks_ok": bool(ks.statistic <= ks_threshold),
            }
        )
    cov_dev = float(np.max(np.abs(emp_cov - target_cov)))
    frac_ks_fail = float(np.mean([not row["ks_ok"] for row in per_region]))
    return {
        "per_region": per_region,
        "cov_empirical": emp_cov.tolist(),
        "cov_target": target_cov.tolist(),
        "cov_max_abs_dev": cov_dev,
        "cov_ok": bool(cov_dev <= cov_atol),
        "frac_ks_fail": frac_ks_fail,
        "n": int(n),
        "eps": float(eps),
        "reps": int(reps),
        "master_seed": int(master_seed),
    }


def sup_functional_test(
    body, dens, n, eps, regions, reps=1000, draws=1000, master_seed=0, jobs=1
):
    """sup |v_n| over the grid against sup |W| from the Gaussian sampler."""
    values = vn_replications(body, dens, n, eps, regions, reps, master_seed, jobs)
    sup_vn = np.max(np.abs(values), axis=1)
    field = brownian_field(
        regions, dens, body, seed=master_seed + 1, draws=draws
    )
    sup_w = np.max(np.abs(field.values), axis=1)
    ks = stats.ks_2samp(sup_vn, sup_w)
    return {
        "ks": float(ks.statistic),
        "pvalue": float(ks.pvalue),
        "sup_vn": sup_vn.tolist(),
        "sup_w": sup_w.tolist(),
        "n": int(n),
        "eps": float(eps),
        "reps": int(reps),
        "draws": int(draws),
        "master_seed": int(master_seed),
    }


# ---------------------------------------------------------------------------
# change-set statistics


@dataclass
class ChangeSetModel:
    """Marked change-set scenario: marks P2 on the body, P1 outside."""

    body: ConvexBody
    deviation: object  # callable eps -> convex element K(eps)
    p1: object  # scipy-style frozen distribution
    p2: object

    def xi(self, marks):
        return self.p2.logpdf(marks) - self.p1.logpdf(marks)

    def k_eps(self, eps):
        return self.deviation(eps)


def changeset_counts(points, body, k_eps) -> tuple:
    """Counts of points gained by K(eps) and lost from K."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return 0, 0
    in_k = body.contains(points)
    in_keps = k_eps.contains(points)
    added = int(np.count_nonzero(in_keps & ~in_k))
    removed = int(np.count_nonzero(in_k & ~in_keps))
    return added, removed


def changeset_loglik(points, marks, model: ChangeSetModel, eps) -> float:
    """Signed xi-weighted sum over the symmetric difference."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return 0.0
    marks = np.asarray(marks, dtype=float)
    k_eps = model.k_eps(eps)
    in_k = model.body.contains(points)
    in_keps = k_eps.contains(points)
    weight = in_keps & ~in_k
    lost = in_k & ~in_keps
    xi = model.xi(marks)
    return float(np.sum(xi[weight]) - np.sum(xi[lost]))


# ---------------------------------------------------------------------------
# excess-mass and minimum-volume estimators over a disc class


def lens_area(dist, r1, r2) -> float:
    """Intersection area of two discs with center distance dist."""
    if dist >= r1 + r2:
        return 0.0
    if dist <= abs(r1 - r2):
        r = min(r1, r2)
        return np.pi * r * r
    d1 = (dist**2 + r1**2 - r2**2) / (2.0 * dist)
    d2 = dist - d1
    seg1 = r1**2 * np.arccos(np.clip(d1 / r1, -1.0, 1.0)) - d1 * np.sqrt(
        max(r1**2 - d1**2, 0.0)
    )
    seg2 = r2**2 * np.arccos(np.clip(d2 / r2, -1.0, 1.0)) - d2 * np.sqrt(
        max(r2**2 - d2**2, 0.0)
    )
    return float(seg1 + seg2)


def _population_disc_mass(body: Disc, dens: TwoLevelDensity, centers, radii):
    """P(B_r(c)) for a grid of candidate discs under a two-level density."""
    if not isinstance(body, Disc) or not isinstance(dens, TwoLevelDensity):
        raise ValueError(
            "population mode supports disc bodies with two-level densities"
        )
    dist = np.hypot(*(centers - body.center).T)
    lens = np.array(
        [lens_area(d, r, body.radius) for d, r in zip(dist, radii)]
    )
    return dens.c_in * lens + dens.c_out * (np.pi * radii**2 - lens)


def _candidate_grid(center_box, radius_range, points_per_dim):
    (x0, x1), (y0, y1) = center_box
    r0, r1 = radius_range
    xs = np.linspace(x0, x1, points_per_dim)
    ys = np.linspace(y0, y1, points_per_dim)
    rs = np.linspace(r0, r1, points_per_dim)
    cx, cy, rr = np.meshgrid(xs, ys, rs, indexing="ij")
    return np.column_stack([cx.ravel(), cy.ravel()]), rr.ravel(), (xs, ys, rs)


def _disc_masses(points, centers, radii, chunk=200):
    n = len(points)
    out = np.empty(len(radii))
    for i0 in range(0, len(radii), chunk):
        i1 = min(i0 + chunk, len(radii))
        d2 = (
            (points[:, 0][None, :] - centers[i0:i1, 0][:, None]) ** 2
            + (points[:, 1][None, :] - centers[i0:i1, 1][:, None]) ** 2
        )
        out[i0:i1] = np.count_nonzero(d2 <= radii[i0:i1, None] ** 2, axis=1)
    return out / n


def _lex_best(values, centers, radii, maximize=True):
    order = np.lexsort((radii, centers[:, 1], centers[:, 0]))
    vals = values[order]
    best = np.argmax(vals) if maximize else np.argmin(vals)
    # argmax/argmin return the first hit in lexicographic parameter order
    idx = order[best]
    return idx


@dataclass
class DiscFit:
    center: tuple
    radius: float
    objective: float
    mode: str
    stages: list
    on_boundary: bool = False


def _refine_search(
    score_fn, center_box, radius_range, stages=3, points_per_dim=9, maximize=True
):
    history = []
    box, rng_r = center_box, radius_range
    best = None
    for stage in range(stages):
        centers, radii, axes = _candidate_grid(box, rng_r, points_per_dim)
        values = score_fn(centers, radii)
        idx = _lex_best(values, centers, radii, maximize=maximize)
        best = (centers[idx], radii[idx], values[idx])
        history.append(
            {
                "stage": stage,
                "best_center": centers[idx].tolist(),
                "best_radius": float(radii[idx]),
                "best_value": float(values[idx]),
            }
        )
        # shrink each range to one grid cell around the best (x4 refinement)
        def shrink(axis, val):
            step = axis[1] - axis[0] if len(axis) > 1 else 0.0
            return (max(axis[0], val - step), min(axis[-1], val + step))

        box = (shrink(axes[0], centers[idx][0]), shrink(axes[1], centers[idx][1]))
        rng_r = shrink(axes[2], radii[idx])
    return best, history


def excess_mass(
    data,
    lam,
    center_box=((-0.3, 0.3), (-0.3, 0.3)),
    radius_range=(0.7, 1.3),
    mode="sample",
    body=None,
    dens=None,
    stages=3,
    points_per_dim=9,
) -> DiscFit:
    """argmax of mass(disc) - lam * area(disc) over a disc class.

    data is an (n, 2) ambient point array in sample mode and ignored in
    population mode (body and dens supply the law).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")

    if mode == "population":

        def score(centers, radii):
            mass = _population_disc_mass(body, dens, centers, radii)
            return mass - lam * np.pi * radii**2

    else:
        points = np.asarray(data, dtype=float)

        def score(centers, radii):
            return _disc_masses(points, centers, radii) - lam * np.pi * radii**2

    (center, radius, value), history = _refine_search(
        score, center_box, radius_range, stages, points_per_dim, maximize=True
    )
    if value <= 0.0:
        raise DegenerateSolution(
            "excess-mass objective is maximized by the empty set"
        )
    return DiscFit(tuple(center), float(radius), float(value), mode, history)


def min_volume_set(
    data,
    alpha,
    center_box=((-0.3, 0.3), (-0.3, 0.3)),
    radius_range=(0.05, 1.3),
    mode="sample",
    body=None,
    dens=None,
    stages=3,
    points_per_dim=9,
) -> DiscFit:
    """Smallest-area disc in the class with mass at least alpha.

    The stages bracket the threshold radius (x4 range shrink per stage) over
    the full center grid; ties at the final radius go to the
    lexicographically smallest center.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")

    if mode == "population":

        def mass(centers, radii):
            return _population_disc_mass(body, dens, centers, radii)

    else:
        points = np.asarray(data, dtype=float)

        def mass(centers, radii):
            return _disc_masses(points, centers, radii)

    (x0, x1), (y0, y1) = center_box
    xs = np.linspace(x0, x1, points_per_dim)
    ys = np.linspace(y0, y1, points_per_dim)
    cx, cy = np.meshgrid(xs, ys, indexing="ij")
    grid_centers = np.column_stack([cx.ravel(), cy.ravel()])
    order = np.lexsort((grid_centers[:, 1], grid_centers[:, 0]))
    grid_centers = grid_centers[order]

    r_lo, r_hi = radius_range
    history = []
    best = None
    for stage in range(stages):
        radii = np.linspace(r_lo, r_hi, points_per_dim)
        step = radii[1] - radii[0]
        best = None
        for r in radii:
            feasible = mass(grid_centers, np.full(len(grid_centers), r)) >= alpha
            if np.any(feasible):
                center = grid_centers[np.argmax(feasible)]
                best = (center, float(r))
                break
        if best is None:
            raise Infeasible(f"no disc in the class reaches mass {alpha}")
        history.append(
            {
                "stage": stage,
                "best_center": best[0].tolist(),
                "best_radius": best[1],
                "best_value": float(np.pi * best[1] ** 2),
            }
        )
        r_lo = max(radius_range[0], best[1] - step)
        r_hi = min(radius_range[1], best[1] + step)
    center, radius = best
    on_boundary = bool(
        np.isclose(radius, radius_range[1])
        or np.isclose(abs(center[0]), max(abs(x0), abs(x1)))
        or np.isclose(abs(center[1]), max(abs(y0), abs(y1)))
    )
    return DiscFit(tuple(center), float(radius), float(np.pi * radius**2),
                   mode, history, on_boundary=on_boundary)
