"""Bracketing covers and VC shattering checks for the implemented classes.

Brackets are nested set pairs sized in the sample pseudometric d_n. The
s-interval class is bracketed on a quantile grid of the magnified law's
s-marginal, so bracket sizes are uniform in measure rather than in length;
one bracket per ordered endpoint cell keeps the count at the documented
combinatorial bound. Trigonometric bands are bracketed by parameter-cell
envelopes with an explicit slack for the rotation parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import TooManyPoints, UnsupportedFamily
from .geometry import ConvexPolygon, check_eps
from .measures import _collar_weights, collar_prob, mp_total
from .regions import BoxRegion, FullRegion, EmptyRegion, SliceFnRegion


@dataclass
class BracketSet:
    """A delta-sized bracketing cover of a set class."""

    delta: float
    brackets: list
    count: int
    sizes: np.ndarray
    meta: dict = field(default_factory=dict)

    def bracket_for(self, params):
        """Index of the bracket containing the member with these parameters."""
        return self.meta["locator"](params)

    def to_jsonable(self, include_brackets=True):
        out = {
            "delta": self.delta,
            "count": self.count,
            "max_size": float(np.max(self.sizes)) if len(self.sizes) else 0.0,
            "kind": self.meta.get("kind"),
            "grid": self.meta.get("grid"),
            "sizes": [float(s) for s in self.sizes],
        }
        if include_brackets and self.meta.get("kind") == "interval_bands":
            out["brackets"] = [
                {
                    "lower": getattr(lo, "s_intervals", None),
                    "upper": getattr(hi, "s_intervals", None),
                    "size": float(self.sizes[i]),
                }
                for i, (lo, hi) in enumerate(self.brackets)
            ]
        return out


def qn_s_marginal(dens, body, eps, n_s=4096, n_theta=2048):
    """Cell masses of the s-marginal of the magnified conditional law."""
    eps = check_eps(body, eps)
    tc = (np.arange(n_theta) + 0.5) * body.perimeter / n_theta
    sc = -1.0 + (np.arange(n_s) + 0.5) * 2.0 / n_s
    w = _collar_weights(tc, sc, dens, body, eps)
    cell = (body.perimeter / n_theta) * (2.0 / n_s)
    masses = w.sum(axis=0) * cell
    if isinstance(body, ConvexPolygon):
        # corner sectors: outer fan density eps^2 * s per unit s
        fan = body.corner_fan_angles()
        pp = dens.p_plus(body.corner_thetas())
        coef = float(np.sum(fan * pp)) * eps**2
        masses += np.where(sc > 0, coef * sc, 0.0) * (2.0 / n_s)
    total = collar_prob(FullRegion(), dens, body, eps)
    edges = -1.0 + 2.0 * np.arange(n_s + 1) / n_s
    return edges, masses / total


def _quantile_grid(edges, masses, n_slabs):
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    cum /= cum[-1]
    levels = np.arange(1, n_slabs) / n_slabs
    inner = np.interp(levels, cum, edges)
    return np.concatenate([[-1.0], inner, [1.0]])


def bracket_cover(kind, delta, dens, body, eps, param_box=None) -> BracketSet:
    """Nested brackets of d_n-size <= delta covering the named class."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if kind == "interval_bands":
        return _interval_band_brackets(delta, dens, body, eps)
    if kind == "ellipse_bands":
        return _ellipse_band_brackets(delta, dens, body, eps, param_box)
    raise UnsupportedFamily(
        f"bracketing not implemented for class kind {kind!r}"
    )


def _interval_band_brackets(delta, dens, body, eps) -> BracketSet:
    if delta >= 1.0:
        # d_n(empty, full) = 1, so a single bracket covers everything
        return BracketSet(
            delta=delta,
            brackets=[(EmptyRegion(), FullRegion())],
            count=1,
            sizes=np.array([1.0]),
            meta={"kind": "interval_bands", "grid": [-1.0, 1.0],
                  "locator": lambda params: 0},
        )
    edges, masses = qn_s_marginal(dens, body, eps)
    n_slabs = int(np.ceil(4.0 / delta**2)) + 1
    grid = _quantile_grid(edges, masses, n_slabs)
    cum_at = np.concatenate([[0.0], np.cumsum(masses)])
    cum_at /= cum_at[-1]

    def mass_between(lo, hi):
        return float(np.interp(hi, edges, cum_at) - np.interp(lo, edges, cum_at))

    brackets, sizes, index = [], [], {}
    for cell in itertools.combinations_with_replacement(range(n_slabs), 4):
        i, j, k, l = cell
        lower = BoxRegion([(grid[i + 1], grid[j]), (grid[k + 1], grid[l])])
        upper = BoxRegion([(grid[i], grid[j + 1]), (grid[k], grid[l + 1])])
        diff = mass_between(grid[i], grid[i + 1]) + mass_between(grid[k], grid[k + 1])
        diff += mass_between(grid[j], grid[j + 1]) + mass_between(grid[l], grid[l + 1])
        index[cell] = len(brackets)
        brackets.append((lower, upper))
        sizes.append(np.sqrt(diff))

    def locator(params):
        idx = np.clip(np.searchsorted(grid, params, side="right") - 1, 0, n_slabs - 1)
        return index[tuple(int(v) for v in idx)]

    return BracketSet(
        delta=delta,
        brackets=brackets,
        count=len(brackets),
        sizes=np.asarray(sizes),
        meta={"kind": "interval_bands", "grid": grid.tolist(), "locator": locator},
    )


class _EnvelopeRegion(SliceFnRegion):
    """Lower or upper bracket of all bands with m(theta) <= f <= M(theta)."""

    def __init__(self, m_fn, big_fn, which):
        self.m_fn = m_fn
        self.big_fn = big_fn
        self.which = which
        super().__init__(self._slices)

    def _slices(self, theta):
        m = float(self.m_fn(theta))
        big = float(self.big_fn(theta))
        if self.which == "lower":
            if m > 0:
                return [(0.0, min(m, 1.0))]
            if big < 0:
                return [(max(big, -1.0), 0.0)]
            return []
        out = []
        if big > 0:
            out.append((0.0, min(big, 1.0)))
        if m < 0:
            out.append((max(m, -1.0), 0.0))
        return out

    def contains(self, thetas, ss):
        thetas = np.asarray(thetas, dtype=float)
        ss = np.asarray(ss, dtype=float)
        m = np.asarray(self.m_fn(thetas), dtype=float)
        big = np.asarray(self.big_fn(thetas), dtype=float)
        if self.which == "lower":
            return ((ss > 0) & (ss <= m)) | ((ss <= 0) & (big < 0) & (ss > big))
        return ((ss > 0) & (ss <= big)) | ((ss <= 0) & (ss > m))


def _ellipse_band_brackets(delta, dens, body, eps, param_box) -> BracketSet:
    box = {"a": (-0.3, 0.3), "b": (0.0, 0.0), "c": (-0.3, 0.3),
           "d": (-0.3, 0.3), "alpha": (0.0, 0.0)}
    if param_box:
        box.update(param_box)
    names = ["a", "b", "c", "d", "alpha"]
    ranges = np.array([box[n][1] - box[n][0] for n in names])
    b_max = max(abs(box["b"][0]), abs(box["b"][1]))
    c_max = max(abs(box["c"][0]), abs(box["c"][1]))
    d_max = max(abs(box["d"][0]), abs(box["d"][1]))
    lips = np.array([1.0, 1.0, 1.0, 1.0, b_max + np.hypot(c_max, d_max)])
    # the weighted theta-integral turning sup-width into a d_n^2 bound
    tc = np.linspace(0.0, body.perimeter, 2048, endpoint=False)
    weight = float(
        np.maximum(dens.p_plus(tc), dens.p_minus(tc)).mean() * body.perimeter
    ) / mp_total(dens, body)
    budget = 0.95 * delta**2 / weight
    active = (ranges * lips) > 0
    n_active = max(int(active.sum()), 1)
    steps = np.ones(5, dtype=int)
    steps[active] = np.ceil(ranges[active] * lips[active] * n_active / budget).astype(int)
    count = int(np.prod(steps))
    if count > 200_000:
        raise ValueError(
            f"bracket count {count} too large to materialize; increase delta"
        )
    grids = [np.linspace(box[n][0], box[n][1], steps[i] + 1) for i, n in enumerate(names)]
    per = 2.0 * np.pi / body.perimeter

    def make_envelopes(cell_lo, cell_hi):
        corners = np.array(list(itertools.product(*[
            (cell_lo[i], cell_hi[i]) for i in range(4)
        ])))
        alpha_mid = 0.5 * (cell_lo[4] + cell_hi[4])
        slack = lips[4] * (cell_hi[4] - cell_lo[4]) / 2.0

        def m_fn(thetas):
            phi = per * np.asarray(thetas, dtype=float) - alpha_mid
            basis = np.stack(
                [np.ones_like(phi), np.sin(phi) ** 2, np.sin(phi), np.cos(phi)],
                axis=-1,
            )
            vals = basis @ corners.T
            return vals.min(axis=-1) - slack

        def big_fn(thetas):
            phi = per * np.asarray(thetas, dtype=float) - alpha_mid
            basis = np.stack(
                [np.ones_like(phi), np.sin(phi) ** 2, np.sin(phi), np.cos(phi)],
                axis=-1,
            )
            vals = basis @ corners.T
            return vals.max(axis=-1) + slack

        return m_fn, big_fn

    brackets, sizes, index = [], [], {}
    for cell in itertools.product(*[range(s) for s in steps]):
        lo = np.array([grids[i][cell[i]] for i in range(5)])
        hi = np.array([grids[i][cell[i] + 1] for i in range(5)])
        m_fn, big_fn = make_envelopes(lo, hi)
        index[cell] = len(brackets)
        brackets.append(
            (_EnvelopeRegion(m_fn, big_fn, "lower"),
             _EnvelopeRegion(m_fn, big_fn, "upper"))
        )
        width = float(np.sum((hi - lo)[:4])) + lips[4] * (hi[4] - lo[4])
        sizes.append(np.sqrt(width * weight))

    def locator(params):
        cell = tuple(
            int(np.clip(np.searchsorted(grids[i], params[i], side="right") - 1,
                        0, steps[i] - 1))
            for i in range(5)
        )
        return index[cell]

    return BracketSet(
        delta=delta,
        brackets=brackets,
        count=count,
        sizes=np.asarray(sizes),
        meta={"kind": "ellipse_bands", "grid": [g.tolist() for g in grids],
              "locator": locator},
    )


# ---------------------------------------------------------------------------
# shattering


def _as_cylinder_array(points):
    pts = np.asarray(
        [(p.theta, p.s) if hasattr(p, "theta") else tuple(p) for p in points],
        dtype=float,
    )
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (theta, s) pairs")
    return pts


def _achieved_labelings(member_matrix):
    weights = 1 << np.arange(member_matrix.shape[1])
    return set(np.unique(member_matrix.astype(int) @ weights).tolist())


def shatter_check(kind, points, resolution=7, return_witnesses=False):
    """Can the class pick out every subset of the points?

    The label search runs over an explicit parameter grid; for the
    s-interval class the midpoint grid is exhaustive, so both answers are
    exact there. For band classes a True is certified by the exhibited
    grid parameters while a False is grid-relative.
    """
    pts = _as_cylinder_array(points)
    k = len(pts)
    if k > 12:
        raise TooManyPoints("shatter_check enumerates at most 12 points")
    if k == 0:
        return True

    if kind == "sband":
        s = pts[:, 1]
        su = np.sort(np.unique(s))
        mids = (su[:-1] + su[1:]) / 2.0 if len(su) > 1 else np.empty(0)
        grid = np.concatenate([[-1.0], su, mids, [1.0]])
        grid = np.sort(np.unique(grid))
        cands = np.array(
            list(itertools.combinations_with_replacement(grid, 4)), dtype=float
        )
        member = (
            (s[None, :] >= cands[:, 0:1]) & (s[None, :] <= cands[:, 1:2])
        ) | ((s[None, :] >= cands[:, 2:3]) & (s[None, :] <= cands[:, 3:4]))
    elif kind == "ellipse_bands":
        theta, s = pts[:, 0], pts[:, 1]
        lin = np.linspace(-1.0, 1.0, resolution)
        alphas = np.linspace(0.0, np.pi / 2, resolution, endpoint=False)
        blocks = []
        for alpha in alphas:
            phi = theta - alpha
            basis = np.stack(
                [np.ones_like(phi), np.sin(phi) ** 2, np.sin(phi), np.cos(phi)]
            )
            params = np.array(list(itertools.product(lin, lin, lin, lin)))
            f = params @ basis
            blocks.append(((s > 0) & (f >= s)) | ((s <= 0) & (f < s)))
        member = np.concatenate(blocks, axis=0)
    else:
        raise UnsupportedFamily(f"shatter_check not implemented for {kind!r}")

    achieved = _achieved_labelings(member)
    shattered = len(achieved) == (1 << k)
    if return_witnesses:
        return shattered, achieved
    return shattered
