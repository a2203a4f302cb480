"""Measurable subsets of the boundary cylinder Gamma = [0, L) x [-1, 1].

A region knows its membership predicate (vectorized over cylinder points)
and, when the geometry allows it, the exact s-intervals of each theta-slice.
Exact slices make the measure quadratures in ``measures`` exact in s;
regions that only know membership (tau-images of arbitrary ambient sets)
fall back to a raster, the GridRegion representation.

s-intervals are half-open (lo, hi], matching the band convention
{0 < s <= f(theta)} u {f(theta) < s <= 0}; an interval starting at -1
includes the bottom edge of the cylinder.
"""

from __future__ import annotations

import numpy as np

from .geometry import ConvexBody, unmagnify_many

# ---------------------------------------------------------------------------
# interval lists on [-1, 1]


def normalize_intervals(intervals):
    """Sort, drop empty and merge touching (lo, hi] intervals."""
    ivs = [(float(lo), float(hi)) for lo, hi in intervals if hi > lo]
    ivs.sort()
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1] + 1e-15:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def interval_intersection(a, b):
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi > lo:
                out.append((lo, hi))
    return normalize_intervals(out)


def interval_union(a, b):
    return normalize_intervals(list(a) + list(b))


def interval_complement(a, universe=(-1.0, 1.0)):
    a = normalize_intervals(a)
    out = []
    cursor = universe[0]
    for lo, hi in a:
        if lo > cursor:
            out.append((cursor, lo))
        cursor = max(cursor, hi)
    if universe[1] > cursor:
        out.append((cursor, universe[1]))
    return out


def interval_difference(a, b):
    return interval_intersection(a, interval_complement(b))


def interval_xor(a, b):
    return interval_union(interval_difference(a, b), interval_difference(b, a))


def interval_length(a):
    return float(sum(hi - lo for lo, hi in a))


def split_sign(a):
    """Intervals intersected with the upper (s > 0) and lower (s <= 0) halves."""
    pos = interval_intersection(a, [(0.0, 1.0)])
    neg = interval_intersection(a, [(-1.0, 0.0)])
    return pos, neg


def _contains_intervals(s, intervals):
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape, dtype=bool)
    for lo, hi in intervals:
        lo_eff = lo if lo > -1.0 else -1.0 - 1e-12
        out |= (s > lo_eff) & (s <= hi)
    return out


# ---------------------------------------------------------------------------
# regions


class CylinderRegion:
    """Base class; set algebra returns lazy combinators."""

    is_exact = False

    def contains(self, thetas, ss):
        raise NotImplementedError

    def slice_intervals(self, theta):
        raise NotImplementedError

    def theta_breakpoints(self):
        return ()

    def to_grid(self, perimeter, n_theta=1024, n_s=256) -> "GridRegion":
        tc = (np.arange(n_theta) + 0.5) * perimeter / n_theta
        sc = -1.0 + (np.arange(n_s) + 0.5) * 2.0 / n_s
        tt, ss = np.meshgrid(tc, sc, indexing="ij")
        mask = self.contains(tt.ravel(), ss.ravel()).reshape(n_theta, n_s)
        return GridRegion(mask, perimeter)

    def union(self, other):
        return _BoolRegion("union", self, other)

    def intersection(self, other):
        return _BoolRegion("intersection", self, other)

    def difference(self, other):
        return _BoolRegion("difference", self, other)

    def symmetric_difference(self, other):
        return _BoolRegion("xor", self, other)

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        return self.intersection(other)

    def __sub__(self, other):
        return self.difference(other)

    def __xor__(self, other):
        return self.symmetric_difference(other)


class EmptyRegion(CylinderRegion):
    is_exact = True

    def contains(self, thetas, ss):
        return np.zeros(np.broadcast(np.asarray(thetas), np.asarray(ss)).shape, bool)

    def slice_intervals(self, theta):
        return []

    def __repr__(self):
        return "EmptyRegion()"


class FullRegion(CylinderRegion):
    is_exact = True

    def contains(self, thetas, ss):
        return np.ones(np.broadcast(np.asarray(thetas), np.asarray(ss)).shape, bool)

    def slice_intervals(self, theta):
        return [(-1.0, 1.0)]

    def __repr__(self):
        return "FullRegion()"


class BoxRegion(CylinderRegion):
    """Product of theta-intervals [lo, hi) and s-intervals (lo, hi].

    theta_intervals=None means all of [0, L). SBand regions are the
    theta-free special case.
    """

    is_exact = True

    def __init__(self, s_intervals, theta_intervals=None):
        self.s_intervals = normalize_intervals(s_intervals)
        if theta_intervals is not None:
            theta_intervals = [
                (float(lo), float(hi)) for lo, hi in theta_intervals if hi > lo
            ]
        self.theta_intervals = theta_intervals

    def __repr__(self):
        return f"BoxRegion(s={self.s_intervals}, theta={self.theta_intervals})"

    def _theta_mask(self, thetas):
        if self.theta_intervals is None:
            return np.ones(np.asarray(thetas).shape, dtype=bool)
        thetas = np.asarray(thetas, dtype=float)
        out = np.zeros(thetas.shape, dtype=bool)
        for lo, hi in self.theta_intervals:
            out |= (thetas >= lo) & (thetas < hi)
        return out

    def contains(self, thetas, ss):
        return self._theta_mask(thetas) & _contains_intervals(ss, self.s_intervals)

    def slice_intervals(self, theta):
        if self.theta_intervals is None:
            return list(self.s_intervals)
        for lo, hi in self.theta_intervals:
            if lo <= theta < hi:
                return list(self.s_intervals)
        return []

    def theta_breakpoints(self):
        if self.theta_intervals is None:
            return ()
        return tuple(t for iv in self.theta_intervals for t in iv)

    def intersection(self, other):
        if isinstance(other, BoxRegion):
            if self.theta_intervals is None:
                tint = other.theta_intervals
            elif other.theta_intervals is None:
                tint = self.theta_intervals
            else:
                tint = [
                    (max(l1, l2), min(h1, h2))
                    for l1, h1 in self.theta_intervals
                    for l2, h2 in other.theta_intervals
                    if min(h1, h2) > max(l1, l2)
                ]
            return BoxRegion(
                interval_intersection(self.s_intervals, other.s_intervals), tint
            )
        return super().intersection(other)

    def union(self, other):
        if (
            isinstance(other, BoxRegion)
            and self.theta_intervals is None
            and other.theta_intervals is None
        ):
            return BoxRegion(interval_union(self.s_intervals, other.s_intervals))
        return super().union(other)


def sband(intervals) -> BoxRegion:
    """SBand: a union of s-intervals applied at every theta."""
    return BoxRegion(intervals)


def upper_half() -> BoxRegion:
    return BoxRegion([(0.0, 1.0)])


def lower_half() -> BoxRegion:
    return BoxRegion([(-1.0, 0.0)])


class BandRegion(CylinderRegion):
    """Boundary-function band {0 < s <= f(theta)} u {f(theta) < s <= 0}."""

    is_exact = True

    def __init__(self, f, breakpoints=()):
        self.f = f
        self._breakpoints = tuple(breakpoints) or tuple(
            getattr(f, "breakpoints", ())
        )

    def __repr__(self):
        return f"BandRegion(f={self.f!r})"

    def band_values(self, thetas):
        return np.asarray(self.f(np.asarray(thetas, dtype=float)), dtype=float)

    def contains(self, thetas, ss):
        ss = np.asarray(ss, dtype=float)
        fv = self.band_values(thetas)
        return ((ss > 0) & (ss <= fv)) | ((ss <= 0) & (ss > fv))

    def slice_intervals(self, theta):
        v = float(self.f(np.asarray([theta], dtype=float))[0])
        if v > 0:
            return [(0.0, min(v, 1.0))]
        if v < 0:
            return [(max(v, -1.0), 0.0)]
        return []

    def theta_breakpoints(self):
        return self._breakpoints


class SliceFnRegion(CylinderRegion):
    """Region given by an exact slice function theta -> interval list.

    Used for tau-images of symmetric differences of convex bodies, where each
    normal-line slice is computed by exact line clipping.
    """

    is_exact = True

    def __init__(self, slice_fn, contains_fn=None, breakpoints=(), band_fn=None):
        self._slice_fn = slice_fn
        self._contains_fn = contains_fn
        self._breakpoints = tuple(breakpoints)
        self.band_fn = band_fn

    def slice_intervals(self, theta):
        return self._slice_fn(float(theta))

    def contains(self, thetas, ss):
        if self._contains_fn is not None:
            return self._contains_fn(np.asarray(thetas, float), np.asarray(ss, float))
        thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
        ss = np.atleast_1d(np.asarray(ss, dtype=float))
        out = np.zeros(np.broadcast(thetas, ss).shape, dtype=bool)
        tt = np.broadcast_to(thetas, out.shape)
        sb = np.broadcast_to(ss, out.shape)
        flat = out.reshape(-1)
        for k, (tv, sv) in enumerate(zip(tt.reshape(-1), sb.reshape(-1))):
            flat[k] = bool(_contains_intervals(sv, self._slice_fn(float(tv))))
        return out

    def theta_breakpoints(self):
        return self._breakpoints


class GridRegion(CylinderRegion):
    """Raster of booleans over a theta x s grid; the universal fallback."""

    is_exact = True

    def __init__(self, mask, perimeter):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2:
            raise ValueError("mask must be 2d (n_theta, n_s)")
        self.mask = mask
        self.perimeter = float(perimeter)
        self.n_theta, self.n_s = mask.shape

    def __repr__(self):
        return f"GridRegion({self.n_theta}x{self.n_s})"

    def _indices(self, thetas, ss):
        ti = np.floor(
            np.mod(np.asarray(thetas, float), self.perimeter)
            / self.perimeter
            * self.n_theta
        ).astype(int)
        si = np.floor((np.asarray(ss, float) + 1.0) / 2.0 * self.n_s).astype(int)
        return np.clip(ti, 0, self.n_theta - 1), np.clip(si, 0, self.n_s - 1)

    def contains(self, thetas, ss):
        ti, si = self._indices(thetas, ss)
        return self.mask[ti, si]

    def slice_intervals(self, theta):
        ti = int(
            np.floor(np.mod(theta, self.perimeter) / self.perimeter * self.n_theta)
        )
        ti = min(ti, self.n_theta - 1)
        col = self.mask[ti]
        edges = -1.0 + 2.0 * np.arange(self.n_s + 1) / self.n_s
        out = []
        run_start = None
        for i in range(self.n_s):
            if col[i] and run_start is None:
                run_start = edges[i]
            elif not col[i] and run_start is not None:
                out.append((run_start, edges[i]))
                run_start = None
        if run_start is not None:
            out.append((run_start, edges[-1]))
        return out

    def to_grid(self, perimeter, n_theta=1024, n_s=256):
        if (n_theta, n_s) == (self.n_theta, self.n_s):
            return self
        return super().to_grid(perimeter, n_theta, n_s)


class TauImageRegion(CylinderRegion):
    """Magnification image of an ambient set; membership-only.

    Membership at (theta, s) asks whether the ambient point
    position(theta) + s*eps*normal(theta) lies in the set. At polygon
    vertices with s > 0 the normal is set-valued; those cylinder points are
    skipped by rasterizers (a nu-null set) and handled separately by the
    corner-sector quadrature in ``measures``.
    """

    is_exact = False

    def __init__(self, body: ConvexBody, eps: float, ambient_contains):
        self.body = body
        self.eps = float(eps)
        self.ambient_contains = ambient_contains

    def contains(self, thetas, ss):
        thetas = np.asarray(thetas, dtype=float)
        ss = np.asarray(ss, dtype=float)
        shape = np.broadcast(thetas, ss).shape
        tt = np.broadcast_to(thetas, shape).ravel()
        sb = np.broadcast_to(ss, shape).ravel()
        pts, valid = unmagnify_many(self.body, self.eps, tt, sb, on_corner="mask")
        out = np.zeros(tt.shape, dtype=bool)
        out[valid] = self.ambient_contains(pts[valid])
        return out.reshape(shape)


class _BoolRegion(CylinderRegion):
    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    @property
    def is_exact(self):
        return self.left.is_exact and self.right.is_exact

    def contains(self, thetas, ss):
        a = self.left.contains(thetas, ss)
        b = self.right.contains(thetas, ss)
        if self.op == "union":
            return a | b
        if self.op == "intersection":
            return a & b
        if self.op == "difference":
            return a & ~b
        return a ^ b

    def slice_intervals(self, theta):
        a = self.left.slice_intervals(theta)
        b = self.right.slice_intervals(theta)
        if self.op == "union":
            return interval_union(a, b)
        if self.op == "intersection":
            return interval_intersection(a, b)
        if self.op == "difference":
            return interval_difference(a, b)
        return interval_xor(a, b)

    def theta_breakpoints(self):
        return tuple(self.left.theta_breakpoints()) + tuple(
            self.right.theta_breakpoints()
        )
