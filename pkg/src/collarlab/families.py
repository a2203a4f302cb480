"""Indexing classes of sets near the boundary and their derivative bands.

Ambient families are symmetric differences K' xor K of a convex set K' with
the body, restricted to the collar, plus the signed-distance interval bands.
Their magnification images are computed exactly: the slice of K' xor K along
the normal line at arclength theta is an interval-list obtained by clipping
the line against both convex sets.

Derivative classes are boundary-function bands: trigonometric bands for
ellipse perturbations of a disc, piecewise-linear or piecewise-concave bands
per side for perturbations of a polygon, and s-interval bands.
"""

from __future__ import annotations

import numpy as np

from .geometry import ConvexBody, ConvexPolygon, Disc, check_eps
from .measures import band_d2_matrix, q_measure, qn_measure
from .regions import (
    BandRegion,
    BoxRegion,
    CylinderRegion,
    SliceFnRegion,
    TauImageRegion,
    interval_xor,
    interval_intersection,
)

# ---------------------------------------------------------------------------
# boundary-function families (the derivative classes)


class EllipseBandF:
    """a + b*sin^2(phi - alpha) + c*sin(phi - alpha) + d*cos(phi - alpha).

    phi is the boundary angle; for the unit disc it coincides with
    arclength. Values must stay within [-1, 1].
    """

    def __init__(self, a, b, c, d, alpha=0.0, perimeter=2.0 * np.pi):
        if not 0.0 <= alpha < np.pi / 2:
            raise ValueError("alpha must lie in [0, pi/2)")
        self.params = (float(a), float(b), float(c), float(d), float(alpha))
        self.perimeter = float(perimeter)
        grid = np.linspace(0.0, self.perimeter, 4096, endpoint=False)
        if np.max(np.abs(self(grid))) > 1.0 + 1e-9:
            raise ValueError("band function must satisfy sup|f| <= 1")
        self.breakpoints = ()

    def __call__(self, thetas):
        a, b, c, d, alpha = self.params
        phi = 2.0 * np.pi * np.asarray(thetas, dtype=float) / self.perimeter - alpha
        return a + b * np.sin(phi) ** 2 + c * np.sin(phi) + d * np.cos(phi)

    def __repr__(self):
        return f"EllipseBandF{self.params}"


class PiecewiseLinearBandF:
    """Per-side linear band a_m*(theta - m) + b_m on a unit-square boundary."""

    def __init__(self, slopes, offsets):
        slopes = np.asarray(slopes, dtype=float)
        offsets = np.asarray(offsets, dtype=float)
        if slopes.shape != (4,) or offsets.shape != (4,):
            raise ValueError("need one slope and one offset per side")
        if np.any(np.abs(slopes) > 2.0):
            raise ValueError("side slopes must lie in [-2, 2]")
        ends = np.maximum(np.abs(offsets), np.abs(slopes + offsets))
        if np.max(ends) > 1.0 + 1e-12:
            raise ValueError("band function must satisfy sup|f| <= 1")
        self.slopes = slopes
        self.offsets = offsets
        self.breakpoints = (0.0, 1.0, 2.0, 3.0)

    def __call__(self, thetas):
        thetas = np.mod(np.asarray(thetas, dtype=float), 4.0)
        m = np.clip(thetas.astype(int), 0, 3)
        return self.slopes[m] * (thetas - m) + self.offsets[m]

    def __repr__(self):
        return f"PiecewiseLinearBandF({self.slopes.tolist()}, {self.offsets.tolist()})"


class PiecewiseConcaveBandF:
    """Per-side concave band on a unit-square boundary."""

    def __init__(self, side_fns):
        if len(side_fns) != 4:
            raise ValueError("need one concave function per side")
        self.side_fns = tuple(side_fns)
        grid = np.linspace(0.0, 1.0, 513)
        for fn in self.side_fns:
            v = np.asarray(fn(grid), dtype=float)
            if np.max(np.abs(v)) > 1.0 + 1e-9:
                raise ValueError("band function must satisfy sup|f| <= 1")
            if np.any(np.diff(v, 2) > 1e-9):
                raise ValueError("side functions must be concave")
        self.breakpoints = (0.0, 1.0, 2.0, 3.0)

    def __call__(self, thetas):
        thetas = np.mod(np.asarray(thetas, dtype=float), 4.0)
        m = np.clip(thetas.astype(int), 0, 3)
        out = np.empty_like(thetas)
        for side in range(4):
            sel = m == side
            if np.any(sel):
                out[sel] = self.side_fns[side](thetas[sel] - side)
        return out


# ---------------------------------------------------------------------------
# ambient convex elements


class ConvexElement:
    """A convex ambient set with exact line clipping."""

    def contains(self, pts):
        raise NotImplementedError

    def line_slices(self, origins, dirs):
        """Parameter intervals (t_lo, t_hi) of lines origin + t*dir, NaN if empty."""
        raise NotImplementedError


class DiscElement(ConvexElement):
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def __repr__(self):
        return f"DiscElement({tuple(self.center)}, {self.radius})"

    def contains(self, pts):
        d = np.asarray(pts, dtype=float) - self.center
        return d[..., 0] ** 2 + d[..., 1] ** 2 <= self.radius**2

    def line_slices(self, origins, dirs):
        w = np.asarray(origins, dtype=float) - self.center
        dirs = np.asarray(dirs, dtype=float)
        b = np.sum(w * dirs, axis=-1)
        c = np.sum(w * w, axis=-1) - self.radius**2
        disc = b * b - c
        root = np.sqrt(np.clip(disc, 0.0, None))
        lo = np.where(disc >= 0, -b - root, np.nan)
        hi = np.where(disc >= 0, -b + root, np.nan)
        return lo, hi


class EllipseElement(ConvexElement):
    def __init__(self, center, semi_axes, angle=0.0):
        self.center = np.asarray(center, dtype=float)
        self.semi_axes = (float(semi_axes[0]), float(semi_axes[1]))
        if min(self.semi_axes) <= 0:
            raise ValueError("semi-axes must be positive")
        self.angle = float(angle)
        ca, sa = np.cos(self.angle), np.sin(self.angle)
        self._rot = np.array([[ca, sa], [-sa, ca]])  # world -> ellipse frame

    def __repr__(self):
        return f"EllipseElement({tuple(self.center)}, {self.semi_axes}, {self.angle})"

    def _to_frame(self, pts):
        return (np.asarray(pts, dtype=float) - self.center) @ self._rot.T

    def contains(self, pts):
        w = self._to_frame(pts)
        a, b = self.semi_axes
        return (w[..., 0] / a) ** 2 + (w[..., 1] / b) ** 2 <= 1.0

    def line_slices(self, origins, dirs):
        a, b = self.semi_axes
        w0 = self._to_frame(origins) / np.array([a, b])
        v = (np.asarray(dirs, dtype=float) @ self._rot.T) / np.array([a, b])
        qa = np.sum(v * v, axis=-1)
        qb = np.sum(w0 * v, axis=-1)
        qc = np.sum(w0 * w0, axis=-1) - 1.0
        disc = qb * qb - qa * qc
        root = np.sqrt(np.clip(disc, 0.0, None))
        lo = np.where(disc >= 0, (-qb - root) / qa, np.nan)
        hi = np.where(disc >= 0, (-qb + root) / qa, np.nan)
        return lo, hi


class PolygonElement(ConvexElement):
    def __init__(self, vertices):
        poly = ConvexPolygon(vertices)  # validates convexity / orientation
        self.vertices = poly.vertices
        self.normals = poly.normals
        self._poly = poly

    def __repr__(self):
        return f"PolygonElement({self.vertices.tolist()})"

    def contains(self, pts):
        return self._poly.contains(pts)

    def line_slices(self, origins, dirs):
        origins = np.atleast_2d(np.asarray(origins, dtype=float))
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        lo = np.full(origins.shape[0], -np.inf)
        hi = np.full(origins.shape[0], np.inf)
        for v, n in zip(self.vertices, self.normals):
            a = (origins - v) @ n
            b = dirs @ n
            crossing = np.where(b != 0, -a / np.where(b == 0, 1.0, b), 0.0)
            lo = np.where(b < 0, np.maximum(lo, crossing), lo)
            hi = np.where(b > 0, np.minimum(hi, crossing), hi)
            infeasible = (b == 0) & (a > 0)
            lo = np.where(infeasible, np.inf, lo)
        bad = lo > hi
        return np.where(bad, np.nan, lo), np.where(bad, np.nan, hi)


def body_as_element(body: ConvexBody) -> ConvexElement:
    if isinstance(body, Disc):
        return DiscElement(body.center, body.radius)
    return PolygonElement(body.vertices)


# ---------------------------------------------------------------------------
# family elements living in the collar


class SymmDiffElement:
    """Ambient set (K' xor K) for a convex K'; the canonical family element."""

    def __init__(self, body: ConvexBody, other: ConvexElement):
        self.body = body
        self.other = other
        self._body_el = body_as_element(body)

    def __repr__(self):
        return f"SymmDiffElement({self.other!r})"

    def contains(self, pts):
        return self.other.contains(pts) ^ self._body_el.contains(pts)

    def _normal_slices(self, eps, thetas):
        pos, normals, corner = self.body.boundary_many(np.asarray(thetas, float))
        k_lo, k_hi = self._body_el.line_slices(pos, normals)
        o_lo, o_hi = self.other.line_slices(pos, normals)
        return (k_lo / eps, k_hi / eps, o_lo / eps, o_hi / eps, corner)

    def band_profile(self, eps, thetas):
        """Single-crossing band heights; (values, valid) per theta.

        Valid when K' covers the inner collar along the normal, which holds
        for every element contained in the collar. Values are clipped to
        [-1, 1]; use element_in_collar for the actual containment check.
        """
        k_lo, k_hi, o_lo, o_hi, _ = self._normal_slices(eps, thetas)
        valid = ~np.isnan(o_lo) & (o_lo <= -1.0 + 1e-9) & (np.abs(k_hi) <= 1e-9)
        g = np.clip(np.where(np.isnan(o_hi), -1.0, o_hi), -1.0, 1.0)
        return g, valid

    def tau_region(self, body=None, eps=None) -> CylinderRegion:
        eps = check_eps(self.body, eps)
        probe = np.linspace(0.0, self.body.perimeter, 1024, endpoint=False)
        g, valid = self.band_profile(eps, probe)
        if bool(np.all(valid)):
            el = self

            class _Profile:
                breakpoints = ()

                def __call__(self, thetas):
                    v, _ = el.band_profile(eps, np.asarray(thetas, float))
                    return v

            return BandRegion(_Profile())
        return self._slice_region(eps)

    def _slice_region(self, eps):
        el = self

        def slice_fn(theta):
            k_lo, k_hi, o_lo, o_hi, _ = el._normal_slices(eps, np.asarray([theta]))
            k_iv = [] if np.isnan(k_lo[0]) else [(float(k_lo[0]), float(k_hi[0]))]
            o_iv = [] if np.isnan(o_lo[0]) else [(float(o_lo[0]), float(o_hi[0]))]
            return interval_intersection(
                interval_xor(k_iv, o_iv), [(-1.0, 1.0)]
            )

        region = SliceFnRegion(slice_fn)
        region.ambient_contains = self.contains  # corner fans use the ambient set
        return region


class IntervalBandsElement:
    """{z : signed_distance(z)/eps in [a,b] u [c,d]}; tau-image is exact."""

    def __init__(self, body: ConvexBody, a, b, c, d, eps):
        if not (-1.0 <= a <= b <= c <= d <= 1.0):
            raise ValueError("need -1 <= a <= b <= c <= d <= 1")
        self.body = body
        self.params = (float(a), float(b), float(c), float(d))
        self.eps = check_eps(body, eps)

    def __repr__(self):
        return f"IntervalBandsElement{self.params}"

    def contains(self, pts):
        s = self.body.signed_distance_many(pts) / self.eps
        a, b, c, d = self.params
        return ((s >= a) & (s <= b)) | ((s >= c) & (s <= d))

    def tau_region(self, body=None, eps=None) -> BoxRegion:
        a, b, c, d = self.params
        return BoxRegion([(a, b), (c, d)])


def tau_image(element, body: ConvexBody, eps: float) -> CylinderRegion:
    """Magnification image of a family element as a cylinder region."""
    eps = check_eps(body, eps)
    tau = getattr(element, "tau_region", None)
    if callable(tau):
        return tau(body, eps)
    return TauImageRegion(body, eps, element.contains)


def element_in_collar(element, body, eps, n_probe=1024) -> bool:
    """Numeric containment check: does the element stay inside the collar?

    Along the inward normal at each probed arclength, every point down to
    (just short of) the local reach has the probed foot, so the element must
    keep its slice within [-1, 1] on that window: the crossing of K' must
    fall in the collar and K' must cover the chord below it.
    """
    if isinstance(element, IntervalBandsElement):
        return True
    thetas = np.linspace(0.0, body.perimeter, n_probe, endpoint=False)
    _, _, o_lo, o_hi, _ = element._normal_slices(eps, thetas)
    if np.any(np.isnan(o_lo)):
        return False
    if isinstance(body, Disc):
        reach_s = np.full(n_probe, body.radius / eps)
    else:
        from .geometry import local_reach

        reach_s = np.array([local_reach(body, t) for t in thetas]) / eps
    window_lo = -0.999 * reach_s
    tol = 1e-9
    ok = (
        (o_hi <= 1.0 + tol)
        & (o_hi >= -1.0 - tol)
        & (o_lo <= window_lo + tol)
    )
    return bool(np.all(ok))


# ---------------------------------------------------------------------------
# set-valued families in eps (for differentiation)


class ShiftedDiscFamily:
    """K(eps) = disc shifted by (delta*eps, 0); A(eps) = K(eps) xor K."""

    def __init__(self, body: Disc, delta):
        self.body = body
        self.delta = float(delta)

    def element(self, eps):
        shift = self.body.center + np.array([self.delta * eps, 0.0])
        return SymmDiffElement(self.body, DiscElement(shift, self.body.radius))

    def limit_band(self) -> BandRegion:
        return BandRegion(
            EllipseBandF(0.0, 0.0, 0.0, self.delta, 0.0, self.body.perimeter)
        )


class OuterBandFamily:
    """A(eps) = {0 < signed_distance <= eps}; derivative is the upper cylinder."""

    def __init__(self, body: ConvexBody):
        self.body = body

    def element(self, eps):
        return IntervalBandsElement(self.body, 0.0, 1.0, 1.0, 1.0, eps)


class EmptyFamily:
    def __init__(self, body: ConvexBody):
        self.body = body

    def element(self, eps):
        class _Nothing:
            @staticmethod
            def contains(pts):
                return np.zeros(np.asarray(pts).shape[:-1], dtype=bool)

        return _Nothing()


# ---------------------------------------------------------------------------
# grids of elements for the verification suites


def circle_perturbation_grid(body: Disc, eps, radial, shift_x, shift_y):
    """Circle elements K' = B(center + eps*(dx,dy), R + eps*dr) with their
    limit bands dr + dx*cos + dy*sin; rejects elements leaving the collar."""
    elements, bands, params = [], [], []
    for dr in radial:
        for dx in shift_x:
            for dy in shift_y:
                el = SymmDiffElement(
                    body,
                    DiscElement(
                        body.center + eps * np.array([dx, dy]),
                        body.radius + eps * dr,
                    ),
                )
                if not element_in_collar(el, body, eps):
                    raise ValueError(
                        f"element (dr={dr}, dx={dx}, dy={dy}) leaves the collar"
                    )
                elements.append(el)
                bands.append(
                    BandRegion(
                        EllipseBandF(dr, 0.0, dy, dx, 0.0, body.perimeter)
                    )
                )
                params.append((dr, dx, dy))
    return elements, bands, params


# ---------------------------------------------------------------------------
# pseudometrics and the class Hausdorff distance


def d_metric(b1: CylinderRegion, b2: CylinderRegion, dens, body) -> float:
    """Limit-law pseudometric (Q of the symmetric difference)^(1/2)."""
    return float(np.sqrt(max(q_measure(b1 ^ b2, dens, body), 0.0)))


def dn_metric(a1, a2, dens, body, eps) -> float:
    """Sample-law pseudometric between ambient family elements."""
    r1 = tau_image(a1, body, eps)
    r2 = tau_image(a2, body, eps)
    return float(np.sqrt(max(qn_measure(r1 ^ r2, dens, body, eps), 0.0)))


def _band_value_matrix(regions, thetas):
    values = np.empty((len(regions), len(thetas)))
    for i, region in enumerate(regions):
        if isinstance(region, BandRegion):
            values[i] = region.band_values(thetas)
        elif isinstance(region, SliceFnRegion) and region.band_fn is not None:
            values[i] = region.band_fn(thetas)
        else:
            return None
        if np.any(np.isnan(values[i])):
            return None
    return values


def d_cross_matrix(regions_a, regions_b, dens, body, n_theta=2048):
    """Pairwise d-distances; exact band fast path, region algebra fallback."""
    thetas = (np.arange(n_theta) + 0.5) * body.perimeter / n_theta
    va = _band_value_matrix(regions_a, thetas)
    vb = _band_value_matrix(regions_b, thetas)
    if va is not None and vb is not None:
        return np.sqrt(np.clip(band_d2_matrix(va, vb, thetas, dens, body), 0.0, None))
    out = np.empty((len(regions_a), len(regions_b)))
    for i, ra in enumerate(regions_a):
        for j, rb in enumerate(regions_b):
            out[i, j] = d_metric(ra, rb, dens, body)
    return out


def hausdorff_gamma(bn_regions, b_regions, dens, body, d_matrix=None) -> float:
    """Hausdorff distance between two discretized classes under d."""
    if not bn_regions or not b_regions:
        raise ValueError("both class grids must be nonempty")
    if d_matrix is None:
        d_matrix = d_cross_matrix(bn_regions, b_regions, dens, body)
    forward = d_matrix.min(axis=1).max()
    backward = d_matrix.min(axis=0).max()
    return float(max(forward, backward))
