"""Densities near the boundary and the measures living on the cylinder.

The cylinder carries four measures built from the two one-sided boundary
density limits p_plus / p_minus:

* ``mp_measure``   the weighted product measure p_pm(theta) dtheta ds,
* ``q_measure``    its normalization, the law of the limit process,
* ``collar_prob``  the ambient probability of the preimage of a region
                   under the magnification map (local Steiner jacobian),
* ``qn_measure``   the conditional law of that preimage given the collar.

Discs use the exact jacobian eps*(1 + eps*s/R). Polygons use eps on edge
strips, exact clipping of the overlapping inner strips along the corner
bisectors, and polar corner sectors. The corner sectors concentrate at a
single arclength value, so for polygons the magnified law carries
theta-atoms of total mass O(eps); ``tv_distance`` accounts for them
explicitly.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import geometry as geo
from .geometry import ConvexBody, Disc, ConvexPolygon, check_eps
from .regions import (
    CylinderRegion,
    FullRegion,
    GridRegion,
    TauImageRegion,
    interval_intersection,
    split_sign,
)

DEFAULT_RASTER = (1024, 256)
_QUAD_OPTS = dict(limit=400, epsabs=1e-11, epsrel=1e-10)


# ---------------------------------------------------------------------------
# densities


class BoundaryDensity:
    """One-sided boundary limits plus an ambient density model."""

    support_halfwidth: float

    def p_plus(self, thetas):
        raise NotImplementedError

    def p_minus(self, thetas):
        raise NotImplementedError

    def density_at(self, body: ConvexBody, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def max_density(self, body: ConvexBody) -> float:
        raise NotImplementedError

    def validate(self, body: ConvexBody):
        mass = ambient_mass(self, body)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"ambient density mass is {mass}, expected 1")
        if mp_total(self, body) <= 0:
            raise ValueError("boundary measure must be positive")


class TwoLevelDensity(BoundaryDensity):
    """Constant density c_in on the body, c_out on the rest of a centered box."""

    def __init__(self, c_in, c_out, half_width):
        if c_in < 0 or c_out < 0:
            raise ValueError("density levels must be nonnegative")
        self.c_in = float(c_in)
        self.c_out = float(c_out)
        self.support_halfwidth = float(half_width)

    def __repr__(self):
        return (
            f"TwoLevelDensity(c_in={self.c_in}, c_out={self.c_out}, "
            f"half_width={self.support_halfwidth})"
        )

    def p_plus(self, thetas):
        return np.full(np.shape(thetas), self.c_out)

    def p_minus(self, thetas):
        return np.full(np.shape(thetas), self.c_in)

    def density_at(self, body, pts):
        pts = np.asarray(pts, dtype=float)
        inside = body.contains(pts)
        r = self.support_halfwidth
        in_box = np.all(np.abs(pts) <= r, axis=-1)
        return np.where(inside, self.c_in, np.where(in_box, self.c_out, 0.0))

    def max_density(self, body):
        return max(self.c_in, self.c_out)


class CollarDensity(BoundaryDensity):
    """p_pm extended constantly along normals in a collar of width eps0.

    Outside the collar the density is the constant that brings the total
    ambient mass to 1 on the centered box.
    """

    def __init__(self, p_plus_fn, p_minus_fn, eps0, half_width, body):
        self._pp = p_plus_fn
        self._pm = p_minus_fn
        self.eps0 = float(check_eps(body, eps0))
        self.support_halfwidth = float(half_width)
        self._body = body
        collar_mass = collar_prob(FullRegion(), self, body, self.eps0, _raw=True)
        box_area = 4.0 * half_width**2
        rest = box_area - geo.neighborhood_area(body, self.eps0)
        self.background = (1.0 - collar_mass) / rest
        if self.background < 0:
            raise ValueError("collar mass exceeds 1; shrink p_pm or eps0")

    def p_plus(self, thetas):
        return np.asarray(self._pp(np.asarray(thetas, dtype=float)), dtype=float)

    def p_minus(self, thetas):
        return np.asarray(self._pm(np.asarray(thetas, dtype=float)), dtype=float)

    def density_at(self, body, pts):
        pts = np.asarray(pts, dtype=float)
        theta, dist, inside = body.project_many(pts)
        vals = np.where(inside, self.p_minus(theta), self.p_plus(theta))
        in_box = np.all(np.abs(pts) <= self.support_halfwidth, axis=-1)
        return np.where(dist <= self.eps0, vals, np.where(in_box, self.background, 0.0))

    def max_density(self, body):
        tg = np.linspace(0.0, body.perimeter, 2048, endpoint=False)
        return float(
            max(self.p_plus(tg).max(), self.p_minus(tg).max(), self.background)
        )


def uniform_density(half_width=2.0) -> TwoLevelDensity:
    c = 1.0 / (4.0 * half_width**2)
    return TwoLevelDensity(c, c, half_width)


def ambient_mass(dens: BoundaryDensity, body: ConvexBody) -> float:
    """Total ambient probability mass (should be 1)."""
    if isinstance(dens, TwoLevelDensity):
        box = 4.0 * dens.support_halfwidth**2
        return dens.c_in * body.area + dens.c_out * (box - body.area)
    box = 4.0 * dens.support_halfwidth**2
    collar = collar_prob(FullRegion(), dens, body, dens.eps0, _raw=True)
    return collar + dens.background * (box - geo.neighborhood_area(body, dens.eps0))


# ---------------------------------------------------------------------------
# quadrature plumbing


def _theta_segments(body: ConvexBody):
    if isinstance(body, ConvexPolygon):
        return [(body.cum[j], body.cum[j + 1]) for j in range(len(body.edge_lengths))]
    return [(0.0, body.perimeter)]


def _quad_over_theta(fn, body, extra_breakpoints=()):
    pts = sorted(
        {float(b) % body.perimeter for b in extra_breakpoints}
        | {seg[0] for seg in _theta_segments(body)}
        | {body.perimeter}
    )
    total = 0.0
    with warnings.catch_warnings():
        # indicator integrands have kinks at unknown abscissas; the adaptive
        # rule resolves them but warns about its error estimate
        warnings.simplefilter("ignore", IntegrationWarning)
        for a, b in zip(pts[:-1], pts[1:]):
            if b - a < 1e-14:
                continue
            val, _ = quad(fn, a, b, **_QUAD_OPTS)
            total += val
    return total


def _polygon_inner_depth(body: ConvexPolygon, thetas, eps):
    """Max inner |s| at each arclength before the foot leaves its edge."""
    thetas = np.asarray(thetas, dtype=float)
    flat = np.mod(thetas, body.perimeter).ravel()
    j = np.clip(
        np.searchsorted(body.cum, flat, side="right") - 1, 0, len(body.edge_lengths) - 1
    )
    lam = flat - body.cum[j]
    ang = body.interior_angles
    tan_l = np.tan(ang[j] / 2.0)
    tan_r = np.tan(ang[(j + 1) % len(body.edge_lengths)] / 2.0)
    depth = np.minimum(lam * tan_l, (body.edge_lengths[j] - lam) * tan_r) / eps
    return np.clip(depth, 0.0, 1.0).reshape(thetas.shape)


def _tau_corner_slice(region, body, eps, theta_i, corner_index, n_dirs=33, n_s=257):
    """s-values at a corner realized by ANY normal direction of the fan."""
    ambient = getattr(region, "ambient_contains", None)
    if ambient is None:
        return region.slice_intervals(theta_i)
    n0 = body.normals[corner_index - 1]
    phi = body.corner_fan_angles()[corner_index]
    t = np.linspace(0.0, phi, n_dirs)
    dirs = np.stack(
        [
            n0[0] * np.cos(t) - n0[1] * np.sin(t),
            n0[0] * np.sin(t) + n0[1] * np.cos(t),
        ],
        axis=1,
    )
    svals = (np.arange(n_s) + 0.5) / n_s
    vertex = body.vertices[corner_index]
    pts = vertex + eps * svals[:, None, None] * dirs[None, :, :]
    member = ambient(pts.reshape(-1, 2)).reshape(n_s, n_dirs)
    hit = member.any(axis=1)
    edges = np.arange(n_s + 1) / n_s
    out = []
    start = None
    for i in range(n_s):
        if hit[i] and start is None:
            start = edges[i]
        elif not hit[i] and start is not None:
            out.append((start, edges[i]))
            start = None
    if start is not None:
        out.append((start, 1.0))
    return out


def _corner_atoms(region, dens, body, eps):
    """Total outer corner-sector mass of the region (polygon bodies only)."""
    if not isinstance(body, ConvexPolygon):
        return 0.0
    total = 0.0
    fans = body.corner_fan_angles()
    for i, theta_i in enumerate(body.corner_thetas()):
        slc = _tau_corner_slice(region, body, eps, theta_i, i)
        pos, _ = split_sign(slc)
        if not pos:
            continue
        s2 = sum(hi**2 - lo**2 for lo, hi in pos)
        total += float(dens.p_plus(theta_i)) * fans[i] * eps**2 * s2 / 2.0
    return total


# ---------------------------------------------------------------------------
# the measures


def mp_total(dens: BoundaryDensity, body: ConvexBody) -> float:
    """Mass of the full cylinder under the boundary measure."""
    return _quad_over_theta(
        lambda t: float(dens.p_plus(t) + dens.p_minus(t)), body
    )


def mp_measure(region: CylinderRegion, dens, body, raster=DEFAULT_RASTER) -> float:
    """Integral of p_pm(theta) over the region, p_plus above / p_minus below."""
    if not region.is_exact and not isinstance(region, GridRegion):
        region = region.to_grid(body.perimeter, *raster)
    if isinstance(region, GridRegion):
        tc = (np.arange(region.n_theta) + 0.5) * body.perimeter / region.n_theta
        sc = -1.0 + (np.arange(region.n_s) + 0.5) * 2.0 / region.n_s
        pp, pm = dens.p_plus(tc), dens.p_minus(tc)
        pos = region.mask[:, sc > 0].sum(axis=1)
        neg = region.mask[:, sc <= 0].sum(axis=1)
        cell = (body.perimeter / region.n_theta) * (2.0 / region.n_s)
        return float(np.sum(pp * pos + pm * neg) * cell)

    def integrand(t):
        slc = region.slice_intervals(t)
        if not slc:
            return 0.0
        pos, neg = split_sign(slc)
        lp = sum(hi - lo for lo, hi in pos)
        ln = sum(hi - lo for lo, hi in neg)
        return float(dens.p_plus(t)) * lp + float(dens.p_minus(t)) * ln

    return _quad_over_theta(integrand, body, region.theta_breakpoints())


def q_measure(region, dens, body, raster=DEFAULT_RASTER) -> float:
    """Normalized boundary measure; the law of the limiting process."""
    return mp_measure(region, dens, body, raster) / mp_total(dens, body)


def _disc_interval_mass(lo, hi, eps, radius):
    # integral of eps*(1 + eps*s/R) ds over (lo, hi]
    return eps * ((hi - lo) + eps * (hi**2 - lo**2) / (2.0 * radius))


def collar_prob(
    region, dens, body, eps, raster=DEFAULT_RASTER, _raw=False
) -> float:
    """Ambient probability of the magnification preimage of the region."""
    if not _raw:
        eps = check_eps(body, eps)
    atoms = _corner_atoms(region, dens, body, eps)

    if not region.is_exact and not isinstance(region, GridRegion):
        grid = region.to_grid(body.perimeter, *raster)
    else:
        grid = region if isinstance(region, GridRegion) else None

    if grid is not None:
        tc = (np.arange(grid.n_theta) + 0.5) * body.perimeter / grid.n_theta
        sc = -1.0 + (np.arange(grid.n_s) + 0.5) * 2.0 / grid.n_s
        w = _collar_weights(tc, sc, dens, body, eps)
        cell = (body.perimeter / grid.n_theta) * (2.0 / grid.n_s)
        return float(np.sum(grid.mask * w) * cell + atoms)

    if isinstance(body, Disc):

        def integrand(t):
            slc = region.slice_intervals(t)
            if not slc:
                return 0.0
            pos, neg = split_sign(slc)
            mass = 0.0
            if pos:
                mass += float(dens.p_plus(t)) * sum(
                    _disc_interval_mass(lo, hi, eps, body.radius) for lo, hi in pos
                )
            if neg:
                mass += float(dens.p_minus(t)) * sum(
                    _disc_interval_mass(lo, hi, eps, body.radius) for lo, hi in neg
                )
            return mass

    else:

        def integrand(t):
            slc = region.slice_intervals(t)
            if not slc:
                return 0.0
            pos, neg = split_sign(slc)
            mass = 0.0
            if pos:
                mass += float(dens.p_plus(t)) * eps * sum(hi - lo for lo, hi in pos)
            if neg:
                depth = float(_polygon_inner_depth(body, t, eps))
                clipped = interval_intersection(neg, [(-depth, 0.0)])
                mass += float(dens.p_minus(t)) * eps * sum(
                    hi - lo for lo, hi in clipped
                )
            return mass

    return _quad_over_theta(integrand, body, region.theta_breakpoints()) + atoms


def _collar_weights(tc, sc, dens, body, eps):
    """Density of the collar pushforward w.r.t. dtheta ds (edge part)."""
    pp, pm = dens.p_plus(tc), dens.p_minus(tc)
    p_side = np.where(sc[None, :] > 0, pp[:, None], pm[:, None])
    if isinstance(body, Disc):
        return eps * (1.0 + eps * sc[None, :] / body.radius) * p_side
    depth = _polygon_inner_depth(body, tc, eps)
    valid = (sc[None, :] > 0) | (sc[None, :] >= -depth[:, None])
    return eps * p_side * valid


def neighborhood_mass(body, dens, eps) -> float:
    """Ambient probability of the collar; exact for two-level densities."""
    eps = check_eps(body, eps)
    if isinstance(dens, TwoLevelDensity):
        outer, inner = geo.collar_areas(body, eps)
        return dens.c_out * outer + dens.c_in * inner
    return collar_prob(FullRegion(), dens, body, eps)


def qn_measure(region, dens, body, eps, raster=DEFAULT_RASTER) -> float:
    """Conditional law of the magnified sample: P(tau^-1 region) / P(collar)."""
    denom = collar_prob(FullRegion(), dens, body, eps)
    return collar_prob(region, dens, body, eps, raster) / denom


def tv_distance(dens, body, eps, grid=(256, 128), refine_tol=1e-4) -> float:
    """Total variation between the magnified law and its limit.

    Both densities are taken w.r.t. dtheta ds on the cylinder; polygon
    corner sectors enter as atoms of the magnified law and count fully.
    """
    eps = check_eps(body, eps)
    n_theta, n_s = grid
    if n_theta < 64 or n_s < 64:
        raise ValueError("grid must be at least (64, 64)")
    n_s += n_s % 2  # keep s = 0 on a cell edge
    a = collar_prob(FullRegion(), dens, body, eps)
    mp_sigma = mp_total(dens, body)
    atom_total = _corner_atoms(FullRegion(), dens, body, eps) / a

    def value(nt, ns):
        tc = (np.arange(nt) + 0.5) * body.perimeter / nt
        sc = -1.0 + (np.arange(ns) + 0.5) * 2.0 / ns
        qn = _collar_weights(tc, sc, dens, body, eps) / a
        pp, pm = dens.p_plus(tc), dens.p_minus(tc)
        q = np.where(sc[None, :] > 0, pp[:, None], pm[:, None]) / mp_sigma
        cell = (body.perimeter / nt) * (2.0 / ns)
        return 0.5 * (float(np.sum(np.abs(qn - q)) * cell) + atom_total)

    prev = value(n_theta, n_s)
    for _ in range(6):
        n_theta, n_s = 2 * n_theta, 2 * n_s
        cur = value(n_theta, n_s)
        if abs(cur - prev) < refine_tol:
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# differentiation of set-valued families


def derivative_deficit(family, region, eps, resolution=(2048, 2048)) -> float:
    """Deficit M(tau_eps A(eps) xor B) of a candidate derivative set B.

    M is the boundary measure with both density limits equal to one. The
    tau-image is rasterized at the given resolution (>= 512 x 512).
    """
    body = family.body
    eps = check_eps(body, eps)
    n_theta, n_s = resolution
    if n_theta < 512 or n_s < 512:
        raise ValueError("resolution must be at least (512, 512)")
    element = family.element(eps)
    tau = TauImageRegion(body, eps, element.contains)
    tc = (np.arange(n_theta) + 0.5) * body.perimeter / n_theta
    sc = -1.0 + (np.arange(n_s) + 0.5) * 2.0 / n_s
    tt, ss = np.meshgrid(tc, sc, indexing="ij")
    m_tau = tau.contains(tt, ss)
    m_b = region.contains(tt, ss)
    cell = (body.perimeter / n_theta) * (2.0 / n_s)
    return float(np.sum(m_tau ^ m_b) * cell)


def measure_derivative_check(family, region, dens, eps_grid):
    """Table of (eps, P(A(eps))/eps, M_p(B)) checking set differentiation."""
    body = family.body
    mp_b = mp_measure(region, dens, body)
    rows = []
    for eps in eps_grid:
        eps = check_eps(body, eps)
        element = family.element(eps)
        tau = getattr(element, "tau_region", None)
        if callable(tau):
            reg = tau(body, eps)
        else:
            reg = TauImageRegion(body, eps, element.contains)
        prob = collar_prob(reg, dens, body, eps)
        rows.append((float(eps), prob / eps, mp_b))
    return rows


# ---------------------------------------------------------------------------
# vectorized fast paths for boundary-function bands (disc bodies)


def band_mp_masses(values, thetas, dens, body) -> np.ndarray:
    """Boundary-measure masses of bands given their values on a theta grid."""
    values = np.atleast_2d(values)
    pp, pm = dens.p_plus(thetas), dens.p_minus(thetas)
    pos = np.clip(values, 0.0, None)
    neg = np.clip(-values, 0.0, None)
    return (pos * pp + neg * pm).mean(axis=1) * body.perimeter


def band_collar_masses(values, thetas, dens, body, eps) -> np.ndarray:
    """Unnormalized collar masses of bands; disc bodies only (exact jacobian)."""
    if not isinstance(body, Disc):
        raise ValueError("band fast path requires a disc body")
    values = np.atleast_2d(values)
    pp, pm = dens.p_plus(thetas), dens.p_minus(thetas)
    pos = np.clip(values, 0.0, None)
    neg = np.clip(-values, 0.0, None)
    r = body.radius
    mass = pp * eps * (pos + eps * pos**2 / (2 * r)) + pm * eps * (
        neg - eps * neg**2 / (2 * r)
    )
    return mass.mean(axis=1) * body.perimeter


def band_d2_matrix(values_a, values_b, thetas, dens, body, chunk=64) -> np.ndarray:
    """Pairwise squared d-distances Q(B xor B') between two families of bands."""
    values_a = np.atleast_2d(values_a)
    values_b = np.atleast_2d(values_b)
    mp_sigma = mp_total(dens, body)
    wp = dens.p_plus(thetas) / mp_sigma * body.perimeter / len(thetas)
    wm = dens.p_minus(thetas) / mp_sigma * body.perimeter / len(thetas)
    ap = np.clip(values_a, 0.0, None)
    an = np.clip(-values_a, 0.0, None)
    bp = np.clip(values_b, 0.0, None)
    bn = np.clip(-values_b, 0.0, None)
    out = np.empty((len(values_a), len(values_b)))
    for i0 in range(0, len(values_a), chunk):
        i1 = min(i0 + chunk, len(values_a))
        dp = np.abs(ap[i0:i1, None, :] - bp[None, :, :])
        dn = np.abs(an[i0:i1, None, :] - bn[None, :, :])
        out[i0:i1] = np.einsum("ijk,k->ij", dp, wp) + np.einsum("ijk,k->ij", dn, wm)
    return out
