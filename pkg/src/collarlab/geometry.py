"""Planar convex-body geometry: projection, signed distance, collar, magnification.

Bodies are discs or strictly convex polygons. The boundary is parametrized by
arclength theta in [0, perimeter), counterclockwise; the disc origin sits at
angle 0, a polygon's origin at its first input vertex. Everything here is
immutable and pure, so values can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import (
    EpsTooLarge,
    NormalUndefinedAtCorner,
    OutsideNeighborhood,
    SkeletonPoint,
)

# Two candidate feet closer in distance than EQ_DIST_TOL but farther apart
# than FOOT_SEP_TOL mean the query point sits on the skeleton.
EQ_DIST_TOL = 1e-12
FOOT_SEP_TOL = 1e-9
CORNER_TOL = 1e-12


@dataclass(frozen=True)
class BoundaryPoint:
    """A boundary point given both as arclength and as coordinates."""

    theta: float
    position: np.ndarray


@dataclass(frozen=True)
class SignedProjection:
    """Metric projection output: foot, signed distance, outer normal."""

    foot: BoundaryPoint
    signed_distance: float
    normal: np.ndarray


@dataclass(frozen=True)
class CylinderPoint:
    """A point of the cylinder Gamma = boundary x [-1, 1]."""

    theta: float
    s: float


def _as_point(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (2,) or not np.all(np.isfinite(z)):
        raise ValueError(f"expected a finite 2d point, got {z!r}")
    return z


class ConvexBody:
    """Shared interface of Disc and ConvexPolygon."""

    perimeter: float
    area: float
    inradius: float

    # --- scalar/vector primitives implemented by subclasses ---

    def contains(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project_many(self, pts: np.ndarray):
        """Vectorized projection: arrays (theta, unsigned_distance, inside)."""
        raise NotImplementedError

    def boundary_many(self, thetas: np.ndarray):
        """Positions, normals and a corner mask for arclength values.

        At polygon vertices the returned normal is the inward/outward
        bisector direction; the corner mask flags those rows.
        """
        raise NotImplementedError

    def corner_thetas(self) -> np.ndarray:
        return np.empty(0)

    def corner_fan_angles(self) -> np.ndarray:
        return np.empty(0)

    def signed_distance_many(self, pts: np.ndarray) -> np.ndarray:
        _, dist, inside = self.project_many(np.asarray(pts, dtype=float))
        return np.where(inside, -dist, dist)

    def wrap_theta(self, theta):
        return np.mod(theta, self.perimeter)


class Disc(ConvexBody):
    def __init__(self, center=(0.0, 0.0), radius=1.0):
        center = _as_point(center)
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.center = center
        self.radius = float(radius)
        self.perimeter = 2.0 * np.pi * self.radius
        self.area = np.pi * self.radius**2
        self.inradius = self.radius

    def __repr__(self):
        return f"Disc(center={tuple(self.center)}, radius={self.radius})"

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        d = pts - self.center
        return d[..., 0] ** 2 + d[..., 1] ** 2 <= self.radius**2

    def project_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = pts - self.center
        r = np.hypot(v[:, 0], v[:, 1])
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2.0 * np.pi)
        theta = self.radius * ang
        dist = np.abs(r - self.radius)
        return theta, dist, r <= self.radius

    def boundary_many(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        ang = self.wrap_theta(thetas) / self.radius
        normals = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        positions = self.center + self.radius * normals
        return positions, normals, np.zeros(thetas.shape, dtype=bool)


class ConvexPolygon(ConvexBody):
    def __init__(self, vertices):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise ValueError("need at least 3 planar vertices")
        if not np.all(np.isfinite(verts)):
            raise ValueError("vertices must be finite")
        edges = np.roll(verts, -1, axis=0) - verts
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        scale = np.max(np.abs(verts)) + 1.0
        if np.any(cross <= 1e-12 * scale**2):
            raise ValueError(
                "vertices must be counterclockwise with strictly convex turning"
            )
        self.vertices = verts
        self.edge_lengths = np.hypot(edges[:, 0], edges[:, 1])
        self.tangents = edges / self.edge_lengths[:, None]
        # interior lies to the left of each directed edge
        self.normals = np.stack([self.tangents[:, 1], -self.tangents[:, 0]], axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])
        self.perimeter = float(self.cum[-1])
        x, y = verts[:, 0], verts[:, 1]
        self.area = 0.5 * float(
            np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        )
        # interior angle at vertex i, between incoming edge i-1 and edge i
        prev_t = np.roll(self.tangents, 1, axis=0)
        cos_turn = np.clip(np.sum(prev_t * self.tangents, axis=1), -1.0, 1.0)
        self._turn_angles = np.arccos(cos_turn)
        self.interior_angles = np.pi - self._turn_angles
        self.inradius = self._compute_inradius()

    def __repr__(self):
        return f"ConvexPolygon({self.vertices.tolist()})"

    def _compute_inradius(self) -> float:
        # Chebyshev center: maximize r with z at inward distance >= r of
        # every edge line, i.e. -(z - v_j).n_j >= r.
        m = self.normals
        a_ub = np.column_stack([m, np.ones(len(m))])
        b_ub = np.sum(m * self.vertices, axis=1)
        res = linprog(
            c=[0.0, 0.0, -1.0],
            A_ub=a_ub,
            b_ub=b_ub,
            bounds=[(None, None), (None, None), (0, None)],
            method="highs",
        )
        if not res.success:
            raise ValueError("inradius LP failed; polygon may be degenerate")
        return float(res.x[2])

    def corner_thetas(self):
        return self.cum[:-1].copy()

    def corner_fan_angles(self):
        return self._turn_angles.copy()

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        rel = pts[..., None, :] - self.vertices
        side = np.einsum("...ij,ij->...i", rel, self.normals)
        return np.all(side <= 1e-12, axis=-1)

    def project_many(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = pts.shape[0]
        rel = pts[:, None, :] - self.vertices[None, :, :]
        t = np.einsum("nij,ij->ni", rel, self.tangents)
        t = np.clip(t, 0.0, self.edge_lengths)
        feet = self.vertices[None, :, :] + t[:, :, None] * self.tangents[None, :, :]
        diff = pts[:, None, :] - feet
        d2 = diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2
        best = np.argmin(d2, axis=1)
        idx = np.arange(n)
        theta = self.wrap_theta(self.cum[best] + t[idx, best])
        dist = np.sqrt(d2[idx, best])
        return theta, dist, self.contains(pts)

    def edge_foot_candidates(self, z: np.ndarray):
        """Per-edge nearest points; used by the skeleton-aware projection."""
        rel = z - self.vertices
        t = np.clip(np.einsum("ij,ij->i", rel, self.tangents), 0.0, self.edge_lengths)
        feet = self.vertices + t[:, None] * self.tangents
        dists = np.hypot(*(z - feet).T)
        thetas = self.wrap_theta(self.cum[:-1] + t)
        return feet, dists, thetas

    def locate(self, theta: float):
        """Edge index and offset along the edge for an arclength value."""
        theta = float(self.wrap_theta(theta))
        j = int(np.searchsorted(self.cum, theta, side="right") - 1)
        j = min(j, len(self.edge_lengths) - 1)
        return j, theta - self.cum[j]

    def vertex_bisector_normal(self, i: int) -> np.ndarray:
        b = self.normals[i - 1] + self.normals[i]
        return b / np.hypot(*b)

    def boundary_many(self, thetas):
        thetas = np.asarray(thetas, dtype=float)
        flat = self.wrap_theta(thetas).ravel()
        j = np.clip(
            np.searchsorted(self.cum, flat, side="right") - 1,
            0,
            len(self.edge_lengths) - 1,
        )
        lam = flat - self.cum[j]
        positions = self.vertices[j] + lam[:, None] * self.tangents[j]
        normals = self.normals[j].copy()
        at_start = lam <= CORNER_TOL
        at_end = (self.edge_lengths[j] - lam) <= CORNER_TOL
        corner = at_start | at_end
        for k in np.nonzero(corner)[0]:
            i = int(j[k]) if at_start[k] else (int(j[k]) + 1) % len(self.edge_lengths)
            positions[k] = self.vertices[i]
            normals[k] = self.vertex_bisector_normal(i)
        shape = thetas.shape
        return (
            positions.reshape(shape + (2,)),
            normals.reshape(shape + (2,)),
            corner.reshape(shape),
        )


def make_disc(center=(0.0, 0.0), radius=1.0) -> Disc:
    return Disc(center, radius)


def unit_square() -> ConvexPolygon:
    return ConvexPolygon([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


def check_eps(body: ConvexBody, eps: float) -> float:
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps >= body.inradius:
        raise EpsTooLarge(
            f"eps={eps} must stay below the inradius {body.inradius} of the body"
        )
    return eps


def project(body: ConvexBody, z) -> SignedProjection:
    """Metric projection of z onto the boundary, with skeleton detection."""
    z = _as_point(z)
    if isinstance(body, Disc):
        v = z - body.center
        r = float(np.hypot(*v))
        if r <= EQ_DIST_TOL:
            raise SkeletonPoint("disc center is the skeleton")
        u = v / r
        pos = body.center + body.radius * u
        theta = float(body.wrap_theta(body.radius * np.arctan2(u[1], u[0])))
        return SignedProjection(BoundaryPoint(theta, pos), r - body.radius, u)

    feet, dists, thetas = body.edge_foot_candidates(z)
    order = np.argsort(dists)
    dmin = dists[order[0]]
    near = [k for k in order if dists[k] <= dmin + EQ_DIST_TOL]
    for k in near[1:]:
        if np.hypot(*(feet[k] - feet[near[0]])) > FOOT_SEP_TOL:
            raise SkeletonPoint(
                f"point {tuple(z)} has non-unique nearest boundary point"
            )
    k = min(near, key=lambda i: thetas[i])
    foot, theta = feet[k], float(thetas[k])
    inside = bool(body.contains(z[None])[0])
    if dmin > FOOT_SEP_TOL:
        u = (z - foot) / dmin
        if inside:
            u = -u
    else:
        _, normals, _ = body.boundary_many(np.array([theta]))
        u = normals[0]
    signed = -dmin if inside else dmin
    return SignedProjection(BoundaryPoint(theta, foot), float(signed), u)


def local_reach(body: ConvexBody, theta: float) -> float:
    """Radius of the largest ball inside the body touching the boundary there."""
    if isinstance(body, Disc):
        return body.radius
    theta = float(body.wrap_theta(theta))
    j, lam = body.locate(theta)
    if lam <= CORNER_TOL or (body.edge_lengths[j] - lam) <= CORNER_TOL:
        return 0.0
    x = body.vertices[j] + lam * body.tangents[j]
    m = -body.normals[j]
    reach = np.inf
    for k in range(len(body.edge_lengths)):
        if k == j:
            continue
        h = -float(np.dot(x - body.vertices[k], body.normals[k]))
        denom = 1.0 - float(np.dot(m, -body.normals[k]))
        if denom > 1e-12:
            reach = min(reach, h / denom)
    return float(max(reach, 0.0))


def boundary_distance(body: ConvexBody, z) -> float:
    """Distance to the boundary; well defined even on the skeleton."""
    z = _as_point(z)
    _, dist, _ = body.project_many(z[None])
    return float(dist[0])


def in_neighborhood(body: ConvexBody, eps: float, z) -> bool:
    if not eps > 0:
        raise ValueError("eps must be positive")
    return boundary_distance(body, z) <= eps


def magnify(body: ConvexBody, eps: float, z) -> CylinderPoint:
    """Local magnification map: cylinder coordinates of a collar point."""
    eps = check_eps(body, eps)
    proj = project(body, z)
    if abs(proj.signed_distance) > eps * (1.0 + 1e-12):
        raise OutsideNeighborhood(
            f"point {tuple(np.asarray(z, float))} is farther than eps={eps} "
            "from the boundary"
        )
    s = float(np.clip(proj.signed_distance / eps, -1.0, 1.0))
    return CylinderPoint(proj.foot.theta, s)


def magnify_many(body: ConvexBody, eps: float, pts: np.ndarray) -> np.ndarray:
    """Vectorized magnification; returns an (n, 2) array of (theta, s)."""
    eps = check_eps(body, eps)
    theta, dist, inside = body.project_many(pts)
    s = np.where(inside, -dist, dist) / eps
    if np.any(np.abs(s) > 1.0 + 1e-9):
        raise OutsideNeighborhood("some points fall outside the collar")
    return np.column_stack([theta, np.clip(s, -1.0, 1.0)])


def unmagnify(body: ConvexBody, eps: float, theta: float, s: float) -> np.ndarray:
    """Inverse magnification along the outer normal at arclength theta."""
    eps = check_eps(body, eps)
    if abs(s) > 1.0 + 1e-12:
        raise ValueError("|s| must not exceed 1")
    pos, normal, corner = body.boundary_many(np.array([float(theta)]))
    if corner[0] and s > CORNER_TOL:
        raise NormalUndefinedAtCorner(
            f"outer normal is set-valued at theta={theta}"
        )
    return pos[0] + s * eps * normal[0]


def unmagnify_many(body: ConvexBody, eps: float, thetas, ss, on_corner="error"):
    """Vectorized inverse magnification.

    on_corner="mask" returns (points, valid) where rows at a polygon vertex
    with s > 0 are flagged invalid instead of raising; rasterizers skip them.
    """
    eps = check_eps(body, eps)
    thetas = np.asarray(thetas, dtype=float)
    ss = np.asarray(ss, dtype=float)
    pos, normals, corner = body.boundary_many(thetas)
    bad = corner & (ss > CORNER_TOL)
    if on_corner == "error" and np.any(bad):
        raise NormalUndefinedAtCorner("outer normal set-valued at a vertex")
    pts = pos + ss[..., None] * eps * normals
    return pts, ~bad


def clip_halfplane(verts: np.ndarray, point: np.ndarray, normal: np.ndarray):
    """Keep the part of a convex polygon with (z - point).normal <= 0."""
    out = []
    n = len(verts)
    vals = (verts - point) @ normal
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        fa, fb = vals[i], vals[(i + 1) % n]
        if fa <= 0:
            out.append(a)
            if fb > 0:
                out.append(a + (b - a) * (fa / (fa - fb)))
        elif fb <= 0:
            out.append(a + (b - a) * (fa / (fa - fb)))
    return np.array(out) if out else np.empty((0, 2))


def _polygon_area(verts: np.ndarray) -> float:
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def inner_parallel_body(poly: ConvexPolygon, eps: float) -> np.ndarray:
    """Vertices of {z in K : dist(z, boundary) >= eps} via half-plane clipping."""
    verts = poly.vertices.copy()
    for j in range(len(poly.edge_lengths)):
        anchor = poly.vertices[j] - eps * poly.normals[j]
        verts = clip_halfplane(verts, anchor, poly.normals[j])
        if len(verts) == 0:
            break
    return verts


def collar_areas(body: ConvexBody, eps: float):
    """Areas of the outer and inner halves of the collar, in closed form."""
    eps = check_eps(body, eps)
    if isinstance(body, Disc):
        r = body.radius
        return (
            float(np.pi * ((r + eps) ** 2 - r**2)),
            float(np.pi * (r**2 - (r - eps) ** 2)),
        )
    outer = body.perimeter * eps + np.pi * eps**2
    inner = body.area - _polygon_area(inner_parallel_body(body, eps))
    return float(outer), float(inner)


def neighborhood_area(body: ConvexBody, eps: float) -> float:
    """Lebesgue area of the collar {dist(z, boundary) <= eps}."""
    outer, inner = collar_areas(body, eps)
    return outer + inner
