import numpy as np
import pytest

from collarlab import (
    ConvexPolygon,
    EpsTooLarge,
    NormalUndefinedAtCorner,
    OutsideNeighborhood,
    SkeletonPoint,
    boundary_distance,
    collar_areas,
    in_neighborhood,
    local_reach,
    magnify,
    magnify_many,
    neighborhood_area,
    project,
    unmagnify,
    unmagnify_many,
)


def square_boundary_distance(pts):
    """Independent oracle: distance from points to the unit-square boundary."""
    pts = np.asarray(pts, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    inside = (x >= 0) & (x <= 1) & (y >= 0) & (y <= 1)
    inner = np.minimum.reduce([x, 1 - x, y, 1 - y])
    dx = np.maximum(np.maximum(-x, x - 1), 0.0)
    dy = np.maximum(np.maximum(-y, y - 1), 0.0)
    outer = np.hypot(dx, dy)
    return np.where(inside, inner, outer)


class TestProject:
    def test_disc_radial(self, disc):
        p = project(disc, (2.0, 0.0))
        assert p.foot.theta == pytest.approx(0.0, abs=1e-12)
        assert p.signed_distance == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(p.normal, [1.0, 0.0])
        assert np.allclose(p.foot.position, [1.0, 0.0])

    def test_square_corner_345(self, square):
        p = project(square, (-0.3, -0.4))
        assert np.allclose(p.foot.position, [0.0, 0.0], atol=1e-12)
        assert p.signed_distance == pytest.approx(0.5)
        assert np.allclose(p.normal, [-0.6, -0.8])

    def test_disc_center_is_skeleton(self, disc):
        with pytest.raises(SkeletonPoint):
            project(disc, (0.0, 0.0))

    def test_square_diagonal_is_skeleton(self, square):
        for z in [(0.3, 0.3), (0.5, 0.5), (0.7, 0.3)]:
            with pytest.raises(SkeletonPoint):
                project(square, z)

    def test_reconstruction(self, disc, square):
        rng = np.random.default_rng(7)
        for body in (disc, square):
            for _ in range(50):
                z = rng.uniform(-1.5, 2.0, 2)
                try:
                    p = project(body, z)
                except SkeletonPoint:
                    continue
                rebuilt = p.foot.position + p.signed_distance * p.normal
                assert np.allclose(rebuilt, z, atol=1e-9)

    def test_projection_optimality(self, disc, square):
        # nearest means nearest: against 1e3 random boundary points
        rng = np.random.default_rng(11)
        for body in (disc, square):
            zs = rng.uniform(-1.2, 1.8, size=(10_000, 2))
            theta_b = rng.uniform(0.0, body.perimeter, 1000)
            bpos, _, _ = body.boundary_many(theta_b)
            _, dist, _ = body.project_many(zs)
            cross = np.min(
                np.hypot(
                    zs[:, None, 0] - bpos[None, :, 0],
                    zs[:, None, 1] - bpos[None, :, 1],
                ),
                axis=1,
            )
            assert np.all(dist <= cross + 1e-12)

    def test_sign_correctness(self, disc, square):
        rng = np.random.default_rng(3)
        zs = rng.uniform(-1.5, 1.5, size=(10_000, 2))
        inside_disc = np.hypot(zs[:, 0], zs[:, 1]) < 1.0
        theta, dist, inside = disc.project_many(zs)
        assert np.array_equal(inside, np.hypot(zs[:, 0], zs[:, 1]) <= 1.0)
        signed = np.where(inside, -dist, dist)
        assert np.all((signed < 0) == inside_disc | (dist == 0))
        sq_inside = (
            (zs[:, 0] >= 0) & (zs[:, 0] <= 1) & (zs[:, 1] >= 0) & (zs[:, 1] <= 1)
        )
        _, _, inside2 = square.project_many(zs)
        assert np.array_equal(inside2, sq_inside)

    def test_distance_lipschitz(self, disc, square):
        rng = np.random.default_rng(5)
        for body in (disc, square):
            a = rng.uniform(-1.5, 1.5, size=(5000, 2))
            b = a + rng.normal(0.0, 0.3, size=(5000, 2))
            _, da, _ = body.project_many(a)
            _, db, _ = body.project_many(b)
            gaps = np.abs(da - db) - np.hypot(*(a - b).T)
            assert np.max(gaps) <= 1e-9


class TestLocalReach:
    def test_disc(self, disc):
        for theta in (0.0, 1.234, 5.9):
            assert local_reach(disc, theta) == pytest.approx(1.0)

    def test_square_bottom_edge(self, square):
        assert local_reach(square, 0.3) == pytest.approx(0.3)
        assert local_reach(square, 0.5) == pytest.approx(0.5)
        assert local_reach(square, 0.8) == pytest.approx(0.2)

    def test_square_corners(self, square):
        for theta in (0.0, 1.0, 2.0, 3.0):
            assert local_reach(square, theta) == 0.0


class TestNeighborhood:
    def test_membership_examples(self, disc, square):
        assert in_neighborhood(disc, 0.1, (1.05, 0.0))
        assert not in_neighborhood(disc, 0.1, (0.0, 0.0))
        assert in_neighborhood(square, 0.1, (-0.05, -0.05))

    def test_boundary_distance_on_skeleton(self, square):
        # distance is fine even where the projection is ambiguous
        assert boundary_distance(square, (0.5, 0.5)) == pytest.approx(0.5)


class TestMagnification:
    def test_magnify_examples(self, disc, square):
        c = magnify(disc, 0.1, (1.05, 0.0))
        assert (c.theta, c.s) == (pytest.approx(0.0), pytest.approx(0.5))
        c = magnify(disc, 0.1, (0.0, 0.95))
        assert c.theta == pytest.approx(np.pi / 2)
        assert c.s == pytest.approx(-0.5)
        c = magnify(square, 0.1, (0.5, 1.05))
        assert c.theta == pytest.approx(2.5)
        assert c.s == pytest.approx(0.5)

    def test_magnify_errors(self, disc):
        with pytest.raises(OutsideNeighborhood):
            magnify(disc, 0.1, (1.5, 0.0))
        with pytest.raises(SkeletonPoint):
            magnify(disc, 0.9, (0.0, 0.0))
        with pytest.raises(EpsTooLarge):
            magnify(disc, 1.5, (1.05, 0.0))

    def test_unmagnify_examples(self, disc, square):
        assert np.allclose(unmagnify(disc, 0.1, 0.0, 0.5), [1.05, 0.0])
        assert np.allclose(unmagnify(disc, 0.1, np.pi, -1.0), [-0.9, 0.0])
        assert np.allclose(unmagnify(square, 0.1, 0.5, -0.5), [0.5, 0.05])

    def test_unmagnify_corner_error(self, square):
        with pytest.raises(NormalUndefinedAtCorner):
            unmagnify(square, 0.1, 1.0, 0.5)
        # inward at a corner is allowed (bisector direction)
        z = unmagnify(square, 0.1, 0.0, -0.5)
        assert square.contains(z[None])[0]

    def test_round_trip(self, disc, square):
        rng = np.random.default_rng(17)
        eps = 0.15
        for body in (disc, square):
            thetas = rng.uniform(0.0, body.perimeter, 40_000)
            ss = rng.uniform(-1.0, 1.0, 40_000)
            pts, valid = unmagnify_many(body, eps, thetas, ss, on_corner="mask")
            pts = pts[valid]
            keep = square_boundary_distance(pts) <= eps if body is square else None
            back = magnify_many(body, eps, pts)
            # unmagnify(magnify(z)) = z for z off the skeleton
            pts2, valid2 = unmagnify_many(
                body, eps, back[:, 0], back[:, 1], on_corner="mask"
            )
            assert np.allclose(pts2[valid2], pts[valid2], atol=1e-9)


class TestCollarArea:
    def test_disc_closed_form(self, disc):
        for eps in (0.2, 0.1, 0.05):
            assert neighborhood_area(disc, eps) == pytest.approx(
                4 * np.pi * eps, abs=1e-9
            )

    def test_square_example(self, square):
        target = 8 * 0.1 + (np.pi - 4.0) * 0.01
        assert neighborhood_area(square, 0.1) == pytest.approx(target, rel=1e-12)

    def test_area_over_eps_limit(self, disc, square):
        for body in (disc, square):
            target = 2 * body.perimeter
            ratios = [neighborhood_area(body, e) / e for e in (0.1, 0.01, 0.001)]
            assert ratios[-1] == pytest.approx(target, rel=1e-2)
            # errors shrink with eps (the disc ratio is exact for every eps)
            if abs(ratios[0] - target) > 1e-9:
                assert abs(ratios[2] - target) < abs(ratios[0] - target)

    def test_monte_carlo_cross_check(self, square):
        rng = np.random.default_rng(23)
        for eps in (0.2, 0.1, 0.05):
            lo, hi = -eps - 0.01, 1 + eps + 0.01
            pts = rng.uniform(lo, hi, size=(1_000_000, 2))
            frac = np.mean(square_boundary_distance(pts) <= eps)
            mc = frac * (hi - lo) ** 2
            assert neighborhood_area(square, eps) == pytest.approx(mc, rel=0.01)

    def test_eps_cap(self, disc, square):
        with pytest.raises(EpsTooLarge):
            neighborhood_area(disc, 1.0)
        with pytest.raises(EpsTooLarge):
            neighborhood_area(square, 0.5)

    def test_outer_inner_split(self, square):
        outer, inner = collar_areas(square, 0.1)
        assert outer == pytest.approx(4 * 0.1 + np.pi * 0.01)
        assert inner == pytest.approx(1.0 - 0.8**2)


class TestValidation:
    def test_polygon_needs_ccw_strict_convexity(self):
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (0, 1), (1, 1), (1, 0)])  # clockwise
        with pytest.raises(ValueError):
            ConvexPolygon([(0, 0), (1, 0), (2, 0), (1, 1)])  # collinear

    def test_perimeter_and_theta_roundtrip(self, disc, square):
        for body in (disc, square):
            thetas = np.linspace(0.0, body.perimeter, 64, endpoint=False)
            pos, _, _ = body.boundary_many(thetas)
            back, dist, _ = body.project_many(pos)
            assert np.max(dist) < 1e-9
            wrap = np.minimum(
                np.abs(back - thetas), body.perimeter - np.abs(back - thetas)
            )
            assert np.max(wrap) < 1e-9

    def test_triangle_inradius(self):
        tri = ConvexPolygon([(0, 0), (4, 0), (0, 3)])
        s = (3 + 4 + 5) / 2
        assert tri.inradius == pytest.approx(6.0 / s)
        assert tri.area == pytest.approx(6.0)
