import numpy as np
import pytest

from collarlab import (
    TooManyPoints,
    UnsupportedFamily,
    bracket_cover,
    sband,
    shatter_check,
)
from collarlab.entropy import qn_s_marginal


class TestSMarginal:
    def test_disc_marginal_mass(self, disc, uniform16):
        edges, masses = qn_s_marginal(uniform16, disc, 0.1)
        assert masses.sum() == pytest.approx(1.0, abs=1e-6)
        # density is eps(1+eps*s): upper half mass = 0.5 + eps/4
        upper = masses[edges[:-1] >= 0.0].sum()
        assert upper == pytest.approx(0.525, abs=1e-3)

    def test_square_marginal_includes_corners(self, square, uniform16):
        edges, masses = qn_s_marginal(uniform16, square, 0.1)
        assert masses.sum() == pytest.approx(1.0, abs=1e-6)
        upper = masses[edges[:-1] >= 0.0].sum()
        outer = (4 * 0.1 + np.pi * 0.01) / 16.0
        a = (8 * 0.1 + (np.pi - 4) * 0.01) / 16.0
        assert upper == pytest.approx(outer / a, abs=1e-3)


class TestBracketCover:
    def test_wide_delta_single_bracket(self, disc, uniform16):
        cover = bracket_cover("interval_bands", 1.5, uniform16, disc, 0.1)
        assert cover.count == 1
        assert cover.sizes[0] == pytest.approx(1.0)

    def test_delta_half_count_and_sizes(self, disc, uniform16):
        cover = bracket_cover("interval_bands", 0.5, uniform16, disc, 0.1)
        assert cover.count <= (int(np.ceil(2 / 0.5**2)) + 1) ** 4
        assert np.max(cover.sizes) <= 0.5

    def test_brackets_nested_on_probe(self, disc, uniform16):
        cover = bracket_cover("interval_bands", 0.7, uniform16, disc, 0.1)
        rng = np.random.default_rng(3)
        tt = rng.uniform(0, 2 * np.pi, 10_000)
        ss = rng.uniform(-1, 1, 10_000)
        for lower, upper in cover.brackets[:: max(1, cover.count // 50)]:
            lo = lower.contains(tt, ss)
            hi = upper.contains(tt, ss)
            assert not np.any(lo & ~hi)

    def test_random_members_bracketed(self, disc, uniform16):
        cover = bracket_cover("interval_bands", 0.5, uniform16, disc, 0.1)
        rng = np.random.default_rng(5)
        tt = rng.uniform(0, 2 * np.pi, 500)
        ss = rng.uniform(-1, 1, 500)
        for _ in range(1000):
            p = np.sort(rng.uniform(-1, 1, 4))
            lower, upper = cover.brackets[cover.bracket_for(p)]
            member = sband([(p[0], p[1]), (p[2], p[3])]).contains(tt, ss)
            assert not np.any(lower.contains(tt, ss) & ~member)
            assert not np.any(member & ~upper.contains(tt, ss))

    def test_ellipse_band_brackets(self, disc, uniform16):
        box = {"a": (-0.3, 0.3), "b": (0.0, 0.0), "c": (-0.3, 0.3),
               "d": (-0.3, 0.3), "alpha": (0.0, 0.0)}
        cover = bracket_cover("ellipse_bands", 0.6, uniform16, disc, 0.1,
                              param_box=box)
        assert cover.count == len(cover.brackets)
        rng = np.random.default_rng(11)
        tt = rng.uniform(0, 2 * np.pi, 400)
        ss = rng.uniform(-1, 1, 400)
        from collarlab import BandRegion, EllipseBandF

        for _ in range(100):
            a, c, d = rng.uniform(-0.3, 0.3, 3)
            band = BandRegion(EllipseBandF(a, 0.0, c, d, 0.0))
            lower, upper = cover.brackets[
                cover.bracket_for((a, 0.0, c, d, 0.0))
            ]
            member = band.contains(tt, ss)
            assert not np.any(lower.contains(tt, ss) & ~member)
            assert not np.any(member & ~upper.contains(tt, ss))

    def test_ellipse_bracket_sizes_certified(self, disc, uniform16):
        from collarlab import qn_measure

        box = {"a": (-0.2, 0.2), "b": (0.0, 0.0), "c": (0.0, 0.0),
               "d": (-0.2, 0.2), "alpha": (0.0, 0.0)}
        cover = bracket_cover("ellipse_bands", 0.7, uniform16, disc, 0.1,
                              param_box=box)
        for lower, upper in cover.brackets[:: max(1, cover.count // 10)]:
            dn2 = qn_measure(upper ^ lower, uniform16, disc, 0.1)
            assert np.sqrt(max(dn2, 0.0)) <= 0.7 + 1e-6

    def test_unsupported_family(self, disc, uniform16):
        with pytest.raises(UnsupportedFamily):
            bracket_cover("convex_symmdiff", 0.5, uniform16, disc, 0.1)


class TestShatterCheck:
    def test_single_point(self):
        assert shatter_check("sband", [(0.3, 0.2)])

    def test_four_distinct_s(self):
        pts = [(0.1, -0.5), (1.0, -0.1), (2.0, 0.3), (3.0, 0.8)]
        assert shatter_check("sband", pts)

    def test_alternating_five_fails(self):
        pts = [(0.1, -0.8), (1.0, -0.4), (2.0, 0.05), (3.0, 0.45), (4.0, 0.9)]
        assert not shatter_check("sband", pts)

    def test_too_many_points(self):
        pts = [(0.0, s) for s in np.linspace(-0.9, 0.9, 13)]
        with pytest.raises(TooManyPoints):
            shatter_check("sband", pts)

    def test_ellipse_band_class_small_sets(self):
        # two points at distinct angles are separated by trig bands
        pts = [(0.0, 0.5), (np.pi, 0.5)]
        assert shatter_check("ellipse_bands", pts)

    def test_unsupported(self):
        with pytest.raises(UnsupportedFamily):
            shatter_check("convex_bands", [(0.0, 0.0)])
