import numpy as np
import pytest
from scipy import stats

from collarlab import (
    ChangeSetModel,
    DegenerateSolution,
    DiscElement,
    EmptyPairing,
    Infeasible,
    TwoLevelDensity,
    changeset_counts,
    changeset_loglik,
    excess_mass,
    lens_area,
    min_volume_set,
    sample_ambient,
    sband,
    statement_a_statistic,
    statement_b_test,
    upper_half,
)
from collarlab.verify import _population_disc_mass


class TestLensArea:
    def test_limits(self):
        assert lens_area(3.0, 1.0, 1.0) == 0.0
        assert lens_area(0.0, 1.0, 2.0) == pytest.approx(np.pi)

    def test_against_monte_carlo(self):
        rng = np.random.default_rng(2)
        pts = rng.uniform(-1.5, 2.5, size=(400_000, 2))
        for d, r1, r2 in [(0.7, 1.0, 1.0), (1.2, 0.8, 1.1)]:
            inside = (np.hypot(pts[:, 0], pts[:, 1]) <= r1) & (
                np.hypot(pts[:, 0] - d, pts[:, 1]) <= r2
            )
            mc = np.mean(inside) * 16.0
            assert lens_area(d, r1, r2) == pytest.approx(mc, abs=0.02)


class TestChangeset:
    def test_hand_example(self, disc):
        pts = np.array([[1.02, 0.0], [-1.01, 0.0], [-0.98, 0.0], [0.0, 0.0]])
        k_eps = DiscElement((0.05, 0.0), 1.0)
        assert changeset_counts(pts, disc, k_eps) == (1, 1)

    def test_no_change(self, disc):
        pts = np.array([[0.5, 0.0], [1.5, 0.0]])
        assert changeset_counts(pts, disc, DiscElement((0.0, 0.0), 1.0)) == (0, 0)

    def test_deep_interior(self, disc):
        pts = np.zeros((5, 2))
        assert changeset_counts(pts, disc, DiscElement((0.05, 0.0), 1.0)) == (0, 0)

    def test_loglik_arithmetic(self, disc):
        class Unit:
            @staticmethod
            def logpdf(y):
                return np.asarray(y, dtype=float)

        class Zero:
            @staticmethod
            def logpdf(y):
                return np.zeros(np.shape(y))

        model = ChangeSetModel(
            disc, lambda e: DiscElement((e, 0.0), 1.0), Zero, Unit
        )
        pts = np.array([[1.001, 0.0], [-0.999, 0.0]])  # one added, one removed
        marks = np.array([0.7, -0.2])
        assert changeset_loglik(pts, marks, model, 0.05) == pytest.approx(
            0.7 - (-0.2)
        )

    def test_loglik_reduces_to_counts(self, disc):
        class Ones:
            @staticmethod
            def logpdf(y):
                return np.ones(np.shape(y))

        class Zero:
            @staticmethod
            def logpdf(y):
                return np.zeros(np.shape(y))

        model = ChangeSetModel(
            disc, lambda e: DiscElement((10 * e, 0.0), 1.0), Zero, Ones
        )
        rng = np.random.default_rng(6)
        pts = rng.uniform(-1.3, 1.3, size=(2000, 2))
        marks = rng.normal(size=2000)
        added, removed = changeset_counts(pts, disc, model.k_eps(0.05))
        assert changeset_loglik(pts, marks, model, 0.05) == pytest.approx(
            added - removed
        )

    def test_empty_difference_is_zero(self, disc):
        model = ChangeSetModel(
            disc, lambda e: DiscElement((0.0, 0.0), 1.0),
            stats.norm(0, 1), stats.norm(1, 1),
        )
        pts = np.array([[0.2, 0.1], [1.4, 0.2]])
        assert changeset_loglik(pts, np.array([0.3, 0.4]), model, 0.01) == 0.0


class TestExcessMass:
    def test_population_recovers_exactly(self, disc, two_level):
        lam = (two_level.c_in + two_level.c_out) / 2.0
        fit = excess_mass(None, lam, mode="population", body=disc, dens=two_level)
        assert fit.center == (0.0, 0.0)
        assert fit.radius == 1.0

    def test_degenerate_when_lambda_large(self, disc, two_level):
        with pytest.raises(DegenerateSolution):
            excess_mass(None, two_level.c_in * 1.01, mode="population",
                        body=disc, dens=two_level)

    def test_rescale_invariance(self, disc, two_level):
        # scaling the density and lambda together moves the objective by the
        # same factor, so the argmax parameters cannot change
        lam = (two_level.c_in + two_level.c_out) / 2.0
        scaled = TwoLevelDensity(3 * two_level.c_in, 3 * two_level.c_out, 2.0)
        f1 = excess_mass(None, lam, mode="population", body=disc, dens=two_level)
        f2 = excess_mass(None, 3 * lam, mode="population", body=disc, dens=scaled)
        assert f1.center == f2.center and f1.radius == f2.radius
        assert f2.objective == pytest.approx(3 * f1.objective)

    def test_sample_mode_recovery(self, disc, two_level):
        lam = (two_level.c_in + two_level.c_out) / 2.0
        pts = sample_ambient(disc, two_level, 10**5, seed=1003)
        fit = excess_mass(pts, lam, mode="sample")
        assert abs(fit.center[0]) <= 0.05
        assert abs(fit.center[1]) <= 0.05
        assert abs(fit.radius - 1.0) <= 0.05


class TestMinVolume:
    def test_population_concentric_large_alpha(self, disc, two_level):
        alpha = 0.9 * two_level.c_in * np.pi
        fit = min_volume_set(None, alpha, mode="population", body=disc,
                             dens=two_level, stages=5)
        assert fit.center == (0.0, 0.0)
        assert fit.radius == pytest.approx(np.sqrt(0.9), abs=0.002)
        mass = _population_disc_mass(
            disc, two_level, np.array([fit.center]), np.array([fit.radius])
        )[0]
        assert mass >= alpha

    def test_uniform_tiny_alpha_radius(self, disc, uniform16):
        fit = min_volume_set(None, 0.01, mode="population", body=disc,
                             dens=uniform16)
        assert fit.radius == pytest.approx(np.sqrt(0.01 * 16 / np.pi), abs=0.01)

    def test_no_smaller_feasible_neighbor(self, disc, two_level):
        alpha = 0.9 * two_level.c_in * np.pi
        fit = min_volume_set(None, alpha, mode="population", body=disc,
                             dens=two_level, stages=4)
        smaller = fit.radius - 0.004  # one final-stage radius cell below
        mass = _population_disc_mass(
            disc, two_level, np.array([fit.center]), np.array([smaller])
        )[0]
        assert mass < alpha

    def test_infeasible(self, disc, uniform16):
        with pytest.raises(Infeasible):
            min_volume_set(None, 0.9, mode="population", body=disc,
                           dens=uniform16, radius_range=(0.05, 0.5))

    def test_sample_mass_constraint(self, disc, two_level):
        alpha = 0.5 * two_level.c_in * np.pi
        pts = sample_ambient(disc, two_level, 50_000, seed=77)
        fit = min_volume_set(pts, alpha, mode="sample")
        frac = np.mean(
            np.hypot(pts[:, 0] - fit.center[0], pts[:, 1] - fit.center[1])
            <= fit.radius
        )
        assert frac >= alpha


class TestStatementMachineryShapes:
    def test_statement_a_trivial_identity_grid(self, disc, uniform16):
        # singleton grids force the only pair to be (B, B): sup gap can only
        # come from the moving/limit profile mismatch, tiny at small eps
        rep = statement_a_statistic(
            disc, uniform16, [(2000, 0.02)], [0.0], [0.1], [0.0],
            reps=5, master_seed=1,
        )
        assert rep["per_n"][0]["n_pairs"] >= 1
        assert rep["per_n"][0]["median_sup"] < 0.5

    def test_statement_a_empty_pairing(self, disc, uniform16):
        with pytest.raises(EmptyPairing):
            statement_a_statistic(
                disc, uniform16, [(2000, 0.02)], [0.0], [0.1], [0.0],
                reps=2, master_seed=1, gamma=-1.0,
            )

    def test_statement_b_region_cap(self, disc, uniform16):
        with pytest.raises(ValueError):
            statement_b_test(disc, uniform16, 100, 0.05,
                             [upper_half()] * 65, reps=2)

    def test_statement_b_small_smoke(self, disc, uniform16):
        rep = statement_b_test(
            disc, uniform16, 10**4, 0.1, [upper_half(), sband([(-1, 0)])],
            reps=50, master_seed=3, ks_threshold=1.0, cov_atol=1.0,
        )
        assert len(rep["per_region"]) == 2
        assert rep["cov_max_abs_dev"] < 1.0

    def test_statement_a_interval_bands_identity(self, disc, uniform16):
        # the moving class equals its limit class, so every sup gap is zero
        from collarlab import IntervalBandsElement, statement_a_generic, tau_image
        from collarlab.regions import BoxRegion

        params = [(-0.8, -0.4, 0.0, 0.4), (-0.2, 0.2, 0.5, 0.9)]
        limits = [BoxRegion([p[:2], p[2:]]) for p in params]

        def moving_fn(eps):
            return [
                tau_image(IntervalBandsElement(disc, *p, eps), disc, eps)
                for p in params
            ]

        rep = statement_a_generic(
            disc, uniform16, [(2000, 0.1), (20000, 0.05)], moving_fn, limits,
            reps=10, master_seed=4,
        )
        for row in rep["per_n"]:
            assert row["gamma_n"] <= 1e-9
            assert row["median_sup"] == 0.0

    def test_statement_b_ks_fraction_invariant(self, disc, uniform16):
        # at n=1e5 / 1000 reps, at most 10% of grid regions fail KS <= 0.06
        from collarlab import BandRegion, EllipseBandF
        from collarlab.regions import BoxRegion

        regions = [
            upper_half(),
            sband([(-1.0, 0.0)]),
            sband([(-0.5, 0.5)]),
            BoxRegion([(-1.0, 1.0)], [(0.0, np.pi)]),
            BandRegion(EllipseBandF(0.0, 0.0, 0.0, 0.5)),
            BandRegion(EllipseBandF(0.0, 0.0, 0.5, 0.0)),
        ]
        rep = statement_b_test(
            disc, uniform16, 10**5, 0.05, regions, reps=1000, master_seed=2
        )
        assert rep["frac_ks_fail"] <= 0.10

    def test_supfun_same_law_sanity(self, disc, uniform16):
        # W against W with independent seeds: same distribution
        from collarlab import brownian_field

        regs = [upper_half(), sband([(-1, 0)]), sband([(-0.5, 0.5)])]
        d1 = brownian_field(regs, uniform16, disc, seed=10, draws=1000)
        d2 = brownian_field(regs, uniform16, disc, seed=11, draws=1000)
        ks = stats.ks_2samp(
            np.max(np.abs(d1.values), axis=1), np.max(np.abs(d2.values), axis=1)
        )
        assert ks.statistic <= 0.06
