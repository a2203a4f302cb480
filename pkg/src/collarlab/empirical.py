"""Sampling engines and the local empirical process near the boundary.

Samples live in cylinder coordinates. The default sampling scheme is
two-stage: the number of collar points is binomial in the collar mass, and
the points themselves are conditional draws, obtained by rejection from the
bounding annulus (discs) or the bounding box of the outer offset (polygons)
with density-proportional acceptance. For any collar statistic this is
distributed exactly as full ambient sampling and is much cheaper.

Randomness comes from counter-based Philox streams keyed by
(master_seed, replication_index), so replications are reproducible
independently of scheduling or worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import CovarianceNotPSD, InvalidSchedule
from .geometry import ConvexBody, Disc, check_eps
from .measures import collar_prob, neighborhood_mass, q_measure
from .regions import CylinderRegion


def rep_rng(master_seed: int, index: int = 0) -> np.random.Generator:
    """Philox stream for one replication; mixing is (master_seed, index)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(master_seed), int(index)]))
    )


@dataclass(frozen=True)
class LocalSample:
    """Collar points in cylinder coordinates (columns theta, s)."""

    eps: float
    n_nominal: int
    total_count: int
    points: np.ndarray
    seed: int | None = None

    def thetas(self):
        return self.points[:, 0]

    def ss(self):
        return self.points[:, 1]


def _propose_disc(body: Disc, eps, size, rng):
    r2 = rng.uniform((body.radius - eps) ** 2, (body.radius + eps) ** 2, size)
    phi = rng.uniform(0.0, 2.0 * np.pi, size)
    r = np.sqrt(r2)
    return body.center + np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)


def _propose_polygon(body, eps, size, rng):
    lo = body.vertices.min(axis=0) - eps
    hi = body.vertices.max(axis=0) + eps
    return rng.uniform(lo, hi, size=(size, 2))


def sample_conditional(body, dens, eps, count, seed=0, rng=None) -> LocalSample:
    """i.i.d. draws from the collar-conditional law, in cylinder coordinates."""
    eps = check_eps(body, eps)
    if rng is None:
        rng = rep_rng(seed)
    count = int(count)
    p_max = dens.max_density(body)
    chunks = []
    got = 0
    while got < count:
        size = max(2 * (count - got) + 64, 256)
        if isinstance(body, Disc):
            pts = _propose_disc(body, eps, size, rng)
            keep = np.ones(size, dtype=bool)
        else:
            pts = _propose_polygon(body, eps, size, rng)
            _, dist, _ = body.project_many(pts)
            keep = dist <= eps
        u = rng.uniform(0.0, p_max, size)
        keep &= u < dens.density_at(body, pts)
        accepted = pts[keep]
        if len(accepted):
            theta, dist, inside = body.project_many(accepted)
            s = np.where(inside, -dist, dist) / eps
            chunks.append(np.column_stack([theta, np.clip(s, -1.0, 1.0)]))
            got += len(accepted)
    points = (
        np.concatenate(chunks)[:count] if chunks else np.empty((0, 2))
    )
    return LocalSample(eps, count, count, points, seed)


def sample_two_stage(body, dens, eps, n, seed=0, rng=None) -> LocalSample:
    """Binomial collar count, then conditional points; equals ambient sampling
    in law for every collar statistic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    eps = check_eps(body, eps)
    if rng is None:
        rng = rep_rng(seed)
    a = neighborhood_mass(body, dens, eps)
    total = int(rng.binomial(int(n), a))
    inner = sample_conditional(body, dens, eps, total, rng=rng)
    return LocalSample(eps, int(n), total, inner.points, seed)


def sample_ambient(body, dens, n, seed=0, rng=None) -> np.ndarray:
    """Full ambient draws from a two-level density (for cross-validation)."""
    if rng is None:
        rng = rep_rng(seed)
    r = dens.support_halfwidth
    p_max = dens.max_density(body)
    out = []
    got = 0
    while got < n:
        size = max(2 * (n - got) + 64, 256)
        pts = rng.uniform(-r, r, size=(size, 2))
        u = rng.uniform(0.0, p_max, size)
        keep = u < dens.density_at(body, pts)
        out.append(pts[keep])
        got += int(keep.sum())
    return np.concatenate(out)[:n]


def psi_count(sample: LocalSample, region: CylinderRegion) -> int:
    """Number of sample points falling in the region."""
    if sample.total_count == 0:
        return 0
    return int(np.count_nonzero(region.contains(sample.thetas(), sample.ss())))


def z_stat(sample: LocalSample, region, n, a, prob) -> float:
    """Normalized centered count (Psi(A) - n P(A)) / sqrt(n a).

    prob is the ambient probability of the region's collar preimage,
    i.e. a * qn_measure(region).
    """
    if a <= 0 or n < 1:
        raise ValueError("need a > 0 and n >= 1")
    return (psi_count(sample, region) - n * prob) / np.sqrt(n * a)


def region_ambient_prob(region, dens, body, eps) -> float:
    return collar_prob(region, dens, body, eps)


def vn_values(sample: LocalSample, regions, probs, n, a) -> np.ndarray:
    """Vector of v_n over regions with precomputed ambient probabilities."""
    counts = np.array([psi_count(sample, r) for r in regions], dtype=float)
    return (counts - n * np.asarray(probs)) / np.sqrt(n * a)


@dataclass(frozen=True)
class GaussianDraw:
    """Draws of the set-parametric Brownian motion on a finite region grid."""

    regions: tuple
    values: np.ndarray  # (draws, k)
    covariance: np.ndarray


def q_covariance(regions, dens, body) -> np.ndarray:
    """Covariance matrix Q(B_i and B_j) of the limit process."""
    k = len(regions)
    cov = np.empty((k, k))
    for i in range(k):
        cov[i, i] = q_measure(regions[i], dens, body)
        for j in range(i):
            cov[i, j] = cov[j, i] = q_measure(
                regions[i] & regions[j], dens, body
            )
    return cov


def brownian_field(
    regions, dens, body, seed=0, jitter=1e-10, draws=1, cov=None
) -> GaussianDraw:
    """Centered Gaussian vector with covariance Q(B_i and B_j)."""
    if len(regions) > 256:
        raise ValueError("at most 256 regions")
    if cov is None:
        cov = q_covariance(regions, dens, body)
    cov = np.asarray(cov, dtype=float)
    chol = None
    scale = jitter
    for _ in range(4):
        try:
            chol = np.linalg.cholesky(cov + scale * np.eye(len(cov)))
            break
        except np.linalg.LinAlgError:
            scale *= 10.0
    if chol is None:
        raise CovarianceNotPSD(
            f"covariance failed factorization up to jitter {scale / 10.0}"
        )
    rng = rep_rng(seed)
    normals = rng.standard_normal((draws, len(cov)))
    return GaussianDraw(tuple(regions), normals @ chol.T, cov)


# ---------------------------------------------------------------------------
# schedules and the replication harness


def make_schedule(n_values, eps0=0.5, beta=1.0 / 3.0, eps_values=None):
    """Pairs (n, eps_n); default eps_n = eps0 * n^(-beta)."""
    n_values = [int(n) for n in n_values]
    if eps_values is None:
        if not 0.0 < beta < 1.0:
            raise InvalidSchedule("beta must lie in (0, 1)")
        eps_values = [eps0 * n ** (-beta) for n in n_values]
    return list(zip(n_values, [float(e) for e in eps_values]))


def validate_schedule(body: ConvexBody, schedule):
    last = -np.inf
    for n, eps in schedule:
        if eps >= body.inradius:
            raise InvalidSchedule(f"eps={eps} is not below the inradius")
        if n * eps <= last:
            raise InvalidSchedule("n*eps must increase along the schedule")
        last = n * eps
    return schedule


@dataclass
class ReplicationReport:
    """Everything one replication experiment produced, reproducibly."""

    config: dict
    master_seed: int
    seeds: list
    rows: list
    summary: dict = field(default_factory=dict)

    def to_jsonable(self):
        return {
            "config": self.config,
            "master_seed": self.master_seed,
            "seeds": self.seeds,
            "rows": self.rows,
            "summary": self.summary,
        }


def map_replications(rep_fn, reps, master_seed=0, jobs=1) -> list:
    """rep_fn(rng, index) over derived streams; results in index order.

    Each replication owns its Philox stream, so the worker count changes
    nothing but wall time.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    indices = list(range(int(reps)))

    def run_one(i):
        return rep_fn(rep_rng(master_seed, i), i)

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            return list(pool.map(run_one, indices))
    return [run_one(i) for i in indices]


def replicate(rep_fn, reps, master_seed=0, jobs=1, config=None) -> ReplicationReport:
    """Run a replication experiment into a reproducible report."""
    rows = map_replications(rep_fn, reps, master_seed, jobs)
    return ReplicationReport(
        config=dict(config or {}),
        master_seed=int(master_seed),
        seeds=[[int(master_seed), i] for i in range(int(reps))],
        rows=rows,
    )
