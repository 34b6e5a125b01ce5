"""Sampling of {I = 1, F = 0}, multi-start uniqueness probes and mass sweeps.

For equal unit masses the constraint set is a product of two unit spheres in
the coordinates

    v = ((r12 + r34) / (2 sqrt 2), r14 / 2, r23 / 2)
    w = ((r12 - r34) / (2 sqrt 2), r13 / 2, r24 / 2)

restricted to ``v2, v3, w2, w3 >= 0`` and ``v1 >= |w1|``. Since F is
homogeneous, rescaling a point of that set along its ray lands on the
constraint set for any other masses.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDistance, InadmissibleChartPoint, SamplerExhausted, SolverError
from .kkt import Solution, SolverConfig, newton_solve
from .potential import MassVector, as_masses, normalize_inertia

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)
DISTANCE_FLOOR = 1e-9
CLUSTER_RADIUS = 1e-6
DEFAULT_SEED = 20_200_615


@dataclass(frozen=True)
class SphereChart:
    v: np.ndarray
    w: np.ndarray

    def is_admissible(self, atol: float = 1e-12) -> bool:
        v, w = np.asarray(self.v), np.asarray(self.w)
        on_spheres = abs(v @ v - 1) <= atol and abs(w @ w - 1) <= atol
        return bool(
            on_spheres
            and min(v[1], v[2], w[1], w[2]) >= 0
            and v[0] >= abs(w[0])
        )


def r_from_chart(chart: SphereChart) -> np.ndarray:
    if not chart.is_admissible():
        raise InadmissibleChartPoint(f"chart point outside the admissible region: {chart}")
    v, w = np.asarray(chart.v, dtype=float), np.asarray(chart.w, dtype=float)
    r = np.array([
        SQRT2 * (v[0] + w[0]),
        2 * w[1],
        2 * v[1],
        2 * v[2],
        2 * w[2],
        SQRT2 * (v[0] - w[0]),
    ])
    if np.any(r <= DISTANCE_FLOOR):
        raise DegenerateDistance(f"chart point maps to a degenerate distance vector {r}")
    return r


def chart_from_r(r) -> SphereChart:
    r12, r13, r14, r23, r24, r34 = np.asarray(r, dtype=float)
    v = np.array([(r12 + r34) / (2 * SQRT2), r14 / 2, r23 / 2])
    w = np.array([(r12 - r34) / (2 * SQRT2), r13 / 2, r24 / 2])
    return SphereChart(v, w)


def _unit_rows(rng, n):
    g = rng.standard_normal((n, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_charts(rng: np.random.Generator, n: int, batch: int = 256) -> tuple[list[SphereChart], int]:
    """Draw ``n`` admissible chart points by rejection.

    Returns the points and the number of candidate pairs drawn.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    out: list[SphereChart] = []
    drawn = 0
    while len(out) < n:
        v = _unit_rows(rng, batch)
        w = _unit_rows(rng, batch)
        drawn += batch
        ok = (
            (v[:, 1] >= 0) & (v[:, 2] >= 0) & (w[:, 1] >= 0) & (w[:, 2] >= 0)
            & (v[:, 0] >= np.abs(w[:, 0]))
        )
        # keep every resulting distance above the positivity floor
        ok &= (v[:, 0] - np.abs(w[:, 0])) * SQRT2 > DISTANCE_FLOOR
        ok &= np.min(np.hstack([v[:, 1:], w[:, 1:]]), axis=1) * 2 > DISTANCE_FLOOR
        for k in np.flatnonzero(ok):
            if len(out) == n:
                break
            out.append(SphereChart(v[k], w[k]))
        if drawn >= 100 * batch and len(out) < drawn / 1000:
            raise SamplerExhausted(f"acceptance below 1/1000 after {drawn} draws")
    return out, drawn


def sample_mplus(seed: int, n: int, m) -> list[np.ndarray]:
    """``n`` seeded points on {I(r, m) = 1, F = 0} with positive distances."""
    charts, _ = sample_charts(np.random.default_rng(seed), n)
    m = as_masses(m)
    return [normalize_inertia(r_from_chart(c), m) for c in charts]


@dataclass
class Cluster:
    representative: Solution
    members: list[int] = field(default_factory=list)
    max_distance: float = 0.0

    @property
    def count(self) -> int:
        return len(self.members)

    @property
    def realizable(self) -> bool:
        return self.representative.realizable and self.representative.convex_sequential


@dataclass
class UniquenessReport:
    masses: MassVector
    n_starts: int
    n_converged: int
    n_realizable: int
    clusters: list[Cluster]
    failures: dict[str, int] = field(default_factory=dict)

    @property
    def distinct_realizable_clusters(self) -> int:
        return sum(1 for c in self.clusters if c.realizable)

    @property
    def realizable_clusters(self) -> list[Cluster]:
        return [c for c in self.clusters if c.realizable]

    @property
    def anomaly(self) -> bool:
        """More than one critical point was found, which uniqueness rules out."""
        return len(self.clusters) > 1

    def to_dict(self) -> dict:
        return {
            "masses": self.masses.tolist(),
            "n_starts": self.n_starts,
            "n_converged": self.n_converged,
            "n_realizable": self.n_realizable,
            "distinct_realizable_clusters": self.distinct_realizable_clusters,
            "failures": dict(self.failures),
            "clusters": [
                {
                    "representative": c.representative.to_dict(),
                    "count": c.count,
                    "max_distance": c.max_distance,
                    "realizable": c.realizable,
                }
                for c in self.clusters
            ],
        }


def cluster_solutions(solutions, radius: float = CLUSTER_RADIUS) -> list[Cluster]:
    """Greedy clustering in r-space, in the order given.

    ``solutions`` is a sequence of ``(start_index, Solution)``.
    """
    clusters: list[Cluster] = []
    for idx, sol in solutions:
        for c in clusters:
            d = float(np.linalg.norm(sol.r - c.representative.r))
            if d <= radius:
                c.members.append(idx)
                c.max_distance = max(c.max_distance, d)
                break
        else:
            clusters.append(Cluster(sol, [idx]))
    return clusters


def _solve_one(args):
    idx, start, masses, cfg = args
    try:
        return idx, newton_solve(start, masses, cfg), None
    except SolverError as exc:
        return idx, None, type(exc).__name__


def probe_uniqueness(
    m,
    n_starts: int = 64,
    seed: int = DEFAULT_SEED,
    cfg: SolverConfig | None = None,
    executor: Executor | None = None,
    radius: float = CLUSTER_RADIUS,
) -> UniquenessReport:
    """Run Newton from ``n_starts`` seeded points and cluster the roots found.

    The result does not depend on ``executor``: outcomes are sorted by start
    index before clustering.
    """
    if n_starts < 2:
        raise ValueError("n_starts must be at least 2")
    m = as_masses(m)
    cfg = cfg or SolverConfig()
    starts = sample_mplus(seed, n_starts, m)
    jobs = [(k, s, m, cfg) for k, s in enumerate(starts)]
    if executor is None:
        outcomes = [_solve_one(j) for j in jobs]
    else:
        outcomes = list(executor.map(_solve_one, jobs))
    outcomes.sort(key=lambda o: o[0])

    failures: dict[str, int] = {}
    converged = []
    for idx, sol, err in outcomes:
        if sol is None:
            failures[err] = failures.get(err, 0) + 1
        else:
            converged.append((idx, sol))
    clusters = cluster_solutions(converged, radius)
    report = UniquenessReport(
        masses=m,
        n_starts=n_starts,
        n_converged=len(converged),
        n_realizable=sum(1 for _, s in converged if s.realizable and s.convex_sequential),
        clusters=clusters,
        failures=failures,
    )
    if report.anomaly:
        logger.warning("masses %s: %d distinct critical points", m.masses, len(clusters))
    return report


def simplex_grid(points_per_axis: int, ratio: float = 4.0, total: float = 4.0) -> list[MassVector]:
    """Interior grid on the mass simplex {sum m = total}.

    Nodes are the mass ratios ``(a, b, c, 1)`` with each of ``a, b, c`` on a
    geometric grid over ``[1/ratio, ratio]`` (odd sizes contain 1), rescaled
    to the given total. A single point per axis gives equal masses.
    """
    if points_per_axis < 1:
        raise ValueError("points_per_axis must be at least 1")
    if points_per_axis == 1:
        levels = np.array([1.0])
    else:
        levels = np.geomspace(1 / ratio, ratio, points_per_axis)
    return [
        MassVector((a, b, c, 1.0)).normalized(total)
        for a, b, c in itertools.product(levels, repeat=3)
    ]


SWEEP_COLUMNS = (
    ["m1", "m2", "m3", "m4", "clusters"]
    + ["r12", "r13", "r14", "r23", "r24", "r34"]
    + ["lambda", "sigma", "minors_min", "residual", "realizable", "n_converged", "status"]
)


def sweep_row(report: UniquenessReport) -> dict:
    row = dict(zip(["m1", "m2", "m3", "m4"], report.masses.masses))
    row["clusters"] = report.distinct_realizable_clusters
    row["n_converged"] = report.n_converged
    if report.clusters:
        chosen = (report.realizable_clusters or sorted(report.clusters, key=lambda c: -c.count))[0]
        sol = chosen.representative
        row.update(zip(["r12", "r13", "r14", "r23", "r24", "r34"], sol.r.tolist()))
        row["lambda"], row["sigma"] = sol.mult
        row["minors_min"] = min(sol.certificate.minors) if sol.certificate else float("nan")
        row["residual"] = sol.residual_norm
        row["realizable"] = chosen.realizable
    else:
        for key in ["r12", "r13", "r14", "r23", "r24", "r34", "lambda", "sigma", "minors_min", "residual"]:
            row[key] = float("nan")
        row["realizable"] = False
    if report.distinct_realizable_clusters > 1:
        row["status"] = "anomaly"
    elif report.n_converged == 0:
        row["status"] = "no_converged"
    elif report.distinct_realizable_clusters == 0:
        row["status"] = "no_realizable"
    else:
        row["status"] = "ok"
    return row


def _probe_node(args):
    masses, n_starts, seed, cfg = args
    return probe_uniqueness(masses, n_starts, seed, cfg)


def mass_sweep(
    grid, n_starts: int = 50, seed: int = DEFAULT_SEED, cfg: SolverConfig | None = None,
    workers: int = 1,
) -> tuple[list[dict], list[UniquenessReport]]:
    """One uniqueness probe per grid node.

    ``grid`` is either a list of mass vectors or an integer passed to
    :func:`simplex_grid`. Every node uses the same seed.
    """
    nodes = simplex_grid(grid) if isinstance(grid, int) else [as_masses(g) for g in grid]
    cfg = cfg or SolverConfig()
    jobs = [(node, n_starts, seed, cfg) for node in nodes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_probe_node, jobs))
    else:
        reports = [_probe_node(j) for j in jobs]
    return [sweep_row(rep) for rep in reports], reports


def rows_to_csv(rows, stream=None) -> str:
    buf = stream if stream is not None else io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue() if stream is None else ""

