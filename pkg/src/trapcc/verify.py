"""Seeded numerical checks of the distance-geometry identities.

Each suite returns a :class:`CheckResult` with the worst defect seen, the
tolerance it is held to and the point where the worst defect occurred.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .potential import MassVector, grad_I, grad_U, moment_of_inertia, newtonian_potential

FQK_RTOL = 1e-9
PARALLEL_RTOL = 1e-8
HEIGHT_RTOL = 1e-9
GRAD_RTOL = 1e-6
FD_STEP = 1e-5


@dataclass
class CheckResult:
    name: str
    max_defect: float
    tolerance: float
    witness: list

    @property
    def ok(self) -> bool:
        return bool(self.max_defect <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: max defect {self.max_defect:.3e} (tol {self.tolerance:.1e})"


def _result(name, defects, tol, points):
    k = int(np.argmax(defects))
    return CheckResult(name, float(defects[k]), tol, np.asarray(points)[k].tolist())


def random_distance_vectors(rng, n, low=0.2, high=3.0) -> np.ndarray:
    return rng.uniform(low, high, size=(n, 6))


def random_trapezoids(rng, n, equal_base_fraction=0.1) -> np.ndarray:
    """Coordinates ``(n, 4, 2)`` of trapezoids with side 12 parallel to side 34.

    A fraction of them are rectangles with equal bases.
    """
    b1 = rng.uniform(0.3, 3.0, n)
    b2 = rng.uniform(0.3, 3.0, n)
    off = rng.uniform(-1.0, 1.0, n) * b1
    h = rng.uniform(0.2, 3.0, n)
    rect = rng.random(n) < equal_base_fraction
    b2[rect] = b1[rect]
    off[rect] = 0.0
    return geo.trapezoid_points(b1, b2, off, h)


def check_fqk(rng, n, k_fn=geo.k_invariant) -> CheckResult:
    r = random_distance_vectors(rng, n)
    two_h = 2 * geo.cayley_menger(r)
    fq = geo.trapezoid_residual(r) * geo.q_polynomial(r)
    k2 = k_fn(r) ** 2
    ref = np.max(np.abs([two_h, fq, k2, geo.scale(r) ** 6]), axis=0)
    return _result("2H = FQ - K^2", np.abs(two_h - (fq - k2)) / ref, FQK_RTOL, r)


def check_parallel_gradients(rng, n) -> CheckResult:
    r = geo.distances_from_points(random_trapezoids(rng, n))
    gh = geo.grad_H(r)
    gap = gh - 0.5 * geo.q_polynomial(r)[:, None] * geo.grad_F(r)
    defects = np.linalg.norm(gap, axis=1) / np.linalg.norm(gh, axis=1)
    return _result("grad H = Q/2 grad F on trapezoids", defects, PARALLEL_RTOL, r)


def check_height(rng, n) -> CheckResult:
    pts = random_trapezoids(rng, n)
    r = geo.distances_from_points(pts)
    true_h = pts[:, 2, 1]
    defects = np.abs(geo.trapezoid_height(r) - true_h) / true_h
    return _result("trapezoid height from Q", defects, HEIGHT_RTOL, r)


def central_gradient(f, x, step=FD_STEP) -> np.ndarray:
    """Central differences of a scalar function of the last axis of ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[k] = step
        out[..., k] = (f(x + e) - f(x - e)) / (2 * step)
    return out


def check_gradients(rng, n, masses=(1.0, 2.0, 3.0, 4.0)) -> list[CheckResult]:
    m = MassVector(tuple(masses))
    r = random_distance_vectors(rng, n, 0.5, 2.0)
    pairs = [
        ("grad U", lambda x: newtonian_potential(x, m), grad_U(r, m)),
        ("grad I", lambda x: moment_of_inertia(x, m), grad_I(r, m)),
        ("grad F", geo.trapezoid_residual, geo.grad_F(r)),
        ("grad H", geo.cayley_menger, geo.grad_H(r)),
    ]
    results = []
    for name, f, exact in pairs:
        fd = central_gradient(f, r)
        defects = np.linalg.norm(fd - exact, axis=1) / np.linalg.norm(exact, axis=1)
        results.append(_result(f"{name} vs finite differences", defects, GRAD_RTOL, r))
    return results


def run_identity_suite(seed: int, samples: int, k_fn=geo.k_invariant) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    n_fd = min(samples, 1000)
    return [
        check_fqk(rng, samples, k_fn),
        check_parallel_gradients(rng, samples),
        check_height(rng, samples),
        *check_gradients(rng, n_fd),
    ]


def faulty_k_invariant(r):
    """K with the sign of its r34 term flipped, for exercising failure paths."""
    r12, r13, r14, r23, r24, r34 = np.moveaxis(np.asarray(r, dtype=float), -1, 0)
    return r12 * (r13**2 - r14**2 + r23**2 - r24**2) - r34 * (
        -(r13**2) - r14**2 + r23**2 + r24**2
    )
