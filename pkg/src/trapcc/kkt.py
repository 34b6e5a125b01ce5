"""Critical points of U restricted to {I = 1, F = 0}.

The unknowns are ``x = (r12, r13, r14, r23, r24, r34, lambda, sigma)``. The
stationarity conditions of ``L = U + lambda M (I - 1) + sigma F``, divided
through by ``-r_ij``, read

    m1 m2 (r12^-3 - lambda) = 2 sigma r34 / r12
    m3 m4 (r34^-3 - lambda) = 2 sigma r12 / r34
    m1 m3 (r13^-3 - lambda) = -2 sigma,   m2 m4 (r24^-3 - lambda) = -2 sigma
    m1 m4 (r14^-3 - lambda) =  2 sigma,   m2 m3 (r23^-3 - lambda) =  2 sigma

and together with ``I - 1 = 0``, ``F = 0`` form a square system of size 8.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np

from . import geometry as geo
from .errors import LeftPositiveOrthant, MaxItersExceeded, SingularFit, SingularJacobian
from .potential import MassVector, as_masses, grad_I, moment_of_inertia, normalize_inertia

logger = logging.getLogger(__name__)

#: Distance-vector index of each stationarity equation, in residual order
#: (12), (34), (13), (24), (14), (23).
EQUATION_PAIRS = (0, 5, 1, 4, 2, 3)
# sign of the constant right-hand sides for the (13), (24), (14), (23) rows
_SIGMA_SIGNS = {1: -1.0, 4: -1.0, 2: 1.0, 3: 1.0}


class Multipliers(NamedTuple):
    lam: float
    sigma: float


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 100
    tol_residual: float = 1e-12
    tol_step: float = 1e-14
    backtrack: float = 0.5
    armijo: float = 1e-4
    min_step: float = 1e-12
    max_cond: float = 1e14
    jacobian_mode: str = "analytic"
    certify: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if min(self.tol_residual, self.tol_step, self.min_step) <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.jacobian_mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown jacobian_mode {self.jacobian_mode!r}")


@dataclass
class Solution:
    masses: MassVector
    r: np.ndarray
    mult: Multipliers
    residual_norm: float
    iterations: int
    realizable: bool
    convex_sequential: bool
    sigma_sq_spread: float
    certificate: Any = None
    converged: bool = field(default=True, compare=False)

    def to_dict(self) -> dict:
        return {
            "masses": self.masses.tolist(),
            "r": [float(x) for x in self.r],
            "lambda": float(self.mult.lam),
            "sigma": float(self.mult.sigma),
            "residual_norm": float(self.residual_norm),
            "iterations": int(self.iterations),
            "realizable": bool(self.realizable),
            "convex_sequential": bool(self.convex_sequential),
            "sigma_sq_spread": float(self.sigma_sq_spread),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Solution":
        from .certify import CertificateReport

        cert = data.get("certificate")
        return cls(
            masses=MassVector(tuple(data["masses"])),
            r=np.array(data["r"], dtype=float),
            mult=Multipliers(float(data["lambda"]), float(data["sigma"])),
            residual_norm=float(data["residual_norm"]),
            iterations=int(data["iterations"]),
            realizable=bool(data["realizable"]),
            convex_sequential=bool(data["convex_sequential"]),
            sigma_sq_spread=float(data["sigma_sq_spread"]),
            certificate=None if cert is None else CertificateReport.from_dict(cert),
        )


def _sigma_coefficients(r):
    """Coefficient of sigma on the right-hand side of each equation, residual order."""
    r12, r34 = r[0], r[5]
    out = np.empty(6)
    out[0] = 2 * r34 / r12
    out[1] = 2 * r12 / r34
    for row, k in enumerate(EQUATION_PAIRS[2:], start=2):
        out[row] = 2 * _SIGMA_SIGNS[k]
    return out


def kkt_residual(r, mult, m) -> np.ndarray:
    """The eight residuals: six stationarity rows (left minus right), I - 1, F."""
    r = np.asarray(r, dtype=float)
    m = as_masses(m)
    lam, sigma = mult
    idx = list(EQUATION_PAIRS)
    mm = m.pair_products[idx]
    rr = r[idx]
    out = np.empty(8)
    out[:6] = mm * (rr**-3 - lam) - sigma * _sigma_coefficients(r)
    out[6] = moment_of_inertia(r, m) - 1.0
    out[7] = geo.trapezoid_residual(r)
    return out


def kkt_jacobian(r, mult, m) -> np.ndarray:
    """Analytic 8x8 Jacobian of :func:`kkt_residual` in ``(r, lambda, sigma)``."""
    r = np.asarray(r, dtype=float)
    m = as_masses(m)
    lam, sigma = mult
    mm = m.pair_products
    r12, r34 = r[0], r[5]
    jac = np.zeros((8, 8))
    for row, k in enumerate(EQUATION_PAIRS):
        jac[row, k] = -3 * mm[k] * r[k] ** -4
        jac[row, 6] = -mm[k]
    coeff = _sigma_coefficients(r)
    jac[:6, 7] = -coeff
    # the (12) and (34) rows carry sigma r34/r12 and sigma r12/r34
    jac[0, 0] += 2 * sigma * r34 / r12**2
    jac[0, 5] += -2 * sigma / r12
    jac[1, 5] += 2 * sigma * r12 / r34**2
    jac[1, 0] += -2 * sigma / r34
    jac[6, :6] = grad_I(r, m)
    jac[7, :6] = geo.grad_F(r)
    return jac


def fd_jacobian(r, mult, m, step: float = 1e-7) -> np.ndarray:
    x = np.concatenate([np.asarray(r, dtype=float), mult])
    jac = np.empty((8, 8))
    for k in range(8):
        h = step * max(1.0, abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        jac[:, k] = (
            kkt_residual(xp[:6], xp[6:], m) - kkt_residual(xm[:6], xm[6:], m)
        ) / (2 * h)
    return jac


def initial_multipliers(r, m) -> Multipliers:
    """Least-squares (lambda, sigma) for the six stationarity rows at fixed r.

    The rows are linear in the multipliers: ``a = lambda * mm + sigma * b``.
    """
    r = np.asarray(r, dtype=float)
    m = as_masses(m)
    idx = list(EQUATION_PAIRS)
    mm = m.pair_products[idx]
    design = np.column_stack([mm, _sigma_coefficients(r)])
    target = mm * r[idx] ** -3
    if np.linalg.matrix_rank(design) < 2:
        raise SingularFit("multiplier design matrix is rank deficient")
    (lam, sigma), *_ = np.linalg.lstsq(design, target, rcond=None)
    return Multipliers(float(lam), float(sigma))


def sigma_squared_triple(r, lam, m) -> tuple[float, float, float]:
    """The three products that each equal sigma^2 at a critical point."""
    r = np.asarray(r, dtype=float)
    p = as_masses(m).product
    t = r**-3 - lam
    return (
        float(p * t[0] * t[5] / 4),
        float(p * t[2] * t[3] / 4),
        float(p * t[1] * t[4] / 4),
    )


def sigma_spread(triple) -> float:
    t = np.asarray(triple)
    denom = np.max(np.abs(t))
    if denom == 0:
        return 0.0
    return float((t.max() - t.min()) / denom)


def classify(r) -> tuple[bool, bool]:
    """(realizable, convex_sequential) for a distance vector."""
    if not geo.is_realizable(r):
        return False, False
    try:
        pts = geo.embed_planar(r)
    except (geo.NotRealizable, geo.AmbiguousEmbedding):
        return True, False
    atol = 1e-12 * float(geo.scale(r)) ** 2
    return True, geo.is_convex_sequential(geo.signed_areas(pts), atol=atol)


def make_solution(r, mult, m, residual_norm, iterations, converged=True, certify=True) -> Solution:
    m = as_masses(m)
    r = np.asarray(r, dtype=float)
    realizable, convex = classify(r)
    sol = Solution(
        masses=m,
        r=r,
        mult=Multipliers(float(mult[0]), float(mult[1])),
        residual_norm=float(residual_norm),
        iterations=int(iterations),
        realizable=realizable,
        convex_sequential=convex,
        sigma_sq_spread=sigma_spread(sigma_squared_triple(r, mult[0], m)),
        converged=converged,
    )
    if certify and converged:
        from .certify import certify_minimum

        sol = replace(sol, certificate=certify_minimum(sol, m, tol_residual=np.inf))
    return sol


def newton_step(r, mult, m, mode: str = "analytic") -> np.ndarray:
    """Full Newton direction for the 8-dimensional system."""
    jac = kkt_jacobian(r, mult, m) if mode == "analytic" else fd_jacobian(r, mult, m)
    return np.linalg.solve(jac, -kkt_residual(r, mult, m))


def newton_solve(start, m, cfg: SolverConfig | None = None, mult: Multipliers | None = None) -> Solution:
    """Damped Newton iteration on ``kkt_residual = 0``.

    The start is projected to I = 1 and the multipliers are initialised by
    :func:`initial_multipliers` unless given. Steps are halved until all
    distances stay positive and the residual norm satisfies an Armijo-type
    decrease.
    """
    cfg = cfg or SolverConfig()
    m = as_masses(m)
    r0 = normalize_inertia(geo.as_distances(start), m)
    if mult is None:
        mult = initial_multipliers(r0, m)
    x = np.concatenate([r0, mult])
    jac_fn = kkt_jacobian if cfg.jacobian_mode == "analytic" else fd_jacobian

    def res(z):
        return kkt_residual(z[:6], z[6:], m)

    c = res(x)
    norm = float(np.linalg.norm(c))
    best = (norm, x.copy(), 0)

    def best_solution():
        bn, bx, bit = best
        return make_solution(bx[:6], bx[6:], m, bn, bit, converged=False, certify=False)

    for it in range(cfg.max_iters + 1):
        if norm <= cfg.tol_residual:
            return make_solution(x[:6], x[6:], m, norm, it, certify=cfg.certify)
        if it == cfg.max_iters:
            break
        jac = jac_fn(x[:6], x[6:], m)
        if np.linalg.cond(jac) > cfg.max_cond:
            raise SingularJacobian(f"Jacobian is numerically singular at iteration {it}", best_solution())
        dx = np.linalg.solve(jac, -c)

        alpha = 1.0
        fallback = None
        accepted = None
        while alpha >= cfg.min_step:
            trial = x + alpha * dx
            if np.all(trial[:6] > 0):
                c_trial = res(trial)
                n_trial = float(np.linalg.norm(c_trial))
                if fallback is None:
                    fallback = (trial, c_trial, n_trial, alpha)
                if n_trial <= (1 - cfg.armijo * alpha) * norm:
                    accepted = (trial, c_trial, n_trial, alpha)
                    break
            alpha *= cfg.backtrack
        if accepted is None:
            if fallback is None:
                raise LeftPositiveOrthant(
                    f"no positive step found at iteration {it}", best_solution()
                )
            # no sufficient decrease: take the longest positive step and move on
            accepted = fallback
        x, c, norm, alpha = accepted
        if norm < best[0]:
            best = (norm, x.copy(), it + 1)
        if alpha * np.linalg.norm(dx) <= cfg.tol_step and norm > cfg.tol_residual:
            raise MaxItersExceeded(
                f"stagnated at iteration {it + 1} with residual {norm:.3e}", best_solution()
            )
    raise MaxItersExceeded(
        f"no convergence in {cfg.max_iters} iterations (residual {best[0]:.3e})",
        best_solution(),
    )
