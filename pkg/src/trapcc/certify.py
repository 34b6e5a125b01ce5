"""Second-order certificate for critical points of U on {I = 1, F = 0}.

The Hessian of ``L = U + lambda M (I - 1) + sigma F`` in distance coordinates
is diagonal except for the (r12, r34) coupling, so its leading principal
minors factor into closed forms built from five scalar terms A1..A5. At a
critical point with lambda > 0 these terms reduce to 3 m_i m_j (A1..A4) and
3 (lambda (r12^3 + r34^3) + 1) m1 m2 m3 m4 (A5), all positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import NotConverged
from .potential import as_masses, grad_I, grad_U, moment_of_inertia, newtonian_potential

A_TERM_RTOL = 1e-8


@dataclass(frozen=True)
class CertificateReport:
    f_diag: tuple
    a_terms: tuple
    minors: tuple
    closed_form_minors: tuple
    lambda_positive: bool
    all_minors_positive: bool
    a_terms_match_3mm: bool

    @property
    def passed(self) -> bool:
        return self.lambda_positive and self.all_minors_positive and self.a_terms_match_3mm

    def to_dict(self) -> dict:
        return {
            "f_diag": list(self.f_diag),
            "a_terms": list(self.a_terms),
            "minors": list(self.minors),
            "closed_form_minors": list(self.closed_form_minors),
            "lambda_positive": self.lambda_positive,
            "all_minors_positive": self.all_minors_positive,
            "a_terms_match_3mm": self.a_terms_match_3mm,
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CertificateReport":
        return cls(
            f_diag=tuple(data["f_diag"]),
            a_terms=tuple(data["a_terms"]),
            minors=tuple(data["minors"]),
            closed_form_minors=tuple(data.get("closed_form_minors", ())),
            lambda_positive=bool(data["lambda_positive"]),
            all_minors_positive=bool(data["all_minors_positive"]),
            a_terms_match_3mm=bool(data["a_terms_match_3mm"]),
        )


def lagrangian(r, mult, m) -> float:
    m = as_masses(m)
    lam, sigma = mult
    return (
        newtonian_potential(r, m)
        + lam * m.total * (moment_of_inertia(r, m) - 1)
        + sigma * geo.trapezoid_residual(r)
    )


def grad_lagrangian(r, mult, m) -> np.ndarray:
    m = as_masses(m)
    lam, sigma = mult
    return grad_U(r, m) + lam * m.total * grad_I(r, m) + sigma * geo.grad_F(r)


def f_values(r, lam, m) -> np.ndarray:
    """f_ij = m_i m_j (2 r_ij^-3 + lambda), distance-vector order."""
    return as_masses(m).pair_products * (2 * np.asarray(r, dtype=float) ** -3 + lam)


def hessian_lagrangian(r, mult, m) -> np.ndarray:
    lam, sigma = mult
    hess = np.diag(f_values(r, lam, m))
    hess[np.diag_indices(6)] += 2 * sigma * np.array([0, -1, 1, 1, -1, 0])
    hess[0, 5] = hess[5, 0] = 2 * sigma
    return hess


def a_terms(r, mult, m) -> np.ndarray:
    r12, r13, r14, r23, r24, r34 = np.asarray(r, dtype=float)
    m1, m2, m3, m4 = as_masses(m).masses
    lam, s = mult
    a1 = lam * m1 * m3 * r13**3 - 2 * r13**3 * s + 2 * m1 * m3
    a2 = lam * m1 * m4 * r14**3 + 2 * r14**3 * s + 2 * m1 * m4
    a3 = lam * m2 * m3 * r23**3 + 2 * r23**3 * s + 2 * m2 * m3
    a4 = lam * m2 * m4 * r24**3 - 2 * r24**3 * s + 2 * m2 * m4
    a5 = m1 * m2 * m3 * m4 * (
        lam**2 * r12**3 * r34**3 + 2 * lam * r12**3 + 2 * lam * r34**3 + 4
    ) - 4 * s**2 * r12**3 * r34**3
    return np.array([a1, a2, a3, a4, a5])


def expected_a_terms(r, lam, m) -> np.ndarray:
    """Values A1..A5 must take at a critical point."""
    r12, r34 = np.asarray(r, dtype=float)[[0, 5]]
    m1, m2, m3, m4 = as_masses(m).masses
    return 3 * np.array(
        [m1 * m3, m1 * m4, m2 * m3, m2 * m4,
         (lam * r12**3 + lam * r34**3 + 1) * m1 * m2 * m3 * m4]
    )


def principal_minors(hess) -> np.ndarray:
    """Leading principal minors of orders 1..n by direct determinants."""
    a = np.asarray(hess, dtype=float)
    return np.array([np.linalg.det(a[:k, :k]) for k in range(1, a.shape[0] + 1)])


def closed_form_minors(r, mult, m) -> np.ndarray:
    """P1..P6 from the A-terms; exact for any (r, lambda, sigma)."""
    r = np.asarray(r, dtype=float)
    lam = mult[0]
    mm12 = as_masses(m).pair_products[0]
    a1, a2, a3, a4, a5 = a_terms(r, mult, m)
    c = r**3
    head = (lam * c[0] + 2) * mm12
    return np.array([
        head / c[0],
        a1 * head / (c[0] * c[1]),
        a1 * a2 * head / (c[0] * c[1] * c[2]),
        a1 * a2 * a3 * head / (c[0] * c[1] * c[2] * c[3]),
        a1 * a2 * a3 * a4 * head / (c[0] * c[1] * c[2] * c[3] * c[4]),
        a1 * a2 * a3 * a4 * a5 / np.prod(c),
    ])


def certify_minimum(sol, m=None, tol_residual: float = 1e-10) -> CertificateReport:
    """Check that a converged critical point is a nondegenerate minimum.

    Passes iff lambda > 0, all six leading minors of the Lagrangian Hessian
    are positive and A1..A4 equal 3 m_i m_j to 1e-8 relative.
    """
    m = as_masses(m if m is not None else sol.masses)
    if not sol.residual_norm <= tol_residual:
        raise NotConverged(f"residual {sol.residual_norm:.3e} exceeds {tol_residual:.1e}")
    r, mult = np.asarray(sol.r, dtype=float), tuple(sol.mult)
    minors = principal_minors(hessian_lagrangian(r, mult, m))
    terms = a_terms(r, mult, m)
    expected = expected_a_terms(r, mult[0], m)
    match = np.allclose(terms[:4], expected[:4], rtol=A_TERM_RTOL, atol=0)
    return CertificateReport(
        f_diag=tuple(float(x) for x in f_values(r, mult[0], m)),
        a_terms=tuple(float(x) for x in terms),
        minors=tuple(float(x) for x in minors),
        closed_form_minors=tuple(float(x) for x in closed_form_minors(r, mult, m)),
        lambda_positive=bool(mult[0] > 0),
        all_minors_positive=bool(np.all(minors > 0)),
        a_terms_match_3mm=bool(match),
    )
