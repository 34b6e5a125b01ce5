"""Distance-geometry primitives for four bodies.

Every function takes distance vectors in the fixed component order
``(r12, r13, r14, r23, r24, r34)``. The polynomial functions broadcast over
leading axes, so an ``(n, 6)`` array evaluates ``n`` configurations at once.
Bodies are assumed ordered sequentially around the quadrilateral, which makes
``r13`` and ``r24`` the diagonals and ``r12``, ``r34`` the candidate bases.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AmbiguousEmbedding, NegativeRadicand, NotRealizable

#: Body index pairs (0-based) matching the distance vector layout.
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_LABELS = ("r12", "r13", "r14", "r23", "r24", "r34")
TRIANGLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))

PLANARITY_RTOL = 1e-8
TRIANGLE_MARGIN = 1e-12
EMBED_RTOL = 1e-8


def pair_index(i: int, j: int) -> int:
    """Position of the pair ``{i, j}`` (0-based bodies) in a distance vector."""
    return PAIRS.index((min(i, j), max(i, j)))


def _split(r):
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != 6:
        raise ValueError(f"distance vectors have 6 components, got shape {r.shape}")
    return np.moveaxis(r, -1, 0)


def as_distances(r) -> np.ndarray:
    """Validate and return a float copy of a single positive distance vector."""
    r = np.array(r, dtype=float)
    if r.shape != (6,):
        raise ValueError(f"expected 6 distances, got shape {r.shape}")
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise ValueError(f"distances must be finite and positive: {r}")
    return r


def scale(r) -> np.ndarray:
    """Mean distance, the length scale used by every homogeneous tolerance."""
    return np.mean(np.asarray(r, dtype=float), axis=-1)


def planarity_tolerance(r) -> np.ndarray:
    # H is homogeneous of degree 6 in the distances
    return PLANARITY_RTOL * scale(r) ** 6


def distances_from_points(points) -> np.ndarray:
    """Mutual distances of four points, shape ``(..., 4, d)`` -> ``(..., 6)``."""
    p = np.asarray(points, dtype=float)
    return np.stack(
        [np.linalg.norm(p[..., i, :] - p[..., j, :], axis=-1) for i, j in PAIRS],
        axis=-1,
    )


def bordered_matrix(r) -> np.ndarray:
    """The 5x5 bordered matrix of squared distances."""
    r = np.asarray(r, dtype=float)
    out = np.ones(r.shape[:-1] + (5, 5))
    out[..., 0, 0] = 0.0
    for k in range(4):
        out[..., k + 1, k + 1] = 0.0
    for k, (i, j) in enumerate(PAIRS):
        out[..., i + 1, j + 1] = r[..., k] ** 2
        out[..., j + 1, i + 1] = r[..., k] ** 2
    return out


def cayley_menger(r) -> np.ndarray | float:
    """Cayley-Menger determinant H(r) = 288 V^2."""
    return np.linalg.det(bordered_matrix(r))


def trapezoid_residual(r):
    """F(r); zero on realizable vectors exactly when side 12 is parallel to 34."""
    r12, r13, r14, r23, r24, r34 = _split(r)
    return 2 * r12 * r34 - r13**2 - r24**2 + r23**2 + r14**2


def k_invariant(r):
    r12, r13, r14, r23, r24, r34 = _split(r)
    return r12 * (r13**2 - r14**2 + r23**2 - r24**2) + r34 * (
        -(r13**2) - r14**2 + r23**2 + r24**2
    )


def q_polynomial(r):
    """The quartic Q(r) with 2H = F Q - K^2; equals 16 h^2 r12 r34 on trapezoids."""
    r12, r13, r14, r23, r24, r34 = _split(r)
    a, b, c, d, e = r12**2, r13**2, r14**2, r23**2, r24**2
    f = r34**2
    return -(
        a * b
        - a * c
        - a * d
        + 4 * c * d
        + a * e
        - 4 * b * e
        + 2 * r12**3 * r34
        - 2 * r12 * b * r34
        - 2 * r12 * c * r34
        - 2 * r12 * d * r34
        - 2 * r12 * e * r34
        + b * f
        - c * f
        - d * f
        + e * f
        + 2 * r12 * r34**3
    )


def fqk_defect(r):
    """2H - (F Q - K^2). Vanishes identically up to rounding."""
    return 2 * cayley_menger(r) - (
        trapezoid_residual(r) * q_polynomial(r) - k_invariant(r) ** 2
    )


class Realizability(NamedTuple):
    ok: bool
    reason: str | None = None

    def __bool__(self):
        return self.ok


def is_realizable(r, strict: bool = True) -> Realizability:
    """Membership in the set of geometrically realizable distance vectors.

    Checks positivity, the twelve ordered triangle inequalities and
    ``H >= -tol``. With ``strict=False`` the triangle inequalities may hold
    with equality, which admits collinear triples.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        k = int(np.argmin(r))
        return Realizability(False, f"{PAIR_LABELS[k]} is not positive")
    s = float(scale(r))
    margin = TRIANGLE_MARGIN * s
    for tri in TRIANGLES:
        sides = [pair_index(a, b) for a, b in ((tri[0], tri[1]), (tri[0], tri[2]), (tri[1], tri[2]))]
        for k in range(3):
            others = [s for s in sides if s != sides[k]]
            slack = r[others[0]] + r[others[1]] - r[sides[k]]
            if (strict and slack <= margin) or (not strict and slack < -margin):
                return Realizability(
                    False,
                    "triangle inequality violated for ({}): {} + {} <= {}".format(
                        ",".join(str(b + 1) for b in tri),
                        PAIR_LABELS[others[0]],
                        PAIR_LABELS[others[1]],
                        PAIR_LABELS[sides[k]],
                    ),
                )
    h = float(cayley_menger(r))
    if h < -float(planarity_tolerance(r)):
        return Realizability(False, f"Cayley-Menger determinant negative ({h:.3e})")
    return Realizability(True)


def embed_planar(r, rtol: float = EMBED_RTOL) -> np.ndarray:
    """Planar coordinates ``(4, 2)`` reproducing a planar distance vector.

    Gauge: body 1 at the origin, body 2 on the positive x axis, body 3 in the
    closed upper half-plane. Body 4 comes from intersecting the circles about
    bodies 1 and 2; the sign of its ordinate is the one that reproduces r34.
    Collinear inputs are embedded, not rejected.
    """
    r = as_distances(r)
    status = is_realizable(r, strict=False)
    if not status:
        raise NotRealizable(status.reason)
    h = float(cayley_menger(r))
    if abs(h) > float(planarity_tolerance(r)):
        raise NotRealizable(f"configuration is not planar (H = {h:.3e})")

    r12, r13, r14, r23, r24, r34 = r
    x3 = (r12**2 + r13**2 - r23**2) / (2 * r12)
    y3 = np.sqrt(max(r13**2 - x3**2, 0.0))
    x4 = (r12**2 + r14**2 - r24**2) / (2 * r12)
    y4 = np.sqrt(max(r14**2 - x4**2, 0.0))

    candidates = []
    for sign in (1.0, -1.0):
        pts = np.array([[0.0, 0.0], [r12, 0.0], [x3, y3], [x4, sign * y4]])
        err = abs(np.hypot(x4 - x3, sign * y4 - y3) - r34) / r34
        candidates.append((err, pts))
    err, pts = min(candidates, key=lambda c: c[0])
    if err > rtol:
        raise AmbiguousEmbedding(
            f"neither reflection of body 4 reproduces r34 (relative error {err:.3e})"
        )
    return pts


def signed_areas(points) -> np.ndarray:
    """Signed areas (D1, D2, D3, D4) of the triangles omitting each body.

    ``D_i`` is the counterclockwise-positive shoelace area of the other three
    bodies in ascending order, times ``(-1)**(i+1)`` (the cofactor sign). A
    convex quadrilateral labelled counterclockwise gets the pattern
    ``(+, -, +, -)``.
    """
    p = np.asarray(points, dtype=float)
    out = np.empty(p.shape[:-2] + (4,))
    for i in range(4):
        a, b, c = (p[..., k, :] for k in range(4) if k != i)
        area = 0.5 * (
            (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
            - (c[..., 0] - a[..., 0]) * (b[..., 1] - a[..., 1])
        )
        out[..., i] = area if i % 2 == 0 else -area
    return out


def is_convex_sequential(areas, atol: float = 0.0) -> bool:
    """True when the signed areas follow ``(+, -, +, -)`` strictly."""
    d = np.asarray(areas, dtype=float)
    return bool(d[0] > atol and d[1] < -atol and d[2] > atol and d[3] < -atol)


def trapezoid_height(r, rtol: float = 1e-12):
    """Distance between the parallel sides, h = sqrt(Q / (r12 r34)) / 4.

    Unlike the textbook formula this stays finite when both bases are equal.
    """
    r = np.asarray(r, dtype=float)
    q = np.asarray(q_polynomial(r), dtype=float)
    tol = rtol * np.asarray(scale(r)) ** 4
    if np.any(q < -tol):
        raise NegativeRadicand(f"Q(r) is negative: {q}")
    q = np.maximum(q, 0.0)
    return 0.25 * np.sqrt(q / (r[..., 0] * r[..., 5]))


def grad_F(r) -> np.ndarray:
    r12, r13, r14, r23, r24, r34 = _split(r)
    return np.stack([2 * r34, -2 * r13, 2 * r14, 2 * r23, -2 * r24, 2 * r12], axis=-1)


def grad_H(r) -> np.ndarray:
    """Exact gradient of the Cayley-Menger determinant.

    Each squared distance sits at two symmetric entries of the bordered
    matrix, so dH/dr_ij = 4 r_ij C_ij with C_ij the matching cofactor. This
    holds for every r, planar or not.
    """
    r = np.asarray(r, dtype=float)
    b = bordered_matrix(r)
    out = np.empty(r.shape)
    for k, (i, j) in enumerate(PAIRS):
        a, c = i + 1, j + 1
        minor = np.delete(np.delete(b, a, axis=-2), c, axis=-1)
        cofactor = (-1) ** (a + c) * np.linalg.det(minor)
        out[..., k] = 4 * r[..., k] * cofactor
    return out


def area_grad_H(points) -> np.ndarray:
    """dH/dr_ij = -64 r_ij D_i D_j, valid for planar configurations only."""
    p = np.asarray(points, dtype=float)
    d = signed_areas(p)
    r = distances_from_points(p)
    return np.stack(
        [-64 * r[..., k] * d[..., i] * d[..., j] for k, (i, j) in enumerate(PAIRS)],
        axis=-1,
    )


def trapezoid_points(base_bottom, base_top, offset, height) -> np.ndarray:
    """Coordinates of a sequentially labelled trapezoid with side 12 parallel to 34.

    Bodies 1, 2 lie on the x axis, bodies 3, 4 at ``y = height`` with body 4
    at ``x = offset`` and body 3 at ``offset + base_top``.
    """
    b1, b2, o, h = (np.asarray(v, dtype=float) for v in (base_bottom, base_top, offset, height))
    b1, b2, o, h = np.broadcast_arrays(b1, b2, o, h)
    zeros = np.zeros_like(b1)
    xs = np.stack([zeros, b1, o + b2, o], axis=-1)
    ys = np.stack([zeros, zeros, h, h], axis=-1)
    return np.stack([xs, ys], axis=-1)
