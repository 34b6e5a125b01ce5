"""Newtonian potential and moment of inertia as functions of mutual distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import PAIRS


@dataclass(frozen=True)
class MassVector:
    """Four strictly positive masses; ``total`` is cached at construction."""

    masses: tuple[float, float, float, float]
    total: float = field(init=False)

    def __post_init__(self):
        m = tuple(float(x) for x in self.masses)
        if len(m) != 4:
            raise ValueError(f"expected four masses, got {len(m)}")
        if not all(np.isfinite(x) and x > 0 for x in m):
            raise ValueError(f"masses must be finite and positive: {m}")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "total", sum(m))

    @classmethod
    def parse(cls, text: str) -> "MassVector":
        """Parse ``"m1,m2,m3,m4"``."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        return cls(tuple(float(p) for p in parts))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.masses)

    @property
    def pair_products(self) -> np.ndarray:
        """m_i m_j in distance-vector order."""
        m = self.masses
        return np.array([m[i] * m[j] for i, j in PAIRS])

    @property
    def product(self) -> float:
        return float(np.prod(self.masses))

    def normalized(self, total: float = 4.0) -> "MassVector":
        return MassVector(tuple(x * total / self.total for x in self.masses))

    def tolist(self) -> list[float]:
        return list(self.masses)


def as_masses(m) -> MassVector:
    return m if isinstance(m, MassVector) else MassVector(tuple(m))


def newtonian_potential(r, m) -> float:
    mm = as_masses(m).pair_products
    return np.sum(mm / np.asarray(r, dtype=float), axis=-1)


def moment_of_inertia(r, m) -> float:
    m = as_masses(m)
    return np.sum(m.pair_products * np.asarray(r, dtype=float) ** 2, axis=-1) / (2 * m.total)


def grad_U(r, m) -> np.ndarray:
    return -as_masses(m).pair_products / np.asarray(r, dtype=float) ** 2


def grad_I(r, m) -> np.ndarray:
    m = as_masses(m)
    return m.pair_products * np.asarray(r, dtype=float) / m.total


def normalize_inertia(r, m) -> np.ndarray:
    """Rescale r along its ray so that I(r) = 1. F = 0 is preserved."""
    r = np.asarray(r, dtype=float)
    return r / np.sqrt(moment_of_inertia(r, m))[..., None]
