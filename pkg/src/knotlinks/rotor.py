"""Rigid-rotor levels for spinning knots and links."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UnsupportedClassificationError

SPHERICAL = "spherical"
PROLATE = "prolate-symmetric"
OBLATE = "oblate-symmetric"
ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class TopClassification:
    kind: str
    A: float
    B: float
    C: float

    @property
    def rotational_constants(self):
        return self.A, self.B, self.C


@dataclass(frozen=True)
class RotorLevel:
    J: int
    K: int
    energy: float


def _close(x, y, tol, abs_tol):
    return abs(x - y) <= max(tol * max(abs(x), abs(y)), abs_tol)


def classify_top(moments, tol=1e-9, hbar=1.0, abs_tol=0.0) -> TopClassification:
    """Classify a rigid body from its principal moments.

    Two moments count as equal when they differ by at most ``tol`` relative
    or ``abs_tol`` absolute (use the latter for Monte Carlo moments, e.g.
    three combined standard errors).  Rotational constants are
    ``hbar**2 / (2 I)``; for a degenerate pair both members get the pair's
    mean moment so the constants are exactly equal.
    """
    I = np.sort(np.asarray(moments, dtype=np.float64))
    if I.shape != (3,):
        raise InvalidParameterError("need three principal moments")
    if np.any(I <= 0):
        raise InvalidParameterError(f"principal moments must be positive, got {I.tolist()}")
    low = _close(I[0], I[1], tol, abs_tol)
    high = _close(I[1], I[2], tol, abs_tol)
    if low and high and _close(I[0], I[2], tol, abs_tol):
        kind = SPHERICAL
        I = np.full(3, I.mean())
    elif high and not low:
        kind = PROLATE
        I[1] = I[2] = 0.5 * (I[1] + I[2])
    elif low and not high:
        kind = OBLATE
        I[0] = I[1] = 0.5 * (I[0] + I[1])
    else:
        kind = ASYMMETRIC
    A, B, C = (hbar * hbar / (2 * I)).tolist()
    return TopClassification(kind, A, B, C)


def level_energy(cls: TopClassification, J, K):
    base = cls.B * J * (J + 1)
    if cls.kind == PROLATE:
        return base + (cls.A - cls.B) * K * K
    if cls.kind == OBLATE:
        return base + (cls.C - cls.B) * K * K
    if cls.kind == SPHERICAL:
        return base
    raise UnsupportedClassificationError(
        "levels of asymmetric tops are not computed; check classify_top(...).kind first")


def symmetric_top_levels(cls: TopClassification, J_max: int) -> list[RotorLevel]:
    """All (J, K) levels with J <= J_max, sorted by energy then J then K."""
    if cls.kind == ASYMMETRIC:
        raise UnsupportedClassificationError(
            "levels of asymmetric tops are not computed; check classify_top(...).kind first")
    if J_max < 0:
        raise InvalidParameterError("J_max must be >= 0")
    levels = [RotorLevel(J, K, level_energy(cls, J, K))
              for J in range(J_max + 1) for K in range(-J, J + 1)]
    return sorted(levels, key=lambda lv: (lv.energy, lv.J, lv.K))
