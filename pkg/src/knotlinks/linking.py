"""Gauss linking numbers of closed polygons.

Each pair of segments contributes the signed solid angle of the
quadrilateral their endpoints span (Klenin-Langowski form), which makes
the double integral exact for polygons.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .curves import Component, segment_segment_distance
from .errors import GeometricDegeneracyError

RESIDUAL_LIMIT = 1e-9


@dataclass(frozen=True)
class LinkingResult:
    raw_value: float
    rounded: int
    residual: float

    @property
    def well_separated(self) -> bool:
        return self.residual < RESIDUAL_LIMIT

    def to_dict(self):
        return {"raw": self.raw_value, "rounded": self.rounded, "residual": self.residual,
                "flagged": not self.well_separated}


def closest_segment_pair(c1: Component, c2: Component):
    """Return ``(distance, i, j)`` for the closest pair of segments."""
    a0, d0 = c1.vertices, c1.edges
    a1, d1 = c2.vertices, c2.edges
    best = (np.inf, -1, -1)
    for i0 in range(0, len(a0), 256):
        d = segment_segment_distance(a0[i0:i0 + 256, None], d0[i0:i0 + 256, None], a1[None], d1[None])
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] < best[0]:
            best = (float(d[i, j]), int(i0 + i), int(j))
    return best


def gauss_linking(c1: Component, c2: Component, backend=None) -> LinkingResult:
    pts = np.concatenate([c1.vertices, c2.vertices])
    scale = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    dist, i, j = closest_segment_pair(c1, c2)
    if dist <= 1e-9 * scale:
        raise GeometricDegeneracyError(
            f"curves touch: segment {i} of the first curve and segment {j} of the second "
            f"are {dist:.3g} apart")
    raw = kernels.get(backend).gauss_sum(c1.vertices, c2.vertices) / (4 * np.pi)
    rounded = int(round(raw))
    return LinkingResult(raw, rounded, abs(raw - rounded))


def linking_matrix(link, backend=None):
    """Pairwise rounded linking numbers of all components."""
    n = len(link.components)
    out = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = gauss_linking(link.components[i], link.components[j], backend).rounded
    return out
