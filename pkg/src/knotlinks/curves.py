"""Closed polygonal curves, tube links, canonical generators and grid distance queries.

All geometry is plain ``numpy`` float64.  A :class:`Link` is a set of closed
polygonal centerlines sharing one tube radius and one uniform density; a
point belongs to the tube union iff its distance to the nearest centerline
segment is at most the tube radius.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InvalidParameterError

DEFAULT_VERTICES = 512


def _as_vector(v, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} must be a finite 3-vector, got {v!r}")
    return arr


def _unit(v, name):
    v = _as_vector(v, name)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise InvalidParameterError(f"{name} must be nonzero")
    return v / norm


def _plane_basis(normal):
    """Two unit vectors completing ``normal`` to a right-handed frame."""
    helper = np.eye(3)[int(np.argmin(np.abs(normal)))]
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


@dataclass(frozen=True)
class Component:
    """A closed polygon; the edge from the last vertex back to the first is implicit."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 3:
            raise InvalidParameterError("a component needs at least 3 vertices in 3D")
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("component vertices must be finite")
        diag = float(np.linalg.norm(v.max(axis=0) - v.min(axis=0)))
        edges = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        if diag == 0.0 or edges.min() <= 1e-12 * diag:
            raise InvalidParameterError("consecutive vertices must be distinct")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def edges(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @property
    def arc_length(self) -> float:
        return float(np.linalg.norm(self.edges, axis=1).sum())

    def reversed(self) -> "Component":
        return Component(self.vertices[::-1])

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "Component":
        return Component(self.vertices @ np.asarray(rotation).T + np.asarray(translation))

    def __eq__(self, other):
        if not isinstance(other, Component):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices)

    __hash__ = None


@dataclass(frozen=True)
class Link:
    components: tuple
    tube_radius: float
    density: float = 1.0

    def __post_init__(self):
        comps = tuple(c if isinstance(c, Component) else Component(c) for c in self.components)
        if not comps:
            raise InvalidParameterError("a link needs at least one component")
        if not self.tube_radius > 0:
            raise InvalidParameterError(f"tube_radius must be > 0, got {self.tube_radius}")
        if not self.density > 0:
            raise InvalidParameterError(f"density must be > 0, got {self.density}")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "tube_radius", float(self.tube_radius))
        object.__setattr__(self, "density", float(self.density))

    def __len__(self):
        return len(self.components)

    @property
    def arc_length(self) -> float:
        return sum(c.arc_length for c in self.components)

    def segments(self):
        """Return ``(starts, directions)`` for every centerline segment, stacked."""
        starts = np.concatenate([c.vertices for c in self.components])
        dirs = np.concatenate([c.edges for c in self.components])
        return starts, dirs

    def bounding_box(self, pad=0.0):
        pts = np.concatenate([c.vertices for c in self.components])
        return pts.min(axis=0) - pad, pts.max(axis=0) + pad

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "Link":
        return Link(tuple(c.transformed(rotation, translation) for c in self.components),
                    self.tube_radius, self.density)

    def embeddedness(self, tol=None):
        """Check that the tubes do not self-intersect.

        Pairs of segments on different components must be at least ``2a - tol``
        apart.  On one component, pairs whose arc separation is below ``pi a``
        are treated as neighbours and skipped.  Returns a dict with the minimum
        distance found and the list of violating segment pairs; nothing is
        raised.
        """
        a = self.tube_radius
        tol = 1e-3 * a if tol is None else tol
        starts, dirs = self.segments()
        comp_id = np.concatenate([np.full(len(c), i) for i, c in enumerate(self.components)])
        arc = np.concatenate([
            np.concatenate([[0.0], np.cumsum(np.linalg.norm(c.edges, axis=1))[:-1]])
            for c in self.components])
        total = np.array([c.arc_length for c in self.components])[comp_id]
        best = math.inf
        violations = []
        for i0 in range(0, len(starts), 512):
            sl = slice(i0, i0 + 512)
            d = segment_segment_distance(starts[sl, None], dirs[sl, None], starts[None], dirs[None])
            same = comp_id[sl, None] == comp_id[None]
            sep = np.abs(arc[sl, None] - arc[None])
            sep = np.minimum(sep, total[sl, None] - sep)
            skip = same & (sep < math.pi * a)
            skip |= np.arange(len(starts))[None] <= np.arange(i0, i0 + d.shape[0])[:, None]
            d = np.where(skip, np.inf, d)
            best = min(best, float(d.min()))
            for i, j in zip(*np.nonzero(d < 2 * a - tol)):
                violations.append((int(i0 + i), int(j)))
        return {"min_distance": best, "threshold": 2 * a - tol,
                "ok": not violations, "violations": violations}

    # -- serialization -------------------------------------------------

    def to_dict(self):
        return {
            "tube_radius": self.tube_radius,
            "density": self.density,
            "components": [c.vertices.tolist() for c in self.components],
        }

    @classmethod
    def from_dict(cls, data) -> "Link":
        try:
            return cls(tuple(Component(c) for c in data["components"]),
                       data["tube_radius"], data.get("density", 1.0))
        except KeyError as exc:
            raise InvalidParameterError(f"curve file missing field {exc}") from None

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Link":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __eq__(self, other):
        if not isinstance(other, Link):
            return NotImplemented
        return (self.tube_radius == other.tube_radius and self.density == other.density
                and self.components == other.components)

    __hash__ = None


# -- generators --------------------------------------------------------

def make_circle(center, normal, radius, n_vertices=DEFAULT_VERTICES) -> Component:
    """Regular ``n_vertices``-gon inscribed in the given circle.

    The first vertex lies along the in-plane axis ``normal x e_k`` where
    ``e_k`` is the coordinate axis least aligned with ``normal``; for
    ``normal = z`` that is the +x axis.
    """
    center = _as_vector(center, "center")
    normal = _unit(normal, "normal")
    if not radius > 0:
        raise InvalidParameterError(f"radius must be > 0, got {radius}")
    if n_vertices < 3:
        raise InvalidParameterError("n_vertices must be >= 3")
    u, w = _plane_basis(normal)
    if np.allclose(normal, [0, 0, 1]):
        u, w = np.array([1.0, 0, 0]), np.array([0, 1.0, 0])
    t = 2 * np.pi * np.arange(n_vertices) / n_vertices
    return Component(center + radius * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * w))


def make_ellipse(center, axis1, axis2, n_vertices=DEFAULT_VERTICES) -> Component:
    """Polygon on ``center + cos(t) axis1 + sin(t) axis2``."""
    center = _as_vector(center, "center")
    t = 2 * np.pi * np.arange(n_vertices) / n_vertices
    return Component(center + np.cos(t)[:, None] * np.asarray(axis1, float)
                     + np.sin(t)[:, None] * np.asarray(axis2, float))


def chain_layout(k, a):
    """Ring centers, normals and radius for a straight chain of ``k`` round rings.

    ``k = 2`` is the tight Hopf link: rings of radius ``2a`` with centers ``2a``
    apart, each through the other's center.  For ``k >= 3`` that spacing makes
    rings ``i`` and ``i + 2`` intersect, so longer chains use the tightest
    round-ring chain instead: radius ``3a``, spacing ``4a``, where every
    neighbouring and next-neighbouring pair of tubes is tangent.
    Rings alternate between the xy-plane (normal z) and the xz-plane
    (normal y); the chain is centered on the origin along x.
    """
    if k < 2:
        raise InvalidParameterError(f"a chain needs k >= 2 rings, got {k}")
    if not a > 0:
        raise InvalidParameterError(f"tube radius must be > 0, got {a}")
    ring, spacing = (2 * a, 2 * a) if k == 2 else (3 * a, 4 * a)
    xs = spacing * (np.arange(k) - (k - 1) / 2)
    centers = [np.array([x, 0.0, 0.0]) for x in xs]
    normals = [np.array([0.0, 0.0, 1.0]) if i % 2 == 0 else np.array([0.0, 1.0, 0.0])
               for i in range(k)]
    return centers, normals, ring


def make_chain(k, a, n_vertices=DEFAULT_VERTICES, density=1.0) -> Link:
    centers, normals, ring = chain_layout(k, a)
    comps = tuple(make_circle(c, nrm, ring, n_vertices) for c, nrm in zip(centers, normals))
    return Link(comps, a, density)


def make_tight_hopf(a, n_vertices=DEFAULT_VERTICES, density=1.0) -> Link:
    """Tight Hopf link: component A in the xy-plane at (-a, 0, 0), B in the xz-plane at (a, 0, 0)."""
    return make_chain(2, a, n_vertices, density)


def make_borromean(r1, r2, n_vertices=DEFAULT_VERTICES, tube_radius=None, density=1.0) -> Link:
    """Three congruent ellipses, one per coordinate plane, axes cyclically permuted."""
    if not (r1 > 0 and r2 > 0):
        raise InvalidParameterError("ellipse semi-axes must be positive")
    if r1 == r2:
        raise InvalidParameterError(
            "r1 == r2: Borromean rings cannot be realised by three round circles; "
            "use two different semi-axes")
    ex, ey, ez = np.eye(3)
    comps = (
        make_ellipse((0, 0, 0), r1 * ex, r2 * ey, n_vertices),
        make_ellipse((0, 0, 0), r1 * ey, r2 * ez, n_vertices),
        make_ellipse((0, 0, 0), r1 * ez, r2 * ex, n_vertices),
    )
    if tube_radius is None:
        tube_radius = 0.1 * min(r1, r2)
    return Link(comps, tube_radius, density)


def make_torus_link(p, q, major=2.0, minor=1.0, tube_radius=0.1,
                    n_vertices=DEFAULT_VERTICES, density=1.0) -> Link:
    """(p, q) torus knot or link on a torus of radii ``major`` > ``minor``.

    Each of the ``gcd(p, q)`` components winds ``p / gcd`` times around the
    symmetry axis and ``q / gcd`` times around the tube.
    """
    if p < 1 or q < 1:
        raise InvalidParameterError("p and q must be positive integers")
    if not major > minor > 0:
        raise InvalidParameterError("need major > minor > 0")
    g = math.gcd(p, q)
    pp, qq = p // g, q // g
    t = 2 * np.pi * np.arange(n_vertices) / n_vertices
    comps = []
    for j in range(g):
        u = pp * t + 2 * np.pi * j / (g * qq)
        v = qq * t
        rho = major + minor * np.cos(v)
        comps.append(Component(np.column_stack([rho * np.cos(u), rho * np.sin(u), minor * np.sin(v)])))
    return Link(tuple(comps), tube_radius, density)


# -- distance queries ------------------------------------------------------

def segment_segment_distance(a0, d0, a1, d1):
    """Broadcast minimum distance between segments ``a0 + s d0`` and ``a1 + t d1``."""
    r = a0 - a1
    A = np.sum(d0 * d0, axis=-1)
    E = np.sum(d1 * d1, axis=-1)
    B = np.sum(d0 * d1, axis=-1)
    C = np.sum(d0 * r, axis=-1)
    F = np.sum(d1 * r, axis=-1)
    denom = A * E - B * B
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 1e-14 * A * E, np.clip((B * F - C * E) / denom, 0.0, 1.0), 0.0)
        t = (B * s + F) / E
        t_clipped = np.clip(t, 0.0, 1.0)
        s = np.where(t != t_clipped, np.clip((B * t_clipped - C) / A, 0.0, 1.0), s)
    diff = a0 + s[..., None] * d0 - a1 - t_clipped[..., None] * d1
    return np.sqrt(np.sum(diff * diff, axis=-1))


@dataclass(frozen=True)
class SegmentGrid:
    """Uniform spatial hash of a link's centerline segments.

    Each segment is registered in every cell touched by its bounding box
    inflated by ``pad``.  Cells are stored densely over the padded bounding
    box of the link in CSR form: the segments of flat cell ``c`` are
    ``cell_items[cell_start[c]:cell_start[c + 1]]``.
    """

    cell_size: float
    pad: float
    origin: np.ndarray
    shape: tuple
    cell_start: np.ndarray
    cell_items: np.ndarray
    seg_a: np.ndarray = field(repr=False)
    seg_d: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, link: Link, cell_size=None, pad=None, max_cells=2_000_000) -> "SegmentGrid":
        """Grid with ``cell_size`` (default ``2a``) and padding ``pad`` (default ``a``).

        Cells are enlarged when the box would need more than ``max_cells``;
        queries stay exact, only slower.
        """
        a = link.tube_radius
        cell_size = 2 * a if cell_size is None else float(cell_size)
        pad = a if pad is None else float(pad)
        if not cell_size > 0:
            raise InvalidParameterError("cell_size must be > 0")
        seg_a, seg_d = link.segments()
        seg_b = seg_a + seg_d
        # slack keeps registration conservative against rounding of lo/hi
        slack = pad * (1 + 1e-12) + 1e-300
        lo_box, hi_box = link.bounding_box(slack)
        extent = hi_box - lo_box
        if np.prod(extent / cell_size + 1) > max_cells:
            cell_size = float(np.max(extent)) / math.floor(max_cells ** (1 / 3) - 1)
        origin = lo_box
        shape = tuple(int(s) for s in np.floor((hi_box - origin) / cell_size).astype(int) + 1)
        lo = np.floor((np.minimum(seg_a, seg_b) - slack - origin) / cell_size).astype(np.int64)
        hi = np.floor((np.maximum(seg_a, seg_b) + slack - origin) / cell_size).astype(np.int64)
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, np.array(shape) - 1)
        cells, owners = [], []
        for s in range(len(seg_a)):
            ii, jj, kk = np.meshgrid(*(np.arange(lo[s, d], hi[s, d] + 1) for d in range(3)),
                                     indexing="ij")
            flat = ((ii * shape[1] + jj) * shape[2] + kk).ravel()
            cells.append(flat)
            owners.append(np.full(flat.size, s, dtype=np.int64))
        cells = np.concatenate(cells)
        owners = np.concatenate(owners)
        order = np.lexsort((owners, cells))
        counts = np.bincount(cells, minlength=int(np.prod(shape)))
        cell_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        return cls(cell_size, pad, origin, shape, cell_start, owners[order].copy(),
                   np.ascontiguousarray(seg_a), np.ascontiguousarray(seg_d))

    @cached_property
    def seg_dd(self):
        return np.einsum("ij,ij->i", self.seg_d, self.seg_d)

    @property
    def cells(self):
        """Mapping of integer cell coordinates to segment indices (nonempty cells only)."""
        out = {}
        for flat in np.nonzero(np.diff(self.cell_start))[0]:
            key = tuple(int(x) for x in np.unravel_index(flat, self.shape))
            out[key] = self.cell_items[self.cell_start[flat]:self.cell_start[flat + 1]]
        return out

    def cell_of(self, p):
        return tuple(int(x) for x in np.floor((np.asarray(p, float) - self.origin) / self.cell_size))

    def contains(self, p):
        ijk = self.cell_of(p)
        return all(0 <= i < n for i, n in zip(ijk, self.shape))

    def segments_in(self, ijk):
        i, j, k = ijk
        flat = (i * self.shape[1] + j) * self.shape[2] + k
        return self.cell_items[self.cell_start[flat]:self.cell_start[flat + 1]]

    def inside_mask(self, points, radius, backend=None):
        """Mask of points within ``radius`` (<= pad) of the centerline union."""
        if radius > self.pad:
            raise InvalidParameterError("query radius exceeds grid padding")
        k = kernels.get(backend)
        return k.tube_mask(np.ascontiguousarray(points, dtype=np.float64), self.seg_a,
                           self.seg_d, self.seg_dd, self.origin, self.cell_size, self.shape,
                           self.cell_start, self.cell_items, radius * radius)


def brute_force_distance(p, link: Link) -> float:
    seg_a, seg_d = link.segments()
    dd = np.einsum("ij,ij->i", seg_d, seg_d)
    return math.sqrt(float(kernels._pykernels.segment_dist2(_as_vector(p, "p"), seg_a, seg_d, dd).min()))


def distance_to_link(p, link: Link, grid: SegmentGrid | None = None) -> float:
    """Exact distance from ``p`` to the union of the link's centerline segments.

    Searches cubic shells of cells around ``p``; after shells ``0..k`` every
    segment within ``(k - 1) * cell_size`` has been seen, so the search stops
    as soon as the best distance is below that bound.  Points outside the
    grid fall back to a full scan.
    """
    p = _as_vector(p, "p")
    if grid is None:
        grid = SegmentGrid.build(link)
    if not grid.contains(p):
        return brute_force_distance(p, link)
    ci = np.array(grid.cell_of(p))
    shape = np.array(grid.shape)
    seen = np.zeros(len(grid.seg_a), dtype=bool)
    best2 = math.inf
    k_max = int(np.max(np.maximum(ci, shape - 1 - ci)))
    for k in range(k_max + 1):
        lo = np.maximum(ci - k, 0)
        hi = np.minimum(ci + k, shape - 1)
        ii, jj, kk = np.meshgrid(*(np.arange(lo[d], hi[d] + 1) for d in range(3)), indexing="ij")
        ring = np.max(np.abs(np.stack([ii, jj, kk]) - ci[:, None, None, None]), axis=0) == k
        flats = ((ii * shape[1] + jj) * shape[2] + kk)[ring]
        items = [grid.cell_items[grid.cell_start[f]:grid.cell_start[f + 1]] for f in flats]
        if items:
            cand = np.unique(np.concatenate(items))
            cand = cand[~seen[cand]]
            if cand.size:
                seen[cand] = True
                d2 = kernels._pykernels.segment_dist2(p, grid.seg_a[cand], grid.seg_d[cand],
                                                      grid.seg_dd[cand])
                best2 = min(best2, float(d2.min()))
        if best2 <= grid.pad * grid.pad and k == 0:
            break
        if k >= 1 and math.sqrt(best2) <= (k - 1) * grid.cell_size:
            break
    return math.sqrt(best2)
