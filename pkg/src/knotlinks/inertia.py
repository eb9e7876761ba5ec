"""Mass, center of mass and inertia tensors of solid tubes.

Two routes: closed forms for unions of solid tori (chains, the tight Hopf
link) and a seeded Monte Carlo estimate for arbitrary polygonal tubes.
Both return an :class:`InertiaResult` with the tensor taken about the
center of mass.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .curves import Link, SegmentGrid, chain_layout
from .errors import GeometricDegeneracyError, InvalidParameterError

PI2_RHO_A5 = "pi2-rho-a5"
_BLOCK = 1 << 18
_TWO_M53 = 2.0 ** -53


# -- principal axes ------------------------------------------------------------

def principal_axes(tensor, tol=1e-14, max_sweeps=64):
    """Eigen-decompose a symmetric 3x3 tensor by cyclic Jacobi rotations.

    Returns ``(moments, axes)`` with moments ascending and the columns of
    ``axes`` forming a right-handed orthonormal frame.
    """
    A = np.array(tensor, dtype=np.float64)
    if A.shape != (3, 3):
        raise InvalidParameterError("tensor must be 3x3")
    scale = float(np.max(np.abs(A)))
    if np.max(np.abs(A - A.T)) > 1e-9 * scale:
        raise InvalidParameterError("tensor is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(3)
    norm = float(np.linalg.norm(A))
    for _ in range(max_sweeps):
        off = math.sqrt(2 * (A[0, 1] ** 2 + A[0, 2] ** 2 + A[1, 2] ** 2))
        if off <= tol * norm:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if A[p, q] == 0.0:
                continue
            diff = A[q, q] - A[p, p]
            if abs(diff) + 1e8 * abs(A[p, q]) == abs(diff):
                # coupling negligible against the gap; avoids overflow in theta
                t = A[p, q] / diff
            else:
                theta = diff / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
            c = 1 / math.hypot(t, 1.0)
            s = t * c
            J = np.eye(3)
            J[p, p] = J[q, q] = c
            J[p, q] = s
            J[q, p] = -s
            A = J.T @ A @ J
            A[p, q] = A[q, p] = 0.0
            V = V @ J
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    moments = np.diag(A).copy()
    order = np.argsort(moments, kind="stable")
    moments, V = moments[order], V[:, order]
    if np.linalg.det(V) < 0:
        V[:, 2] = -V[:, 2]
    return moments, V


# -- results -------------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloProvenance:
    seed: int
    samples: int
    chunks: int
    accepted: int
    stderr_estimate: np.ndarray
    mass_stderr: float
    generator: str = "philox4x64-10"

    def to_dict(self):
        return {"kind": "monte_carlo", "seed": self.seed, "samples": self.samples,
                "chunks": self.chunks, "accepted": self.accepted,
                "stderr_estimate": self.stderr_estimate.tolist(),
                "mass_stderr": self.mass_stderr, "generator": self.generator}


@dataclass(frozen=True)
class InertiaResult:
    mass: float
    com: np.ndarray
    tensor: np.ndarray
    principal_moments: np.ndarray
    principal_axes: np.ndarray
    provenance: object = "exact"
    units: str = "absolute"

    @classmethod
    def from_tensor(cls, mass, com, tensor, provenance="exact"):
        tensor = np.asarray(tensor, dtype=np.float64)
        tensor = 0.5 * (tensor + tensor.T)
        moments, axes = principal_axes(tensor)
        return cls(float(mass), np.asarray(com, dtype=np.float64), tensor, moments, axes, provenance)

    @property
    def is_exact(self):
        return self.provenance == "exact"

    def normalized(self, tube_radius, density):
        """Divide tensor quantities by ``pi^2 rho a^5``."""
        unit = math.pi ** 2 * density * tube_radius ** 5
        prov = self.provenance
        if isinstance(prov, MonteCarloProvenance):
            prov = replace(prov, stderr_estimate=prov.stderr_estimate / unit)
        return replace(self, tensor=self.tensor / unit, principal_moments=self.principal_moments / unit,
                       provenance=prov, units=PI2_RHO_A5)

    def to_dict(self):
        prov = self.provenance.to_dict() if isinstance(self.provenance, MonteCarloProvenance) \
            else {"kind": "exact"}
        return {"mass": self.mass, "com": self.com.tolist(), "tensor": self.tensor.tolist(),
                "principal_moments": self.principal_moments.tolist(),
                "principal_axes": self.principal_axes.tolist(),
                "tensor_units": self.units, "provenance": prov}


# -- exact solid tori ----------------------------------------------------------------------

@dataclass(frozen=True)
class SolidTorusSpec:
    center: np.ndarray
    axis: np.ndarray
    major_radius: float
    minor_radius: float
    density: float = 1.0

    def __post_init__(self):
        center = np.asarray(self.center, dtype=np.float64)
        axis = np.asarray(self.axis, dtype=np.float64)
        if center.shape != (3,) or axis.shape != (3,):
            raise InvalidParameterError("center and axis must be 3-vectors")
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise InvalidParameterError("torus axis must be nonzero")
        if not self.minor_radius > 0:
            raise InvalidParameterError("minor radius must be > 0")
        if not self.major_radius > self.minor_radius:
            raise InvalidParameterError(
                f"need major radius > minor radius (got R={self.major_radius}, "
                f"a={self.minor_radius}); horn and spindle tori are not supported")
        if not self.density > 0:
            raise InvalidParameterError("density must be > 0")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "axis", axis / norm)

    @property
    def mass(self):
        return 2 * math.pi ** 2 * self.major_radius * self.minor_radius ** 2 * self.density

    def to_dict(self):
        return {"center": self.center.tolist(), "axis": self.axis.tolist(),
                "major_radius": self.major_radius, "minor_radius": self.minor_radius,
                "density": self.density}

    @classmethod
    def from_dict(cls, d):
        return cls(d["center"], d["axis"], d["major_radius"], d["minor_radius"], d.get("density", 1.0))


def _torus_tensor(spec):
    M, R, a = spec.mass, spec.major_radius, spec.minor_radius
    i_axis = M * (R * R + 0.75 * a * a)
    i_diam = M * (0.5 * R * R + 0.625 * a * a)
    nn = np.outer(spec.axis, spec.axis)
    return i_diam * (np.eye(3) - nn) + i_axis * nn


def torus_inertia(spec: SolidTorusSpec) -> InertiaResult:
    return InertiaResult.from_tensor(spec.mass, spec.center, _torus_tensor(spec))


def _circle_frame(spec):
    helper = np.eye(3)[int(np.argmin(np.abs(spec.axis)))]
    u = np.cross(spec.axis, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(spec.axis, u)


def centerline_distance(s1: SolidTorusSpec, s2: SolidTorusSpec, samples=256) -> float:
    """Minimum distance between the two core circles.

    Distance from a point to a circle is closed form, so only the angle on
    the first circle is searched: a coarse scan, then golden-section
    refinement around the best few samples.
    """
    u, w = _circle_frame(s1)
    R1, R2 = s1.major_radius, s2.major_radius
    n2 = s2.axis
    # point on circle 1 relative to center 2: off + R1 (cos t u + sin t w)
    off = s1.center - s2.center
    ts = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    rel = off + R1 * (np.cos(ts)[:, None] * u + np.sin(ts)[:, None] * w)
    h = rel @ n2
    rho = np.sqrt(np.maximum(np.einsum("ij,ij->i", rel, rel) - h * h, 0.0))
    d2 = h * h + (rho - R2) ** 2

    h0, hu, hw = float(off @ n2), float(u @ n2), float(w @ n2)
    oo, ou, ow = float(off @ off), float(off @ u), float(off @ w)

    def g(t):
        c, s = math.cos(t), math.sin(t)
        hh = h0 + R1 * (c * hu + s * hw)
        rr = oo + 2 * R1 * (c * ou + s * ow) + R1 * R1
        r = math.sqrt(max(rr - hh * hh, 0.0))
        return hh * hh + (r - R2) ** 2

    best = float(d2.min())
    step = ts[1] - ts[0]
    invphi = (math.sqrt(5) - 1) / 2
    local = (d2 <= np.roll(d2, 1)) & (d2 <= np.roll(d2, -1))
    cands = np.nonzero(local)[0]
    for i in cands[np.argsort(d2[cands])][:3]:
        a, b = ts[i] - step, ts[i] + step
        c, d = b - invphi * (b - a), a + invphi * (b - a)
        gc, gd = g(c), g(d)
        while b - a > 1e-11:
            if gc < gd:
                b, d, gd = d, c, gc
                c = b - invphi * (b - a)
                gc = g(c)
            else:
                a, c, gc = c, d, gd
                d = a + invphi * (b - a)
                gd = g(d)
        best = min(best, gc, gd)
    return math.sqrt(best)


def composite_inertia(tori, check_overlap=True) -> InertiaResult:
    """Exact inertia of a union of disjoint (possibly tangent) solid tori, about the joint com."""
    tori = list(tori)
    if not tori:
        raise InvalidParameterError("need at least one torus")
    if check_overlap:
        for i in range(len(tori)):
            for j in range(i + 1, len(tori)):
                gap = centerline_distance(tori[i], tori[j])
                need = tori[i].minor_radius + tori[j].minor_radius
                scale = max(tori[i].major_radius, tori[j].major_radius) + need
                if gap < need - 1e-9 * scale:
                    raise InvalidParameterError(
                        f"tori {i} and {j} overlap (core circles {gap:.6g} apart, "
                        f"tube radii sum to {need:.6g})")
    masses = np.array([t.mass for t in tori])
    centers = np.array([t.center for t in tori])
    total = float(masses.sum())
    com = masses @ centers / total
    tensor = np.zeros((3, 3))
    for t, m, c in zip(tori, masses, centers):
        d = c - com
        tensor += _torus_tensor(t) + m * (np.dot(d, d) * np.eye(3) - np.outer(d, d))
    return InertiaResult.from_tensor(total, com, tensor)


def chain_tori(k, a, density=1.0):
    centers, normals, ring = chain_layout(k, a)
    return [SolidTorusSpec(c, n, ring, a, density) for c, n in zip(centers, normals)]


def hopf_tori(a, density=1.0):
    return chain_tori(2, a, density)


# -- Monte Carlo ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class MCConfig:
    """Sampling setup.

    Sample ``i`` is built from the Philox4x64-10 block at counter offset
    ``i`` under key ``seed`` (first three of its four 64-bit words, top 53
    bits each), so any index range can be generated independently.  The
    range ``[0, samples)`` is cut into ``chunks`` fixed slices whose partial
    sums are combined in slice order.
    """

    seed: int = 0
    samples: int = 1_000_000
    chunks: int = 64

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        if self.samples < 1 or self.chunks < 1:
            raise InvalidParameterError("samples and chunks must be positive")
        if self.chunks > self.samples:
            raise InvalidParameterError("more chunks than samples")

    def chunk_bounds(self, c):
        return c * self.samples // self.chunks, (c + 1) * self.samples // self.chunks


def uniform_block(seed, start, count):
    """``count`` x 3 uniforms in [0, 1) for sample indices ``start .. start + count - 1``."""
    bg = np.random.Philox(key=seed)
    bg.advance(start)
    raw = bg.random_raw(4 * count).reshape(count, 4)[:, :3]
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53


def default_threads():
    try:
        return max(1, int(os.environ.get("KNOTLINKS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class _ChunkSums:
    samples: int
    count: int = 0
    s1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    s2: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))


def _run_chunk(c, cfg, grid, lo, span, shift, radius, backend):
    start, stop = cfg.chunk_bounds(c)
    sums = _ChunkSums(stop - start)
    for b0 in range(start, stop, _BLOCK):
        nb = min(_BLOCK, stop - b0)
        pts = lo + uniform_block(cfg.seed, b0, nb) * span
        hit = grid.inside_mask(pts, radius, backend).view(bool)
        x = np.ascontiguousarray((pts[hit] - shift).T)
        sums.count += x.shape[1]
        for i in range(3):
            sums.s1[i] += np.sum(x[i])
            for j in range(i, 3):
                sums.s2[i, j] += np.sum(x[i] * x[j])
    sums.s2 = np.triu(sums.s2) + np.triu(sums.s2, 1).T
    return sums


def _estimate(count, samples, s1, s2, box_volume, density, shift):
    mean = s1 / count
    cov = s2 / count - np.outer(mean, mean)
    mass = density * box_volume * count / samples
    tensor = mass * (np.trace(cov) * np.eye(3) - cov)
    return mass, mean + shift, tensor


def mc_inertia(link: Link, cfg: MCConfig, threads=None, backend=None) -> InertiaResult:
    """Monte Carlo inertia of the tube union of ``link``.

    Samples are uniform in the centerline bounding box inflated by the tube
    radius.  The standard error of each tensor component is the spread of
    the per-chunk estimates divided by ``sqrt(chunks)``; it is NaN when
    ``chunks == 1``.  ``threads`` changes wall time only.
    """
    a = link.tube_radius
    grid = SegmentGrid.build(link)
    lo, hi = link.bounding_box(a)
    span = hi - lo
    box_volume = float(np.prod(span))
    shift = 0.5 * (lo + hi)
    threads = threads or default_threads()
    job = lambda c: _run_chunk(c, cfg, grid, lo, span, shift, a, backend)  # noqa: E731
    if threads == 1:
        parts = [job(c) for c in range(cfg.chunks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, range(cfg.chunks)))

    count, s1, s2 = 0, np.zeros(3), np.zeros((3, 3))
    for part in parts:
        count += part.count
        s1 = s1 + part.s1
        s2 = s2 + part.s2
    if count == 0:
        raise GeometricDegeneracyError("no Monte Carlo sample landed inside the tube")
    mass, com, tensor = _estimate(count, cfg.samples, s1, s2, box_volume, link.density, shift)

    chunk_tensors, chunk_masses = [], []
    for part in parts:
        if part.count == 0:
            chunk_masses.append(0.0)
            chunk_tensors.append(np.zeros((3, 3)))
            continue
        m, _, t = _estimate(part.count, part.samples, part.s1, part.s2, box_volume,
                            link.density, shift)
        chunk_masses.append(m)
        chunk_tensors.append(t)
    if cfg.chunks > 1:
        stderr = np.std(chunk_tensors, axis=0, ddof=1) / math.sqrt(cfg.chunks)
        mass_err = float(np.std(chunk_masses, ddof=1) / math.sqrt(cfg.chunks))
    else:
        stderr, mass_err = np.full((3, 3), np.nan), math.nan
    prov = MonteCarloProvenance(cfg.seed, cfg.samples, cfg.chunks, count, stderr, mass_err)
    return InertiaResult.from_tensor(mass, com, tensor, prov)


def moment_stderr(result: InertiaResult) -> np.ndarray:
    """Standard error of each principal moment, propagated to first order."""
    prov = result.provenance
    if not isinstance(prov, MonteCarloProvenance):
        return np.zeros(3)
    var = prov.stderr_estimate ** 2
    return np.sqrt(np.einsum("ia,ja,ij->a", result.principal_axes ** 2, result.principal_axes ** 2, var))
