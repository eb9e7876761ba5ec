"""Pure numpy implementations of the hot kernels.

These mirror ``_ckernels.pyx`` operation for operation so that the tube
membership mask is bit-identical between the two backends.  The Gauss
sum is only required to agree to rounding.
"""
import numpy as np

_POINT_BLOCK = 4096


def segment_dist2(p, seg_a, seg_d, seg_dd):
    """Squared distance from one point to each segment ``a + t d``, t in [0, 1]."""
    wx = p[0] - seg_a[:, 0]
    wy = p[1] - seg_a[:, 1]
    wz = p[2] - seg_a[:, 2]
    t = (wx * seg_d[:, 0] + wy * seg_d[:, 1] + wz * seg_d[:, 2]) / seg_dd
    t = np.clip(t, 0.0, 1.0)
    ex = wx - t * seg_d[:, 0]
    ey = wy - t * seg_d[:, 1]
    ez = wz - t * seg_d[:, 2]
    return ex * ex + ey * ey + ez * ez


def _block_dist2(pts, a, d, dd):
    # (n, m) squared distances, same arithmetic order as segment_dist2
    wx = pts[:, 0, None] - a[None, :, 0]
    wy = pts[:, 1, None] - a[None, :, 1]
    wz = pts[:, 2, None] - a[None, :, 2]
    t = (wx * d[None, :, 0] + wy * d[None, :, 1] + wz * d[None, :, 2]) / dd[None, :]
    np.clip(t, 0.0, 1.0, out=t)
    wx -= t * d[None, :, 0]
    wy -= t * d[None, :, 1]
    wz -= t * d[None, :, 2]
    return wx * wx + wy * wy + wz * wz


def cell_index(points, origin, cell_size, shape):
    """Flat cell id of each point, or -1 outside the grid."""
    ijk = np.floor((points - origin) / cell_size).astype(np.int64)
    shape = np.asarray(shape, dtype=np.int64)
    inside = np.all((ijk >= 0) & (ijk < shape), axis=1)
    flat = (ijk[:, 0] * shape[1] + ijk[:, 1]) * shape[2] + ijk[:, 2]
    return np.where(inside, flat, -1)


def tube_mask(points, seg_a, seg_d, seg_dd, origin, cell_size, shape,
              cell_start, cell_items, radius2):
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    mask = np.zeros(n, dtype=np.uint8)
    flat = cell_index(points, np.asarray(origin), cell_size, shape)
    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    cells, first = np.unique(sorted_flat, return_index=True)
    bounds = np.append(first, n)
    for c, lo, hi in zip(cells, bounds[:-1], bounds[1:]):
        if c < 0:
            continue
        items = cell_items[cell_start[c]:cell_start[c + 1]]
        if items.size == 0:
            continue
        a, d, dd = seg_a[items], seg_d[items], seg_dd[items]
        for b0 in range(lo, hi, _POINT_BLOCK):
            idx = order[b0:min(b0 + _POINT_BLOCK, hi)]
            d2 = _block_dist2(points[idx], a, d, dd)
            mask[idx] = d2.min(axis=1) <= radius2
    return mask


def _unit_cross(u, v):
    c = np.cross(u, v)
    norm = np.sqrt(np.einsum("...i,...i->...", c, c))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = c / norm[..., None]
    out[norm == 0.0] = 0.0
    return out


def _dot(u, v):
    return np.clip(np.einsum("...i,...i->...", u, v), -1.0, 1.0)


def gauss_sum(p, q):
    """Sum of signed solid angles over all segment pairs of two closed polygons.

    Divide by 4 pi to get the linking number.
    """
    p1 = np.asarray(p, dtype=np.float64)
    p2 = np.roll(p1, -1, axis=0)
    q1 = np.asarray(q, dtype=np.float64)
    q2 = np.roll(q1, -1, axis=0)
    total = 0.0
    for i0 in range(0, len(p1), 256):
        a = p1[i0:i0 + 256, None, :]
        b = p2[i0:i0 + 256, None, :]
        r13 = q1[None] - a
        r14 = q2[None] - a
        r23 = q1[None] - b
        r24 = q2[None] - b
        n1 = _unit_cross(r13, r14)
        n2 = _unit_cross(r14, r24)
        n3 = _unit_cross(r24, r23)
        n4 = _unit_cross(r23, r13)
        omega = (np.arcsin(_dot(n1, n2)) + np.arcsin(_dot(n2, n3))
                 + np.arcsin(_dot(n3, n4)) + np.arcsin(_dot(n4, n1)))
        r34 = (q2 - q1)[None]
        r12 = b - a
        orient = np.einsum("...i,...i->...", np.cross(r34, r12), r13)
        total += float(np.sum(omega * np.sign(orient)))
    return total
