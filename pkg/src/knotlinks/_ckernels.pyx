# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: tube membership for Monte Carlo and the Gauss sum.

Arithmetic order matches ``_pykernels`` exactly; build with FMA
contraction disabled so both backends produce the same mask bits.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, asin

cnp.import_array()


cdef inline double _clamp1(double x) noexcept nogil:
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def tube_mask(const double[:, ::1] points, const double[:, ::1] seg_a, const double[:, ::1] seg_d,
              const double[::1] seg_dd, origin, double cell_size, shape,
              const cnp.int64_t[::1] cell_start, const cnp.int64_t[::1] cell_items,
              double radius2):
    cdef Py_ssize_t n = points.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mask = out
    cdef double ox = origin[0], oy = origin[1], oz = origin[2]
    cdef long nx = shape[0], ny = shape[1], nz = shape[2]
    cdef Py_ssize_t i, k, s
    cdef long ix, iy, iz, c
    cdef double px, py, pz, wx, wy, wz, t, ex, ey, ez, d2
    with nogil:
        for i in range(n):
            px = points[i, 0]
            py = points[i, 1]
            pz = points[i, 2]
            ix = <long>floor((px - ox) / cell_size)
            iy = <long>floor((py - oy) / cell_size)
            iz = <long>floor((pz - oz) / cell_size)
            if ix < 0 or iy < 0 or iz < 0 or ix >= nx or iy >= ny or iz >= nz:
                continue
            c = (ix * ny + iy) * nz + iz
            for k in range(cell_start[c], cell_start[c + 1]):
                s = cell_items[k]
                wx = px - seg_a[s, 0]
                wy = py - seg_a[s, 1]
                wz = pz - seg_a[s, 2]
                t = (wx * seg_d[s, 0] + wy * seg_d[s, 1] + wz * seg_d[s, 2]) / seg_dd[s]
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
                ex = wx - t * seg_d[s, 0]
                ey = wy - t * seg_d[s, 1]
                ez = wz - t * seg_d[s, 2]
                d2 = ex * ex + ey * ey + ez * ez
                if d2 <= radius2:
                    mask[i] = 1
                    break
    return out


cdef inline void _unit_cross(double ux, double uy, double uz,
                             double vx, double vy, double vz,
                             double* out) noexcept nogil:
    cdef double cx = uy * vz - uz * vy
    cdef double cy = uz * vx - ux * vz
    cdef double cz = ux * vy - uy * vx
    cdef double nrm = sqrt(cx * cx + cy * cy + cz * cz)
    if nrm == 0.0:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
    else:
        out[0] = cx / nrm
        out[1] = cy / nrm
        out[2] = cz / nrm


cdef inline double _dot(double* u, double* v) noexcept nogil:
    return _clamp1(u[0] * v[0] + u[1] * v[1] + u[2] * v[2])


def gauss_sum(p, q):
    cdef const double[:, ::1] P = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[:, ::1] Q = np.ascontiguousarray(q, dtype=np.float64)
    cdef Py_ssize_t n = P.shape[0], m = Q.shape[0]
    cdef Py_ssize_t i, j, i2, j2
    cdef double total = 0.0, omega, orient
    cdef double r13[3]
    cdef double r14[3]
    cdef double r23[3]
    cdef double r24[3]
    cdef double r12[3]
    cdef double r34[3]
    cdef double n1[3]
    cdef double n2[3]
    cdef double n3[3]
    cdef double n4[3]
    cdef int d
    with nogil:
        for i in range(n):
            i2 = i + 1 if i + 1 < n else 0
            for d in range(3):
                r12[d] = P[i2, d] - P[i, d]
            for j in range(m):
                j2 = j + 1 if j + 1 < m else 0
                for d in range(3):
                    r13[d] = Q[j, d] - P[i, d]
                    r14[d] = Q[j2, d] - P[i, d]
                    r23[d] = Q[j, d] - P[i2, d]
                    r24[d] = Q[j2, d] - P[i2, d]
                    r34[d] = Q[j2, d] - Q[j, d]
                orient = ((r34[1] * r12[2] - r34[2] * r12[1]) * r13[0]
                          + (r34[2] * r12[0] - r34[0] * r12[2]) * r13[1]
                          + (r34[0] * r12[1] - r34[1] * r12[0]) * r13[2])
                if orient == 0.0:
                    continue
                _unit_cross(r13[0], r13[1], r13[2], r14[0], r14[1], r14[2], n1)
                _unit_cross(r14[0], r14[1], r14[2], r24[0], r24[1], r24[2], n2)
                _unit_cross(r24[0], r24[1], r24[2], r23[0], r23[1], r23[2], n3)
                _unit_cross(r23[0], r23[1], r23[2], r13[0], r13[1], r13[2], n4)
                omega = (asin(_dot(n1, n2)) + asin(_dot(n2, n3))
                         + asin(_dot(n3, n4)) + asin(_dot(n4, n1)))
                if orient > 0.0:
                    total += omega
                else:
                    total -= omega
    return total
