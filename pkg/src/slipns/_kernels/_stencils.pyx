# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the numpy stencil kernels.

Semantics (including the per-element order of arithmetic) mirror
_numpy_impl so both backends agree to the last bit. Axis-generic pieces
are written for axis 0 and reused through transposed memoryviews.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, fmin

cnp.import_array()


cdef inline double _minmod(double a, double b) noexcept nogil:
    cdef double sa = (a > 0.0) - (a < 0.0)
    cdef double sb = (b > 0.0) - (b < 0.0)
    return 0.5 * (sa + sb) * fmin(fabs(a), fabs(b))


def divergence(double[:, :, ::1] ux, double[:, :, ::1] uy, double[:, :, ::1] uz,
               double hx, double hy, double hz, int g):
    cdef int nx = ux.shape[0] - 1 - 2 * g
    cdef int ny = ux.shape[1] - 2 * g
    cdef int nz = ux.shape[2] - 2 * g
    out_arr = np.zeros((nx + 2 * g, ny + 2 * g, nz + 2 * g))
    cdef double[:, :, ::1] out = out_arr
    cdef int i, j, k
    cdef double d
    with nogil:
        for i in range(g, g + nx):
            for j in range(g, g + ny):
                for k in range(g, g + nz):
                    d = (ux[i + 1, j, k] - ux[i, j, k]) / hx
                    d += (uy[i, j + 1, k] - uy[i, j, k]) / hy
                    d += (uz[i, j, k + 1] - uz[i, j, k]) / hz
                    out[i, j, k] = d
    return out_arr


cdef void _grad_axis0(double[:, :, :] p, double[:, :, :] out, double h, int g,
                      int n0, int n1, int n2) noexcept nogil:
    cdef int i, j, k
    for i in range(g, g + n0 + 1):
        for j in range(g, g + n1):
            for k in range(g, g + n2):
                out[i, j, k] = (p[i, j, k] - p[i - 1, j, k]) / h


def gradient(double[:, :, ::1] p, double hx, double hy, double hz, int g):
    cdef int nx = p.shape[0] - 2 * g
    cdef int ny = p.shape[1] - 2 * g
    cdef int nz = p.shape[2] - 2 * g
    gx_arr = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 2 * g))
    gy_arr = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    gz_arr = np.zeros((nx + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    cdef double[:, :, :] pt
    cdef double[:, :, :] ot
    pt = p
    ot = gx_arr
    with nogil:
        _grad_axis0(pt, ot, hx, g, nx, ny, nz)
    pt = np.asarray(p).transpose(1, 0, 2)
    ot = gy_arr.transpose(1, 0, 2)
    with nogil:
        _grad_axis0(pt, ot, hy, g, ny, nx, nz)
    pt = np.asarray(p).transpose(2, 0, 1)
    ot = gz_arr.transpose(2, 0, 1)
    with nogil:
        _grad_axis0(pt, ot, hz, g, nz, nx, ny)
    return gx_arr, gy_arr, gz_arr


def curl_face_to_edge(double[:, :, ::1] ux, double[:, :, ::1] uy, double[:, :, ::1] uz,
                      double hx, double hy, double hz, int g):
    cdef int nx = ux.shape[0] - 1 - 2 * g
    cdef int ny = ux.shape[1] - 2 * g
    cdef int nz = ux.shape[2] - 2 * g
    wx_arr = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 1 + 2 * g))
    wy_arr = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    wz_arr = np.zeros((nx + 1 + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    cdef double[:, :, ::1] wx = wx_arr
    cdef double[:, :, ::1] wy = wy_arr
    cdef double[:, :, ::1] wz = wz_arr
    cdef int i, j, k
    with nogil:
        for i in range(g, g + nx):
            for j in range(g, g + ny + 1):
                for k in range(g, g + nz + 1):
                    wx[i, j, k] = (uz[i, j, k] - uz[i, j - 1, k]) / hy \
                        - (uy[i, j, k] - uy[i, j, k - 1]) / hz
        for i in range(g, g + nx + 1):
            for j in range(g, g + ny):
                for k in range(g, g + nz + 1):
                    wy[i, j, k] = (ux[i, j, k] - ux[i, j, k - 1]) / hz \
                        - (uz[i, j, k] - uz[i - 1, j, k]) / hx
        for i in range(g, g + nx + 1):
            for j in range(g, g + ny + 1):
                for k in range(g, g + nz):
                    wz[i, j, k] = (uy[i, j, k] - uy[i - 1, j, k]) / hx \
                        - (ux[i, j, k] - ux[i, j - 1, k]) / hy
    return wx_arr, wy_arr, wz_arr


def curl_edge_to_face(double[:, :, ::1] wx, double[:, :, ::1] wy, double[:, :, ::1] wz,
                      double hx, double hy, double hz, int g):
    cdef int nx = wx.shape[0] - 2 * g
    cdef int ny = wx.shape[1] - 1 - 2 * g
    cdef int nz = wx.shape[2] - 1 - 2 * g
    cx_arr = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 2 * g))
    cy_arr = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    cz_arr = np.zeros((nx + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    cdef double[:, :, ::1] cx = cx_arr
    cdef double[:, :, ::1] cy = cy_arr
    cdef double[:, :, ::1] cz = cz_arr
    cdef int i, j, k
    with nogil:
        for i in range(g, g + nx + 1):
            for j in range(g, g + ny):
                for k in range(g, g + nz):
                    cx[i, j, k] = (wz[i, j + 1, k] - wz[i, j, k]) / hy \
                        - (wy[i, j, k + 1] - wy[i, j, k]) / hz
        for i in range(g, g + nx):
            for j in range(g, g + ny + 1):
                for k in range(g, g + nz):
                    cy[i, j, k] = (wx[i, j, k + 1] - wx[i, j, k]) / hz \
                        - (wz[i + 1, j, k] - wz[i, j, k]) / hx
        for i in range(g, g + nx):
            for j in range(g, g + ny):
                for k in range(g, g + nz + 1):
                    cz[i, j, k] = (wy[i + 1, j, k] - wy[i, j, k]) / hx \
                        - (wx[i, j + 1, k] - wx[i, j, k]) / hy
    return cx_arr, cy_arr, cz_arr


cdef inline double _muscl_flux(double qm2, double qm1, double q0, double qp1,
                               double v) noexcept nogil:
    """Limited upwind flux at the face between cells holding qm1 and q0."""
    cdef double ql = qm1 + 0.5 * _minmod(q0 - qm1, qm1 - qm2)
    cdef double qr = q0 - 0.5 * _minmod(qp1 - q0, q0 - qm1)
    return v * (0.5 * (ql + qr)) - 0.5 * fabs(v) * (qr - ql)


cdef void _mass_w0(double[:, :, :] rho, double[:, :, :] u, double[:, :, :] acc,
                   double h, int g, int n0, int n1, int n2) noexcept nogil:
    """acc -= d/d(axis0) of the limited mass flux; acc is the interior view
    in the same permutation. The flux at both faces of a cell is recomputed
    so the loops can run in memory order."""
    cdef int i, j, k
    cdef double lo, hi2
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                lo = _muscl_flux(rho[g + i - 2, j + g, k + g], rho[g + i - 1, j + g, k + g],
                                 rho[g + i, j + g, k + g], rho[g + i + 1, j + g, k + g],
                                 u[g + i, j + g, k + g])
                hi2 = _muscl_flux(rho[g + i - 1, j + g, k + g], rho[g + i, j + g, k + g],
                                  rho[g + i + 1, j + g, k + g], rho[g + i + 2, j + g, k + g],
                                  u[g + i + 1, j + g, k + g])
                acc[i, j, k] -= (hi2 - lo) / h


cdef void _mass_w2(double[:, :, :] rho, double[:, :, :] u, double[:, :, :] acc,
                   double h, int g, int n0, int n1, int n2) noexcept nogil:
    """Same as _mass_w0 with the working axis on (contiguous) axis 2;
    the sliding flux is carried along the pencil."""
    cdef int i, j, k
    cdef double prev, cur
    for i in range(n0):
        for j in range(n1):
            prev = _muscl_flux(rho[i + g, j + g, g - 2], rho[i + g, j + g, g - 1],
                               rho[i + g, j + g, g], rho[i + g, j + g, g + 1],
                               u[i + g, j + g, g])
            for k in range(n2):
                cur = _muscl_flux(rho[i + g, j + g, g + k - 1], rho[i + g, j + g, g + k],
                                  rho[i + g, j + g, g + k + 1], rho[i + g, j + g, g + k + 2],
                                  u[i + g, j + g, g + k + 1])
                acc[i, j, k] -= (cur - prev) / h
                prev = cur


def mass_flux_divergence(double[:, :, ::1] rho, double[:, :, ::1] ux,
                         double[:, :, ::1] uy, double[:, :, ::1] uz,
                         double hx, double hy, double hz, int g):
    cdef int nx = rho.shape[0] - 2 * g
    cdef int ny = rho.shape[1] - 2 * g
    cdef int nz = rho.shape[2] - 2 * g
    out_arr = np.zeros((nx + 2 * g, ny + 2 * g, nz + 2 * g))
    acc_arr = out_arr[g:g + nx, g:g + ny, g:g + nz]
    rho_arr = np.asarray(rho)
    cdef double[:, :, :] r
    cdef double[:, :, :] v
    cdef double[:, :, :] a
    r = rho
    v = ux
    a = acc_arr
    with nogil:
        _mass_w0(r, v, a, hx, g, nx, ny, nz)
    r = rho_arr.transpose(1, 0, 2)
    v = np.asarray(uy).transpose(1, 0, 2)
    a = acc_arr.transpose(1, 0, 2)
    with nogil:
        _mass_w0(r, v, a, hy, g, ny, nx, nz)
    r = rho
    v = uz
    a = acc_arr
    with nogil:
        _mass_w2(r, v, a, hz, g, nx, ny, nz)
    return out_arr


cdef void _own_w0(double[:, :, :] m, double[:, :, :] u, double[:, :, :] out,
                  double h, int g, int n0, int n1, int n2) noexcept nogil:
    """Own-axis advective tendency on the n0-1 non-wall faces along axis 0.

    m and u are face arrays of the same component (n0+1 faces on axis 0,
    cells elsewhere); fluxes sit at the n0 cell centers.
    """
    cdef int f, j, k
    cdef double lo, hi2, ub
    for f in range(g + 1, g + n0):
        for j in range(g, g + n1):
            for k in range(g, g + n2):
                ub = 0.5 * (u[f - 1, j, k] + u[f, j, k])
                lo = _muscl_flux(m[f - 2, j, k], m[f - 1, j, k], m[f, j, k],
                                 m[f + 1, j, k], ub)
                ub = 0.5 * (u[f, j, k] + u[f + 1, j, k])
                hi2 = _muscl_flux(m[f - 1, j, k], m[f, j, k], m[f + 1, j, k],
                                  m[f + 2, j, k], ub)
                out[f, j, k] -= (hi2 - lo) / h


cdef void _own_w2(double[:, :, :] m, double[:, :, :] u, double[:, :, :] out,
                  double h, int g, int n0, int n1, int n2) noexcept nogil:
    cdef int i, j, f
    cdef double prev, cur, ub
    for i in range(g, g + n1):
        for j in range(g, g + n2):
            ub = 0.5 * (u[i, j, g] + u[i, j, g + 1])
            prev = _muscl_flux(m[i, j, g - 1], m[i, j, g], m[i, j, g + 1],
                               m[i, j, g + 2], ub)
            for f in range(g + 1, g + n0):
                ub = 0.5 * (u[i, j, f] + u[i, j, f + 1])
                cur = _muscl_flux(m[i, j, f - 1], m[i, j, f], m[i, j, f + 1],
                                  m[i, j, f + 2], ub)
                out[i, j, f] -= (cur - prev) / h
                prev = cur


cdef void _cross_w0(double[:, :, :] m, double[:, :, :] v, double[:, :, :] out,
                    double h, int g, int ne, int nd, int nt) noexcept nogil:
    """Transverse tendency with the advecting axis e on axis 0.

    View roles: axis 0 = e (m: cells, v: faces), axis 1 = d (m, out: faces;
    v: cells), axis 2 = the remaining axis (cells). Fluxes sit on the e-nodes;
    the two-face average of v is identically zero on the d-walls, which keeps
    wall-normal momentum flux exact zero (walls are re-zeroed by the caller).
    """
    cdef int j, f, t
    cdef double lo, hi2, vb
    for j in range(g, g + ne):
        for f in range(g, g + nd + 1):
            for t in range(g, g + nt):
                vb = 0.5 * (v[j, f - 1, t] + v[j, f, t])
                lo = _muscl_flux(m[j - 2, f, t], m[j - 1, f, t], m[j, f, t],
                                 m[j + 1, f, t], vb)
                vb = 0.5 * (v[j + 1, f - 1, t] + v[j + 1, f, t])
                hi2 = _muscl_flux(m[j - 1, f, t], m[j, f, t], m[j + 1, f, t],
                                  m[j + 2, f, t], vb)
                out[j, f, t] -= (hi2 - lo) / h


cdef void _cross_w2(double[:, :, :] m, double[:, :, :] v, double[:, :, :] out,
                    double h, int g, int nd, int nt, int ne) noexcept nogil:
    """Transverse tendency with the advecting axis e on axis 2.

    View roles: axis 0 = d (m, out: faces; v: cells), axis 1 = the remaining
    axis (cells), axis 2 = e (m: cells, v: faces).
    """
    cdef int f, t, j
    cdef double prev, cur, vb
    for f in range(g, g + nd + 1):
        for t in range(g, g + nt):
            vb = 0.5 * (v[f - 1, t, g] + v[f, t, g])
            prev = _muscl_flux(m[f, t, g - 2], m[f, t, g - 1], m[f, t, g],
                               m[f, t, g + 1], vb)
            for j in range(g, g + ne):
                vb = 0.5 * (v[f - 1, t, j + 1] + v[f, t, j + 1])
                cur = _muscl_flux(m[f, t, j - 1], m[f, t, j], m[f, t, j + 1],
                                  m[f, t, j + 2], vb)
                out[f, t, j] -= (cur - prev) / h
                prev = cur


def momentum_advection(double[:, :, ::1] mx, double[:, :, ::1] my, double[:, :, ::1] mz,
                       double[:, :, ::1] ux, double[:, :, ::1] uy, double[:, :, ::1] uz,
                       double hx, double hy, double hz, int g):
    cdef int nx = mx.shape[0] - 1 - 2 * g
    cdef int ny = my.shape[1] - 1 - 2 * g
    cdef int nz = mz.shape[2] - 1 - 2 * g
    cdef int n[3]
    n[0] = nx
    n[1] = ny
    n[2] = nz
    h = (hx, hy, hz)
    mom = (np.asarray(mx), np.asarray(my), np.asarray(mz))
    vel = (np.asarray(ux), np.asarray(uy), np.asarray(uz))
    outs = []
    cdef double[:, :, :] mv
    cdef double[:, :, :] vv
    cdef double[:, :, :] ov
    cdef int d, e, third
    cdef double hd
    cdef int na, nb, nc
    for d in range(3):
        out_arr = np.zeros_like(mom[d])
        # own-axis sweep: axis 0 for x/y, in-pencil for z
        if d < 2:
            perm = [d] + [a for a in range(3) if a != d]
            mv = mom[d].transpose(perm)
            vv = vel[d].transpose(perm)
            ov = out_arr.transpose(perm)
            na = n[d]
            nb = n[perm[1]]
            nc = n[perm[2]]
            hd = h[d]
            with nogil:
                _own_w0(mv, vv, ov, hd, g, na, nb, nc)
        else:
            mv = mom[2]
            vv = vel[2]
            ov = out_arr
            na = nz
            nb = nx
            nc = ny
            hd = hz
            with nogil:
                _own_w2(mv, vv, ov, hd, g, na, nb, nc)
        for e in range(3):
            if e == d:
                continue
            third = 3 - d - e
            hd = h[e]
            if e == 2:
                perm = [d, third, 2]
            else:
                perm = [e, d, third]
            mv = mom[d].transpose(perm)
            vv = vel[e].transpose(perm)
            ov = out_arr.transpose(perm)
            if e == 2:
                na = n[d]
                nb = n[third]
                nc = n[e]
                with nogil:
                    _cross_w2(mv, vv, ov, hd, g, na, nb, nc)
            else:
                na = n[e]
                nb = n[d]
                nc = n[third]
                with nogil:
                    _cross_w0(mv, vv, ov, hd, g, na, nb, nc)
        wall = [slice(None)] * 3
        wall[d] = g
        out_arr[tuple(wall)] = 0.0
        wall[d] = out_arr.shape[d] - 1 - g
        out_arr[tuple(wall)] = 0.0
        outs.append(out_arr)
    return tuple(outs)


def velocity_faces(double[:, :, ::1] rho, double[:, :, ::1] mx,
                   double[:, :, ::1] my, double[:, :, ::1] mz, double eps, int g):
    """u = m / max(face-average rho, eps) on interior faces, ghosts zero."""
    cdef int nx = rho.shape[0] - 2 * g
    cdef int ny = rho.shape[1] - 2 * g
    cdef int nz = rho.shape[2] - 2 * g
    ux_arr = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 2 * g))
    uy_arr = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    uz_arr = np.zeros((nx + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    cdef double[:, :, ::1] ux = ux_arr
    cdef double[:, :, ::1] uy = uy_arr
    cdef double[:, :, ::1] uz = uz_arr
    cdef int i, j, k
    cdef double rf
    with nogil:
        for i in range(g, g + nx + 1):
            for j in range(g, g + ny):
                for k in range(g, g + nz):
                    rf = 0.5 * (rho[i - 1, j, k] + rho[i, j, k])
                    if rf < eps:
                        rf = eps
                    ux[i, j, k] = mx[i, j, k] / rf
        for i in range(g, g + nx):
            for j in range(g, g + ny + 1):
                for k in range(g, g + nz):
                    rf = 0.5 * (rho[i, j - 1, k] + rho[i, j, k])
                    if rf < eps:
                        rf = eps
                    uy[i, j, k] = my[i, j, k] / rf
        for i in range(g, g + nx):
            for j in range(g, g + ny):
                for k in range(g, g + nz + 1):
                    rf = 0.5 * (rho[i, j, k - 1] + rho[i, j, k])
                    if rf < eps:
                        rf = eps
                    uz[i, j, k] = mz[i, j, k] / rf
    return ux_arr, uy_arr, uz_arr

