"""Pure-numpy stencil kernels on padded staggered arrays.

Every function here takes raw ghost-filled arrays plus the spacing
(hx, hy, hz) and ghost width g, and returns newly allocated padded
arrays whose ghost entries are zero. Index convention: cells occupy
[g, g+n), faces [g, g+n] with walls at g and g+n.

These are the hot loops; a compiled twin with identical semantics
lives in _stencils.pyx and is preferred at import time.
"""

import numpy as np


def _cells(arr_shape, g):
    return tuple(s - 2 * g for s in arr_shape)


def divergence(ux, uy, uz, hx, hy, hz, g):
    """Cell-centered divergence from face differences."""
    nx = ux.shape[0] - 1 - 2 * g
    ny = ux.shape[1] - 2 * g
    nz = ux.shape[2] - 2 * g
    out = np.zeros((nx + 2 * g, ny + 2 * g, nz + 2 * g))
    cy = slice(g, g + ny)
    cz = slice(g, g + nz)
    cx = slice(g, g + nx)
    d = (ux[g + 1:g + nx + 1, cy, cz] - ux[g:g + nx, cy, cz]) / hx
    d += (uy[cx, g + 1:g + ny + 1, cz] - uy[cx, g:g + ny, cz]) / hy
    d += (uz[cx, cy, g + 1:g + nz + 1] - uz[cx, cy, g:g + nz]) / hz
    out[cx, cy, cz] = d
    return out


def gradient(p, hx, hy, hz, g):
    """Face-centered gradient of a cell-centered scalar (walls included)."""
    nx, ny, nz = _cells(p.shape, g)
    gx = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 2 * g))
    gy = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    gz = np.zeros((nx + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    cx = slice(g, g + nx)
    cy = slice(g, g + ny)
    cz = slice(g, g + nz)
    gx[g:g + nx + 1, cy, cz] = (p[g:g + nx + 1, cy, cz] - p[g - 1:g + nx, cy, cz]) / hx
    gy[cx, g:g + ny + 1, cz] = (p[cx, g:g + ny + 1, cz] - p[cx, g - 1:g + ny, cz]) / hy
    gz[cx, cy, g:g + nz + 1] = (p[cx, cy, g:g + nz + 1] - p[cx, cy, g - 1:g + nz]) / hz
    return gx, gy, gz


def curl_face_to_edge(ux, uy, uz, hx, hy, hz, g):
    """Edge-centered curl of a face-centered vector field."""
    nx = ux.shape[0] - 1 - 2 * g
    ny = ux.shape[1] - 2 * g
    nz = ux.shape[2] - 2 * g
    wx = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 1 + 2 * g))
    wy = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    wz = np.zeros((nx + 1 + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    cx = slice(g, g + nx)
    cy = slice(g, g + ny)
    cz = slice(g, g + nz)
    fx = slice(g, g + nx + 1)
    fy = slice(g, g + ny + 1)
    fz = slice(g, g + nz + 1)
    wx[cx, fy, fz] = (
        (uz[cx, g:g + ny + 1, fz] - uz[cx, g - 1:g + ny, fz]) / hy
        - (uy[cx, fy, g:g + nz + 1] - uy[cx, fy, g - 1:g + nz]) / hz
    )
    wy[fx, cy, fz] = (
        (ux[fx, cy, g:g + nz + 1] - ux[fx, cy, g - 1:g + nz]) / hz
        - (uz[g:g + nx + 1, cy, fz] - uz[g - 1:g + nx, cy, fz]) / hx
    )
    wz[fx, fy, cz] = (
        (uy[g:g + nx + 1, fy, cz] - uy[g - 1:g + nx, fy, cz]) / hx
        - (ux[fx, g:g + ny + 1, cz] - ux[fx, g - 1:g + ny, cz]) / hy
    )
    return wx, wy, wz


def curl_edge_to_face(wx, wy, wz, hx, hy, hz, g):
    """Face-centered curl of an edge-centered vector field."""
    nx = wx.shape[0] - 2 * g
    ny = wx.shape[1] - 1 - 2 * g
    nz = wx.shape[2] - 1 - 2 * g
    cx2 = np.zeros((nx + 1 + 2 * g, ny + 2 * g, nz + 2 * g))
    cy2 = np.zeros((nx + 2 * g, ny + 1 + 2 * g, nz + 2 * g))
    cz2 = np.zeros((nx + 2 * g, ny + 2 * g, nz + 1 + 2 * g))
    cx = slice(g, g + nx)
    cy = slice(g, g + ny)
    cz = slice(g, g + nz)
    fx = slice(g, g + nx + 1)
    fy = slice(g, g + ny + 1)
    fz = slice(g, g + nz + 1)
    cx2[fx, cy, cz] = (
        (wz[fx, g + 1:g + ny + 1, cz] - wz[fx, g:g + ny, cz]) / hy
        - (wy[fx, cy, g + 1:g + nz + 1] - wy[fx, cy, g:g + nz]) / hz
    )
    cy2[cx, fy, cz] = (
        (wx[cx, fy, g + 1:g + nz + 1] - wx[cx, fy, g:g + nz]) / hz
        - (wz[g + 1:g + nx + 1, fy, cz] - wz[g:g + nx, fy, cz]) / hx
    )
    cz2[cx, cy, fz] = (
        (wy[g + 1:g + nx + 1, cy, fz] - wy[g:g + nx, cy, fz]) / hx
        - (wx[cx, g + 1:g + ny + 1, fz] - wx[cx, g:g + ny, fz]) / hy
    )
    return cx2, cy2, cz2


def _minmod(a, b):
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def _axslice(axis, s, others):
    out = list(others)
    out[axis] = s
    return tuple(out)


def mass_flux_divergence(rho, ux, uy, uz, hx, hy, hz, g):
    """Conservative advective tendency -div(rho u) with minmod reconstruction.

    Wall-normal fluxes are exactly zero (wall-face velocities are zero),
    so the interior sum of the output telescopes to zero.
    """
    nx, ny, nz = _cells(rho.shape, g)
    n = (nx, ny, nz)
    h = (hx, hy, hz)
    out = np.zeros_like(rho)
    cells = (slice(g, g + nx), slice(g, g + ny), slice(g, g + nz))
    acc = np.zeros((nx, ny, nz))
    for axis, u in enumerate((ux, uy, uz)):
        na = n[axis]
        rm2 = rho[_axslice(axis, slice(g - 2, g + na - 1), cells)]
        rm1 = rho[_axslice(axis, slice(g - 1, g + na), cells)]
        r0 = rho[_axslice(axis, slice(g, g + na + 1), cells)]
        rp1 = rho[_axslice(axis, slice(g + 1, g + na + 2), cells)]
        rl = rm1 + 0.5 * _minmod(r0 - rm1, rm1 - rm2)
        rr = r0 - 0.5 * _minmod(rp1 - r0, r0 - rm1)
        uf = u[_axslice(axis, slice(g, g + na + 1), cells)]
        flux = uf * (0.5 * (rl + rr)) - 0.5 * np.abs(uf) * (rr - rl)
        hi = [slice(None)] * 3
        lo = [slice(None)] * 3
        hi[axis] = slice(1, None)
        lo[axis] = slice(0, -1)
        acc -= (flux[tuple(hi)] - flux[tuple(lo)]) / h[axis]
    out[cells] = acc
    return out


def velocity_faces(rho, mx, my, mz, eps, g):
    """u = m / max(face-average rho, eps) on interior faces, ghosts zero."""
    nx, ny, nz = _cells(rho.shape, g)
    n = (nx, ny, nz)
    mom = (mx, my, mz)
    outs = []
    cells = (slice(g, g + nx), slice(g, g + ny), slice(g, g + nz))
    for axis in range(3):
        na = n[axis]
        out = np.zeros_like(mom[axis])
        lo = _axslice(axis, slice(g - 1, g + na), cells)
        hi = _axslice(axis, slice(g, g + na + 1), cells)
        rf = 0.5 * (rho[lo] + rho[hi])
        faces = _axslice(axis, slice(g, g + na + 1), cells)
        out[faces] = mom[axis][faces] / np.maximum(rf, eps)
        outs.append(out)
    return tuple(outs)


def momentum_advection(mx, my, mz, ux, uy, uz, hx, hy, hz, g):
    """Conservative advective tendency -div(m u) for face-centered momentum.

    Own-axis fluxes live at cell centers; transverse fluxes live on edges
    where the advecting velocity is the two-face average, which vanishes
    identically on wall edges. Output wall faces are exactly zero.
    """
    h = (hx, hy, hz)
    n = (
        mx.shape[0] - 1 - 2 * g,
        my.shape[1] - 1 - 2 * g,
        mz.shape[2] - 1 - 2 * g,
    )
    mom = (mx, my, mz)
    vel = (ux, uy, uz)
    outs = []
    for d in range(3):
        m = mom[d]
        u = vel[d]
        nd = n[d]
        out = np.zeros_like(m)
        # extents of m's own interior window on the non-d axes
        others = [slice(g, g + n[a]) for a in range(3)]
        others[d] = slice(None)  # placeholder, replaced per use

        # own-axis fluxes at the nd cell centers between m faces
        c0 = _axslice(d, slice(g, g + nd), others)
        c1 = _axslice(d, slice(g + 1, g + nd + 1), others)
        cm1 = _axslice(d, slice(g - 1, g + nd - 1), others)
        c2 = _axslice(d, slice(g + 2, g + nd + 2), others)
        ubar = 0.5 * (u[c0] + u[c1])
        ml = m[c0] + 0.5 * _minmod(m[c1] - m[c0], m[c0] - m[cm1])
        mr = m[c1] - 0.5 * _minmod(m[c2] - m[c1], m[c1] - m[c0])
        flux = ubar * (0.5 * (ml + mr)) - 0.5 * np.abs(ubar) * (mr - ml)
        hi = [slice(None)] * 3
        lo = [slice(None)] * 3
        hi[d] = slice(1, None)
        lo[d] = slice(0, -1)
        body = _axslice(d, slice(g + 1, g + nd), others)
        out[body] -= (flux[tuple(hi)] - flux[tuple(lo)]) / h[d]

        for e in range(3):
            if e == d:
                continue
            ne = n[e]
            v = vel[e]
            # windows: d runs over m's interior faces, e over nodes/cells
            base = [slice(g, g + n[a]) for a in range(3)]
            base[d] = slice(g, g + nd + 1)

            # advecting velocity: average the two e-faces straddling the
            # edge along d; v is cell-centered along d
            v_base = list(base)
            v_base[d] = slice(g, g + nd + 1)
            v_lo = _axslice(d, slice(g - 1, g + nd), _axslice(e, slice(g, g + ne + 1), v_base))
            v_hi = _axslice(d, slice(g, g + nd + 1), _axslice(e, slice(g, g + ne + 1), v_base))
            vbar = 0.5 * (v[v_lo] + v[v_hi])

            jm2 = _axslice(e, slice(g - 2, g + ne - 1), base)
            jm1 = _axslice(e, slice(g - 1, g + ne), base)
            j0 = _axslice(e, slice(g, g + ne + 1), base)
            jp1 = _axslice(e, slice(g + 1, g + ne + 2), base)
            ml = m[jm1] + 0.5 * _minmod(m[j0] - m[jm1], m[jm1] - m[jm2])
            mr = m[j0] - 0.5 * _minmod(m[jp1] - m[j0], m[j0] - m[jm1])
            flux = vbar * (0.5 * (ml + mr)) - 0.5 * np.abs(vbar) * (mr - ml)
            hi = [slice(None)] * 3
            lo = [slice(None)] * 3
            hi[e] = slice(1, None)
            lo[e] = slice(0, -1)
            body = _axslice(d, slice(g, g + nd + 1), [slice(g, g + n[a]) for a in range(3)])
            out[body] -= (flux[tuple(hi)] - flux[tuple(lo)]) / h[e]

        # walls carry zero normal momentum for all time
        wall_lo = _axslice(d, g, [slice(None)] * 3)
        wall_hi = _axslice(d, g + nd, [slice(None)] * 3)
        out[wall_lo] = 0.0
        out[wall_hi] = 0.0
        outs.append(out)
    return tuple(outs)
