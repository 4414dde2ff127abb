"""Discrete differential operators on the staggered grid.

All operators require ghost-filled inputs (ContractViolation otherwise)
and return fields whose ghost entries are zero unless noted. Divergence
and gradient are exact adjoints under the uniform-weight inner products
when the wall-normal velocity vanishes, and the two curls are mutually
adjoint, which makes the discrete energy balance exact in space.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, ContractViolation
from .grid import (
    EDGE,
    FACE,
    EosParams,
    FlowState,
    ScalarField,
    VectorField,
    fill_scalar_field,
    fill_vector_field,
)


@dataclass
class StencilReport:
    """Observed convergence of one operator against an analytic oracle."""

    operator: str
    observed_order: float
    residual_norm: float


def _require_filled(field, name):
    if not field.ghosts_filled:
        raise ContractViolation(f"{name} requires a ghost-filled input")


def default_eps_floor(eos: EosParams) -> float:
    """Density floor used only when dividing momentum by density."""
    return 1e-10 * eos.rho_bar


def divergence(u: VectorField) -> ScalarField:
    """Cell-centered divergence of a face-centered field."""
    _require_filled(u, "divergence")
    if u.staggering != FACE:
        raise ContractViolation("divergence expects a face-centered field")
    grid = u.grid
    vals = _kernels.divergence(u.x, u.y, u.z, *grid.spacing, grid.ghost)
    return ScalarField(grid, vals)


def gradient(p: ScalarField) -> VectorField:
    """Face-centered gradient of a cell-centered scalar."""
    _require_filled(p, "gradient")
    grid = p.grid
    gx, gy, gz = _kernels.gradient(p.values, *grid.spacing, grid.ghost)
    return VectorField(grid, gx, gy, gz, FACE)


def curl(u: VectorField) -> VectorField:
    """Discrete curl: face-centered input -> edge-centered output and
    vice versa. The two directions are adjoint to each other."""
    _require_filled(u, "curl")
    grid = u.grid
    if u.staggering == FACE:
        wx, wy, wz = _kernels.curl_face_to_edge(u.x, u.y, u.z, *grid.spacing, grid.ghost)
        out = VectorField(grid, wx, wy, wz, EDGE)
        # every interior edge value is defined, so mark usable downstream
        out.ghosts_filled = True
        return out
    cx, cy, cz = _kernels.curl_edge_to_face(u.x, u.y, u.z, *grid.spacing, grid.ghost)
    return VectorField(grid, cx, cy, cz, FACE)


def laplacian_vector(u: VectorField, mu: float, lam: float) -> VectorField:
    """Viscous operator mu*Lap(u) + (mu+lam)*grad(div u), assembled in the
    div/curl split form (2mu+lam)*grad(div u) - mu*curl(curl u)."""
    _require_filled(u, "laplacian_vector")
    d = divergence(u)
    fill_scalar_field(d)
    gd = gradient(d)
    cc = curl(curl(u))
    bulk = 2.0 * mu + lam
    out = VectorField(u.grid, np.empty_like(gd.x), np.empty_like(gd.y), np.empty_like(gd.z), FACE)
    for w, a, b in zip(out.components, gd.components, cc.components):
        np.multiply(a, bulk, out=w)
        w -= mu * b
    return out


def advect_scalar(rho: ScalarField, u: VectorField) -> ScalarField:
    """Conservative advective tendency -div(rho u), minmod-limited.

    The interior integral of the result is zero up to roundoff: interior
    fluxes telescope and wall-normal fluxes vanish exactly.
    """
    _require_filled(rho, "advect_scalar")
    _require_filled(u, "advect_scalar")
    grid = rho.grid
    vals = _kernels.mass_flux_divergence(rho.values, u.x, u.y, u.z, *grid.spacing, grid.ghost)
    return ScalarField(grid, vals)


def face_densities(rho: ScalarField):
    """Two-cell average of density on the interior faces of each axis."""
    _require_filled(rho, "face_densities")
    grid = rho.grid
    g = grid.ghost
    out = []
    for axis in range(3):
        lo = [slice(g, g + n) for n in grid.shape]
        hi = [slice(g, g + n) for n in grid.shape]
        n = grid.shape[axis]
        lo[axis] = slice(g - 1, g + n)
        hi[axis] = slice(g, g + n + 1)
        out.append(0.5 * (rho.values[tuple(lo)] + rho.values[tuple(hi)]))
    return out


def velocity_from_momentum(rho: ScalarField, mom: VectorField, eps_floor: float) -> VectorField:
    """u = m / max(rho_face, eps_floor); momentum itself is never floored."""
    _require_filled(rho, "velocity_from_momentum")
    _require_filled(mom, "velocity_from_momentum")
    ux, uy, uz = _kernels.velocity_faces(
        rho.values, mom.x, mom.y, mom.z, eps_floor, rho.grid.ghost
    )
    return fill_vector_field(VectorField(rho.grid, ux, uy, uz, FACE))


def _advective_term(u: VectorField) -> VectorField:
    """Centered (u . grad)u on interior faces (diagnostic accuracy only)."""
    grid = u.grid
    g = grid.ghost
    h = grid.spacing
    n = grid.shape
    out = VectorField.zeros(grid, FACE)
    for d in range(3):
        ud = u.components[d]
        nd = n[d]
        base = [slice(g, g + n[a]) for a in range(3)]
        base[d] = slice(g, g + nd + 1)
        base = tuple(base)

        def shifted(axis, off):
            s = list(base)
            lo = s[axis].start + off
            hi = s[axis].stop + off
            s[axis] = slice(lo, hi)
            return tuple(s)

        acc = ud[base] * (ud[shifted(d, 1)] - ud[shifted(d, -1)]) / (2.0 * h[d])
        for e in range(3):
            if e == d:
                continue
            ue = u.components[e]
            # average the four e-faces around each d-face
            s_cell = [slice(g, g + n[a]) for a in range(3)]
            s_cell[d] = slice(g, g + nd + 1)
            dl = list(s_cell)
            dl[d] = slice(g - 1, g + nd)
            ue_bar = np.zeros_like(acc)
            for d_s in (tuple(dl), tuple(s_cell)):
                for eoff in (0, 1):
                    s = list(d_s)
                    s[e] = slice(g + eoff, g + n[e] + eoff)
                    ue_bar += ue[tuple(s)]
            ue_bar *= 0.25
            acc += ue_bar * (ud[shifted(e, 1)] - ud[shifted(e, -1)]) / (2.0 * h[e])
        out.components[d][base] = acc
    return out


def material_acceleration(prev: FlowState, curr: FlowState, dt: float, eps_floor: float):
    """Backward-difference material derivative u_t + (u . grad)u.

    Returns (udot, mask_fraction): faces whose two-cell density average is
    at or below eps_floor are masked to zero (velocity is meaningless in
    vacuum; only sqrt(rho)*udot is ever consumed there). mask_fraction is
    the masked share of interior faces.
    """
    if dt <= 0:
        raise ConfigurationError("material_acceleration needs dt > 0")
    prev.require_filled("material_acceleration")
    curr.require_filled("material_acceleration")
    u_prev = velocity_from_momentum(prev.rho, prev.mom, eps_floor)
    u_curr = velocity_from_momentum(curr.rho, curr.mom, eps_floor)
    adv = _advective_term(u_curr)
    out = VectorField.zeros(curr.grid, FACE)
    masked = 0
    total = 0
    for axis, rho_f in enumerate(face_densities(curr.rho)):
        du = (
            u_curr.component_interior(axis) - u_prev.component_interior(axis)
        ) / dt + adv.component_interior(axis)
        mask = rho_f <= eps_floor
        du[mask] = 0.0
        masked += int(mask.sum())
        total += mask.size
        out.component_interior(axis)[...] = du
    return out, masked / total


def effective_viscous_flux(state: FlowState, eos: EosParams, eps_floor=None) -> ScalarField:
    """F = (2mu+lam) div u - (P - Pbar) with Pbar the current mean pressure,
    so the interior integral of F vanishes to roundoff."""
    state.require_filled("effective_viscous_flux")
    if eps_floor is None:
        eps_floor = default_eps_floor(eos)
    u = velocity_from_momentum(state.rho, state.mom, eps_floor)
    d = divergence(u)
    p = eos.pressure(np.maximum(state.rho.interior, 0.0))
    p_bar = float(np.mean(p))
    out = ScalarField.zeros(state.grid)
    out.interior[...] = eos.bulk * d.interior - (p - p_bar)
    return out


def _stencil_cases(grid):
    """Analytic trig fields and the exact images of each operator on them."""
    import math

    k = math.pi
    cc = [grid.cell_coords(a) for a in range(3)]
    fc = [grid.face_coords(a) for a in range(3)]

    def outer(fx, fy, fz, xs, ys, zs):
        return fx(xs)[:, None, None] * fy(ys)[None, :, None] * fz(zs)[None, None, :]

    sin = lambda v: np.sin(k * v)
    cos = lambda v: np.cos(k * v)

    u = VectorField.zeros(grid, FACE)
    u.component_interior(0)[...] = outer(sin, cos, cos, fc[0], cc[1], cc[2])
    u.component_interior(1)[...] = outer(cos, sin, cos, cc[0], fc[1], cc[2])
    u.component_interior(2)[...] = outer(cos, cos, sin, cc[0], cc[1], fc[2])
    from .grid import fill_vector_field

    fill_vector_field(u)
    div_exact = 3.0 * k * outer(cos, cos, cos, cc[0], cc[1], cc[2])

    p = ScalarField.zeros(grid)
    p.interior[...] = outer(cos, cos, cos, cc[0], cc[1], cc[2])
    from .grid import fill_scalar_field as _fsf

    _fsf(p)
    grad_exact = [
        -k * outer(sin, cos, cos, fc[0], cc[1], cc[2]),
        -k * outer(cos, sin, cos, cc[0], fc[1], cc[2]),
        -k * outer(cos, cos, sin, cc[0], cc[1], fc[2]),
    ]

    # rotational slip field: w = curl of (0, 0, psi) with psi = cos cos cos
    v = VectorField.zeros(grid, FACE)
    v.component_interior(0)[...] = outer(sin, cos, cos, fc[0], cc[1], cc[2])
    v.component_interior(1)[...] = -outer(cos, sin, cos, cc[0], fc[1], cc[2])
    fill_vector_field(v)
    ex = [grid.face_coords(a) for a in range(3)]
    curl_exact = [
        -k * outer(cos, sin, sin, cc[0], ex[1], ex[2]),
        -k * outer(sin, cos, sin, ex[0], cc[1], ex[2]),
        2.0 * k * outer(sin, sin, cos, ex[0], ex[1], cc[2]),
    ]
    lap_exact = [
        -3.0 * k * k * outer(sin, cos, cos, fc[0], cc[1], cc[2]),
        -3.0 * k * k * outer(cos, sin, cos, cc[0], fc[1], cc[2]),
        -3.0 * k * k * outer(cos, cos, sin, cc[0], cc[1], fc[2]),
    ]
    return u, div_exact, p, grad_exact, v, curl_exact, lap_exact


def _rel_l2(err_arrays, ref_arrays):
    num = sum(float(np.sum(np.square(e))) for e in err_arrays)
    den = sum(float(np.sum(np.square(r))) for r in ref_arrays)
    return np.sqrt(num / den) if den > 0 else np.sqrt(num)


def _stencil_residuals(grid):
    u, div_exact, p, grad_exact, v, curl_exact, lap_exact = _stencil_cases(grid)
    res = {}
    d = divergence(u)
    res["divergence"] = _rel_l2([d.interior - div_exact], [div_exact])
    gp = gradient(p)
    res["gradient"] = _rel_l2(
        [gp.component_interior(a) - grad_exact[a] for a in range(3)], grad_exact
    )
    w = curl(v)
    res["curl"] = _rel_l2(
        [w.component_interior(a) - curl_exact[a] for a in range(3)], curl_exact
    )
    lap = laplacian_vector(u, 1.0, -1.0)  # mu=1, lam=-1: plain vector Laplacian
    res["laplacian"] = _rel_l2(
        [lap.component_interior(a) - lap_exact[a] for a in range(3)], lap_exact
    )
    return res


def measure_stencil_orders(resolutions=(16, 32, 64), extents=(1.0, 1.0, 1.0)):
    """Observed convergence order of each operator on analytic trig fields.

    Returns a list of StencilReport, one per operator, with the order
    measured from the finest grid pair and the residual on the finest.
    """
    from .grid import build_grid

    if len(resolutions) < 2:
        raise ConfigurationError("need at least two resolutions")
    per_res = []
    for n in resolutions:
        grid = build_grid(extents, (n, n, n))
        per_res.append(_stencil_residuals(grid))
    reports = []
    for op in per_res[0]:
        r_coarse = per_res[-2][op]
        r_fine = per_res[-1][op]
        ratio = resolutions[-1] / resolutions[-2]
        order = np.log(r_coarse / r_fine) / np.log(ratio)
        reports.append(StencilReport(op, float(order), float(r_fine)))
    return reports


def momentum_residual(state: FlowState, udot: VectorField, eos: EosParams, eps_floor=None):
    """Normalized L2 residual of rho*udot = grad F - mu curl curl u."""
    state.require_filled("momentum_residual")
    if eps_floor is None:
        eps_floor = default_eps_floor(eos)
    F = effective_viscous_flux(state, eos, eps_floor)
    fill_scalar_field(F)
    gF = gradient(F)
    u = velocity_from_momentum(state.rho, state.mom, eps_floor)
    cc = curl(curl(u))
    num = 0.0
    den_a = 0.0
    den_b = 0.0
    for axis, rho_f in enumerate(face_densities(state.rho)):
        a = rho_f * udot.component_interior(axis)
        b = gF.component_interior(axis)
        r = a - b + eos.mu * cc.component_interior(axis)
        num += float(np.sum(r * r))
        den_a += float(np.sum(a * a))
        den_b += float(np.sum(b * b))
    den = np.sqrt(den_a) + np.sqrt(den_b)
    if den <= 0.0:
        return 0.0
    return float(np.sqrt(num) / den)
