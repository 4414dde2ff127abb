"""Iterative elliptic solvers used by the diagnostics.

Two pieces: a plain preconditioned conjugate-gradient core, and a Stokes
saddle-point solve that produces a right inverse of the divergence with
homogeneous Dirichlet velocity (div B = f, B = 0 on all walls). The inner
vector-Laplacian inverse is applied exactly through fast sine transforms,
so the outer CG iterates directly on the Schur complement and its residual
is the quantity we actually care about, ||div B - f||.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dst, idst

from . import _kernels
from .errors import CompatibilityError, ConfigurationError
from .grid import (
    FACE,
    EosParams,
    FlowState,
    ScalarField,
    VectorField,
    fill_scalar_field,
)

DEFAULT_TOL = 1e-8


@dataclass
class SolveStats:
    iterations: int
    final_residual: float
    converged: bool


def conjugate_gradient(apply_op, b, tol=DEFAULT_TOL, max_iter=500, precond=None, x0=None):
    """CG for an SPD operator given as a callable on ndarrays.

    Stops when ||b - A x||_2 <= tol * ||b||_2 (absolute tol if b = 0).
    Returns (x, SolveStats, residual_history) with the history in the
    preconditioned norm sqrt(<r, M^-1 r>).
    """
    if max_iter < 0:
        raise ConfigurationError("max_iter must be nonnegative")
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - apply_op(x) if x0 is not None else b.copy()
    norm_b = float(np.linalg.norm(b.ravel()))
    target = tol * norm_b if norm_b > 0 else tol
    z = precond(r) if precond is not None else r
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    history = [np.sqrt(max(rz, 0.0))]
    res = float(np.linalg.norm(r.ravel()))
    it = 0
    while res > target and it < max_iter:
        ap = apply_op(p)
        pap = float(np.vdot(p, ap).real)
        if pap <= 0.0:
            # operator not SPD on this vector; bail with what we have
            break
        alpha = rz / pap
        x = x + alpha * p
        r = r - alpha * ap
        z = precond(r) if precond is not None else r
        rz_new = float(np.vdot(r, z).real)
        history.append(np.sqrt(max(rz_new, 0.0)))
        p = z + (rz_new / rz) * p
        rz = rz_new
        res = float(np.linalg.norm(r.ravel()))
        it += 1
    return x, SolveStats(it, res / norm_b if norm_b > 0 else res, res <= target), history


def _component_eigenvalues(grid, d):
    """Eigenvalues of -Laplacian on the interior DOFs of face component d.

    Along the component's own axis the DOFs sit on interior faces with
    Dirichlet walls (sine modes at integer nodes); along transverse axes
    they sit at cell centers with the wall value pinned to zero through
    anti-mirror ghosts (sine modes at half-integer nodes).
    """
    lams = []
    for axis in range(3):
        n = grid.shape[axis]
        h = grid.spacing[axis]
        if axis == d:
            m = np.arange(1, n)
        else:
            m = np.arange(1, n + 1)
        lams.append((2.0 - 2.0 * np.cos(m * np.pi / n)) / (h * h))
    return lams


def _invert_component(r, grid, d):
    """Exact solve of -Lap v = r on the interior DOFs of face component d."""
    lx, ly, lz = _component_eigenvalues(grid, d)
    types = [1 if axis == d else 2 for axis in range(3)]
    v = r
    for axis in range(3):
        v = dst(v, type=types[axis], axis=axis)
    v = v / (lx[:, None, None] + ly[None, :, None] + lz[None, None, :])
    for axis in range(3):
        v = idst(v, type=types[axis], axis=axis)
    return v


def apply_component_laplacian(v, grid, d):
    """-Laplacian on the interior DOFs of face component d (test oracle
    for the transform inverse and for dense assembly on tiny grids)."""
    out = np.zeros_like(v)
    for axis in range(3):
        h2 = grid.spacing[axis] ** 2
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        mid = [slice(None)] * 3
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        mid[axis] = slice(1, -1)
        out[tuple(mid)] += (2.0 * v[tuple(mid)] - v[tuple(lo)] - v[tuple(hi)]) / h2
        first = [slice(None)] * 3
        second = [slice(None)] * 3
        last = [slice(None)] * 3
        sec_last = [slice(None)] * 3
        first[axis] = 0
        second[axis] = 1
        last[axis] = -1
        sec_last[axis] = -2
        if axis == d:
            # Dirichlet at integer nodes: the wall neighbour is exactly zero
            out[tuple(first)] += (2.0 * v[tuple(first)] - v[tuple(second)]) / h2
            out[tuple(last)] += (2.0 * v[tuple(last)] - v[tuple(sec_last)]) / h2
        else:
            # zero wall value at the half point: ghost = -first
            out[tuple(first)] += (3.0 * v[tuple(first)] - v[tuple(second)]) / h2
            out[tuple(last)] += (3.0 * v[tuple(last)] - v[tuple(sec_last)]) / h2
    return out


def _interior_dof_slices(grid, d):
    """Padded-array slices selecting the interior DOFs of face component d
    (wall faces excluded along the component's own axis)."""
    g = grid.ghost
    sl = []
    for axis in range(3):
        n = grid.shape[axis]
        if axis == d:
            sl.append(slice(g + 1, g + n))
        else:
            sl.append(slice(g, g + n))
    return tuple(sl)


def _masked_gradient(q: ScalarField):
    """Face gradient of a cell scalar with wall-normal faces exactly zero.

    The even-mirror ghost fill makes the wall-face difference vanish
    identically, so the plain gradient kernel already returns the masked
    operator; asserting it here keeps the adjointness assumption visible.
    """
    grid = q.grid
    fill_scalar_field(q)
    return _kernels.gradient(q.values, *grid.spacing, grid.ghost)


class _SchurOperator:
    """q -> -div( (-Lap)^-1 grad q ), the Stokes pressure Schur complement.

    SPD on mean-zero cell data: <Sq, q> = <Lap^-1 Gq, Gq> > 0 unless q is
    constant, using that div and -grad are exact adjoints once wall-normal
    faces vanish.
    """

    def __init__(self, grid):
        self.grid = grid
        self._scratch = ScalarField.zeros(grid)

    def velocity_from_pressure(self, q_interior):
        """B = -(-Lap)^-1 grad q as a padded face VectorField, zero walls."""
        grid = self.grid
        qf = self._scratch
        qf.interior[...] = q_interior
        qf.ghosts_filled = False
        gx, gy, gz = _masked_gradient(qf)
        B = VectorField.zeros(grid, FACE)
        for d, gcomp in enumerate((gx, gy, gz)):
            sl = _interior_dof_slices(grid, d)
            B.components[d][sl] = -_invert_component(gcomp[sl], grid, d)
        return B

    def divergence(self, B: VectorField):
        grid = self.grid
        vals = _kernels.divergence(B.x, B.y, B.z, *grid.spacing, grid.ghost)
        g = grid.ghost
        return vals[g:-g, g:-g, g:-g]

    def __call__(self, q_interior):
        return self.divergence(self.velocity_from_pressure(q_interior))


def _l2(arr, cell_volume):
    return float(np.sqrt(cell_volume * np.sum(np.square(arr))))


def solve_stokes_dirichlet(f: ScalarField, tol=DEFAULT_TOL, max_iter=500):
    """Right inverse of the divergence: B with div B = f, B = 0 on walls.

    Solves -Lap B + grad q = 0, div B = f by CG on the pressure Schur
    complement; each iteration applies the exact transform-based inverse
    of the three component Laplacians. Returns (B, q, SolveStats) with q
    mean-zero and the stats residual equal to ||div B - f|| / ||f||.
    """
    grid = f.grid
    vol = grid.cell_volume
    fi = np.array(f.interior, dtype=float)
    norm_f = _l2(fi, vol)
    integral = vol * float(fi.sum())
    if abs(integral) > 1e-10 * max(1.0, norm_f):
        raise CompatibilityError(
            f"solve_stokes_dirichlet needs a mean-zero source; got integral {integral:.3e}"
        )
    if norm_f == 0.0:
        return (
            VectorField.zeros(grid, FACE),
            ScalarField.zeros(grid),
            SolveStats(0, 0.0, True),
        )
    fi -= fi.mean()  # remove the roundoff-level mean so the system is consistent

    S = _SchurOperator(grid)
    q, stats, _ = conjugate_gradient(S, fi, tol=tol, max_iter=max_iter)
    q -= q.mean()
    B = S.velocity_from_pressure(q)
    resid = _l2(S.divergence(B) - fi, vol) / norm_f
    stats = SolveStats(stats.iterations, resid, resid <= tol)

    qf = ScalarField.zeros(grid)
    qf.interior[...] = q
    B.ghosts_filled = False  # ghost cells are zero, not slip mirrors
    return B, qf, stats


def dirichlet_gradient_norm(B: VectorField):
    """L2 norm of the full gradient of a face field that vanishes on walls.

    Own-axis derivatives are evaluated at cell centers; cross derivatives
    at nodes, with the wall row handled by the anti-mirror ghost (second
    order for homogeneous Dirichlet data).
    """
    grid = B.grid
    total = 0.0
    for d in range(3):
        comp = B.component_interior(d)
        h = grid.spacing
        own = [slice(None)] * 3
        own_hi = [slice(None)] * 3
        own[d] = slice(0, -1)
        own_hi[d] = slice(1, None)
        dd = (comp[tuple(own_hi)] - comp[tuple(own)]) / h[d]
        total += float(np.sum(np.square(dd)))
        for e in range(3):
            if e == d:
                continue
            pad_shape = list(comp.shape)
            pad_shape[e] += 2
            padded = np.zeros(pad_shape)
            mid = [slice(None)] * 3
            mid[e] = slice(1, -1)
            padded[tuple(mid)] = comp
            first = [slice(None)] * 3
            ghost_lo = [slice(None)] * 3
            last = [slice(None)] * 3
            ghost_hi = [slice(None)] * 3
            first[e], ghost_lo[e] = 1, 0
            last[e], ghost_hi[e] = -2, -1
            padded[tuple(ghost_lo)] = -padded[tuple(first)]
            padded[tuple(ghost_hi)] = -padded[tuple(last)]
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[e] = slice(0, -1)
            hi[e] = slice(1, None)
            de = (padded[tuple(hi)] - padded[tuple(lo)]) / h[e]
            total += float(np.sum(np.square(de)))
    return float(np.sqrt(grid.cell_volume * total))


def bogovskii_pairing(state: FlowState, eos: EosParams, tol=DEFAULT_TOL):
    """The cross term: integral of m . B over the box, with div B equal to
    the density perturbation rho - mean(rho) and B = 0 on walls.

    Uses the conserved momentum directly (no division by density), so the
    value is well defined even through vacuum regions.
    """
    state.require_filled("bogovskii_pairing")
    grid = state.grid
    f = ScalarField.zeros(grid)
    f.interior[...] = state.rho.interior - state.rho.interior.mean()
    B, _, stats = solve_stokes_dirichlet(f, tol=tol)
    if stats.iterations == 0 and stats.final_residual == 0.0:
        return 0.0
    total = 0.0
    for d in range(3):
        total += float(np.sum(state.mom.components[d][_interior_dof_slices(grid, d)]
                              * B.components[d][_interior_dof_slices(grid, d)]))
    return grid.cell_volume * total
