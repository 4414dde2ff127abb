"""Box domain, staggered fields, equation of state, and initial data.

Layout conventions used everywhere in the package:

* scalars (density, pressure, ...) live at cell centers,
  array shape ``(nx + 2g, ny + 2g, nz + 2g)`` with ``g`` ghost layers;
* vector fields are staggered: the d-component lives on d-faces, so its
  array has ``n_d + 1 + 2g`` entries along d (wall faces included) and
  cell-centered extents along the other axes;
* curls live on cell edges (``staggering == "edge"``), the natural dual
  placement that makes div(curl) vanish identically.

Interior index ranges: cells ``[g, g + n)``, faces ``[g, g + n + 1)`` with
the walls at ``g`` and ``g + n``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation, DomainError, NumericalBlowupError

FACE = "face"
EDGE = "edge"


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box with a uniform staggered grid."""

    lx: float
    ly: float
    lz: float
    nx: int
    ny: int
    nz: int
    ghost: int = 2

    def __post_init__(self):
        if min(self.lx, self.ly, self.lz) <= 0:
            raise ConfigurationError("box extents must be positive")
        if min(self.nx, self.ny, self.nz) < 4:
            raise ConfigurationError("need at least 4 cells per direction")
        if self.ghost < 1:
            raise ConfigurationError("ghost width must be >= 1")

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def hz(self):
        return self.lz / self.nz

    @property
    def spacing(self):
        return (self.hx, self.hy, self.hz)

    @property
    def volume(self):
        return self.lx * self.ly * self.lz

    @property
    def cell_volume(self):
        return self.hx * self.hy * self.hz

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    def scalar_shape(self):
        g2 = 2 * self.ghost
        return (self.nx + g2, self.ny + g2, self.nz + g2)

    def vector_shape(self, axis, staggering=FACE):
        """Padded array shape of one vector component."""
        g2 = 2 * self.ghost
        base = [self.nx + g2, self.ny + g2, self.nz + g2]
        if staggering == FACE:
            base[axis] += 1
        elif staggering == EDGE:
            for a in range(3):
                if a != axis:
                    base[a] += 1
        else:
            raise ValueError(f"unknown staggering {staggering!r}")
        return tuple(base)

    def cell_coords(self, axis):
        """Interior cell-center coordinates along one axis."""
        h = self.spacing[axis]
        n = self.shape[axis]
        return (np.arange(n) + 0.5) * h

    def face_coords(self, axis):
        """Interior face coordinates along one axis, walls included."""
        h = self.spacing[axis]
        n = self.shape[axis]
        return np.arange(n + 1) * h


def build_grid(extents, cells, ghost_width=2) -> GridSpec:
    """Validate inputs and assemble a GridSpec."""
    lx, ly, lz = (float(v) for v in extents)
    nx, ny, nz = (int(v) for v in cells)
    return GridSpec(lx, ly, lz, nx, ny, nz, int(ghost_width))


@dataclass
class EosParams:
    """Isentropic pressure law P = a rho^gamma plus viscosities."""

    a: float = 1.0
    gamma: float = 2.0
    mu: float = 1.0
    lam: float = 0.0
    rho_bar: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigurationError("pressure scale a must be positive")
        if self.gamma <= 1:
            raise ConfigurationError("adiabatic exponent gamma must exceed 1")
        if self.mu <= 0:
            raise ConfigurationError("shear viscosity mu must be positive")
        if 2 * self.mu + 3 * self.lam < 0:
            raise ConfigurationError("physics violation: 2*mu + 3*lambda must be >= 0")
        if self.rho_bar <= 0:
            raise ConfigurationError("reference density must be positive")

    @property
    def bulk(self):
        """Longitudinal viscosity 2*mu + lambda."""
        return 2 * self.mu + self.lam

    def pressure(self, rho):
        if self.gamma == 2.0:
            return self.a * np.square(rho)
        return self.a * np.power(rho, self.gamma)

    def sound_speed(self, rho):
        return np.sqrt(self.a * self.gamma * np.power(np.maximum(rho, 0.0), self.gamma - 1.0))


@dataclass
class ScalarField:
    grid: GridSpec
    values: np.ndarray
    ghosts_filled: bool = False

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.scalar_shape()))

    @property
    def interior(self):
        g = self.grid.ghost
        return self.values[g:-g, g:-g, g:-g]

    def copy(self):
        return ScalarField(self.grid, self.values.copy(), self.ghosts_filled)


@dataclass
class VectorField:
    grid: GridSpec
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    staggering: str = FACE
    ghosts_filled: bool = False

    @classmethod
    def zeros(cls, grid, staggering=FACE):
        return cls(
            grid,
            np.zeros(grid.vector_shape(0, staggering)),
            np.zeros(grid.vector_shape(1, staggering)),
            np.zeros(grid.vector_shape(2, staggering)),
            staggering,
        )

    @property
    def components(self):
        return (self.x, self.y, self.z)

    def component_interior(self, axis):
        g = self.grid.ghost
        arr = self.components[axis]
        sl = []
        for a in range(3):
            n = arr.shape[a] - 2 * self.grid.ghost
            sl.append(slice(g, g + n))
        return arr[tuple(sl)]

    def copy(self):
        return VectorField(
            self.grid,
            self.x.copy(),
            self.y.copy(),
            self.z.copy(),
            self.staggering,
            self.ghosts_filled,
        )


@dataclass
class FlowState:
    """Density and momentum at one time instant."""

    t: float
    rho: ScalarField
    mom: VectorField
    ghosts_filled: bool = field(default=False)

    @property
    def grid(self):
        return self.rho.grid

    def copy(self):
        return FlowState(self.t, self.rho.copy(), self.mom.copy(), self.ghosts_filled)

    def mean_density(self):
        return float(np.mean(self.rho.interior))

    def require_filled(self, what="operator"):
        if not self.ghosts_filled:
            raise ContractViolation(f"{what} requires ghost-filled state")


def eos_pressure(rho: ScalarField, eos: EosParams) -> ScalarField:
    """Pointwise pressure P = a rho^gamma; rejects negative density."""
    if np.any(rho.interior < 0):
        raise DomainError("negative density passed to eos_pressure")
    return ScalarField(rho.grid, eos.pressure(np.maximum(rho.values, 0.0)), rho.ghosts_filled)


def relative_entropy_G(rho, eos: EosParams):
    """Potential energy density G(rho) = rho * int_rhobar^rho (P(s)-P(rhobar))/s^2 ds.

    Closed form for gamma > 1; G >= 0 with equality only at rho == rho_bar,
    and G(0) = a * rho_bar^gamma. Accepts scalars or arrays.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("negative density passed to relative_entropy_G")
    a, gam, rb = eos.a, eos.gamma, eos.rho_bar
    out = a * (
        np.power(rho, gam) / (gam - 1.0)
        + rb**gam
        - gam * rho * rb ** (gam - 1.0) / (gam - 1.0)
    )
    # the closed form is already exact at rho=0: a*rho_bar^gamma
    out = np.maximum(out, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# ghost filling


def _mirror_axis(arr, axis, g):
    """Even reflection about the wall planes (cell-centered axis)."""
    lo_src = [slice(None)] * 3
    lo_dst = [slice(None)] * 3
    hi_src = [slice(None)] * 3
    hi_dst = [slice(None)] * 3
    lo_dst[axis] = slice(0, g)
    lo_src[axis] = slice(2 * g - 1, g - 1, -1)
    hi_dst[axis] = slice(-g, None)
    hi_src[axis] = slice(-g - 1, -2 * g - 1, -1)
    arr[tuple(lo_dst)] = arr[tuple(lo_src)]
    arr[tuple(hi_dst)] = arr[tuple(hi_src)]


def _odd_axis(arr, axis, g):
    """Zero on the wall faces, odd reflection beyond them (face-centered axis)."""
    wall_lo = [slice(None)] * 3
    wall_hi = [slice(None)] * 3
    wall_lo[axis] = g
    wall_hi[axis] = arr.shape[axis] - 1 - g
    arr[tuple(wall_lo)] = 0.0
    arr[tuple(wall_hi)] = 0.0
    lo_src = [slice(None)] * 3
    lo_dst = [slice(None)] * 3
    hi_src = [slice(None)] * 3
    hi_dst = [slice(None)] * 3
    lo_dst[axis] = slice(0, g)
    lo_src[axis] = slice(2 * g, g, -1)
    hi_dst[axis] = slice(-g, None)
    hi_src[axis] = slice(-g - 2, -2 * g - 2, -1)
    arr[tuple(lo_dst)] = -arr[tuple(lo_src)]
    arr[tuple(hi_dst)] = -arr[tuple(hi_src)]


def fill_scalar_ghosts(arr, g):
    for axis in range(3):
        _mirror_axis(arr, axis, g)


def fill_face_vector_ghosts(comps, g):
    """Slip-wall fill: normal component odd with exact wall zeros, tangential even."""
    for d, arr in enumerate(comps):
        for axis in range(3):
            if axis == d:
                _odd_axis(arr, axis, g)
            else:
                _mirror_axis(arr, axis, g)


def fill_scalar_field(field: ScalarField) -> ScalarField:
    fill_scalar_ghosts(field.values, field.grid.ghost)
    field.ghosts_filled = True
    return field


def fill_vector_field(field: VectorField) -> VectorField:
    if field.staggering != FACE:
        raise ContractViolation("ghost filling is defined for face-centered fields")
    fill_face_vector_ghosts(field.components, field.grid.ghost)
    field.ghosts_filled = True
    return field


def fill_ghosts(state: FlowState) -> FlowState:
    """Apply the flat-wall slip conditions: u.n = 0 and zero normal derivative
    of tangential velocity; density mirrors (zero normal gradient).

    Idempotent; raises NumericalBlowupError on NaN/Inf interior values.
    """
    g = state.grid.ghost
    if not np.isfinite(state.rho.interior).all():
        raise NumericalBlowupError("non-finite density", time=state.t)
    for axis in range(3):
        if not np.isfinite(state.mom.component_interior(axis)).all():
            raise NumericalBlowupError("non-finite momentum", time=state.t)
    fill_scalar_field(state.rho)
    fill_vector_field(state.mom)
    state.ghosts_filled = True
    return state


# ---------------------------------------------------------------------------
# initial conditions

PRESETS = ("uniform", "smooth-perturbation", "large-amplitude", "positive-floor", "vacuum-point")

# vacuum-point bump geometry: exact zeros inside VACUUM_R0, smooth rise to 1 at VACUUM_R1
VACUUM_R0 = 0.16
VACUUM_R1 = 0.34


def _trig_cell_product(grid):
    """cos(pi x)cos(pi y)cos(pi z) (scaled to the box) at interior cell centers."""
    cx = np.cos(np.pi * grid.cell_coords(0) / grid.lx)
    cy = np.cos(np.pi * grid.cell_coords(1) / grid.ly)
    cz = np.cos(np.pi * grid.cell_coords(2) / grid.lz)
    return cx[:, None, None] * cy[None, :, None] * cz[None, None, :]


def slip_eigenfield(grid, amplitude):
    """Gradient-type trigonometric eigenfield, slip-compatible and curl-free.

    u = amplitude * (sin(pi x)cos(pi y)cos(pi z), cos sin cos, cos cos sin).
    Normal components vanish identically on the walls.
    """
    u = VectorField.zeros(grid, FACE)
    coords = []
    for axis, l in enumerate((grid.lx, grid.ly, grid.lz)):
        coords.append((grid.face_coords(axis) / l, grid.cell_coords(axis) / l))
    fx, cx = coords[0]
    fy, cy = coords[1]
    fz, cz = coords[2]
    g = grid.ghost
    u.component_interior(0)[...] = amplitude * (
        np.sin(np.pi * fx)[:, None, None]
        * np.cos(np.pi * cy)[None, :, None]
        * np.cos(np.pi * cz)[None, None, :]
    )
    u.component_interior(1)[...] = amplitude * (
        np.cos(np.pi * cx)[:, None, None]
        * np.sin(np.pi * fy)[None, :, None]
        * np.cos(np.pi * cz)[None, None, :]
    )
    u.component_interior(2)[...] = amplitude * (
        np.cos(np.pi * cx)[:, None, None]
        * np.cos(np.pi * cy)[None, :, None]
        * np.sin(np.pi * fz)[None, None, :]
    )
    return u


def _face_average_density(rho_values, g, axis, shape):
    """Average cell densities to the faces of one axis (interior faces only)."""
    sl_lo = [slice(g, -g)] * 3
    sl_hi = [slice(g, -g)] * 3
    n = shape[axis]
    sl_lo[axis] = slice(g - 1, g + n)
    sl_hi[axis] = slice(g, g + n + 1)
    return 0.5 * (rho_values[tuple(sl_lo)] + rho_values[tuple(sl_hi)])


def make_initial_state(preset, amplitude, grid: GridSpec, eos: EosParams, rho_star=0.5) -> FlowState:
    """Build one of the named initial conditions; mean density is renormalized
    to eos.rho_bar to machine precision."""
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; choose from {PRESETS}")
    rho = ScalarField.zeros(grid)
    mom = VectorField.zeros(grid, FACE)
    rb = eos.rho_bar

    if preset == "uniform":
        rho.interior[...] = rb
        u = VectorField.zeros(grid, FACE)
    elif preset in ("smooth-perturbation", "large-amplitude", "positive-floor"):
        eps = float(amplitude)
        if preset == "large-amplitude" and abs(eps) > 0.5:
            raise ConfigurationError("large-amplitude preset caps |amplitude| at 0.5")
        prof = rb * (1.0 + eps * _trig_cell_product(grid))
        if np.min(prof) <= 0:
            raise ConfigurationError(f"amplitude {eps} makes the initial density non-positive")
        if preset == "positive-floor" and np.min(prof) < rho_star:
            raise ConfigurationError(
                f"positive-floor preset requires min rho0 >= rho_star={rho_star}"
            )
        rho.interior[...] = prof
        u = slip_eigenfield(grid, eps)
    else:  # vacuum-point
        xc = grid.cell_coords(0) - 0.5 * grid.lx
        yc = grid.cell_coords(1) - 0.5 * grid.ly
        zc = grid.cell_coords(2) - 0.5 * grid.lz
        r = np.sqrt(
            xc[:, None, None] ** 2 + yc[None, :, None] ** 2 + zc[None, None, :] ** 2
        )
        s = np.clip((r - VACUUM_R0) / (VACUUM_R1 - VACUUM_R0), 0.0, 1.0)
        psi = s * s * s * (10.0 + s * (-15.0 + 6.0 * s))  # C^2 smoothstep
        rho.interior[...] = rb * psi
        u = VectorField.zeros(grid, FACE)

    # exact mean renormalization (vacuum zeros are untouched: pure rescale)
    mean = float(np.mean(rho.interior))
    if mean <= 0:
        raise ConfigurationError("initial density has non-positive mean")
    rho.interior[...] *= rb / mean

    g = grid.ghost
    fill_scalar_ghosts(rho.values, g)
    for axis in range(3):
        rho_f = _face_average_density(rho.values, g, axis, grid.shape)
        mom.component_interior(axis)[...] = rho_f * u.component_interior(axis)

    state = FlowState(0.0, rho, mom)
    return fill_ghosts(state)
