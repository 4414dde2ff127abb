"""Explicit time integration in conservative variables (rho, m).

SSP-RK3 stepping with minmod-limited fluxes, a viscous/acoustic CFL
controller, a tiny positivity clip near vacuum, and blow-up detection.
Mass is conserved to roundoff because every density update is a flux
difference with exactly zero wall-normal fluxes.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalBlowupError,
    PositivityError,
    StiffnessError,
)
from .grid import FACE, EosParams, FlowState, ScalarField, VectorField, fill_ghosts, fill_scalar_ghosts
from .operators import default_eps_floor, face_densities, velocity_from_momentum

POSITIVITY_CLIP = 1e-13


@dataclass
class StepControl:
    """Time-step policy knobs.

    cfl_viscous must keep dt inside the RK3 stability region of the
    explicit viscous operator; values above ~0.2 are linearly unstable
    on cubic cells, hence the conservative default.
    """

    cfl_advective: float = 0.4
    cfl_viscous: float = 0.18
    dt_min: float = 1e-10
    dt_max: float = 0.1
    t_end: float = 8.0
    max_steps: int = 10_000_000
    eps_floor: float = None  # None -> 1e-10 * rho_bar

    def __post_init__(self):
        if not 0.0 < self.cfl_advective <= 1.0:
            raise ConfigurationError("cfl_advective must be in (0, 1]")
        if not 0.0 < self.cfl_viscous <= 0.5:
            raise ConfigurationError("cfl_viscous must be in (0, 0.5]")
        if self.dt_min > self.dt_max:
            raise ConfigurationError("dt_min must not exceed dt_max")
        if self.t_end < 0:
            raise ConfigurationError("t_end must be nonnegative")
        if self.max_steps < 0:
            raise ConfigurationError("max_steps must be nonnegative")

    def resolve_eps_floor(self, eos: EosParams) -> float:
        return default_eps_floor(eos) if self.eps_floor is None else self.eps_floor


@dataclass
class RhsEval:
    drho: ScalarField
    dmom: VectorField


def compute_rhs(state: FlowState, eos: EosParams, eps_floor=None) -> RhsEval:
    """Flux-form right-hand side of the mass and momentum equations."""
    state.require_filled("compute_rhs")
    if eps_floor is None:
        eps_floor = default_eps_floor(eos)
    grid = state.grid
    g = grid.ghost
    h = grid.spacing
    u = velocity_from_momentum(state.rho, state.mom, eps_floor)

    drho = _kernels.mass_flux_divergence(state.rho.values, u.x, u.y, u.z, *h, g)
    adv = _kernels.momentum_advection(
        state.mom.x, state.mom.y, state.mom.z, u.x, u.y, u.z, *h, g
    )

    # stages keep rho >= 0 (positivity clip), so no flooring is needed here
    p = eos.pressure(state.rho.values)
    gp = _kernels.gradient(p, *h, g)

    divu = _kernels.divergence(u.x, u.y, u.z, *h, g)
    fill_scalar_ghosts(divu, g)
    gd = _kernels.gradient(divu, *h, g)
    w = _kernels.curl_face_to_edge(u.x, u.y, u.z, *h, g)
    cc = _kernels.curl_edge_to_face(*w, *h, g)

    bulk = eos.bulk
    dmom = []
    for d in range(3):
        comp = adv[d]
        comp -= gp[d]
        comp += bulk * gd[d]
        comp -= eos.mu * cc[d]
        # hard-zero the wall faces: u.n = 0 is exact for all time
        wall = [slice(None)] * 3
        wall[d] = g
        comp[tuple(wall)] = 0.0
        wall[d] = comp.shape[d] - 1 - g
        comp[tuple(wall)] = 0.0
        dmom.append(comp)

    return RhsEval(
        ScalarField(grid, drho),
        VectorField(grid, dmom[0], dmom[1], dmom[2], FACE),
    )


def cfl_dt(state: FlowState, eos: EosParams, ctl: StepControl, eps_floor=None) -> float:
    """Stable time step: advective h/(|u|+c) and viscous h^2 rho/(2mu+lam)
    bounds, scaled by the CFL numbers and clamped to [dt_min, dt_max]."""
    state.require_filled("cfl_dt")
    if np.any(state.rho.interior < 0):
        raise DomainError("negative density passed to cfl_dt")
    if eps_floor is None:
        eps_floor = ctl.resolve_eps_floor(eos)
    u = velocity_from_momentum(state.rho, state.mom, eps_floor)
    dt = np.inf
    for axis, rho_f in enumerate(face_densities(state.rho)):
        c = eos.sound_speed(rho_f)
        speed = float(np.max(np.abs(u.component_interior(axis)) + c))
        if speed > 0.0:
            dt = min(dt, ctl.cfl_advective * state.grid.spacing[axis] / speed)
    if eos.bulk > 0.0:
        hmin = min(state.grid.spacing)
        rho_eff = float(np.min(np.maximum(state.rho.interior, eps_floor)))
        dt = min(dt, ctl.cfl_viscous * hmin * hmin * rho_eff / eos.bulk)
    if dt < ctl.dt_min:
        raise StiffnessError(
            f"stable dt {dt:.3e} fell below dt_min {ctl.dt_min:.3e}; "
            "consider an implicit viscous option or a coarser eps_floor"
        )
    return float(min(dt, ctl.dt_max))


def _clip_positivity(rho: ScalarField, t: float):
    interior = rho.interior
    low = float(interior.min())
    if low < -POSITIVITY_CLIP:
        raise PositivityError(f"density reached {low:.3e} at t={t:.6g}")
    if low < 0.0:
        np.maximum(interior, 0.0, out=interior)


def step_ssprk3(state: FlowState, eos: EosParams, dt: float, eps_floor=None) -> FlowState:
    """One Shu-Osher SSP-RK3 step; ghosts refilled and positivity clipped
    after every stage."""
    if dt <= 0:
        raise ConfigurationError("step_ssprk3 needs dt > 0")

    def euler(s: FlowState, dtloc: float) -> FlowState:
        rhs = compute_rhs(s, eos, eps_floor)
        rho = ScalarField(s.grid, s.rho.values + dtloc * rhs.drho.values)
        mom = VectorField(
            s.grid,
            s.mom.x + dtloc * rhs.dmom.x,
            s.mom.y + dtloc * rhs.dmom.y,
            s.mom.z + dtloc * rhs.dmom.z,
            FACE,
        )
        return FlowState(s.t, rho, mom)

    def blend(a: FlowState, wa: float, b: FlowState, wb: float) -> FlowState:
        rho = ScalarField(a.grid, wa * a.rho.values + wb * b.rho.values)
        mom = VectorField(
            a.grid,
            wa * a.mom.x + wb * b.mom.x,
            wa * a.mom.y + wb * b.mom.y,
            wa * a.mom.z + wb * b.mom.z,
            FACE,
        )
        return FlowState(a.t, rho, mom)

    s1 = euler(state, dt)
    _clip_positivity(s1.rho, state.t)
    fill_ghosts(s1)

    s2 = blend(state, 0.75, euler(s1, dt), 0.25)
    _clip_positivity(s2.rho, state.t)
    fill_ghosts(s2)

    s3 = blend(state, 1.0 / 3.0, euler(s2, dt), 2.0 / 3.0)
    _clip_positivity(s3.rho, state.t)
    s3.t = state.t + dt
    fill_ghosts(s3)
    return s3


def integrate(state: FlowState, eos: EosParams, ctl: StepControl, observers=(), cadence=20,
              start_step=0):
    """Advance to ctl.t_end (or max_steps), invoking each observer as
    observer(step, state, prev_state, dt) at the starting step and every
    `cadence` steps thereafter (and at the final step). Deterministic:
    fixed iteration order, no wall-clock dependence. start_step offsets
    the step counter when resuming from a checkpoint so observer cadence
    stays aligned with the uninterrupted run."""
    if cadence < 1:
        raise ConfigurationError("observer cadence must be >= 1")
    eps_floor = ctl.resolve_eps_floor(eos)
    if not state.ghosts_filled:
        fill_ghosts(state)
    step = start_step
    for obs in observers:
        obs(step, state, None, 0.0)
    t_end = ctl.t_end
    tiny = 1e-12 * max(1.0, abs(t_end))
    while state.t < t_end - tiny and step < ctl.max_steps:
        dt = cfl_dt(state, eos, ctl, eps_floor)
        dt = min(dt, t_end - state.t)
        prev = state
        try:
            state = step_ssprk3(state, eos, dt, eps_floor)
        except NumericalBlowupError as err:
            err.step = step + 1
            raise
        step += 1
        if step % cadence == 0 or state.t >= t_end - tiny or step == ctl.max_steps:
            for obs in observers:
                obs(step, state, prev, dt)
    return state
