"""slipns: compressible isentropic flow in a slip-wall box, with the
diagnostics needed to observe exponential decay to equilibrium and
vacuum persistence on desk-scale grids."""

from ._kernels import BACKEND as kernel_backend
from .config import RunConfig, load_config, parse_config
from .diagnostics import DecayFit, DiagnosticsRecord, LyapunovWeights, fit_decay, lp_norm, sample
from .elliptic import SolveStats, bogovskii_pairing, solve_stokes_dirichlet
from .errors import SlipnsError
from .experiments import run_experiment
from .grid import EosParams, FlowState, GridSpec, build_grid, make_initial_state
from .solver import StepControl, cfl_dt, integrate, step_ssprk3

__version__ = "0.1.0"

__all__ = [
    "DecayFit",
    "DiagnosticsRecord",
    "EosParams",
    "FlowState",
    "GridSpec",
    "LyapunovWeights",
    "RunConfig",
    "SlipnsError",
    "SolveStats",
    "StepControl",
    "bogovskii_pairing",
    "build_grid",
    "cfl_dt",
    "fit_decay",
    "integrate",
    "kernel_backend",
    "load_config",
    "lp_norm",
    "make_initial_state",
    "parse_config",
    "run_experiment",
    "sample",
    "solve_stokes_dirichlet",
    "step_ssprk3",
    "__version__",
]
