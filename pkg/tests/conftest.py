"""Shared fixtures.

Heavy acceptance runs are produced once per session and cached on disk
(.acceptance_cache/) keyed by their configuration, so a re-run of the
suite does not repeat hours of time integration. Delete the cache
directory or set SLIPNS_ACCEPTANCE_CACHE=0 to force fresh runs.
"""

import json
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from slipns import diagnostics, operators
from slipns.config import parse_config
from slipns.grid import make_initial_state
from slipns.solver import integrate

CACHE_DIR = Path(__file__).resolve().parent.parent / ".acceptance_cache"
CACHE_ENABLED = os.environ.get("SLIPNS_ACCEPTANCE_CACHE", "1") != "0"


def cached_json(key, producer):
    """Return producer() and memoize it as JSON under the cache key."""
    path = CACHE_DIR / f"{key}.json"
    if CACHE_ENABLED and path.exists():
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    data = producer()
    if CACHE_ENABLED:
        CACHE_DIR.mkdir(exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(data, fh)
        os.replace(tmp, path)
    return data


def light_run(cfg_text, columns, preset=None, cadence=20):
    """Integrate a configured run sampling only the requested columns.

    Returns {"t": [...], col: [...], ..., "elapsed": seconds, "steps": n}.
    Much cheaper than the full diagnostics sample (no elliptic solve), so
    high resolutions stay affordable.
    """
    cfg = parse_config(cfg_text)
    eos = cfg.eos
    eps = cfg.step.resolve_eps_floor(eos)
    state = make_initial_state(preset or cfg.preset, cfg.amplitude, cfg.grid, eos,
                               cfg.rho_star)
    rows = {c: [] for c in ("t",) + tuple(columns)}
    last = [0]

    def obs(step, st, prev, dt):
        last[0] = step
        rows["t"].append(st.t)
        vol = st.grid.cell_volume
        need = set(columns)
        u = None
        if need & {"l2_sqrho_u", "l2_grad_u", "l2_div_u", "l2_curl_u", "linf_div_u",
                   "energy", "dissipation", "l2_sqrho_udot"}:
            u = operators.velocity_from_momentum(st.rho, st.mom, eps)
            rho_f = [np.maximum(rf, 0.0) for rf in operators.face_densities(st.rho)]
            divu = operators.divergence(u)
            curlu = operators.curl(u)
            l2_div = diagnostics.lp_norm(divu, 2)
            l2_curl = diagnostics._edge_l2(curlu)
            sq_u = math.sqrt(diagnostics._face_quadrature_sq(
                rho_f, [u.component_interior(d) for d in range(3)], vol))
        for col in columns:
            if col == "mean_rho":
                rows[col].append(float(st.rho.interior.mean()))
            elif col == "min_rho":
                rows[col].append(float(st.rho.interior.min()))
            elif col == "max_rho":
                rows[col].append(float(st.rho.interior.max()))
            elif col == "l2_drho":
                rows[col].append(diagnostics.lp_norm(
                    st.rho.interior - eos.rho_bar, 2, st.grid))
            elif col == "linf_drho":
                rows[col].append(diagnostics.lp_norm(
                    st.rho.interior - eos.rho_bar, math.inf, st.grid))
            elif col == "l2_sqrho_u":
                rows[col].append(sq_u)
            elif col == "l2_div_u":
                rows[col].append(l2_div)
            elif col == "l2_curl_u":
                rows[col].append(l2_curl)
            elif col == "linf_div_u":
                rows[col].append(diagnostics.lp_norm(divu, math.inf))
            elif col == "l2_grad_u":
                rows[col].append(math.sqrt(l2_div**2 + l2_curl**2))
            elif col == "energy":
                from slipns.grid import relative_entropy_G

                int_g = vol * float(np.sum(relative_entropy_G(
                    np.maximum(st.rho.interior, 0.0), eos)))
                rows[col].append(0.5 * sq_u**2 + int_g)
            elif col == "dissipation":
                rows[col].append(eos.bulk * l2_div**2 + eos.mu * l2_curl**2)
            elif col == "l2_sqrho_udot":
                if prev is not None and dt > 0:
                    udot, _ = operators.material_acceleration(prev, st, dt, eps)
                else:
                    udot = operators._advective_term(u)
                rows[col].append(math.sqrt(diagnostics._face_quadrature_sq(
                    rho_f, [udot.component_interior(d) for d in range(3)], vol)))
            elif col == "l4_grad_rho":
                grho = operators.gradient(st.rho)
                rows[col].append(diagnostics.lp_norm(grho, 4))
            else:
                raise KeyError(col)

    t0 = time.monotonic()
    integrate(state, eos, cfg.step, observers=[obs], cadence=cadence)
    rows["elapsed"] = time.monotonic() - t0
    rows["steps"] = last[0]
    return rows


def load_records(csv_path):
    """Rebuild DiagnosticsRecord objects from a diagnostics CSV."""
    import csv as _csv

    out = []
    with open(csv_path, encoding="utf-8", newline="") as fh:
        for row in _csv.DictReader(fh):
            rec = diagnostics.DiagnosticsRecord()
            for name in diagnostics.CSV_COLUMNS:
                v = row[name]
                if name == "error_flag":
                    setattr(rec, name, v == "1")
                else:
                    setattr(rec, name, float(v))
            out.append(rec)
    return out


# ---------------------------------------------------------------- fixtures

THEOREM1_N32_CFG = """
[grid]
nx = 32
ny = 32
nz = 32

[step]
t_end = 8.0

[run]
preset = smooth-perturbation
amplitude = 0.05
sample_cadence = 80
"""

THEOREM1_N48_CFG = """
[grid]
nx = 48
ny = 48
nz = 48

[step]
t_end = 1.0

[run]
preset = smooth-perturbation
amplitude = 0.05
"""

POSFLOOR_CFG = """
[grid]
nx = 24
ny = 24
nz = 24

[step]
t_end = 4.0

[run]
preset = positive-floor
amplitude = 0.45
rho_star = 0.5
"""

VACUUM_CFG = """
[grid]
nx = 24
ny = 24
nz = 24

[eos]
a = 0.02

[step]
t_end = 2.0
eps_floor = 0.3

[run]
preset = vacuum-point
"""

MASS_CFG = """
[grid]
nx = 32
ny = 32
nz = 32

[step]
t_end = 100.0
max_steps = 10000
"""

ENERGY_CFG = """
[grid]
nx = {n}
ny = {n}
nz = {n}

[step]
t_end = 0.1
"""

DECAY_COLUMNS = ("l2_drho", "l2_sqrho_u", "l2_grad_u", "l2_sqrho_udot")


@pytest.fixture(scope="session")
def theorem1_n32():
    """Full theorem1 experiment at the pinned configuration (long)."""
    from slipns.experiments import run_experiment

    out_dir = CACHE_DIR / "theorem1_n32"
    csv_path = out_dir / "diagnostics.csv"
    meta_path = CACHE_DIR / "theorem1_n32_meta.json"
    if meta_path.exists() and not csv_path.exists():
        meta_path.unlink()  # stale metadata without the run artifacts

    def produce():
        cfg = parse_config(THEOREM1_N32_CFG)
        t0 = time.monotonic()
        report = run_experiment("theorem1", cfg, out_dir=str(out_dir))
        return {
            "passed": report.passed,
            "failures": report.failures,
            "summary": report.summary,
            "elapsed": time.monotonic() - t0,
        }

    data = cached_json("theorem1_n32_meta", produce)
    data["records"] = load_records(out_dir / "diagnostics.csv")
    return data


@pytest.fixture(scope="session")
def theorem1_n48():
    return cached_json(
        "theorem1_n48",
        lambda: light_run(THEOREM1_N48_CFG, DECAY_COLUMNS, cadence=40),
    )


@pytest.fixture(scope="session")
def mass_run():
    return cached_json(
        "mass_10k_n32",
        lambda: light_run(MASS_CFG, ("mean_rho", "min_rho"), cadence=100),
    )


@pytest.fixture(scope="session")
def energy_runs():
    def produce():
        out = {}
        for n, cadence in ((32, 5), (64, 5)):
            out[str(n)] = light_run(
                ENERGY_CFG.format(n=n), ("energy", "dissipation"), cadence=cadence
            )
        return out

    return cached_json("energy_balance_pair", produce)


@pytest.fixture(scope="session")
def posfloor_run():
    return cached_json(
        "positive_floor_n24",
        lambda: light_run(
            POSFLOOR_CFG, ("linf_drho", "min_rho", "linf_div_u"), cadence=20
        ),
    )


@pytest.fixture(scope="session")
def vacuum_run():
    return cached_json(
        "vacuum_n24",
        lambda: light_run(
            VACUUM_CFG, ("min_rho", "l4_grad_rho", "max_rho"), cadence=40
        ),
    )
