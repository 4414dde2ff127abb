"""Preset experiments: full runs plus their pass/fail verdicts.

Each experiment writes the diagnostics CSV, a JSON summary (including
every failed assertion, so nothing passes silently), optional SVG plots,
and periodic checkpoints, then returns an ExitReport the CLI maps to an
exit code.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, operators
from .checkpoint import read_checkpoint, write_checkpoint
from .config import RunConfig, config_hash, config_to_text
from .errors import ConfigurationError
from .grid import build_grid, make_initial_state
from .plotting import emit_plot
from .solver import StepControl, integrate

EXPERIMENTS = ("theorem1", "theorem1-positive", "theorem2-vacuum", "convergence", "probes")


@dataclass
class ExitReport:
    name: str
    passed: bool
    failures: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)) or ".")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return vars(obj)
    return str(obj)


def run_simulation(cfg: RunConfig, out_dir, resume=None, preset=None):
    """Integrate one configured run, sampling diagnostics along the way.

    Returns (records, final_state). Writes config echo, diagnostics CSV,
    periodic checkpoints (cadence rounded to sample multiples) and a
    final checkpoint into out_dir.
    """
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "config_echo.txt"), config_to_text(cfg))
    digest = config_hash(cfg)
    eos = cfg.eos
    eps_floor = cfg.step.resolve_eps_floor(eos)

    if resume is not None:
        state, ck_eos, start_step, _ = read_checkpoint(resume, expected_hash=digest)
        if (ck_eos.a, ck_eos.gamma, ck_eos.mu, ck_eos.lam, ck_eos.rho_bar) != (
            eos.a, eos.gamma, eos.mu, eos.lam, eos.rho_bar,
        ):
            raise ConfigurationError("checkpoint EOS differs from the config")
    else:
        state = make_initial_state(
            preset or cfg.preset, cfg.amplitude, cfg.grid, eos, cfg.rho_star
        )
        start_step = 0

    records = []
    last_step = [start_step]

    def sampler(step, st, prev, dt):
        last_step[0] = step
        prev_rec = records[-1] if records else None
        records.append(
            diagnostics.sample(st, prev, dt, eos, cfg.weights,
                               eps_floor=eps_floor, prev_record=prev_rec)
        )

    observers = [sampler]
    if cfg.checkpoint_cadence > 0:
        def checkpointer(step, st, prev, dt):
            if step > 0 and step % cfg.checkpoint_cadence == 0:
                write_checkpoint(
                    st, os.path.join(out_dir, f"ckpt_{step:08d}.bin"),
                    eos, step=step, cfg_hash=digest,
                )
        observers.append(checkpointer)

    final = integrate(state, eos, cfg.step, observers=observers,
                      cadence=cfg.sample_cadence, start_step=start_step)
    diagnostics.write_csv(records, os.path.join(out_dir, "diagnostics.csv"))
    write_checkpoint(final, os.path.join(out_dir, "final.bin"), eos,
                     step=last_step[0], cfg_hash=digest)
    return records, final


def energy_balance_summary(records, eos):
    """Cumulative energy identity over the sampled run: the deficit
    |dE + integral of dissipation| relative to the dissipated energy."""
    if len(records) < 2:
        return {"dissipated": 0.0, "imbalance": 0.0, "relative": 0.0, "monotone": True}
    t = np.array([r.t for r in records])
    diss = np.array([eos.bulk * r.l2_div_u**2 + eos.mu * r.l2_curl_u**2 for r in records])
    dissipated = float(np.trapezoid(diss, t))
    d_e = records[-1].energy - records[0].energy
    imbalance = abs(d_e + dissipated)
    e = np.array([r.energy for r in records])
    slack = 1e-12 * max(abs(e[0]), 1e-300)
    monotone = bool(np.all(np.diff(e) <= slack))
    return {
        "dissipated": dissipated,
        "imbalance": imbalance,
        "relative": imbalance / dissipated if dissipated > 0 else 0.0,
        "monotone": monotone,
    }


def _series(records, column):
    return [(r.t, getattr(r, column)) for r in records]


def _fit_columns(records, columns, window=None):
    fits = {}
    for col in columns:
        fits[col] = diagnostics.fit_decay(_series(records, col), window=window)
    return fits


DECAY_COLUMNS = ("l2_drho", "l2_sqrho_u", "l2_grad_u", "l2_sqrho_udot")


def _theorem1(cfg: RunConfig, out_dir, resume):
    records, _ = run_simulation(cfg, out_dir, resume=resume)
    failures = []
    fits = _fit_columns(records, DECAY_COLUMNS)
    for col, fit in fits.items():
        if not fit.rate > 0:
            failures.append(f"{col}: fitted rate {fit.rate:.4g} is not positive")
        if not fit.r_squared >= 0.98:
            failures.append(f"{col}: R^2 {fit.r_squared:.4f} below 0.98")
    field_rates = [fits[c].rate for c in ("l2_drho", "l2_sqrho_u", "l2_grad_u")]
    for i in range(len(field_rates)):
        for j in range(i + 1, len(field_rates)):
            lo, hi = sorted((field_rates[i], field_rates[j]))
            if lo > 0 and hi / lo > 2.0:
                failures.append(
                    f"field rates differ by more than 2x: {field_rates}"
                )
    balance = energy_balance_summary(records, cfg.eos)
    if not balance["monotone"]:
        failures.append("total energy is not monotone non-increasing")
    mono = diagnostics.lyapunov_monotonicity(records, cfg.weights)
    summary = {
        "rates": {c: vars(f) for c, f in fits.items()},
        "energy_balance": balance,
        "lyapunov": mono,
        "samples": len(records),
    }
    plots = None
    if cfg.plots:
        plots = os.path.join(out_dir, "decay.svg")
        emit_plot(
            [(c, [r.t for r in records], [getattr(r, c) for r in records])
             for c in DECAY_COLUMNS],
            plots,
            fits=[(c, fits[c]) for c in DECAY_COLUMNS],
            title="exponential decay of the perturbation norms",
            ylabel="norm",
        )
    return failures, summary, plots


def _theorem1_positive(cfg: RunConfig, out_dir, resume):
    records, _ = run_simulation(cfg, out_dir, resume=resume, preset="positive-floor")
    failures = []
    fit = diagnostics.fit_decay(_series(records, "linf_drho"))
    if not fit.rate > 0:
        failures.append(f"linf_drho: fitted rate {fit.rate:.4g} is not positive")
    if not fit.r_squared >= 0.95:
        failures.append(f"linf_drho: R^2 {fit.r_squared:.4f} below 0.95")
    bounds = diagnostics.track_density_bounds(records)
    c0_emp = bounds["inf_min_rho"]
    lower = records[0].min_rho * bounds["lower_bound_factor"]
    if not c0_emp > 0:
        failures.append(f"empirical density lower bound {c0_emp:.4g} is not positive")
    if not c0_emp >= 0.95 * lower:
        failures.append(
            f"min density {c0_emp:.6g} undercuts the transport bound {lower:.6g} "
            "by more than the 5% quadrature slack"
        )
    summary = {
        "linf_fit": vars(fit),
        "c0_emp": c0_emp,
        "transport_lower_bound": lower,
        "density_bounds": bounds,
        "samples": len(records),
    }
    plots = None
    if cfg.plots:
        plots = os.path.join(out_dir, "linf_decay.svg")
        emit_plot(
            [("linf_drho", [r.t for r in records], [r.linf_drho for r in records])],
            plots, fits=[("linf_drho", fit)],
            title="sup-norm decay with positive floor", ylabel="norm",
        )
    return failures, summary, plots


VACUUM_TOL = 1e-10


def _theorem2_vacuum(cfg: RunConfig, out_dir, resume):
    records, _ = run_simulation(cfg, out_dir, resume=resume, preset="vacuum-point")
    failures = []
    worst = max(r.min_rho for r in records)
    persisted = worst <= VACUUM_TOL
    if not persisted:
        failures.append(
            f"vacuum filled in: max over samples of min rho = {worst:.3e} > {VACUUM_TOL}"
        )
    t_mid = records[0].t + 0.5 * (records[-1].t - records[0].t)
    late = [r.l4_grad_rho for r in records if r.t >= t_mid]
    initial = records[0].l4_grad_rho
    grad_ok = bool(late) and min(late) >= 0.5 * initial
    if not grad_ok:
        failures.append(
            f"L4 density-gradient norm decayed: late min {min(late) if late else 0:.4g} "
            f"vs initial {initial:.4g}"
        )
    summary = {
        "vacuum_persisted": persisted,
        "max_min_rho": worst,
        "l4_grad_rho_initial": initial,
        "l4_grad_rho_late_min": min(late) if late else None,
        "density_bounds": diagnostics.track_density_bounds(records),
        "samples": len(records),
    }
    plots = None
    if cfg.plots:
        plots = os.path.join(out_dir, "vacuum.svg")
        emit_plot(
            [
                ("min_rho", [r.t for r in records], [r.min_rho for r in records]),
                ("l4_grad_rho", [r.t for r in records], [r.l4_grad_rho for r in records]),
            ],
            plots, title="vacuum persistence", ylabel="value",
        )
    return failures, summary, plots


def _restrict(fine, factor=2):
    """Average factor^3 blocks of a cell array down to the coarse grid."""
    n = [s // factor for s in fine.shape]
    out = fine.reshape(n[0], factor, n[1], factor, n[2], factor)
    return out.mean(axis=(1, 3, 5))


def _convergence(cfg: RunConfig, out_dir, resume):
    os.makedirs(out_dir, exist_ok=True)
    failures = []
    reports = operators.measure_stencil_orders((16, 32, 64))
    for rep in reports:
        if not rep.observed_order >= 1.5:
            failures.append(
                f"operator {rep.operator}: observed order {rep.observed_order:.3f} < 1.5"
            )

    # short-time solution self-convergence on a dyadic grid triple
    t_end = min(cfg.step.t_end, 0.05)
    resolutions = (8, 16, 32)
    finals = []
    for n in resolutions:
        grid = build_grid((cfg.grid.lx, cfg.grid.ly, cfg.grid.lz), (n, n, n))
        state = make_initial_state("smooth-perturbation", cfg.amplitude, grid, cfg.eos)
        ctl = StepControl(
            cfl_advective=cfg.step.cfl_advective,
            cfl_viscous=cfg.step.cfl_viscous,
            dt_min=cfg.step.dt_min,
            dt_max=cfg.step.dt_max,
            t_end=t_end,
            eps_floor=cfg.step.eps_floor,
        )
        finals.append(integrate(state, cfg.eos, ctl))
    e_coarse = float(np.sqrt(np.mean(
        (_restrict(finals[1].rho.interior) - finals[0].rho.interior) ** 2)))
    e_fine = float(np.sqrt(np.mean(
        (_restrict(finals[2].rho.interior) - finals[1].rho.interior) ** 2)))
    ratio = e_coarse / e_fine if e_fine > 0 else math.inf
    if not ratio >= 2.0:
        failures.append(f"solution self-convergence ratio {ratio:.3f} < 2")
    summary = {
        "stencils": [vars(r) for r in reports],
        "solution_errors": {"coarse_pair": e_coarse, "fine_pair": e_fine, "ratio": ratio},
        "t_end": t_end,
    }
    return failures, summary, None


def _probes(cfg: RunConfig, out_dir, resume):
    os.makedirs(out_dir, exist_ok=True)
    failures = []
    summary = {}
    resolutions = (16, 32)
    for kind in ("poincare", "divcurl"):
        maxima = {}
        for n in resolutions:
            grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
            rep = diagnostics.inequality_probe(kind, cfg.probe_trials, grid, seed=cfg.seed)
            if not math.isfinite(rep.max_ratio):
                failures.append(f"{kind} probe at N={n}: non-finite ratio")
            maxima[n] = rep.max_ratio
            summary[f"{kind}_N{n}"] = {
                "max_ratio": rep.max_ratio,
                "trials": rep.trials,
                "skipped": rep.skipped,
            }
        drift = abs(maxima[32] - maxima[16]) / maxima[16]
        summary[f"{kind}_drift"] = drift
        if not drift <= 0.15:
            failures.append(f"{kind} probe drift {drift:.3f} exceeds 15%")

    # analytic check: u = (sin pi x, 0, 0) has ratio 1/pi
    from .grid import FACE, VectorField, fill_vector_field

    grid = build_grid((1.0, 1.0, 1.0), (32, 32, 32))
    u = VectorField.zeros(grid, FACE)
    u.component_interior(0)[...] = np.sin(np.pi * grid.face_coords(0))[:, None, None]
    fill_vector_field(u)
    l2u = diagnostics.lp_norm(u, 2)
    dn = diagnostics.lp_norm(operators.divergence(u), 2)
    cn = diagnostics._edge_l2(operators.curl(u))
    ratio = l2u / math.sqrt(dn**2 + cn**2)
    summary["analytic_poincare_ratio"] = ratio
    summary["analytic_expected"] = 1.0 / math.pi
    if not abs(ratio - 1.0 / math.pi) <= 0.01 / math.pi:
        failures.append(
            f"analytic Poincare ratio {ratio:.6f} deviates from 1/pi by more than 1%"
        )
    return failures, summary, None


_RUNNERS = {
    "theorem1": _theorem1,
    "theorem1-positive": _theorem1_positive,
    "theorem2-vacuum": _theorem2_vacuum,
    "convergence": _convergence,
    "probes": _probes,
}


def run_experiment(name, cfg: RunConfig, out_dir=None, resume=None) -> ExitReport:
    """Run one named experiment; the report carries the verdict and every
    failed assertion, and the same list lands in summary.json."""
    if name not in _RUNNERS:
        raise ConfigurationError(
            f"unknown experiment {name!r}; choose from {EXPERIMENTS}"
        )
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    failures, summary, plot_path = _RUNNERS[name](cfg, out_dir, resume)
    report = ExitReport(
        name=name,
        passed=not failures,
        failures=failures,
        summary=summary,
        artifacts={
            "out_dir": out_dir,
            "csv": os.path.join(out_dir, "diagnostics.csv"),
            "summary": os.path.join(out_dir, "summary.json"),
            "plot": plot_path,
        },
    )
    payload = {
        "experiment": name,
        "passed": report.passed,
        "failures": failures,
        "summary": summary,
    }
    _atomic_write(
        os.path.join(out_dir, "summary.json"),
        json.dumps(payload, indent=2, default=_json_default, sort_keys=True),
    )
    return report
