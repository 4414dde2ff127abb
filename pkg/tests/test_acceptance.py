"""Acceptance gate: one test per headline claim, one PASS/FAIL line each.

The long runs come from the cached session fixtures in conftest.py, so a
green suite can be reproduced without repeating hours of integration
(delete .acceptance_cache/ to force fresh runs).
"""

import math
import os

import numpy as np
import pytest

from conftest import CACHE_DIR, cached_json
from slipns import diagnostics, elliptic, operators
from slipns.config import parse_config
from slipns.grid import (
    FACE,
    ScalarField,
    VectorField,
    build_grid,
    fill_scalar_field,
    fill_vector_field,
    make_initial_state,
)
from slipns.solver import integrate


def verdict(num, name, ok, detail):
    line = f"criterion {num:02d} [{name}]: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_mass_conservation(mass_run):
    mean = np.array(mass_run["mean_rho"])
    drift = float(np.max(np.abs(mean - mean[0])) / mean[0])
    elapsed = mass_run["elapsed"]
    ok = drift <= 1e-12 and mass_run["steps"] == 10000 and elapsed <= 1800.0
    verdict(1, "mass conservation", ok,
            f"relative drift {drift:.3e} over {mass_run['steps']} steps, "
            f"{elapsed:.0f}s")


def test_criterion_02_energy_balance(energy_runs):
    rel = {}
    monotone = {}
    for n in ("32", "64"):
        run = energy_runs[n]
        t = np.array(run["t"])
        e = np.array(run["energy"])
        dissipated = float(np.trapezoid(np.array(run["dissipation"]), t))
        rel[n] = abs((e[-1] - e[0]) + dissipated) / dissipated
        monotone[n] = bool(np.all(np.diff(e) <= 1e-12 * e[0]))
    factor = rel["32"] / rel["64"]
    ok = (monotone["32"] and monotone["64"]
          and rel["32"] <= 0.02 and rel["64"] <= 0.006 and factor >= 3.0)
    verdict(2, "energy identity", ok,
            f"imbalance {rel['32']:.4%} at N=32, {rel['64']:.4%} at N=64, "
            f"factor {factor:.2f}, monotone {monotone['32'] and monotone['64']}")


DECAY_COLUMNS = ("l2_drho", "l2_sqrho_u", "l2_grad_u", "l2_sqrho_udot")
FIELD_COLUMNS = ("l2_drho", "l2_sqrho_u", "l2_grad_u")


def test_criterion_03_decay_rates(theorem1_n32, theorem1_n48):
    failures = list(theorem1_n32["failures"])
    rates32 = {c: theorem1_n32["summary"]["rates"][c] for c in DECAY_COLUMNS}
    for c in DECAY_COLUMNS:
        if not (rates32[c]["rate"] > 0 and rates32[c]["r_squared"] >= 0.98):
            failures.append(f"{c} at N=32: rate {rates32[c]['rate']:.4g}, "
                            f"R2 {rates32[c]['r_squared']:.4f}")
    field = [rates32[c]["rate"] for c in FIELD_COLUMNS]
    if max(field) > 2.0 * min(field):
        failures.append(f"field rates not within factor 2: {field}")

    t48 = theorem1_n48["t"]
    drifts = {}
    for c in DECAY_COLUMNS:
        fit = diagnostics.fit_decay(list(zip(t48, theorem1_n48[c])),
                                    window=(0.4, 1.0))
        drifts[c] = abs(fit.rate - rates32[c]["rate"]) / rates32[c]["rate"]
        if drifts[c] > 0.10:
            failures.append(f"{c}: N=48 rate {fit.rate:.5g} vs N=32 "
                            f"{rates32[c]['rate']:.5g} ({drifts[c]:.2%} drift)")
    rate_text = ", ".join(
        "{}={:.4f}".format(c, rates32[c]["rate"]) for c in DECAY_COLUMNS
    )
    detail = (f"rates {rate_text}; max N=48 drift {max(drifts.values()):.2%}"
              + (f"; failures: {failures}" if failures else ""))
    verdict(3, "exponential decay", not failures, detail)


def test_criterion_04_positive_floor(posfloor_run):
    t = np.array(posfloor_run["t"])
    fit = diagnostics.fit_decay(list(zip(t, posfloor_run["linf_drho"])))
    c0_emp = float(np.min(posfloor_run["min_rho"]))
    integral = float(np.trapezoid(np.array(posfloor_run["linf_div_u"]), t))
    bound = 0.5 * math.exp(-integral)
    ok = (fit.rate > 0 and fit.r_squared >= 0.95
          and c0_emp > 0 and c0_emp >= 0.95 * bound)
    verdict(4, "sup-norm decay with positive floor", ok,
            f"rate {fit.rate:.4f}, R2 {fit.r_squared:.4f}, "
            f"min rho {c0_emp:.4f} vs transport bound {bound:.4f}")


def test_criterion_05_vacuum_persistence(vacuum_run):
    t = np.array(vacuum_run["t"])
    min_rho = np.array(vacuum_run["min_rho"])
    worst = float(np.max(min_rho))
    l4 = np.array(vacuum_run["l4_grad_rho"])
    late = l4[t >= t[0] + 0.5 * (t[-1] - t[0])]
    ok = worst <= 1e-10 and late.size > 0 and float(late.min()) >= 0.5 * l4[0]
    verdict(5, "vacuum persistence", ok,
            f"max of min rho {worst:.2e}, late L4 gradient "
            f"{float(late.min()) if late.size else 0:.4f} vs initial {l4[0]:.4f}")


def mean_zero_rhs(grid, seed):
    f = ScalarField.zeros(grid)
    f.interior[...] = np.random.default_rng(seed).normal(size=grid.shape)
    f.interior[...] -= f.interior.mean()
    return f


def gradient_ratio(n, seed):
    grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
    f = mean_zero_rhs(grid, seed)
    B, _, stats = elliptic.solve_stokes_dirichlet(f, tol=1e-8)
    assert stats.converged
    return elliptic.dirichlet_gradient_norm(B) / diagnostics.lp_norm(f, 2)


def test_criterion_06_bogovskii():
    grid = build_grid((1.0, 1.0, 1.0), (32, 32, 32))
    f = mean_zero_rhs(grid, 0)
    fill_scalar_field(f)
    B, _, stats = elliptic.solve_stokes_dirichlet(f, tol=1e-8)
    fill_vector_field(B)
    resid = diagnostics.lp_norm(
        operators.divergence(B).interior - f.interior, 2, grid
    ) / diagnostics.lp_norm(f, 2)

    g = grid.ghost
    walls_exact = all(
        np.all(B.components[d].take(g, axis=d) == 0.0)
        and np.all(B.components[d].take(B.components[d].shape[d] - 1 - g, axis=d) == 0.0)
        for d in range(3)
    )

    def produce():
        out = {}
        for n in (16, 32):
            out[str(n)] = max(gradient_ratio(n, seed) for seed in range(50))
        return out

    maxima = cached_json("bogovskii_gradient_drift", produce)
    drift = abs(maxima["32"] - maxima["16"]) / maxima["16"]

    from test_elliptic import dense_saddle_solution

    small = build_grid((1.0, 1.0, 1.0), (6, 6, 6))
    fs = mean_zero_rhs(small, 3)
    Bs, _, st6 = elliptic.solve_stokes_dirichlet(fs, tol=1e-11, max_iter=2000)
    Bd = dense_saddle_solution(small, fs.interior)
    dense_err = max(
        float(np.max(np.abs(Bs.components[d] - Bd.components[d]))) for d in range(3)
    )

    ok = (resid <= 1e-8 and walls_exact and drift <= 0.15
          and st6.converged and dense_err <= 1e-6)
    verdict(6, "Bogovskii solve", ok,
            f"residual {resid:.2e}, walls exact {walls_exact}, "
            f"gradient drift {drift:.2%}, dense oracle error {dense_err:.2e}")


def test_criterion_07_inequality_probes():
    maxima = {}
    for kind in ("poincare", "divcurl"):
        for n in (16, 32):
            grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
            rep = diagnostics.inequality_probe(kind, 50, grid, seed=0)
            maxima[(kind, n)] = rep.max_ratio
    drifts = {
        kind: abs(maxima[(kind, 32)] - maxima[(kind, 16)]) / maxima[(kind, 16)]
        for kind in ("poincare", "divcurl")
    }

    grid = build_grid((1.0, 1.0, 1.0), (32, 32, 32))
    u = VectorField.zeros(grid, FACE)
    u.component_interior(0)[...] = np.sin(np.pi * grid.face_coords(0))[:, None, None]
    fill_vector_field(u)
    dn = diagnostics.lp_norm(operators.divergence(u), 2)
    cn = diagnostics._edge_l2(operators.curl(u))
    analytic = diagnostics.lp_norm(u, 2) / math.sqrt(dn**2 + cn**2)

    finite = all(math.isfinite(v) for v in maxima.values())
    ok = (finite and max(drifts.values()) <= 0.15
          and abs(analytic - 1 / math.pi) <= 0.01 / math.pi)
    verdict(7, "inequality probes", ok,
            f"analytic ratio {analytic:.5f} vs 1/pi {1 / math.pi:.5f}, "
            f"drifts {drifts['poincare']:.2%}/{drifts['divcurl']:.2%}")


def test_criterion_08_operators():
    # linear exactness
    grid = build_grid((1.0, 1.0, 1.0), (16, 16, 16))
    u = VectorField.zeros(grid, FACE)
    u.component_interior(0)[...] = grid.face_coords(0)[:, None, None] * np.ones(
        (1, grid.ny, grid.nz)
    )
    u.ghosts_filled = True
    lin = float(np.max(np.abs(operators.divergence(u).interior - 1.0)))

    from slipns.cli import _sbp_residual

    sbp = max(_sbp_residual(16, seed) for seed in range(3))

    # discrete identity: laplacian = grad div - curl curl, exactly
    from slipns.diagnostics import _random_slip_field

    w = fill_vector_field(_random_slip_field(grid, np.random.default_rng(8)))
    lap = operators.laplacian_vector(w, 1.0, -1.0)
    div = operators.divergence(w)
    fill_scalar_field(div)
    gd = operators.gradient(div)
    cc = operators.curl(operators.curl(w))
    ident = max(
        float(np.max(np.abs(
            lap.component_interior(d)
            - gd.component_interior(d)
            + cc.component_interior(d)
        ))) for d in range(3)
    )
    scale = max(float(np.max(np.abs(lap.component_interior(0)))), 1.0)

    reports = operators.measure_stencil_orders((16, 32, 64))
    min_order = min(r.observed_order for r in reports)

    ok = (lin <= 1e-12 and sbp <= 1e-12 and ident <= 1e-11 * scale
          and min_order >= 1.5)
    verdict(8, "operator correctness", ok,
            f"linear exactness {lin:.1e}, SBP defect {sbp:.1e}, "
            f"identity defect {ident / scale:.1e}, min order {min_order:.2f}")


def momentum_residual_at(n):
    cfg = parse_config(f"[grid]\nnx = {n}\nny = {n}\nnz = {n}\n"
                       "[step]\nt_end = 0.02\n")
    eos = cfg.eos
    eps = cfg.step.resolve_eps_floor(eos)
    state = make_initial_state("smooth-perturbation", 0.05, cfg.grid, eos)
    holder = {}

    def obs(step, st, prev, dt):
        if prev is not None:
            holder["pair"] = (prev, st, dt)

    final = integrate(state, eos, cfg.step, observers=[obs], cadence=1)
    prev, curr, dt = holder["pair"]
    udot, _ = operators.material_acceleration(prev, curr, dt, eps)
    return operators.momentum_residual(curr, udot, eos, eps)


def test_criterion_09_momentum_residual():
    res = cached_json(
        "momentum_residual_pair",
        lambda: {str(n): momentum_residual_at(n) for n in (32, 64)},
    )
    ratio = res["32"] / res["64"]
    ok = res["32"] <= 0.05 and ratio >= 2.0
    verdict(9, "momentum-form residual", ok,
            f"residual {res['32']:.4f} at N=32, {res['64']:.4f} at N=64, "
            f"ratio {ratio:.2f}")


DETERMINISM_CFG = """
[grid]
nx = 12
ny = 12
nz = 12

[step]
t_end = 0.2

[run]
sample_cadence = 10
checkpoint_cadence = 50
"""


def test_criterion_10_determinism(tmp_path):
    from slipns.experiments import run_simulation

    cfg = parse_config(DETERMINISM_CFG)
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / tag
        run_simulation(cfg, out)
        outs.append(out)
    csv_equal = (outs[0] / "diagnostics.csv").read_bytes() == (
        outs[1] / "diagnostics.csv"
    ).read_bytes()

    ckpts = sorted(p for p in os.listdir(outs[0]) if p.startswith("ckpt_"))
    resumed = tmp_path / "resumed"
    run_simulation(cfg, resumed, resume=str(outs[0] / ckpts[0]))
    resume_equal = (outs[0] / "final.bin").read_bytes() == (
        resumed / "final.bin"
    ).read_bytes()

    ok = csv_equal and resume_equal
    verdict(10, "determinism and persistence", ok,
            f"CSV bytes equal {csv_equal}, resume bitwise equal {resume_equal}")
