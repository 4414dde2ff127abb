"""Monitored quantities, decay-rate fits, and functional-inequality probes.

Everything here is read-only over flow snapshots. A DiagnosticsRecord
holds one sample of every monitored norm and functional; `sample` fills
it from a pair of consecutive states, `fit_decay` extracts empirical
exponential rates from a series of records, and the probe/tracking
helpers post-process whole runs.
"""

import csv
import io
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import operators
from .elliptic import bogovskii_pairing
from .errors import ConfigurationError
from .grid import (
    FACE,
    EosParams,
    FlowState,
    ScalarField,
    VectorField,
    fill_scalar_field,
    fill_scalar_ghosts,
    relative_entropy_G,
)

SUPPORTED_P = (1, 2, 3, 4, 6, math.inf)


@dataclass
class LyapunovWeights:
    """Combination weights D1..D5; the theory only demands "large enough",
    so positive-definiteness along the run is verified, not assumed."""

    D1: float = 20.0
    D2: float = 10.0
    D3: float = 20.0
    D4: float = 10.0
    D5: float = 20.0

    def __post_init__(self):
        for name in ("D1", "D2", "D3", "D4", "D5"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"Lyapunov weight {name} must be positive")


@dataclass
class DiagnosticsRecord:
    t: float = 0.0
    l2_drho: float = 0.0
    linf_drho: float = 0.0
    l2_sqrho_u: float = 0.0
    l2_grad_u: float = 0.0
    l2_div_u: float = 0.0
    l2_curl_u: float = 0.0
    l2_sqrho_udot: float = 0.0
    int_G: float = 0.0
    energy: float = 0.0
    int_F: float = 0.0
    int_F2: float = 0.0
    linf_F: float = 0.0
    min_rho: float = 0.0
    max_rho: float = 0.0
    M1: float = 0.0
    M2: float = 0.0
    M3: float = 0.0
    pairing: float = 0.0
    momentum_residual: float = 0.0
    energy_balance_residual: float = 0.0
    linf_div_u: float = 0.0
    l4_grad_rho: float = 0.0
    boundary_term_M3: float = 0.0  # flat walls: grad n = 0, identically zero
    mask_fraction: float = 0.0
    error_flag: bool = False


CSV_COLUMNS = tuple(f.name for f in fields(DiagnosticsRecord))


def lp_norm(obj, p, grid=None):
    """Midpoint-rule Lp norm over interior cells (or faces for vectors).

    Vector fields use the componentwise quadrature (sum of component
    integrals for finite p, max over components for p = inf), which is
    the natural choice on a staggered grid.
    """
    if p not in SUPPORTED_P:
        raise ConfigurationError(f"unsupported p={p}; choose from {SUPPORTED_P}")
    if isinstance(obj, ScalarField):
        arrays = [obj.interior]
        vol = obj.grid.cell_volume
    elif isinstance(obj, VectorField):
        arrays = [obj.component_interior(d) for d in range(3)]
        vol = obj.grid.cell_volume
    else:
        if grid is None:
            raise ConfigurationError("lp_norm of a bare array needs the grid")
        arrays = [np.asarray(obj)]
        vol = grid.cell_volume
    if p == math.inf:
        return max(float(np.max(np.abs(a))) if a.size else 0.0 for a in arrays)
    total = sum(float(np.sum(np.abs(a) ** p)) for a in arrays)
    return (vol * total) ** (1.0 / p)


def _face_quadrature_sq(weight_list, value_list, vol):
    """vol * sum over faces of weight * value^2, accumulated per axis."""
    total = 0.0
    for w, v in zip(weight_list, value_list):
        total += float(np.sum(w * np.square(v)))
    return vol * total


def _integral(arr, vol):
    return vol * float(np.sum(arr))


def sample(state: FlowState, prev_state, dt, eos: EosParams, weights: LyapunovWeights,
           eps_floor=None, prev_record=None) -> DiagnosticsRecord:
    """Populate one DiagnosticsRecord from a snapshot.

    prev_state/dt feed the backward-difference material acceleration and
    the interval energy balance; at the first sample pass prev_state=None
    and the acceleration reduces to its advective part. Solver failures in
    the Bogovskii solve leave NaNs behind an error flag rather than
    aborting the run.
    """
    state.require_filled("diagnostics sample")
    if eps_floor is None:
        eps_floor = operators.default_eps_floor(eos)
    grid = state.grid
    vol = grid.cell_volume
    rec = DiagnosticsRecord(t=state.t)

    rho_i = state.rho.interior
    rec.min_rho = float(rho_i.min())
    rec.max_rho = float(rho_i.max())
    drho = rho_i - eos.rho_bar
    rec.l2_drho = lp_norm(drho, 2, grid)
    rec.linf_drho = lp_norm(drho, math.inf, grid)

    u = operators.velocity_from_momentum(state.rho, state.mom, eps_floor)
    rho_faces = [np.maximum(rf, 0.0) for rf in operators.face_densities(state.rho)]
    u_int = [u.component_interior(d) for d in range(3)]
    rec.l2_sqrho_u = math.sqrt(_face_quadrature_sq(rho_faces, u_int, vol))

    divu = operators.divergence(u)
    curlu = operators.curl(u)
    rec.l2_div_u = lp_norm(divu, 2)
    rec.linf_div_u = lp_norm(divu, math.inf)
    rec.l2_curl_u = _edge_l2(curlu)
    # slip walls: <-Lap u, u> = ||div u||^2 + ||curl u||^2 exactly, which is
    # the quadrature used for the velocity gradient throughout
    rec.l2_grad_u = math.sqrt(rec.l2_div_u**2 + rec.l2_curl_u**2)

    rec.int_G = _integral(relative_entropy_G(np.maximum(rho_i, 0.0), eos), vol)
    rec.energy = 0.5 * rec.l2_sqrho_u**2 + rec.int_G

    F = operators.effective_viscous_flux(state, eos, eps_floor)
    rec.int_F = _integral(F.interior, vol)
    rec.int_F2 = _integral(np.square(F.interior), vol)
    rec.linf_F = lp_norm(F, math.inf)

    grho = _density_gradient(state.rho)
    rec.l4_grad_rho = lp_norm(grho, 4)

    if prev_state is not None and dt > 0:
        udot, rec.mask_fraction = operators.material_acceleration(
            prev_state, state, dt, eps_floor
        )
    else:
        udot = operators._advective_term(u)
        rec.mask_fraction = 0.0
    udot_int = [udot.component_interior(d) for d in range(3)]
    rec.l2_sqrho_udot = math.sqrt(_face_quadrature_sq(rho_faces, udot_int, vol))
    rec.momentum_residual = operators.momentum_residual(state, udot, eos, eps_floor)

    try:
        rec.pairing = bogovskii_pairing(state, eos)
    except Exception:
        rec.pairing = float("nan")
        rec.error_flag = True

    p = eos.pressure(np.maximum(rho_i, 0.0))
    p_bar = float(p.mean())
    cross = _integral((p - p_bar) * divu.interior, vol)
    dissip_quad = 0.5 * (eos.bulk * rec.l2_div_u**2 + eos.mu * rec.l2_curl_u**2)
    rec.M1 = weights.D1 * rec.energy - rec.pairing
    rec.M2 = weights.D3 * rec.M1 + dissip_quad - cross + weights.D2 * rec.l2_drho**2
    rec.M3 = (
        weights.D5 * rec.M2
        + rec.l2_sqrho_udot**2
        + rec.boundary_term_M3
        + weights.D4 * rec.l2_drho**2
    )

    if prev_record is not None and rec.t > prev_record.t:
        span = rec.t - prev_record.t
        d_prev = eos.bulk * prev_record.l2_div_u**2 + eos.mu * prev_record.l2_curl_u**2
        d_curr = eos.bulk * rec.l2_div_u**2 + eos.mu * rec.l2_curl_u**2
        dissipated = 0.5 * (d_prev + d_curr) * span
        imbalance = rec.energy - prev_record.energy + dissipated
        rec.energy_balance_residual = (
            abs(imbalance) / dissipated if dissipated > 0 else abs(imbalance)
        )
    return rec


def _edge_l2(w: VectorField):
    """L2 norm of an edge-centered field over interior edges."""
    vol = w.grid.cell_volume
    total = sum(float(np.sum(np.square(w.component_interior(d)))) for d in range(3))
    return math.sqrt(vol * total)


def _density_gradient(rho: ScalarField) -> VectorField:
    return operators.gradient(rho if rho.ghosts_filled else fill_scalar_field(rho))


@dataclass
class DecayFit:
    t0: float
    t1: float
    amplitude: float
    rate: float
    r_squared: float
    samples: int
    floored: int = 0
    constant: bool = False


def fit_decay(series, window=None):
    """Least-squares exponential fit y ~= C exp(-eta t) on (t, log y).

    series is an iterable of (t, y) with y >= 0. Samples outside the
    window or below 1e3 * eps * max(y) are excluded (the count of floored
    points is reported). Needs at least 10 usable samples.
    """
    pts = [(float(t), float(y)) for t, y in series]
    if not pts:
        raise ConfigurationError("fit_decay needs a nonempty series")
    if window is None:
        t_all = [t for t, _ in pts]
        t0 = t_all[0] + 0.4 * (t_all[-1] - t_all[0])
        t1 = t_all[-1]
    else:
        t0, t1 = (float(w) for w in window)
    ymax = max(y for _, y in pts)
    if ymax <= 0:
        raise ConfigurationError("fit_decay needs a series with positive values")
    floor = 1e3 * np.finfo(float).eps * ymax
    inside = [(t, y) for t, y in pts if t0 <= t <= t1]
    used = [(t, y) for t, y in inside if y > floor]
    floored = len(inside) - len(used)
    if len(used) < 10:
        raise ConfigurationError(
            f"fit_decay needs >= 10 usable samples in the window, got {len(used)}"
        )
    t = np.array([p[0] for p in used])
    logy = np.log(np.array([p[1] for p in used]))
    slope, intercept = np.polyfit(t, logy, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    if ss_tot == 0.0:
        # constant series: rate 0 by definition, goodness undefined
        return DecayFit(t0, t1, math.exp(intercept), 0.0, float("nan"),
                        len(used), floored, constant=True)
    r2 = 1.0 - ss_res / ss_tot
    return DecayFit(t0, t1, math.exp(intercept), -slope, r2, len(used), floored)


def track_density_bounds(records):
    """Run-level density extrema plus the transport lower-bound factor.

    Returns a dict with inf/sup of the sampled extrema, the trapezoid
    quadrature of ||div u||_inf over time, and the resulting multiplicative
    factor exp(-integral): a run started at floor rho_* should keep
    min rho >= rho_* * lower_bound_factor.
    """
    if not records:
        raise ConfigurationError("track_density_bounds needs at least one record")
    t = np.array([r.t for r in records])
    dinf = np.array([r.linf_div_u for r in records])
    integral = float(np.trapezoid(dinf, t)) if len(records) > 1 else 0.0
    return {
        "inf_min_rho": min(r.min_rho for r in records),
        "sup_max_rho": max(r.max_rho for r in records),
        "sup_min_rho": max(r.min_rho for r in records),
        "int_linf_div_u": integral,
        "lower_bound_factor": math.exp(-integral),
    }


def pressure_evolution_residual(prev: FlowState, curr: FlowState, dt, eos: EosParams,
                                eps_floor=None):
    """Normalized L2 residual of the pressure-perturbation transport law
    (P-Pbar)_t + u.grad(P-Pbar) + gamma P div u - (gamma-1) mean(P div u)."""
    if dt <= 0:
        raise ConfigurationError("pressure_evolution_residual needs dt > 0")
    prev.require_filled("pressure_evolution_residual")
    curr.require_filled("pressure_evolution_residual")
    if eps_floor is None:
        eps_floor = operators.default_eps_floor(eos)
    grid = curr.grid
    g = grid.ghost
    vol = grid.cell_volume

    def perturbation(state):
        p = eos.pressure(np.maximum(state.rho.values, 0.0))
        p_bar = p[g:-g, g:-g, g:-g].mean()
        return p - p_bar

    dp_prev = perturbation(prev)
    dp_curr = perturbation(curr)
    pt = (dp_curr[g:-g, g:-g, g:-g] - dp_prev[g:-g, g:-g, g:-g]) / dt

    u = operators.velocity_from_momentum(curr.rho, curr.mom, eps_floor)
    adv = np.zeros(grid.shape)
    for d in range(3):
        uc = 0.5 * (
            u.component_interior(d).take(range(0, grid.shape[d]), axis=d)
            + u.component_interior(d).take(range(1, grid.shape[d] + 1), axis=d)
        )
        hi = [slice(g, -g)] * 3
        lo = [slice(g, -g)] * 3
        hi[d] = slice(g + 1, dp_curr.shape[d] - g + 1)
        lo[d] = slice(g - 1, dp_curr.shape[d] - g - 1)
        adv += uc * (dp_curr[tuple(hi)] - dp_curr[tuple(lo)]) / (2.0 * grid.spacing[d])

    divu = operators.divergence(u).interior
    p_full = eos.pressure(np.maximum(curr.rho.interior, 0.0))
    pdiv = p_full * divu
    res = pt + adv + eos.gamma * pdiv - (eos.gamma - 1.0) * pdiv.mean()

    scale = math.sqrt(vol * float(np.sum(np.square(pt)))) + eos.gamma * math.sqrt(
        vol * float(np.sum(np.square(pdiv)))
    )
    norm = math.sqrt(vol * float(np.sum(np.square(res))))
    return norm / scale if scale > 0 else 0.0


@dataclass
class ProbeReport:
    kind: str
    trials: int
    skipped: int
    max_ratio: float
    ratios: list = field(default_factory=list)


def _random_slip_field(grid, rng, n_modes=3):
    """Smooth random slip-compatible field from the trigonometric basis.

    Each component uses a sine along its own axis (zero at the walls) and
    cosines across, so u.n = 0 holds exactly on every wall face.
    """
    u = VectorField.zeros(grid, FACE)
    lengths = (grid.lx, grid.ly, grid.lz)
    coeffs = rng.standard_normal((3, n_modes, n_modes, n_modes))
    for d in range(3):
        axes_1d = []
        for axis in range(3):
            coords = grid.face_coords(axis) if axis == d else grid.cell_coords(axis)
            theta = np.pi * coords / lengths[axis]
            rows = []
            for k in range(1, n_modes + 1):
                rows.append(np.sin(k * theta) if axis == d else np.cos(k * theta))
            axes_1d.append(np.array(rows))
        comp = np.einsum(
            "ijk,ia,jb,kc->abc", coeffs[d], axes_1d[0], axes_1d[1], axes_1d[2]
        )
        u.component_interior(d)[...] = comp
    return u


def inequality_probe(kind, trials, grid, seed=0, n_modes=3):
    """Empirical constants for the slip Poincare and div-curl inequalities.

    poincare: max over trials of ||u||_2 / ||grad u||_2;
    divcurl:  max over trials of ||grad u||_2 / (||div u||_2 + ||curl u||_2),
    with ||grad u||_2 the slip quadrature sqrt(||div u||^2 + ||curl u||^2).
    Degenerate trials (zero denominator) are skipped and counted.
    """
    if kind not in ("poincare", "divcurl"):
        raise ConfigurationError(f"unknown probe kind {kind!r}")
    if trials < 10:
        raise ConfigurationError("inequality_probe needs trials >= 10")
    rng = np.random.default_rng(seed)
    ratios = []
    skipped = 0
    from .grid import fill_vector_field

    for _ in range(trials):
        u = _random_slip_field(grid, rng, n_modes)
        fill_vector_field(u)
        l2u = lp_norm(u, 2)
        div_n = lp_norm(operators.divergence(u), 2)
        curl_n = _edge_l2(operators.curl(u))
        grad_n = math.sqrt(div_n**2 + curl_n**2)
        if kind == "poincare":
            num, den = l2u, grad_n
        else:
            num, den = grad_n, div_n + curl_n
        if den <= 1e3 * np.finfo(float).eps * max(num, 1.0):
            skipped += 1
            continue
        ratios.append(num / den)
    if not ratios:
        raise ConfigurationError("all probe trials degenerated to zero fields")
    return ProbeReport(kind, trials, skipped, max(ratios), ratios)


def lyapunov_monotonicity(records, weights: LyapunovWeights):
    """Empirical check of the three differential inequalities.

    For each functional M with weight D, tests the discrete form
    (M_k - M_{k-1})/dt + avg(M)/D + avg(extra)/D <= slack per interval,
    where `extra` is the dissipation companion that the theory adds
    (velocity-gradient norms for M1, acceleration norm for M2, none
    recorded for M3). Reports the holding fraction and first index of
    strict positivity for each functional.
    """
    if len(records) < 2:
        raise ConfigurationError("lyapunov_monotonicity needs at least two records")
    out = {}
    specs = [
        ("M1", weights.D1, lambda r: r.l2_div_u**2 + r.l2_curl_u**2),
        ("M2", weights.D3, lambda r: r.l2_sqrho_udot**2),
        ("M3", weights.D5, lambda r: 0.0),
    ]
    for name, D, extra in specs:
        held = 0
        total = 0
        scale = max(abs(getattr(r, name)) for r in records)
        slack = 1e-9 * max(scale, 1e-300)
        for a, b in zip(records, records[1:]):
            span = b.t - a.t
            if span <= 0:
                continue
            ma, mb = getattr(a, name), getattr(b, name)
            if ma == 0.0 and mb == 0.0:
                held += 1  # equilibrium: trivially monotone
                total += 1
                continue
            lhs = (mb - ma) / span + 0.5 * (ma + mb) / D + 0.5 * (extra(a) + extra(b)) / D
            total += 1
            if lhs <= slack:
                held += 1
        first_pos = next(
            (i for i, r in enumerate(records) if getattr(r, name) > 0), None
        )
        all_nonneg = all(getattr(r, name) >= -slack for r in records)
        out[name] = {
            "fraction_held": held / total if total else float("nan"),
            "first_positive_index": first_pos,
            "positive_definite": all_nonneg,
        }
    return out


def records_to_csv(records):
    """Serialize records to CSV text, 17 significant digits per value."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        row = []
        for name in CSV_COLUMNS:
            v = getattr(r, name)
            if isinstance(v, bool):
                row.append("1" if v else "0")
            else:
                row.append(f"{v:.17g}")
        writer.writerow(row)
    return buf.getvalue()


def write_csv(records, path):
    text = records_to_csv(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_csv_series(path, column):
    """Load one (t, column) series from a diagnostics CSV."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ConfigurationError(f"column {column!r} not present in {path}")
        out = [(float(row["t"]), float(row[column])) for row in reader]
    return out
