#!/usr/bin/env python3
"""Timing comparison of the compiled and numpy stencil backends.

Usage: python3 bench/benchmark_backends.py [N ...]
"""

import sys
import time

import numpy as np

from slipns._kernels import get_backend
from slipns.grid import FACE, EosParams, build_grid, make_initial_state
from slipns.operators import default_eps_floor


def time_call(fn, repeats=20):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1e3


def bench(n):
    grid = build_grid((1.0, 1.0, 1.0), (n, n, n))
    eos = EosParams()
    state = make_initial_state("smooth-perturbation", 0.05, grid, eos)
    eps = default_eps_floor(eos)
    g = grid.ghost
    h = grid.spacing
    rho = state.rho.values
    mx, my, mz = state.mom.components

    backends = {}
    for name in ("numpy", "cython"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"{name} backend unavailable, skipping")
    if len(backends) < 2:
        return

    kernels = {}
    for name, impl in backends.items():
        ux, uy, uz = impl.velocity_faces(rho, mx, my, mz, eps, g)
        kernels[name] = {
            "velocity_faces": lambda i=impl: i.velocity_faces(rho, mx, my, mz, eps, g),
            "mass_flux_divergence": lambda i=impl: i.mass_flux_divergence(
                rho, ux, uy, uz, *h, g),
            "momentum_advection": lambda i=impl: i.momentum_advection(
                mx, my, mz, ux, uy, uz, *h, g),
            "gradient": lambda i=impl: i.gradient(rho, *h, g),
            "divergence": lambda i=impl: i.divergence(ux, uy, uz, *h, g),
            "curl_face_to_edge": lambda i=impl: i.curl_face_to_edge(ux, uy, uz, *h, g),
        }

    print(f"\nN = {n}^3")
    print(f"{'kernel':<22} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for kname in kernels["numpy"]:
        t_np = time_call(kernels["numpy"][kname])
        t_cy = time_call(kernels["cython"][kname])
        print(f"{kname:<22} {t_np:>10.3f} {t_cy:>10.3f} {t_np / t_cy:>8.2f}x")

    # whole right-hand side through each backend
    import slipns._kernels as K
    import slipns.solver as S

    saved = {f: getattr(K, f) for f in K._FUNCS}
    totals = {}
    for name, impl in backends.items():
        for f in K._FUNCS:
            setattr(K, f, getattr(impl, f))
        totals[name] = time_call(lambda: S.compute_rhs(state, eos, eps), repeats=10)
    for f, fn in saved.items():
        setattr(K, f, fn)
    print(f"{'compute_rhs':<22} {totals['numpy']:>10.3f} {totals['cython']:>10.3f} "
          f"{totals['numpy'] / totals['cython']:>8.2f}x")


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [32, 48]
    for n in sizes:
        bench(n)
