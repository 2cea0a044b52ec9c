"""Shared oracles and cached data builders for the test suite."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import minsurf.gordon as gordon
from minsurf.gordon import build_family, solution_from_fields
from minsurf.immersion import GridSpec


def ode_profile(sigma, nonlin, a0, xs, da0=0.0):
    """High-order solution of g'' = 2 sigma N(2 g) sampled on xs."""
    sol = solve_ivp(lambda t, z: [z[1], 2.0 * sigma * nonlin(2.0 * z[0])],
                    (xs[0], xs[-1]), [a0, da0], t_eval=xs,
                    rtol=1e-13, atol=1e-15, method="DOP853")
    assert sol.success
    return sol.y[0], sol.y[1]


def oracle_family(theorem, v0, w0, xmax, n, t=0.3):
    """Family data built from exact 1-D x-profiles of the Gordon pair."""
    eps, p, b, kind, branch, qn = gordon.FAMILY_TABLE[theorem]
    nonlin = np.sinh if "sinh" in kind else np.sin
    sv, sw = gordon.KINDS[kind][2]
    spec = GridSpec(n, n, xmax / (n - 1), xmax / (n - 1), (0.0, 0.0))
    xs, _ = spec.axes()
    v1, dv1 = ode_profile(-sv, nonlin, v0, xs)
    w1, dw1 = ode_profile(-sw, nonlin, w0, xs)
    V = np.repeat(v1[:, None], n, axis=1)
    W = np.repeat(w1[:, None], n, axis=1)
    VX = np.repeat(dv1[:, None], n, axis=1)
    WX = np.repeat(dw1[:, None], n, axis=1)
    Z = np.zeros_like(V)
    sol = solution_from_fields(kind, eps, spec, V, W, VX, Z, WX, Z)
    return build_family(theorem, sol, t=t)


# gentle profiles staying inside each admissible region with margin
FAMILY_CASES = {
    "A1": (1.0, 0.15, 0.25),
    "A2": (0.2, 1.2, 0.3),
    "B1": (0.25, 0.3, 0.4),
    "B2": (1.45, 0.15, 0.2),
    "C1": (0.5, 0.1, 0.4),
    "C2": (0.5, 0.1, 0.4),
}


@pytest.fixture(scope="session")
def family_cache():
    cache = {}

    def get(theorem, n, t=0.3):
        key = (theorem, n, t)
        if key not in cache:
            v0, w0, xmax = FAMILY_CASES[theorem]
            cache[key] = oracle_family(theorem, v0, w0, xmax, n, t)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def example_cache():
    from minsurf.surfaces import build_example
    cache = {}

    def get(name, nx=65):
        key = (name, nx)
        if key not in cache:
            cache[key] = build_example(name, nx=nx)
        return cache[key]

    return get


def interior_region(spec_or_grid, margin):
    """Boolean field of points at least `margin` inside the domain box."""
    xs, ys = spec_or_grid.axes()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    return ((X >= xs[0] + margin) & (X <= xs[-1] - margin)
            & (Y >= ys[0] + margin) & (Y <= ys[-1] - margin))


def ratio_table(coarse: dict, fine: dict, floor=1e-11):
    """Convergence ratios for matching finite entries above a noise floor."""
    out = {}
    for k, v in coarse.items():
        f = fine.get(k)
        if f is None or not np.isfinite(v) or not np.isfinite(f):
            continue
        if f <= floor and v <= floor:
            out[k] = np.inf
        elif f > 0:
            out[k] = v / f
    return out
