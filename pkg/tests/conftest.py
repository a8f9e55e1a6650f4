"""Shared desk-scale fixtures: solver outputs reused across test modules."""

import numpy as np
import pytest

from lpde.fields import EquationSpec, InitialConditionParams
from lpde.grid import Grid1D, Grid2D
from lpde.solvers import (
    sample_initial_condition,
    solve_burgers,
    solve_kdv,
    solve_ks,
    taylor_green_field,
)

BURGERS_DESK = dict(length=2 * np.pi, horizon=15.0, nx=256, nt=128)


def make_burgers_fields(count, seed, nx=256, nt=128, length=2 * np.pi, horizon=15.0,
                        nu_range=(0.002, 0.007), amplitude=0.1):
    """Desk-regime exact Burgers samples (integer-frequency profile keeps the
    Cole-Hopf exponent inside the f64 envelope; failed draws retried)."""
    grid = Grid1D(nx, length)
    fields = []
    i = 0
    while len(fields) < count:
        rng = np.random.default_rng((seed, i, 0))
        i += 1
        params = InitialConditionParams.sample(
            rng, amplitude_scale=amplitude, frequency_scale=10.0,
            frequency_offset=2.0, integer_frequencies=True,
        )
        nu = float(rng.uniform(*nu_range))
        try:
            fields.append(
                solve_burgers(
                    sample_initial_condition(params, grid),
                    EquationSpec("burgers", length, horizon, nu),
                    nt,
                    params=params,
                )
            )
        except Exception:
            continue
    return fields


def make_1d_fields(equation, count, seed, nx=128, nt=256, length=64.0, horizon=40.0):
    grid = Grid1D(nx, length)
    solve = solve_kdv if equation == "kdv" else solve_ks
    fields = []
    for i in range(count):
        rng = np.random.default_rng((seed, i))
        params = InitialConditionParams.sample(rng)
        fields.append(
            solve(
                sample_initial_condition(params, grid),
                EquationSpec(equation, length, horizon, None),
                nt,
                params=params,
            )
        )
    return fields


def make_tg_fields(count, seed, n=64, nt=16, horizon=2.0):
    rng = np.random.default_rng(seed)
    return [
        taylor_green_field(float(rng.uniform(0.005, 0.05)), Grid2D(n, n), nt, horizon)
        for _ in range(count)
    ]


@pytest.fixture(scope="session")
def burgers_fields():
    return make_burgers_fields(5, seed=101)


@pytest.fixture(scope="session")
def kdv_fields():
    return make_1d_fields("kdv", 5, seed=102)


@pytest.fixture(scope="session")
def ks_fields():
    return make_1d_fields("ks", 5, seed=103)


@pytest.fixture(scope="session")
def tg_fields():
    return make_tg_fields(3, seed=104)


@pytest.fixture(scope="session")
def burgers_analytic():
    """Single-mode Cole-Hopf solution with a closed-form heat oracle."""
    length, horizon, nu = 16.0, 10.0, 0.005
    grid = Grid1D(256, length)
    kap = 2 * np.pi / length
    phi0 = 2 + np.cos(kap * grid.nodes)
    u0 = -2 * nu * (-kap * np.sin(kap * grid.nodes)) / phi0
    field = solve_burgers(u0, EquationSpec("burgers", length, horizon, nu), 256)
    return field, nu, kap
