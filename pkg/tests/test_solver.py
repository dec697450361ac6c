import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipevo.errors import ParameterError, StructuralError
from lipevo.function_spaces import build_frame
from lipevo.grid import SpectralGrid
from lipevo.kernels import KernelFamily
from lipevo.solver import (PanelForcing, SpaceTimeFunction, TimeGrid, apply_operator,
                           mild_solve, plain_multiplier, self_convergence, strong_residual,
                           uniqueness_probe)
from lipevo.symbols import TimeCoefficient, make_custom, make_fractional

PW = TimeCoefficient.piecewise([(0.0, 1.0), (0.5, 3.0)])


@pytest.fixture(scope="module")
def heat():
    return KernelFamily(make_fractional(2, 1.0), SpectralGrid(1, 1024, 20.0))


def test_gaussian_evolution(heat):
    # exp(-x^2/2) under the heat flow: (1 + 2t)^-1/2 exp(-x^2 / (2 (1 + 2t)))
    g = heat.grid
    u = mild_solve(heat, g.sample(lambda x: np.exp(-x ** 2 / 2)), None, TimeGrid(1.0, 16))
    x = g.x[0]
    for t, sl in zip(u.time_grid.nodes, u.values):
        exact = np.exp(-x ** 2 / (2 * (1 + 2 * t))) / np.sqrt(1 + 2 * t)
        assert np.abs(sl - exact).max() <= 1e-12


def test_constant_forcing_gives_linear_growth(heat):
    g = heat.grid
    u = mild_solve(heat, g.constant(0.0), lambda t, x: np.ones_like(x), TimeGrid(1.0, 8))
    for t, sl in zip(u.time_grid.nodes, u.values):
        assert np.abs(sl - t).max() <= 1e-13


def test_zero_data_gives_zero(heat):
    rep = uniqueness_probe(heat, 1.0)
    assert rep.sup_norm <= 1e-12 and rep.shell_max <= 1e-12
    assert rep.sup_norm == 0.0


def test_time_dependent_mode_decay():
    # a single mode under a piecewise coefficient decays by exp(-|xi|^1.5 int a)
    g = SpectralGrid(1, 256, math.pi)
    fam = KernelFamily(make_fractional(1.5, PW), g)
    u = mild_solve(fam, g.plane_wave([3]), None, TimeGrid(1.0, 10))
    for t, sl in zip(u.time_grid.nodes, u.values):
        decay = math.exp(-3 ** 1.5 * PW.integral(0.0, t))
        assert np.abs(sl - decay * g.plane_wave([3]).values).max() <= 1e-13


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    g = SpectralGrid(1, 128, 5.0)
    fam = KernelFamily(make_fractional(1.5, PW), g)
    rng = np.random.default_rng(seed)
    tg = TimeGrid(1.0, 16)
    u1, u2 = (g.function(rng.normal(size=128)) for _ in range(2))
    f1, f2 = (SpaceTimeFunction(tg, g, rng.normal(size=(17, 128))) for _ in range(2))
    lhs = mild_solve(fam, u1 * a + u2 * b, f1 * a + f2 * b, tg).values
    rhs = a * mild_solve(fam, u1, f1, tg).values + b * mild_solve(fam, u2, f2, tg).values
    assert np.abs(lhs - rhs).max() <= 1e-11 * (1 + np.abs(rhs).max())


def test_semigroup_restart():
    g = SpectralGrid(1, 256, 10.0)
    fam = KernelFamily(make_fractional(1.5, PW), g)
    u0 = g.sample(lambda x: np.exp(-x ** 2))
    full = mild_solve(fam, u0, None, TimeGrid(1.0, 16))
    first = mild_solve(fam, u0, None, TimeGrid(0.5, 8))
    second = mild_solve(fam, first[8], None, TimeGrid(1.0, 8, start=0.5))
    assert np.abs(second.values[-1] - full.values[-1]).max() <= 1e-13


def test_apply_operator_matches_plain_multiplier():
    g = SpectralGrid(2, 64, 4.0)
    frame = build_frame(g)
    psi = make_fractional(1.5, PW, d=2)
    f = g.sample(lambda x, y: np.exp(-x * x - 2 * y * y) * np.cos(3 * x))
    for t in (0.2, 0.7):
        a = apply_operator(psi, frame, t, f).values
        b = plain_multiplier(psi, t, f).values
        assert np.abs(a - b).max() <= 1e-12 * np.abs(b).max()


def _smooth_problem():
    g = SpectralGrid(1, 256, 10.0)
    fam = KernelFamily(make_fractional(2, 1.0), g)
    u0 = g.sample(lambda x: np.exp(-x ** 2))

    def f(t, x):
        return np.cos(2 * np.pi * t) * np.exp(-(x - 1) ** 2)

    return fam, u0, f


def _residual(fam, u0, f, n_t):
    tg = TimeGrid(1.0, n_t)
    u = mild_solve(fam, u0, f, tg)
    fs = SpaceTimeFunction.sample(tg, fam.grid, f)
    return strong_residual(fam.symbol, fam.frame, u, u0, fs)


def test_residual_order_two():
    fam, u0, f = _smooth_problem()
    res = [_residual(fam, u0, f, n) for n in (64, 128, 256, 512)]
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) >= 2 - 0.05, orders
    assert res[-1] < 1e-5


def test_residual_detects_perturbation():
    fam, u0, f = _smooth_problem()
    tg = TimeGrid(1.0, 512)
    u = mild_solve(fam, u0, f, tg)
    fs = SpaceTimeFunction.sample(tg, fam.grid, f)
    clean = strong_residual(fam.symbol, fam.frame, u, u0, fs)
    bumped = u.values.copy()
    bumped[256] += 1e-3 * np.exp(-fam.grid.x[0] ** 2)
    dirty = strong_residual(fam.symbol, fam.frame, SpaceTimeFunction(tg, fam.grid, bumped), u0, fs)
    assert dirty > 100 * clean


def test_stationary_solution():
    # u = exp(-x^2) is stationary for the forcing -u''
    g = SpectralGrid(1, 512, 12.0)
    fam = KernelFamily(make_fractional(2, 1.0), g)
    u0 = g.sample(lambda x: np.exp(-x ** 2))
    lap = plain_multiplier(fam.symbol, 0.0, u0).values
    u = mild_solve(fam, u0, lambda t, x: -lap, TimeGrid(1.0, 16))
    assert np.abs(u.values - u0.values[None]).max() <= 1e-12


def test_self_convergence_shrinks():
    g = SpectralGrid(1, 256, 10.0)
    fam = KernelFamily(make_fractional(1.5, PW), g)
    u0 = g.sample(lambda x: np.exp(-x ** 2))

    def f(t, x):
        return np.sin(3 * t) * np.exp(-x ** 2)

    a = self_convergence(fam, u0, f, 1.0, 16)
    b = self_convergence(fam, u0, f, 1.0, 32)
    assert b < a / 3


def test_panel_forcing_exact_average(heat):
    g = heat.grid
    tg = TimeGrid(1.0, 8)
    vals = np.stack([np.full(g.shape, float(k)) for k in range(8)])
    u = mild_solve(heat, g.constant(0.0), PanelForcing(tg, g, vals))
    # forcing k on panel k integrates to dt * sum(k)
    cum = np.concatenate([[0.0], np.cumsum(np.arange(8) * tg.dt)])
    for c, sl in zip(cum, u.values):
        assert np.abs(sl - c).max() <= 1e-13


def test_custom_smooth_symbol_solve():
    # psi = -(1 + t) xi^2: a mode decays by exp(-xi^2 (t + t^2 / 2))
    g = SpectralGrid(1, 64, math.pi)
    psi = make_custom(lambda t, c: -(1 + t) * c[0] ** 2, gamma=2, kappa=1.0,
                      piecewise_constant=False)
    fam = KernelFamily(psi, g)
    u = mild_solve(fam, g.plane_wave([2]), None, TimeGrid(1.0, 8))
    decay = math.exp(-4 * 1.5)
    assert np.abs(u.values[-1] - decay * g.plane_wave([2]).values).max() <= 1e-10


def test_structural_errors(heat):
    other = SpectralGrid(1, 64, 1.0)
    with pytest.raises(StructuralError):
        mild_solve(heat, other.constant(0.0), None, TimeGrid(1.0, 8))
    with pytest.raises(StructuralError):
        mild_solve(heat, heat.grid.constant(0.0), lambda t, x: x)
    with pytest.raises(StructuralError):
        TimeGrid(1.0, 4)
    with pytest.raises(ParameterError):
        TimeGrid(0.0, 8)
    with pytest.raises(StructuralError):
        SpaceTimeFunction(TimeGrid(1.0, 8), heat.grid, np.zeros((8, 1024)))
