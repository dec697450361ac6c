"""Blockwise operator application, mild solutions and strong-solution residuals.

The Duhamel integral is advanced with the exponential-integrator recursion

    v_k = exp(E(t_k, t_{k-1})) v_{k-1} + q_k f_k,   q_k = int_{t_{k-1}}^{t_k} exp(E(t_k, s)) ds,

in frequency space, where E(t, s) = int_s^t psi(r, xi) dr and f_k is the
forcing frozen on panel k.  By the semigroup property of exp(E) this is the
same quantity as summing every panel's contribution separately for each output
time; q_k is exact for coefficients that are piecewise constant in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError, StructuralError
from .function_spaces import shell_sup_norms
from .grid import PHYSICAL, GridFunction

GAUSS_NODES = 16


@dataclass(frozen=True)
class TimeGrid:
    T: float
    n_t: int
    start: float = 0.0

    def __post_init__(self):
        if self.n_t < 8:
            raise StructuralError(f"time grid needs n_t >= 8, got {self.n_t}")
        if not self.T > self.start:
            raise ParameterError("time horizon must exceed the start time")

    @property
    def dt(self):
        return (self.T - self.start) / self.n_t

    @property
    def nodes(self):
        return self.start + self.dt * np.arange(self.n_t + 1)

    def refined(self, factor=2):
        return TimeGrid(self.T, self.n_t * factor, self.start)


@dataclass(frozen=True, eq=False)
class SpaceTimeFunction:
    """Samples u(t_k, x) with shape (n_t + 1, *grid.shape)."""

    time_grid: TimeGrid
    grid: object
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        shape = (self.time_grid.n_t + 1,) + self.grid.shape
        if v.shape != shape:
            raise StructuralError(f"expected samples of shape {shape}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, time_grid, grid, func):
        """Build from ``func(t, *x)``."""
        vals = np.stack([np.broadcast_to(func(t, *grid.x), grid.shape)
                         for t in time_grid.nodes])
        return cls(time_grid, grid, vals)

    @classmethod
    def zeros(cls, time_grid, grid):
        return cls(time_grid, grid, np.zeros((time_grid.n_t + 1,) + grid.shape))

    @property
    def slices(self):
        return [GridFunction(self.grid, v) for v in self.values]

    def __getitem__(self, k):
        return GridFunction(self.grid, self.values[k])

    def __add__(self, other):
        o = other.values if isinstance(other, SpaceTimeFunction) else other
        return SpaceTimeFunction(self.time_grid, self.grid, self.values + o)

    def __sub__(self, other):
        o = other.values if isinstance(other, SpaceTimeFunction) else other
        return SpaceTimeFunction(self.time_grid, self.grid, self.values - o)

    def __mul__(self, c):
        return SpaceTimeFunction(self.time_grid, self.grid, self.values * c)

    __rmul__ = __mul__

    def sup_norms(self):
        axes = tuple(range(1, self.values.ndim))
        return np.abs(self.values).max(axis=axes)


@dataclass(frozen=True, eq=False)
class PanelForcing:
    """Forcing given directly by one value per time panel (e.g. exact panel averages)."""

    time_grid: TimeGrid
    grid: object
    values: np.ndarray = field(repr=False)


def blockwise_filter(frame):
    """Sum of (Phi + Psi_1) Phi and (Psi_{j-1} + Psi_j + Psi_{j+1}) Psi_j over j >= 1."""
    b = frame.bands

    def band(j):
        return b.get(j, 0.0)

    out = (frame.phi_hat + band(1)) * frame.phi_hat
    for j in frame.positive_bands:
        out = out + (band(j - 1) + band(j) + band(j + 1)) * band(j)
    return out


def apply_operator(psi, frame, t, f):
    """psi(t, -i grad) f as the sum of its S0 piece and its Delta_j pieces."""
    if f.grid != frame.grid:
        raise StructuralError("function and frame live on different grids")
    if f.domain != PHYSICAL:
        raise StructuralError("apply_operator expects a physical-domain function")
    hat = np.fft.fftn(f.values) * psi.evaluate(t, frame.grid.xi) * blockwise_filter(frame)
    return GridFunction(f.grid, np.fft.ifftn(hat))


def plain_multiplier(psi, t, f):
    """F^{-1}[psi(t, .) F f]."""
    hat = np.fft.fftn(f.values) * psi.evaluate(t, f.grid.xi)
    return GridFunction(f.grid, np.fft.ifftn(hat))


def _pieces(psi, lo, hi):
    knots = [lo] + [b for b in psi.breakpoints(lo, hi)] + [hi]
    return list(zip(knots[:-1], knots[1:]))


def panel_coefficients(psi, xi, lo, hi):
    """(exp(E(hi, lo)), int_lo^hi exp(E(hi, s)) ds) on the frequency grid."""
    total_exp = np.ones(np.shape(xi[0]), dtype=complex)
    q = np.zeros_like(total_exp)
    # walk pieces from the right end so exp(E(hi, b)) is known for each piece
    for a, b in reversed(_pieces(psi, lo, hi)):
        if psi.piecewise_constant:
            c = psi.evaluate(0.5 * (a + b), xi)
            z = c * (b - a)
            with np.errstate(divide="ignore", invalid="ignore"):
                phi1 = np.where(np.abs(z) > 1e-8, np.expm1(z) / np.where(z == 0, 1, z),
                                1 + z / 2 + z * z / 6)
            q = q + total_exp * phi1 * (b - a)
            total_exp = total_exp * np.exp(z)
        else:
            nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
            s = a + (b - a) * (nodes + 1) / 2
            for si, wi in zip(s, weights):
                q = q + total_exp * np.exp(psi.exponent(si, b, xi)) * wi * (b - a) / 2
            total_exp = total_exp * np.exp(psi.exponent(a, b, xi))
    return total_exp, q


def _panel_forcing(f, time_grid, grid):
    n = time_grid.n_t
    if f is None:
        return None
    if isinstance(f, SpaceTimeFunction):
        if f.time_grid != time_grid or f.grid != grid:
            raise StructuralError("forcing lives on a different space-time grid")
        return lambda k: 0.5 * (f.values[k - 1] + f.values[k])
    if isinstance(f, PanelForcing):
        if f.values.shape != (n,) + grid.shape:
            raise StructuralError("panel forcing needs one slice per panel")
        return lambda k: f.values[k - 1]
    if callable(f):
        nodes = time_grid.nodes
        return lambda k: np.broadcast_to(f(0.5 * (nodes[k - 1] + nodes[k]), *grid.x),
                                         grid.shape)
    raise StructuralError(f"unsupported forcing type {type(f).__name__}")


def _piece_key(psi, t):
    if psi.family == "fractional":
        return float(psi.coefficient(t))
    if psi.family == "elliptic_matrix":
        return tuple(float(e(t)) for row in psi.coefficient for e in row)
    return None


def mild_solve(family, u0, f=None, time_grid=None):
    """Mild solution p(t,0) * u0 + int_0^t p(t,s) * f(s) ds on the time nodes.

    ``f`` may be a SpaceTimeFunction (frozen on each panel at the mean of its
    endpoint values), a PanelForcing, a callable ``f(t, *x)`` (evaluated at
    panel midpoints) or None.
    """
    grid = family.grid
    if u0.grid != grid:
        raise StructuralError("initial datum lives on a different grid")
    if time_grid is None:
        if not isinstance(f, (SpaceTimeFunction, PanelForcing)):
            raise StructuralError("a time grid is required for this forcing")
        time_grid = f.time_grid
    force = _panel_forcing(f, time_grid, grid)
    psi = family.symbol
    nodes = time_grid.nodes
    axes = tuple(range(grid.d))
    out = np.empty((time_grid.n_t + 1,) + grid.shape, dtype=complex)
    out[0] = u0.values
    v = np.fft.fftn(u0.values)
    cache = {}
    for k in range(1, time_grid.n_t + 1):
        lo, hi = nodes[k - 1], nodes[k]
        key = None
        if psi.piecewise_constant and not psi.breakpoints(lo, hi):
            # panels inside one constant piece share their coefficients
            key = _piece_key(psi, 0.5 * (lo + hi))
        if key is not None and key in cache:
            ex, q = cache[key]
        else:
            ex, q = panel_coefficients(psi, grid.xi, lo, hi)
            if key is not None:
                cache[key] = (ex, q)
        v = ex * v
        if force is not None:
            v = v + q * np.fft.fftn(force(k), axes=axes)
        out[k] = np.fft.ifftn(v)
    return SpaceTimeFunction(time_grid, grid, out)


def strong_residual(psi, frame, u, u0, f=None):
    """max_k ||u(t_k) - u0 - int_0^{t_k} (psi u + f) ds||_inf with the trapezoid rule."""
    tg = u.time_grid
    nodes = tg.nodes
    rhs = np.stack([apply_operator(psi, frame, t, s).values
                    for t, s in zip(nodes, u.slices)])
    if f is not None:
        rhs = rhs + (f.values if isinstance(f, SpaceTimeFunction) else f)
    integral = np.zeros_like(rhs)
    integral[1:] = np.cumsum(0.5 * tg.dt * (rhs[1:] + rhs[:-1]), axis=0)
    res = u.values - u0.values[None] - integral
    axes = tuple(range(1, res.ndim))
    return float(np.abs(res).max(axis=axes).max())


@dataclass
class UniquenessReport:
    sup_norm: float
    shell_max: float


def uniqueness_probe(family, T, n_t=64):
    """Mild solution from zero data: its sup norm and largest shell sup norm."""
    grid = family.grid
    u = mild_solve(family, grid.constant(0.0), None, TimeGrid(T, n_t))
    s0, shells = shell_sup_norms(family.frame, u.values)
    return UniquenessReport(float(u.sup_norms().max()),
                            float(max(np.max(s0), np.max(shells))))


def self_convergence(family, u0, f_callable, T, n_t):
    """sup-distance between solutions on n_t and 2 n_t steps, at common nodes."""
    a = mild_solve(family, u0, f_callable, TimeGrid(T, n_t))
    b = mild_solve(family, u0, f_callable, TimeGrid(T, 2 * n_t))
    return float(np.abs(a.values - b.values[::2]).max())
