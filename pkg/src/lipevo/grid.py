"""Periodic spectral grids on the torus [-L, L)^d.

Frequency-domain arrays are kept in FFT order (the order of ``numpy.fft.fftfreq``);
``SpectralGrid.frequencies`` exposes the sorted per-axis lattice for inspection.
The transform pair is unitary-normalized:

    F(xi) ~ (2 pi)^(-d/2) * integral f(x) exp(-i x.xi) dx

so that a symbol acts as a plain pointwise multiplier and
``forward(f * g) = (2 pi)^(d/2) forward(f) forward(g)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ParameterError, StructuralError

PHYSICAL = "physical"
FREQUENCY = "frequency"


@dataclass(frozen=True)
class SpectralGrid:
    d: int
    n_per_axis: int
    half_width: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise StructuralError(f"dimension must be 1 or 2, got {self.d}")
        n = self.n_per_axis
        if n < 8 or n & (n - 1):
            raise StructuralError(f"n_per_axis must be a power of two >= 8, got {n}")
        if not self.half_width > 0:
            raise ParameterError(f"half_width must be positive, got {self.half_width}")

    @property
    def shape(self):
        return (self.n_per_axis,) * self.d

    @property
    def size(self):
        return self.n_per_axis ** self.d

    @property
    def dx(self):
        return 2.0 * self.half_width / self.n_per_axis

    @property
    def dxi(self):
        return np.pi / self.half_width

    @property
    def cell_volume(self):
        return self.dx ** self.d

    @property
    def nyquist(self):
        return np.pi / self.dx

    def refined(self, factor=2):
        return SpectralGrid(self.d, self.n_per_axis * factor, self.half_width)

    @cached_property
    def x_axis(self):
        return -self.half_width + self.dx * np.arange(self.n_per_axis)

    @cached_property
    def xi_axis(self):
        """Per-axis frequencies pi*k/L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_per_axis, d=self.dx)

    @property
    def frequencies(self):
        """Sorted per-axis lattice pi*k/L, k in [-n/2, n/2)."""
        return np.fft.fftshift(self.xi_axis)

    @cached_property
    def x(self):
        """Coordinate arrays, one per axis, each of grid shape."""
        return tuple(np.meshgrid(*([self.x_axis] * self.d), indexing="ij"))

    @cached_property
    def xi(self):
        return tuple(np.meshgrid(*([self.xi_axis] * self.d), indexing="ij"))

    @cached_property
    def abs_x(self):
        return np.sqrt(sum(c * c for c in self.x))

    @cached_property
    def abs_xi(self):
        return np.sqrt(sum(c * c for c in self.xi))

    @cached_property
    def _phase(self):
        # exp(i L xi_k) = (-1)^k; k and its FFT index share parity since n is even
        s = np.where(np.arange(self.n_per_axis) % 2 == 0, 1.0, -1.0)
        out = s
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, s)
        return out

    @property
    def forward_scale(self):
        return self.dx ** self.d / (2.0 * np.pi) ** (self.d / 2)

    def function(self, values, domain=PHYSICAL):
        return GridFunction(self, values, domain)

    def sample(self, func, domain=PHYSICAL):
        """Evaluate ``func(*coords)`` on the physical (or frequency) lattice."""
        coords = self.x if domain == PHYSICAL else self.xi
        vals = np.broadcast_to(func(*coords), self.shape)
        return GridFunction(self, vals, domain)

    def constant(self, c):
        return GridFunction(self, np.full(self.shape, c, dtype=complex))

    def delta(self):
        """Discrete Dirac mass of total integral 1 at x = 0."""
        v = np.zeros(self.shape, dtype=complex)
        v[(self.n_per_axis // 2,) * self.d] = 1.0 / self.cell_volume
        return GridFunction(self, v)

    def plane_wave(self, mode):
        """exp(i xi0.x) for the on-grid frequency xi0 = (pi/L) * mode."""
        mode = np.atleast_1d(mode)
        if mode.shape != (self.d,):
            raise StructuralError("mode must have one integer per axis")
        # xi0 . x = 2 pi m j / n - pi m; reduce m j mod n in integers to keep
        # the samples exact to rounding regardless of |xi0| L
        n = self.n_per_axis
        idx = np.meshgrid(*([np.arange(n)] * self.d), indexing="ij")
        r = sum(int(m) * j for m, j in zip(mode, idx)) % n
        sign = -1.0 if int(np.sum(mode)) % 2 else 1.0
        return GridFunction(self, sign * np.exp(2j * np.pi * r / n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: SpectralGrid
    values: np.ndarray = field(repr=False)
    domain: str = PHYSICAL

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise StructuralError(
                f"expected {self.grid.size} samples, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        if self.domain not in (PHYSICAL, FREQUENCY):
            raise StructuralError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "values", vals)

    def _check(self, other):
        if not isinstance(other, GridFunction):
            return
        if other.grid != self.grid:
            raise StructuralError("grid functions live on different grids")
        if other.domain != self.domain:
            raise StructuralError("cannot combine physical and frequency samples")

    def __add__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.grid, self.values + o, self.domain)

    __radd__ = __add__

    def __sub__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.grid, self.values - o, self.domain)

    def __neg__(self):
        return GridFunction(self.grid, -self.values, self.domain)

    def __mul__(self, other):
        self._check(other)
        o = other.values if isinstance(other, GridFunction) else other
        return GridFunction(self.grid, self.values * o, self.domain)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return GridFunction(self.grid, self.values / c, self.domain)

    @property
    def real(self):
        return self.values.real

    def flat(self):
        """Row-major sample vector."""
        return self.values.reshape(-1)


def _require(f, domain):
    if not isinstance(f, GridFunction):
        raise StructuralError(f"expected a GridFunction, got {type(f).__name__}")
    if f.domain != domain:
        raise StructuralError(f"expected a {domain}-domain function, got {f.domain}")


def forward_transform(f):
    _require(f, PHYSICAL)
    g = f.grid
    vals = np.fft.fftn(f.values) * g._phase * g.forward_scale
    return GridFunction(g, vals, FREQUENCY)


def inverse_transform(F):
    _require(F, FREQUENCY)
    g = F.grid
    vals = np.fft.ifftn(F.values * g._phase) / g.forward_scale
    return GridFunction(g, vals, PHYSICAL)


def apply_multiplier(f, multiplier):
    """Return F^{-1}[m F[f]] for a multiplier sampled in FFT order."""
    _require(f, PHYSICAL)
    # the unitary scale and phase cancel; go straight through numpy's pair
    return GridFunction(f.grid, np.fft.ifftn(np.fft.fftn(f.values) * multiplier))


def convolve(f, g):
    """Periodic convolution integral f(x - y) g(y) dy on the torus."""
    _require(f, PHYSICAL)
    _require(g, PHYSICAL)
    if f.grid != g.grid:
        raise StructuralError("convolution operands live on different grids")
    grid = f.grid
    c = np.fft.ifftn(np.fft.fftn(f.values) * np.fft.fftn(g.values))
    # x_i - y_j sits at index i - j + n/2 on the [-L, L) lattice
    c = np.roll(c, -(grid.n_per_axis // 2), axis=tuple(range(grid.d)))
    return GridFunction(grid, c * grid.cell_volume)


def lp_norm(f, p):
    if not isinstance(f, GridFunction):
        raise StructuralError("lp_norm expects a GridFunction")
    a = np.abs(f.values)
    if p == np.inf or p == "inf":
        return float(a.max())
    g = f.grid
    w = g.cell_volume if f.domain == PHYSICAL else g.dxi ** g.d
    if p == 1:
        return float(a.sum() * w)
    if p == 2:
        return float(np.sqrt((a * a).sum() * w))
    raise ParameterError(f"lp_norm supports p in {{1, 2, inf}}, got {p!r}")
