"""Seeded band-limited test data.

Every function is a finite sum of cosines at on-grid frequencies pi m / L, so
the same object can be sampled on a grid and on its refinement (same L) without
any change to its Fourier content.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .function_spaces import build_frame


@dataclass(frozen=True, eq=False)
class BandLimited:
    """sum_k amp_k cos(pi m_k . x / L + phase_k)."""

    half_width: float
    modes: np.ndarray = field(repr=False)
    amps: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    constant: float = 0.0

    def values(self, grid):
        if grid.half_width != self.half_width:
            raise ConfigurationError("band-limited datum built for a different torus")
        n = grid.n_per_axis
        idx = np.meshgrid(*([np.arange(n)] * grid.d), indexing="ij")
        out = np.full(grid.shape, self.constant, dtype=float)
        for m, a, ph in zip(self.modes, self.amps, self.phases):
            # pi m x / L = 2 pi m j / n - pi m, reduced in integers
            r = sum(int(mi) * j for mi, j in zip(np.atleast_1d(m), idx)) % n
            shift = np.pi * (int(np.sum(m)) % 2)
            out += a * np.cos(2 * np.pi * r / n - shift + ph)
        return out

    def on(self, grid):
        return grid.function(self.values(grid))

    def scaled(self, c):
        return BandLimited(self.half_width, self.modes, self.amps * c, self.phases,
                           self.constant * c)


def random_band_limited(grid, rng, sigma, shells=None, per_shell=3, constant=None):
    """Random real datum with amplitudes ~ 2^(-j sigma) on shells j in [1, j_max - 2]."""
    frame = build_frame(grid)
    lo, hi = shells or (1, frame.j_max - 2)
    modes, amps, phases = [], [], []
    dxi = grid.dxi
    for j in range(lo, hi + 1):
        for _ in range(per_shell):
            r = 2.0 ** (j + rng.uniform(-0.4, 0.4))
            if grid.d == 1:
                m = (max(1, int(round(r / dxi))),)
            else:
                th = rng.uniform(0, 2 * np.pi)
                m = (int(round(r * np.cos(th) / dxi)), int(round(r * np.sin(th) / dxi)))
                if m == (0, 0):
                    m = (1, 0)
            modes.append(m)
            amps.append(2.0 ** (-j * sigma) * rng.uniform(0.5, 1.5))
            phases.append(rng.uniform(0, 2 * np.pi))
    c = rng.uniform(-1, 1) if constant is None else constant
    return BandLimited(grid.half_width, np.array(modes), np.array(amps), np.array(phases), c)


def norm_corpus(grid, seed=0, size=20):
    """Twenty functions of varied smoothness and shell spread."""
    rng = np.random.default_rng(seed)
    frame = build_frame(grid)
    top = frame.j_max - 2
    out = []
    for i in range(size):
        sigma = [0.2, 0.5, 0.8, 1.2, 2.0][i % 5]
        lo = 1 + (i // 5) % 3
        hi = max(lo, top - (i // 10))
        out.append(random_band_limited(grid, rng, sigma, (lo, hi), per_shell=2 + i % 3))
    return out


@dataclass(frozen=True, eq=False)
class ForcingDatum:
    """f(t, x) = sum_i c_i(t) g_i(x) with smooth time profiles."""

    parts: tuple
    freqs: np.ndarray = field(repr=False)
    phases: np.ndarray = field(repr=False)
    scale: float = 1.0

    def callable(self, grid):
        gs = [g.values(grid) for g in self.parts]

        def f(t, *x):
            out = 0.0
            for g, w, ph in zip(gs, self.freqs, self.phases):
                out = out + np.cos(w * t + ph) * g
            return self.scale * out

        return f

    def scaled(self, c):
        return ForcingDatum(self.parts, self.freqs, self.phases, self.scale * c)


def apriori_corpus(grid, seed=0, size=10, sigma_u0=2.0, sigma_f=1.0):
    """Pairs (u0, f) of band-limited initial data and smooth-in-time forcing."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(size):
        u0 = random_band_limited(grid, rng, sigma_u0)
        parts = tuple(random_band_limited(grid, rng, sigma_f, constant=0.0) for _ in range(2))
        f = ForcingDatum(parts, rng.uniform(0.5, 6.0, 2), rng.uniform(0, 2 * np.pi, 2))
        out.append((u0, f))
    return out


def random_sequences(rng, window, size):
    """Nonnegative, not identically zero sequences of length ``window``."""
    out = []
    for _ in range(size):
        a = rng.uniform(0, 1, window) * (rng.uniform(0, 1, window) < 0.7)
        if not a.any():
            a[rng.integers(window)] = 1.0
        out.append(a)
    return out
