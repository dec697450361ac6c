"""Variable-order Lipschitz norms and the Littlewood-Paley frame.

The radial profile of F[Psi] is g(log2|xi|) where g is the exp(-1/(1-u^2))
mollifier on (-1, 1) divided by its own integer periodization.  Every band
multiplier is therefore supported in {1/2 < |xi| < 2} after dilation and the
dyadic sum is one up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, ParameterError, StructuralError
from .grid import PHYSICAL, GridFunction

S0 = "S0"


@dataclass(frozen=True, eq=False)
class PhiFunction:
    """A positive variable-order function phi on (0, inf) with upper index L."""

    kind: str
    params: tuple
    L: float
    fn: Callable = field(repr=False)

    def __call__(self, lam):
        return self.fn(np.asarray(lam, dtype=float))

    @property
    def L0(self):
        return max(1, math.ceil(self.L - 1e-12))

    @classmethod
    def power(cls, alpha, L=None):
        alpha = float(alpha)
        if not alpha > 0:
            raise ParameterError(f"power order must be positive, got {alpha}")
        L = float(L) if L is not None else math.floor(alpha) + 1.0
        if alpha >= L:
            raise ParameterError(f"lambda^{alpha} is not in I_o(0, {L})")
        return cls("power", (alpha,), L, lambda lam: lam ** alpha)

    @classmethod
    def power_log(cls, alpha, beta, L=None):
        alpha, beta = float(alpha), float(beta)
        if not alpha > 0:
            raise ParameterError(f"power order must be positive, got {alpha}")
        L = float(L) if L is not None else math.floor(alpha) + 1.0
        if alpha >= L:
            raise ParameterError(f"phi is not in I_o(0, {L})")

        def fn(lam):
            with np.errstate(divide="ignore"):
                return lam ** alpha * (1.0 + np.log(np.maximum(lam, 1.0))) ** beta

        return cls("power_log", (alpha, beta), L, fn)

    @classmethod
    def table(cls, lams, values, L):
        """Monotone table, interpolated linearly in log-log coordinates."""
        lams = np.asarray(lams, dtype=float)
        values = np.asarray(values, dtype=float)
        if np.any(values <= 0) or np.any(np.diff(lams) <= 0) or np.any(np.diff(values) < 0):
            raise ParameterError("table must be positive, increasing in lambda and monotone")
        ll, lv = np.log(lams), np.log(values)
        slope_lo = (lv[1] - lv[0]) / (ll[1] - ll[0])
        slope_hi = (lv[-1] - lv[-2]) / (ll[-1] - ll[-2])

        def fn(lam):
            x = np.log(lam)
            y = np.interp(x, ll, lv)
            y = np.where(x < ll[0], lv[0] + slope_lo * (x - ll[0]), y)
            y = np.where(x > ll[-1], lv[-1] + slope_hi * (x - ll[-1]), y)
            return np.exp(y)

        return cls("table", (tuple(lams), tuple(values)), float(L), fn)

    def s_phi(self, lams, t_grid=None):
        """Sampled s_phi(lambda) = sup_t phi(lambda t) / phi(t)."""
        t_grid = np.logspace(-12, 12, 2401) if t_grid is None else t_grid
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        num = self(lams[:, None] * t_grid[None, :])
        return (num / self(t_grid)[None, :]).max(axis=1)

    def index_check(self, eps, lams_small=None, lams_large=None):
        """Sampled form of phi in I_o(0, L).

        Returns the largest values of s_phi(l) l^-eps over small l and
        s_phi(l) l^(-L+eps) over large l; both stay bounded for members.
        """
        lams_small = np.logspace(-6, -1, 11) if lams_small is None else lams_small
        lams_large = np.logspace(1, 6, 11) if lams_large is None else lams_large
        lo = self.s_phi(lams_small) * lams_small ** (-eps)
        hi = self.s_phi(lams_large) * lams_large ** (-self.L + eps)
        return float(lo.max()), float(hi.max())


def derived_phi(phi, gamma, p, w):
    """Return (phi_gamma, phi_{gamma,p,w}).

    phi_gamma(l) = phi(l) l^gamma and phi_{gamma,p,w}(l) = phi_gamma(l) W(l^-gamma)^(1/p)
    with W the cumulative weight; for p = inf the weight factor is 1.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    phi_g = PhiFunction("derived", (phi.kind, phi.params, "gamma", gamma),
                        phi.L + gamma, lambda lam: phi(lam) * lam ** gamma)
    if p == np.inf:
        return phi_g, phi_g
    p = float(p)
    probe = w.cumulative(np.array([1.0]))
    if not np.all(np.isfinite(probe)):
        raise ParameterError("weight is not locally integrable near 0")

    def fn(lam):
        lam = np.asarray(lam, dtype=float)
        return phi(lam) * lam ** gamma * w.cumulative(lam ** (-gamma)) ** (1.0 / p)

    phi_gpw = PhiFunction("derived", (phi.kind, phi.params, "gamma", gamma, "p", p, w.label),
                          phi.L + gamma, fn)
    return phi_g, phi_gpw


def _bump(u):
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
    return out


def profile(u):
    """g(u): mollifier normalized by its integer periodization (u = log2|xi| - j)."""
    u = np.asarray(u, dtype=float)
    fr = u - np.floor(u)
    return _bump(u) / (_bump(fr) + _bump(fr - 1.0))


@dataclass(frozen=True, eq=False)
class DyadicFrame:
    grid: object
    j_min: int
    j_max: int
    j_full: int

    @cached_property
    def _log_xi(self):
        with np.errstate(divide="ignore"):
            return np.log2(self.grid.abs_xi)

    @cached_property
    def _den(self):
        u = self._log_xi
        fr = u - np.floor(np.where(np.isfinite(u), u, 0.0))
        den = _bump(fr) + _bump(fr - 1.0)
        return np.where(np.isfinite(u), den, 1.0)

    def psi_hat(self, j):
        """F[Psi](2^-j xi) on the grid, FFT order."""
        u = self._log_xi
        val = _bump(np.where(np.isfinite(u), u - j, -10.0)) / self._den
        return val

    @cached_property
    def phi_hat(self):
        u = self._log_xi
        out = np.where(u < 0, 1.0, 0.0)
        mid = (u >= 0) & (u < 1)
        out[mid] = (_bump(u[mid]) / self._den[mid])
        return out

    @cached_property
    def bands(self):
        return {j: self.psi_hat(j) for j in range(self.j_min, self.j_max + 1)}

    def multiplier(self, j):
        if j == S0:
            return self.phi_hat
        if not isinstance(j, (int, np.integer)) or not self.j_min <= j <= self.j_max:
            raise ParameterError(f"band {j} outside representable range "
                                 f"[{self.j_min}, {self.j_max}]")
        return self.bands[int(j)]

    @property
    def positive_bands(self):
        return range(1, self.j_max + 1)


def build_frame(grid):
    """Littlewood-Paley frame covering every nonzero grid frequency.

    j_min/j_max are the extreme bands touching the grid's frequency set;
    ``j_full`` is the largest band whose whole annulus lies below Nyquist.
    """
    r = grid.abs_xi[grid.abs_xi > 0]
    j_min = int(math.floor(math.log2(r.min())))
    j_max = int(math.ceil(math.log2(r.max())))
    j_full = int(math.floor(math.log2(grid.nyquist))) - 1
    if j_max < j_min + 2:
        raise ConfigurationError(f"grid too coarse for a dyadic frame: bands {j_min}..{j_max}")
    return DyadicFrame(grid, j_min, j_max, j_full)


def lp_project(frame, f, j):
    """Delta_j f (integer j) or S_0 f (j == "S0") by frequency multiplication."""
    if f.grid != frame.grid:
        raise StructuralError("function and frame live on different grids")
    m = frame.multiplier(j)
    return GridFunction(f.grid, np.fft.ifftn(np.fft.fftn(f.values) * m))


def shell_sup_norms(frame, values, hat=False):
    """(||S0 f||_inf, [||Delta_j f||_inf for j = 1..j_max]).

    ``values`` may carry leading batch axes; with ``hat=True`` it already holds
    ``numpy.fft.fftn`` coefficients over the trailing grid axes.
    """
    d = frame.grid.d
    axes = tuple(range(-d, 0))
    F = np.asarray(values) if hat else np.fft.fftn(values, axes=axes)
    s0 = np.abs(np.fft.ifftn(F * frame.phi_hat, axes=axes)).max(axis=axes)
    shells = [np.abs(np.fft.ifftn(F * frame.bands[j], axes=axes)).max(axis=axes)
              for j in frame.positive_bands]
    return s0, np.stack(shells, axis=-1)


def lp_sum(x, p, axis=-1):
    """l^p norm along ``axis`` computed relative to the largest entry.

    Scaling by the maximum keeps ``l^inf <= l^p`` exact in floating point.
    """
    x = np.abs(np.asarray(x, dtype=float))
    m = x.max(axis=axis, keepdims=True)
    if p == np.inf:
        return np.squeeze(m, axis=axis)
    safe = np.where(m > 0, m, 1.0)
    s = ((x / safe) ** p).sum(axis=axis, keepdims=True) ** (1.0 / p)
    return np.squeeze(np.where(m > 0, m * s, 0.0), axis=axis)


def dyadic_from_shells(s0, shells, weights, p):
    """Combine shell sup-norms into the dyadic Lambda^phi_p norm."""
    return s0 + lp_sum(np.asarray(shells) * weights, p)


def lipschitz_norm_dyadic(frame, f, phi, p):
    """||S0 f||_inf + || phi(2^j) ||Delta_j f||_inf ||_{l^p(j >= 1)}."""
    if p != np.inf and not p >= 1:
        raise ParameterError(f"p must lie in [1, inf], got {p}")
    if f.domain != PHYSICAL:
        raise StructuralError("expected a physical-domain function")
    s0, shells = shell_sup_norms(frame, f.values)
    weights = phi(2.0 ** np.array(list(frame.positive_bands), dtype=float))
    return float(dyadic_from_shells(s0, shells, weights, p))


def _difference(values, shift, order):
    d = values.ndim
    out = np.zeros_like(values)
    for i in range(order + 1):
        sign = (-1) ** (order - i) * math.comb(order, i)
        out = out + sign * np.roll(values, tuple(-i * s for s in shift), axis=tuple(range(d)))
    return out


def _directions(d):
    if d == 1:
        return [((1,), 2.0)]
    vecs = [(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1)]
    ang = np.array([math.atan2(b, a) for a, b in vecs])
    order = np.argsort(ang)
    ang = ang[order]
    vecs = [vecs[i] for i in order]
    prev = np.roll(ang, 1)
    prev[0] -= np.pi
    nxt = np.roll(ang, -1)
    nxt[-1] += np.pi
    arcs = 0.5 * (nxt - prev)
    # each direction also stands for its opposite
    return [(v, 2.0 * a) for v, a in zip(vecs, arcs)]


def difference_profile(f, L0=1, n_shells=None):
    """Sup-norms of L0-th differences along grid directions.

    Returns a list of ``(angular_weight, |h| array, ||D_h^L0 f||_inf array)``
    with |h| in [dx, L].  ``n_shells=None`` keeps every lattice step (used for
    suprema); otherwise steps are thinned to roughly log-spaced shells.
    """
    g = f.grid
    out = []
    for vec, weight in _directions(g.d):
        length = math.hypot(*vec) * g.dx
        kmax = int(g.half_width // length)
        if kmax < 1:
            continue
        if n_shells is None:
            ks = np.arange(1, kmax + 1)
        else:
            ks = np.unique(np.round(np.logspace(0, math.log10(kmax), n_shells)).astype(int))
        sup = np.array([np.abs(_difference(f.values, tuple(k * c for c in vec), L0)).max()
                        for k in ks])
        out.append((weight, ks * length, sup))
    return out


def direct_from_profile(sup_f, profile_data, phi, p):
    total = 0.0
    for weight, hs, sup in profile_data:
        q = phi(1.0 / hs) * sup
        if p == np.inf:
            total = max(total, float(q.max()))
        elif len(hs) > 1:
            total += weight * float(np.trapezoid(q ** p, np.log(hs)))
        else:
            total += weight * float(q[0] ** p)
    return sup_f + (total if p == np.inf else total ** (1.0 / p))


def lipschitz_norm_direct(f, phi, p, n_shells=96):
    """Finite-difference Lambda^phi_p norm.

    ||f||_inf + (int phi(1/|h|)^p ||D_h^L0 f||_inf^p dh/|h|^d)^(1/p), with the
    h-integral over |h| in [dx, L] by the trapezoid rule in log|h| along lattice
    directions.  p = inf takes the exact supremum over every lattice step.
    """
    if p != np.inf and not p >= 1:
        raise ParameterError(f"p must lie in [1, inf], got {p}")
    prof = difference_profile(f, phi.L0, None if p == np.inf else n_shells)
    return float(direct_from_profile(np.abs(f.values).max(), prof, phi, p))


def holder_quotients(f, phi):
    """phi(1/|h|) ||D_h^L0 f||_inf along the first axis, every lattice step."""
    (_, hs, sup), *_ = difference_profile(f, phi.L0, None)
    return hs, phi(1.0 / hs) * sup
