"""Time-measurable symbols psi(t, xi) and sampled membership checks.

A symbol is stored together with its class constants (gamma, kappa, M).  Time
dependence enters only through scalar coefficients a(t), so the exponent
integral of psi over [s, t] reduces to integrals of those coefficients; for
piecewise-constant coefficients it is an exact finite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError, ValidationError

SIMPSON_PANELS = 64


def d2(d):
    """Number of xi-derivatives controlled by the class, floor(d/2) + 1."""
    return d // 2 + 1


def simpson(func, a, b, panels=SIMPSON_PANELS):
    """Composite Simpson rule; ``func`` must accept an array of nodes."""
    if b == a:
        return 0.0 * func(np.array([a]))[0]
    nodes = np.linspace(a, b, 2 * panels + 1)
    w = np.ones(2 * panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    vals = func(nodes)
    return np.tensordot(w, vals, axes=(0, 0)) * (b - a) / (6.0 * panels)


@dataclass(frozen=True)
class TimeCoefficient:
    """A bounded scalar coefficient a(t).

    ``piecewise_constant`` coefficients take ``values[i]`` on
    ``[starts[i], starts[i+1])``; times before ``starts[0]`` use ``values[0]``.
    """

    kind: str
    starts: tuple = ()
    values: tuple = ()
    tag: str = ""
    params: tuple = ()
    func: Optional[Callable] = field(default=None, compare=False, repr=False)
    antiderivative: Optional[Callable] = field(default=None, compare=False, repr=False)

    @classmethod
    def constant(cls, value):
        return cls("constant", starts=(0.0,), values=(float(value),))

    @classmethod
    def piecewise(cls, pieces):
        """``pieces`` is a sequence of ``(start_time, value)`` pairs."""
        pieces = [(float(s), float(v)) for s, v in pieces]
        if not pieces:
            raise ParameterError("piecewise coefficient needs at least one piece")
        starts = tuple(s for s, _ in pieces)
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParameterError(f"breakpoints must be strictly increasing: {starts}")
        values = tuple(v for _, v in pieces)
        if not all(math.isfinite(v) for v in values):
            raise ParameterError("coefficient values must be finite")
        return cls("piecewise_constant", starts=starts, values=values)

    @classmethod
    def oscillating(cls, c0, c1, omega):
        """a(t) = c0 + c1 sin(omega t), integrated in closed form."""
        c0, c1, omega = float(c0), float(c1), float(omega)

        def f(t):
            return c0 + c1 * np.sin(omega * np.asarray(t, dtype=float))

        def F(t):
            t = np.asarray(t, dtype=float)
            if omega == 0:
                return c0 * t
            return c0 * t - c1 * np.cos(omega * t) / omega

        return cls("closed_form", tag="osc", params=(c0, c1, omega), func=f,
                   antiderivative=F)

    @classmethod
    def closed_form(cls, func, antiderivative=None, tag="custom", params=()):
        return cls("closed_form", tag=tag, params=tuple(params), func=func,
                   antiderivative=antiderivative)

    @property
    def is_piecewise_constant(self):
        return self.kind in ("constant", "piecewise_constant")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_piecewise_constant:
            idx = np.searchsorted(self.starts, t, side="right") - 1
            idx = np.clip(idx, 0, len(self.values) - 1)
            return np.asarray(self.values)[idx]
        return np.broadcast_to(self.func(t), t.shape).astype(float)

    def breakpoints(self, s, t):
        """Jump times strictly inside (s, t)."""
        if self.kind != "piecewise_constant":
            return ()
        return tuple(b for b in self.starts[1:] if s < b < t)

    def _pieces(self):
        edges = (-np.inf,) + self.starts[1:] + (np.inf,)
        return zip(self.values, edges[:-1], edges[1:])

    def integral(self, s, t):
        """Integral of a over [s, t]."""
        if t == s:
            return 0.0
        if self.kind == "constant":
            return self.values[0] * (t - s)
        if self.kind == "piecewise_constant":
            lo, hi, sign = (s, t, 1.0) if s < t else (t, s, -1.0)
            return sign * sum(v * max(0.0, min(b, hi) - max(a, lo))
                              for v, a, b in self._pieces())
        if self.antiderivative is not None:
            return float(self.antiderivative(t) - self.antiderivative(s))
        return float(simpson(lambda r: self.func(r), s, t))

    def bounds(self, T=1.0, samples=2049):
        """(inf, sup) over [0, T]; exact for piecewise and oscillating kinds."""
        if self.is_piecewise_constant:
            vals = [v for v, a, b in self._pieces() if a <= T and b > 0]
            return min(vals), max(vals)
        if self.tag == "osc":
            c0, c1, _ = self.params
            return c0 - abs(c1), c0 + abs(c1)
        v = self(np.linspace(0.0, T, samples))
        return float(v.min()), float(v.max())

    def sample_times(self, T=1.0, n=257):
        ts = set(np.linspace(0.0, T, n).tolist())
        ts.update(b for b in self.starts if 0 <= b <= T)
        return np.array(sorted(ts))

    def scaled(self, c):
        c = float(c)
        if self.is_piecewise_constant:
            return replace(self, values=tuple(c * v for v in self.values))
        F = self.antiderivative
        params = self.params
        if self.tag == "osc":
            params = (c * params[0], c * params[1], params[2])
        return TimeCoefficient.closed_form(
            lambda t, f=self.func: c * f(t),
            None if F is None else (lambda t, F=F: c * F(t)),
            tag=self.tag, params=params)


def _components(xi, d):
    if isinstance(xi, (tuple, list)):
        comps = tuple(np.asarray(c, dtype=float) for c in xi)
    else:
        arr = np.asarray(xi, dtype=float)
        if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
            comps = (arr,)
        else:
            comps = tuple(arr[..., i] for i in range(d))
    if len(comps) != d:
        raise ParameterError(f"expected {d} frequency components, got {len(comps)}")
    return comps


@dataclass(frozen=True, eq=False)
class SymbolSpec:
    """psi(t, xi) with class parameters.

    ``_value(t, comps)`` and ``_exponent(s, t, comps)`` receive xi as a tuple of
    component arrays and must already handle xi = 0.
    """

    gamma: float
    kappa: float
    M: Optional[float]
    d: int
    family: str
    _value: Callable = field(repr=False)
    _exponent: Callable = field(repr=False)
    _breaks: Callable = field(repr=False, default=lambda s, t: ())
    piecewise_constant: bool = True
    coefficient: object = field(default=None, repr=False)
    label: str = ""

    def evaluate(self, t, xi):
        return np.asarray(self._value(float(t), _components(xi, self.d)), dtype=complex)

    def exponent(self, s, t, xi):
        """Integral of psi(r, xi) over r in [s, t]."""
        return np.asarray(self._exponent(float(s), float(t), _components(xi, self.d)),
                          dtype=complex)

    def at_zero(self, t):
        zero = tuple(np.zeros(1) for _ in range(self.d))
        return complex(self.evaluate(t, zero)[0])

    def breakpoints(self, s, t):
        return tuple(sorted(set(self._breaks(s, t))))

    def with_constants(self, **kw):
        return replace(self, **kw)


def _abs(comps):
    return np.sqrt(sum(c * c for c in comps))


def fractional_M(gamma, d, sup_a):
    """Sharp constant in |D^a |xi|^gamma| <= C |xi|^(gamma-|a|), |a| <= d2."""
    c = max(1.0, gamma)
    if d2(d) >= 2:
        c = max(c, gamma * max(1.0, abs(gamma - 1.0), abs(gamma - 2.0) / 2.0))
    return sup_a * c


def make_fractional(gamma, a, d=1, T=1.0):
    """psi(t, xi) = -a(t) |xi|^gamma."""
    gamma = float(gamma)
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    if not isinstance(a, TimeCoefficient):
        a = TimeCoefficient.constant(a)
    lo, hi = a.bounds(T)
    if not lo > 0:
        raise ParameterError(f"coefficient must be bounded below by a positive number, inf a = {lo}")

    def value(t, comps):
        return -a(t) * _abs(comps) ** gamma

    def exponent(s, t, comps):
        return -a.integral(s, t) * _abs(comps) ** gamma

    return SymbolSpec(gamma, lo, fractional_M(gamma, d, hi), d, "fractional",
                      value, exponent, a.breakpoints, a.is_piecewise_constant, a,
                      f"frac(gamma={gamma:g})")


def make_elliptic_matrix(A, T=1.0):
    """psi(t, xi) = -sum_ij a_ij(t) xi_i xi_j for a square matrix of coefficients."""
    A = [[c if isinstance(c, TimeCoefficient) else TimeCoefficient.constant(c)
          for c in row] for row in A]
    d = len(A)
    if d not in (1, 2) or any(len(row) != d for row in A):
        raise ParameterError("coefficient matrix must be 1x1 or 2x2")
    entries = [c for row in A for c in row]
    ts = np.unique(np.concatenate([c.sample_times(T) for c in entries]))
    kappa, top = np.inf, 0.0
    for t in ts:
        mat = np.array([[A[i][j](t) for j in range(d)] for i in range(d)], dtype=float)
        sym = 0.5 * (mat + mat.T)
        eig = np.linalg.eigvalsh(sym)
        if not eig[0] > 0:
            raise ValidationError(
                f"ellipticity fails at t={t:.6g}: smallest eigenvalue {eig[0]:.6g}")
        kappa = min(kappa, eig[0])
        top = max(top, np.abs(np.linalg.eigvalsh(sym)).max())

    def value(t, comps):
        out = 0.0
        for i in range(d):
            for j in range(d):
                out = out + A[i][j](t) * comps[i] * comps[j]
        return -out

    def exponent(s, t, comps):
        out = 0.0
        for i in range(d):
            for j in range(d):
                out = out + A[i][j].integral(s, t) * comps[i] * comps[j]
        return -out

    def breaks(s, t):
        return tuple(b for c in entries for b in c.breakpoints(s, t))

    pw = all(c.is_piecewise_constant for c in entries)
    return SymbolSpec(2.0, float(kappa), 2.0 * float(top), d, "elliptic_matrix",
                      value, exponent, breaks, pw, A, f"ell(d={d})")


def make_custom(func, gamma, kappa, d=1, M=None, at_zero=0.0, exponent=None,
                breaks=(), piecewise_constant=True, label="custom"):
    """Wrap an arbitrary symbol ``func(t, comps)``.

    ``at_zero`` (a number or a function of t) declares psi(t, 0); the mass of
    the fundamental solution depends on it.  Without ``exponent`` the time
    integral uses composite Simpson on each smooth piece.
    """
    zero = at_zero if callable(at_zero) else (lambda t, z=complex(at_zero): z)
    breaks = tuple(breaks)

    def value(t, comps):
        r = _abs(comps)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(func(t, comps), dtype=complex)
        v = np.broadcast_to(v, r.shape).copy()
        v[r == 0] = zero(t)
        return v

    def exponent_default(s, t, comps):
        knots = [s] + [b for b in breaks if s < b < t] + [t]
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            if piecewise_constant:
                total = total + (hi - lo) * value(0.5 * (lo + hi), comps)
            else:
                total = total + simpson(
                    lambda rs: np.stack([value(r, comps) for r in rs]), lo, hi)
        return total

    return SymbolSpec(float(gamma), float(kappa), M, d, "custom", value,
                      exponent or exponent_default,
                      lambda s, t: tuple(b for b in breaks if s < b < t),
                      piecewise_constant, None, label)


def scale_symbol(psi, c):
    """The symbol built from the coefficient scaled by c > 0."""
    if psi.family == "fractional":
        return make_fractional(psi.gamma, psi.coefficient.scaled(c), psi.d)
    if psi.family == "elliptic_matrix":
        return make_elliptic_matrix([[e.scaled(c) for e in row] for row in psi.coefficient])
    raise ParameterError("only built-in families can be rescaled")


@dataclass(frozen=True)
class SamplingPlan:
    T: float = 1.0
    n_times: int = 17
    j_range: tuple = (-6, 10)
    points_per_shell: int = 4
    n_directions: int = 8
    tol: float = 1e-6
    rel_step: float = 1e-4


@dataclass
class SymbolClassReport:
    ellipticity_ratio: float
    ellipticity_at: tuple
    derivative_ratio: float
    derivative_at: tuple
    fitted_kappa: float
    fitted_M: float
    passed: bool
    tol: float
    n_samples: int


def _multi_indices(d):
    out = [()]
    out += [(i,) for i in range(d)]
    if d2(d) >= 2:
        out += [(i, j) for i in range(d) for j in range(i, d)]
    return out


def _derivative(psi, t, comps, alpha, h):
    d = psi.d

    def shifted(steps):
        c = list(comps)
        for axis, k in steps:
            c[axis] = c[axis] + k * h
        return psi.evaluate(t, tuple(c))

    if len(alpha) == 0:
        return psi.evaluate(t, comps)
    if len(alpha) == 1:
        (i,) = alpha
        return (shifted([(i, 1)]) - shifted([(i, -1)])) / (2 * h)
    i, j = alpha
    if i == j:
        return (shifted([(i, 1)]) - 2 * psi.evaluate(t, comps) + shifted([(i, -1)])) / h**2
    return (shifted([(i, 1), (j, 1)]) - shifted([(i, 1), (j, -1)])
            - shifted([(i, -1), (j, 1)]) + shifted([(i, -1), (j, -1)])) / (4 * h * h)


def _sample_frequencies(d, plan):
    js = np.arange(plan.j_range[0], plan.j_range[1] + 1)
    offs = np.arange(plan.points_per_shell) / plan.points_per_shell
    radii = (2.0 ** (js[:, None] + offs[None, :])).ravel()
    if d == 1:
        return (np.concatenate([radii, -radii]),)
    ang = 2 * np.pi * np.arange(plan.n_directions) / plan.n_directions + 0.1
    r = np.repeat(radii, len(ang))
    a = np.tile(ang, len(radii))
    return (r * np.cos(a), r * np.sin(a))


def check_symbol_class(psi, plan=None):
    """Sampled membership test for S(gamma, kappa, M).

    Derivatives use central differences with step ``rel_step * |xi|``.  If the
    symbol carries no M, the minimal admissible M over the samples is used.
    """
    plan = plan or SamplingPlan()
    comps = _sample_frequencies(psi.d, plan)
    r = _abs(comps)
    h = plan.rel_step * r
    times = np.linspace(0.0, plan.T, plan.n_times)
    extra = [b for b in psi.breakpoints(-np.inf, np.inf) if 0 <= b <= plan.T]
    times = np.unique(np.concatenate([times, extra]))
    ell_min, ell_at = np.inf, None
    fit_M, m_at = 0.0, None
    fit_kappa = np.inf
    for t in times:
        val = psi.evaluate(t, comps)
        ell = (-val).real / r ** psi.gamma
        k = int(np.argmin(ell))
        if ell[k] < fit_kappa:
            fit_kappa = float(ell[k])
            ell_at = (float(t), tuple(float(c[k]) for c in comps))
        for alpha in _multi_indices(psi.d):
            D = np.abs(_derivative(psi, t, comps, alpha, h)) / r ** (psi.gamma - len(alpha))
            k = int(np.argmax(D))
            if D[k] > fit_M:
                fit_M = float(D[k])
                m_at = (float(t), tuple(float(c[k]) for c in comps), alpha)
    ell_min = fit_kappa / psi.kappa
    M = psi.M if psi.M is not None else fit_M
    der = fit_M / M
    passed = bool(ell_min >= 1 - plan.tol and der <= 1 + plan.tol)
    return SymbolClassReport(ell_min, ell_at, der, m_at, fit_kappa, fit_M, passed,
                             plan.tol, len(times) * r.size)
