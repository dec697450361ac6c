"""Muckenhoupt weights on the time axis and the Hardy-Littlewood maximal operator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .errors import ParameterError, StructuralError

QUAD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """A weight w(t) on R.

    Built-in kinds: ``const`` (params (c,)), ``power`` (|t|^alpha, params
    (alpha,)) and ``piecewise`` (params (starts, values); the first value also
    covers t < starts[0]).  ``custom`` weights carry a vectorized ``func``.
    """

    kind: str
    params: tuple
    label: str = ""
    p_class: Optional[float] = None
    func: Optional[Callable] = field(default=None, repr=False)

    @classmethod
    def const(cls, c=1.0):
        c = float(c)
        if not c > 0:
            raise ParameterError(f"constant weight must be positive, got {c}")
        return cls("const", (c,), f"const:{c!r}")

    @classmethod
    def power(cls, alpha, p_class=None):
        alpha = float(alpha)
        if not alpha > -1:
            raise ParameterError(f"|t|^{alpha} is not locally integrable")
        if p_class is not None and not alpha < p_class - 1:
            raise ParameterError(f"|t|^{alpha} cannot lie in A_{p_class}")
        return cls("power", (alpha,), f"pow:{alpha!r}", p_class)

    @classmethod
    def piecewise(cls, pieces):
        pieces = [(float(s), float(v)) for s, v in pieces]
        starts = tuple(s for s, _ in pieces)
        values = tuple(v for _, v in pieces)
        if not pieces or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParameterError("piecewise weight needs strictly increasing breakpoints")
        if any(not v > 0 for v in values):
            raise ParameterError("piecewise weight values must be positive")
        body = ",".join(f"{s!r}:{v!r}" for s, v in pieces)
        return cls("piecewise", (starts, values), f"pw({body})")

    @classmethod
    def custom(cls, func, label="custom", p_class=None):
        return cls("custom", (), label, p_class, func)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "const":
            return np.full(t.shape, self.params[0])
        if self.kind == "power":
            with np.errstate(divide="ignore"):
                return np.abs(t) ** self.params[0]
        if self.kind == "piecewise":
            starts, values = self.params
            idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(values) - 1)
            return np.asarray(values)[idx]
        return np.asarray(self.func(t), dtype=float)

    def _pieces(self):
        starts, values = self.params
        edges = (-np.inf,) + starts[1:] + (np.inf,)
        return zip(values, edges[:-1], edges[1:])

    def power_integral(self, beta, a, b):
        """Integral of w^beta over [a, b] (closed form for built-ins)."""
        if b < a:
            raise ParameterError("integration bounds out of order")
        if b == a:
            return 0.0
        if self.kind == "const":
            return self.params[0] ** beta * (b - a)
        if self.kind == "power":
            e = self.params[0] * beta
            if e <= -1 and a <= 0 <= b:
                return math.inf

            def prim(x):
                return math.copysign(abs(x) ** (e + 1) / (e + 1), x)

            if e == -1:
                return math.log(b / a)
            return prim(b) - prim(a)
        if self.kind == "piecewise":
            return sum(v ** beta * max(0.0, min(hi, b) - max(lo, a))
                       for v, lo, hi in self._pieces())
        val, _ = integrate.quad(lambda s: float(self(np.array(s))) ** beta, a, b,
                                epsrel=QUAD_RTOL, limit=200)
        return val

    def integral(self, a, b):
        return self.power_integral(1.0, a, b)

    def dual_integral(self, a, b, p):
        """Integral of w^(-1/(p-1)) over [a, b]."""
        return self.power_integral(-1.0 / (p - 1.0), a, b)

    def cumulative(self, t):
        """W(t) = integral of w over [0, t], vectorized over t >= 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ParameterError("W is defined for t >= 0")
        if self.kind == "const":
            return self.params[0] * t
        if self.kind == "power":
            a = self.params[0]
            return t ** (a + 1) / (a + 1)
        flat = [self.integral(0.0, float(x)) for x in t.ravel()]
        return np.asarray(flat).reshape(t.shape)


def laplace_transform(w, lam):
    """L[w](lam) = integral of exp(-lam t) w(t) over t > 0."""
    lam = float(lam)
    if not lam > 0:
        raise ParameterError(f"rate must be positive, got {lam}")
    if w.kind == "const":
        return w.params[0] / lam
    if w.kind == "power":
        a = w.params[0]
        return math.gamma(a + 1) / lam ** (a + 1)
    if w.kind == "piecewise":
        total = 0.0
        for v, lo, hi in w._pieces():
            lo, hi = max(lo, 0.0), hi
            if hi <= lo:
                continue
            top = 0.0 if math.isinf(hi) else math.exp(-lam * hi)
            total += v * (math.exp(-lam * lo) - top) / lam
        return total
    val, err = integrate.quad(lambda s: math.exp(-lam * s) * float(w(np.array(s))),
                              0, np.inf, epsrel=QUAD_RTOL, limit=400)
    if not math.isfinite(val):
        raise ParameterError("Laplace transform diverges")
    return val


def laplace_equivalence(w, lams):
    """min and max of L[w](lam) / W(1/lam) over ``lams``."""
    r = np.array([laplace_transform(w, x) / float(w.cumulative(np.array(1.0 / x)))
                  for x in lams])
    return float(r.min()), float(r.max())


def w_tilde(w, p, s, t):
    """(integral_s^t w^(-1/(p-1)))^(1 - 1/p); for p = inf the convention t - s."""
    if t < s:
        raise ParameterError(f"need t >= s, got s={s}, t={t}")
    if t == s:
        return 0.0
    if p == np.inf:
        return float(t - s)
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    return w.dual_integral(s, t, p) ** (1.0 - 1.0 / p)


@dataclass(frozen=True)
class SweepPlan:
    radii: tuple = tuple(np.logspace(-3, 3, 61))
    rel_centers: tuple = tuple(np.linspace(-3.0, 3.0, 121))
    near_singular: tuple = tuple(1.0 + 10.0 ** -np.arange(1, 9))

    def centers(self):
        s = set(self.rel_centers) | {1.0, -1.0}
        s |= set(self.near_singular) | {-x for x in self.near_singular}
        return np.array(sorted(s))


@dataclass
class ApResult:
    value: float
    interval: tuple
    growth: float
    divergent: bool
    n_intervals: int


def ap_constant(w, p, plan=None):
    """Swept lower bound for [w]_{A_p} over intervals (c - r, c + r).

    Centers are ``s * r`` for relative positions s.  A non-integrable dual
    average is reported as +inf with the offending interval; ``growth`` is the
    ratio of the largest to the smallest finite swept value.
    """
    if not p > 1:
        raise ParameterError(f"p must exceed 1, got {p}")
    plan = plan or SweepPlan()
    best, best_iv = 0.0, None
    lo = math.inf
    div_iv = None
    n = 0
    for r in plan.radii:
        for s in plan.centers():
            a, b = float((s - 1.0) * r), float((s + 1.0) * r)
            n += 1
            dual = w.dual_integral(a, b, p)
            if not math.isfinite(dual):
                div_iv = div_iv or (a, b)
                continue
            val = (w.integral(a, b) / (2 * r)) * (dual / (2 * r)) ** (p - 1)
            lo = min(lo, val)
            if val > best:
                best, best_iv = val, (a, b)
    growth = best / lo if lo > 0 else math.inf
    if div_iv is None and best_iv is not None:
        best, best_iv = _polish(w, p, best, best_iv, plan)
    if div_iv is not None:
        return ApResult(math.inf, div_iv, float(growth), True, n)
    return ApResult(float(best), best_iv, float(growth), False, n)


def _polish(w, p, best, interval, plan):
    # local search over the relative center at the best radius
    a, b = interval
    r = 0.5 * (b - a)
    s0 = 0.5 * (a + b) / r
    step = max(np.diff(np.array(plan.rel_centers)).max(), 1e-6)

    def neg(s):
        lo, hi = (s - 1.0) * r, (s + 1.0) * r
        dual = w.dual_integral(lo, hi, p)
        if not math.isfinite(dual):
            return 0.0
        return -(w.integral(lo, hi) / (2 * r)) * (dual / (2 * r)) ** (p - 1)

    res = optimize.minimize_scalar(neg, bounds=(s0 - step, s0 + step), method="bounded",
                                   options={"xatol": 1e-10})
    if -res.fun > best:
        return float(-res.fun), (float((res.x - 1.0) * r), float((res.x + 1.0) * r))
    return best, interval


def maximal_function(values, dt=1.0):
    """Centered discrete maximal function of cell-average samples.

    Node i stands for the cell of width dt centered on it.  Radii are
    (k + 1/2) dt, so every window is a union of whole cells; mass outside the
    grid counts as zero.
    """
    g = np.abs(np.asarray(values, dtype=float))
    if g.ndim != 1 or g.size == 0:
        raise StructuralError("maximal_function needs a nonempty 1-d sample")
    n = g.size
    c = np.concatenate([[0.0], np.cumsum(g)])
    idx = np.arange(n)
    out = g.copy()
    for k in range(1, n):
        lo = np.maximum(idx - k, 0)
        hi = np.minimum(idx + k + 1, n)
        np.maximum(out, (c[hi] - c[lo]) / (2 * k + 1), out=out)
    return out


def indicator_cell_averages(a, b, t, dt):
    """Exact cell averages of 1_[a,b] on cells [t_i - dt/2, t_i + dt/2]."""
    t = np.asarray(t, dtype=float)
    lo = np.maximum(t - dt / 2, a)
    hi = np.minimum(t + dt / 2, b)
    return np.clip(hi - lo, 0.0, None) / dt


def aligned_grid(center, half_span, k):
    """Cell-centered grid with a node at ``center`` and cell edges at center +- half_span."""
    dt = 2.0 * half_span / (2 * k + 1)
    t = center + dt * np.arange(-k, k + 1)
    return t, dt


def a1_ratio(w, t):
    """Sup of (M w)(t) / w(t) over the sample nodes of a uniform grid."""
    t = np.asarray(t, dtype=float)
    dt = t[1] - t[0]
    wv = w(t)
    if not np.all(np.isfinite(wv)):
        return math.inf
    return float((maximal_function(wv, dt) / wv).max())


def maximal_operator_ratios(w, p, samples, t):
    """Weighted strong-(p,p) and weak-(1,1) ratios of the discrete maximal operator.

    Returns arrays over ``samples`` of
    ||M g||_{L_p(w)}^p / ||g||_{L_p(w)}^p and
    sup_lam lam w({M g > lam}) / ||g||_{L_1(w)}.
    """
    t = np.asarray(t, dtype=float)
    dt = t[1] - t[0]
    mass = np.array([w.integral(x - dt / 2, x + dt / 2) for x in t])
    strong, weak = [], []
    for g in samples:
        g = np.abs(np.asarray(g, dtype=float))
        Mg = maximal_function(g, dt)
        strong.append(float((Mg ** p * mass).sum() / (g ** p * mass).sum()))
        weak.append(weak_l1_quasinorm(Mg, mass) / float((g * mass).sum()))
    return np.array(strong), np.array(weak)


def weak_l1_quasinorm(values, cell_mass):
    """sup_lam lam * w({v >= lam}) for node values with w-mass per node cell."""
    v = np.asarray(values, dtype=float)
    m = np.asarray(cell_mass, dtype=float)
    order = np.argsort(-v, kind="stable")
    acc = np.cumsum(m[order])
    return float(np.max(v[order] * acc)) if v.size else 0.0
