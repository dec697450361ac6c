"""Real interpolation of weighted sequence spaces.

A sequence a = (a_n) on a finite window stands for the blocks ||Delta_n f||.
The two endpoint spaces carry the weights A_n = phi(2^n) 2^(n gamma) and
D_n = phi(2^n), so K(t, a) compares sup_n A_n |b_n| + t sup_n D_n |c_n| over
splittings a = b + c.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .reports import EstimateReport, Row

BRUTE_FORCE_WINDOW = 16
GAUSS_NODES = 12


@dataclass(frozen=True, eq=False)
class SequenceSpaceElement:
    entries: np.ndarray = field(repr=False)
    n_min: int = 0

    def __post_init__(self):
        a = np.abs(np.asarray(self.entries, dtype=float))
        object.__setattr__(self, "entries", a)

    @property
    def indices(self):
        return self.n_min + np.arange(self.entries.size)

    def scaled(self, c):
        return SequenceSpaceElement(self.entries * c, self.n_min)


def endpoint_weights(a, phi, gamma):
    n = a.indices.astype(float)
    D = phi(2.0 ** n)
    return D * 2.0 ** (n * gamma), D


def _closed(a, t, phi, gamma):
    A, D = endpoint_weights(a, phi, gamma)
    return float(np.max(np.minimum(A, t * D) * a.entries)) if a.entries.size else 0.0


def _brute(a, t, phi, gamma):
    """Exact infimum of B + t C subject to a_n <= B / A_n + C / D_n for all n.

    For fixed sup-norm levels B and C the best split of a_n puts b_n = min(a_n,
    B / A_n), so feasibility is the linear constraint above.  The minimum of a
    two-variable linear program sits at a vertex of the feasible region; all
    candidate vertices are enumerated.
    """
    A, D = endpoint_weights(a, phi, gamma)
    x = a.entries
    if not x.any():
        return 0.0
    cands = [(float(np.max(x * A)), 0.0), (0.0, float(np.max(x * D)))]
    for i, j in itertools.combinations(range(x.size), 2):
        # solve B / A_i + C / D_i = x_i and B / A_j + C / D_j = x_j
        m = np.array([[1 / A[i], 1 / D[i]], [1 / A[j], 1 / D[j]]])
        if abs(np.linalg.det(m)) < 1e-300:
            continue
        B, C = np.linalg.solve(m, [x[i], x[j]])
        if B >= 0 and C >= 0:
            cands.append((B, C))
    for i in range(x.size):
        # vertices on the axes through a single active constraint
        cands.append((x[i] * A[i], 0.0))
        cands.append((0.0, x[i] * D[i]))
    best = math.inf
    for B, C in cands:
        if np.all(B / A + C / D >= x * (1 - 1e-13)):
            best = min(best, B + t * C)
    return float(best)


def k_functional(a, t, phi, gamma, mode="closed_form"):
    """K(t, a) between the phi_gamma- and phi-weighted l^inf spaces."""
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    if mode == "closed_form":
        return _closed(a, t, phi, gamma)
    if mode == "brute_force":
        if a.entries.size > BRUTE_FORCE_WINDOW:
            raise ParameterError(
                f"brute force supports windows up to {BRUTE_FORCE_WINDOW}, got {a.entries.size}")
        return _brute(a, t, phi, gamma)
    raise ParameterError(f"unknown mode {mode!r}")


def _kinks(a, phi, gamma):
    A, D = endpoint_weights(a, phi, gamma)
    x = a.entries
    pts = set((A / D).tolist())
    nz = np.nonzero(x)[0]
    for i in nz:
        for j in nz:
            if i != j:
                pts.add(x[i] * A[i] / (x[j] * D[j]))
    return np.array(sorted(p for p in pts if p > 0))


def interpolation_norm(a, phi, gamma, p, w, tail_blocks=48):
    """(int_0^inf W(1/t) K(t, a)^p dt / t)^(1/p) with the closed-form K.

    Gauss-Legendre in log t on the blocks [2^(j gamma), 2^((j+1) gamma)],
    split at the kinks of K; the block range extends ``tail_blocks`` beyond
    the window on both sides.
    """
    if not 1 < p < np.inf:
        raise ParameterError(f"interpolation norm needs p in (1, inf), got {p}")
    if not a.entries.any():
        return 0.0
    A, D = endpoint_weights(a, phi, gamma)
    x = a.entries
    j_lo, j_hi = a.n_min - tail_blocks, a.n_min + x.size + tail_blocks
    edges = gamma * math.log(2) * np.arange(j_lo, j_hi + 1)
    kinks = np.log(_kinks(a, phi, gamma))
    pts = np.unique(np.concatenate([edges, kinks[(kinks > edges[0]) & (kinks < edges[-1])]]))
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_NODES)
    lo, hi = pts[:-1], pts[1:]
    s = (lo[:, None] + hi[:, None]) / 2 + (hi - lo)[:, None] / 2 * nodes[None, :]
    t = np.exp(s).ravel()
    K = np.max(np.minimum(A[None, :], t[:, None] * D[None, :]) * x[None, :], axis=1)
    vals = w.cumulative(1.0 / t) * K ** p
    total = float(((hi - lo)[:, None] / 2 * weights[None, :] * vals.reshape(s.shape)).sum())
    return total ** (1.0 / p)


def ell_norm(a, phi, gamma, p, w):
    """(sum_n W(2^(-n gamma)) phi(2^n)^p 2^(n p gamma) a_n^p)^(1/p)."""
    n = a.indices.astype(float)
    A, _ = endpoint_weights(a, phi, gamma)
    Wv = w.cumulative(2.0 ** (-n * gamma))
    return float((Wv * (A * a.entries) ** p).sum() ** (1.0 / p))


def single_entry_lower_bound(n, phi, gamma, p, w):
    """Ratio (interp / ell)^p is at least gamma ln 2 W(2^-(n+1) gamma) / W(2^-n gamma)."""
    return gamma * math.log(2) * float(w.cumulative(2.0 ** (-(n + 1) * gamma))) \
        / float(w.cumulative(2.0 ** (-n * gamma)))


@dataclass
class InterpolationReport:
    c_low: float
    c_high: float
    estimate: EstimateReport

    @property
    def spread(self):
        return self.c_high / self.c_low


def check_interpolation(phi, gamma, p, w, corpus):
    """Two-sided constants c_low <= interp / ell <= c_high over a corpus of sequences."""
    rows = [Row("interpolation", {"item": i, "window": a.entries.size},
                interpolation_norm(a, phi, gamma, p, w), ell_norm(a, phi, gamma, p, w))
            for i, a in enumerate(corpus)]
    ratios = [r.ratio for r in rows]
    est = EstimateReport.from_rows("interpolation", {"gamma": gamma, "p": p, "w": w.label}, rows)
    return InterpolationReport(float(min(ratios)), float(max(ratios)), est)
