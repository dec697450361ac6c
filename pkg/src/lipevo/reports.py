"""Fitted-constant reports shared by the verification harnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

STABILITY_FACTOR = 1.5


def fitted_constant(measured, bound):
    """Largest measured/bound ratio and its index; 0/0 counts as 0."""
    best, at = 0.0, None
    for i, (m, b) in enumerate(zip(measured, bound)):
        r = ratio(m, b)
        if r > best or at is None:
            best, at = r, i
    return best, at


def ratio(measured, bound):
    if bound == 0:
        return 0.0 if measured == 0 else math.inf
    return measured / bound


def is_stable(n, n_refined, factor=STABILITY_FACTOR):
    """Refinement stability: both finite and within ``factor`` of each other."""
    if not (math.isfinite(n) and math.isfinite(n_refined)):
        return False
    if n == 0 or n_refined == 0:
        return n == n_refined or max(n, n_refined) < 1e-12
    return max(n, n_refined) / min(n, n_refined) <= factor


@dataclass
class Row:
    check: str
    params: dict
    measured: float
    bound: float

    @property
    def ratio(self):
        return ratio(self.measured, self.bound)


@dataclass
class EstimateReport:
    """Fitted constant N = max measured/bound over a sweep, with its refined value."""

    id: str
    sweep: dict
    N: float
    argmax: object
    N_refined: float = math.nan
    stable: bool = False
    rows: list = field(default_factory=list, repr=False)
    note: str = ""

    @classmethod
    def from_rows(cls, id, sweep, rows, refined_rows=None, note=""):
        N, at = fitted_constant([r.measured for r in rows], [r.bound for r in rows])
        argmax = rows[at].params if rows and at is not None else None
        if refined_rows is None:
            return cls(id, sweep, N, argmax, math.nan, math.isfinite(N), rows, note)
        Nr, _ = fitted_constant([r.measured for r in refined_rows],
                                [r.bound for r in refined_rows])
        return cls(id, sweep, N, argmax, Nr, is_stable(N, Nr), rows, note)
