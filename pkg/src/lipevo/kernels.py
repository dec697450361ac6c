"""Fundamental solutions p(t, s, x) on the grid and the kernel estimates.

With the unitary transform pair, p(t, s, .) is (2 pi)^(-d/2) times the inverse
transform of exp(int_s^t psi(r, xi) dr), and d/dt p multiplies that by
psi(t, xi) before inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ParameterError, RangeError
from .function_spaces import build_frame
from .grid import GridFunction, SpectralGrid, convolve
from .reports import EstimateReport, Row
from .symbols import d2

EXP_LIMIT = 700.0
# kernel shells whose bound has decayed below this are roundoff-dominated
BOUND_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class KernelFamily:
    symbol: object
    grid: SpectralGrid

    @cached_property
    def frame(self):
        return build_frame(self.grid)

    def exponent(self, t, s):
        return self.symbol.exponent(s, t, self.grid.xi)

    def hat(self, t, s, m=0):
        """psi(t, xi)^m exp(int_s^t psi) on the grid (FFT order)."""
        if not t > s:
            raise ParameterError(f"kernel needs t > s, got t={t}, s={s}")
        if m not in (0, 1):
            raise ParameterError(f"derivative order must be 0 or 1, got {m}")
        E = self.exponent(t, s)
        if E.real.max() > EXP_LIMIT:
            raise RangeError(f"exponent overflows at t - s = {t - s}")
        out = np.exp(E)
        if m == 1:
            out = out * self.symbol.evaluate(t, self.grid.xi)
        return out

    def from_hat(self, hat):
        """Physical samples of (2 pi)^(-d/2) F^{-1}[hat]."""
        g = self.grid
        return np.fft.ifftn(hat * g._phase) / g.cell_volume


def kernel(family, t, s, m=0):
    """p(t, s, .) (m = 0) or its t-derivative (m = 1) as a GridFunction."""
    return GridFunction(family.grid, family.from_hat(family.hat(t, s, m)))


def _l1(values, grid):
    return float(np.abs(values).sum() * grid.cell_volume)


def kernel_norms(family, t, s, m):
    """All quantities the kernel estimates bound, at one (t, s, m).

    Returns a dict with ``L1``, ``S0``, ``moment`` and ``shells`` (a dict j ->
    L1 norm of Delta_j d^m p).
    """
    g = family.grid
    H = family.hat(t, s, m)
    p = family.from_hat(H)
    fr = family.frame
    shells = {j: _l1(family.from_hat(H * fr.bands[j]), g) for j in fr.bands}
    moment = float(np.sqrt((np.abs(g.abs_x ** d2(g.d) * p) ** 2).sum() * g.cell_volume))
    return {"L1": _l1(p, g), "S0": _l1(family.from_hat(H * fr.phi_hat), g),
            "moment": moment, "shells": shells}


@dataclass(frozen=True)
class FSSweep:
    dts: tuple
    js: tuple
    ms: tuple = (0, 1)
    deltas: tuple = (0.25, 0.5, 0.75)
    s: float = 0.0


def default_sweep(family, n_dt=17, decades=(-3.0, 1.0)):
    fr = family.frame
    js = tuple(range(max(fr.j_min, -2), fr.j_full + 1))
    return FSSweep(tuple(np.logspace(decades[0], decades[1], n_dt)), js)


def _fs_rows(family, sweep):
    psi = family.symbol
    d, gam, kap = family.grid.d, psi.gamma, psi.kappa
    e_mom = (d2(d) - d / 2) / gam
    rows = []
    for m in sweep.ms:
        for dt in sweep.dts:
            q = kernel_norms(family, sweep.s + dt, sweep.s, m)
            base = {"m": m, "dt": float(dt)}
            rows.append(Row("L1", dict(base), q["L1"], dt ** (-m)))
            rows.append(Row("S0", dict(base), q["S0"], 1.0))
            rows.append(Row("moment", dict(base), q["moment"], dt ** (-m + e_mom)))
            for delta in sweep.deltas:
                for j in sweep.js:
                    decay = math.exp(-kap * dt * 2.0 ** (j * gam) * (1 - delta) / 2 ** gam)
                    if decay < BOUND_FLOOR:
                        continue
                    rows.append(Row("shell", dict(base, j=j, delta=delta),
                                    q["shells"][j], decay * 2.0 ** (j * m * gam)))
    return rows


def _group(rows):
    out = {}
    for r in rows:
        key = (r.check, r.params["m"], r.params.get("delta"))
        out.setdefault(key, []).append(r)
    return out


@dataclass
class FSReport:
    label: str
    estimates: list
    rows: list = field(repr=False)
    slopes: dict

    @property
    def stable(self):
        return all(e.stable for e in self.estimates)


def loglog_slope(x, y):
    x, y = np.log(np.asarray(x)), np.log(np.asarray(y))
    return float(np.polyfit(x, y, 1)[0])


def verify_fs_estimates(family, sweep=None, refine=True, label=None):
    """Fit N for the shell, S0, L1 and moment estimates, per (m, delta).

    The refined run doubles n_per_axis at fixed L and reuses the coarse j list.
    """
    sweep = sweep or default_sweep(family)
    rows = _fs_rows(family, sweep)
    fine_rows = None
    if refine:
        fine = KernelFamily(family.symbol, family.grid.refined())
        fine_rows = _group(_fs_rows(fine, sweep))
    estimates = []
    for key, rs in _group(rows).items():
        check, m, delta = key
        rid = f"{check}[m={m}" + (f",delta={delta}]" if delta is not None else "]")
        estimates.append(EstimateReport.from_rows(
            rid, {"dt": (min(sweep.dts), max(sweep.dts)), "js": sweep.js}, rs,
            None if fine_rows is None else fine_rows[key],
            note=f"j window [{min(sweep.js)}, {max(sweep.js)}]" if check == "shell" else ""))
    slopes = {}
    for m in sweep.ms:
        l1 = [r for r in rows if r.check == "L1" and r.params["m"] == m]
        slopes[("L1", m)] = loglog_slope([r.params["dt"] for r in l1], [r.measured for r in l1])
    return FSReport(label or family.symbol.label, estimates, rows, slopes)


def shell_decay_rates(family, dt, s=0.0, floor=1e-13):
    """Measured exponential decay rate of ||Delta_j p||_L1 per shell.

    rate_j = -log(||Delta_j p(s + dt, s)||_L1 / ||Delta_j delta||_L1); shells
    whose norm falls below ``floor`` are dropped as unmeasurable.
    """
    g = family.grid
    H = family.hat(s + dt, s, 0)
    out = {}
    for j, band in family.frame.bands.items():
        if j > family.frame.j_full or j < 1:
            continue
        num = _l1(family.from_hat(H * band), g)
        den = _l1(family.from_hat(band.astype(complex)), g)
        if num > floor * den:
            out[j] = -math.log(num / den)
    return out


def shell_decay_check(family, dt, delta, s=0.0, top=2, tolerance=0.15):
    """Compare measured shell rates with kappa dt 2^(j gamma) (1 - delta) / 2^gamma.

    Passes when, on the ``top`` largest measurable shells, the measured rate is
    at least (1 - tolerance) times the predicted one.
    """
    psi = family.symbol
    rates = shell_decay_rates(family, dt, s)
    js = sorted(rates)[-top:]
    rows = []
    for j in js:
        pred = psi.kappa * dt * 2.0 ** (j * psi.gamma) * (1 - delta) / 2 ** psi.gamma
        rows.append((j, rates[j], pred, rates[j] / pred))
    ok = len(rows) == top and all(r[3] >= 1 - tolerance for r in rows)
    return ok, rows


@dataclass
class MassRow:
    dt: float
    mass: float
    exact: complex
    deviation: float


def mass_limit(family, s, t_sequence):
    """Grid mass of p(t, s, .) against exp(int_s^t psi(r, 0) dr) for t decreasing to s."""
    ts = list(t_sequence)
    if any(b >= a for a, b in zip(ts, ts[1:])) or ts[-1] <= s:
        raise ParameterError("t_sequence must decrease strictly towards s")
    out = []
    zero = tuple(np.zeros(1) for _ in range(family.grid.d))
    for t in ts:
        p = kernel(family, t, s).values
        mass = complex(p.sum() * family.grid.cell_volume)
        exact = complex(np.exp(family.symbol.exponent(s, t, zero)[0]))
        out.append(MassRow(t - s, mass, exact, abs(mass - 1)))
    return out


def tail_mass(family, t, s, delta0=1.0):
    """Integral of |p(t, s, y)| over |y| >= delta0."""
    g = family.grid
    p = kernel(family, t, s).values
    return float(np.abs(p[g.abs_x >= delta0]).sum() * g.cell_volume)


def tail_bound_fit(family, dts, s=0.0, delta0=1.0):
    """Fitted N in tail <= N delta0^-(d2 - d/2) dt^((d2 - d/2)/gamma)."""
    d = family.grid.d
    e = d2(d) - d / 2
    rows = [Row("tail", {"dt": float(dt)}, tail_mass(family, s + dt, s, delta0),
                delta0 ** (-e) * dt ** (e / family.symbol.gamma)) for dt in dts]
    return EstimateReport.from_rows("tail", {"dt": tuple(dts), "delta0": delta0}, rows)


def chapman_kolmogorov_error(family, t, u, s):
    """Relative L1 gap between p(t,u) * p(u,s) and p(t,s)."""
    a = convolve(kernel(family, t, u), kernel(family, u, s))
    b = kernel(family, t, s)
    g = family.grid
    return _l1(a.values - b.values, g) / _l1(b.values, g)
