"""Fitted-constant checks of the solution estimates.

Each check evaluates the two sides of an inequality on discrete data, reports
N = max(left / right) over its sweep, and reruns on a refined discretization.
Time integrals in L_p((0, T), w dt; X) use the exact w-mass of each time panel.
The time derivative inside the solution norm is the panel average
(u(t_k) - u(t_{k-1})) / dt, which is exact for the identity u = u0 + int du/dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .function_spaces import (PhiFunction, build_frame, derived_phi, difference_profile,
                              direct_from_profile, dyadic_from_shells, lp_sum,
                              shell_sup_norms)
from .grid import lp_norm
from .kernels import KernelFamily
from .reports import EstimateReport, Row, is_stable
from .solver import PanelForcing, SpaceTimeFunction, TimeGrid, apply_operator, mild_solve
from .weights import (a1_ratio, ap_constant, maximal_function, w_tilde,
                      weak_l1_quasinorm)

AP_GROWTH_LIMIT = 10.0


# -- norms over time --------------------------------------------------------

def slice_norms(frame, values, phi, p=np.inf):
    """Dyadic Lambda^phi_p norms of a stack of slices (leading axis = time)."""
    s0, shells = shell_sup_norms(frame, values)
    weights = phi(2.0 ** np.arange(1, frame.j_max + 1, dtype=float))
    return np.atleast_1d(dyadic_from_shells(s0, shells, weights, p))


def panel_masses(time_grid, w):
    return np.diff(w.cumulative(time_grid.nodes))


def node_time_norm(values, time_grid, w, p):
    """L_p(w dt) norm of node values: trapezoid per panel, first panel uses t = dt."""
    v = np.asarray(values, dtype=float)
    if p == np.inf:
        return float(v.max())
    vp = v ** p
    per_panel = 0.5 * (vp[:-1] + vp[1:])
    per_panel[0] = vp[1]
    return float((panel_masses(time_grid, w) * per_panel).sum() ** (1.0 / p))


def panel_time_norm(values, time_grid, w, p):
    """L_p(w dt) norm of a function constant on each time panel."""
    v = np.asarray(values, dtype=float)
    if p == np.inf:
        return float(v.max())
    return float((panel_masses(time_grid, w) * v ** p).sum() ** (1.0 / p))


def panel_forcing_values(f, time_grid, grid):
    """Forcing slices as the solver freezes them, one per panel."""
    if isinstance(f, PanelForcing):
        return f.values
    nodes = time_grid.nodes
    if isinstance(f, SpaceTimeFunction):
        return 0.5 * (f.values[:-1] + f.values[1:])
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    return np.stack([np.broadcast_to(f(t, *grid.x), grid.shape) for t in mids])


@dataclass
class HNorm:
    """||u||_{L_p(w; phi_gamma)} + ||u0||_{Lambda_p^{phi_gamma,p,w}} + ||du/dt||_{L_p(w; phi)}."""

    u_part: float
    u0_part: float
    dudt_part: float

    @property
    def total(self):
        return self.u_part + self.u0_part + self.dudt_part


def h_norm(frame, u, phi, gamma, p, w):
    tg = u.time_grid
    phi_g, phi_gpw = derived_phi(phi, gamma, p, w)
    u_part = node_time_norm(slice_norms(frame, u.values, phi_g), tg, w, p)
    u0_part = float(slice_norms(frame, u.values[:1], phi_gpw, p)[0])
    dudt = np.diff(u.values, axis=0) / tg.dt
    d_part = panel_time_norm(slice_norms(frame, dudt, phi), tg, w, p)
    return HNorm(u_part, u0_part, d_part)


def data_norm(frame, u0_values, f_panels, time_grid, phi, gamma, p, w):
    """||u0||_{Lambda_p^{phi_gamma,p,w}} + ||f||_{L_p(w; Lambda^phi)}."""
    _, phi_gpw = derived_phi(phi, gamma, p, w)
    a = float(slice_norms(frame, np.asarray(u0_values)[None], phi_gpw, p)[0])
    b = panel_time_norm(slice_norms(frame, f_panels, phi), time_grid, w, p)
    return a + b


# -- preconditions ------------------------------------------------------------

def require_ap(w, p, growth_limit=AP_GROWTH_LIMIT):
    """Refuse weights whose A_p sweep diverges or grows without bound."""
    if p == np.inf:
        return None
    res = ap_constant(w, p)
    if res.divergent or res.growth > growth_limit:
        raise PreconditionError(
            f"{w.label} fails the A_{p:g} sweep (value {res.value}, growth {res.growth:.3g}) "
            f"on interval {res.interval}")
    return res


def require_a1(w, T, n=512, factor=1.5):
    """A_1 sweep: sup (M w)/w on two nested grids over [-T, T] must agree."""
    r1 = a1_ratio(w, np.linspace(-T, T, n + 1))
    r2 = a1_ratio(w, np.linspace(-T, T, 2 * n + 1))
    if not (math.isfinite(r1) and math.isfinite(r2)) or r2 > factor * r1:
        raise PreconditionError(f"{w.label} fails the A_1 sweep ({r1:.3g} -> {r2:.3g})")
    return r1, r2


# -- individual checks ------------------------------------------------------

def _refined(family, time_grid):
    return KernelFamily(family.symbol, family.grid.refined()), time_grid.refined()


def _solve(family, u0, f, time_grid):
    grid = family.grid
    u0v = u0.on(grid) if hasattr(u0, "on") else u0
    fc = f.callable(grid) if hasattr(f, "callable") else f
    return mild_solve(family, u0v, fc, time_grid), fc


def apriori_rows(family, phi, p, w, corpus, time_grid):
    frame = family.frame
    gamma = family.symbol.gamma
    rows = []
    for i, (u0, f) in enumerate(corpus):
        u, fc = _solve(family, u0, f, time_grid)
        fp = panel_forcing_values(fc, time_grid, family.grid) if fc is not None \
            else np.zeros((time_grid.n_t,) + family.grid.shape)
        lhs = h_norm(frame, u, phi, gamma, p, w).total
        rhs = data_norm(frame, u.values[0], fp, time_grid, phi, gamma, p, w)
        rows.append(Row("apriori", {"pair": i, "p": p, "w": w.label}, lhs, rhs))
    return rows


def check_apriori(family, phi, p, w, corpus, time_grid, refine=True):
    """||u||_H <= N (||u0||_{Lambda_p^{phi_gamma,p,w}} + ||f||_{L_p(w; Lambda^phi)})."""
    require_ap(w, p)
    rows = apriori_rows(family, phi, p, w, corpus, time_grid)
    fine = None
    if refine:
        fam2, tg2 = _refined(family, time_grid)
        fine = apriori_rows(fam2, phi, p, w, corpus, tg2)
    return EstimateReport.from_rows("apriori", {"p": p, "w": w.label, "n_pairs": len(corpus)},
                                    rows, fine)


def _maximal_rows(family, phi, f, time_grid):
    grid, frame = family.grid, family.frame
    u = mild_solve(family, grid.constant(0.0), f, time_grid)
    phi_g, _ = derived_phi(phi, family.symbol.gamma, np.inf, None)
    lhs = slice_norms(frame, u.values, phi_g)
    fp = panel_forcing_values(f, time_grid, grid)
    fn = slice_norms(frame, fp, phi)
    rhs = maximal_at_nodes(fn)
    rows = []
    for k, t in enumerate(time_grid.nodes):
        rows.append(Row("maximal", {"t": float(t)}, float(lhs[k]), float(rhs[k])))
    return rows


def maximal_at_nodes(panel_values):
    """Discrete maximal function at the panel edges of a function constant per panel.

    Windows centered at a node cover k whole panels on each side; the function
    vanishes outside (0, T).
    """
    g = np.abs(np.asarray(panel_values, dtype=float))
    n = g.size
    c = np.concatenate([[0.0], np.cumsum(g)])
    idx = np.arange(n + 1)
    out = np.zeros(n + 1)
    for k in range(1, n + 1):
        lo = np.maximum(idx - k, 0)
        hi = np.minimum(idx + k, n)
        np.maximum(out, (c[hi] - c[lo]) / (2 * k), out=out)
    return out


def check_maximal_bound(family, phi, f, time_grid, refine=True):
    """||G f(t)||_{Lambda^{phi_gamma}} <= N M(||f||_{Lambda^phi} 1_(0,T))(t) at the nodes."""
    rows = _maximal_rows(family, phi, f, time_grid)
    bad = [r for r in rows if r.bound == 0 and r.measured > 0]
    fine = None
    if refine:
        fam2, tg2 = _refined(family, time_grid)
        fine = _maximal_rows(fam2, phi, f, tg2)
    note = "inconsistent: nonzero left side with zero maximal function" if bad else ""
    return EstimateReport.from_rows("maximal", {"n_t": time_grid.n_t}, rows, fine, note)


@dataclass
class WeakL1Report:
    weak: float
    strong: float
    data: float

    @property
    def weak_ratio(self):
        return self.weak / self.data if self.data else 0.0

    @property
    def strong_ratio(self):
        return self.strong / self.data if self.data else 0.0


def node_cell_masses(time_grid, w):
    nodes = time_grid.nodes
    dt = time_grid.dt
    lo = np.clip(nodes - dt / 2, time_grid.start, time_grid.T)
    hi = np.clip(nodes + dt / 2, time_grid.start, time_grid.T)
    return w.cumulative(hi) - w.cumulative(lo)


def weak_l1(family, phi, w, f, time_grid):
    """Weighted weak-L1 quasinorm of ||G f(t)||_{Lambda^{phi_gamma}} against ||f||_{L_1(w; phi)}."""
    grid, frame = family.grid, family.frame
    u = mild_solve(family, grid.constant(0.0), f, time_grid)
    phi_g, _ = derived_phi(phi, family.symbol.gamma, np.inf, None)
    v = slice_norms(frame, u.values, phi_g)
    weak = weak_l1_quasinorm(v, node_cell_masses(time_grid, w))
    strong = node_time_norm(v, time_grid, w, 1.0)
    fp = panel_forcing_values(f, time_grid, grid)
    data = panel_time_norm(slice_norms(frame, fp, phi), time_grid, w, 1.0)
    return WeakL1Report(weak, strong, data)


def check_weak_l1(family, phi, w, forcings, time_grid, refine=True):
    """sup_lam lam w(||G f|| >= lam) <= N ||f||_{L_1(w; Lambda^phi)} over ``forcings``."""
    require_a1(w, time_grid.T)

    def rows_for(fam, tg):
        out = []
        for i, f in enumerate(forcings):
            r = weak_l1(fam, phi, w, f, tg)
            out.append(Row("weak_l1", {"forcing": i}, r.weak, r.data))
        return out

    fine = rows_for(*_refined(family, time_grid)) if refine else None
    return EstimateReport.from_rows("weak_l1", {"w": w.label}, rows_for(family, time_grid), fine)


@dataclass
class TraceReport:
    estimate: EstimateReport
    inner_max_ratio: float


def trace_quantities(frame, u, phi, gamma, p, w):
    """(max_t ||u(t)||_{Lambda_p^{phi_gamma,p,w}}, max_t l^inf/l^p ratio, ||u||_H)."""
    _, phi_gpw = derived_phi(phi, gamma, p, w)
    s0, shells = shell_sup_norms(frame, u.values)
    weights = phi_gpw(2.0 ** np.arange(1, frame.j_max + 1, dtype=float))
    strong = dyadic_from_shells(s0, shells, weights, p)
    weak = dyadic_from_shells(s0, shells, weights, np.inf)
    with np.errstate(invalid="ignore"):
        inner = np.where(strong > 0, weak / np.where(strong > 0, strong, 1.0), 0.0)
    return float(strong.max()), float(inner.max()), h_norm(frame, u, phi, gamma, p, w).total


def check_trace_embedding(family, phi, p, w, corpus, time_grid, refine=True):
    """sup_t ||u(t)||_{Lambda_p^{phi_gamma,p,w}} <= N ||u||_H over a corpus of data."""
    gamma = family.symbol.gamma

    def rows_for(fam, tg):
        rows, inner = [], 0.0
        for i, (u0, f) in enumerate(corpus):
            u, _ = _solve(fam, u0, f, tg)
            lhs, ir, rhs = trace_quantities(fam.frame, u, phi, gamma, p, w)
            inner = max(inner, ir)
            rows.append(Row("trace", {"pair": i, "p": p, "w": w.label}, lhs, rhs))
        return rows, inner

    rows, inner = rows_for(family, time_grid)
    fine = None
    if refine:
        fine, inner2 = rows_for(*_refined(family, time_grid))
        inner = max(inner, inner2)
    est = EstimateReport.from_rows("trace", {"p": p, "w": w.label}, rows, fine)
    return TraceReport(est, inner)


def mixed_difference(u, k_time, shift, L0, s_index):
    """D^{L0}_{(h1/L0, h2)} u(s, .) with h1/L0 = k_time panels and h2 = shift (grid steps)."""
    out = np.zeros(u.grid.shape, dtype=complex)
    axes = tuple(range(u.grid.d))
    for i in range(L0 + 1):
        c = (-1) ** (L0 - i) * math.comb(L0, i)
        sl = u.values[s_index + i * k_time]
        out = out + c * np.roll(sl, tuple(-i * s for s in shift), axis=axes)
    return out


@dataclass
class ContinuityReport:
    mixed: EstimateReport
    time: EstimateReport
    hs: np.ndarray
    modulus: np.ndarray
    slope: float
    h_norm: float


def time_modulus(frame, u, phi, ks, s_stride=1):
    """max_s ||u(s + k dt) - u(s)||_{Lambda^phi} for each step count k."""
    out = []
    n = u.time_grid.n_t
    for k in ks:
        idx = np.arange(0, n - k + 1, s_stride)
        diff = u.values[idx + k] - u.values[idx]
        out.append(float(slice_norms(frame, diff, phi).max()))
    return np.array(out)


def check_continuity(frame, u, phi, gamma, p, w, L0=None, s_stride=None, slope_ks=None):
    """Mixed space-time Hoelder-type quotient and its time-only ingredient.

    ``L0`` defaults to the difference order of phi_{gamma,p,w}.
    """
    tg = u.time_grid
    n = tg.n_t
    _, phi_gpw = derived_phi(phi, gamma, p, w)
    L0 = L0 or phi_gpw.L0
    hn = h_norm(frame, u, phi, gamma, p, w)
    s_stride = s_stride or max(1, n // 16)
    grid = u.grid
    ks = [2 ** i for i in range(int(math.log2(max(1, n // L0))) + 1) if L0 * 2 ** i <= n]
    shifts = [0] + [2 ** i for i in range(int(math.log2(grid.n_per_axis // 2)))]
    sup_u = float(np.abs(u.values).max())
    rows = []
    nodes = tg.nodes
    for s_idx in range(0, n, s_stride):
        for k in [0] + ks:
            if s_idx + L0 * k > n:
                continue
            for m in shifts:
                if k == 0 and m == 0:
                    continue
                shift = (m,) + (0,) * (grid.d - 1)
                num = float(np.abs(mixed_difference(u, k, shift, L0, s_idx)).max())
                t_part = w_tilde(w, p, nodes[s_idx], nodes[s_idx + L0 * k]) if k else 0.0
                x_part = 1.0 / float(phi_gpw(1.0 / (m * grid.dx))) if m else 0.0
                rows.append(Row("continuity", {"s": float(nodes[s_idx]), "h1": float(L0 * k * tg.dt),
                                               "h2": float(m * grid.dx)},
                                num, t_part + x_part))
    quot = max(r.ratio for r in rows) if rows else 0.0
    mixed = EstimateReport("continuity", {"L0": L0, "p": p, "w": w.label},
                           (sup_u + quot) / hn.total if hn.total else 0.0,
                           max(rows, key=lambda r: r.ratio).params if rows else None,
                           rows=rows)
    # time-only ingredient against ||du/dt||_{L_p(w; Lambda^phi)}
    all_ks = sorted(set([1] + ks))
    trows = []
    for k in all_ks:
        for s_idx in range(0, n - k + 1, s_stride):
            diff = u.values[s_idx + k] - u.values[s_idx]
            num = float(slice_norms(frame, diff[None], phi)[0])
            den = w_tilde(w, p, nodes[s_idx], nodes[s_idx + k]) * hn.dudt_part
            trows.append(Row("time_modulus", {"s": float(nodes[s_idx]), "h1": float(k * tg.dt)},
                             num, den))
    time = EstimateReport.from_rows("time_modulus", {"p": p, "w": w.label}, trows)
    slope_ks = slope_ks or all_ks
    mod = time_modulus(frame, u, phi, slope_ks)
    hs = np.array(slope_ks) * tg.dt
    slope = float(np.polyfit(np.log(hs), np.log(mod), 1)[0]) if np.all(mod > 0) else math.nan
    return ContinuityReport(mixed, time, hs, mod, slope, hn.total)


@dataclass
class SandwichReport:
    time_slope: float
    space_slope: float
    modulus_slope: float
    eps: float
    upper_space: float

    @property
    def passed(self):
        return self.eps > 0


def sandwich_exponents(w, p, phi, gamma, modulus_slope=None, h=None):
    """Fitted exponents of W~(s+h, s)^(1-1/p) and phi_{gamma,p,w}(1/h)^-1 for h <= 1.

    The chain C^{eps,eps} <= C^{W~,phi_gamma,p,w} <= C^{1-eps,L+gamma-eps} needs
    some eps in (0, 1/2) with eps <= time slope <= 1 - eps and
    eps <= space slope <= L + gamma - eps; ``eps`` is the largest such value
    (nonpositive when the chain fails).  A measured time-modulus slope, if
    given, must sit in the same window.
    """
    h = np.logspace(-4, 0, 17) if h is None else h
    _, phi_gpw = derived_phi(phi, gamma, p, w)
    wt = np.array([w_tilde(w, p, 0.0, x) for x in h])
    sx = 1.0 / phi_gpw(1.0 / h)
    ts = float(np.polyfit(np.log(h), np.log(wt), 1)[0])
    xs = float(np.polyfit(np.log(h), np.log(sx), 1)[0])
    upper = phi.L + gamma
    cands = [ts, 1 - ts, xs, upper - xs, 0.5 - 1e-12]
    if modulus_slope is not None:
        cands += [modulus_slope, 1 - modulus_slope]
    return SandwichReport(ts, xs, modulus_slope if modulus_slope is not None else math.nan,
                          float(min(cands)), upper)


def singular_panel_forcing(time_grid, grid, g_values, t_star, exponent):
    """Exact panel averages of (t - t_star)_+^(-exponent) times g(x)."""
    nodes = time_grid.nodes
    a = np.clip(nodes[:-1] - t_star, 0, None)
    b = np.clip(nodes[1:] - t_star, 0, None)
    e = 1.0 - exponent
    avg = (b ** e - a ** e) / e / time_grid.dt
    avg = avg.reshape((-1,) + (1,) * grid.d)
    return PanelForcing(time_grid, grid, avg * np.asarray(g_values)[None])


# -- operator-level checks ----------------------------------------------------

def operator_rows(psi, frame, phi, corpus, t=0.0):
    phi_g, _ = derived_phi(phi, psi.gamma, np.inf, None)
    rows = []
    for i, g in enumerate(corpus):
        f = g.on(frame.grid)
        lhs = float(slice_norms(frame, apply_operator(psi, frame, t, f).values[None], phi)[0])
        rhs = float(slice_norms(frame, f.values[None], phi_g)[0])
        rows.append(Row("operator", {"item": i}, lhs, rhs))
    return rows


def check_operator_bounds(psi, grid, phi, corpus, t=0.0):
    """||psi(t, -i grad) f||_{Lambda^phi} <= N ||f||_{Lambda^{phi_gamma}}, stable under n -> 2n."""
    rows = operator_rows(psi, build_frame(grid), phi, corpus, t)
    fine = operator_rows(psi, build_frame(grid.refined()), phi, corpus, t)
    return EstimateReport.from_rows("operator", {"phi": phi.params}, rows, fine)


def scaling_ratios(psi, grid, cs=(1, 2, 4, 8, 16), t=0.0, bump=None):
    """||psi(t, -i grad) h_c||_{L1} / c^gamma for h_c(x) = c^d h(c x)."""
    frame = build_frame(grid)
    bump = bump or (lambda *x: np.exp(-sum(c * c for c in x)))
    out = []
    for c in cs:
        hc = grid.sample(lambda *x: c ** grid.d * bump(*(c * xi for xi in x)))
        out.append(lp_norm(apply_operator(psi, frame, t, hc), 1) / c ** psi.gamma)
    return np.array(out)


@dataclass
class EquivalenceReport:
    phi: PhiFunction
    p: float
    c_low: float
    c_high: float
    c_low_refined: float
    c_high_refined: float

    @property
    def stable(self):
        return is_stable(self.c_low, self.c_low_refined) and \
            is_stable(self.c_high, self.c_high_refined)


def _equivalence_ratios(grid, corpus, phis, ps):
    frame = build_frame(grid)
    out = {(i, p): [] for i in range(len(phis)) for p in ps}
    for g in corpus:
        f = g.on(grid)
        s0, shells = shell_sup_norms(frame, f.values)
        sup = float(np.abs(f.values).max())
        profiles = {}
        for i, phi in enumerate(phis):
            L0 = phi.L0
            if L0 not in profiles:
                profiles[L0] = difference_profile(f, L0, None)
            wts = phi(2.0 ** np.arange(1, frame.j_max + 1, dtype=float))
            for p in ps:
                dy = float(dyadic_from_shells(s0, shells, wts, p))
                di = direct_from_profile(sup, profiles[L0], phi, p)
                out[(i, p)].append(di / dy)
    return out


def check_norm_equivalence(grid, corpus, phis, ps=(1.0, 2.0, np.inf)):
    """Two-sided constants of direct / dyadic norm ratios, on the grid and its refinement."""
    a = _equivalence_ratios(grid, corpus, phis, ps)
    b = _equivalence_ratios(grid.refined(), corpus, phis, ps)
    reports = []
    for i, phi in enumerate(phis):
        for p in ps:
            ra, rb = np.array(a[(i, p)]), np.array(b[(i, p)])
            reports.append(EquivalenceReport(phi, p, ra.min(), ra.max(), rb.min(), rb.max()))
    return reports
