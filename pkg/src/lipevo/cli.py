"""Command-line front end.

Usage::

    lipevo run --config <file> --suite <name> [--out <dir>] [--seed <u64>]
    lipevo norm --phi <spec> --p <val> --input <csv>
    lipevo kernel --symbol <spec> --t <val> --s <val> --grid d=1,n=4096,L=20 --out <csv>

Suites: kernel, operator, apriori, trace, continuity, interpolation, all.  The
spec-string grammar is documented in ``lipevo.specstrings``.  ``run`` writes
one CSV per check, a ``summary.csv``, the resolved configuration and a PNG
next to each CSV.  Exit status: 0 when every stability flag passes, 1 when
one fails, 2 for unreadable input, invalid configuration, a weight rejected
by a precondition gate, or an I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import io, plotting
from .config import parse_config
from .corpus import apriori_corpus, norm_corpus, random_sequences
from .errors import LipevoError, PreconditionError
from .function_spaces import build_frame, lipschitz_norm_direct, lipschitz_norm_dyadic
from .grid import SpectralGrid
from .interpolation import (SequenceSpaceElement, check_interpolation, k_functional)
from .kernels import (FSSweep, KernelFamily, default_sweep, kernel, shell_decay_check,
                      verify_fs_estimates)
from .reports import EstimateReport, Row, is_stable
from .solver import TimeGrid, mild_solve
from .specstrings import parse_grid, parse_p, parse_phi, parse_symbol
from .verify import (check_apriori, check_continuity, check_maximal_bound,
                     check_norm_equivalence, check_operator_bounds, check_trace_embedding,
                     check_weak_l1, require_a1, require_ap, sandwich_exponents,
                     scaling_ratios, singular_panel_forcing)

SUITES = ("kernel", "operator", "apriori", "trace", "continuity", "interpolation")
SCALING_TOLERANCE = 0.2
SLOPE_TOLERANCE = 0.1


class Context:
    """Resolved run inputs and the artifact sink of one ``run`` invocation."""

    def __init__(self, cfg, out, dump=False):
        self.cfg = cfg
        self.out = out
        self.dump = dump
        g = cfg.section("grid")
        tm = cfg.section("time")
        self.grid = SpectralGrid(g["d"], g["n"], float(g["L"]))
        self.time_grid = TimeGrid(float(tm["T"]), tm["n_t"])
        self.family = KernelFamily(cfg.symbol, self.grid)
        self.summary = []

    def path(self, name):
        return os.path.join(self.out, name)

    def rng(self, *stream):
        return np.random.default_rng([self.cfg.seed, *stream])

    def add(self, suite, name, N, N_refined, stable, note=""):
        self.summary.append((suite, name, float(N), float(N_refined), bool(stable), note))

    def add_report(self, suite, rep, name=None):
        self.add(suite, name or rep.id, rep.N, rep.N_refined, rep.stable, rep.note)

    def write_checks(self, suite, reports):
        rows = [r for rep in reports for r in io.check_rows(rep)]
        io.write_csv(self.path(f"{suite}_checks.csv"), io.CHECK_COLUMNS, rows)
        for rep in reports:
            plotting.check_ratios(rep, self.path(f"{suite}_{_slug(rep.id)}.png"))


def _slug(s):
    return "".join(c if c.isalnum() else "_" for c in s).strip("_")


def _mode_near(grid, xi):
    """On-grid mode index closest to frequency ``xi`` along the first axis."""
    k = max(1, int(round(xi * grid.half_width / np.pi)))
    return (k,) + (0,) * (grid.d - 1)


def _wave(grid, xi):
    """Grid-agnostic callable for sin(xi_k x_1) with xi_k on the grid's frequency lattice."""
    xi_k = _mode_near(grid, xi)[0] * np.pi / grid.half_width
    return lambda *x: np.sin(xi_k * x[0])


# -- suites -------------------------------------------------------------------

def suite_kernel(ctx):
    kc = ctx.cfg.section("kernel")
    rows = []
    for psi in [ctx.cfg.symbol] + ctx.cfg.extra_symbols:
        fam = KernelFamily(psi, ctx.grid)
        base = default_sweep(fam, kc["n_dt"], (math.log10(kc["dt_min"]), math.log10(kc["dt_max"])))
        sweep = FSSweep(base.dts, base.js, deltas=tuple(float(x) for x in kc["deltas"]))
        rep = verify_fs_estimates(fam, sweep, refine=kc["refine"])
        rows += io.kernel_rows(psi.label, rep)
        for e in rep.estimates:
            ctx.add("kernel", f"{psi.label}:{e.id}", e.N, e.N_refined, e.stable, e.note)
        for m in sweep.ms:
            ctx.add("kernel", f"{psi.label}:L1_slope[m={m}]", rep.slopes[("L1", m)], math.nan,
                    True, "log-log slope of ||d_t^m p||_L1 in t - s (informational)")
        for delta in sweep.deltas:
            ok, srows = shell_decay_check(fam, 0.1, delta)
            worst = min((r[3] for r in srows), default=math.nan)
            ctx.add("kernel", f"{psi.label}:shell_decay[delta={delta}]", worst, math.nan, ok,
                    "min measured/predicted rate on the top two shells at t - s = 0.1")
    io.write_csv(ctx.path("kernel_estimates.csv"), io.KERNEL_COLUMNS, rows)
    plotting.kernel_estimates(rows, ctx.path("kernel_estimates.png"))


def suite_operator(ctx):
    oc = ctx.cfg.section("operator")
    psi, phi, grid = ctx.cfg.symbol, ctx.cfg.phi, ctx.grid
    corpus = norm_corpus(grid, ctx.cfg.seed, oc["corpus_size"])
    rep = check_operator_bounds(psi, grid, phi, corpus, float(oc["t"]))
    ctx.add_report("operator", rep)
    sc = scaling_ratios(psi, grid, tuple(oc["scales"]), float(oc["t"]))
    srows = [Row("scaling", {"c": c}, float(v), float(sc[0])) for c, v in zip(oc["scales"], sc)]
    spread = float(sc.max() / sc.min())
    srep = EstimateReport("scaling", {"scales": oc["scales"]}, spread, None, math.nan,
                          spread <= 1 + SCALING_TOLERANCE, srows,
                          "max/min of ||psi h_c||_L1 / c^gamma")
    ctx.add_report("operator", srep)
    reports = [rep, srep]
    p = ctx.cfg.p
    for eq in check_norm_equivalence(grid, corpus, [phi], (p,)):
        ctx.add("operator", f"equivalence_upper[p={p:g}]", eq.c_high, eq.c_high_refined,
                is_stable(eq.c_high, eq.c_high_refined), "direct / dyadic")
        ctx.add("operator", f"equivalence_lower[p={p:g}]", 1 / eq.c_low, 1 / eq.c_low_refined,
                is_stable(eq.c_low, eq.c_low_refined), "dyadic / direct")
    ctx.write_checks("operator", reports)


def _spikes(grid, T, widths):
    wave = _wave(grid, 4.0)
    t0 = 0.5 * T
    return [(lambda t, *x, e=float(e): (abs(t - t0) < e / 2) * wave(*x) / e) for e in widths]


def suite_apriori(ctx):
    ac = ctx.cfg.section("apriori")
    cfg, fam, tg = ctx.cfg, ctx.family, ctx.time_grid
    require_ap(cfg.weight, cfg.p)
    corpus = apriori_corpus(ctx.grid, cfg.seed, ac["corpus_size"])
    rep = check_apriori(fam, cfg.phi, cfg.p, cfg.weight, corpus, tg, ac["refine"])
    ctx.add_report("apriori", rep)
    wave = _wave(ctx.grid, 4.0)
    T = tg.T
    f = lambda t, *x: (t <= T / 2) * wave(*x)  # noqa: E731
    mrep = check_maximal_bound(fam, cfg.phi, f, tg, ac["refine"])
    ctx.add_report("apriori", mrep)
    reports = [rep, mrep]
    try:
        require_a1(cfg.weight, T)
    except PreconditionError as e:
        ctx.add("apriori", "weak_l1", math.nan, math.nan, True, f"skipped: {e}")
    else:
        wrep = check_weak_l1(fam, cfg.phi, cfg.weight, _spikes(ctx.grid, T, ac["spike_widths"]),
                             tg, ac["refine"])
        ctx.add_report("apriori", wrep)
        reports.append(wrep)
    ctx.write_checks("apriori", reports)


def suite_trace(ctx):
    tc = ctx.cfg.section("trace")
    cfg = ctx.cfg
    require_ap(cfg.weight, cfg.p)
    corpus = apriori_corpus(ctx.grid, cfg.seed, tc["corpus_size"])
    tr = check_trace_embedding(ctx.family, cfg.phi, cfg.p, cfg.weight, corpus, ctx.time_grid,
                               tc["refine"])
    ctx.add_report("trace", tr.estimate)
    ctx.add("trace", "trace_inner", tr.inner_max_ratio, math.nan,
            tr.inner_max_ratio <= 1 + 1e-12, "max over nodes of l^inf / l^p over shells")
    ctx.write_checks("trace", [tr.estimate])


def _continuity_run(ctx, tg, slope_ks, exponent):
    cc = ctx.cfg.section("continuity")
    grid = ctx.grid
    gv = np.broadcast_to(_wave(grid, float(cc["xi"]))(*grid.x), grid.shape)
    F = singular_panel_forcing(tg, grid, gv, float(cc["t_star"]), exponent)
    u = mild_solve(ctx.family, grid.constant(0.0), F)
    cfg = ctx.cfg
    return u, check_continuity(ctx.family.frame, u, cfg.phi, cfg.gamma, cfg.p, cfg.weight,
                               slope_ks=slope_ks)


def suite_continuity(ctx):
    cc = ctx.cfg.section("continuity")
    cfg = ctx.cfg
    require_ap(cfg.weight, cfg.p)
    p = cfg.p
    exponent = cc["exponent"]
    if exponent == "auto":
        # just inside L_p near the singularity, so the time modulus is ~ h^(1 - 1/p)
        exponent = max(0.0, 1.0 / p - 0.02)
    ks = [2 ** i for i in range(6)]
    u, c1 = _continuity_run(ctx, ctx.time_grid, ks, float(exponent))
    _, c2 = _continuity_run(ctx, ctx.time_grid.refined(), [2 * k for k in ks], float(exponent))
    for a, b in ((c1.mixed, c2.mixed), (c1.time, c2.time)):
        ctx.add("continuity", a.id, a.N, b.N, is_stable(a.N, b.N), a.note)
    target = 1 - 1 / p
    const_w = cfg.weight.kind == "const"
    ctx.add("continuity", "time_slope", c1.slope, c2.slope,
            abs(c1.slope / target - 1) <= SLOPE_TOLERANCE if const_w and target > 0
            else math.isfinite(c1.slope),
            f"target {target:g}" if const_w else "weighted: checked through the sandwich")
    sw = sandwich_exponents(cfg.weight, p, cfg.phi, cfg.gamma, c1.slope)
    ctx.add("continuity", "sandwich_eps", sw.eps, math.nan, sw.passed,
            "largest eps of the Hoelder sandwich")
    ctx.write_checks("continuity", [c1.mixed, c1.time])
    plotting.profile(c1.hs, c1.modulus, ctx.path("continuity_modulus.png"), xlabel="h")
    if ctx.dump:
        io.write_solution_binary(ctx.path("continuity_solution.bin"), u)


def suite_interpolation(ctx):
    ic = ctx.cfg.section("interpolation")
    cfg = ctx.cfg
    p, gamma, phi, w = cfg.interp_p, cfg.gamma, cfg.phi, cfg.weight
    ts = np.logspace(-3, 3, 13)
    single = max(abs(k_functional(SequenceSpaceElement([1.0]), t, phi, gamma, "brute_force")
                     - float(phi(1.0)) * min(1.0, t)) for t in ts)
    ctx.add("interpolation", "k_single_entry", single, math.nan, single == 0.0,
            "max |K_brute - phi(1) min(1, t)|")
    results, gaps, reports = [], [], []
    for window in ic["windows"]:
        rng = ctx.rng(window)
        corpus = [SequenceSpaceElement(2.0 ** -np.arange(window))]
        corpus += [SequenceSpaceElement(a) for a in random_sequences(rng, window, ic["corpus_size"])]
        res = check_interpolation(phi, gamma, p, w, corpus)
        res.estimate.id = f"interpolation[window={window}]"
        results.append(res)
        reports.append(res.estimate)
        gap = 1.0
        if window <= 16:
            for a in corpus:
                for t in ts:
                    gap = max(gap, k_functional(a, t, phi, gamma, "brute_force")
                              / k_functional(a, t, phi, gamma))
        gaps.append(gap)
    first, last = results[0], results[-1]
    ctx.add("interpolation", "c_high", first.c_high, last.c_high,
            is_stable(first.c_high, last.c_high), f"windows {ic['windows']}")
    ctx.add("interpolation", "c_low_inverse", 1 / first.c_low, 1 / last.c_low,
            is_stable(first.c_low, last.c_low), f"windows {ic['windows']}")
    ctx.add("interpolation", "k_brute_over_closed", gaps[0], gaps[-1],
            is_stable(gaps[0], gaps[-1]), "max K_brute / K_closed")
    ctx.write_checks("interpolation", reports)


RUNNERS = {"kernel": suite_kernel, "operator": suite_operator, "apriori": suite_apriori,
           "trace": suite_trace, "continuity": suite_continuity,
           "interpolation": suite_interpolation}


def run_suite(cfg, suite, out, dump=False, log=None):
    """Run one suite (or all) and write its artifacts; returns the exit status."""
    log = log or sys.stderr
    os.makedirs(out, exist_ok=True)
    ctx = Context(cfg, out, dump)
    names = SUITES if suite == "all" else (suite,)
    with open(ctx.path("resolved_config.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.echo(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name in names:
        t0 = time.perf_counter()
        RUNNERS[name](ctx)
        print(f"[{name}] done in {time.perf_counter() - t0:.1f} s", file=log)
    io.write_csv(ctx.path("summary.csv"), io.SUMMARY_COLUMNS, ctx.summary)
    plotting.summary(ctx.summary, ctx.path("summary.png"))
    bad = [s for s in ctx.summary if not s[4]]
    for s in bad:
        print(f"UNSTABLE {s[0]}:{s[1]} N={s[2]!r} refined={s[3]!r} {s[5]}", file=log)
    return 1 if bad else 0


# -- subcommands -----------------------------------------------------------

def cmd_run(args):
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    cfg = parse_config(text, overrides)
    if cfg.filled:
        print("defaults filled: " + ", ".join(cfg.filled), file=sys.stderr)
    out = args.out or cfg.raw["out"]
    return run_suite(cfg, args.suite, out, dump=args.dump_solution)


def cmd_norm(args):
    phi = parse_phi(args.phi)
    p = parse_p(args.p)
    d, n, L, values = io.read_samples(args.input)
    grid = SpectralGrid(d, n, L)
    f = grid.function(values)
    dyadic = lipschitz_norm_dyadic(build_frame(grid), f, phi, p)
    direct = lipschitz_norm_direct(f, phi, p)
    print("norm,value")
    print(f"dyadic,{io.fmt(float(dyadic))}")
    print(f"direct,{io.fmt(float(direct))}")
    return 0


def cmd_kernel(args):
    g = parse_grid(args.grid)
    for key, default in (("d", 1), ("n", 4096), ("L", 20.0)):
        g.setdefault(key, default)
    grid = SpectralGrid(g["d"], g["n"], float(g["L"]))
    psi = parse_symbol(args.symbol, T=max(args.t, 1.0))
    if psi.d != grid.d:
        raise LipevoError(f"symbol dimension {psi.d} does not match grid d = {grid.d}")
    p = kernel(KernelFamily(psi, grid), args.t, args.s, args.m).values
    xs = [np.ravel(c) for c in np.meshgrid(*([grid.x_axis] * grid.d), indexing="ij")]
    cols = ("x", "re", "im") if grid.d == 1 else ("x", "y", "re", "im")
    v = np.ravel(p)
    rows = [tuple(float(c[i]) for c in xs) + (v[i].real, v[i].imag) for i in range(v.size)]
    io.write_csv(args.out, cols, rows)
    png = os.path.splitext(args.out)[0] + ".png"
    if grid.d == 1:
        plotting.profile(grid.x_axis, p, png)
    else:
        L = grid.half_width
        plotting.image(p, (-L, L, -L, L), png)
    return 0


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="lipevo", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a verification suite")
    r.add_argument("--config", required=True)
    r.add_argument("--suite", required=True, choices=SUITES + ("all",))
    r.add_argument("--out")
    r.add_argument("--seed", type=_u64)
    r.add_argument("--dump-solution", action="store_true",
                   help="also write the continuity solution as a binary dump")
    r.set_defaults(func=cmd_run)
    n = sub.add_parser("norm", help="Lambda^phi_p norms of sampled data")
    n.add_argument("--phi", required=True)
    n.add_argument("--p", required=True)
    n.add_argument("--input", required=True)
    n.set_defaults(func=cmd_norm)
    k = sub.add_parser("kernel", help="sample the fundamental solution p(t, s, .)")
    k.add_argument("--symbol", required=True)
    k.add_argument("--t", type=float, required=True)
    k.add_argument("--s", type=float, required=True)
    k.add_argument("--m", type=int, default=0, choices=(0, 1))
    k.add_argument("--grid", default="d=1,n=4096,L=20")
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kernel)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, LipevoError) as e:
        print(f"lipevo: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
