"""CSV reports and solution dumps.

Floats are written in shortest round-trip form (``repr``), so every row
reproduces its ratio exactly from the ``measured`` and ``bound`` columns.
"""

from __future__ import annotations

import csv
import json
import math
import struct

import numpy as np

from .errors import StructuralError

KERNEL_COLUMNS = ("estimate", "family", "j", "m", "dt", "measured", "bound_rhs", "ratio")
CHECK_COLUMNS = ("check", "param_json", "measured", "bound", "ratio", "fitted_N", "stable")
SUMMARY_COLUMNS = ("suite", "estimate", "fitted_N", "fitted_N_refined", "stable", "note")


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return str(v)


def param_json(params):
    return json.dumps(_jsonable(params), sort_keys=True, separators=(",", ":"))


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def kernel_rows(family_label, fs_report):
    """Rows of the kernel estimate CSV; L1 rows double as the mass rows."""
    out = []
    for r in fs_report.rows:
        prm = r.params
        out.append((r.check, family_label, prm.get("j"), prm["m"], prm["dt"],
                    r.measured, r.bound, r.ratio))
    return out


def check_rows(report):
    """Rows of a check CSV from an EstimateReport."""
    return [(r.check, param_json(r.params), r.measured, r.bound, r.ratio, report.N, report.stable)
            for r in report.rows]


def write_solution_csv(path, u):
    """One line per (t, x) sample: ``t,x...,re,im``."""
    grid = u.grid
    xs = [np.ravel(c) for c in np.meshgrid(*([grid.x_axis] * grid.d), indexing="ij")]
    cols = ("t",) + (("x",) if grid.d == 1 else ("x", "y")) + ("re", "im")
    rows = []
    for t, sl in zip(u.time_grid.nodes, u.values):
        v = np.ravel(sl)
        for i in range(v.size):
            rows.append((float(t),) + tuple(float(c[i]) for c in xs) + (v[i].real, v[i].imag))
    write_csv(path, cols, rows)


# per slice: little-endian f64 t, u64 n, then n (re, im) f64 pairs
_HEAD = struct.Struct("<dQ")


def write_solution_binary(path, u):
    with open(path, "wb") as fh:
        for t, sl in zip(u.time_grid.nodes, u.values):
            v = np.ravel(sl).astype("<c16")
            fh.write(_HEAD.pack(float(t), v.size))
            fh.write(v.view("<f8").tobytes())


def read_solution_binary(path):
    """List of (t, complex samples) slices."""
    with open(path, "rb") as fh:
        data = fh.read()
    out, pos = [], 0
    while pos < len(data):
        if pos + _HEAD.size > len(data):
            raise StructuralError("truncated slice header")
        t, n = _HEAD.unpack_from(data, pos)
        pos += _HEAD.size
        end = pos + 16 * n
        if end > len(data):
            raise StructuralError("truncated slice payload")
        out.append((t, np.frombuffer(data[pos:end], dtype="<c16").copy()))
        pos = end
    return out


def read_samples(path):
    """Read ``x,value`` (d = 1) or ``x,y,value`` (d = 2) samples on a uniform periodic grid.

    Returns (d, n, L, values) with values shaped (n,) * d in the grid's index
    order; x must run over -L + k 2L / n.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    if not rows:
        raise StructuralError(f"{path} holds no samples")
    try:
        arr = np.array([[float(c) for c in r] for r in rows])
    except ValueError as e:
        raise StructuralError(f"{path}: {e}") from e
    d = arr.shape[1] - 1
    if d not in (1, 2):
        raise StructuralError("samples need columns x,value or x,y,value")
    axes = [np.unique(arr[:, i]) for i in range(d)]
    n = axes[0].size
    if any(a.size != n for a in axes) or arr.shape[0] != n ** d:
        raise StructuralError("samples do not form a full square grid")
    L = -float(axes[0][0])
    step = 2 * L / n
    if not np.allclose(axes[0], -L + step * np.arange(n), rtol=0, atol=1e-9 * L):
        raise StructuralError("x must be the uniform grid -L + 2Lk/n")
    idx = [np.rint((arr[:, i] + L) / step).astype(int) for i in range(d)]
    values = np.zeros((n,) * d)
    values[tuple(idx)] = arr[:, -1]
    return d, n, L, values


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True
