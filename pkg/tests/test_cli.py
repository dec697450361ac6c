import filecmp
import json
import math
import os

import numpy as np
import pytest

from lipevo import io
from lipevo.cli import main
from lipevo.function_spaces import PhiFunction, build_frame, lipschitz_norm_dyadic
from lipevo.grid import SpectralGrid
from lipevo.solver import SpaceTimeFunction, TimeGrid

SMALL = """seed = 3
[grid]
n = 256
L = 10.0
[time]
n_t = 32
[kernel]
n_dt = 5
[operator]
corpus_size = 4
[apriori]
corpus_size = 2
[trace]
corpus_size = 2
[interpolation]
corpus_size = 4
"""

KERNEL = """[grid]
n = 1024
L = 10.0
[kernel]
n_dt = 5
dt_min = 0.01
dt_max = 1.0
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_run_kernel_suite(tmp_path):
    cfg = write(tmp_path, "k.toml", KERNEL)
    out = tmp_path / "out"
    assert main(["run", "--config", cfg, "--suite", "kernel", "--out", str(out)]) == 0
    rows = io.read_csv(out / "kernel_estimates.csv")
    assert tuple(rows[0]) == io.KERNEL_COLUMNS
    l1 = [r for r in rows if r["estimate"] == "L1" and r["m"] == "0"]
    assert len(l1) == 5
    assert all(float(r["ratio"]) <= 1 + 1e-8 for r in l1)
    # the ratio column is reproducible from the other two
    for r in rows:
        assert float(r["ratio"]) == float(r["measured"]) / float(r["bound_rhs"])
    for name in ("summary.csv", "summary.png", "kernel_estimates.png", "resolved_config.json"):
        assert (out / name).exists()
    summary = io.read_csv(out / "summary.csv")
    assert tuple(summary[0]) == io.SUMMARY_COLUMNS
    assert all(r["stable"] == "true" for r in summary)
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["grid"]["n"] == 1024 and resolved["gamma"] == 2.0


def test_reruns_byte_identical(tmp_path):
    cfg = write(tmp_path, "s.toml", SMALL)
    for d in ("a", "b"):
        for suite in ("interpolation", "apriori"):
            main(["run", "--config", cfg, "--suite", suite, "--out", str(tmp_path / d)])
    names = sorted(n for n in os.listdir(tmp_path / "a") if n.endswith((".csv", ".json")))
    assert "interpolation_checks.csv" in names and "apriori_checks.csv" in names
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names,
                                               shallow=False)
    assert mismatch == [] and errors == []


def test_seed_override_changes_corpus(tmp_path):
    cfg = write(tmp_path, "s.toml", SMALL)
    main(["run", "--config", cfg, "--suite", "interpolation", "--out", str(tmp_path / "a")])
    main(["run", "--config", cfg, "--suite", "interpolation", "--out", str(tmp_path / "b"),
          "--seed", "11"])
    a = (tmp_path / "a" / "interpolation_checks.csv").read_text()
    b = (tmp_path / "b" / "interpolation_checks.csv").read_text()
    assert a != b
    assert json.loads((tmp_path / "b" / "resolved_config.json").read_text())["seed"] == 11


def test_check_csv_format(tmp_path):
    cfg = write(tmp_path, "s.toml", SMALL)
    main(["run", "--config", cfg, "--suite", "interpolation", "--out", str(tmp_path)])
    rows = io.read_csv(tmp_path / "interpolation_checks.csv")
    assert tuple(rows[0]) == io.CHECK_COLUMNS
    for r in rows:
        json.loads(r["param_json"])
        assert float(r["ratio"]) == float(r["measured"]) / float(r["bound"])
        assert r["stable"] in ("true", "false")


def test_unstable_exit_code(tmp_path, capsys):
    # n_t = 32 is too coarse for the time-modulus slope
    cfg = write(tmp_path, "s.toml", SMALL)
    assert main(["run", "--config", cfg, "--suite", "continuity", "--out", str(tmp_path)]) == 1
    assert "UNSTABLE continuity:time_slope" in capsys.readouterr().err


@pytest.mark.parametrize("text,match", [
    ("[grid]\nm = 3\n", "unknown config key"),
    ('phi = "pow:"\n', "position"),
    ('weight = "pow:1.2"\n[grid]\nn = 256\n[time]\nn_t = 16\n', "A_2"),
    ("[grid]\nn = 100\n", "power of two"),
])
def test_error_exit_code(tmp_path, capsys, text, match):
    cfg = write(tmp_path, "bad.toml", text)
    assert main(["run", "--config", cfg, "--suite", "apriori", "--out", str(tmp_path)]) == 2
    assert match in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.toml"), "--suite", "kernel"]) == 2


def test_dump_solution(tmp_path):
    cfg = write(tmp_path, "s.toml", SMALL)
    main(["run", "--config", cfg, "--suite", "continuity", "--out", str(tmp_path),
          "--dump-solution"])
    slices = io.read_solution_binary(tmp_path / "continuity_solution.bin")
    assert len(slices) == 33
    assert slices[0][0] == 0.0 and slices[-1][0] == 1.0
    assert all(v.size == 256 for _, v in slices)
    assert np.all(slices[0][1] == 0)


def test_solution_binary_round_trip(tmp_path):
    g = SpectralGrid(2, 16, 1.0)
    tg = TimeGrid(1.0, 8)
    vals = np.random.default_rng(0).normal(size=(9, 16, 16)) * (1 + 2j)
    u = SpaceTimeFunction(tg, g, vals)
    io.write_solution_binary(tmp_path / "u.bin", u)
    back = io.read_solution_binary(tmp_path / "u.bin")
    for (t, v), t0, v0 in zip(back, tg.nodes, vals):
        assert t == t0
        assert np.array_equal(v, v0.ravel())
    raw = (tmp_path / "u.bin").read_bytes()
    (tmp_path / "cut.bin").write_bytes(raw[:-8])
    with pytest.raises(Exception, match="truncated"):
        io.read_solution_binary(tmp_path / "cut.bin")


def test_solution_csv(tmp_path):
    g = SpectralGrid(1, 16, 1.0)
    tg = TimeGrid(1.0, 8)
    u = SpaceTimeFunction.sample(tg, g, lambda t, x: t + 1j * x)
    io.write_solution_csv(tmp_path / "u.csv", u)
    rows = io.read_csv(tmp_path / "u.csv")
    assert len(rows) == 9 * 16
    assert float(rows[17]["re"]) == float(rows[17]["t"])
    assert float(rows[17]["im"]) == float(rows[17]["x"])


def _samples(path, grid, values):
    with open(path, "w") as fh:
        fh.write("x,value\n")
        for x, v in zip(grid.x_axis, values):
            fh.write(f"{float(x)!r},{float(v)!r}\n")


def test_norm_command(tmp_path, capsys):
    g = SpectralGrid(1, 512, math.pi)
    vals = np.sin(g.x_axis)
    path = tmp_path / "f.csv"
    _samples(path, g, vals)
    assert main(["norm", "--phi", "pow:0.5", "--p", "inf", "--input", str(path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "norm,value"
    out = dict(line.split(",") for line in lines[1:])
    phi = PhiFunction.power(0.5)
    assert float(out["dyadic"]) == lipschitz_norm_dyadic(build_frame(g), g.function(vals), phi,
                                                         math.inf)
    hs = g.dx * np.arange(1, 257)
    assert float(out["direct"]) == pytest.approx(1 + (2 * np.sin(hs / 2) / np.sqrt(hs)).max(),
                                                 rel=1e-12)


def test_norm_command_bad_input(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("x,value\n0.0,1.0\n0.3,2.0\n0.5,x\n")
    assert main(["norm", "--phi", "pow:0.5", "--p", "2", "--input", str(path)]) == 2
    path.write_text("x,value\n-1.0,1.0\n0.1,2.0\n0.5,3.0\n")
    assert main(["norm", "--phi", "pow:0.5", "--p", "2", "--input", str(path)]) == 2


def test_kernel_command(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["kernel", "--symbol", "frac:gamma=2,a=1", "--t", "0.25", "--s", "0",
                 "--grid", "n=1024,L=10", "--out", str(out)]) == 0
    rows = io.read_csv(out)
    x = np.array([float(r["x"]) for r in rows])
    re = np.array([float(r["re"]) for r in rows])
    assert x.size == 1024
    assert np.abs(re - np.exp(-x ** 2) / np.sqrt(np.pi)).max() <= 1e-12
    assert (tmp_path / "p.png").exists()


def test_kernel_command_2d(tmp_path):
    out = tmp_path / "p2.csv"
    assert main(["kernel", "--symbol", "ell:a11=1,a12=0,a22=1", "--t", "0.5", "--s", "0",
                 "--grid", "d=2,n=32,L=6", "--out", str(out)]) == 0
    rows = io.read_csv(out)
    assert tuple(rows[0]) == ("x", "y", "re", "im") and len(rows) == 32 * 32
    assert (tmp_path / "p2.png").exists()
    assert main(["kernel", "--symbol", "ell:a11=1,a12=0,a22=1", "--t", "0.5", "--s", "0",
                 "--grid", "d=1,n=32,L=6", "--out", str(out)]) == 2
    assert main(["kernel", "--symbol", "frac:gamma=2,a=1", "--t", "0", "--s", "0.5",
                 "--out", str(out)]) == 2
