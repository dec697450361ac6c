"""Run configurations for the CLI.

A config is a TOML document.  Top-level keys hold the spec strings, ``p``
(a number or ``"inf"``), ``seed`` and ``out``; tables hold the grid, the time
grid and per-suite sweep parameters.  Unknown keys are errors, missing keys
take the defaults in ``DEFAULTS`` and are listed in ``RunConfig.filled``.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError
from .specstrings import parse_p, parse_phi, parse_symbol, parse_weight

DEFAULTS = {
    "symbol": "frac:gamma=2,a=const:1",
    "phi": "pow:0.5",
    "weight": "const:1",
    "p": 2.0,
    "gamma": None,  # taken from the symbol
    "seed": 0,
    "out": "lipevo-out",
    "grid": {"d": 1, "n": 4096, "L": 20.0},
    "time": {"T": 1.0, "n_t": 256},
    "kernel": {"n_dt": 17, "dt_min": 1e-3, "dt_max": 10.0,
               "deltas": [0.25, 0.5, 0.75], "refine": True, "extra_symbols": []},
    "operator": {"corpus_size": 20, "scales": [1, 2, 4, 8, 16], "t": 0.0},
    "apriori": {"corpus_size": 10, "refine": True, "spike_widths": [0.25, 0.0625]},
    "trace": {"corpus_size": 10, "refine": True},
    "continuity": {"t_star": 0.5, "exponent": "auto", "xi": 0.6},
    "interpolation": {"p": 2.0, "windows": [12, 16], "corpus_size": 10},
}

_INT_KEYS = {("seed",), ("grid", "d"), ("grid", "n"), ("time", "n_t"), ("kernel", "n_dt"),
             ("operator", "corpus_size"), ("apriori", "corpus_size"),
             ("trace", "corpus_size"),
             ("interpolation", "corpus_size")}


def _merge(defaults, given, path, filled):
    out = {}
    for key in given:
        if key not in defaults:
            dotted = ".".join(path + (key,))
            raise ConfigurationError(f"unknown config key {dotted!r}")
    for key, dv in defaults.items():
        kp = path + (key,)
        if isinstance(dv, dict):
            sub = given.get(key, {})
            if not isinstance(sub, dict):
                raise ConfigurationError(f"config key {'.'.join(kp)!r} must be a table")
            out[key] = _merge(dv, sub, kp, filled)
        elif key in given:
            v = given[key]
            if kp in _INT_KEYS and (isinstance(v, bool) or not isinstance(v, int)):
                raise ConfigurationError(f"config key {'.'.join(kp)!r} must be an integer")
            out[key] = v
        else:
            filled.append(".".join(kp))
            out[key] = copy.deepcopy(dv)
    return out


@dataclass
class RunConfig:
    raw: dict
    filled: list = field(default_factory=list)

    def __post_init__(self):
        r = self.raw
        g, tm = r["grid"], r["time"]
        if g["d"] not in (1, 2):
            raise ConfigurationError(f"grid.d must be 1 or 2, got {g['d']}")
        if g["n"] < 16 or g["n"] & (g["n"] - 1):
            raise ConfigurationError(f"grid.n must be a power of two >= 16, got {g['n']}")
        if not float(g["L"]) > 0 or not float(tm["T"]) > 0:
            raise ConfigurationError("grid.L and time.T must be positive")
        if not 0 <= r["seed"] < 2 ** 64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        self.symbol = parse_symbol(r["symbol"], T=float(tm["T"]))
        if self.symbol.d != g["d"]:
            raise ConfigurationError(
                f"symbol dimension {self.symbol.d} does not match grid.d = {g['d']}")
        self.phi = parse_phi(r["phi"])
        self.weight = parse_weight(r["weight"])
        self.p = parse_p(r["p"])
        if not self.p > 1:
            raise ConfigurationError("p must lie in (1, inf]")
        gamma = r["gamma"]
        if gamma is not None and not math.isclose(float(gamma), self.symbol.gamma):
            raise ConfigurationError(
                f"gamma = {gamma} disagrees with the symbol order {self.symbol.gamma}")
        self.gamma = self.symbol.gamma
        self.extra_symbols = [parse_symbol(s, T=float(tm["T"]))
                              for s in r["kernel"]["extra_symbols"]]
        self.interp_p = parse_p(r["interpolation"]["p"])
        if not 1 < self.interp_p < math.inf:
            raise ConfigurationError("interpolation.p must lie in (1, inf)")

    @property
    def seed(self):
        return self.raw["seed"]

    def section(self, name):
        return self.raw[name]

    def echo(self):
        """Resolved config with every default filled in (``p`` kept as given)."""
        out = copy.deepcopy(self.raw)
        out["gamma"] = self.gamma
        return out


def parse_config(text, overrides=None):
    """Parse TOML text into a validated RunConfig."""
    try:
        given = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"config is not valid TOML: {e}") from e
    for key, value in (overrides or {}).items():
        given[key] = value
    filled = []
    raw = _merge(DEFAULTS, given, (), filled)
    return RunConfig(raw, filled)
