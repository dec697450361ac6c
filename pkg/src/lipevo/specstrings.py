"""Parsers for the compact spec strings used by configs and the CLI.

Grammar (whitespace is not allowed)::

    number  := decimal float, e.g. 1, -0.5, 2e-3
    coef    := number | "const:" number
             | "pw(" number ":" number ("," number ":" number)* ")"
             | "osc(" number "," number "," number ")"          # c0 + c1 sin(w t)
    symbol  := "frac:" "gamma=" number "," "a=" coef ["," "d=" int]
             | "ell:" "a11=" coef ["," "a12=" coef] ["," "a21=" coef] ["," "a22=" coef]
    phi     := "pow:" number | "powlog:" number "," number
    weight  := "const:" number | "pow:" number
             | "pw(" number ":" number ("," number ":" number)* ")"
    p       := number | "inf"

Examples: ``frac:gamma=1.5,a=pw(0:1,0.5:3)``, ``ell:a11=1,a12=0,a22=2``,
``powlog:0.5,1.0``, ``pw(0:1,1:4)``.  In ``ell`` a missing a21 copies a12;
giving only a11 builds the 1-d symbol.  Every failure raises SpecSyntaxError
carrying the character position.
"""

from __future__ import annotations

import math
import re

from .errors import LipevoError, SpecSyntaxError
from .function_spaces import PhiFunction
from .symbols import TimeCoefficient, make_elliptic_matrix, make_fractional
from .weights import WeightSpec

_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[a-z][a-z0-9]*")


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        raise SpecSyntaxError(self.text, self.pos if pos is None else pos, message)

    def peek(self, lit):
        return self.text.startswith(lit, self.pos)

    def accept(self, lit):
        if self.peek(lit):
            self.pos += len(lit)
            return True
        return False

    def expect(self, lit):
        if not self.accept(lit):
            self.error(f"expected {lit!r}")

    def number(self):
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number")
        self.pos = m.end()
        return float(m.group(0))

    def integer(self):
        start = self.pos
        v = self.number()
        if v != int(v):
            self.error("expected an integer", start)
        return int(v)

    def name(self):
        m = _NAME.match(self.text, self.pos)
        if not m:
            self.error("expected a key")
        self.pos = m.end()
        return m.group(0)

    def end(self):
        if self.pos != len(self.text):
            self.error("unexpected trailing text")


def _pairs(sc):
    sc.expect("pw(")
    out = []
    while True:
        s = sc.number()
        sc.expect(":")
        out.append((s, sc.number()))
        if sc.accept(")"):
            return out
        sc.expect(",")


def _coef(sc):
    start = sc.pos
    try:
        if sc.accept("const:"):
            return TimeCoefficient.constant(sc.number())
        if sc.peek("pw("):
            return TimeCoefficient.piecewise(_pairs(sc))
        if sc.accept("osc("):
            c0 = sc.number()
            sc.expect(",")
            c1 = sc.number()
            sc.expect(",")
            w = sc.number()
            sc.expect(")")
            return TimeCoefficient.oscillating(c0, c1, w)
        return TimeCoefficient.constant(sc.number())
    except SpecSyntaxError:
        raise
    except LipevoError as e:
        sc.error(str(e), start)


def _keyvalues(sc, parsers):
    out = {}
    while True:
        kpos = sc.pos
        key = sc.name()
        if key not in parsers:
            sc.error(f"unknown key {key!r}", kpos)
        if key in out:
            sc.error(f"duplicate key {key!r}", kpos)
        sc.expect("=")
        out[key] = (parsers[key](sc), kpos)
        if not sc.accept(","):
            return out


def parse_symbol(text, T=1.0):
    """Build a SymbolSpec from a ``frac:`` or ``ell:`` string."""
    sc = _Scanner(text)
    try:
        if sc.accept("frac:"):
            kv = _keyvalues(sc, {"gamma": _Scanner.number, "a": _coef, "d": _Scanner.integer})
            sc.end()
            for req in ("gamma", "a"):
                if req not in kv:
                    sc.error(f"missing key {req!r}")
            d = kv.get("d", (1, 0))[0]
            if d not in (1, 2):
                sc.error("d must be 1 or 2", kv["d"][1])
            return make_fractional(kv["gamma"][0], kv["a"][0], d=d, T=T)
        if sc.accept("ell:"):
            keys = ("a11", "a12", "a21", "a22")
            kv = _keyvalues(sc, {k: _coef for k in keys})
            sc.end()
            if "a11" not in kv:
                sc.error("missing key 'a11'")
            if set(kv) == {"a11"}:
                return make_elliptic_matrix([[kv["a11"][0]]], T)
            zero = TimeCoefficient.constant(0.0)
            a12 = kv.get("a12", (zero,))[0]
            a21 = kv.get("a21", (a12,))[0]
            if "a22" not in kv:
                sc.error("missing key 'a22'")
            return make_elliptic_matrix([[kv["a11"][0], a12], [a21, kv["a22"][0]]], T)
        sc.error("expected 'frac:' or 'ell:'")
    except SpecSyntaxError:
        raise
    except LipevoError as e:
        raise SpecSyntaxError(text, 0, str(e)) from e


def parse_phi(text):
    sc = _Scanner(text)
    try:
        if sc.accept("powlog:"):
            a = sc.number()
            sc.expect(",")
            b = sc.number()
            sc.end()
            return PhiFunction.power_log(a, b)
        if sc.accept("pow:"):
            a = sc.number()
            sc.end()
            return PhiFunction.power(a)
        sc.error("expected 'pow:' or 'powlog:'")
    except SpecSyntaxError:
        raise
    except LipevoError as e:
        raise SpecSyntaxError(text, 0, str(e)) from e


def parse_weight(text):
    sc = _Scanner(text)
    try:
        if sc.accept("const:"):
            c = sc.number()
            sc.end()
            return WeightSpec.const(c)
        if sc.accept("pow:"):
            a = sc.number()
            sc.end()
            return WeightSpec.power(a)
        if sc.peek("pw("):
            pairs = _pairs(sc)
            sc.end()
            return WeightSpec.piecewise(pairs)
        sc.error("expected 'const:', 'pow:' or 'pw('")
    except SpecSyntaxError:
        raise
    except LipevoError as e:
        raise SpecSyntaxError(text, 0, str(e)) from e


def parse_p(value):
    """Integrability exponent in (1, inf]; accepts numbers or the token 'inf'."""
    if isinstance(value, str):
        if value == "inf":
            return math.inf
        sc = _Scanner(value)
        v = sc.number()
        sc.end()
    else:
        v = float(value)
    if not v >= 1:
        raise SpecSyntaxError(str(value), 0, f"p must be at least 1, got {v}")
    return v


def parse_grid(text):
    """``d=1,n=4096,L=20`` -> dict(d=..., n=..., L=...)."""
    sc = _Scanner(text)
    out = {}
    while True:
        kpos = sc.pos
        m = re.compile(r"[A-Za-z]+").match(text, sc.pos)
        if not m or m.group(0) not in ("d", "n", "L"):
            sc.error("expected one of d, n, L", kpos)
        key = m.group(0)
        if key in out:
            sc.error(f"duplicate key {key!r}", kpos)
        sc.pos = m.end()
        sc.expect("=")
        out[key] = sc.number() if key == "L" else sc.integer()
        if not sc.accept(","):
            break
    sc.end()
    return out
