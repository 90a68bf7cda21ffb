"""Canonical text rendering and a lossless structured format.

Expressions use ``h`` for hbar, ``lam`` for lambda and ``q1..qr`` (or custom
names) for the series variables. Terms are ordered by q-exponent in
graded-lex order, then by ascending hbar and lambda powers, so equal values
always render to equal strings.
"""
from __future__ import annotations

import json
import re
from typing import Sequence

import numpy as np

from .series import Laurent, MatrixSeries, Q, QSeries, box_exponents

__all__ = [
    "format_rational",
    "format_laurent",
    "format_series",
    "format_matrix",
    "format_table",
    "parse_expression",
    "to_structured",
    "from_structured",
    "dumps",
    "loads",
]


def format_rational(c) -> str:
    c = Q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _power(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def _join_terms(terms: list[tuple[object, list[str]]]) -> str:
    if not terms:
        return "0"
    out = []
    for k, (c, factors) in enumerate(terms):
        neg = c < 0
        a = -c if neg else c
        body = "*".join(factors)
        if not body:
            text = format_rational(a)
        elif a == 1:
            text = body
        else:
            text = f"{format_rational(a)}*{body}"
        if k == 0:
            out.append(("-" if neg else "") + text)
        else:
            out.append((" - " if neg else " + ") + text)
    return "".join(out)


def _laurent_factors(h: int, l: int) -> list[str]:
    f = []
    if h:
        f.append(_power("h", h))
    if l:
        f.append(_power("lam", l))
    return f


def format_laurent(x: Laurent) -> str:
    return _join_terms([(c, _laurent_factors(h, l)) for (h, l), c in x.items()])


def _q_factors(d: Sequence[int], names: Sequence[str]) -> list[str]:
    return [_power(names[a], e) for a, e in enumerate(d) if e]


def _default_names(r: int) -> list[str]:
    return [f"q{a + 1}" for a in range(r)]


def format_series(s: QSeries, names: Sequence[str] | None = None) -> str:
    names = names or _default_names(s.r)
    terms = []
    for d, v in s.items():
        for (h, l), c in v.items():
            terms.append((c, _q_factors(d, names) + _laurent_factors(h, l)))
    return _join_terms(terms)


def format_matrix(m: MatrixSeries, names: Sequence[str] | None = None,
                  labels: Sequence[str] | None = None) -> str:
    """One line per nonzero entry: ``(i,j): expression`` (1-based)."""
    shape = m.shape
    if shape is None:
        return "0"
    lines = []
    if len(shape) == 1:
        for i in range(shape[0]):
            e = m.entry(i)
            if e:
                lab = labels[i] if labels else str(i + 1)
                lines.append(f"[{lab}]: {format_series(e, names)}")
    else:
        for i in range(shape[0]):
            for j in range(shape[1]):
                e = m.entry(i, j)
                if e:
                    lines.append(f"({i + 1},{j + 1}): {format_series(e, names)}")
    return "\n".join(lines) if lines else "0"


def format_table(rows: Sequence[Sequence[str]], header: Sequence[str] | None = None) -> str:
    """Left-aligned text table."""
    data = [list(header)] if header else []
    data += [list(r) for r in rows]
    if not data:
        return ""
    widths = [max(len(r[i]) for r in data) for i in range(len(data[0]))]
    out = []
    for k, r in enumerate(data):
        out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if header and k == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out)


def parse_expression(text: str, names: Sequence[str] | None = None, r: int | None = None,
                     box: Sequence[int] | None = None):
    """Inverse of :func:`format_series` / :func:`format_laurent`.

    Returns a Laurent when no q-variables are given, otherwise a QSeries.
    """
    if names is None and r is not None:
        names = _default_names(r)
    names = list(names or [])
    index = {n: a for a, n in enumerate(names)}
    text = text.strip()
    coeffs: dict = {}
    if text != "0":
        # split on top-level +/- that are not exponent signs
        tokens = re.split(r"\s+([+-])\s+", text)
        signs = ["+"] + tokens[1::2]
        bodies = tokens[0::2]
        for sign, body in zip(signs, bodies):
            neg = sign == "-"
            if body.startswith("-"):
                neg = not neg
                body = body[1:]
            c = Q(1)
            d = [0] * len(names)
            h = l = 0
            for f in body.split("*"):
                if "^" in f:
                    base, e = f.split("^")
                    e = int(e)
                else:
                    base, e = f, 1
                if base == "h":
                    h += e
                elif base == "lam":
                    l += e
                elif base in index:
                    d[index[base]] += e
                else:
                    c *= Q(base)
            if neg:
                c = -c
            key = (tuple(d), h, l)
            coeffs[key] = coeffs.get(key, 0) + c
    if not names:
        return Laurent({(h, l): c for (_, h, l), c in coeffs.items()})
    grouped: dict = {}
    for (d, h, l), c in coeffs.items():
        grouped.setdefault(d, {})[(h, l)] = c
    if box is None:
        box = [max((d[a] for d in grouped), default=0) for a in range(len(names))]
    return QSeries(box, {d: Laurent(t) for d, t in grouped.items()})


# -- structured format --------------------------------------------------------

def _laurent_terms(x: Laurent) -> list:
    return [[h, l, format_rational(c)] for (h, l), c in x.items()]


def _laurent_from_terms(terms) -> Laurent:
    return Laurent({(h, l): Q(c) for h, l, c in terms})


def to_structured(obj) -> dict:
    """JSON-ready dict for a Laurent, QSeries or MatrixSeries."""
    if isinstance(obj, Laurent):
        return {"kind": "laurent", "terms": _laurent_terms(obj)}
    if isinstance(obj, QSeries):
        return {"kind": "series", "box": list(obj.box),
                "terms": [[list(d), _laurent_terms(v)] for d, v in obj.items()]}
    if isinstance(obj, MatrixSeries):
        shape = obj.shape or ()
        entries = []
        for d, v in obj.items():
            for idx, x in np.ndenumerate(v):
                if x:
                    entries.append([list(d), list(idx), _laurent_terms(x)])
        return {"kind": "matrix", "box": list(obj.box), "shape": list(shape),
                "entries": entries}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_structured(data: dict):
    kind = data["kind"]
    if kind == "laurent":
        return _laurent_from_terms(data["terms"])
    if kind == "series":
        return QSeries(data["box"], {tuple(d): _laurent_from_terms(t) for d, t in data["terms"]})
    if kind == "matrix":
        shape = tuple(data["shape"])
        coeffs: dict = {}
        for d, idx, t in data["entries"]:
            d = tuple(d)
            if d not in coeffs:
                arr = np.empty(shape, dtype=object)
                arr.fill(Laurent())
                coeffs[d] = arr
            coeffs[d][tuple(idx)] = _laurent_from_terms(t)
        return MatrixSeries(data["box"], coeffs)
    raise ValueError(f"unknown kind {kind!r}")


def dumps(obj) -> str:
    """Deterministic JSON text."""
    if isinstance(obj, dict):
        payload = {k: (to_structured(v) if isinstance(v, (Laurent, QSeries, MatrixSeries))
                       else v) for k, v in obj.items()}
    else:
        payload = to_structured(obj)
    return json.dumps(payload, sort_keys=True, indent=1)


def loads(text: str):
    data = json.loads(text)
    if "kind" in data:
        return from_structured(data)
    return {k: (from_structured(v) if isinstance(v, dict) and "kind" in v else v)
            for k, v in data.items()}
