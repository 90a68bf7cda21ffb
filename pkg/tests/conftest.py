import sympy as sp
import pytest

from qdm.io import fixture_path, load_input
from qdm.pipeline import run_pipeline
from qdm.series import Laurent, MatrixSeries, Q, QSeries

x, y, h, lam = sp.symbols("x y h lam")
QVARS = (x, y)


def space_of(name):
    return load_input(fixture_path(name)).superspace()


_CACHE = {}


def pipeline(name, box, mode="zero", until="flat"):
    key = (name, tuple(box), mode, until)
    if key not in _CACHE:
        _CACHE[key] = run_pipeline(space_of(name), box, mode, until=until)
    return _CACHE[key]


def rat(c):
    return sp.Rational(int(c.numerator), int(c.denominator))


def laurent_sym(v: Laurent):
    return sum((rat(c) * h**a * lam**b for (a, b), c in v.items()), sp.Integer(0))


def series_sym(s: QSeries, qvars=QVARS):
    out = sp.Integer(0)
    for d, v in s.items():
        mono = sp.Mul(*[qv**e for qv, e in zip(qvars, d)])
        out += mono * laurent_sym(v)
    return sp.expand(out)


def matrix_sym(m: MatrixSeries, qvars=QVARS):
    k = m.shape[0]
    return [[series_sym(m.entry(i, j), qvars) for j in range(k)] for i in range(k)]


def truncate(expr, box, qvars=QVARS, hbar_min=None):
    """Series-expand rational functions in the q variables and drop terms outside the box."""
    expr = sp.sympify(expr)
    for qv, b in zip(qvars, box):
        if expr.has(qv):
            expr = sp.series(expr, qv, 0, b + 1).removeO()
    expr = sp.expand(expr)
    keep = sp.Integer(0)
    for term in sp.Add.make_args(expr):
        powers = term.as_powers_dict()
        if any(powers.get(qv, 0) > b for qv, b in zip(qvars, box)):
            continue
        if hbar_min is not None and powers.get(h, 0) < hbar_min:
            continue
        keep += term
    return sp.expand(keep)


def hbar_part(expr, k):
    """Coefficient of h^k in a Laurent polynomial in h."""
    expr = sp.expand(expr)
    return sp.expand(sum((t / h**k for t in sp.Add.make_args(expr)
                          if t.as_powers_dict().get(h, 0) == k), sp.Integer(0)))


def parse(text):
    return sp.sympify(text, locals={"x": x, "y": y, "h": h, "lam": lam})


@pytest.fixture(scope="session")
def f1():
    return pipeline("f1", (3, 3))


@pytest.fixture(scope="session")
def f1_super():
    return pipeline("f1_super", (3, 4))


@pytest.fixture(scope="session")
def f1_super_44():
    return pipeline("f1_super", (4, 4))


def qseries_from(expr, box, qvars=QVARS):
    """Box-truncated QSeries with rational coefficients from a sympy expression."""
    expr = truncate(expr, box, qvars)
    poly = sp.Poly(expr, *qvars[:len(box)]) if expr != 0 else None
    coeffs = {}
    if poly is not None:
        for mon, c in poly.terms():
            coeffs[tuple(mon)] = Q(int(c.p), int(c.q))
    return QSeries(box, coeffs)
