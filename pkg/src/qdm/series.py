"""Exact series kernel.

Scalars live in Q[lambda][hbar, 1/hbar] (class :class:`Laurent`). On top of
that sit box-truncated power series in q^1..q^r whose coefficients are either
scalars (:class:`QSeries`) or numpy object arrays of scalars
(:class:`MatrixSeries`; vectors are 1-d arrays).

Box truncation is exact: the coefficient of q^d in a product, inverse,
exponential or substitution only involves coefficients at exponents that
are componentwise <= d, so nothing outside the box can leak in.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

try:
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    from fractions import Fraction as Q

__all__ = [
    "Q",
    "SeriesError",
    "ZeroDivisor",
    "SingularConstantTerm",
    "Inconsistent",
    "Laurent",
    "HBAR",
    "LAMBDA",
    "ONE",
    "ZERO",
    "box_exponents",
    "QSeries",
    "MatrixSeries",
    "inv_linear",
    "matrix_series_invert",
    "split_hbar",
    "log_integrate",
    "series_exp",
    "series_log",
    "substitute",
    "reverse_coordinates",
    "identity_matrix",
    "zero_matrix",
    "matrices_equal",
]


class SeriesError(ArithmeticError):
    pass


class ZeroDivisor(SeriesError):
    pass


class SingularConstantTerm(SeriesError):
    pass


class Inconsistent(SeriesError):
    def __init__(self, d, a, b):
        super().__init__(
            f"log-integrability fails at q^{tuple(d)} between directions {a + 1} and {b + 1}")
        self.d, self.a, self.b = tuple(d), a, b


_RATIONAL_TYPES = (int, type(Q(0)))


def _is_scalar(x) -> bool:
    return isinstance(x, _RATIONAL_TYPES) or type(x).__name__ in ("Fraction", "mpz")


class Laurent:
    """Element of Q[lambda][hbar, 1/hbar], stored as {(hbar_exp, lambda_exp): rational}.

    Values are immutable. Rationals and ints coerce automatically.
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        t = {}
        if terms:
            for k, v in terms.items():
                v = Q(v)
                if v:
                    t[(int(k[0]), int(k[1]))] = v
        self._t = t

    @classmethod
    def _raw(cls, t: dict) -> "Laurent":
        obj = object.__new__(cls)
        obj._t = t
        return obj

    @classmethod
    def const(cls, c) -> "Laurent":
        c = Q(c)
        return cls._raw({(0, 0): c} if c else {})

    @classmethod
    def monomial(cls, c, h: int = 0, lam: int = 0) -> "Laurent":
        c = Q(c)
        return cls._raw({(h, lam): c} if c else {})

    @staticmethod
    def coerce(x) -> "Laurent":
        if isinstance(x, Laurent):
            return x
        if _is_scalar(x):
            return Laurent.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Laurent")

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], object]:
        return dict(self._t)

    def items(self):
        return sorted(self._t.items())

    def __bool__(self) -> bool:
        return bool(self._t)

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._t)

    def is_hbar_free(self) -> bool:
        """No hbar dependence (lambda is allowed)."""
        return all(h == 0 for h, _ in self._t)

    def constant(self):
        return self._t.get((0, 0), Q(0))

    def hbar_exponents(self) -> list[int]:
        return sorted({h for h, _ in self._t})

    def min_hbar(self) -> int | None:
        return min((h for h, _ in self._t), default=None)

    def max_hbar(self) -> int | None:
        return max((h for h, _ in self._t), default=None)

    def hbar_coefficient(self, h: int) -> "Laurent":
        """Coefficient of hbar^h, a polynomial in lambda."""
        return Laurent._raw({(0, l): c for (hh, l), c in self._t.items() if hh == h})

    def is_homogeneous(self, degree: int) -> bool:
        """All terms have 2*(hbar_exp + lambda_exp) == degree."""
        return all(2 * (h + l) == degree for h, l in self._t)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Laurent):
            if not _is_scalar(other):
                return NotImplemented
            other = Laurent.const(other)
        if not other._t:
            return self
        if not self._t:
            return other
        t = dict(self._t)
        for k, v in other._t.items():
            s = t.get(k)
            if s is None:
                t[k] = v
            else:
                s = s + v
                if s:
                    t[k] = s
                else:
                    del t[k]
        return Laurent._raw(t)

    __radd__ = __add__

    def __neg__(self):
        return Laurent._raw({k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        if not isinstance(other, Laurent):
            if not _is_scalar(other):
                return NotImplemented
            other = Laurent.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Laurent):
            if not _is_scalar(other):
                return NotImplemented
            c = Q(other)
            if not c:
                return ZERO
            return Laurent._raw({k: v * c for k, v in self._t.items()})
        if not self._t or not other._t:
            return ZERO
        t: dict = {}
        for (h1, l1), a in self._t.items():
            for (h2, l2), b in other._t.items():
                k = (h1 + h2, l1 + l2)
                s = t.get(k)
                t[k] = a * b if s is None else s + a * b
        return Laurent._raw({k: v for k, v in t.items() if v})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_scalar(other):
            c = Q(other)
            if not c:
                raise ZeroDivisor("division by zero")
            return Laurent._raw({k: v / c for k, v in self._t.items()})
        if isinstance(other, Laurent):
            return self * other.inverse()
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Laurent":
        """Inverse of a monomial c*hbar^h (lambda is never inverted)."""
        if len(self._t) != 1:
            raise ZeroDivisor(f"{self} is not an invertible monomial")
        (h, l), c = next(iter(self._t.items()))
        if l:
            raise ZeroDivisor("lambda is not invertible")
        return Laurent._raw({(-h, 0): 1 / c})

    def shift_hbar(self, k: int) -> "Laurent":
        """Multiply by hbar^k."""
        return Laurent._raw({(h + k, l): v for (h, l), v in self._t.items()})

    def bar(self) -> "Laurent":
        """hbar -> -hbar."""
        return Laurent._raw({(h, l): (-v if h % 2 else v) for (h, l), v in self._t.items()})

    def at_lambda_zero(self) -> "Laurent":
        return Laurent._raw({k: v for k, v in self._t.items() if k[1] == 0})

    def split(self) -> tuple["Laurent", "Laurent"]:
        """(nonnegative hbar part, strictly negative hbar part)."""
        pos = {k: v for k, v in self._t.items() if k[0] >= 0}
        neg = {k: v for k, v in self._t.items() if k[0] < 0}
        return Laurent._raw(pos), Laurent._raw(neg)

    # -- comparison -------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Laurent):
            return self._t == other._t
        if _is_scalar(other):
            return self._t == Laurent.const(other)._t
        return NotImplemented

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def __reduce__(self):
        return (Laurent, (dict(self._t),))

    def __repr__(self):
        return f"Laurent({self})"

    def __str__(self):
        from .render import format_laurent
        return format_laurent(self)


ZERO = Laurent._raw({})
ONE = Laurent.const(1)
HBAR = Laurent.monomial(1, 1, 0)
LAMBDA = Laurent.monomial(1, 0, 1)


# ---------------------------------------------------------------------------
# box-truncated q-series
# ---------------------------------------------------------------------------

def box_exponents(box: Sequence[int]) -> list[tuple[int, ...]]:
    """All exponents in the box, graded-lex: total degree, then lex ascending."""
    pts = itertools.product(*(range(c + 1) for c in box))
    return sorted(pts, key=lambda d: (sum(d), d))


def _add_exp(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _in_box(d, box) -> bool:
    return all(x <= c for x, c in zip(d, box))


def _leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


class _BoxSeries:
    """Sparse map exponent -> coefficient, truncated to a box."""

    __slots__ = ("box", "_c")
    # let numpy defer to our reflected operators (ndarray @ series)
    __array_ufunc__ = None

    def __init__(self, box: Sequence[int], coeffs: Mapping | None = None):
        self.box = tuple(int(c) for c in box)
        if any(c < 0 for c in self.box):
            raise ValueError("cutoff components must be >= 0")
        self._c = {}
        if coeffs:
            for d, v in coeffs.items():
                d = tuple(int(x) for x in d)
                if len(d) != len(self.box):
                    raise ValueError(f"exponent {d} has wrong length for box {self.box}")
                if any(x < 0 for x in d):
                    raise ValueError(f"negative exponent {d}")
                if not _in_box(d, self.box):
                    continue
                v = self._coerce(v)
                if not self._is_zero(v):
                    self._c[d] = v

    @classmethod
    def _raw(cls, box, coeffs):
        obj = object.__new__(cls)
        obj.box = box
        obj._c = coeffs
        return obj

    # subclass hooks
    def _coerce(self, v):
        raise NotImplementedError

    @staticmethod
    def _is_zero(v) -> bool:
        raise NotImplementedError

    def _zero(self):
        raise NotImplementedError

    # -- access -----------------------------------------------------------
    @property
    def r(self) -> int:
        return len(self.box)

    def __getitem__(self, d):
        d = tuple(d)
        v = self._c.get(d)
        return self._zero() if v is None else v

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self._c, key=lambda d: (sum(d), d))

    def items(self):
        return [(d, self._c[d]) for d in self.support()]

    def constant_term(self):
        return self[(0,) * self.r]

    def __bool__(self):
        return bool(self._c)

    def _check_box(self, other):
        if self.box != other.box:
            raise ValueError(f"box mismatch {self.box} vs {other.box}")

    def truncate(self, box: Sequence[int]):
        box = tuple(box)
        return type(self)._raw(box, {d: v for d, v in self._c.items() if _in_box(d, box)})

    def map(self, fn: Callable):
        out = {}
        for d, v in self._c.items():
            w = fn(v)
            if not self._is_zero(w):
                out[d] = w
        return type(self)._raw(self.box, out)

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, _BoxSeries):
            return NotImplemented
        self._check_box(other)
        out = dict(self._c)
        for d, v in other._c.items():
            w = out[d] + v if d in out else v
            if self._is_zero(w):
                out.pop(d, None)
            else:
                out[d] = w
        return type(self)._raw(self.box, out)

    def __neg__(self):
        return type(self)._raw(self.box, {d: -v for d, v in self._c.items()})

    def __sub__(self, other):
        if not isinstance(other, _BoxSeries):
            return NotImplemented
        return self + (-other)

    def theta(self, a: int):
        """q^a d/dq^a (0-based direction index)."""
        return type(self)._raw(self.box, {d: v * d[a] for d, v in self._c.items() if d[a]})

    def shift(self, e: Sequence[int]):
        """Multiply by q^e (dropping terms that leave the box)."""
        e = tuple(e)
        return type(self)._raw(self.box, {_add_exp(d, e): v for d, v in self._c.items()
                                          if _in_box(_add_exp(d, e), self.box)})

    def _convolve(self, other, mul, zero_check, out_cls):
        out: dict = {}
        box = self.box
        for d1, a in self._c.items():
            for d2, b in other._c.items():
                d = _add_exp(d1, d2)
                if not _in_box(d, box):
                    continue
                p = mul(a, b)
                if d in out:
                    out[d] = out[d] + p
                else:
                    out[d] = p
        return out_cls._raw(box, {d: v for d, v in out.items() if not zero_check(v)})

    def bar(self):
        """hbar -> -hbar coefficientwise."""
        return self.map(_bar_any)

    def at_lambda_zero(self):
        return self.map(_lambda_zero_any)

    def __eq__(self, other):
        if not isinstance(other, _BoxSeries):
            return NotImplemented
        if self.box != other.box:
            return False
        keys = set(self._c) | set(other._c)
        return all(_coef_equal(self[d], other[d]) for d in keys)

    __hash__ = None


def _bar_any(v):
    if isinstance(v, Laurent):
        return v.bar()
    return _vec(v, lambda x: x.bar())


def _lambda_zero_any(v):
    if isinstance(v, Laurent):
        return v.at_lambda_zero()
    return _vec(v, lambda x: x.at_lambda_zero())


def _vec(arr: np.ndarray, fn) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = fn(x)
    return out


def _coef_equal(a, b) -> bool:
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return matrices_equal(a, b)
    return a == b


class QSeries(_BoxSeries):
    """Scalar series: exponent -> Laurent."""

    __slots__ = ()

    def _coerce(self, v):
        return Laurent.coerce(v)

    @staticmethod
    def _is_zero(v):
        return not v

    def _zero(self):
        return ZERO

    @classmethod
    def one(cls, box) -> "QSeries":
        box = tuple(box)
        return cls._raw(box, {(0,) * len(box): ONE})

    @classmethod
    def monomial(cls, box, d, c=1) -> "QSeries":
        return cls(box, {tuple(d): c})

    def __mul__(self, other):
        if isinstance(other, QSeries):
            self._check_box(other)
            return self._convolve(other, lambda a, b: a * b, lambda v: not v, QSeries)
        if isinstance(other, MatrixSeries):
            self._check_box(other)
            return self._convolve(other, lambda a, b: b * a, _array_is_zero, MatrixSeries)
        if isinstance(other, Laurent) or _is_scalar(other):
            return self.map(lambda v: v * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Laurent) or _is_scalar(other):
            return self.map(lambda v: v * other)
        return NotImplemented

    def __pow__(self, k: int) -> "QSeries":
        if k < 0:
            raise ValueError("negative power")
        out = QSeries.one(self.box)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __add__(self, other):
        if isinstance(other, Laurent) or _is_scalar(other):
            other = QSeries.one(self.box) * other
        return super().__add__(other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Laurent) or _is_scalar(other):
            other = QSeries.one(self.box) * other
        return super().__sub__(other)

    def __rsub__(self, other):
        return (-self) + other

    def is_hbar_free(self) -> bool:
        return all(v.is_hbar_free() for v in self._c.values())

    def rational_coefficients(self) -> dict[tuple[int, ...], object]:
        """Coefficients as rationals; requires an hbar- and lambda-free series."""
        out = {}
        for d, v in self.items():
            if not v.is_constant():
                raise ValueError(f"coefficient at {d} is not a rational constant: {v}")
            out[d] = v.constant()
        return out

    def __repr__(self):
        from .render import format_series
        return f"QSeries({format_series(self)})"


def _array_is_zero(a: np.ndarray) -> bool:
    return not any(a.flat)


def _zero_array(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def identity_matrix(k: int) -> np.ndarray:
    out = _zero_array((k, k))
    for i in range(k):
        out[i, i] = ONE
    return out


def zero_matrix(k: int) -> np.ndarray:
    return _zero_array((k, k))


def as_laurent_array(a) -> np.ndarray:
    arr = np.asarray(a, dtype=object)
    return _vec(arr, Laurent.coerce)


def matrices_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


class MatrixSeries(_BoxSeries):
    """Series with numpy object-array coefficients (matrices or vectors) of Laurent."""

    __slots__ = ()

    def _coerce(self, v):
        return as_laurent_array(v)

    @staticmethod
    def _is_zero(v):
        return _array_is_zero(v)

    def _zero(self):
        shape = self.shape
        return _zero_array(shape if shape is not None else ())

    @property
    def shape(self):
        for v in self._c.values():
            return v.shape
        return getattr(self, "_shape_hint", None)

    @classmethod
    def identity(cls, box, k: int) -> "MatrixSeries":
        box = tuple(box)
        return cls._raw(box, {(0,) * len(box): identity_matrix(k)})

    @classmethod
    def constant(cls, box, mat) -> "MatrixSeries":
        box = tuple(box)
        return cls(box, {(0,) * len(box): mat})

    def __getitem__(self, d):
        d = tuple(d)
        v = self._c.get(d)
        if v is None:
            shape = self.shape
            if shape is None:
                raise KeyError("empty MatrixSeries has no shape")
            return _zero_array(shape)
        return v

    def get(self, d, shape):
        v = self._c.get(tuple(d))
        return _zero_array(shape) if v is None else v

    def __matmul__(self, other):
        if isinstance(other, MatrixSeries):
            self._check_box(other)
            return self._convolve(other, lambda a, b: a @ b, _array_is_zero, MatrixSeries)
        if isinstance(other, np.ndarray):
            return self.map(lambda v: v @ other)
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return self.map(lambda v: other @ v)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return other * self
        if isinstance(other, Laurent) or _is_scalar(other):
            return self.map(lambda v: v * other)
        return NotImplemented

    __rmul__ = __mul__

    def entry(self, *idx) -> QSeries:
        """Scalar series of a single entry."""
        return QSeries._raw(self.box, {d: v[idx] for d, v in self._c.items() if v[idx]})

    def column(self, j: int) -> "MatrixSeries":
        return MatrixSeries._raw(self.box, {d: v[:, j].copy() for d, v in self._c.items()
                                            if not _array_is_zero(v[:, j])})

    def transpose(self) -> "MatrixSeries":
        return MatrixSeries._raw(self.box, {d: v.T.copy() for d, v in self._c.items()})

    def is_hbar_free(self) -> bool:
        return all(x.is_hbar_free() for v in self._c.values() for x in v.flat)

    def hbar_range(self) -> tuple[int, int] | None:
        hs = [h for v in self._c.values() for x in v.flat for h in x.hbar_exponents()]
        return (min(hs), max(hs)) if hs else None

    @classmethod
    def from_entries(cls, box, entries: Sequence[Sequence[QSeries]]) -> "MatrixSeries":
        """Assemble a matrix series from a grid of scalar series."""
        rows, cols = len(entries), len(entries[0])
        out: dict = {}
        for i in range(rows):
            for j in range(cols):
                for d, v in entries[i][j]._c.items():
                    if d not in out:
                        out[d] = _zero_array((rows, cols))
                    out[d][i, j] = v
        return cls._raw(tuple(box), out)

    def __repr__(self):
        return f"MatrixSeries(box={self.box}, terms={len(self._c)})"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def inv_linear(u, c: int):
    """(u + c*hbar)^{-1} for a nilpotent class u and nonzero integer c.

    ``u`` is a cohomology class (anything with ``*``, ``+`` and a ``ring``
    carrying the top degree ``n``); the result is a class with Laurent
    coefficients.
    """
    if c == 0:
        raise ZeroDivisor("inv_linear needs c != 0")
    ring = u.ring
    inv_c = Q(1) / c
    out = ring.zero()
    power = ring.one()
    for k in range(ring.n + 1):
        coef = Laurent.monomial((-1) ** k * inv_c ** (k + 1), -k - 1)
        out = out + power * coef
        power = power * u
        if not power:
            break
    return out


def _const_matrix_inverse(m: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inverse of a matrix with rational constant entries."""
    k = m.shape[0]
    a = [[m[i, j].constant() for j in range(k)] + [Q(1 if i == j else 0) for j in range(k)]
         for i in range(k)]
    for c in range(k):
        piv = next((r for r in range(c, k) if a[r][c]), None)
        if piv is None:
            raise SingularConstantTerm("constant term is singular")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(k):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    out = _zero_array((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = Laurent.const(a[i][j + k])
    return out


def _invert_constant(m0: np.ndarray) -> np.ndarray:
    k = m0.shape[0]
    ident = identity_matrix(k)
    if all(x.is_constant() for x in m0.flat):
        return _const_matrix_inverse(m0)
    # unipotent: id - m0 nilpotent, Neumann series
    nil = ident - m0
    out = ident
    power = ident
    for _ in range(k):
        power = power @ nil
        if _array_is_zero(power):
            return out
        out = out + power
    power = power @ nil
    if _array_is_zero(power):
        return out
    raise SingularConstantTerm("constant term is neither rational nor unipotent")


def matrix_series_invert(m: MatrixSeries) -> MatrixSeries:
    """Inverse of a square matrix series whose constant term is invertible."""
    shape = m.shape
    if shape is None or len(shape) != 2 or shape[0] != shape[1]:
        raise SingularConstantTerm("need a nonzero square matrix series")
    zero = (0,) * m.r
    m0inv = _invert_constant(m.get(zero, shape))
    nonconst = [(d, v) for d, v in m._c.items() if d != zero]
    out: dict = {zero: m0inv}
    for d in box_exponents(m.box):
        if d == zero:
            continue
        acc = None
        for d2, v in nonconst:
            if not _leq(d2, d):
                continue
            d1 = tuple(x - y for x, y in zip(d, d2))
            x1 = out.get(d1)
            if x1 is None:
                continue
            t = v @ x1
            acc = t if acc is None else acc + t
        if acc is not None:
            x = -(m0inv @ acc)
            if not _array_is_zero(x):
                out[d] = x
    return MatrixSeries._raw(m.box, out)


def split_hbar(x):
    """Split into (hbar^{>=0} part, hbar^{<0} part); works on scalars, arrays and series."""
    if isinstance(x, Laurent):
        return x.split()
    if isinstance(x, np.ndarray):
        pos = _zero_array(x.shape)
        neg = _zero_array(x.shape)
        for idx, v in np.ndenumerate(x):
            pos[idx], neg[idx] = v.split()
        return pos, neg
    if isinstance(x, _BoxSeries):
        return x.map(lambda v: split_hbar(v)[0]), x.map(lambda v: split_hbar(v)[1])
    raise TypeError(f"cannot split {type(x).__name__}")


def log_integrate(gs: Sequence[QSeries]) -> QSeries:
    """Solve q^a d/dq^a f = g_a for f with zero constant term."""
    if not gs:
        raise ValueError("need at least one series")
    box = gs[0].box
    r = len(box)
    if len(gs) != r:
        raise ValueError(f"need {r} series, got {len(gs)}")
    zero = (0,) * r
    for a, g in enumerate(gs):
        if g[zero]:
            raise Inconsistent(zero, a, a)
    keys = sorted(set().union(*(g._c.keys() for g in gs)), key=lambda d: (sum(d), d))
    out = {}
    for d in keys:
        a = next(i for i in range(r) if d[i])
        ga = gs[a][d]
        for b in range(r):
            if d[a] * gs[b][d] != d[b] * ga:
                raise Inconsistent(d, a, b)
        v = ga / d[a]
        if v:
            out[d] = v
    return QSeries._raw(box, out)


def series_exp(s: QSeries) -> QSeries:
    """exp(s) for s without constant term."""
    if s.constant_term():
        raise ValueError("series_exp needs zero constant term")
    box = s.box
    out = QSeries.one(box)
    term = QSeries.one(box)
    for k in range(1, sum(box) + 1):
        term = (term * s) * Q(1, k)
        if not term:
            break
        out = out + term
    return out


def series_log(s: QSeries) -> QSeries:
    """log(s) for s with constant term 1."""
    if s.constant_term() != ONE:
        raise ValueError("series_log needs constant term 1")
    t = s - 1
    out = QSeries(s.box)
    power = QSeries.one(s.box)
    for k in range(1, sum(s.box) + 1):
        power = power * t
        if not power:
            break
        out = out + power * Q((-1) ** (k + 1), k)
    return out


def _exp_factors(deltas: Sequence[QSeries]) -> list[QSeries]:
    return [series_exp(dl) for dl in deltas]


def substitute(series, deltas: Sequence[QSeries]):
    """Rewrite a series in q as a series in qhat, where log q^a = log qhat^a + delta^a(qhat).

    Each monomial q^d becomes qhat^d * prod_a exp(delta^a)^{d_a}.
    """
    box = series.box
    if len(deltas) != len(box):
        raise ValueError("one delta per variable required")
    for dl in deltas:
        if dl.box != box:
            raise ValueError("box mismatch in substitution")
    if all(not dl for dl in deltas):
        return series
    exps = _exp_factors(deltas)
    powers: list[list[QSeries]] = []
    for a, e in enumerate(exps):
        row = [QSeries.one(box)]
        for _ in range(box[a]):
            row.append(row[-1] * e)
        powers.append(row)
    out: dict = {}
    for d, v in series.items():
        factor = QSeries.monomial(box, d)
        for a in range(len(box)):
            if d[a]:
                factor = factor * powers[a][d[a]]
        for e, c in factor._c.items():
            t = v * c
            out[e] = out[e] + t if e in out else t
    return type(series)(box, out)


def reverse_coordinates(deltas: Sequence[QSeries]) -> list[QSeries]:
    """Invert log q = log qhat + delta(qhat), returning deltahat with
    log qhat = log q + deltahat(q)."""
    box = deltas[0].box
    for dl in deltas:
        if dl.constant_term():
            raise ValueError("coordinate shifts must vanish at q = 0")
    current = [QSeries(box) for _ in deltas]
    for _ in range(sum(box) + 2):
        nxt = [-substitute(dl, current) for dl in deltas]
        if all(a == b for a, b in zip(nxt, current)):
            return nxt
        current = nxt
    return current
