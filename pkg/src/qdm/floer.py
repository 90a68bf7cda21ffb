"""Givental-model side: fundamental cycle, localization map and pairing.

A Floer cycle ``T(P, hbar, lambda) * Q^{e*} Delta`` is stored as a polynomial
``T`` together with its window shift ``e``. The infinite products defining
Delta are never formed. Restricting to the fixed component of degree d only
needs the finite ratio Delta_e / Delta_d, which depends on d - e.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cohomology import CohoClass, CohomologyRing, euler_class
from .series import (HBAR, LAMBDA, ONE, ZERO, Laurent, MatrixSeries, Q, QSeries,
                     SeriesError, box_exponents, inv_linear)
from .toric import ToricSuperspace

__all__ = [
    "NegativeBundleDegree",
    "NonPolynomialPairing",
    "PPoly",
    "FloerCycle",
    "PFCheck",
    "FloerModel",
]

LAMBDA_MODES = ("symbolic", "zero")


class NegativeBundleDegree(SeriesError):
    pass


class NonPolynomialPairing(SeriesError):
    def __init__(self, d, i=None, j=None):
        where = f" entry ({i + 1},{j + 1})" if i is not None else ""
        super().__init__(f"pairing has a negative hbar power at q^{tuple(d)}{where}")
        self.d = tuple(d)


class PPoly:
    """Polynomial in P_1..P_r, hbar, lambda: {(P exponents, hbar exp, lambda exp): rational}."""

    __slots__ = ("r", "_t")

    def __init__(self, r: int, terms: Mapping | None = None):
        self.r = r
        t = {}
        for (e, h, l), c in (terms or {}).items():
            c = Q(c)
            if c:
                key = (tuple(e), int(h), int(l))
                t[key] = t.get(key, 0) + c
        self._t = {k: v for k, v in t.items() if v}

    @classmethod
    def const(cls, r: int, c=1) -> "PPoly":
        return cls(r, {((0,) * r, 0, 0): c})

    @classmethod
    def P(cls, r: int, a: int) -> "PPoly":
        """P_a, 1-based."""
        return cls(r, {(tuple(1 if b == a - 1 else 0 for b in range(r)), 0, 0): 1})

    @classmethod
    def hbar(cls, r: int) -> "PPoly":
        return cls(r, {((0,) * r, 1, 0): 1})

    @classmethod
    def lam(cls, r: int) -> "PPoly":
        return cls(r, {((0,) * r, 0, 1): 1})

    @classmethod
    def linear(cls, row: Sequence[int], hbar_coef=0, lam_coef=0) -> "PPoly":
        """sum_a row[a] P_a + hbar_coef*hbar + lam_coef*lambda."""
        r = len(row)
        t = {}
        for a, x in enumerate(row):
            if x:
                t[(tuple(1 if b == a else 0 for b in range(r)), 0, 0)] = x
        if hbar_coef:
            t[((0,) * r, 1, 0)] = hbar_coef
        if lam_coef:
            t[((0,) * r, 0, 1)] = lam_coef
        return cls(r, t)

    @property
    def terms(self):
        return dict(self._t)

    def _coerce(self, other):
        if isinstance(other, PPoly):
            return other
        return PPoly.const(self.r, other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self._t)
        for k, v in other._t.items():
            t[k] = t.get(k, 0) + v
        return PPoly(self.r, t)

    __radd__ = __add__

    def __neg__(self):
        return PPoly(self.r, {k: -v for k, v in self._t.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t: dict = {}
        for (e1, h1, l1), a in self._t.items():
            for (e2, h2, l2), b in other._t.items():
                k = (tuple(x + y for x, y in zip(e1, e2)), h1 + h2, l1 + l2)
                t[k] = t.get(k, 0) + a * b
        return PPoly(self.r, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PPoly.const(self.r)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PPoly):
            return self._t == other._t
        if isinstance(other, (int, type(Q(0)))):
            return self == PPoly.const(self.r, other)
        return NotImplemented

    __hash__ = None

    def bar(self) -> "PPoly":
        return PPoly(self.r, {(e, h, l): (-c if h % 2 else c) for (e, h, l), c in self._t.items()})

    def degree(self) -> int | None:
        """Cohomological degree if homogeneous, else None."""
        degs = {2 * (sum(e) + h + l) for e, h, l in self._t}
        return degs.pop() if len(degs) == 1 else (0 if not degs else None)

    def __str__(self):
        from .render import _join_terms, _power
        terms = []
        for (e, h, l), c in sorted(self._t.items(), key=lambda kv: (
                -sum(kv[0][0]) - kv[0][1] - kv[0][2], tuple(-x for x in kv[0][0]), kv[0][1])):
            f = [_power(f"P{a + 1}", x) for a, x in enumerate(e) if x]
            if h:
                f.append(_power("h", h))
            if l:
                f.append(_power("lam", l))
            terms.append((c, f))
        return _join_terms(terms)

    __repr__ = __str__


@dataclass(frozen=True)
class FloerCycle:
    """``poly(P, hbar, lambda) * Q^{shift*} Delta``."""

    poly: PPoly
    shift: tuple[int, ...]

    def __str__(self):
        base = "Delta" if not any(self.shift) else (
            "Q^(" + ", ".join(map(str, self.shift)) + ")*Delta")
        s = str(self.poly)
        if s == "1":
            return base
        if " " in s:
            s = f"({s})"
        return f"{s}*{base}"

    def bar(self) -> "FloerCycle":
        return FloerCycle(self.poly.bar(), self.shift)


@dataclass
class PFCheck:
    """Outcome of :meth:`FloerModel.verify_pf`; truthy when the relation holds."""

    ok: bool
    first_mismatch: tuple[int, ...] | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QDM_THREADS", "1")))
    except ValueError:
        return 1


class FloerModel:
    """Localization computations for a toric superspace."""

    def __init__(self, space: ToricSuperspace, ring: CohomologyRing,
                 lambda_mode: str = "symbolic"):
        if lambda_mode not in LAMBDA_MODES:
            raise ValueError(f"lambda_mode must be one of {LAMBDA_MODES}")
        self.space = space
        self.ring = ring
        self.lambda_mode = lambda_mode
        self._lam = LAMBDA if lambda_mode == "symbolic" else ZERO
        self._u = [ring.u(i) for i in range(1, space.N + 1)]
        self._v = [ring.v(j) for j in range(1, len(space.l) + 1)]
        self._window_cache: dict[tuple[int, ...], CohoClass] = {}
        self._p_cache: dict[tuple[int, ...], list[CohoClass]] = {}

    @property
    def r(self) -> int:
        return self.space.r

    # -- localization -----------------------------------------------------
    def window_factor(self, k: Sequence[int]) -> CohoClass:
        """i_d^*(Delta_e / Delta_d) for d - e = k."""
        k = tuple(k)
        cached = self._window_cache.get(k)
        if cached is not None:
            return cached
        ring = self.ring
        out = ring.one()
        for u, ki in zip(self._u, self.space.u_degree(k)):
            if ki >= 0:
                for nu in range(1, ki + 1):
                    out = out * inv_linear(u, nu)
            else:
                for nu in range(ki + 1, 1):
                    out = out * (u + HBAR * nu)
            if not out:
                break
        if out:
            for v, kv in zip(self._v, self.space.v_degree(k)):
                if kv < 0:
                    raise NegativeBundleDegree(
                        f"bundle degree {kv} < 0 at window {k}")
                for nu in range(1, kv + 1):
                    out = out * (v + (HBAR * nu - self._lam))
        self._window_cache[k] = out
        return out

    def _p_at(self, d: tuple[int, ...]) -> list[CohoClass]:
        """Restrictions p_a + d_a hbar of P_a to the degree-d component."""
        got = self._p_cache.get(d)
        if got is None:
            got = [self.ring.p(a + 1) + HBAR * d[a] for a in range(self.r)]
            self._p_cache[d] = got
        return got

    def evaluate(self, poly: PPoly, d: Sequence[int]) -> CohoClass:
        """T(p + d hbar, hbar, lambda) as a class."""
        d = tuple(d)
        ps = self._p_at(d)
        out = self.ring.zero()
        powers: dict[tuple[int, int], CohoClass] = {}
        for (e, h, l), c in poly.terms.items():
            term = self.ring.one() * Laurent.monomial(c, h, 0)
            if l:
                term = term * (self._lam ** l)
            for a, x in enumerate(e):
                if x:
                    key = (a, x)
                    if key not in powers:
                        powers[key] = ps[a] ** x
                    term = term * powers[key]
            out = out + term
        return out

    def window_coefficient(self, d: Sequence[int], cycle: FloerCycle) -> CohoClass:
        """Coefficient of q^d in Xi(cycle)."""
        d = tuple(d)
        k = tuple(x - y for x, y in zip(d, cycle.shift))
        if any(x < 0 for x in k):
            return self.ring.zero()
        w = self.window_factor(k)
        if not w:
            return w
        return self.evaluate(cycle.poly, d) * w

    def localization_coefficient(self, d: Sequence[int], poly: PPoly | None = None
                                 ) -> CohoClass:
        """i_d^*(T(P) Delta / Delta_d)."""
        poly = poly if poly is not None else PPoly.const(self.r)
        return self.window_coefficient(d, FloerCycle(poly, (0,) * self.r))

    def xi(self, cycle: FloerCycle, box: Sequence[int]) -> MatrixSeries:
        """Localization map Xi as a vector-valued series."""
        box = tuple(box)
        ds = box_exponents(box)
        workers = _threads()
        if workers > 1:
            # warm the shared caches serially so worker threads only read them
            for d in ds:
                k = tuple(x - y for x, y in zip(d, cycle.shift))
                if all(x >= 0 for x in k):
                    self.window_factor(k)
                    self._p_at(d)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(lambda d: self.window_coefficient(d, cycle), ds))
        else:
            values = [self.window_coefficient(d, cycle) for d in ds]
        return MatrixSeries(box, {d: v.coeffs for d, v in zip(ds, values) if v})

    def basis_poly(self, i: int) -> PPoly:
        """The basis monomial T_i with p replaced by P."""
        e = self.ring.basis[i]
        return PPoly(self.r, {(e, 0, 0): 1})

    def hbar_bound(self, box: Sequence[int]) -> int:
        """Largest |negative hbar exponent| allowed in S^{-1} within the box."""
        return self.space.n + sum(
            c * sum(max(row[a], 0) for row in self.space.m) for a, c in enumerate(box))

    def s_inverse_matrix(self, box: Sequence[int]) -> MatrixSeries:
        """S^{-1}: column j is Xi(T_j(P) Delta) in the basis."""
        box = tuple(box)
        dim = self.ring.dim
        cols = [self.xi(FloerCycle(self.basis_poly(j), (0,) * self.r), box)
                for j in range(dim)]
        out: dict = {}
        for j, col in enumerate(cols):
            for d, v in col.items():
                if d not in out:
                    out[d] = np.empty((dim, dim), dtype=object)
                    out[d].fill(ZERO)
                out[d][:, j] = v
        result = MatrixSeries(box, out)
        lo = result.hbar_range()
        if lo is not None and -lo[0] > self.hbar_bound(box):
            raise SeriesError(
                f"hbar^{lo[0]} exceeds the expected window {self.hbar_bound(box)}")
        return result

    def j_function(self, box: Sequence[int]) -> tuple[str, MatrixSeries]:
        """(symbolic prefactor, S^{-1}(1)); the prefactor exp(p log q / hbar) is not expanded."""
        prefactor = "exp((" + " + ".join(
            f"p{a + 1}*log(q{a + 1})" for a in range(self.r)) + ")/h)"
        return prefactor, self.xi(FloerCycle(PPoly.const(self.r), (0,) * self.r), box)

    # -- Picard-Fuchs ------------------------------------------------------
    def picard_fuchs_relation(self, d: Sequence[int]) -> tuple[FloerCycle, FloerCycle]:
        """Relation  left(P) Q^{d*} Delta = right(P) Delta  from the window bookkeeping."""
        d = tuple(int(x) for x in d)
        if not any(d):
            raise ValueError("d must be nonzero")
        r = self.r
        left = PPoly.const(r)
        right = PPoly.const(r)
        for row, k in zip(self.space.m, self.space.u_degree(d)):
            if k < 0:
                for nu in range(k, 0):
                    left = left * PPoly.linear(row, hbar_coef=-nu)
            elif k > 0:
                for nu in range(0, k):
                    right = right * PPoly.linear(row, hbar_coef=-nu)
        for row, k in zip(self.space.l, self.space.v_degree(d)):
            for nu in range(0, k):
                left = left * PPoly.linear(row, hbar_coef=-nu, lam_coef=-1)
        if self.lambda_mode == "zero":
            left = PPoly(r, {k: v for k, v in left.terms.items() if k[2] == 0})
            right = PPoly(r, {k: v for k, v in right.terms.items() if k[2] == 0})
        return FloerCycle(left, d), FloerCycle(right, (0,) * r)

    def verify_pf(self, relation: tuple[FloerCycle, FloerCycle], box: Sequence[int]) -> PFCheck:
        left, right = relation
        a = self.xi(left, box)
        b = self.xi(right, box)
        for d in box_exponents(tuple(box)):
            va, vb = a.get(d, (self.ring.dim,)), b.get(d, (self.ring.dim,))
            if any(x != y for x, y in zip(va, vb)):
                return PFCheck(False, d, f"coefficients differ at q^{d}")
        return PFCheck(True)

    # -- pairing -----------------------------------------------------------
    def euler(self) -> CohoClass:
        return euler_class(self.ring, self.lambda_mode)

    def floer_pairing(self, alpha: FloerCycle, beta: FloerCycle, box: Sequence[int]
                      ) -> QSeries:
        """(alpha, beta) = int bar(Xi(bar alpha)) Xi(beta) Euler(V)."""
        box = tuple(box)
        xa = self.xi(alpha.bar(), box).bar()
        xb = self.xi(beta, box)
        e = self.euler()
        ring = self.ring
        out: dict = {}
        for d1, a in xa.items():
            ae = CohoClass(ring, a) * e
            for d2, b in xb.items():
                d = tuple(x + y for x, y in zip(d1, d2))
                if any(x > c for x, c in zip(d, box)):
                    continue
                val = ring.integrate(ae * CohoClass(ring, b))
                out[d] = out.get(d, ZERO) + val
        for d, v in out.items():
            lo = v.min_hbar()
            if lo is not None and lo < 0:
                raise NonPolynomialPairing(d)
        return QSeries(box, out)

    def frame_pairing(self, sinv: MatrixSeries, pairing: np.ndarray) -> MatrixSeries:
        """Matrix of (T_i Delta-bar, T_j Delta) = bar(S^{-1})^T G S^{-1}; checks polynomiality."""
        out = sinv.bar().transpose() @ (pairing @ sinv)
        for d, v in out.items():
            for (i, j), x in np.ndenumerate(v):
                lo = x.min_hbar()
                if lo is not None and lo < 0:
                    raise NonPolynomialPairing(d, i, j)
        return out
