"""Cohomology ring of a smooth projective toric variety.

H*(X; Q) = Q[p_1..p_r] / (prod_{i in I} u_i : I a minimal non-face), built
degree by degree with exact linear elimination. Within each degree the
elimination pivots on the smallest monomials in graded-lex order
(p_1 > ... > p_r), so the surviving basis consists of the largest ones; for
the first Hirzebruch surface this gives {1, p_1, p_2, p_1 p_2} with
p_2^2 -> p_1 p_2.

Classes carry Laurent coefficients so that the same type serves localization
(hbar, lambda) and plain rational cohomology.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Mapping, Sequence

import numpy as np

from .series import LAMBDA, ONE, ZERO, Laurent, Q
from .toric import ToricError, ToricSuperspace

__all__ = [
    "DimensionMismatch",
    "Poly",
    "CohomologyRing",
    "CohoClass",
    "HLaurent",
    "build_ring",
    "euler_class",
    "pairing_matrix",
]


class DimensionMismatch(ToricError):
    pass


Monomial = tuple[int, ...]
# A polynomial in p_1..p_r: {exponent tuple: rational}
Poly = dict


def _monomials(r: int, k: int) -> list[Monomial]:
    """Degree-k monomials in r variables, descending lex (p_1 > ... > p_r)."""
    out = []
    for combo in combinations_with_replacement(range(r), k):
        e = [0] * r
        for a in combo:
            e[a] += 1
        out.append(tuple(e))
    return sorted(out, reverse=True)


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def _linear_poly(row: Sequence[int]) -> Poly:
    r = len(row)
    return {tuple(1 if b == a else 0 for b in range(r)): Q(row[a]) for a in range(r) if row[a]}


def _rref(rows: list[list], ncols: int) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over Q; returns (rows, pivot columns)."""
    rows = [list(r) for r in rows]
    pivots: list[int] = []
    ri = 0
    for c in range(ncols):
        piv = next((i for i in range(ri, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[ri], rows[piv] = rows[piv], rows[ri]
        inv = 1 / rows[ri][c]
        rows[ri] = [x * inv for x in rows[ri]]
        for i in range(len(rows)):
            if i != ri and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[ri])]
        pivots.append(c)
        ri += 1
        if ri == len(rows):
            break
    return rows[:ri], pivots


class CohomologyRing:
    """Graded Artinian quotient of Q[p_1..p_r] with a monomial basis.

    Attributes
    ----------
    basis : list of exponent tuples, ordered by degree then descending lex
    degrees : cohomological degree (2 * polynomial degree) of each basis element
    """

    def __init__(self, space: ToricSuperspace):
        self.space = space
        self.r = space.r
        self.n = space.n
        r, n = self.r, self.n
        self.u_polys = [_linear_poly(row) for row in space.m]
        self.v_polys = [_linear_poly(row) for row in space.l]
        gens = []
        for I in space.nonfaces():
            g: Poly = {(0,) * r: Q(1)}
            for i in sorted(I):
                g = _poly_mul(g, self.u_polys[i - 1])
            gens.append((len(I), g))
        self.generators = gens

        self.basis: list[Monomial] = []
        self._reduce: dict[Monomial, dict[Monomial, object]] = {}
        self.relations: list[tuple[Monomial, dict[Monomial, object]]] = []
        for k in range(n + 2):
            mons = _monomials(r, k)
            # columns ordered smallest first so pivots land on small monomials
            cols = list(reversed(mons))
            index = {m: i for i, m in enumerate(cols)}
            rows = []
            for deg, g in gens:
                if deg > k:
                    continue
                for mult in _monomials(r, k - deg):
                    prod = _poly_mul({mult: Q(1)}, g)
                    row = [Q(0)] * len(cols)
                    for e, c in prod.items():
                        row[index[e]] += c
                    rows.append(row)
            red, pivots = _rref(rows, len(cols)) if rows else ([], [])
            pivset = set(pivots)
            survivors = [m for m in mons if index[m] not in pivset]
            for row, pc in zip(red, pivots):
                lead = cols[pc]
                # lead = - sum(other coefficients)
                image = {cols[j]: -row[j] for j in range(len(cols))
                         if j != pc and row[j]}
                self._reduce[lead] = image
                self.relations.append((lead, image))
            if k <= n:
                self.basis.extend(survivors)
            elif survivors:
                raise DimensionMismatch(
                    f"degree {2 * k} piece has dimension {len(survivors)}, expected 0")
            if k == n and len(survivors) != 1:
                raise DimensionMismatch(
                    f"top degree piece has dimension {len(survivors)}, expected 1")
        if len(self.basis) != len(space.max_cones):
            raise DimensionMismatch(
                f"total dimension {len(self.basis)} differs from "
                f"{len(space.max_cones)} maximal cones")
        for a in range(r):
            if self.basis[1 + a] != tuple(1 if b == a else 0 for b in range(r)):
                raise DimensionMismatch(f"p_{a + 1} is not a basis element")
        self.dim = len(self.basis)
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.degrees = [2 * sum(m) for m in self.basis]
        self.top = self.dim - 1

        # structure constants: mult[i][j] = rational coefficient vector of T_i T_j
        self._mult = [[self._nf_rational({tuple(x + y for x, y in zip(mi, mj)): Q(1)})
                       for mj in self.basis] for mi in self.basis]

        # point class and integration
        point_classes = []
        for cone in space.max_cones:
            g: Poly = {(0,) * r: Q(1)}
            for i in sorted(cone):
                g = _poly_mul(g, self.u_polys[i - 1])
            point_classes.append(self._nf_rational(g))
        first = point_classes[0]
        for cone, pc in zip(space.max_cones, point_classes):
            if pc != first:
                raise DimensionMismatch(
                    f"point class of cone {sorted(cone)} differs from the first cone")
        if not first[self.top]:
            raise DimensionMismatch("point class vanishes")
        self._top_integral = 1 / first[self.top]
        self.point_class = self.from_rationals(first)

    # -- polynomial normal forms -----------------------------------------
    def _nf_rational(self, poly: Mapping[Monomial, object]) -> list:
        """Reduce a rational polynomial to a coefficient list over the basis."""
        vec: dict[Monomial, object] = {}
        # reductions stay within one degree, so one lookup per monomial suffices
        for e, c in poly.items():
            if not c:
                continue
            if sum(e) > self.n:
                continue
            if e in self._reduce:
                for e2, c2 in self._reduce[e].items():
                    vec[e2] = vec.get(e2, 0) + c * c2
            else:
                vec[e] = vec.get(e, 0) + c
        out = [Q(0)] * len(self.basis)
        for e, c in vec.items():
            out[self.basis.index(e)] += c
        return out

    def normal_form(self, poly: Mapping[Monomial, object]) -> "CohoClass":
        """Image of a polynomial in p (exponent tuple -> coefficient) in the basis."""
        return self.from_rationals(self._nf_rational({tuple(e): Q(c) for e, c in poly.items()}))

    # -- constructors -----------------------------------------------------
    def from_rationals(self, coeffs: Sequence) -> "CohoClass":
        arr = np.empty(self.dim, dtype=object)
        for i, c in enumerate(coeffs):
            arr[i] = Laurent.coerce(c)
        return CohoClass(self, arr)

    def zero(self) -> "CohoClass":
        arr = np.empty(self.dim, dtype=object)
        arr.fill(ZERO)
        return CohoClass(self, arr)

    def one(self) -> "CohoClass":
        return self.basis_class(0)

    def basis_class(self, i: int) -> "CohoClass":
        c = self.zero()
        c.coeffs[i] = ONE
        return c

    def p(self, a: int) -> "CohoClass":
        """p_a, 1-based."""
        return self.basis_class(a)

    def from_linear(self, row: Sequence[int]) -> "CohoClass":
        out = self.zero()
        for a, x in enumerate(row):
            if x:
                out.coeffs[1 + a] = Laurent.const(x)
        return out

    def u(self, i: int) -> "CohoClass":
        """Toric divisor u_i, 1-based."""
        return self.from_linear(self.space.m[i - 1])

    def v(self, j: int) -> "CohoClass":
        return self.from_linear(self.space.l[j - 1])

    # -- products ---------------------------------------------------------
    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim, dtype=object)
        out.fill(ZERO)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if not y:
                    continue
                xy = x * y
                for k, c in enumerate(self._mult[i][j]):
                    if c:
                        out[k] = out[k] + xy * c
        return out

    def structure_constant(self, i: int, j: int, k: int):
        """Rational coefficient of T_k in T_i T_j."""
        return self._mult[i][j][k]

    def cup_matrix(self, a: int) -> np.ndarray:
        """Matrix of p_a cup (1-based a); entry (k, j) = coefficient of T_k in p_a T_j."""
        return self.multiplication_matrix(self.p(a))

    def multiplication_matrix(self, cls: "CohoClass") -> np.ndarray:
        mat = np.empty((self.dim, self.dim), dtype=object)
        for j in range(self.dim):
            col = self.multiply(cls.coeffs, self.basis_class(j).coeffs)
            mat[:, j] = col
        return mat

    def integrate(self, cls: "CohoClass") -> Laurent:
        return cls.coeffs[self.top] * self._top_integral

    def monomial_name(self, i: int) -> str:
        parts = []
        for a, e in enumerate(self.basis[i]):
            if e == 1:
                parts.append(f"p{a + 1}")
            elif e > 1:
                parts.append(f"p{a + 1}^{e}")
        return "*".join(parts) if parts else "1"

    def describe_relations(self) -> list[str]:
        out = []
        leads = []
        for lead, image in sorted(self.relations, key=lambda t: (sum(t[0]), t[0])):
            if sum(lead) > self.n + 1:
                continue
            # above the top degree everything vanishes; keep only new generators
            if sum(lead) > self.n and any(all(x <= y for x, y in zip(m, lead)) for m in leads):
                continue
            leads.append(lead)
            lhs = _mon_str(lead)
            rhs = " + ".join(f"{c}*{_mon_str(e)}" if c != 1 else _mon_str(e)
                             for e, c in sorted(image.items(), reverse=True)) or "0"
            out.append(f"{lhs} = {rhs}")
        return out


def _mon_str(e: Monomial) -> str:
    parts = [f"p{a + 1}" + (f"^{x}" if x > 1 else "") for a, x in enumerate(e) if x]
    return "*".join(parts) or "1"


class CohoClass:
    """Cohomology class with Laurent (hbar, lambda) coefficients over the basis."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: CohomologyRing, coeffs: np.ndarray):
        self.ring = ring
        self.coeffs = coeffs

    def _wrap(self, arr):
        return CohoClass(self.ring, arr)

    def __add__(self, other):
        if isinstance(other, CohoClass):
            return self._wrap(self.coeffs + other.coeffs)
        if isinstance(other, Laurent) or isinstance(other, (int, type(Q(0)))):
            return self + self.ring.one() * other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, CohoClass):
            return self._wrap(self.ring.multiply(self.coeffs, other.coeffs))
        if isinstance(other, Laurent) or isinstance(other, (int, type(Q(0)))):
            other = Laurent.coerce(other)
            arr = np.empty(self.ring.dim, dtype=object)
            for i, x in enumerate(self.coeffs):
                arr[i] = x * other
            return self._wrap(arr)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, CohoClass):
            return all(a == b for a, b in zip(self.coeffs, other.coeffs))
        if isinstance(other, (int, type(Q(0)), Laurent)):
            return self == self.ring.one() * other
        return NotImplemented

    __hash__ = None

    def scalar_part(self) -> Laurent:
        return self.coeffs[0]

    def bar(self) -> "CohoClass":
        return self._wrap(np.array([x.bar() for x in self.coeffs], dtype=object))

    def __repr__(self):
        terms = [f"({c})*{self.ring.monomial_name(i)}" for i, c in enumerate(self.coeffs) if c]
        return "CohoClass(" + (" + ".join(terms) or "0") + ")"


# ħ-Laurent polynomials with class coefficients are represented by classes
# with Laurent coefficients.
HLaurent = CohoClass


def build_ring(space: ToricSuperspace) -> CohomologyRing:
    return CohomologyRing(space)


def euler_class(ring: CohomologyRing, lambda_mode: str = "symbolic") -> CohoClass:
    """prod_j (v_j - lambda); with lambda_mode 'zero' the lambda terms are dropped."""
    lam = LAMBDA if lambda_mode == "symbolic" else ZERO
    out = ring.one()
    for j in range(1, len(ring.space.l) + 1):
        out = out * (ring.v(j) - lam)
    return out


def pairing_matrix(ring: CohomologyRing, lambda_mode: str = "symbolic") -> np.ndarray:
    """Superspace pairing <T_i, T_j> = int T_i T_j prod_j (v_j - lambda)."""
    e = euler_class(ring, lambda_mode)
    mat = np.empty((ring.dim, ring.dim), dtype=object)
    for i in range(ring.dim):
        ti = ring.basis_class(i) * e
        for j in range(ring.dim):
            mat[i, j] = ring.integrate(ti * ring.basis_class(j))
    return mat
