"""Combinatorial input for toric superspaces.

A superspace is given by a smooth complete fan (rays and maximal cones), a
Gale matrix ``m`` expressing the toric divisors ``u_i = sum_a m[i][a] p_a``
in a nef basis ``p_1..p_r`` of H^2, and a bundle matrix ``l`` expressing the
first Chern classes ``v_j = sum_a l[j][a] p_a`` of the line bundle summands.

Cone indices are 1-based throughout the public API, matching the usual
notation for fans.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ToricError",
    "NonPrimitiveRay",
    "NotSmooth",
    "NotComplete",
    "NotGaleDual",
    "NotSurjectiveOverZ",
    "BasisNotNef",
    "NegativeBundleEntry",
    "ValidationReport",
    "ToricSuperspace",
    "validate_fan",
    "validate_gale",
    "minimal_nonfaces",
    "degree_vector",
    "suggest_nef_basis",
]


class ToricError(ValueError):
    """Invalid toric input."""


class NonPrimitiveRay(ToricError):
    def __init__(self, index: int, ray: Sequence[int]):
        super().__init__(f"ray {index} = {tuple(ray)} is not primitive")
        self.index = index


class NotSmooth(ToricError):
    def __init__(self, cone: frozenset[int]):
        super().__init__(f"cone {sorted(cone)} is not generated by part of a Z-basis")
        self.cone = cone


class NotComplete(ToricError):
    def __init__(self, facet: frozenset[int], count: int):
        super().__init__(
            f"facet {sorted(facet)} lies in {count} maximal cones (expected 2)")
        self.facet = facet
        self.count = count


class NotGaleDual(ToricError):
    pass


class NotSurjectiveOverZ(ToricError):
    pass


class BasisNotNef(ToricError):
    def __init__(self, a: int, cone: frozenset[int]):
        super().__init__(
            f"basis class p_{a} is not nef: negative coefficient over cone {sorted(cone)}")
        self.a = a
        self.cone = cone


class NegativeBundleEntry(ToricError):
    pass


@dataclass
class ValidationReport:
    """Outcome of a validation pass; ``failures`` keeps the exceptions."""

    checks: dict[str, bool] = field(default_factory=dict)
    failures: list[ToricError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, name: str, error: ToricError | None) -> None:
        self.checks[name] = self.checks.get(name, True) and error is None
        if error is not None:
            self.failures.append(error)

    def raise_first(self) -> None:
        if self.failures:
            raise self.failures[0]

    def __str__(self) -> str:
        return "\n".join(f"{name}: {'pass' if ok else 'FAIL'}"
                         for name, ok in self.checks.items())


def _det(rows: Sequence[Sequence[int]]) -> Fraction:
    """Exact determinant by fraction-free elimination over Q."""
    a = [[Fraction(x) for x in row] for row in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def _solve(columns: Sequence[Sequence[int]], target: Sequence[int]) -> list[Fraction] | None:
    """Solve sum_k x_k columns[k] = target exactly; None if singular."""
    n = len(target)
    a = [[Fraction(columns[k][i]) for k in range(n)] + [Fraction(target[i])]
         for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][n] for i in range(n)]


def _normalize_cones(max_cones: Iterable[Iterable[int]]) -> tuple[frozenset[int], ...]:
    return tuple(frozenset(int(i) for i in cone) for cone in max_cones)


def validate_fan(rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]],
                 strict: bool = True) -> ValidationReport:
    """Check primitivity, smoothness and completeness of a simplicial fan.

    Completeness uses the pseudo-manifold criterion: every facet of a maximal
    cone lies in exactly two maximal cones. With ``strict`` the first failure
    is raised, otherwise all failures are collected in the report.
    """
    cones = _normalize_cones(max_cones)
    rays = [tuple(int(x) for x in ray) for ray in rays]
    n = len(rays[0]) if rays else 0
    report = ValidationReport()

    for idx, ray in enumerate(rays, start=1):
        g = 0
        for x in ray:
            g = gcd(g, x)
        report.record("primitive", None if g == 1 else NonPrimitiveRay(idx, ray))

    report.record("simplicial", None)
    for cone in cones:
        if len(cone) != n or not all(1 <= i <= len(rays) for i in cone):
            report.record("simplicial", ToricError(
                f"cone {sorted(cone)} must be an {n}-subset of 1..{len(rays)}"))
            continue
        det = _det([rays[i - 1] for i in sorted(cone)])
        report.record("smooth", None if abs(det) == 1 else NotSmooth(cone))

    report.record("complete", None)
    facet_count: dict[frozenset[int], int] = {}
    for cone in cones:
        for facet in combinations(sorted(cone), n - 1):
            key = frozenset(facet)
            facet_count[key] = facet_count.get(key, 0) + 1
    for facet, count in sorted(facet_count.items(), key=lambda kv: sorted(kv[0])):
        if count != 2:
            report.record("complete", NotComplete(facet, count))

    if strict:
        report.raise_first()
    return report


def _minors_gcd(m: Sequence[Sequence[int]], r: int) -> int:
    g = 0
    for rows in combinations(range(len(m)), r):
        d = _det([m[i] for i in rows])
        g = gcd(g, int(d))
        if g == 1:
            break
    return g


def validate_gale(rays: Sequence[Sequence[int]], m: Sequence[Sequence[int]],
                  max_cones: Iterable[Iterable[int]], strict: bool = True) -> ValidationReport:
    """Check that ``m`` is an integral Gale dual of the rays in a nef basis."""
    cones = _normalize_cones(max_cones)
    N = len(rays)
    n = len(rays[0])
    r = N - n
    report = ValidationReport()
    if len(m) != N or any(len(row) != r for row in m):
        report.record("gale_dual", NotGaleDual(f"m must be {N}x{r}"))
        if strict:
            report.raise_first()
        return report

    mt_rays = np.array(m, dtype=object).T.dot(np.array(rays, dtype=object))
    err = None if not np.any(mt_rays != 0) else NotGaleDual(
        f"m^T * rays = {mt_rays.tolist()} is not zero")
    report.record("gale_dual", err)

    g = _minors_gcd(m, r) if r > 0 else 1
    if g == 0:
        report.record("surjective", NotSurjectiveOverZ("m has rank < r"))
    elif g != 1:
        report.record("surjective", NotSurjectiveOverZ(
            f"maximal minors of m have gcd {g}; invariant factors are not all 1"))
    else:
        report.record("surjective", None)

    report.record("nef_basis", None)
    if g != 0:
        for cone in cones:
            comp = [i for i in range(1, N + 1) if i not in cone]
            cols = [m[i - 1] for i in comp]
            for a in range(r):
                unit = [1 if b == a else 0 for b in range(r)]
                coeffs = _solve(cols, unit)
                if coeffs is None:
                    report.record("nef_basis", NotSmooth(cone))
                    break
                if any(c < 0 for c in coeffs):
                    report.record("nef_basis", BasisNotNef(a + 1, cone))
    if strict:
        report.raise_first()
    return report


def minimal_nonfaces(max_cones: Iterable[Iterable[int]], n_rays: int | None = None
                     ) -> list[frozenset[int]]:
    """Primitive collections: minimal index sets not spanning a cone of the fan."""
    cones = _normalize_cones(max_cones)
    if n_rays is None:
        n_rays = max(max(c) for c in cones)
    top = max(len(c) for c in cones)

    def is_face(s: frozenset[int]) -> bool:
        return any(s <= c for c in cones)

    found: list[frozenset[int]] = []
    for size in range(1, top + 2):
        for subset in combinations(range(1, n_rays + 1), size):
            s = frozenset(subset)
            if is_face(s) or any(f <= s for f in found):
                continue
            found.append(s)
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def degree_vector(m: Sequence[Sequence[int]], l: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """deg q^a = 2 * (sum_i m[i][a] - sum_j l[j][a])."""
    r = len(m[0])
    return tuple(2 * (sum(row[a] for row in m) - sum(row[a] for row in l))
                 for a in range(r))


@dataclass(frozen=True)
class ToricSuperspace:
    """Validated toric superspace data (immutable).

    ``l`` may be empty (no bundle). All entries of ``l`` must be nonnegative
    so that each ``v_j`` lies in the cone spanned by the basis.
    """

    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[frozenset[int], ...]
    m: tuple[tuple[int, ...], ...]
    l: tuple[tuple[int, ...], ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rays", tuple(tuple(int(x) for x in r) for r in self.rays))
        object.__setattr__(self, "max_cones", _normalize_cones(self.max_cones))
        object.__setattr__(self, "m", tuple(tuple(int(x) for x in r) for r in self.m))
        object.__setattr__(self, "l", tuple(tuple(int(x) for x in r) for r in self.l))
        validate_fan(self.rays, self.max_cones)
        validate_gale(self.rays, self.m, self.max_cones)
        for j, row in enumerate(self.l, start=1):
            if len(row) != self.r:
                raise NegativeBundleEntry(f"bundle row {j} must have {self.r} entries")
            if any(x < 0 for x in row):
                raise NegativeBundleEntry(
                    f"bundle row {j} = {row} has a negative entry; v_j must be "
                    "a nonnegative combination of the basis")

    @property
    def N(self) -> int:
        return len(self.rays)

    @property
    def n(self) -> int:
        return len(self.rays[0])

    @property
    def r(self) -> int:
        return self.N - self.n

    @property
    def deg_q(self) -> tuple[int, ...]:
        return degree_vector(self.m, self.l)

    @property
    def is_nef(self) -> bool:
        """True when every deg q^a is nonnegative."""
        return all(d >= 0 for d in self.deg_q)

    def nonfaces(self) -> list[frozenset[int]]:
        return minimal_nonfaces(self.max_cones, self.N)

    def u_degree(self, d: Sequence[int]) -> tuple[int, ...]:
        """<u_i, d> for every ray."""
        return tuple(sum(row[a] * d[a] for a in range(self.r)) for row in self.m)

    def v_degree(self, d: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(row[a] * d[a] for a in range(self.r)) for row in self.l)


def _integer_kernel(rays: Sequence[Sequence[int]]) -> list[list[int]]:
    """Z-basis of {c in Z^N : sum_i c_i x_i = 0} by unimodular row reduction."""
    N, n = len(rays), len(rays[0])
    rows = [list(rays[i]) + [1 if j == i else 0 for j in range(N)] for i in range(N)]
    pivot_row = 0
    for col in range(n):
        while True:
            nz = [i for i in range(pivot_row, N) if rows[i][col] != 0]
            if not nz:
                break
            k = min(nz, key=lambda i: abs(rows[i][col]))
            rows[pivot_row], rows[k] = rows[k], rows[pivot_row]
            done = True
            for i in range(pivot_row + 1, N):
                if rows[i][col]:
                    q = rows[i][col] // rows[pivot_row][col]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
                    if rows[i][col]:
                        done = False
            if done:
                pivot_row += 1
                break
    return [row[n:] for row in rows[pivot_row:]]


def suggest_nef_basis(rays: Sequence[Sequence[int]], max_cones: Iterable[Iterable[int]]
                      ) -> list[list[int]] | None:
    """Propose a Gale matrix ``m`` in a nef Z-basis of H^2, for r <= 2 only.

    The nef cone is intersected from the cones spanned by the complements of
    maximal cones; its primitive edge generators are used as the basis when
    they form a Z-basis. Returns None if that is not the case.
    """
    cones = _normalize_cones(max_cones)
    K = _integer_kernel(rays)          # r x N, rows are relations
    r = len(K)
    N = len(rays)
    if r > 2:
        raise NotImplementedError("nef basis suggestion is limited to r <= 2")
    u = [[K[a][i] for a in range(r)] for i in range(N)]
    if r == 1:
        sign = 1 if all(x[0] >= 0 for x in u) else -1
        if any(sign * x[0] < 0 for x in u):
            return None
        return [[sign * x[0]] for x in u]

    def angle_key(v):
        return np.arctan2(float(v[1]), float(v[0]))

    # nef cone = intersection of 2D cones cone(u_i, u_j) for complements {i, j}
    lo, hi = None, None
    for cone in cones:
        comp = [i for i in range(N) if i + 1 not in cone]
        a, b = u[comp[0]], u[comp[1]]
        if a[0] * b[1] - a[1] * b[0] < 0:
            a, b = b, a
        if lo is None:
            lo, hi = a, b
            continue
        # tighten [lo, hi] (counterclockwise) against [a, b]
        def inside(v, s, t):
            return s[0] * v[1] - s[1] * v[0] >= 0 and v[0] * t[1] - v[1] * t[0] >= 0
        cand = [v for v in (lo, hi, a, b) if inside(v, lo, hi) and inside(v, a, b)]
        if not cand:
            return None
        cand.sort(key=angle_key)
        ref = angle_key(lo)
        cand.sort(key=lambda v: (angle_key(v) - ref) % (2 * np.pi))
        lo, hi = cand[0], cand[-1]
    g1, g2 = gcd(*lo), gcd(*hi)
    e1 = [x // g1 for x in lo]
    e2 = [x // g2 for x in hi]
    det = e1[0] * e2[1] - e1[1] * e2[0]
    if abs(det) != 1:
        return None
    # u_i = m_i1 e1 + m_i2 e2
    m = []
    for x in u:
        c1 = (x[0] * e2[1] - x[1] * e2[0]) // det
        c2 = (e1[0] * x[1] - e1[1] * x[0]) // det
        m.append([c1, c2])
    return m
