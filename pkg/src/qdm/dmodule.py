"""Connection matrices, Birkhoff factorization and the recursive S solver.

Matrix convention: entry (i, j) is the coefficient of T_i in the image of
T_j, so columns are images of basis vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .series import (HBAR, ONE, ZERO, Laurent, MatrixSeries, Q, SeriesError,
                     box_exponents, identity_matrix, matrices_equal,
                     matrix_series_invert, split_hbar, zero_matrix)

__all__ = [
    "ResidualHbar",
    "ConnectionSet",
    "BirkhoffPair",
    "connection_from_s",
    "flatness_residual",
    "birkhoff_factorize",
    "canonical_connection",
    "solve_s_recursive",
    "is_homogeneous",
]


class ResidualHbar(SeriesError):
    def __init__(self, a, d):
        super().__init__(f"canonical connection matrix {a + 1} depends on hbar at q^{tuple(d)}")
        self.a, self.d = a, tuple(d)


@dataclass
class ConnectionSet:
    omegas: list[MatrixSeries]
    hbar_free: bool = False

    @property
    def box(self):
        return self.omegas[0].box

    @property
    def r(self):
        return len(self.omegas)

    def __getitem__(self, a: int) -> MatrixSeries:
        return self.omegas[a]


@dataclass
class BirkhoffPair:
    plus: MatrixSeries
    minus: MatrixSeries


def _cup_series(box, cup: np.ndarray) -> MatrixSeries:
    return MatrixSeries.constant(box, cup)


def connection_from_s(sinv: MatrixSeries, cups: Sequence[np.ndarray]) -> ConnectionSet:
    """Omega_a = S (hbar q^a d_a S^{-1} + p_a S^{-1}) with S the inverse of ``sinv``."""
    box = sinv.box
    k = sinv.shape[0]
    zero = (0,) * len(box)
    if not matrices_equal(sinv.get(zero, (k, k)), identity_matrix(k)):
        raise SeriesError("S^{-1} must equal the identity at q = 0")
    s = matrix_series_invert(sinv)
    omegas = []
    for a, cup in enumerate(cups):
        inner = sinv.theta(a) * HBAR + (cup @ sinv)
        om = s @ inner
        if not matrices_equal(om.get(zero, (k, k)), _laurent(cup)):
            raise SeriesError(f"Omega_{a + 1}(0) is not the cup product matrix")
        omegas.append(om)
    return ConnectionSet(omegas, all(o.is_hbar_free() for o in omegas))


def _laurent(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for idx, x in np.ndenumerate(m):
        out[idx] = Laurent.coerce(x)
    return out


def flatness_residual(conn: ConnectionSet) -> list[tuple[int, int, tuple[int, ...]]]:
    """(a, b, d) where q^a d_a Omega_b - q^b d_b Omega_a + hbar^{-1}[Omega_a, Omega_b] != 0."""
    bad = []
    hinv = Laurent.monomial(1, -1)
    for a in range(conn.r):
        for b in range(a + 1, conn.r):
            oa, ob = conn[a], conn[b]
            res = ob.theta(a) - oa.theta(b) + (oa @ ob - ob @ oa) * hinv
            for d, _ in res.items():
                bad.append((a, b, d))
    return bad


def birkhoff_factorize(s: MatrixSeries) -> BirkhoffPair:
    """S = S_+ S_- with S_+ in hbar^{>=0} and S_- = id + O(hbar^{-1})."""
    box = s.box
    k = s.shape[0]
    zero = (0,) * len(box)
    ident = identity_matrix(k)
    if not matrices_equal(s.get(zero, (k, k)), ident):
        raise SeriesError("S must equal the identity at q = 0")
    A: dict = {zero: ident}
    B: dict = {zero: ident}
    order = box_exponents(box)
    for d in order:
        if d == zero:
            continue
        resid = s.get(d, (k, k))
        cross = None
        for d1, a in A.items():
            if d1 == zero or any(x > y for x, y in zip(d1, d)):
                continue
            d2 = tuple(y - x for x, y in zip(d1, d))
            if d2 == zero:
                continue
            b = B.get(d2)
            if b is None:
                continue
            t = a @ b
            cross = t if cross is None else cross + t
        if cross is not None:
            resid = resid - cross
        pos, neg = split_hbar(resid)
        if any(pos.flat):
            A[d] = pos
        if any(neg.flat):
            B[d] = neg
    return BirkhoffPair(MatrixSeries(box, A), MatrixSeries(box, B))


def canonical_connection(conn: ConnectionSet, pair: BirkhoffPair) -> ConnectionSet:
    """Gauge by S_+: Omega_hat = S_+^{-1} Omega S_+ + S_+^{-1} hbar q d S_+."""
    plus = pair.plus
    plus_inv = matrix_series_invert(plus)
    out = []
    for a, om in enumerate(conn.omegas):
        hat = plus_inv @ (om @ plus + plus.theta(a) * HBAR)
        for d, v in hat.items():
            if not all(x.is_hbar_free() for x in v.flat):
                raise ResidualHbar(a, d)
        out.append(hat)
    return ConnectionSet(out, True)


def _ad_inverse(n: int, ad, x: np.ndarray) -> np.ndarray:
    """(n + hbar^{-1} ad)^{-1} x = n^{-1} sum_j (-ad / (n hbar))^j x."""
    scale = Laurent.monomial(Q(-1, n), -1)
    out = x
    term = x
    while True:
        term = ad(term) * scale
        if not any(term.flat):
            break
        out = out + term
    return out * Q(1, n)


def solve_s_recursive(conn: ConnectionSet, cups: Sequence[np.ndarray]) -> MatrixSeries:
    """Flat section S (S(0) = id, regular at hbar = infinity) of an hbar-free connection.

    Works one variable at a time: with S(k) solving the system in q^1..q^k,
    S(k+1) = S(k) T where T = sum_n T_n (q^{k+1})^n and
    (n + hbar^{-1} ad p_{k+1}) T_n = -hbar^{-1} sum_{i<n} S(k)^{-1} Omega_{k+1,n-i} S(k) T_i.
    """
    box = conn.box
    r = len(box)
    k = conn[0].shape[0]
    hinv = Laurent.monomial(-1, -1)
    sk = MatrixSeries.identity(tuple(0 for _ in box), k)
    for a in range(r):
        sub = tuple(box[b] if b < a else 0 for b in range(r))
        nxt = tuple(box[b] if b <= a else 0 for b in range(r))
        sk = MatrixSeries._raw(sub, dict(sk._c))
        sk_inv = matrix_series_invert(sk)
        p = _laurent(cups[a])

        def ad(x, p=p):
            return p @ x - x @ p

        om = conn[a]
        # pieces Omega_{a,m}: coefficient of (q^a)^m with q^{>a} = 0
        pieces: dict[int, dict] = {}
        for d, v in om.items():
            if any(d[b] for b in range(a + 1, r)):
                continue
            if any(d[b] > sub[b] for b in range(a)):
                continue
            m = d[a]
            e = tuple(0 if b == a else d[b] for b in range(r))
            pieces.setdefault(m, {})[e] = v
        conj = {m: sk_inv @ (MatrixSeries._raw(sub, c) @ sk) for m, c in pieces.items() if m > 0}
        T = [MatrixSeries.identity(sub, k)]
        for n in range(1, box[a] + 1):
            acc = None
            for i in range(n):
                c = conj.get(n - i)
                if c is None:
                    continue
                t = c @ T[i]
                acc = t if acc is None else acc + t
            if acc is None:
                T.append(MatrixSeries(sub))
                continue
            rhs = acc * hinv
            T.append(rhs.map(lambda x, n=n: _ad_inverse(n, ad, x)))
        total: dict = {}
        for n, t in enumerate(T):
            for e, v in t.items():
                d = tuple(n if b == a else e[b] for b in range(r))
                total[d] = v
        tser = MatrixSeries._raw(nxt, total)
        sk = MatrixSeries._raw(nxt, dict(sk._c)) @ tser
    return MatrixSeries._raw(box, dict(sk._c))


def is_homogeneous(series: MatrixSeries, row_degrees: Sequence[int], col_degrees: Sequence[int],
                   deg_q: Sequence[int], shift: int = 0) -> list[tuple]:
    """Entries violating deg(coef) + sum d_a deg q^a = col_deg - row_deg + shift.

    Returns the list of offending (d, i, j); empty means homogeneous.
    """
    bad = []
    for d, v in series.items():
        qdeg = sum(x * g for x, g in zip(d, deg_q))
        for idx, x in np.ndenumerate(v):
            if not x:
                continue
            i = idx[0]
            target = (col_degrees[idx[1]] if len(idx) > 1 else 0) - row_degrees[i] + shift
            if not x.is_homogeneous(target - qdeg):
                bad.append((d, *idx))
    return bad
