"""Mirror transformation: flat coordinates, quantum products, canonical J.

Conventions. The canonical connection satisfies
    Omega_hat_a(T_0) = -F_a T_0 + sum_b G_a^b p_b
with F_a = q^a d_a F and G_a^b = d log qhat^b / d log q^a. Writing
    log qhat = log q + eps(q),   log q = log qhat + delta(qhat),
we have G_a^b = delta_a^b + q^a d_a eps^b, and delta is the reversion of eps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dmodule import ConnectionSet
from .series import (HBAR, ONE, ZERO, Laurent, MatrixSeries, Q, QSeries, SeriesError,
                     identity_matrix, log_integrate, reverse_coordinates, series_exp,
                     substitute)

__all__ = [
    "NefViolated",
    "ColumnNotInSpan",
    "CompatibilityFailed",
    "AsymptoticsFailed",
    "MirrorData",
    "QuantumTable",
    "extract_mirror",
    "flat_connection",
    "quantum_products",
    "canonical_j",
    "matrix_exp",
]


class NefViolated(SeriesError):
    pass


class ColumnNotInSpan(SeriesError):
    def __init__(self, a, d, row=None):
        super().__init__(
            f"Omega_hat_{a + 1}(1) leaves span(1, p) at q^{tuple(d)}"
            + (f" (component {row + 1})" if row is not None else ""))
        self.a, self.d = a, tuple(d)


class CompatibilityFailed(SeriesError):
    def __init__(self, a, d):
        super().__init__(f"flat Omega_{a + 1}(1) differs from p_{a + 1} at qhat^{tuple(d)}")
        self.a, self.d = a, tuple(d)


class AsymptoticsFailed(SeriesError):
    def __init__(self, d, why=""):
        super().__init__(f"canonical J fails its asymptotic form at qhat^{tuple(d)} {why}".strip())
        self.d = tuple(d)


@dataclass
class MirrorData:
    """Mirror map data.

    F, f, eps are series in the original coordinates q; F_hat, f_hat, delta
    are the same objects written in the flat coordinates qhat.
    """

    F: QSeries
    F_components: list[QSeries]
    G: list[list[QSeries]]
    eps: list[QSeries]
    delta: list[QSeries]
    f: QSeries
    F_hat: QSeries
    f_hat: QSeries

    def forward(self) -> list[QSeries]:
        """q^a / qhat^a = exp(delta^a(qhat)) as series in qhat."""
        return [series_exp(dl) for dl in self.delta]

    def inverse(self) -> list[QSeries]:
        """qhat^a / q^a = exp(eps^a(q)) as series in q."""
        return [series_exp(e) for e in self.eps]

    def is_trivial(self) -> bool:
        return not self.F and all(not e for e in self.eps) and self.f == QSeries.one(self.f.box)


def _require_nef(deg_q: Sequence[int]) -> None:
    bad = [a + 1 for a, g in enumerate(deg_q) if g < 0]
    if bad:
        raise NefViolated(f"deg q^{bad} < 0: the first Chern class of the superspace is not nef")


def extract_mirror(conn_hat: ConnectionSet, s_plus: MatrixSeries, deg_q: Sequence[int],
                   r: int | None = None) -> MirrorData:
    """Read F, G and f off the canonical connection and the gauge S_+."""
    _require_nef(deg_q)
    r = conn_hat.r if r is None else r
    box = conn_hat.box
    dim = conn_hat[0].shape[0]
    F_comp: list[QSeries] = []
    G: list[list[QSeries]] = []
    for a, om in enumerate(conn_hat.omegas):
        for d, v in om.items():
            for i in range(1 + r, dim):
                if v[i, 0]:
                    raise ColumnNotInSpan(a, d, i)
        F_comp.append(-om.entry(0, 0))
        G.append([om.entry(1 + b, 0) for b in range(r)])
    F = log_integrate(F_comp)
    eps = []
    for b in range(r):
        eps.append(log_integrate([G[a][b] - (QSeries.one(box) if a == b else QSeries(box))
                                  for a in range(r)]))
    delta = reverse_coordinates(eps)

    for d, v in s_plus.items():
        if any(v[i, 0] for i in range(1, dim)):
            raise ColumnNotInSpan(0, d)
    f = s_plus.entry(0, 0)
    return MirrorData(F=F, F_components=F_comp, G=G, eps=eps, delta=delta, f=f,
                      F_hat=substitute(F, delta), f_hat=substitute(f, delta))


def flat_connection(conn_hat: ConnectionSet, mirror: MirrorData) -> ConnectionSet:
    """Connection matrices in the flat coordinates qhat (with F absorbed)."""
    r = conn_hat.r
    box = conn_hat.box
    dim = conn_hat[0].shape[0]
    subst = [substitute(om, mirror.delta) for om in conn_hat.omegas]
    ident = MatrixSeries.identity(box, dim)
    out = []
    for a in range(r):
        total = ident * mirror.F_hat.theta(a)
        for b in range(r):
            jac = mirror.delta[b].theta(a)
            if a == b:
                jac = jac + 1
            total = total + jac * subst[b]
        for d, v in total.items():
            for i in range(dim):
                want = ONE if (i == 1 + a and d == (0,) * len(box)) else ZERO
                if v[i, 0] != want:
                    raise CompatibilityFailed(a, d)
        out.append(total)
    return ConnectionSet(out, all(o.is_hbar_free() for o in out))


@dataclass
class QuantumTable:
    """Structure constants of p_a * T_j = sum_k c[a][d][k, j] qhat^d T_k."""

    coefficients: list[MatrixSeries]
    paired: list[MatrixSeries]

    def product(self, a: int, j: int) -> list[tuple[int, QSeries]]:
        """p_a * T_j as [(k, series)] (a 1-based, j, k 0-based)."""
        m = self.coefficients[a - 1]
        return [(k, m.entry(k, j)) for k in range(m.shape[0]) if m.entry(k, j)]


def quantum_products(flat: ConnectionSet, pairing: np.ndarray) -> QuantumTable:
    """Quantum multiplication by p_a, plus <p_a * T_j, T_k> (matrix [k, j])."""
    g = np.empty(pairing.shape, dtype=object)
    for idx, x in np.ndenumerate(pairing):
        g[idx] = Laurent.coerce(x)
    paired = [(om.transpose() @ g).transpose() for om in flat.omegas]
    return QuantumTable(list(flat.omegas), paired)


def matrix_exp(m: MatrixSeries) -> MatrixSeries:
    """exp of a matrix series with nilpotent constant term (constant term must vanish
    or be nilpotent)."""
    box = m.box
    k = m.shape[0]
    out = MatrixSeries.identity(box, k)
    term = MatrixSeries.identity(box, k)
    for j in range(1, sum(box) + k + 2):
        term = (term @ m) * Q(1, j)
        if not term:
            break
        out = out + term
    return out


def canonical_j(j_vector: MatrixSeries, mirror: MirrorData, cups: Sequence[np.ndarray],
                check: bool = True) -> MatrixSeries:
    """f exp(F/hbar) exp(sum_a p_a delta^a / hbar) J in flat coordinates.

    ``j_vector`` is S^{-1}(1) in the original coordinates; the prefactor
    exp(p log q / hbar) becomes exp(p log qhat / hbar) and is kept symbolic.
    """
    box = j_vector.box
    dim = j_vector.shape[0]
    hinv = Laurent.monomial(1, -1)
    jq = substitute(j_vector, mirror.delta)
    shift = MatrixSeries(box)
    for a, dl in enumerate(mirror.delta):
        shift = shift + (dl * hinv) * MatrixSeries.constant(box, cups[a])
    ef = series_exp(mirror.F_hat * hinv)
    scalar = mirror.f_hat * ef
    out = scalar * (matrix_exp(shift) @ jq) if shift else scalar * jq
    if check:
        zero = (0,) * len(box)
        for d, v in out.items():
            for i, x in enumerate(v):
                hi = x.max_hbar()
                if hi is not None and hi > 0:
                    raise AsymptoticsFailed(d, "(positive hbar power)")
                c0 = x.hbar_coefficient(0)
                want = ONE if (d == zero and i == 0) else ZERO
                if c0 != want:
                    raise AsymptoticsFailed(d, "(hbar^0 part)")
                if x.hbar_coefficient(-1):
                    raise AsymptoticsFailed(d, "(hbar^-1 part)")
    return out
