"""End-to-end pipeline and the invariant suite."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cohomology import CohomologyRing, build_ring, pairing_matrix
from .dmodule import (BirkhoffPair, ConnectionSet, birkhoff_factorize, canonical_connection,
                      connection_from_s, flatness_residual, is_homogeneous,
                      solve_s_recursive)
from .floer import FloerModel, NonPolynomialPairing
from .mirror import (AsymptoticsFailed, MirrorData, NefViolated, QuantumTable, canonical_j,
                     extract_mirror, flat_connection, quantum_products)
from .series import Laurent, MatrixSeries, matrix_series_invert
from .toric import ToricSuperspace

__all__ = ["STAGES", "Artifacts", "run_pipeline", "VerifyReport", "verify_suite"]

STAGES = ("ring", "sinv", "connection", "canonical", "mirror", "flat")


def _laurent_matrix(m: np.ndarray) -> np.ndarray:
    out = np.empty(m.shape, dtype=object)
    for idx, x in np.ndenumerate(m):
        out[idx] = Laurent.coerce(x)
    return out


@dataclass
class Artifacts:
    space: ToricSuperspace
    box: tuple[int, ...]
    lambda_mode: str
    ring: CohomologyRing | None = None
    floer: FloerModel | None = None
    cups: list[np.ndarray] = field(default_factory=list)
    pairing: np.ndarray | None = None
    sinv: MatrixSeries | None = None
    s: MatrixSeries | None = None
    connection: ConnectionSet | None = None
    birkhoff: BirkhoffPair | None = None
    canonical: ConnectionSet | None = None
    mirror: MirrorData | None = None
    mirror_error: Exception | None = None
    flat: ConnectionSet | None = None
    table: QuantumTable | None = None

    @property
    def j_vector(self) -> MatrixSeries:
        return self.sinv.column(0)


def run_pipeline(space: ToricSuperspace, box: Sequence[int], lambda_mode: str = "zero",
                 until: str = "flat", strict_mirror: bool = False) -> Artifacts:
    """Run stages up to ``until``.

    A NefViolated error from the mirror stage is stored on the artifacts
    (and the flat stage skipped) unless ``strict_mirror`` is set.
    """
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    stop = STAGES.index(until)
    box = tuple(int(c) for c in box)
    if len(box) != space.r:
        raise ValueError(f"cutoff needs {space.r} entries, got {len(box)}")
    art = Artifacts(space, box, lambda_mode)
    art.ring = build_ring(space)
    art.floer = FloerModel(space, art.ring, lambda_mode)
    art.cups = [art.ring.cup_matrix(a + 1) for a in range(space.r)]
    art.pairing = pairing_matrix(art.ring, lambda_mode)
    if stop < 1:
        return art
    art.sinv = art.floer.s_inverse_matrix(box)
    if stop < 2:
        return art
    art.s = matrix_series_invert(art.sinv)
    art.connection = connection_from_s(art.sinv, art.cups)
    if stop < 3:
        return art
    art.birkhoff = birkhoff_factorize(art.s)
    art.canonical = canonical_connection(art.connection, art.birkhoff)
    if stop < 4:
        return art
    try:
        art.mirror = extract_mirror(art.canonical, art.birkhoff.plus, space.deg_q)
    except NefViolated as exc:
        if strict_mirror:
            raise
        art.mirror_error = exc
        return art
    if stop < 5:
        return art
    art.flat = flat_connection(art.canonical, art.mirror)
    art.table = quantum_products(art.flat, art.pairing)
    return art


@dataclass
class VerifyReport:
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks[name] = bool(ok)
        if detail:
            self.details[name] = detail

    def lines(self) -> list[str]:
        out = []
        for k, v in self.checks.items():
            line = f"{k}: {'pass' if v else 'FAIL'}"
            if k in self.details and not v:
                line += f" ({self.details[k]})"
            out.append(line)
        for k, why in self.skipped.items():
            out.append(f"{k}: skipped ({why})")
        return out


def _same(a: MatrixSeries, b: MatrixSeries) -> bool:
    return a == b


def verify_suite(art: Artifacts) -> VerifyReport:
    """Invariant checks over a full pipeline run."""
    rep = VerifyReport()
    ring = art.ring
    box = art.box
    dim = ring.dim
    deg = ring.degrees
    dq = art.space.deg_q
    g = _laurent_matrix(art.pairing)

    bad = flatness_residual(art.connection)
    rep.add("flatness_connection", not bad, f"first residual at {bad[:1]}")
    bad = flatness_residual(art.canonical)
    rep.add("flatness_canonical", not bad, f"first residual at {bad[:1]}")
    comm = []
    for a in range(art.canonical.r):
        for b in range(a + 1, art.canonical.r):
            oa, ob = art.canonical[a], art.canonical[b]
            if (oa @ ob - ob @ oa) or (ob.theta(a) - oa.theta(b)):
                comm.append((a + 1, b + 1))
    rep.add("canonical_commuting", not comm and art.canonical.hbar_free, f"pairs {comm}")

    plus, minus = art.birkhoff.plus, art.birkhoff.minus
    grading = {}
    for name, m, shift in (("sinv", art.sinv, 0), ("s", art.s, 0), ("s_plus", plus, 0),
                           ("s_minus", minus, 0)):
        grading[name] = is_homogeneous(m, deg, deg, dq, shift)
    for a, om in enumerate(art.connection.omegas):
        grading[f"omega_{a + 1}"] = is_homogeneous(om, deg, deg, dq, 2)
    for a, om in enumerate(art.canonical.omegas):
        grading[f"omega_hat_{a + 1}"] = is_homogeneous(om, deg, deg, dq, 2)
    bad = {k: v[:1] for k, v in grading.items() if v}
    rep.add("grading", not bad, str(bad))

    rep.add("birkhoff_identity", _same(plus @ minus, art.s))
    rec = solve_s_recursive(art.canonical, art.cups)
    rep.add("recursive_solver_matches_s_minus", _same(rec, minus))

    unit = minus.bar().transpose() @ (g @ minus)
    rep.add("unitarity_s_minus", _same(unit, MatrixSeries.constant(box, g)))

    adj = []
    for a, om in enumerate(art.canonical.omegas):
        if not _same(g @ om, om.transpose() @ g):
            adj.append(a + 1)
    rep.add("canonical_self_adjoint", not adj, f"matrices {adj}")

    try:
        frame = art.floer.frame_pairing(art.sinv, g)
        const_ok = _same(frame.truncate((0,) * len(box)),
                         MatrixSeries.constant((0,) * len(box), g))
        rep.add("pairing_polynomial", const_ok, "constant term differs from Poincare pairing")
        canon = plus.bar().transpose() @ (frame @ plus)
        rep.add("pairing_canonical_constant", _same(canon, MatrixSeries.constant(box, g)))
    except NonPolynomialPairing as exc:
        rep.add("pairing_polynomial", False, str(exc))

    if art.mirror is not None and art.flat is not None:
        bad = flatness_residual(art.flat)
        rep.add("flatness_flat", not bad and art.flat.hbar_free, f"first residual at {bad[:1]}")
        s_can = solve_s_recursive(art.flat, art.cups)
        s_can_inv = matrix_series_invert(s_can)
        col = s_can_inv.column(0)
        hm1 = [d for d, v in col.items() if any(x.hbar_coefficient(-1) for x in v)]
        rep.add("canonical_j_asymptotics", not hm1, f"hbar^-1 terms at {hm1[:1]}")
        try:
            j_can = canonical_j(art.j_vector, art.mirror, art.cups)
            rep.add("canonical_j_matches_flat_frame", _same(j_can, col))
        except AsymptoticsFailed as exc:
            rep.add("canonical_j_matches_flat_frame", False, str(exc))
        plus_id = MatrixSeries.identity(box, dim)
        again = extract_mirror(art.flat, plus_id, dq)
        rep.add("mirror_idempotent", again.is_trivial())
        sym = [a + 1 for a, p in enumerate(art.table.paired)
               if not _same(p, p.transpose())]
        rep.add("frobenius_symmetry", not sym, f"p_{sym}")
    else:
        why = str(art.mirror_error) if art.mirror_error else "mirror stage not run"
        for name in ("flatness_flat", "canonical_j_asymptotics",
                     "canonical_j_matches_flat_frame", "mirror_idempotent",
                     "frobenius_symmetry"):
            rep.skipped[name] = why
    return rep
