import dataclasses

import pytest

from qdm.dmodule import ConnectionSet
from qdm.mirror import (AsymptoticsFailed, NefViolated, canonical_j, extract_mirror,
                        flat_connection, quantum_products)
from qdm.pipeline import run_pipeline
from qdm.series import MatrixSeries, QSeries, series_exp

import reference_data as P
from conftest import matrix_sym, parse, pipeline, qseries_from, series_sym, space_of, truncate

BOX = (3, 4)


def test_f1_mirror_is_trivial(f1):
    md = f1.mirror
    assert md.is_trivial()
    assert all(not d for d in md.delta)
    assert all(f1.flat[a] == f1.canonical[a] for a in range(2))


def test_superspace_potential_and_normalization(f1_super):
    md = f1_super.mirror
    assert series_sym(md.F) == truncate(parse(P.SUPER_F), BOX)
    assert series_sym(md.F_hat) == parse(P.SUPER_F_HAT)
    assert series_sym(md.f) == truncate(parse(P.SUPER_f), BOX)
    assert md.f == qseries_from(parse(P.SUPER_f_CLOSED), BOX)
    assert md.f_hat == qseries_from(parse(P.SUPER_f_HAT_CLOSED), BOX)


def test_superspace_forward_map(f1_super):
    fx, fy = f1_super.mirror.forward()
    assert series_sym(fx) == parse(P.SUPER_FORWARD_X)
    assert fy.rational_coefficients() == {(0, k): c for k, c in enumerate(P.SUPER_FORWARD_Y)
                                          if k <= BOX[1]}
    # closed forms: x = xhat (1 - yhat)^2, y = yhat / (1 + yhat)^2
    assert fx == qseries_from(parse(P.SUPER_X_CLOSED).subs("x", 1), BOX)
    assert fy == qseries_from(parse(P.SUPER_Y_CLOSED) / parse("y"), BOX)


def test_superspace_inverse_map(f1_super):
    ex, ey = f1_super.mirror.inverse()
    assert series_sym(f1_super.mirror.eps[0]) == parse("2*y+5*y**2+44*y**3/3+93*y**4/2")
    # yhat / y = (C(y) - 1) / y with C the Catalan generating function
    catalan = qseries_from(parse("(1-2*y-sqrt(1-4*y))/(2*y**2)"), BOX)
    assert ey == catalan
    yhat = parse("(1-2*y-sqrt(1-4*y))/(2*y)")
    assert ex == qseries_from(1 / (1 - yhat)**2, BOX)


def test_flat_connection_matches_reference(f1_super):
    for a in range(2):
        ours = matrix_sym(f1_super.flat[a])
        for i in range(4):
            for j in range(4):
                assert ours[i][j] == truncate(parse(P.SUPER_OMEGA_FLAT[a][i][j]), BOX), (a, i, j)
    assert f1_super.flat.hbar_free


def test_quantum_products_f1(f1):
    table = f1.table
    got = dict(table.product(1, 1))
    assert series_sym(got[1]) == parse("-x") and series_sym(got[2]) == parse("x")
    assert set(got) == {1, 2}
    got = dict(table.product(1, 3))
    assert set(got) == {0} and series_sym(got[0]) == parse("x*y")


def test_quantum_products_projective():
    p1 = pipeline("p1", (4,))
    assert [(k, series_sym(s)) for k, s in p1.table.product(1, 1)] == [(0, parse("x"))]
    p2 = pipeline("p2", (3,))
    assert [(k, series_sym(s)) for k, s in p2.table.product(1, 2)] == [(0, parse("x"))]


@pytest.mark.parametrize("name,box", [("p1", (4,)), ("f1", (3, 3)), ("f1_super", (3, 4))])
def test_classical_limit_and_frobenius(name, box):
    art = pipeline(name, box)
    zero = (0,) * len(box)
    for a in range(art.space.r):
        assert art.flat[a].truncate(zero) == MatrixSeries.constant(zero, art.cups[a])
        paired = art.table.paired[a]
        assert paired == paired.transpose()
    for a in range(art.space.r):
        for b in range(art.space.r):
            oa, ob = art.flat[a], art.flat[b]
            assert oa @ ob == ob @ oa


@pytest.mark.parametrize("name,box", [("f1", (3, 3)), ("f1_super", (3, 4))])
def test_mirror_idempotent(name, box):
    art = pipeline(name, box)
    ident = MatrixSeries.identity(box, art.ring.dim)
    assert extract_mirror(art.flat, ident, art.space.deg_q).is_trivial()


def test_mirror_grading(f1_super):
    md = f1_super.mirror
    deg_q = f1_super.space.deg_q
    for d, _ in md.F.items():
        assert sum(a * b for a, b in zip(d, deg_q)) == 2
    for s in [md.f, *md.delta]:
        for d, _ in s.items():
            assert sum(a * b for a, b in zip(d, deg_q)) == 0


def test_trivial_mirror_leaves_things_alone(f1):
    assert flat_connection(f1.canonical, f1.mirror).omegas == f1.canonical.omegas
    j = canonical_j(f1.j_vector, f1.mirror, f1.cups)
    assert j == f1.j_vector


def test_p1_canonical_j_is_j():
    art = pipeline("p1", (4,))
    assert canonical_j(art.j_vector, art.mirror, art.cups) == art.j_vector


def test_superspace_canonical_j_asymptotics(f1_super):
    j = canonical_j(f1_super.j_vector, f1_super.mirror, f1_super.cups)
    for d, v in j.items():
        for x in v:
            assert x.max_hbar() is None or x.max_hbar() <= 0
            assert not x.hbar_coefficient(-1)
    with pytest.raises(AsymptoticsFailed):
        wrong = dataclasses.replace(f1_super.mirror, f_hat=QSeries.one(BOX))
        canonical_j(f1_super.j_vector, wrong, f1_super.cups)


def test_non_nef_refuses():
    art = run_pipeline(space_of("p1_negdeg"), (3,))
    assert isinstance(art.mirror_error, NefViolated) and art.flat is None
    with pytest.raises(NefViolated):
        run_pipeline(space_of("p1_negdeg"), (3,), strict_mirror=True)
    with pytest.raises(NefViolated):
        extract_mirror(art.canonical, art.birkhoff.plus, art.space.deg_q)


def test_quantum_products_from_constant_connection():
    art = pipeline("f1", (1, 1), until="ring")
    conn = ConnectionSet([MatrixSeries.constant((1, 1), c) for c in art.cups], True)
    table = quantum_products(conn, art.pairing)
    assert dict((k, s.constant_term()) for k, s in table.product(2, 2)) == {3: 1}
    assert series_exp(QSeries((1, 1))) == QSeries.one((1, 1))
