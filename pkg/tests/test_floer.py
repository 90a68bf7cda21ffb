import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from qdm.cohomology import build_ring
from qdm.dmodule import is_homogeneous
from qdm.floer import FloerCycle, FloerModel, PPoly
from qdm.series import HBAR, Laurent, box_exponents

from conftest import h, lam, laurent_sym, matrix_sym, pipeline, space_of, x, y


def model(name, mode="zero"):
    space = space_of(name)
    return FloerModel(space, build_ring(space), mode)


def hm(c, k):
    return Laurent.monomial(c, k)


# -- localization examples -------------------------------------------------------

def test_localization_examples():
    f1 = model("f1")
    ring = f1.ring
    got = f1.localization_coefficient((1, 0))
    assert got == (ring.p(2) - ring.p(1)) * hm(1, -2) - ring.basis_class(3) * hm(2, -3)
    p1 = model("p1")
    want = p1.ring.one() * hm(1, -2) - p1.ring.p(1) * hm(2, -3)
    assert p1.localization_coefficient((1,)) == want
    poly = PPoly.P(2, 1) * PPoly.P(2, 2) + PPoly.hbar(2)
    assert f1.localization_coefficient((0, 0), poly) == ring.basis_class(3) + ring.one() * HBAR


@settings(max_examples=60, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_vanishing_lemma(d1, d2):
    f1 = model("f1")
    space = f1.space
    neg = {i + 1 for i, k in enumerate(space.u_degree((d1, d2))) if k < 0}
    if any(nf <= neg for nf in space.nonfaces()):
        assert not f1.window_factor((d1, d2))


# -- J function oracle ----------------------------------------------------------------

class _Reducer:
    """Normal forms modulo the Stanley-Reisner ideal, one monomial at a time."""

    def __init__(self, space):
        self.ps = sp.symbols(f"p1:{space.r + 1}")
        self.us = [sum(c * p for c, p in zip(row, self.ps)) for row in space.m]
        self.G = sp.groebner([sp.Mul(*[self.us[i - 1] for i in nf])
                              for nf in space.nonfaces()], *self.ps, order="grevlex")
        self._cache = {}

    def __call__(self, expr):
        expr = sp.expand(expr)
        if expr == 0:
            return expr
        out = sp.Integer(0)
        for mon, coeff in sp.Poly(expr, *self.ps).terms():
            if mon not in self._cache:
                m = sp.Mul(*[p**e for p, e in zip(self.ps, mon)])
                self._cache[mon] = self.G.reduce(m)[1]
            out += coeff * self._cache[mon]
        return sp.expand(out)


def _nilpotent_inverse(u, c, n):
    """1/(u + c h) truncated at u^n."""
    return sum(((-u)**k / (c * h)**(k + 1) for k in range(n + 1)), sp.Integer(0))


def _hypergeometric_j(name, box, mode):
    """S^{-1}(1) from the closed product formula, reduced modulo the ring relations."""
    space = space_of(name)
    n = space.n
    red = _Reducer(space)
    ps, us = red.ps, red.us
    vs = [sum(c * p for c, p in zip(row, ps)) for row in space.l]
    lam_val = lam if mode == "symbolic" else 0
    out = {}
    for d in box_exponents(box):
        term = sp.Integer(1)
        for u, row in zip(us, space.m):
            k = sum(a * b for a, b in zip(row, d))
            if k >= 0:
                for nu in range(1, k + 1):
                    term = red(term * _nilpotent_inverse(u, nu, n))
            else:
                term = red(term * sp.Mul(*[u + nu * h for nu in range(k + 1, 1)]))
        for v, row in zip(vs, space.l):
            k = sum(a * b for a, b in zip(row, d))
            term = red(term * sp.Mul(*[v + nu * h - lam_val for nu in range(1, k + 1)]))
        out[d] = term
    return ps, red, out


@pytest.mark.parametrize("name,box,mode", [("p1", (4,), "zero"), ("p2", (3,), "zero"),
                                           ("f1", (2, 2), "zero"),
                                           ("f1_super", (2, 3), "zero"),
                                           ("f1_super", (1, 2), "symbolic")])
def test_j_function_matches_hypergeometric_sum(name, box, mode):
    fm = model(name, mode)
    prefactor, j = fm.j_function(box)
    assert prefactor.startswith("exp((p1*log(q1)")
    ps, red, oracle = _hypergeometric_j(name, box, mode)
    for d in box_exponents(box):
        v = j.get(d, (fm.ring.dim,))
        ours = sum((laurent_sym(v[i]) * sp.Mul(*[p**e for p, e in zip(ps, m)])
                    for i, m in enumerate(fm.ring.basis)), sp.Integer(0))
        assert red(ours - oracle[d]) == 0, d


# -- closed hypergeometric form of S^{-1} for the superspace ------------------------------------------

def _harmonic(n):
    return sum((sp.Rational(1, i) for i in range(1, n + 1)), sp.Integer(0))


def _b(n):
    return sum((sp.Rational(1, i * j) for i in range(1, n + 1) for j in range(i + 1, n + 1)),
               sp.Integer(0))


def _c(n):
    return sum((sp.Rational(1, i * i) for i in range(1, n + 1)), sp.Integer(0))


def _i_functions(box):
    A, B, C = _harmonic, _b, _c
    I = [sp.Integer(0)] * 4
    for d1 in range(box[0] + 1):
        for d2 in range(box[1] + 1):
            mon = x**d1 * y**d2 / h**d1
            if d2 >= d1:
                k = sp.factorial(2 * d2) / (sp.factorial(d1)**2 * sp.factorial(d2)
                                            * sp.factorial(d2 - d1))
                D = (4 * B(2 * d2) + B(d2) + C(d2) - B(d2 - d1) - C(d2 - d1)
                     - 4 * A(d1) * A(2 * d2) - 2 * A(2 * d2) * A(d2) + 2 * A(d1) * A(d2)
                     + 2 * A(d1) * A(d2 - d1))
                I[0] += k * mon
                I[1] += k * (A(d2 - d1) - 2 * A(d1)) * mon
                I[2] += k * (2 * A(2 * d2) - A(d2) - A(d2 - d1)) * mon
                I[3] += k * D * mon
            else:
                l = (sp.factorial(2 * d2) * sp.factorial(d1 - d2 - 1)
                     / (sp.factorial(d1)**2 * sp.factorial(d2)))
                s = (-1)**(d1 - d2)
                I[1] += l * s * mon
                I[2] -= l * s * mon
                I[3] += l * (2 * A(d1) - A(d1 - d2 - 1)) * s * mon
    return [sp.expand(v) for v in I]


def test_superspace_s_inverse_closed_form():
    box = (3, 4)
    art = pipeline("f1_super", box, until="sinv")
    I0, I1, I2, I3 = _i_functions(box)

    def dx(f):
        return sp.expand(x * sp.diff(f, x))

    def dy(f):
        return sp.expand(y * sp.diff(f, y))

    want = [
        [I0, h * dx(I0), h * dy(I0), h**2 * dx(dy(I0))],
        [I1 / h, I0 + dx(I1), dy(I1), h * (dy(I0) + dx(dy(I1)))],
        [I2 / h, dx(I2), I0 + dy(I2), h * (dx(I0) + dx(dy(I2)))],
        [I3 / h**2, (I2 + dx(I3)) / h, (dy(I3) + I1 + I2) / h,
         I0 + dx(I1) + dx(I2) + dy(I2) + dx(dy(I3))],
    ]
    ours = matrix_sym(art.sinv)
    for i in range(4):
        for j in range(4):
            assert sp.expand(ours[i][j] - want[i][j]) == 0, (i, j)


# -- intertwining, grading, Picard-Fuchs ------------------------------------------------------

@pytest.mark.parametrize("name,box", [("p1", (3,)), ("f1", (2, 2)), ("f1_super", (2, 3))])
def test_xi_intertwines_p_with_the_derivative(name, box):
    fm = model(name)
    for j in range(fm.ring.dim):
        base = fm.basis_poly(j)
        xi_t = fm.xi(FloerCycle(base, (0,) * fm.r), box)
        for a in range(fm.r):
            lhs = fm.xi(FloerCycle(PPoly.P(fm.r, a + 1) * base, (0,) * fm.r), box)
            rhs = xi_t.theta(a) * HBAR + (fm.ring.cup_matrix(a + 1) @ xi_t)
            assert lhs == rhs


@pytest.mark.parametrize("name,box", [("p1", (3,)), ("p2", (3,)), ("f1", (2, 2)),
                                      ("f1_super", (2, 3))])
def test_s_inverse_grading(name, box):
    art = pipeline(name, box, until="sinv")
    deg = art.ring.degrees
    assert is_homogeneous(art.sinv, deg, deg, art.space.deg_q) == []
    assert art.sinv[(0,) * len(box)] is not None


def test_picard_fuchs_strings_and_checks():
    f1 = model("f1")
    rel1 = f1.picard_fuchs_relation((1, 0))
    assert str(rel1[0]) == "(-P1 + P2 + h)*Q^(1, 0)*Delta"
    assert str(rel1[1]) == "P1^2*Delta"
    assert f1.verify_pf(rel1, (3, 3))
    rel2 = f1.picard_fuchs_relation((0, 1))
    assert str(rel2[0]) == "Q^(0, 1)*Delta"
    assert str(rel2[1]) == "(-P1*P2 + P2^2)*Delta"
    assert f1.verify_pf(rel2, (3, 3))
    sup = model("f1_super")
    left, right = sup.picard_fuchs_relation((0, 1))
    assert left.poly == PPoly.P(2, 2) * 2 * (PPoly.P(2, 2) * 2 - PPoly.hbar(2))
    assert right.poly == PPoly.P(2, 2) * (PPoly.P(2, 2) - PPoly.P(2, 1))
    assert sup.verify_pf((left, right), (3, 4))
    p1 = model("p1")
    rel = p1.picard_fuchs_relation((1,))
    assert str(rel[0]) == "Q^(1)*Delta" and str(rel[1]) == "P1^2*Delta"
    assert p1.verify_pf(rel, (5,))


def test_corrupted_relation_fails():
    f1 = model("f1")
    left, right = f1.picard_fuchs_relation((1, 0))
    broken = FloerCycle(PPoly.P(2, 2) - PPoly.P(2, 1), left.shift)
    check = f1.verify_pf((broken, right), (3, 3))
    assert not check and check.first_mismatch is not None


# -- pairing -------------------------------------------------------------------------------------

def test_pairing_examples():
    p1 = model("p1")
    delta = FloerCycle(PPoly.const(1), (0,))
    assert not p1.floer_pairing(delta, delta, (3,))
    f1 = model("f1")
    one = FloerCycle(PPoly.const(2), (0, 0))
    top = FloerCycle(PPoly.P(2, 1) * PPoly.P(2, 2), (0, 0))
    val = f1.floer_pairing(one, top, (2, 2))
    assert val[(0, 0)] == 1


@pytest.mark.parametrize("name,box,mode", [("p1", (3,), "zero"), ("f1", (2, 2), "zero"),
                                           ("f1_super", (2, 3), "zero"),
                                           ("f1_super", (1, 2), "symbolic")])
def test_frame_pairing_polynomial_with_poincare_constant(name, box, mode):
    art = pipeline(name, box, mode, until="sinv")
    g = art.pairing
    frame = art.floer.frame_pairing(art.sinv, g)
    const = frame[(0,) * len(box)]
    for (i, j), v in np.ndenumerate(const):
        assert v == g[i, j]


def test_threaded_s_inverse_matches_serial(monkeypatch):
    serial = pipeline("f1_super", (2, 3), until="sinv").sinv
    monkeypatch.setenv("QDM_THREADS", "3")
    fm = model("f1_super")
    assert fm.s_inverse_matrix((2, 3)) == serial
