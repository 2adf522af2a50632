import random
from fractions import Fraction

import pytest
from hypothesis import given

from formalstar import formality as fm
from formalstar.coalgebra import exp_with_unit
from formalstar.exact import HbarDivisionError, HSeries, Poly
from formalstar.graphs import MissingWeightError, WeightTable, default_table
from formalstar.polydiff import (PolyDiffOp, assoc_defect, evaluate_assoc, gerstenhaber_series, hkr_inclusion,
                                 moyal)
from formalstar.polyvector import PolyVec, as_series, hamiltonian, random_polyvec, schouten, schouten_series

from conftest import GAMMAS, corpus_fg, corpus_g, corpus_Y, d, polys, so3, vec, x


def setup(name="symplectic", order=2):
    return fm.FormalitySetup(GAMMAS[name](), order)


def fseries(*coeffs, dim=2):
    return HSeries([c if isinstance(c, Poly) else Poly.const(dim, c) for c in coeffs])


# --- Taylor coefficients ---------------------------------------------------------

def test_first_coefficient_is_hkr():
    S = setup("x1-symplectic")
    for xi in (d(0, 1, coeff=x(0) ** 2), vec(x(1), 1), PolyVec.function(x(0) * x(1))):
        assert S.U([xi]) == hkr_inclusion(xi)


def test_second_coefficient_on_constant_vector_fields():
    assert not setup().U([vec(1, 2), vec(0, 3)])


def test_inadmissible_arities():
    with pytest.raises(fm.InadmissibleError):
        setup().U([PolyVec.function(x(0)), vec(1, 0)])


@pytest.mark.parametrize("seed", range(6))
def test_taylor_coefficients_are_graded_symmetric(seed):
    rng = random.Random(seed)
    S = setup("x1-symplectic")
    X, Y = random_polyvec(rng, 2, 1, max_degree=1), random_polyvec(rng, 2, 1, max_degree=1)
    f = random_polyvec(rng, 2, 0)
    P = d(0, 1, coeff=x(0))
    assert S.U([X, Y]) == -S.U([Y, X])
    assert S.U([f, P]) == S.U([P, f])
    assert S.U([X, P]) == S.U([P, X])


# --- star products --------------------------------------------------------------

def test_star_examples():
    star = fm.star_product(setup())
    assert star(x(0), x(1)) == fseries(x(0) * x(1), Fraction(1, 2), 0)
    assert star(x(1), x(0)) == fseries(x(0) * x(1), Fraction(-1, 2), 0)
    assert star(x(0) ** 2, x(1) ** 2) == fseries(x(0) ** 2 * x(1) ** 2, 2 * x(0) * x(1), Fraction(1, 2))
    assert star == moyal(d(0, 1), 2)


@given(polys())
def test_unit(f):
    for name in ("symplectic", "x1-symplectic"):
        star = fm.star_product(setup(name))
        one = Poly.one(2)
        assert star(f, one) == fseries(f, 0, 0) == star(one, f)


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_associativity(name):
    star = fm.star_product(setup(name))
    assert assoc_defect(star).is_zero()
    dim = star.dim
    rng = random.Random(7)
    for _ in range(5):
        f, g, h = (random_polyvec(rng, dim, 0, max_degree=3).as_function() for _ in range(3))
        assert evaluate_assoc(star, f, g, h).is_zero()


def test_formal_gamma_associativity():
    gam = HSeries([d(0, 1, coeff=x(0)), d(0, 1, coeff=x(1) ** 2), d(0, 1)])
    star = fm.star_product(fm.FormalitySetup(gam, 2))
    assert assoc_defect(star).is_zero()


def test_rejects_non_poisson():
    g = d(0, 1, dim=4) + d(2, 3, dim=4, coeff=Poly.var(4, 0))
    with pytest.raises(fm.NotPoissonError):
        fm.FormalitySetup(g, 2)


def test_higher_order_needs_missing_weights():
    with pytest.raises(MissingWeightError):
        fm.star_product(setup("x1-symplectic", order=3))


def test_perturbed_weight_breaks_associativity():
    t = WeightTable()
    for g, e in default_table():
        value = -e.value if (g.n, g.m, e.value) == (2, 2, Fraction(-1, 12)) else e.value
        t.add(g, value, e.provenance)
    star = fm.star_product(fm.FormalitySetup(so3(), 2, table=t))
    assert assoc_defect(star).lowest_nonzero() == 2


# --- tangent map, inverse, sharp product ---------------------------------------------

def test_phi_examples():
    S = setup()
    assert fm.phi_function(S, x(0)) == fseries(x(0), 0, 0)
    assert fm.phi(S, vec(0, 0)).is_zero()
    for name in GAMMAS:
        S = setup(name)
        one = Poly.one(S.dim)
        assert fm.phi_function(S, one) == HSeries([one, one * 0, one * 0])


def test_phi_rejects_bivector_arity_three():
    with pytest.raises(ValueError):
        fm.phi(setup(), PolyVec.zero(3, 3).__class__.basis(3, (0, 1, 2)))


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_phi_inverse_round_trip(name):
    S = setup(name)
    rng = random.Random(2)
    for _ in range(4):
        f = random_polyvec(rng, S.dim, 0, max_degree=3).as_function()
        assert fm.phi_inverse(S, fm.phi_function(S, f)) == fseries(f, 0, 0, dim=S.dim)
        u = HSeries([f, f * 2, f * f])
        assert fm.phi_function(S, fm.phi_inverse(S, u)) == u


def test_phi_inverse_constant_gamma_linear_input():
    u = fseries(x(0) + 2 * x(1), 0, 0)
    assert fm.phi_inverse(setup(), u) == u


def test_sharp_example():
    S = setup(order=1)
    assert fm.sharp_product(S, x(0), x(1)) == fseries(x(0) * x(1), Fraction(1, 2))


# --- second derivative and curvature ----------------------------------------------------

def test_psi_examples():
    S = setup()
    assert fm.psi(S, vec(1, 0), vec(2, 1)).is_zero()
    for name in GAMMAS:
        S = setup(name)
        for Y in corpus_Y(S.dim):
            assert fm.psi(S, Y, Y, strict=False).is_zero()
    S = setup()
    H = lambda f: hamiltonian(S.gamma, PolyVec.function(f))
    assert fm.psi(S, H(x(0)), H(x(1))).is_zero()


def test_psi_symmetry_function_bivector():
    S = setup("x1-symplectic")
    f = PolyVec.function(x(0) ** 2 * x(1))
    P = d(0, 1, coeff=x(1) ** 2)
    assert fm.psi(S, f, P, strict=False) == fm.psi(S, P, f, strict=False)


def test_psi_inadmissible():
    with pytest.raises(fm.InadmissibleError):
        fm.psi(setup(), PolyVec.function(x(0)), vec(1, 0))


def test_curvature_examples():
    S = setup()
    assert fm.curvature(S, vec(1, 0), x(0) + x(1)).is_zero()
    S = setup("so3")
    f = Poly.var(3, 0) * Poly.var(3, 1)
    Hf = hamiltonian(S.gamma, PolyVec.function(f))
    g = Poly.var(3, 2)
    Hg = hamiltonian(S.gamma, PolyVec.function(g))
    lhs = fm.curvature(S, Hf, g, strict=False)
    rhs = fm.psi(S, Hg, Hf, strict=False).map(PolyDiffOp.as_function)
    a, b = fm.align(lhs, rhs)
    assert a == b


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_curvature_matches_tangent_form(name):
    S = setup(name)
    for Y in corpus_Y(S.dim):
        for g in corpus_g(S.dim):
            a, b = fm.align(fm.curvature(S, Y, g, strict=False), fm.curvature_from_tangent(S, Y, g, strict=False))
            assert a == b


def test_curvature_is_bilinear():
    S = setup("x1-symplectic")
    Y1, Y2 = vec(x(0), 1), vec(x(1), x(0))
    g1, g2 = x(0) * x(1), x(1) ** 2
    R = lambda Y, g: fm.curvature(S, Y, g, strict=False)
    assert R(Y1 + Y2, g1) == R(Y1, g1) + R(Y2, g1)
    assert R(Y1, g1 + g2 * 3) == R(Y1, g1) + R(Y1, g2).scale(3)


# --- coderivation identity in the polyvector coalgebra -------------------------------------

def test_hamiltonian_coderivation_examples():
    S = setup("x1-symplectic", order=3)
    zero_v, zero_f = PolyVec.zero(2, 1), Poly.zero(2)
    assert not fm.check_hamiltonian_coderivation(S, zero_v, zero_f)
    B = fm.polyvector_basis()
    Q = fm.schouten_coderivation(2, B)
    from formalstar.coalgebra import coderivation_apply, exp_grouplike

    Y = vec(x(1) ** 2, x(0))
    pgam = fm.primitive_of(B, S.gamma, 3, 1)
    lhs = coderivation_apply(Q, exp_grouplike(pgam + fm.primitive_of(B, as_series(Y, 3), 3, 1)))
    rhs = fm.primitive_of(B, schouten_series(as_series(Y, 3), S.gamma), 3, 2) * exp_with_unit(pgam)
    assert lhs == rhs


@pytest.mark.parametrize("seed", range(5))
def test_hamiltonian_coderivation_random(seed):
    rng = random.Random(seed)
    gam = fm.random_poisson(rng, 2, order=1)
    S = fm.FormalitySetup(gam, 3)
    Y = random_polyvec(rng, 2, 1)
    g = random_polyvec(rng, 2, 0).as_function()
    assert not fm.check_hamiltonian_coderivation(S, Y, g)


def test_wrong_q2_sign_is_detected():
    # flipping the sign rule of the quadratic coefficient must break the identity
    S = setup("x1-symplectic", order=3)
    B = fm.polyvector_basis()
    good = fm.schouten_coderivation(2, B)
    from formalstar.coalgebra import TaylorCoeffs, coderivation_apply, exp_grouplike

    flipped = TaylorCoeffs({2: lambda w: {k: -c for k, c in good.coeffs[2](w).items()}}, B, degree=1)
    g = fm.primitive_of(B, as_series(PolyVec.function(x(0) * x(1)), 3), 3, 1)
    pgam = fm.primitive_of(B, S.gamma, 3, 1)
    e = exp_grouplike(pgam + g)
    Hg = fm.primitive_of(B, hamiltonian(S.gamma, PolyVec.function(x(0) * x(1))), 3, 2)
    assert coderivation_apply(good, e) == Hg * exp_with_unit(pgam + g)
    assert coderivation_apply(flipped, e) != Hg * exp_with_unit(pgam + g)


# --- tangent identities ----------------------------------------------------------------

def test_tangent_examples():
    S = setup()
    res = fm.check_tangent_identities(S, vec(1, 0), Poly.const(2, 5))
    assert res["inner"].ok
    # x1 d1 - x2 d2 preserves the constant bivector, so Phi(Y) is a derivation
    Y = vec(x(0), -x(1))
    assert not schouten(S.gamma[0], Y)
    pY = fm.phi(S, Y)
    star = fm.star_product(S).series
    assert gerstenhaber_series(*fm.align(star, pY)).is_zero()
    # constant field and linear function: both sides of the bracket identity are Y(g)
    Yc, g = vec(2, 3), x(0) - x(1)
    br = gerstenhaber_series(*fm.align(fm.phi(S, Yc), fm.phi(S, g)))
    assert br[0].as_function() == Yc.apply_to(g) and not br[1] and not br[2]
    assert fm.check_tangent_identities(S, Yc, g)["bracket"].ok


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_tangent_identities_on_corpus(name):
    S = setup(name)
    for Y in corpus_Y(S.dim):
        for g in corpus_g(S.dim):
            for key, res in fm.check_tangent_identities(S, Y, g).items():
                assert res.ok and res.complete, (key, Y, g)


def test_non_affine_field_is_verified_partially():
    S = setup("x1-symplectic")
    res = fm.check_tangent_identities(S, vec(x(1) ** 2, x(0) ** 2), x(0) ** 3 * x(1))
    assert res["inner"].ok and res["inner"].complete
    assert res["derivation"].ok and res["derivation"].verified == 1
    assert res["bracket"].ok and not res["bracket"].complete


def test_wrong_correction_sign_is_detected():
    S = setup()
    Y = vec(x(0), 0)
    star = fm.star_product(S).series
    pY = fm.phi(S, Y)
    rhs = fm._shift_partial(fm.phi(S, schouten_series(S.gamma, as_series(Y, 2)), strict=False))
    lhs, rhs = fm.align(gerstenhaber_series(*fm.align(star, pY)), rhs)
    assert lhs == rhs and not lhs.is_zero()
    assert lhs != -rhs


# --- deformed bracket ---------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_deformed_bracket_on_corpus(name):
    S = setup(name)
    for f, g in corpus_fg(S.dim):
        res = fm.check_deformed_bracket(S, f, g)
        assert res["main"].ok and res["main"].complete
        assert res["sharp"].ok and res["sharp"].complete


def test_deformed_bracket_same_function():
    res = fm.check_deformed_bracket(setup("so3"), Poly.var(3, 0) ** 2, Poly.var(3, 0) ** 2)
    assert res["main"].ok


def test_moyal_case_both_sides_vanish():
    S = setup()
    H = lambda f: hamiltonian(S.gamma, PolyVec.function(f))
    assert fm.psi(S, H(x(0)), H(x(1))).is_zero()
    assert fm.check_deformed_bracket(S, x(0), x(1))["main"].ok


def test_division_by_h_is_strict():
    with pytest.raises(HbarDivisionError):
        fseries(1, 0, 0).divide_by_h()


# --- gauge action -----------------------------------------------------------------------

def test_gauge_star_examples():
    S = setup()
    assert fm.gauge_star(S, vec(0, 0)) == fm.star_product(S)
    assert fm.gauge_star(S, vec(x(0), -x(1))) == fm.star_product(S)
    expected = fm.star_product(S.with_gamma(HSeries([d(0, 1), -d(0, 1), d(0, 1) * Fraction(1, 2)])))
    assert fm.gauge_star(S, vec(x(0), 0)) == expected


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_gauge_star_matches_flow(name):
    S = setup(name)
    for Y in corpus_Y(S.dim):
        assert fm.check_gauge_star(S, Y).ok


@pytest.mark.parametrize("name", sorted(GAMMAS))
def test_gauge_intertwining_on_corpus(name):
    S = setup(name)
    for Y in corpus_Y(S.dim) + [PolyVec.zero(S.dim, 1)]:
        res = fm.check_gauge_intertwining(S, Y)
        assert res["coalgebra"].ok and res["coalgebra"].complete
        assert res["reduction"].ok


def test_gauge_intertwining_random_so3():
    rng = random.Random(9)
    S = setup("so3")
    for _ in range(3):
        Y = random_polyvec(rng, 3, 1, max_degree=1)
        res = fm.check_gauge_intertwining(S, Y)
        assert res["coalgebra"].ok and res["coalgebra"].complete
