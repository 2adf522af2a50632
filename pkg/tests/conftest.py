import itertools
import sys
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from formalstar.exact import Poly
from formalstar.polydiff import PolyDiffOp
from formalstar.polyvector import PolyVec, sort_sign

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def x(i, dim=2):
    """Coordinate x_{i+1} in dimension dim."""
    return Poly.var(dim, i)


def d(*idx, dim=2, coeff=1):
    """Basis polyvector d_{i1+1} ^ ... with a coefficient."""
    return PolyVec.basis(dim, idx, coeff)


def vec(*coeffs):
    dim = len(coeffs)
    return PolyVec.vector([c if isinstance(c, Poly) else Poly.const(dim, c) for c in coeffs])


def so3():
    return PolyVec(3, 2, {(0, 1): x(2, 3), (1, 2): x(0, 3), (2, 0): x(1, 3)})


GAMMAS = {
    "symplectic": lambda: d(0, 1),
    "x1-symplectic": lambda: d(0, 1, coeff=x(0)),
    "so3": so3,
}


def corpus_Y(dim):
    z = Poly.zero(dim)
    return [PolyVec.vector([Poly.one(dim)] + [z] * (dim - 1)),
            PolyVec.vector([x(0, dim)] + [z] * (dim - 1)),
            PolyVec.vector([x(1, dim)] + [z] * (dim - 1))]


def corpus_g(dim):
    return [x(0, dim), x(0, dim) * x(1, dim)]


def corpus_fg(dim):
    return [(x(0, dim), x(1, dim)), (x(0, dim) ** 2, x(1, dim))]


def alternate(D: PolyDiffOp) -> PolyDiffOp:
    """Antisymmetrize an operator over its slots (test oracle helper)."""
    k = D.arity
    out = PolyDiffOp.zero(D.dim, k)
    for perm in itertools.permutations(range(k)):
        s, _ = sort_sign(list(perm))
        terms = {}
        for key, p in D.items():
            nk = tuple(key[perm[i]] for i in range(k))
            terms[nk] = terms.get(nk, p * 0) + p
        out = out + PolyDiffOp(D.dim, k, terms) * Fraction(s, factorial(k))
    return out


# --- hypothesis strategies ---------------------------------------------------

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, dim=2, max_degree=2, max_terms=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.lists(st.integers(0, max_degree), min_size=dim, max_size=dim)))
        if sum(exps) <= max_degree + 1:
            terms[exps] = terms.get(exps, Fraction(0)) + draw(coefficients)
    return Poly(dim, terms)


@st.composite
def polyvecs(draw, dim=3, arity=None, max_degree=2):
    if arity is None:
        arity = draw(st.integers(0, min(dim, 3)))
    keys = list(itertools.combinations(range(dim), arity))
    comps = {}
    for key in draw(st.lists(st.sampled_from(keys), max_size=2)):
        comps[key] = draw(polys(dim, max_degree))
    return PolyVec(dim, arity, comps)


@st.composite
def operators(draw, dim=2, arity=None, max_order=2):
    if arity is None:
        arity = draw(st.integers(0, 3))
    terms = {}
    for _ in range(draw(st.integers(0, 2))):
        key = tuple(tuple(draw(st.lists(st.integers(0, max_order), min_size=dim, max_size=dim)))
                    for _ in range(arity))
        terms[key] = draw(polys(dim, 2, 2))
    return PolyDiffOp(dim, arity, terms)


@pytest.fixture(params=sorted(GAMMAS))
def gamma_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
