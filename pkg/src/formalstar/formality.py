"""Graph-sum formality morphism on R^d and the identities built on it.

``U_n(xi_1, ..., xi_n) = sum_Gamma W_Gamma B_Gamma(xi_1, ..., xi_n)`` over the
admissible graphs of :mod:`formalstar.graphs`.  From it:

    star     = m + sum_k h^k/k! U_k(gamma^k)
    Phi(xi)  = sum_k h^k/k! U_{k+1}(xi, gamma^k)        (tangent map)
    Psi(Y,Z) = sum_k h^k/k! U_{k+2}(Y, Z, gamma^k)      (second derivative)

with gamma = gamma_0 + h gamma_1 + ...  Graph operators are evaluated before
weights are looked up, so a graph whose operator vanishes never needs a
weight.  When a weight is missing, the non-strict entry points return a
series truncated just below the first order that needed it; checkers then
report the orders they could verify.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from math import factorial
from typing import Sequence

from .coalgebra import (CoalgElem, GradedBasis, TaylorCoeffs, coderivation_apply, exp_grouplike,
                        exp_with_unit, morphism_apply)
from .exact import HSeries, Poly
from .graphs import Graph, MissingWeightError, WeightTable, default_table, enumerate_graphs, graph_operator
from .polydiff import (PolyDiffOp, StarProduct, elementary_operators, gerstenhaber_series,
                       operator_series, series_apply)
from .polyvector import (PolyVec, as_series, elementary_polyvectors, gauge_act, hamiltonian, poisson_bracket,
                         poisson_defect, schouten, schouten_series)


class NotPoissonError(ValueError):
    """The bivector series fails the Maurer-Cartan equation [gamma, gamma] = 0."""


class InadmissibleError(ValueError):
    """Argument arities give a negative number of ground vertices."""


@lru_cache(maxsize=None)
def _graphs(arities: tuple[int, ...]) -> tuple[Graph, ...]:
    return tuple(enumerate_graphs(arities))


@dataclass
class FormalitySetup:
    """A formal Poisson bivector on R^d with a truncation order and weight source."""

    gamma: HSeries
    order: int = 2
    table: WeightTable = field(default_factory=default_table)
    check: bool = True
    _cache: dict = field(default_factory=dict, repr=False)
    provenance: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        if isinstance(self.gamma, PolyVec):
            self.gamma = as_series(self.gamma, self.order)
        elif isinstance(self.gamma, (list, tuple)):
            zero = PolyVec.zero(self.gamma[0].dim, 2)
            self.gamma = HSeries.from_terms(dict(enumerate(self.gamma)), self.order, zero)
        else:
            self.gamma = _fit(self.gamma, self.order)
        if any(c.arity != 2 for c in self.gamma):
            raise ValueError("gamma must be a series of bivectors")
        if self.check:
            d = poisson_defect(self.gamma)
            if not d.is_zero():
                raise NotPoissonError(f"[gamma, gamma] is nonzero at order h^{d.lowest_nonzero()}")

    @property
    def dim(self) -> int:
        return self.gamma[0].dim

    def with_gamma(self, gamma: HSeries) -> "FormalitySetup":
        return FormalitySetup(gamma, self.order, self.table, self.check)

    def with_order(self, order: int) -> "FormalitySetup":
        return FormalitySetup(self.gamma, order, self.table, self.check)

    # --- U_n -----------------------------------------------------------
    def U(self, args: Sequence[PolyVec]) -> PolyDiffOp:
        """One Taylor coefficient U_n(args) = sum over graphs of W * B."""
        args = tuple(args)
        hit = self._cache.get(args)
        if hit is not None:
            return hit
        arities = tuple(a.arity for a in args)
        m = sum(arities) - 2 * len(args) + 2
        if m < 0:
            raise InadmissibleError(f"arities {arities} give {m} ground vertices")
        out = PolyDiffOp.zero(self.dim, m)
        if all(args):
            for g in _graphs(arities):
                B = graph_operator(g, args)
                if not B:
                    continue
                entry = self.table.lookup(g)
                self.provenance.add(entry.provenance)
                if entry.value:
                    out = out + B * entry.value
        self._cache[args] = out
        return out


def _fit(s: HSeries, order: int) -> HSeries:
    if s.order == order:
        return s
    if s.order > order:
        return s.truncate(order)
    zero = s[0] * 0
    return HSeries(list(s.coeffs) + [zero] * (order - s.order))


def align(*series: HSeries) -> list[HSeries]:
    """Truncate to the smallest order among the arguments."""
    n = min(s.order for s in series)
    return [s.truncate(n) for s in series]


def _as_pv_series(x, order: int) -> HSeries:
    if isinstance(x, Poly):
        x = PolyVec.function(x)
    if isinstance(x, HSeries) and isinstance(x[0], Poly):
        x = x.map(PolyVec.function)
    return _fit(as_series(x, order), order)


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def expand(setup: FormalitySetup, fixed: Sequence, order: int | None = None,
           strict: bool = True, gamma: HSeries | None = None) -> HSeries:
    """sum_k h^k/k! U_{len(fixed)+k}(fixed..., gamma^k), truncated.

    ``fixed`` entries are polyvectors or polyvector series.  In non-strict
    mode a missing weight truncates the result below the order needing it.
    """
    N = setup.order if order is None else order
    gam = _fit(setup.gamma if gamma is None else gamma, N)
    fx = [_as_pv_series(x, N) for x in fixed]
    arities = [s[0].arity for s in fx]
    m = sum(arities) - 2 * len(fx) + 2
    if m < 0:
        raise InadmissibleError(f"arities {arities} give {m} ground vertices")
    dim = gam[0].dim
    coeffs = []
    for t in range(N + 1):
        acc = PolyDiffOp.zero(dim, m)
        try:
            for k in range(t + 1):
                scale = Fraction(1, factorial(k))
                for split in _compositions(t - k, len(fx) + k):
                    a, j = split[: len(fx)], split[len(fx):]
                    args = [fx[i][a[i]] for i in range(len(fx))] + [gam[x] for x in j]
                    if not all(args):
                        continue
                    acc = acc + setup.U(args) * scale
        except MissingWeightError:
            if strict or t == 0:
                raise
            break
        coeffs.append(acc)
    return HSeries(coeffs)


# --- assembled objects ------------------------------------------------------

def taylor_U(setup: FormalitySetup, args: Sequence[PolyVec]) -> PolyDiffOp:
    return setup.U(args)


def star_product(setup: FormalitySetup) -> StarProduct:
    """m + sum_{k>=1} h^k/k! U_k(gamma^k) through the setup order."""
    N = setup.order
    d = setup.dim
    coeffs = [PolyDiffOp.multiplication(d)]
    for t in range(1, N + 1):
        acc = PolyDiffOp.zero(d, 2)
        for k in range(1, t + 1):
            scale = Fraction(1, factorial(k))
            for j in _compositions(t - k, k):
                args = [setup.gamma[x] for x in j]
                if all(args):
                    acc = acc + setup.U(args) * scale
        coeffs.append(acc)
    return StarProduct(HSeries(coeffs))


def phi(setup: FormalitySetup, xi, strict: bool = True) -> HSeries:
    """Tangent map at h*gamma on a function or vector field (or series of them)."""
    s = _as_pv_series(xi, setup.order)
    if s[0].arity not in (0, 1, 2):
        raise ValueError("tangent map is evaluated on functions, vector fields or bivectors")
    return expand(setup, [s], strict=strict)


def phi_function(setup: FormalitySetup, f, strict: bool = True) -> HSeries:
    """Phi on a function series, returned as a series of polynomials."""
    return phi(setup, f, strict).map(PolyDiffOp.as_function)


def phi_inverse(setup: FormalitySetup, u: HSeries | Poly, strict: bool = True) -> HSeries:
    """Order-by-order inverse of Phi on function series."""
    N = setup.order
    if isinstance(u, Poly):
        u = HSeries.constant(u, N, Poly.zero(u.dim))
    u = _fit(u, N)
    v: list[Poly] = []
    images: list[HSeries] = []
    for n in range(N + 1):
        c = u[n]
        for a in range(n):
            if n - a > images[a].order:
                return HSeries(v)
            c = c - images[a][n - a]
        v.append(c)
        images.append(expand(setup, [PolyVec.function(c)], order=N - n, strict=strict)
                      .map(PolyDiffOp.as_function))
    return HSeries(v)


def psi(setup: FormalitySetup, Y, Z, strict: bool = True) -> HSeries:
    """Second derivative sum_k h^k/k! U_{k+2}(Y, Z, gamma^k)."""
    y, z = _as_pv_series(Y, setup.order), _as_pv_series(Z, setup.order)
    if y[0].arity + z[0].arity < 2:
        raise InadmissibleError("second derivative needs total arity at least 2")
    return expand(setup, [y, z], strict=strict)


def sharp_product(setup: FormalitySetup, f, g, strict: bool = True) -> HSeries:
    """f # g = Phi^{-1}(Phi(f) * Phi(g))."""
    star = star_product(setup)
    pf, pg = phi_function(setup, f, strict), phi_function(setup, g, strict)
    pf, pg = align(pf, pg)
    prod = series_apply(_fit_op(star.series, pf.order), pf, pg)
    return phi_inverse(setup.with_order(prod.order), prod, strict)


def _fit_op(s: HSeries, order: int) -> HSeries:
    return s.truncate(order) if s.order > order else s


def curvature(setup: FormalitySetup, Y, g, strict: bool = True) -> HSeries:
    """R(Y, g) = Psi(H_g, Y) - Psi([gamma, Y], g) as a function series."""
    N = setup.order
    Ys, gs = _as_pv_series(Y, N), _as_pv_series(g, N)
    if Ys[0].arity != 1 or gs[0].arity != 0:
        raise ValueError("curvature takes a vector field and a function")
    Hg = hamiltonian(setup.gamma, gs)
    gY = schouten_series(setup.gamma, Ys)
    a, b = align(psi(setup, Hg, Ys, strict), psi(setup, gY, gs, strict))
    return (a - b).map(PolyDiffOp.as_function)


def curvature_from_tangent(setup: FormalitySetup, Y, g, strict: bool = True) -> HSeries:
    """(1/h)([Phi(Y), Phi(g)] - Phi([Y, g])), the value curvature should equal."""
    N = setup.order
    Ys, gs = _as_pv_series(Y, N), _as_pv_series(g, N)
    pY, pg = align(phi(setup, Ys, strict), phi(setup, gs, strict))
    br = gerstenhaber_series(pY, pg)
    Yg = phi(setup, schouten_series(Ys, gs), strict)
    br, Yg = align(br, Yg)
    return (br - Yg).divide_by_h().map(PolyDiffOp.as_function)


# --- identity checkers ------------------------------------------------------

@dataclass
class Defect:
    """An identity LHS - RHS, order by order, through ``verified`` (None if nothing)."""

    name: str
    series: HSeries | None
    requested: int
    note: str = ""

    @property
    def verified(self) -> int | None:
        return None if self.series is None else self.series.order

    @property
    def ok(self) -> bool:
        return self.series is not None and self.series.is_zero()

    @property
    def complete(self) -> bool:
        return self.verified is not None and self.verified >= self.requested

    def lowest_nonzero(self) -> int | None:
        return None if self.series is None else self.series.lowest_nonzero()


def check_tangent_identities(setup: FormalitySetup, Y, g, strict: bool = False) -> dict[str, Defect]:
    """The three compatibility identities of the tangent map with the star product.

    derivation: [*, Phi(Y)] - h Phi([gamma, Y])
    inner:      [*, Phi(g)] - h Phi(H_g)
    bracket:    [Phi(Y), Phi(g)] - Phi([Y, g]) - h (Psi(H_g, Y) - Psi([gamma, Y], g))
    """
    N = setup.order
    Ys, gs = _as_pv_series(Y, N), _as_pv_series(g, N)
    star = star_product(setup).series
    gY = schouten_series(setup.gamma, Ys)
    Hg = hamiltonian(setup.gamma, gs)
    out = {}

    def guard(name, fn):
        try:
            out[name] = Defect(name, fn(), N)
        except MissingWeightError as exc:
            out[name] = Defect(name, None, N, note=str(exc))

    def first():
        pY = phi(setup, Ys, strict)
        rhs = _shift_partial(phi(setup, gY, strict))
        lhs = gerstenhaber_series(*align(star, pY))
        lhs, rhs = align(lhs, rhs)
        return lhs - rhs

    def second():
        pg = phi(setup, gs, strict)
        rhs = _shift_partial(phi(setup, Hg, strict))
        lhs = gerstenhaber_series(*align(star, pg))
        lhs, rhs = align(lhs, rhs)
        return lhs - rhs

    def third():
        pY, pg = align(phi(setup, Ys, strict), phi(setup, gs, strict))
        lhs = gerstenhaber_series(pY, pg)
        corr = _shift_partial(curvature(setup, Ys, gs, strict).map(PolyDiffOp.function))
        a, b, c = align(lhs, phi(setup, schouten_series(Ys, gs), strict), corr)
        return a - b - c

    guard("derivation", first)
    guard("inner", second)
    guard("bracket", third)
    return out


def _shift_partial(s: HSeries) -> HSeries:
    """h * s where s is known through order k: result known through k + 1."""
    zero = s[0] * 0
    return HSeries([zero] + list(s.coeffs))


def check_deformed_bracket(setup: FormalitySetup, f, g, strict: bool = False) -> dict[str, Defect]:
    """Second derivative on Hamiltonian fields against the deformed commutator.

    main:   Psi(H_f, H_g) - (1/h)(Phi({f,g}) - (Phi f * Phi g - Phi g * Phi f)/h)
    sharp:  Phi^{-1} Psi(H_f, H_g) - (1/h)({f,g} - (f#g - g#f)/h)
    Division by h is strict; a nonzero constant term raises HbarDivisionError.
    """
    N = setup.order
    fs, gs = _as_pv_series(f, N), _as_pv_series(g, N)
    out = {}
    try:
        star = star_product(setup)
        Hf, Hg = hamiltonian(setup.gamma, fs), hamiltonian(setup.gamma, gs)
        lhs = psi(setup, Hf, Hg, strict).map(PolyDiffOp.as_function)
        fp, gp = fs.map(PolyVec.as_function), gs.map(PolyVec.as_function)
        pb = poisson_bracket(setup.gamma, fp, gp)
        pf, pg, ppb = align(phi_function(setup, fp, strict), phi_function(setup, gp, strict),
                            phi_function(setup, pb, strict))
        st = _fit_op(star.series, pf.order)
        comm = series_apply(st, pf, pg) - series_apply(st, pg, pf)
        inner = comm.divide_by_h()
        ppb_t = ppb.truncate(inner.order)
        rhs = (ppb_t - inner).divide_by_h()
        a, b = align(lhs, rhs)
        out["main"] = Defect("main", a - b, N - 2)
    except MissingWeightError as exc:
        out["main"] = Defect("main", None, N - 2, note=str(exc))
    try:
        fp, gp = fs.map(PolyVec.as_function), gs.map(PolyVec.as_function)
        Hf, Hg = hamiltonian(setup.gamma, fs), hamiltonian(setup.gamma, gs)
        lhs = psi(setup, Hf, Hg, strict).map(PolyDiffOp.as_function)
        lhs = phi_inverse(setup.with_order(lhs.order), lhs, strict)
        fg = sharp_product(setup, fp, gp, strict)
        gf = sharp_product(setup, gp, fp, strict)
        fg, gf = align(fg, gf)
        inner = (fg - gf).divide_by_h()
        pb = poisson_bracket(setup.gamma, fp, gp).truncate(inner.order)
        rhs = (pb - inner).divide_by_h()
        a, b = align(lhs, rhs)
        out["sharp"] = Defect("sharp", a - b, N - 2)
    except MissingWeightError as exc:
        out["sharp"] = Defect("sharp", None, N - 2, note=str(exc))
    return out


# --- coalgebra adapters -----------------------------------------------------

def polyvector_basis() -> GradedBasis:
    """Labels (arity, indices, monomial) of the shifted polyvector space: degree arity - 2."""
    return GradedBasis(degree=lambda label: label[0] - 2)


def operator_basis() -> GradedBasis:
    """Labels (arity, derivatives, monomial) of shifted operators: degree arity - 2."""
    return GradedBasis(degree=lambda label: label[0] - 2)


def primitive_of(basis: GradedBasis, series: HSeries, order: int, shift: int = 0) -> CoalgElem:
    """h^shift * (sum_j h^j xi_j) as an element of V (x) h Q[h]."""
    coeffs: dict = {}
    for j, xi in enumerate(series):
        if j + shift > order:
            break
        for label, c in elementary_polyvectors(xi):
            s = coeffs.setdefault(label, [Fraction(0)] * (order + 1))
            s[j + shift] += c
    return CoalgElem.primitive(basis, order, coeffs)


def _label_vec(dim: int, label) -> PolyVec:
    arity, key, m = label
    return PolyVec(dim, arity, {key: Poly.monomial(dim, m)})


def schouten_coderivation(dim: int, basis: GradedBasis | None = None) -> TaylorCoeffs:
    """Coderivation with the single coefficient Q_2(x.y) = (-1)^{|x|(|y|-1)} [x, y]."""
    basis = basis or polyvector_basis()

    @lru_cache(maxsize=None)
    def q2(w: tuple) -> dict:
        x, y = w
        X, Y = _label_vec(dim, x), _label_vec(dim, y)
        a, b = X.arity - 1, Y.arity - 1
        br = schouten(X, Y)
        if (a * (b - 1)) % 2:
            br = -br
        return dict(elementary_polyvectors(br))

    return TaylorCoeffs({2: q2}, basis, degree=1)


def check_hamiltonian_coderivation(setup: FormalitySetup, Y, g, order: int | None = None) -> CoalgElem:
    """Q(e^{h(gamma+Y+g)} - 1) - h^2 (H_g . e^{h(gamma+Y+g)} + [Y, gamma+g] . e^{h(gamma+g)}).

    Computed in the symmetric coalgebra on polyvector labels; zero when the
    coderivation identity holds at truncation ``order``.
    """
    r = setup.order if order is None else order
    B = polyvector_basis()
    gam = _fit(setup.gamma, r)
    Ys, gs = _as_pv_series(Y, r), _as_pv_series(g, r)
    Q = schouten_coderivation(setup.dim, B)
    pg, pY, pgam = primitive_of(B, gs, r, 1), primitive_of(B, Ys, r, 1), primitive_of(B, gam, r, 1)
    lhs = coderivation_apply(Q, exp_grouplike(pgam + pY + pg))
    Hg = primitive_of(B, hamiltonian(gam, gs), r, 2)
    Yb = primitive_of(B, schouten_series(Ys, gam), r, 2) + primitive_of(B, schouten_series(Ys, gs), r, 2)
    rhs = Hg * exp_with_unit(pgam + pY + pg) + Yb * exp_with_unit(pgam + pg)
    return lhs - rhs


def formality_morphism(setup: FormalitySetup) -> TaylorCoeffs:
    """Taylor coefficients U_n on polyvector labels, valued in operator labels."""
    dim = setup.dim

    def coeff(n):
        def un(w: tuple) -> dict:
            out: dict = {}
            for label, c in elementary_operators(setup.U([_label_vec(dim, x) for x in w])):
                out[label] = out.get(label, 0) + c
            return out
        return un

    return TaylorCoeffs({n: coeff(n) for n in range(1, setup.order + 2)}, operator_basis())


def _operators_from(elem_proj: dict, dim: int, arity: int, order: int) -> HSeries:
    coeffs = [PolyDiffOp.zero(dim, arity) for _ in range(order + 1)]
    for (ar, key, m), s in elem_proj.items():
        if ar != arity:
            raise ValueError("mixed arities in projection")
        for k, c in enumerate(s):
            if c:
                coeffs[k] = coeffs[k] + PolyDiffOp(dim, arity, {key: Poly.monomial(dim, m, c)})
    return HSeries(coeffs)


def check_gauge_intertwining(setup: FormalitySetup, Y, strict: bool = False) -> dict[str, Defect]:
    """Transport of the vector field [Y, h gamma] through U against [Phi(Y), *].

    ``coalgebra``: pi U([Y, h gamma] e^{h gamma}) - [Phi(Y), *], with the left
    side computed by the coalgebra morphism on words.  ``reduction``: that
    defect plus the derivation defect of the tangent identities (they are
    negatives of each other, so the sum vanishes identically).
    """
    N = setup.order
    Ys = _as_pv_series(Y, N)
    star = star_product(setup).series
    out = {}
    try:
        pY = phi(setup, Ys, strict)
        rhs = gerstenhaber_series(*align(pY, star))
        B = polyvector_basis()
        gam = setup.gamma
        v1 = primitive_of(B, schouten_series(Ys, gam), N, 1) * exp_with_unit(primitive_of(B, gam, N, 1))
        if v1:
            image = morphism_apply(formality_morphism(setup), v1)
            lhs = _operators_from({k: s.coeffs for k, s in image.project().items()}, setup.dim, 2, N)
        else:
            lhs = operator_series(PolyDiffOp.zero(setup.dim, 2), N)
        lhs, rhs = align(lhs, rhs)
        coal = lhs - rhs
        out["coalgebra"] = Defect("coalgebra", coal, N)
        eq1 = check_tangent_identities(setup, Ys, PolyVec.function(Poly.zero(setup.dim)), strict)["derivation"]
        if eq1.series is not None:
            a, b = align(coal, eq1.series)
            out["reduction"] = Defect("reduction", a + b, N)
        else:
            out["reduction"] = Defect("reduction", None, N, note=eq1.note)
    except MissingWeightError as exc:
        out["coalgebra"] = Defect("coalgebra", None, N, note=str(exc))
    return out


# --- gauge action on star products ------------------------------------------

def gauge_star(setup: FormalitySetup, Y) -> StarProduct:
    """Star product built from the gauge-transformed bivector exp(ad hY) gamma."""
    return star_product(setup.with_gamma(gauge_act(Y, setup.gamma, setup.order)))


def gauge_flow_star(setup: FormalitySetup, Y, strict: bool = True) -> HSeries:
    """Integrate d*/dt = h [Phi_{gamma(t)}(Y), *(t)] from t=0 to t=1 by Picard iteration.

    gamma(t) = exp(t ad hY) gamma; every quantity is a polynomial in t, so the
    iteration is exact and terminates after N steps.
    """
    N = setup.order
    d = setup.dim
    Ys = _as_pv_series(Y, N)
    hY = Ys.shift(1)
    # gamma(t) = sum_p t^p gamma^(p), gamma^(p) = ad_{hY}^p gamma / p!
    gam_t = [setup.gamma]
    for p in range(1, N + 1):
        gam_t.append(schouten_series(hY, gam_t[-1]).scale(Fraction(1, p)))
    # Phi_{gamma(t)}(Y) through order N-1, as t-polynomial of operator series
    phi_t: dict[int, HSeries] = {}
    for k in range(N):
        for ps in cartesian(range(N + 1), repeat=k):
            q = sum(ps)
            if q > N:
                continue
            term = _multilinear(setup, [Ys] + [gam_t[p] for p in ps], N, strict).scale(
                Fraction(1, factorial(k))).shift(k)
            phi_t[q] = phi_t[q] + term if q in phi_t else term
    star0 = star_product(setup).series
    cur: dict[int, HSeries] = {0: star0}
    for _ in range(N):
        nxt: dict[int, HSeries] = {0: star0}
        for a, P in phi_t.items():
            for b, S in cur.items():
                br = gerstenhaber_series(P, S).shift(1)
                if br.is_zero():
                    continue
                key = a + b + 1  # integrate t^{a+b}
                br = br.scale(Fraction(1, a + b + 1))
                nxt[key] = nxt[key] + br if key in nxt else br
        cur = nxt
    total = operator_series(PolyDiffOp.zero(d, 2), N)
    for s in cur.values():
        total = total + s
    return total


def _multilinear(setup: FormalitySetup, args: Sequence[HSeries], N: int, strict: bool) -> HSeries:
    """sum over order choices h^{sum a} U_n(args_a), truncated at N."""
    dim = setup.dim
    m = sum(a[0].arity for a in args) - 2 * len(args) + 2
    coeffs = []
    for t in range(N + 1):
        acc = PolyDiffOp.zero(dim, m)
        for split in _compositions(t, len(args)):
            xs = [args[i][split[i]] for i in range(len(args))]
            if all(xs):
                acc = acc + setup.U(xs)
        coeffs.append(acc)
    return HSeries(coeffs)


def check_gauge_star(setup: FormalitySetup, Y) -> Defect:
    """Star product of the transformed bivector against the integrated flow."""
    N = setup.order
    try:
        a = gauge_star(setup, Y).series
        b = gauge_flow_star(setup, Y)
        return Defect("gauge-star", a - b, N)
    except MissingWeightError as exc:
        return Defect("gauge-star", None, N, note=str(exc))


def random_poisson(rng, dim: int, order: int = 0, max_degree: int = 2) -> HSeries:
    """Random formal Poisson bivector: f d1^d2 in d=2, h * eps(dC) in d=3."""
    from .polyvector import random_polyvec

    terms = []
    if dim == 2:
        for _ in range(order + 1):
            f = random_polyvec(rng, 2, 0, max_degree=max_degree).as_function()
            terms.append(PolyVec(2, 2, {(0, 1): f}))
    elif dim == 3:
        C = random_polyvec(rng, 3, 0, max_degree=max_degree, terms=3).as_function()
        for _ in range(order + 1):
            h = Poly.const(3, rng.randint(-2, 2)) + random_polyvec(rng, 3, 0, max_degree=1, terms=1).as_function()
            dC = [C.partial(i) for i in range(3)]
            terms.append(PolyVec(3, 2, {(0, 1): h * dC[2], (1, 2): h * dC[0], (2, 0): h * dC[1]}))
    else:
        raise ValueError("random Poisson structures are provided for d = 2, 3")
    return HSeries(terms)


__all__ = [
    "FormalitySetup", "NotPoissonError", "InadmissibleError", "Defect", "expand", "align",
    "taylor_U", "star_product", "phi", "phi_function", "phi_inverse", "psi", "sharp_product",
    "curvature", "curvature_from_tangent", "check_tangent_identities", "check_deformed_bracket",
    "check_hamiltonian_coderivation", "check_gauge_intertwining", "gauge_star", "gauge_flow_star",
    "check_gauge_star", "schouten_coderivation", "formality_morphism", "polyvector_basis",
    "operator_basis", "primitive_of", "random_poisson",
]
