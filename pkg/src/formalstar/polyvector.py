"""Polyvector fields on R^d with the Schouten-Nijenhuis bracket.

A k-vector field is stored on strictly increasing index tuples,
``xi = sum_{i1<...<ik} xi^{i1..ik} d_{i1} ^ ... ^ d_{ik}``.  Internally we
treat ``d_i`` as an odd coordinate theta_i, so wedge is the supercommutative
product and the bracket is

    [P, Q] = (-1)^{(p-1)(q-1)} sum_i dR_theta_i(P) dx_i(Q) - sum_i dR_theta_i(Q) dx_i(P)

with ``dR`` the right derivative.  This is the reverse-order variant of the
classical Schouten bracket: vector fields still bracket as the Lie bracket,
``[X, f] = X(f)``, and ``[pi, f] = pi^{ij} d_i f d_j`` contracts the *first*
slot, so that the Hamiltonian field ``H_g = [gamma, g]`` satisfies
``H_g(f) = {g, f}``.

Degrees: a k-vector has Lie degree k-1.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import factorial
from typing import Iterable, Iterator, Mapping, Sequence

from .exact import HSeries, Poly, _check_dim, format_terms

Indices = tuple[int, ...]


def sort_sign(indices: Sequence[int]) -> tuple[int, Indices]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, ()
    sign = 1
    # insertion sort counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


class PolyVec:
    """Homogeneous k-vector field with polynomial coefficients."""

    __slots__ = ("dim", "arity", "_comps", "_hash")

    def __init__(self, dim: int, arity: int, comps: Mapping[Sequence[int], Poly] | None = None):
        if arity < 0:
            raise ValueError(f"negative arity {arity}")
        self.dim = dim
        self.arity = arity
        out: dict[Indices, Poly] = {}
        for key, p in (comps or {}).items():
            key = tuple(key)
            if len(key) != arity:
                raise ValueError(f"component {key} does not have arity {arity}")
            if any(not 0 <= i < dim for i in key):
                raise IndexError(f"index out of range in {key}")
            if not isinstance(p, Poly):
                p = Poly.const(dim, p)
            _check_dim(dim, p.dim)
            sign, skey = sort_sign(key)
            if not sign or not p:
                continue
            acc = out.get(skey, Poly.zero(dim)) + (p if sign > 0 else -p)
            if acc:
                out[skey] = acc
            else:
                out.pop(skey, None)
        self._comps = out
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, arity: int, comps: dict[Indices, Poly]) -> "PolyVec":
        v = cls.__new__(cls)
        v.dim, v.arity, v._comps, v._hash = dim, arity, comps, None
        return v

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, arity: int) -> "PolyVec":
        return cls._raw(dim, arity, {})

    @classmethod
    def function(cls, f: Poly) -> "PolyVec":
        return cls._raw(f.dim, 0, {(): f} if f else {})

    @classmethod
    def vector(cls, coeffs: Sequence[Poly]) -> "PolyVec":
        dim = len(coeffs)
        return cls(dim, 1, {(i,): c for i, c in enumerate(coeffs)})

    @classmethod
    def basis(cls, dim: int, indices: Sequence[int], coeff: Poly | int | Fraction = 1) -> "PolyVec":
        """``coeff * d_{i1} ^ ... ^ d_{ik}`` (indices 0-based, any order)."""
        return cls(dim, len(indices), {tuple(indices): coeff})

    # inspection ---------------------------------------------------------
    def items(self) -> Iterator[tuple[Indices, Poly]]:
        for k in sorted(self._comps):
            yield k, self._comps[k]

    def component(self, indices: Sequence[int]) -> Poly:
        """Fully antisymmetric component ``xi^{i1..ik}`` for any index order."""
        sign, key = sort_sign(indices)
        if not sign:
            return Poly.zero(self.dim)
        p = self._comps.get(key)
        if p is None:
            return Poly.zero(self.dim)
        return p if sign > 0 else -p

    def full_components(self) -> Iterator[tuple[Indices, Poly]]:
        """All (index tuple, component) pairs over every ordering."""
        from itertools import permutations

        for key, p in self._comps.items():
            for perm in permutations(range(self.arity)):
                idx = tuple(key[i] for i in perm)
                sign, _ = sort_sign(perm)
                yield idx, (p if sign > 0 else -p)

    def as_function(self) -> Poly:
        if self.arity != 0:
            raise ValueError("not a function")
        return self._comps.get((), Poly.zero(self.dim))

    @property
    def degree(self) -> int:
        """Degree in the graded Lie algebra of polyvectors (arity - 1)."""
        return self.arity - 1

    def __bool__(self) -> bool:
        return bool(self._comps)

    def __len__(self) -> int:
        return len(self._comps)

    def max_coefficient_degree(self) -> int:
        return max((p.degree() for p in self._comps.values()), default=-1)

    # linear structure ---------------------------------------------------
    def _same(self, other: "PolyVec") -> None:
        _check_dim(self.dim, other.dim)
        if self.arity != other.arity:
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "PolyVec") -> "PolyVec":
        if not isinstance(other, PolyVec):
            return NotImplemented
        if not other._comps or not self._comps:
            # a zero of any arity is neutral; brackets can produce "arity -1" zeros
            _check_dim(self.dim, other.dim)
            return other if not self._comps else self
        self._same(other)
        out = dict(self._comps)
        for k, p in other._comps.items():
            s = out.get(k, Poly.zero(self.dim)) + p
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return PolyVec._raw(self.dim, self.arity, out)

    def __neg__(self) -> "PolyVec":
        return PolyVec._raw(self.dim, self.arity, {k: -p for k, p in self._comps.items()})

    def __sub__(self, other: "PolyVec") -> "PolyVec":
        return self + (-other)

    def __mul__(self, c) -> "PolyVec":
        """Scalar or function multiple."""
        if isinstance(c, Poly):
            _check_dim(self.dim, c.dim)
            out = {k: p * c for k, p in self._comps.items()}
            return PolyVec._raw(self.dim, self.arity, {k: p for k, p in out.items() if p})
        if isinstance(c, (int, Fraction)):
            if not c:
                return PolyVec.zero(self.dim, self.arity)
            return PolyVec._raw(self.dim, self.arity, {k: p * c for k, p in self._comps.items()})
        return NotImplemented

    __rmul__ = __mul__

    # calculus -----------------------------------------------------------
    def partial_x(self, i: int) -> "PolyVec":
        out = {k: p.partial(i) for k, p in self._comps.items()}
        return PolyVec._raw(self.dim, self.arity, {k: p for k, p in out.items() if p})

    def partial_theta(self, i: int) -> "PolyVec":
        """Right derivative with respect to the odd coordinate d_i."""
        if self.arity == 0:
            raise ValueError("functions have no odd directions")
        out: dict[Indices, Poly] = {}
        for key, p in self._comps.items():
            if i not in key:
                continue
            pos = key.index(i)
            rest = key[:pos] + key[pos + 1:]
            sign = -1 if (self.arity - 1 - pos) % 2 else 1
            out[rest] = p if sign > 0 else -p
        return PolyVec._raw(self.dim, self.arity - 1, out)

    def apply_to(self, f: Poly) -> Poly:
        """For a vector field X: the directional derivative X(f)."""
        if self.arity != 1:
            raise ValueError("only vector fields act on functions")
        out = Poly.zero(self.dim)
        for (i,), p in self._comps.items():
            out = out + p * f.partial(i)
        return out

    # identity -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVec):
            return NotImplemented
        if not self._comps and not other._comps:
            return self.dim == other.dim
        return (self.dim, self.arity, self._comps) == (other.dim, other.arity, other._comps)

    def __hash__(self) -> int:
        if self._hash is None:
            arity = self.arity if self._comps else None
            self._hash = hash((self.dim, arity, frozenset(self._comps.items())))
        return self._hash

    def render(self, names: Sequence[str] | None = None) -> str:
        """Text form; custom coordinate ``names`` give basis symbols ``d<name>``."""
        if self.arity == 0:
            return self.as_function().render(names)
        pairs = []
        for key, p in self.items():
            wedge = "^".join(f"d{names[i]}" if names else f"d{i + 1}" for i in key)
            if len(p) == 1:
                (m, c), = p.items()
                mono = Poly.monomial(self.dim, m).render(names)
                body = wedge if mono == "1" else f"{mono}*{wedge}"
                pairs.append((c, body))
            else:
                pairs.append((Fraction(1), f"({p.render(names)})*{wedge}"))
        return format_terms(pairs)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"PolyVec(d={self.dim}, k={self.arity}: {self.render()})"

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "arity": self.arity,
            "components": [
                {"indices": [i + 1 for i in key], "polynomial": str(p)} for key, p in self.items()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PolyVec":
        from .parsing import parse_poly

        dim = int(data["dimension"])
        comps = {}
        for entry in data["components"]:
            key = tuple(int(i) - 1 for i in entry["indices"])
            comps[key] = comps.get(key, Poly.zero(dim)) + parse_poly(entry["polynomial"], dim)
        return cls(dim, int(data["arity"]), comps)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def wedge(a: PolyVec, b: PolyVec) -> PolyVec:
    """Alternating product a ^ b."""
    _check_dim(a.dim, b.dim)
    k = a.arity + b.arity
    out: dict[Indices, Poly] = {}
    for ka, pa in a._comps.items():
        for kb, pb in b._comps.items():
            sign, key = sort_sign(ka + kb)
            if not sign:
                continue
            term = pa * pb
            s = out.get(key, Poly.zero(a.dim)) + (term if sign > 0 else -term)
            if s:
                out[key] = s
            else:
                out.pop(key, None)
    return PolyVec._raw(a.dim, k, out)


def schouten(a: PolyVec, b: PolyVec) -> PolyVec:
    """Graded bracket of polyvector fields (arity k_a + k_b - 1).

    Two functions bracket to zero; that zero is returned as a function.
    """
    _check_dim(a.dim, b.dim)
    p, q = a.arity, b.arity
    k = p + q - 1
    if k < 0:
        return PolyVec.zero(a.dim, 0)
    out = PolyVec.zero(a.dim, k)
    sign = -1 if ((p - 1) * (q - 1)) % 2 else 1
    for i in range(a.dim):
        if p:
            t = wedge(a.partial_theta(i), b.partial_x(i))
            out = out + (t if sign > 0 else -t)
        if q:
            out = out - wedge(b.partial_theta(i), a.partial_x(i))
    return out


# --- formal bivectors and the Poisson layer --------------------------------

FormalBivector = HSeries  # HSeries[PolyVec] with arity-2 coefficients


def as_series(x: PolyVec | HSeries, order: int) -> HSeries:
    if isinstance(x, HSeries):
        if x.order != order:
            x = x.truncate(order) if x.order > order else HSeries(
                list(x.coeffs) + [x.coeffs[0] * 0] * (order - x.order))
        return x
    return HSeries.constant(x, order, PolyVec.zero(x.dim, x.arity))


def schouten_series(a: HSeries, b: HSeries) -> HSeries:
    return a.mul(b, schouten)


def formal_bivector(terms: Sequence[PolyVec], order: int) -> HSeries:
    """gamma_0 + h gamma_1 + ..., padded/truncated to ``order``."""
    if not terms:
        raise ValueError("need at least gamma_0")
    for t in terms:
        if t.arity != 2:
            raise ValueError("formal bivector coefficients must have arity 2")
        _check_dim(terms[0].dim, t.dim)
    zero = PolyVec.zero(terms[0].dim, 2)
    return HSeries.from_terms(dict(enumerate(terms)), order, zero)


def poisson_defect(gamma: HSeries) -> HSeries:
    """[gamma, gamma] order by order; zero iff gamma is formal Poisson."""
    for t in gamma:
        if t.arity != 2:
            raise ValueError("expected a bivector series")
    return schouten_series(gamma, gamma)


def hamiltonian(gamma: HSeries, g: PolyVec | HSeries) -> HSeries:
    """H_g = [gamma, g], order by order."""
    g = as_series(g if not isinstance(g, Poly) else PolyVec.function(g), gamma.order)
    _check_dim(gamma[0].dim, g[0].dim)
    return schouten_series(gamma, g)


def poisson_bracket(gamma: HSeries, f, g) -> HSeries:
    """{f, g} = sum_{i<j} gamma^{ij} (d_i f d_j g - d_j f d_i g), as a series.

    ``f`` and ``g`` may be polynomials or series of polynomials.
    """
    N = gamma.order
    f = _function_series(f, N)
    g = _function_series(g, N)
    _check_dim(gamma[0].dim, f[0].dim)
    _check_dim(gamma[0].dim, g[0].dim)

    out = []
    for n in range(N + 1):
        acc = Poly.zero(gamma[0].dim)
        for a in range(n + 1):
            for b in range(n - a + 1):
                acc = acc + _bivector_pairing(gamma[a], f[b], g[n - a - b])
        out.append(acc)
    return HSeries(out)


def _bivector_pairing(gam: PolyVec, f: Poly, g: Poly) -> Poly:
    out = Poly.zero(gam.dim)
    if not f or not g:
        return out
    for (i, j), c in gam.items():
        out = out + c * (f.partial(i) * g.partial(j) - f.partial(j) * g.partial(i))
    return out


def _function_series(f, order: int) -> HSeries:
    if isinstance(f, HSeries):
        if isinstance(f[0], PolyVec):
            f = f.map(PolyVec.as_function)
        return f if f.order == order else (f.truncate(order) if f.order > order else HSeries(
            list(f.coeffs) + [Poly.zero(f[0].dim)] * (order - f.order)))
    if isinstance(f, PolyVec):
        f = f.as_function()
    return HSeries.constant(f, order, Poly.zero(f.dim))


def gauge_act(Y: PolyVec | HSeries, gamma: HSeries, order: int | None = None) -> HSeries:
    """gamma_Y = exp(ad_{hY}) gamma = sum_j h^j/j! ad_Y^j gamma, truncated.

    ``Y`` (vector field or vector-field series) is the generator of the formal
    diffeomorphism exp(hY).
    """
    N = gamma.order if order is None else order
    gamma = as_series(gamma, N)
    Y = as_series(Y, N)
    if Y[0].arity != 1:
        raise ValueError("gauge generator must be a vector field")
    for t in gamma:
        if t.arity != 2:
            raise ValueError("gauge action is defined on bivector series")
    hY = Y.shift(1)
    total = gamma
    term = gamma
    for j in range(1, N + 1):
        term = schouten_series(hY, term).scale(Fraction(1, j))
        total = total + term
    return total


def random_polyvec(rng, dim: int, arity: int, max_degree: int = 2, terms: int = 3,
                   coeff_range: int = 3) -> PolyVec:
    """Small random polyvector (test corpus helper)."""
    from itertools import combinations

    keys = list(combinations(range(dim), arity))
    comps: dict[Indices, Poly] = {}
    for _ in range(terms):
        key = keys[rng.randrange(len(keys))]
        exps = [0] * dim
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(dim)] += 1
        c = Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, 2))
        comps[key] = comps.get(key, Poly.zero(dim)) + Poly.monomial(dim, exps, c)
    return PolyVec(dim, arity, comps)


def antisymmetrization_factor(k: int) -> Fraction:
    return Fraction(1, factorial(k))


def elementary_polyvectors(v: PolyVec) -> Iterable[tuple[tuple, Fraction]]:
    """Decompose into (arity, indices, monomial) labels with coefficients."""
    for key, p in v.items():
        for m, c in p.items():
            yield (v.arity, key, m), c


def from_label(dim: int, label: tuple) -> PolyVec:
    arity, key, m = label
    return PolyVec._raw(dim, arity, {key: Poly.monomial(dim, m)})
