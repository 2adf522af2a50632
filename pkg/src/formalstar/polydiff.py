"""Polydifferential operators, the Gerstenhaber bracket and star products.

A k-ary operator is a finite sum of terms ``c(x) * d^{a1} (x) ... (x) d^{ak}``,
stored as ``{(a1, ..., ak): c}``.  Applied to ``(f1, ..., fk)`` it gives
``sum c * prod_j d^{aj} fj``.  Lie degree is ``k - 1``.

Insertion of B into slot i of A (1-based) carries the sign
``(-1)^{(i-1)(kB-1)}``, and ``[A, B] = A o B - (-1)^{(kA-1)(kB-1)} B o A``.
The Hochschild differential is ``[m, .]``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import product as cartesian
from math import factorial
from typing import Iterator, Mapping, Sequence

from .exact import HSeries, Mono, Poly, _check_dim, distributions, format_terms, mono_add
from .polyvector import PolyVec

Derivs = tuple[Mono, ...]


class ArityError(ValueError):
    """Wrong number or kind of arguments for an operator."""


def _acc(out: dict, key, p: Poly) -> None:
    s = out.get(key)
    s = p if s is None else s + p
    if s:
        out[key] = s
    else:
        out.pop(key, None)


class PolyDiffOp:
    """k-ary multidifferential operator with polynomial coefficients."""

    __slots__ = ("dim", "arity", "_terms", "_hash")

    def __init__(self, dim: int, arity: int, terms: Mapping[Sequence[Sequence[int]], Poly] | None = None):
        if arity < 0:
            raise ArityError(f"negative arity {arity}")
        self.dim = dim
        self.arity = arity
        out: dict[Derivs, Poly] = {}
        for key, p in (terms or {}).items():
            key = tuple(tuple(a) for a in key)
            if len(key) != arity or any(len(a) != dim for a in key):
                raise ArityError(f"derivative tuple {key} does not fit arity {arity}, dimension {dim}")
            if any(e < 0 for a in key for e in a):
                raise ValueError("negative derivative order")
            if not isinstance(p, Poly):
                p = Poly.const(dim, p)
            _check_dim(dim, p.dim)
            if p:
                _acc(out, key, p)
        self._terms = out
        self._hash = None

    @classmethod
    def _raw(cls, dim: int, arity: int, terms: dict) -> "PolyDiffOp":
        d = cls.__new__(cls)
        d.dim, d.arity, d._terms, d._hash = dim, arity, terms, None
        return d

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int, arity: int) -> "PolyDiffOp":
        return cls._raw(dim, arity, {})

    @classmethod
    def function(cls, f: Poly) -> "PolyDiffOp":
        return cls._raw(f.dim, 0, {(): f} if f else {})

    @classmethod
    def multiplication(cls, dim: int, arity: int = 2) -> "PolyDiffOp":
        """Pointwise product of ``arity`` functions (m for arity 2)."""
        z = (0,) * dim
        return cls._raw(dim, arity, {(z,) * arity: Poly.one(dim)})

    @classmethod
    def partials(cls, dim: int, slots: Sequence[Sequence[int]], coeff=1) -> "PolyDiffOp":
        """``coeff * d_{slots[0]} (x) ...``; each slot lists 0-based directions."""
        key = []
        for s in slots:
            a = [0] * dim
            for i in s:
                a[i] += 1
            key.append(tuple(a))
        return cls(dim, len(slots), {tuple(key): coeff})

    # inspection ---------------------------------------------------------
    def items(self) -> Iterator[tuple[Derivs, Poly]]:
        for k in sorted(self._terms, key=lambda t: (-sum(map(sum, t)), tuple(-e for a in t for e in a))):
            yield k, self._terms[k]

    def coefficient(self, key: Sequence[Sequence[int]]) -> Poly:
        return self._terms.get(tuple(tuple(a) for a in key), Poly.zero(self.dim))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def nonzero_count(self) -> int:
        """Number of (derivative tuple, monomial) pairs with nonzero coefficient."""
        return sum(len(p) for p in self._terms.values())

    @property
    def degree(self) -> int:
        return self.arity - 1

    def as_function(self) -> Poly:
        if self.arity != 0:
            raise ArityError("not a 0-ary operator")
        return self._terms.get((), Poly.zero(self.dim))

    # linear structure ---------------------------------------------------
    def _same(self, other: "PolyDiffOp") -> None:
        _check_dim(self.dim, other.dim)
        if self.arity != other.arity:
            raise ArityError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        if not other._terms or not self._terms:
            # a zero of any arity is neutral; brackets can produce "arity -1" zeros
            _check_dim(self.dim, other.dim)
            return other if not self._terms else self
        self._same(other)
        out = dict(self._terms)
        for k, p in other._terms.items():
            _acc(out, k, p)
        return PolyDiffOp._raw(self.dim, self.arity, out)

    def __neg__(self) -> "PolyDiffOp":
        return PolyDiffOp._raw(self.dim, self.arity, {k: -p for k, p in self._terms.items()})

    def __sub__(self, other: "PolyDiffOp") -> "PolyDiffOp":
        return self + (-other)

    def __mul__(self, c) -> "PolyDiffOp":
        if isinstance(c, Poly):
            _check_dim(self.dim, c.dim)
            out = {k: p * c for k, p in self._terms.items()}
            return PolyDiffOp._raw(self.dim, self.arity, {k: p for k, p in out.items() if p})
        if isinstance(c, (int, Fraction)):
            if not c:
                return PolyDiffOp.zero(self.dim, self.arity)
            return PolyDiffOp._raw(self.dim, self.arity, {k: p * c for k, p in self._terms.items()})
        return NotImplemented

    __rmul__ = __mul__

    # evaluation ---------------------------------------------------------
    def __call__(self, *args: Poly) -> Poly:
        return apply(self, *args)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyDiffOp):
            return NotImplemented
        if not self._terms and not other._terms:
            return self.dim == other.dim
        return (self.dim, self.arity, self._terms) == (other.dim, other.arity, other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            arity = self.arity if self._terms else None
            self._hash = hash((self.dim, arity, frozenset(self._terms.items())))
        return self._hash

    def render(self, names: Sequence[str] | None = None) -> str:
        if self.arity == 0:
            return self.as_function().render(names)
        pairs = []
        for key, p in self.items():
            slots = "|".join(_slot_str(a, names) for a in key)
            body = f"[{slots}]"
            if len(p) == 1:
                (m, c), = p.items()
                mono = Poly.monomial(self.dim, m).render(names)
                pairs.append((c, body if mono == "1" else f"{mono}*{body}"))
            else:
                pairs.append((Fraction(1), f"({p.render(names)})*{body}"))
        return format_terms(pairs)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"PolyDiffOp(d={self.dim}, k={self.arity}: {self.render()})"

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "arity": self.arity,
            "terms": [{"poly": str(p), "derivatives": [list(a) for a in key]} for key, p in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PolyDiffOp":
        from .parsing import parse_poly

        dim = int(data["dimension"])
        terms: dict = {}
        for t in data["terms"]:
            key = tuple(tuple(int(e) for e in a) for a in t["derivatives"])
            _acc(terms, key, parse_poly(t["poly"], dim))
        return cls(dim, int(data["arity"]), terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _slot_str(a: Mono, names: Sequence[str] | None = None) -> str:
    sym = [f"d{n}" for n in names] if names else [f"d{i + 1}" for i in range(len(a))]
    parts = [sym[i] if e == 1 else f"{sym[i]}^{e}" for i, e in enumerate(a) if e]
    return "*".join(parts) if parts else "1"


def apply(D: PolyDiffOp, *args: Poly) -> Poly:
    """Evaluate D on k polynomial arguments."""
    if len(args) != D.arity:
        raise ArityError(f"operator of arity {D.arity} given {len(args)} arguments")
    for a in args:
        _check_dim(D.dim, a.dim)
    out = Poly.zero(D.dim)
    cache: dict = {}
    for key, c in D._terms.items():
        term = c
        for j, a in enumerate(key):
            dk = (j, a)
            if dk not in cache:
                cache[dk] = args[j].derivative(a)
            term = term * cache[dk]
            if not term:
                break
        out = out + term
    return out


def insert(A: PolyDiffOp, B: PolyDiffOp, slot: int) -> PolyDiffOp:
    """Unsigned insertion A(..., B(...), ...) with B in the 0-based ``slot``."""
    _check_dim(A.dim, B.dim)
    if not 0 <= slot < A.arity:
        raise ArityError(f"slot {slot} out of range for arity {A.arity}")
    kb = B.arity
    out: dict[Derivs, Poly] = {}
    for akey, ac in A._terms.items():
        alpha = akey[slot]
        pre, post = akey[:slot], akey[slot + 1:]
        for mult, pieces in distributions(alpha, kb + 1):
            for bkey, bc in B._terms.items():
                coeff = bc.derivative(pieces[0])
                if not coeff:
                    continue
                mid = tuple(mono_add(p, b) for p, b in zip(pieces[1:], bkey))
                _acc(out, pre + mid + post, ac * coeff * mult)
    return PolyDiffOp._raw(A.dim, A.arity + kb - 1, out)


def compose(A: PolyDiffOp, B: PolyDiffOp) -> PolyDiffOp:
    """Signed pre-Lie composition A o B = sum_i (-1)^{(i-1)(kB-1)} A o_i B."""
    _check_dim(A.dim, B.dim)
    k = A.arity + B.arity - 1
    out = PolyDiffOp.zero(A.dim, max(k, 0))
    if A.arity == 0:
        return out
    for i in range(A.arity):
        t = insert(A, B, i)
        out = out + (-t if (i * (B.arity - 1)) % 2 else t)
    return out


def gerstenhaber(A: PolyDiffOp, B: PolyDiffOp) -> PolyDiffOp:
    """Graded commutator of the composition; arity kA + kB - 1."""
    _check_dim(A.dim, B.dim)
    if A.arity + B.arity == 0:
        return PolyDiffOp.zero(A.dim, 0)
    ab = compose(A, B)
    ba = compose(B, A)
    return ab + ba if ((A.arity - 1) * (B.arity - 1)) % 2 else ab - ba


def hochschild(D: PolyDiffOp) -> PolyDiffOp:
    """Hochschild coboundary, realized as [m, D]."""
    return gerstenhaber(PolyDiffOp.multiplication(D.dim), D)


def hkr_inclusion(xi: PolyVec) -> PolyDiffOp:
    """Antisymmetrized k-differential operator of a k-vector field (1/k! weight)."""
    k = xi.arity
    if k == 0:
        return PolyDiffOp.function(xi.as_function())
    scale = Fraction(1, factorial(k))
    out: dict[Derivs, Poly] = {}
    unit = [tuple(1 if j == i else 0 for j in range(xi.dim)) for i in range(xi.dim)]
    for idx, c in xi.full_components():
        _acc(out, tuple(unit[i] for i in idx), c * scale)
    return PolyDiffOp._raw(xi.dim, k, out)


def vector_field_operator(X: PolyVec) -> PolyDiffOp:
    if X.arity != 1:
        raise ArityError("expected a vector field")
    return hkr_inclusion(X)


# --- series of operators ----------------------------------------------------

def gerstenhaber_series(a: HSeries, b: HSeries) -> HSeries:
    """Gerstenhaber bracket extended h-bilinearly."""
    zero = PolyDiffOp.zero(a[0].dim, max(a[0].arity + b[0].arity - 1, 0))
    return a.mul(b, gerstenhaber, zero)


def operator_series(D: PolyDiffOp, order: int) -> HSeries:
    return HSeries.constant(D, order, PolyDiffOp.zero(D.dim, D.arity))


def function_series(f, order: int) -> HSeries:
    """Lift a Poly (or Poly series) to a series of 0-ary operators."""
    if isinstance(f, HSeries):
        return f.map(lambda p: p if isinstance(p, PolyDiffOp) else PolyDiffOp.function(p))
    if isinstance(f, PolyDiffOp):
        return operator_series(f, order)
    return operator_series(PolyDiffOp.function(f), order)


def series_apply(D: HSeries, *args: HSeries) -> HSeries:
    """Evaluate an operator series on function series (Cauchy product in h)."""
    N = D.order
    dim = D[0].dim
    out = []
    for n in range(N + 1):
        acc = Poly.zero(dim)
        for split in _splits(n, len(args) + 1):
            op = D[split[0]]
            if not op:
                continue
            acc = acc + apply(op, *(a[s] for a, s in zip(args, split[1:])))
        out.append(acc)
    return HSeries(out)


def _splits(n: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in _splits(n - first, parts - 1):
            yield (first,) + rest


def nonzero_profile(s: HSeries) -> list[int]:
    """Per-order count of nonzero monomial terms (the defect 'norm' used in reports)."""
    out = []
    for c in s:
        if isinstance(c, PolyDiffOp):
            out.append(c.nonzero_count())
        elif isinstance(c, Poly):
            out.append(len(c))
        elif isinstance(c, PolyVec):
            out.append(sum(len(p) for _, p in c.items()))
        else:
            out.append(0 if not c else 1)
    return out


# --- star products ----------------------------------------------------------

class StarProduct:
    """m + h B_1 + h^2 B_2 + ..., truncated."""

    __slots__ = ("series",)

    def __init__(self, series: HSeries):
        c0 = series[0]
        if c0 != PolyDiffOp.multiplication(c0.dim):
            raise ValueError("order-0 term of a star product must be the pointwise product")
        for c in series:
            if c and c.arity != 2:
                raise ArityError("star product coefficients must be bidifferential")
        self.series = series

    @classmethod
    def trivial(cls, dim: int, order: int) -> "StarProduct":
        return cls(operator_series(PolyDiffOp.multiplication(dim), order))

    @property
    def dim(self) -> int:
        return self.series[0].dim

    @property
    def order(self) -> int:
        return self.series.order

    def __getitem__(self, k: int) -> PolyDiffOp:
        return self.series[k]

    def __call__(self, f, g) -> HSeries:
        """f * g for polynomials or polynomial series."""
        return series_apply(self.series, _as_poly_series(f, self.order), _as_poly_series(g, self.order))

    def commutator(self, f, g) -> HSeries:
        return self(f, g) - self(g, f)

    def __eq__(self, other) -> bool:
        return isinstance(other, StarProduct) and self.series == other.series

    def __hash__(self) -> int:
        return hash(self.series)

    def render(self) -> str:
        return self.series.render()

    def __str__(self) -> str:
        return self.render()


def _as_poly_series(f, order: int) -> HSeries:
    if isinstance(f, HSeries):
        return f.map(lambda p: p.as_function() if isinstance(p, (PolyDiffOp, PolyVec)) else p)
    if isinstance(f, PolyVec):
        f = f.as_function()
    return HSeries.constant(f, order, Poly.zero(f.dim))


def assoc_defect(s: StarProduct | HSeries) -> HSeries:
    """(1/2)[s, s]; its vanishing through N is associativity through N."""
    series = s.series if isinstance(s, StarProduct) else s
    return gerstenhaber_series(series, series).scale(Fraction(1, 2))


def evaluate_assoc(s: StarProduct, f: Poly, g: Poly, h: Poly) -> HSeries:
    """(f*g)*h - f*(g*h) computed from values, independent of the bracket."""
    return s(s(f, g), h) - s(f, s(g, h))


def moyal(gamma: PolyVec, order: int) -> StarProduct:
    """Closed form sum_k (h/2)^k/k! P^k for a constant bivector, P = gamma^{ij} d_i (x) d_j."""
    if gamma.arity != 2:
        raise ArityError("Moyal needs a bivector")
    if any(p.degree() > 0 for _, p in gamma.items()):
        raise ValueError("Moyal closed form needs constant coefficients")
    d = gamma.dim
    pairing = [(c.constant_term(), i, j) for (i, j), c in gamma.full_components()]
    out = [PolyDiffOp.multiplication(d)]
    for k in range(1, order + 1):
        terms: dict[Derivs, Poly] = {}
        for choice in cartesian(pairing, repeat=k):
            c = Fraction(1)
            a, b = [0] * d, [0] * d
            for cc, i, j in choice:
                c *= cc
                a[i] += 1
                b[j] += 1
            _acc(terms, (tuple(a), tuple(b)), Poly.const(d, c / (2 ** k * factorial(k))))
        out.append(PolyDiffOp._raw(d, 2, terms))
    return StarProduct(HSeries(out))


def random_operator(rng, dim: int, arity: int, max_order: int = 2, max_degree: int = 2,
                    terms: int = 3) -> PolyDiffOp:
    """Small random operator (test corpus helper)."""
    out: dict = {}
    for _ in range(terms):
        key = []
        for _ in range(arity):
            a = [0] * dim
            for _ in range(rng.randint(0, max_order)):
                a[rng.randrange(dim)] += 1
            key.append(tuple(a))
        exps = [0] * dim
        for _ in range(rng.randint(0, max_degree)):
            exps[rng.randrange(dim)] += 1
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 2))
        _acc(out, tuple(key), Poly.monomial(dim, exps, c))
    return PolyDiffOp(dim, arity, out)


def elementary_operators(D: PolyDiffOp) -> Iterator[tuple[tuple, Fraction]]:
    """Decompose into (arity, derivative tuple, monomial) labels with coefficients."""
    for key, p in D._terms.items():
        for m, c in p.items():
            yield (D.arity, key, m), c


def operator_from_label(dim: int, label: tuple) -> PolyDiffOp:
    arity, key, m = label
    return PolyDiffOp._raw(dim, arity, {key: Poly.monomial(dim, m)})
