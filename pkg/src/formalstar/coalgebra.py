"""Graded symmetric coalgebra S(V) over Q[h]/h^(r+1).

Basis labels are arbitrary hashable values; a :class:`GradedBasis` supplies
their degree and a sort key.  Words are tuples of labels in canonical order,
so a word is a monomial of the graded symmetric algebra; reordering produces
Koszul signs and a repeated odd label kills the word.  The empty word is the
unit.

Scalars are stored as tuples of :class:`Fraction` of length r+1 (coefficients
of h^0..h^r); the public API hands out :class:`HSeries` views.

Taylor coefficients ``Q_n`` / ``U_n`` are called on canonically ordered label
tuples only, so graded symmetry is built in: a coefficient defined on sorted
tuples extends uniquely to a graded-symmetric map.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .exact import HSeries

Label = Hashable
Word = tuple
Scalar = tuple  # tuple[Fraction, ...] of length r+1
Combo = Mapping[Label, Fraction]


class NotGrouplikeError(ValueError):
    """Logarithm requested for an element that is not super-grouplike."""


class ParityError(ValueError):
    """An argument has the wrong parity for the requested identity."""


class ConvergenceError(ValueError):
    """Exponential of an element with an h^0 part (not nilpotent)."""


@dataclass(frozen=True)
class GradedBasis:
    """Degree and ordering data for a family of basis labels."""

    degree: Callable[[Label], int]
    key: Callable[[Label], object] = field(default=lambda label: label)

    def word_degree(self, word: Iterable[Label]) -> int:
        return sum(self.degree(x) for x in word)

    def normalize(self, labels: Sequence[Label]) -> tuple[int, Word]:
        """Sort into canonical order; returns (Koszul sign, word), sign 0 if zero."""
        w = list(labels)
        degs = [self.degree(x) for x in w]
        keys = [self.key(x) for x in w]
        sign = 1
        for i in range(1, len(w)):
            j = i
            while j > 0 and keys[j - 1] > keys[j]:
                if degs[j - 1] % 2 and degs[j] % 2:
                    sign = -sign
                w[j - 1], w[j] = w[j], w[j - 1]
                degs[j - 1], degs[j] = degs[j], degs[j - 1]
                keys[j - 1], keys[j] = keys[j], keys[j - 1]
                j -= 1
        for i in range(1, len(w)):
            if w[i] == w[i - 1] and degs[i] % 2:
                return 0, ()
        return sign, tuple(w)


# --- scalar helpers ---------------------------------------------------------

def _szero(r: int) -> Scalar:
    return (Fraction(0),) * (r + 1)


def _sadd(a: Scalar, b: Scalar) -> Scalar:
    return tuple(x + y for x, y in zip(a, b))


def _smul(a: Scalar, b: Scalar) -> Scalar:
    r = len(a) - 1
    out = [Fraction(0)] * (r + 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(r + 1 - i):
            if b[j]:
                out[i + j] += x * b[j]
    return tuple(out)


def _sscale(a: Scalar, c) -> Scalar:
    return tuple(x * c for x in a)


def _as_scalar(s, r: int) -> Scalar:
    if isinstance(s, HSeries):
        if s.order != r:
            raise ValueError(f"scalar truncated at {s.order}, expected {r}")
        return tuple(Fraction(x) for x in s)
    if isinstance(s, (int, Fraction)):
        return (Fraction(s),) + (Fraction(0),) * r
    s = [Fraction(x) for x in s][: r + 1]
    return tuple(s) + (Fraction(0),) * (r + 1 - len(s))


def _acc(out: dict, key, s: Scalar) -> None:
    prev = out.get(key)
    s = s if prev is None else _sadd(prev, s)
    if any(s):
        out[key] = s
    else:
        out.pop(key, None)


def hbar_power(k: int, r: int, c=1) -> Scalar:
    """c * h^k as a scalar truncated at r."""
    out = [Fraction(0)] * (r + 1)
    if k <= r:
        out[k] = Fraction(c)
    return tuple(out)


# --- elements ---------------------------------------------------------------

class CoalgElem:
    """Finite combination of words with truncated h-series coefficients."""

    __slots__ = ("basis", "order", "_terms")

    def __init__(self, basis: GradedBasis, order: int, terms: Mapping[Sequence[Label], object] | None = None):
        self.basis = basis
        self.order = order
        out: dict[Word, Scalar] = {}
        for w, s in (terms or {}).items():
            sign, word = basis.normalize(tuple(w))
            if sign:
                _acc(out, word, _sscale(_as_scalar(s, order), sign))
        self._terms = out

    @classmethod
    def _raw(cls, basis: GradedBasis, order: int, terms: dict) -> "CoalgElem":
        e = cls.__new__(cls)
        e.basis, e.order, e._terms = basis, order, terms
        return e

    @classmethod
    def zero(cls, basis: GradedBasis, order: int) -> "CoalgElem":
        return cls._raw(basis, order, {})

    @classmethod
    def unit(cls, basis: GradedBasis, order: int) -> "CoalgElem":
        return cls._raw(basis, order, {(): hbar_power(0, order)})

    @classmethod
    def primitive(cls, basis: GradedBasis, order: int, coeffs: Mapping[Label, object]) -> "CoalgElem":
        """sum_label coeff * label, coefficients given as series/sequences/numbers."""
        return cls(basis, order, {(x,): s for x, s in coeffs.items()})

    # inspection
    def items(self) -> Iterator[tuple[Word, HSeries]]:
        for w in sorted(self._terms, key=lambda w: (len(w), [self.basis.key(x) for x in w])):
            yield w, HSeries(self._terms[w])

    def coefficient(self, word: Sequence[Label]) -> HSeries:
        sign, w = self.basis.normalize(tuple(word))
        s = self._terms.get(w, _szero(self.order)) if sign else _szero(self.order)
        return HSeries(_sscale(s, sign or 1))

    def words(self) -> list[Word]:
        return list(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def max_length(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def lowest_h_order(self) -> int | None:
        orders = [next(i for i, c in enumerate(s) if c) for s in self._terms.values()]
        return min(orders, default=None)

    def project(self) -> dict[Label, HSeries]:
        """pi: the length-one part, as label -> series."""
        return {w[0]: HSeries(s) for w, s in self._terms.items() if len(w) == 1}

    def without_unit(self) -> "CoalgElem":
        return CoalgElem._raw(self.basis, self.order, {w: s for w, s in self._terms.items() if w})

    def unit_part(self) -> HSeries:
        return HSeries(self._terms.get((), _szero(self.order)))

    def parts_by_parity(self) -> tuple["CoalgElem", "CoalgElem"]:
        even, odd = {}, {}
        for w, s in self._terms.items():
            (odd if self.basis.word_degree(w) % 2 else even)[w] = s
        return CoalgElem._raw(self.basis, self.order, even), CoalgElem._raw(self.basis, self.order, odd)

    # arithmetic
    def _same(self, other: "CoalgElem") -> None:
        if other.order != self.order:
            raise ValueError(f"truncation mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "CoalgElem") -> "CoalgElem":
        self._same(other)
        out = dict(self._terms)
        for w, s in other._terms.items():
            _acc(out, w, s)
        return CoalgElem._raw(self.basis, self.order, out)

    def __neg__(self) -> "CoalgElem":
        return CoalgElem._raw(self.basis, self.order, {w: _sscale(s, -1) for w, s in self._terms.items()})

    def __sub__(self, other: "CoalgElem") -> "CoalgElem":
        return self + (-other)

    def scale(self, c) -> "CoalgElem":
        c = Fraction(c)
        if not c:
            return CoalgElem.zero(self.basis, self.order)
        return CoalgElem._raw(self.basis, self.order, {w: _sscale(s, c) for w, s in self._terms.items()})

    def scalar_mul(self, s) -> "CoalgElem":
        """Multiply by an h-series scalar."""
        s = _as_scalar(s, self.order)
        out: dict[Word, Scalar] = {}
        for w, t in self._terms.items():
            _acc(out, w, _smul(s, t))
        return CoalgElem._raw(self.basis, self.order, out)

    def __mul__(self, other: "CoalgElem") -> "CoalgElem":
        """Graded symmetric product."""
        if not isinstance(other, CoalgElem):
            return NotImplemented
        self._same(other)
        out: dict[Word, Scalar] = {}
        for w1, s1 in self._terms.items():
            for w2, s2 in other._terms.items():
                s = _smul(s1, s2)
                if not any(s):
                    continue
                sign, w = self.basis.normalize(w1 + w2)
                if sign:
                    _acc(out, w, s if sign > 0 else _sscale(s, -1))
        return CoalgElem._raw(self.basis, self.order, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoalgElem):
            return NotImplemented
        return self.order == other.order and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.order, frozenset(self._terms.items())))

    def render(self, label_str: Callable[[Label], str] = str) -> str:
        if not self._terms:
            return "0"
        parts = []
        for w, s in self.items():
            body = ".".join(label_str(x) for x in w) or "1"
            parts.append(f"({s.render()})*{body}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"CoalgElem(r={self.order}: {self.render()})"


class Tensor2:
    """Element of C (x) C: (word, word) -> scalar."""

    __slots__ = ("basis", "order", "_terms")

    def __init__(self, basis: GradedBasis, order: int, terms: dict | None = None):
        self.basis, self.order, self._terms = basis, order, terms or {}

    def add(self, w1: Word, w2: Word, s: Scalar) -> None:
        _acc(self._terms, (w1, w2), s)

    def __add__(self, other: "Tensor2") -> "Tensor2":
        out = dict(self._terms)
        for k, s in other._terms.items():
            _acc(out, k, s)
        return Tensor2(self.basis, self.order, out)

    def scale(self, c) -> "Tensor2":
        return Tensor2(self.basis, self.order, {k: _sscale(s, c) for k, s in self._terms.items() if c})

    def items(self):
        return self._terms.items()

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Tensor2) and self._terms == other._terms

    def __repr__(self) -> str:
        return f"Tensor2({len(self._terms)} terms)"


# --- signs and coproducts ---------------------------------------------------

def quillen_sign(degrees: Sequence[int], I: Iterable[int], J: Iterable[int]) -> int:
    """Koszul sign of reordering x_1..x_n into x_I x_J (positions 0-based).

    Counts odd-odd pairs that the unshuffle swaps.
    """
    I, J = sorted(I), sorted(J)
    if sorted(I + J) != list(range(len(degrees))):
        raise ValueError("(I, J) is not a partition of the word positions")
    sign = 1
    for i in I:
        if degrees[i] % 2:
            for j in J:
                if j < i and degrees[j] % 2:
                    sign = -sign
    return sign


def _subset_split(word: Word, degs: Sequence[int], I: Sequence[int]) -> tuple[int, Word, Word]:
    Iset = set(I)
    J = [j for j in range(len(word)) if j not in Iset]
    sign = quillen_sign(degs, I, J)
    return sign, tuple(word[i] for i in I), tuple(word[j] for j in J)


def coproduct(v: CoalgElem, reduced: bool = True) -> Tensor2:
    """Full coproduct, or the reduced one (proper nonempty splits only)."""
    out = Tensor2(v.basis, v.order)
    for w, s in v._terms.items():
        n = len(w)
        degs = [v.basis.degree(x) for x in w]
        lo, hi = (1, n - 1) if reduced else (0, n)
        for k in range(lo, hi + 1):
            for I in combinations(range(n), k):
                sign, wi, wj = _subset_split(w, degs, I)
                out.add(wi, wj, s if sign > 0 else _sscale(s, -1))
    return out


def tensor(a: CoalgElem, b: CoalgElem) -> Tensor2:
    out = Tensor2(a.basis, a.order)
    for w1, s1 in a._terms.items():
        for w2, s2 in b._terms.items():
            s = _smul(s1, s2)
            if any(s):
                out.add(w1, w2, s)
    return out


def flip(t: Tensor2) -> Tensor2:
    """Signed flip v (x) w -> (-1)^{|v||w|} w (x) v."""
    out = Tensor2(t.basis, t.order)
    for (w1, w2), s in t.items():
        odd = (t.basis.word_degree(w1) * t.basis.word_degree(w2)) % 2
        out.add(w2, w1, _sscale(s, -1) if odd else s)
    return out


def is_super_grouplike(g: CoalgElem) -> bool:
    """Delta g == (I + tau)/2 (g (x) g), exactly at the truncation order."""
    if not g:
        return False
    gg = tensor(g, g)
    return coproduct(g, reduced=False) == (gg + flip(gg)).scale(Fraction(1, 2))


def is_super_grouplike_reduced(g: CoalgElem) -> bool:
    """Counit-free variant: reduced coproduct against g without its unit."""
    if not g or not g.unit_part().is_zero():
        return False
    gg = tensor(g, g)
    return coproduct(g, reduced=True) == (gg + flip(gg)).scale(Fraction(1, 2))


def _check_nilpotent(v: CoalgElem) -> None:
    for w, s in v._terms.items():
        if s[0]:
            raise ConvergenceError(f"coefficient of {w} has an h^0 part")


def exp_grouplike(v: CoalgElem) -> CoalgElem:
    """e^{.v} - 1 for a primitive v with coefficients in h Q[h]."""
    if any(len(w) != 1 for w in v._terms):
        raise ValueError("exponential is taken of a primitive element")
    _check_nilpotent(v)
    total = v
    power = v
    for n in range(2, v.order + 1):
        power = (power * v).scale(Fraction(1, n))
        if not power:
            break
        total = total + power
    return total


def exp_with_unit(v: CoalgElem) -> CoalgElem:
    return CoalgElem.unit(v.basis, v.order) + exp_grouplike(v)


def log_grouplike(g: CoalgElem) -> CoalgElem:
    """Primitive v with e^{.v} = g (g given with unit 1)."""
    if g.unit_part() != HSeries(hbar_power(0, g.order)):
        raise NotGrouplikeError("unit coefficient must be exactly 1")
    if not is_super_grouplike(g):
        raise NotGrouplikeError("element is not super-grouplike")
    u = g.without_unit()
    _check_nilpotent(u)
    total = CoalgElem.zero(g.basis, g.order)
    power = None
    for n in range(1, g.order + 1):
        power = u if power is None else power * u
        if not power:
            break
        total = total + power.scale(Fraction((-1) ** (n + 1), n))
    if any(len(w) != 1 for w in total._terms):
        raise NotGrouplikeError("logarithm is not primitive")
    return total


# --- Taylor coefficients ----------------------------------------------------

@dataclass
class TaylorCoeffs:
    """Family of coefficients n -> (canonical label tuple -> combination of labels).

    ``target`` is the graded basis of the output space (equal to the source for
    coderivations).  ``degree`` is the total degree of the map, used by the
    co-Leibniz sign.
    """

    coeffs: dict[int, Callable[[tuple], Combo]]
    target: GradedBasis | None = None
    degree: int = 0

    def arities(self) -> list[int]:
        return sorted(self.coeffs)

    def evaluate(self, n: int, labels: Sequence[Label], basis: GradedBasis) -> tuple[int, Combo]:
        """Q_n on labels in any order: returns (Koszul sign, value on the sorted word)."""
        sign, w = basis.normalize(tuple(labels))
        if not sign or n not in self.coeffs:
            return 0, {}
        return sign, self.coeffs[n](w)


def _combo_elem(basis: GradedBasis, order: int, combo: Combo, scalar: Scalar) -> CoalgElem:
    out: dict[Word, Scalar] = {}
    for x, c in combo.items():
        if c:
            _acc(out, (x,), _sscale(scalar, c))
    return CoalgElem._raw(basis, order, out)


def coderivation_apply(Q: TaylorCoeffs, v: CoalgElem) -> CoalgElem:
    """Q(x_1..x_n) = sum_{I nonempty} eps(I,J) Q_|I|(x_I) . x_J, extended linearly."""
    basis = v.basis
    out = CoalgElem.zero(basis, v.order)
    for w, s in v._terms.items():
        n = len(w)
        degs = [basis.degree(x) for x in w]
        for k in Q.arities():
            if k > n:
                continue
            for I in combinations(range(n), k):
                sign, wi, wj = _subset_split(w, degs, I)
                val = Q.coeffs[k](wi)
                if not val:
                    continue
                head = _combo_elem(basis, v.order, val, _sscale(s, sign))
                tail = CoalgElem._raw(basis, v.order, {wj: hbar_power(0, v.order)})
                out = out + head * tail
    return out


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """Unordered set partitions, blocks listed by smallest element."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k in range(len(rest) + 1):
        for others in combinations(rest, k):
            block = [first, *others]
            remaining = [x for x in rest if x not in others]
            for p in set_partitions(remaining):
                yield [block] + p


def morphism_apply(U: TaylorCoeffs, v: CoalgElem) -> CoalgElem:
    """Coalgebra morphism with Taylor coefficients U, applied to v (no unit)."""
    if U.target is None:
        raise ValueError("morphism needs a target basis")
    if 1 not in U.coeffs:
        raise ValueError("U_1 must be given")
    src, tgt = v.basis, U.target
    out = CoalgElem.zero(tgt, v.order)
    for w, s in v._terms.items():
        if not w:
            raise ValueError("morphisms act on the counit-free part")
        degs = [src.degree(x) for x in w]
        for blocks in set_partitions(range(len(w))):
            if any(len(b) not in U.coeffs for b in blocks):
                continue
            order = [i for b in blocks for i in b]
            sign = _perm_sign(order, degs)
            prod = CoalgElem.unit(tgt, v.order).scalar_mul(_sscale(s, sign))
            for b in blocks:
                val = U.coeffs[len(b)](tuple(w[i] for i in b))
                if not val:
                    prod = None
                    break
                prod = prod * _combo_elem(tgt, v.order, val, hbar_power(0, v.order))
                if not prod:
                    break
            if prod:
                out = out + prod
    return out


def _perm_sign(order: Sequence[int], degs: Sequence[int]) -> int:
    """Koszul sign of listing positions in ``order`` (odd-odd inversions)."""
    sign = 1
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if order[a] > order[b] and degs[order[a]] % 2 and degs[order[b]] % 2:
                sign = -sign
    return sign


def tensor_map(left, right, t: Tensor2, right_degree: int = 0) -> Tensor2:
    """(left (x) right)(t) with the Koszul sign of moving ``right`` past the left word.

    ``left`` / ``right`` map a one-word CoalgElem to a CoalgElem (or None for id).
    """
    basis = t.basis
    out = Tensor2(basis, t.order)
    for (w1, w2), s in t.items():
        e1 = CoalgElem._raw(basis, t.order, {w1: s})
        e2 = CoalgElem._raw(basis, t.order, {w2: hbar_power(0, t.order)})
        a = left(e1) if left else e1
        b = right(e2) if right else e2
        sign = -1 if (right_degree * basis.word_degree(w1)) % 2 else 1
        for u1, s1 in a._terms.items():
            for u2, s2 in b._terms.items():
                out.add(u1, u2, _sscale(_smul(s1, s2), sign))
    return out


# --- the quadratic coderivation identity ------------------------------------

def quadratic_coderivation_defect(Q2: Callable[[tuple], Combo], X: CoalgElem, Y: CoalgElem) -> CoalgElem:
    """Q(e^{X+Y}-1) - [1/2 Q2(X.X) e^{X+Y} + Q2(Y.X) e^{X}] for Q with only Q_2.

    ``X`` must be a combination of even labels and ``Y`` of odd ones, both with
    coefficients in h Q[h].  Returns zero whenever the identity holds.
    """
    basis, r = X.basis, X.order
    for v, want in ((X, 0), (Y, 1)):
        if any(len(w) != 1 for w in v._terms):
            raise ParityError("X and Y must be primitive")
        if any(basis.degree(w[0]) % 2 != want for w in v._terms):
            raise ParityError("X must be even and Y odd")
    Q = TaylorCoeffs({2: Q2}, basis)
    lhs = coderivation_apply(Q, exp_grouplike(X + Y))

    def q2_of(a: CoalgElem, b: CoalgElem) -> CoalgElem:
        out = CoalgElem.zero(basis, r)
        for (x,), sa in a._terms.items():
            for (y,), sb in b._terms.items():
                sign, w = basis.normalize((x, y))
                if not sign:
                    continue
                val = Q2(w)
                if val:
                    out = out + _combo_elem(basis, r, val, _sscale(_smul(sa, sb), sign))
        return out

    rhs = q2_of(X, X).scale(Fraction(1, 2)) * exp_with_unit(X + Y) + q2_of(Y, X) * exp_with_unit(X)
    return lhs - rhs


# --- random corpus helpers --------------------------------------------------

def abstract_basis(degrees: Mapping[str, int]) -> GradedBasis:
    degs = dict(degrees)
    return GradedBasis(degree=degs.__getitem__)


def random_quadratic(rng: random.Random, labels: Sequence[str], basis: GradedBasis,
                     shift: int = 1, density: float = 0.6) -> Callable[[tuple], Combo]:
    """Random graded-symmetric Q_2 of degree ``shift`` on sorted label pairs."""
    table: dict[tuple, dict] = {}
    for a, b in combinations(sorted(labels, key=basis.key), 2):
        table[(a, b)] = {}
    for a in labels:
        if basis.degree(a) % 2 == 0:
            table[(a, a)] = {}
    for pair in table:
        want = basis.degree(pair[0]) + basis.degree(pair[1]) + shift
        targets = [x for x in labels if basis.degree(x) == want]
        for t in targets:
            if rng.random() < density:
                table[pair][t] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return lambda w: table.get(w, {})


def random_primitive(rng: random.Random, basis: GradedBasis, labels: Sequence[str], order: int,
                     parity: int | None = None) -> CoalgElem:
    """Random element of V (x) h Q[h], optionally restricted to one parity."""
    coeffs = {}
    for x in labels:
        if parity is not None and basis.degree(x) % 2 != parity:
            continue
        if rng.random() < 0.7:
            s = [Fraction(0)] + [Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(order)]
            coeffs[x] = s
    return CoalgElem.primitive(basis, order, coeffs)

