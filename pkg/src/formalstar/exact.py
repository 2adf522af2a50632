"""Exact rational polynomials on R^d and hbar-truncated formal series.

Everything here is immutable.  ``Rat`` is :class:`fractions.Fraction`; the
polynomial layer only ever produces canonical forms (no zero coefficients
stored), so ``==`` is a decision procedure.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as _cartesian
from math import factorial
from typing import Callable, Generic, Iterable, Iterator, Mapping, Sequence, TypeVar

Rat = Fraction
Mono = tuple[int, ...]

_SCALARS = (int, Fraction)


class DimensionError(ValueError):
    """Operands live on spaces of different dimension."""


class TruncationError(ValueError):
    """Series with different truncation orders were combined."""


class HbarDivisionError(ArithmeticError):
    """Division by hbar requested for a series with a nonzero constant term."""


def _check_dim(a: int, b: int) -> None:
    if a != b:
        raise DimensionError(f"dimension mismatch: {a} vs {b}")


def mono_key(m: Mono) -> tuple:
    """Graded-lex sort key; larger key = earlier in printed output."""
    return (sum(m), m)


def mono_add(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_str(m: Mono, names: Sequence[str] | None = None) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 0:
            continue
        name = names[i] if names else f"x{i + 1}"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def format_terms(pairs: Iterable[tuple[Fraction, str]]) -> str:
    """Join ``(coefficient, body)`` pairs into ``a*b + c - d`` form."""
    out: list[str] = []
    for c, body in pairs:
        neg = c < 0
        a = -c if neg else c
        if not body:
            s = str(a)
        elif a == 1:
            s = body
        else:
            s = f"{a}*{body}"
        if not out:
            out.append(f"-{s}" if neg else s)
        else:
            out.append(f" - {s}" if neg else f" + {s}")
    return "".join(out) if out else "0"


class Poly:
    """Sparse multivariate polynomial with rational coefficients."""

    __slots__ = ("dim", "_terms", "_hash")

    def __init__(self, dim: int, terms: Mapping[Mono, Fraction] | None = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        clean: dict[Mono, Fraction] = {}
        for m, c in (terms or {}).items():
            m = tuple(m)
            if len(m) != dim:
                raise DimensionError(f"monomial {m} does not have length {dim}")
            if any(e < 0 for e in m):
                raise ValueError(f"negative exponent in {m}")
            c = Fraction(c)
            if c:
                clean[m] = clean.get(m, 0) + c
                if not clean[m]:
                    del clean[m]
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, dim: int, terms: dict[Mono, Fraction]) -> "Poly":
        p = cls.__new__(cls)
        p.dim = dim
        p._terms = terms
        p._hash = None
        return p

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "Poly":
        return cls._raw(dim, {})

    @classmethod
    def const(cls, dim: int, c) -> "Poly":
        c = Fraction(c)
        return cls._raw(dim, {(0,) * dim: c} if c else {})

    @classmethod
    def one(cls, dim: int) -> "Poly":
        return cls.const(dim, 1)

    @classmethod
    def var(cls, dim: int, i: int) -> "Poly":
        """The coordinate function x_{i+1} (0-based index)."""
        if not 0 <= i < dim:
            raise IndexError(f"variable index {i} out of range for dimension {dim}")
        m = [0] * dim
        m[i] = 1
        return cls._raw(dim, {tuple(m): Fraction(1)})

    @classmethod
    def monomial(cls, dim: int, exps: Sequence[int], c=1) -> "Poly":
        return cls(dim, {tuple(exps): Fraction(c)})

    # inspection ---------------------------------------------------------
    def items(self) -> Iterator[tuple[Mono, Fraction]]:
        """Terms in canonical (graded-lex, descending) order."""
        for m in sorted(self._terms, key=mono_key, reverse=True):
            yield m, self._terms[m]

    def coefficient(self, m: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(m), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.dim, Fraction(0))

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            _check_dim(self.dim, other.dim)
            return other
        if isinstance(other, _SCALARS):
            return Poly.const(self.dim, other)
        return NotImplemented

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self._terms)
        for m, c in other._terms.items():
            s = t.get(m, 0) + c
            if s:
                t[m] = s
            else:
                t.pop(m, None)
        return Poly._raw(self.dim, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw(self.dim, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly.zero(self.dim)
        return Poly._raw(self.dim, {m: v * c for m, v in self._terms.items()})

    def __mul__(self, other) -> "Poly":
        if isinstance(other, _SCALARS):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        _check_dim(self.dim, other.dim)
        t: dict[Mono, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_add(m1, m2)
                s = t.get(m, 0) + c1 * c2
                if s:
                    t[m] = s
                else:
                    t.pop(m, None)
        return Poly._raw(self.dim, t)

    def __rmul__(self, other) -> "Poly":
        if isinstance(other, _SCALARS):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "Poly":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        out = Poly.one(self.dim)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # calculus -----------------------------------------------------------
    def partial(self, i: int) -> "Poly":
        """Exact partial derivative along x_{i+1} (0-based index)."""
        if not 0 <= i < self.dim:
            raise IndexError(f"direction {i} out of range for dimension {self.dim}")
        t: dict[Mono, Fraction] = {}
        for m, c in self._terms.items():
            e = m[i]
            if e:
                mm = m[:i] + (e - 1,) + m[i + 1:]
                t[mm] = c * e
        return Poly._raw(self.dim, t)

    def derivative(self, alpha: Sequence[int]) -> "Poly":
        """Multi-index derivative d^alpha."""
        if len(alpha) != self.dim:
            raise DimensionError("multi-index length differs from dimension")
        t: dict[Mono, Fraction] = {}
        for m, c in self._terms.items():
            coef = c
            for e, a in zip(m, alpha):
                if a > e:
                    coef = 0
                    break
                coef *= factorial(e) // factorial(e - a)
            if coef:
                t[tuple(e - a for e, a in zip(m, alpha))] = coef
        return Poly._raw(self.dim, t)

    def __call__(self, *point) -> Fraction:
        if len(point) != self.dim:
            raise DimensionError("wrong number of coordinates")
        total = Fraction(0)
        for m, c in self._terms.items():
            v = c
            for x, e in zip(point, m):
                v *= Fraction(x) ** e
            total += v
        return total

    # identity -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.dim == other.dim and self._terms == other._terms
        if isinstance(other, _SCALARS):
            return self._terms == ({(0,) * self.dim: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, frozenset(self._terms.items())))
        return self._hash

    def render(self, names: Sequence[str] | None = None) -> str:
        return format_terms((c, mono_str(m, names)) for m, c in self.items())

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"Poly({self.dim}, {self.render()!r})"


def distributions(alpha: Mono, parts: int) -> Iterator[tuple[int, tuple[Mono, ...]]]:
    """Ways to split the multi-index ``alpha`` into ``parts`` ordered pieces.

    Yields ``(multinomial, pieces)``; this is the bookkeeping behind the
    generalized Leibniz rule d^alpha(f_1...f_r) = sum mult * prod d^piece f_j.
    """
    per_coord = []
    for a in alpha:
        opts = []
        for split in _compositions(a, parts):
            mult = factorial(a)
            for s in split:
                mult //= factorial(s)
            opts.append((mult, split))
        per_coord.append(opts)
    for choice in _cartesian(*per_coord):
        mult = 1
        for c, _ in choice:
            mult *= c
        pieces = tuple(tuple(choice[i][1][j] for i in range(len(alpha))) for j in range(parts))
        yield mult, pieces


def _compositions(n: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(n,)]
    out = []
    for first in range(n + 1):
        for rest in _compositions(n - first, parts - 1):
            out.append((first,) + rest)
    return out


T = TypeVar("T")


class HSeries(Generic[T]):
    """Truncated power series c_0 + c_1 h + ... + c_N h^N.

    Coefficients may be any additive type supporting ``+``, unary ``-``,
    multiplication by a :class:`Fraction`, and truthiness for zero tests
    (Poly, PolyVec, PolyDiffOp, Fraction).  Terms of order > N are dropped by
    every operation.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[T]):
        if not coeffs:
            raise ValueError("a series needs at least the order-0 coefficient")
        self.coeffs: tuple[T, ...] = tuple(coeffs)

    @classmethod
    def from_terms(cls, terms: Mapping[int, T], order: int, zero: T) -> "HSeries[T]":
        return cls([terms.get(k, zero) for k in range(order + 1)])

    @classmethod
    def constant(cls, c: T, order: int, zero: T) -> "HSeries[T]":
        return cls([c] + [zero] * order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> T:
        return self.coeffs[k]

    def __iter__(self) -> Iterator[T]:
        return iter(self.coeffs)

    def _same(self, other: "HSeries") -> None:
        if not isinstance(other, HSeries):
            raise TypeError("expected an HSeries")
        if other.order != self.order:
            raise TruncationError(f"truncation order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "HSeries[T]") -> "HSeries[T]":
        self._same(other)
        return HSeries([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "HSeries[T]") -> "HSeries[T]":
        self._same(other)
        return HSeries([a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "HSeries[T]":
        return HSeries([-a for a in self.coeffs])

    def scale(self, c) -> "HSeries[T]":
        c = Fraction(c)
        return HSeries([a * c for a in self.coeffs])

    def mul(self, other: "HSeries", product: Callable, zero=None) -> "HSeries":
        """Cauchy product with the bilinear ``product``, truncated at N."""
        self._same(other)
        out = []
        for n in range(self.order + 1):
            acc = zero
            for k in range(n + 1):
                a, b = self.coeffs[k], other.coeffs[n - k]
                if not a or not b:
                    continue
                term = product(a, b)
                acc = term if acc is None else acc + term
            if acc is None:
                acc = zero if zero is not None else product(self.coeffs[0], other.coeffs[0]) * 0
            out.append(acc)
        return HSeries(out)

    def scalar_mul(self, s: "HSeries[Fraction]") -> "HSeries[T]":
        """Module action of a scalar series from Q[h]/h^(N+1)."""
        self._same(s)
        out = []
        for n in range(self.order + 1):
            acc = self.coeffs[n] * 0
            for k in range(n + 1):
                if s.coeffs[k]:
                    acc = acc + self.coeffs[n - k] * Fraction(s.coeffs[k])
            out.append(acc)
        return HSeries(out)

    def shift(self, k: int = 1) -> "HSeries[T]":
        """Multiply by h^k (k >= 0), truncating."""
        zero = self.coeffs[0] * 0
        return HSeries(([zero] * k + list(self.coeffs))[: self.order + 1])

    def divide_by_h(self) -> "HSeries[T]":
        """Strict division by h; loses the top order.

        Raises HbarDivisionError when the constant coefficient is nonzero,
        since silently dropping it would hide a convention error upstream.
        """
        if self.coeffs[0]:
            raise HbarDivisionError("series is not divisible by h: constant term is nonzero")
        if self.order == 0:
            raise HbarDivisionError("cannot divide an order-0 series by h")
        return HSeries(self.coeffs[1:])

    def truncate(self, order: int) -> "HSeries[T]":
        if order > self.order:
            raise TruncationError("cannot extend a truncated series")
        return HSeries(self.coeffs[: order + 1])

    def map(self, f: Callable[[T], object]) -> "HSeries":
        return HSeries([f(c) for c in self.coeffs])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def lowest_nonzero(self) -> int | None:
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, HSeries):
            return NotImplemented
        return self.order == other.order and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def render(self) -> str:
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c and k:
                continue
            parts.append(str(c) if k == 0 else f"h^{k}*({c})")
        return " + ".join(parts)

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"HSeries({self.render()})"


def scalar_series(coeffs: Sequence, order: int) -> HSeries[Fraction]:
    c = [Fraction(x) for x in coeffs][: order + 1]
    return HSeries(c + [Fraction(0)] * (order + 1 - len(c)))


def render_function_series(s: HSeries[Poly], names: Sequence[str] | None = None) -> str:
    """Render a series of functions with h as an ordinary variable.

    Example: ``x1*x2 + 1/2*h``.
    """
    pairs = []
    for k, p in enumerate(s.coeffs):
        hpart = "" if k == 0 else ("h" if k == 1 else f"h^{k}")
        for m, c in p.items():
            body = "*".join(x for x in (hpart, mono_str(m, names)) if x)
            pairs.append((c, body))
    return format_terms(pairs)
