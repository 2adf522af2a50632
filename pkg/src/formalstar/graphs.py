"""Admissible graphs, their operators B_Gamma, and the exact weight table.

Vertices 0..n-1 are aerial (argument i sits on vertex i), vertices n..n+m-1
are ground points in left-to-right order.  Each aerial vertex carries a
tuple of edge targets sorted increasingly; this fixes the ordering of edges
inside the weight form and inside B_Gamma simultaneously, so that their
product does not depend on it.  Loops and parallel edges are excluded.

In JSON, aerial vertices are 1..n and ground vertices L, R, G3, G4, ...
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import combinations, permutations, product
from typing import Iterator, Mapping, Sequence

from .exact import Poly
from .polydiff import PolyDiffOp
from .polyvector import PolyVec, sort_sign


class GraphError(ValueError):
    """Malformed or degree-impossible graph request."""


class MissingWeightError(KeyError):
    """A graph needed for assembly has no known weight."""

    def __init__(self, graph: "Graph"):
        super().__init__(graph.to_json())
        self.graph = graph

    def __str__(self) -> str:
        return f"no weight known for graph {json.dumps(self.graph.to_json())}"


@dataclass(frozen=True)
class Graph:
    n: int
    m: int
    out: tuple[tuple[int, ...], ...]  # per aerial vertex, sorted targets

    def __post_init__(self):
        if len(self.out) != self.n:
            raise GraphError("need one edge list per aerial vertex")
        for i, ts in enumerate(self.out):
            if list(ts) != sorted(set(ts)):
                raise GraphError(f"edges of vertex {i + 1} must be distinct and sorted")
            if i in ts:
                raise GraphError("loops are not admissible")
            if any(not 0 <= t < self.n + self.m for t in ts):
                raise GraphError("edge target out of range")

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.out)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, t) for i, ts in enumerate(self.out) for t in ts]

    def in_degree(self, v: int) -> int:
        return sum(v in ts for ts in self.out)

    def is_ground(self, v: int) -> bool:
        return v >= self.n

    # exchange format ----------------------------------------------------
    def _name(self, v: int) -> int | str:
        if v < self.n:
            return v + 1
        g = v - self.n
        return "L" if g == 0 else "R" if g == 1 else f"G{g + 1}"

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "edges": [[self._name(s), self._name(t)] for s, t in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> tuple["Graph", int]:
        """Parse the exchange format; returns (graph, sign of sorting the edges)."""
        n, m = int(data["n"]), int(data["m"])

        def vid(x) -> int:
            if isinstance(x, int) or (isinstance(x, str) and x.isdigit()):
                k = int(x)
                if not 1 <= k <= n:
                    raise GraphError(f"aerial vertex {x} out of range")
                return k - 1
            g = {"L": 0, "R": 1}.get(x)
            if g is None:
                if not (isinstance(x, str) and x.startswith("G") and x[1:].isdigit()):
                    raise GraphError(f"unknown vertex label {x!r}")
                g = int(x[1:]) - 1
            if not 0 <= g < m:
                raise GraphError(f"ground vertex {x} out of range")
            return n + g

        lists: list[list[int]] = [[] for _ in range(n)]
        for s, t in data["edges"]:
            si = vid(s)
            if si >= n:
                raise GraphError("edges start at aerial vertices")
            lists[si].append(vid(t))
        sign = 1
        out = []
        for ts in lists:
            sg, st = sort_sign(ts)
            if not sg:
                raise GraphError("parallel edges are not admissible")
            sign *= sg
            out.append(st)
        return cls(n, m, tuple(out)), sign

    def __str__(self) -> str:
        parts = []
        for i, ts in enumerate(self.out):
            parts.append(f"{i + 1}->{{{','.join(str(self._name(t)) for t in ts)}}}")
        return f"[n={self.n} m={self.m}] " + " ".join(parts)


def ground_count(arities: Sequence[int]) -> int:
    return sum(arities) - 2 * len(arities) + 2


def enumerate_graphs(arities: Sequence[int], m: int | None = None) -> list[Graph]:
    """All admissible labeled graphs with vertex i of out-degree arities[i]."""
    n = len(arities)
    if m is None:
        m = ground_count(arities)
    if m < 0:
        raise GraphError(f"negative ground count for arities {tuple(arities)}")
    if m != ground_count(arities):
        raise GraphError("ground count does not match the degree rule")
    choices = []
    for i, k in enumerate(arities):
        if k < 0:
            raise GraphError("negative arity")
        targets = [v for v in range(n + m) if v != i]
        choices.append(list(combinations(targets, k)))
    return [Graph(n, m, tuple(c)) for c in product(*choices)]


# --- canonical forms --------------------------------------------------------

def relabel(g: Graph, perm: Sequence[int]) -> tuple[Graph, int]:
    """Move aerial vertex i to perm[i]; returns (new graph, orientation sign).

    The sign collects the reordering of edges inside each block and the
    reordering of the blocks themselves.
    """
    n = g.n
    mp = list(perm) + list(range(n, n + g.m))
    new: list[tuple[int, ...] | None] = [None] * n
    sign = 1
    for i, ts in enumerate(g.out):
        s, st = sort_sign([mp[t] for t in ts])
        sign *= s
        new[mp[i]] = st
    k = g.arities
    for a in range(n):
        for b in range(a + 1, n):
            if mp[a] > mp[b] and (k[a] * k[b]) % 2:
                sign = -sign
    return Graph(n, g.m, tuple(new)), sign


def canonical(g: Graph) -> tuple[Graph, int]:
    """Lexicographically least relabeling and the sign W(g) = sign * W(canon)."""
    best, best_sign = None, 1
    for perm in permutations(range(g.n)):
        h, s = relabel(g, perm)
        key = (h.arities, h.out)
        if best is None or key < (best.arities, best.out):
            best, best_sign = h, s
    return best, best_sign


def structural_zero(g: Graph) -> str | None:
    """Reason a weight vanishes for dimensional or symmetry reasons, else None."""
    if g.n < 2:
        return None
    for v in range(g.n, g.n + g.m):
        if g.in_degree(v) == 0:
            return "ground vertex without incoming edges"
    for i, ts in enumerate(g.out):
        k, d = len(ts), g.in_degree(i)
        if k == 1 and d <= 1:
            return "vector-field vertex with at most one incoming edge"
        if k == 0 and d <= 1:
            return "function vertex with at most one incoming edge"
    return None


# --- weight table -----------------------------------------------------------

@dataclass(frozen=True)
class WeightEntry:
    value: Fraction
    provenance: str


class WeightTable:
    """Exact weights keyed by canonical graph."""

    def __init__(self, entries: Mapping[Graph, WeightEntry] | None = None):
        self._entries: dict[Graph, WeightEntry] = {}
        for g, e in (entries or {}).items():
            self.add(g, e.value, e.provenance)

    def add(self, g: Graph, value, provenance: str) -> None:
        c, s = canonical(g)
        value = Fraction(value) * s
        old = self._entries.get(c)
        if old is not None and old.value != value:
            raise ValueError(f"conflicting weights for {c}: {old.value} vs {value}")
        self._entries[c] = WeightEntry(value, provenance)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[tuple[Graph, WeightEntry]]:
        return iter(self._entries.items())

    def lookup(self, g: Graph) -> WeightEntry:
        c, s = canonical(g)
        e = self._entries.get(c)
        if e is not None:
            return WeightEntry(e.value * s, e.provenance)
        reason = structural_zero(g)
        if reason is not None:
            return WeightEntry(Fraction(0), f"vanishing: {reason}")
        raise MissingWeightError(g)

    def weight(self, g: Graph) -> Fraction:
        return self.lookup(g).value

    def to_json(self) -> list[dict]:
        return [{"graph": g.to_json(), "weight": str(e.value), "provenance": e.provenance} for g, e in self]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "WeightTable":
        t = cls()
        for item in data:
            g, s = Graph.from_json(item["graph"])
            t.add(g, Fraction(item["weight"]) * s, item.get("provenance", "user"))
        return t

    @classmethod
    def load(cls, path: str) -> "WeightTable":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@lru_cache(maxsize=1)
def default_table() -> WeightTable:
    """The bundled table (aerial order <= 2, plus one order-3 graph)."""
    text = resources.files("formalstar").joinpath("data/weights.json").read_text()
    return WeightTable.from_json(json.loads(text))


# --- graph operators --------------------------------------------------------

def graph_operator(g: Graph, args: Sequence[PolyVec]) -> PolyDiffOp:
    """B_Gamma(args): an m-ary operator built from full antisymmetric components.

    Each edge carries a summation index; vertex i contributes the component of
    args[i] indexed by its outgoing edges, differentiated along its incoming
    edges; ground vertex j receives the derivatives of its incoming edges.
    """
    if len(args) != g.n:
        raise GraphError(f"graph has {g.n} aerial vertices, got {len(args)} arguments")
    if tuple(a.arity for a in args) != g.arities:
        raise GraphError(f"argument arities {[a.arity for a in args]} do not match {list(g.arities)}")
    dim = args[0].dim
    edges = g.edges
    incoming: list[list[int]] = [[] for _ in range(g.n + g.m)]
    for e, (_, t) in enumerate(edges):
        incoming[t].append(e)
    out: dict = {}
    for idx in product(range(dim), repeat=len(edges)):
        coeff = Poly.one(dim)
        e0 = 0
        for i, ts in enumerate(g.out):
            comp = args[i].component(idx[e0:e0 + len(ts)])
            e0 += len(ts)
            if comp and incoming[i]:
                alpha = [0] * dim
                for e in incoming[i]:
                    alpha[idx[e]] += 1
                comp = comp.derivative(alpha)
            if not comp:
                coeff = None
                break
            coeff = coeff * comp
        if coeff is None or not coeff:
            continue
        key = []
        for v in range(g.n, g.n + g.m):
            alpha = [0] * dim
            for e in incoming[v]:
                alpha[idx[e]] += 1
            key.append(tuple(alpha))
        key = tuple(key)
        s = out.get(key)
        s = coeff if s is None else s + coeff
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return PolyDiffOp._raw(dim, g.m, out)
