"""Monte Carlo estimates of graph weights.

The weight of a graph is ``(2 pi)^{-#E}`` times the integral of the wedge of
the edge angle forms ``d phi(p, q)``, ``phi(p, q) = arg(q - p) - arg(q - conj p)``,
over the configuration space of aerial points in the upper half plane and
ordered ground points on the real line, modulo real translations and
dilations.  We fix that symmetry by a gauge choice:

    m >= 2:  q_1 = 0, q_2 = 1, later ground points at positive increments
    m == 1:  q_1 = 0, Im p_1 = 1
    m == 0:  p_1 = i

and integrate the Jacobian determinant of the edge angles with respect to
the remaining coordinates, using the maps x = tan(pi (u - 1/2)) and
y = tan(pi u / 2) from the unit cube.  Each chunk is a Latin hypercube
design; the spread of chunk means gives the reported standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph

# orientation of the gauge-fixed slice relative to the standard orientation
_ORIENTATION = {0: 1, 1: -1}


class QuadratureError(RuntimeError):
    """The requested estimate cannot be produced (budget or shape problem)."""


@dataclass(frozen=True)
class WeightEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    chunks: int

    def within(self, target: float, tol: float) -> bool:
        return abs(self.mean - target) <= tol

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples,
                "seed": self.seed, "chunks": self.chunks}


def _coordinates(g: Graph) -> list[tuple[str, int]]:
    coords: list[tuple[str, int]] = []
    for k in range(g.n):
        coords += [("x", k), ("y", k)]
    if g.m >= 2:
        coords += [("t", j) for j in range(2, g.m)]
    elif g.m == 1:
        coords.remove(("y", 0))
    else:
        coords.remove(("x", 0))
        coords.remove(("y", 0))
    return coords


def _angle_jacobian(g: Graph, u: np.ndarray, coords: list[tuple[str, int]]) -> np.ndarray:
    """Integrand values (Jacobian determinant times change of variables) at u."""
    N, D = u.shape
    vals: dict[tuple[str, int], np.ndarray] = {}
    jac = np.ones(N)
    for c, (kind, k) in enumerate(coords):
        col = u[:, c]
        if kind == "x":
            a = np.pi * (col - 0.5)
            vals[(kind, k)] = np.tan(a)
            jac *= np.pi / np.cos(a) ** 2
        else:
            a = np.pi * col / 2
            vals[(kind, k)] = np.tan(a)
            jac *= (np.pi / 2) / np.cos(a) ** 2
    zeros, ones = np.zeros(N), np.ones(N)
    if g.m >= 1:
        vals[("q", 0)] = zeros
    if g.m >= 2:
        vals[("q", 1)] = ones
        acc = ones
        for j in range(2, g.m):
            acc = acc + vals[("t", j)]
            vals[("q", j)] = acc
    if g.m == 1:
        vals[("y", 0)] = ones
    if g.m == 0:
        vals[("x", 0)] = zeros
        vals[("y", 0)] = ones

    index = {c: i for i, c in enumerate(coords)}

    def pos(v: int) -> np.ndarray:
        if v < g.n:
            return vals[("x", v)] + 1j * vals[("y", v)]
        return vals[("q", v - g.n)] + 0j

    def ground_columns(j: int) -> list[int]:
        # q_j depends on increments t_2..t_j with unit coefficients
        return [index[("t", i)] for i in range(2, j + 1) if ("t", i) in index]

    M = np.zeros((N, D, D))
    for e, (s, t) in enumerate(g.edges):
        p, q = pos(s), pos(t)
        for w, sg, conj in ((q - p, 1.0, False), (q - np.conj(p), -1.0, True)):
            r2 = w.real ** 2 + w.imag ** 2
            du, dv = -w.imag / r2, w.real / r2  # d arg w = du d(Re w) + dv d(Im w)
            if t < g.n:
                for name, dre, dim_ in (("x", 1.0, 0.0), ("y", 0.0, 1.0)):
                    c = index.get((name, t))
                    if c is not None:
                        M[:, e, c] += sg * (du * dre + dv * dim_)
            else:
                for c in ground_columns(t - g.n):
                    M[:, e, c] += sg * du
            for name, dre, dim_ in (("x", -1.0, 0.0), ("y", 0.0, 1.0 if conj else -1.0)):
                c = index.get((name, s))
                if c is not None:
                    M[:, e, c] += sg * (du * dre + dv * dim_)
    sign = _ORIENTATION.get(g.m, 1)
    return sign * np.linalg.det(M) * jac / (2 * np.pi) ** D


def _latin_hypercube(rng: np.random.Generator, N: int, D: int) -> np.ndarray:
    u = np.empty((N, D))
    for d in range(D):
        u[:, d] = (rng.permutation(N) + rng.random(N)) / N
    return u


def estimate_weight(g: Graph, samples: int = 2_000_000, seed: int = 0,
                    chunk: int = 1_000_000, max_samples: int = 10_000_000) -> WeightEstimate:
    """Stratified Monte Carlo estimate of the weight of ``g``."""
    if samples > max_samples:
        raise QuadratureError(f"sample budget {samples} exceeds the limit {max_samples}")
    if samples <= 0:
        raise QuadratureError("need a positive number of samples")
    coords = _coordinates(g)
    D = len(coords)
    if D != len(g.edges):
        raise QuadratureError(f"form degree {len(g.edges)} differs from configuration dimension {D}")
    if D == 0:
        return WeightEstimate(1.0, 0.0, samples, seed, 1)
    rng = np.random.default_rng(seed)
    n_chunks = max(2, math.ceil(samples / chunk))
    sizes = [samples // n_chunks + (1 if i < samples % n_chunks else 0) for i in range(n_chunks)]
    means = []
    for size in sizes:
        f = _angle_jacobian(g, _latin_hypercube(rng, size, D), coords)
        means.append(float(np.mean(f)))
    means_arr = np.array(means)
    w = np.array(sizes, dtype=float) / samples
    mean = float(np.sum(w * means_arr))
    stderr = float(np.std(means_arr, ddof=1) / math.sqrt(n_chunks))
    return WeightEstimate(mean, stderr, samples, seed, n_chunks)
