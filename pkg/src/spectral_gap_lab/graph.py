"""Weighted graphs, the edge-list file format and electric network reduction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    Disconnected,
    DuplicateEdge,
    ParseError,
    TooFewVertices,
    VertexOutOfRange,
)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


def is_connected(weights: np.ndarray) -> bool:
    n_comp, _ = connected_components(np.asarray(weights) > 0, directed=False)
    return n_comp == 1


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Complete graph on ``n`` vertices with symmetric conductances; zero weight means no edge.

    Vertices are 0-based. The weight matrix is stored read-only.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if w.shape[0] < 2:
            raise TooFewVertices(f"need at least 2 vertices, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have zero diagonal")
        if not is_connected(w):
            raise Disconnected("skeleton graph (positive-weight edges) is not connected")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def edges(self) -> list[tuple[int, int, float]]:
        """Positive-weight edges ``(u, v, w)`` with ``u < v``, sorted."""
        iu, ju = np.triu_indices(self.n, k=1)
        return [(int(u), int(v), float(self.weights[u, v]))
                for u, v in zip(iu, ju) if self.weights[u, v] > 0]

    def total_weight(self) -> float:
        return float(np.triu(self.weights, k=1).sum())

    def laplacian(self) -> np.ndarray:
        """``-L`` for the random walk: degree matrix minus weights."""
        return np.diag(self.weights.sum(axis=1)) - self.weights

    def check_vertex(self, x: int) -> int:
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.n:
            raise VertexOutOfRange(f"vertex {x} not in 0..{self.n - 1}")
        return int(x)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={len(self.edges())})"

    @classmethod
    def from_edges(cls, n: int, edges) -> WeightedGraph:
        """Build from 0-based ``(u, v, w)`` triples."""
        w = np.zeros((n, n))
        for u, v, c in edges:
            w[u, v] = w[v, u] = c
        return cls(w)

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> WeightedGraph:
        return cls(weight * (np.ones((n, n)) - np.eye(n)))

    @classmethod
    def path(cls, weights) -> WeightedGraph:
        weights = list(weights)
        return cls.from_edges(len(weights) + 1, [(i, i + 1, c) for i, c in enumerate(weights)])


@dataclass(frozen=True, eq=False)
class ReducedGraph:
    """Result of removing one vertex; ``base`` is relabelled 0..n-2 in original order."""

    base: WeightedGraph
    removed_vertex: int
    star_weights: np.ndarray = field(repr=False)

    @property
    def index_map(self) -> list[int]:
        """``index_map[i]`` is the original id of reduced vertex ``i``."""
        n = self.base.n + 1
        return [v for v in range(n) if v != self.removed_vertex]


def star_mesh_weights(g: WeightedGraph, x: int) -> np.ndarray:
    """The added conductances ``c_xy c_xz / sum_w c_xw`` between survivors, as an (n-1)x(n-1) matrix."""
    x = g.check_vertex(x)
    keep = [v for v in range(g.n) if v != x]
    star = g.weights[x, keep]
    total = star.sum()
    extra = np.outer(star, star) / total
    np.fill_diagonal(extra, 0.0)
    return extra


def reduce_at(g: WeightedGraph, x: int) -> ReducedGraph:
    x = g.check_vertex(x)
    keep = [v for v in range(g.n) if v != x]
    new = g.weights[np.ix_(keep, keep)] + star_mesh_weights(g, x)
    return ReducedGraph(base=WeightedGraph(new), removed_vertex=x,
                        star_weights=_frozen(g.weights[x, keep]))


def harmo_residual(g: WeightedGraph, x: int, f) -> float:
    """Star energy minus (mesh energy + (Lf(x))^2 / sum_w c_xw).

    The two sides agree for every ``f``, so the return value is pure rounding error.
    """
    x = g.check_vertex(x)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n,):
        raise ValueError(f"f must have length {g.n}")
    keep = [v for v in range(g.n) if v != x]
    star = g.weights[x, keep]
    fk = f[keep]
    lhs = float(np.sum(star * (fk - f[x]) ** 2))
    extra = star_mesh_weights(g, x)
    diff2 = (fk[:, None] - fk[None, :]) ** 2
    mesh = 0.5 * float(np.sum(extra * diff2))
    lf_x = float(np.sum(star * (fk - f[x])))
    return lhs - (mesh + lf_x ** 2 / star.sum())


def random_graph(n: int, density: float, seed: int) -> WeightedGraph:
    """Erdos-Renyi skeleton with uniform (0, 1] weights, resampled until connected."""
    if n < 2:
        raise TooFewVertices(f"need at least 2 vertices, got {n}")
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    while True:
        present = rng.random(len(iu)) < density
        vals = 1.0 - rng.random(len(iu))
        w = np.zeros((n, n))
        w[iu, ju] = np.where(present, vals, 0.0)
        w = w + w.T
        if is_connected(w):
            return WeightedGraph(w)


def parse_graph(text: str) -> WeightedGraph:
    """Parse ``u v w`` lines (1-based ids, ``w > 0``); ``#`` lines and blank lines are skipped."""
    edges = {}
    n = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'u v w', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if u < 1 or v < 1 or u == v:
            raise ParseError(f"line {lineno}: vertex ids must be distinct and >= 1")
        if not np.isfinite(w) or w <= 0:
            raise ParseError(f"line {lineno}: weight must be a positive finite number")
        key = (min(u, v), max(u, v))
        if key in edges:
            raise DuplicateEdge(f"line {lineno}: edge {key[0]} {key[1]} listed twice")
        edges[key] = w
        n = max(n, u, v)
    if n < 2:
        raise TooFewVertices("graph needs at least 2 vertices")
    return WeightedGraph.from_edges(n, [(u - 1, v - 1, w) for (u, v), w in edges.items()])


def serialize_graph(g: WeightedGraph) -> str:
    # repr(float) is the shortest string that round-trips exactly
    return "".join(f"{u + 1} {v + 1} {w!r}\n" for u, v, w in g.edges())


def read_graph(path) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


def write_graph(g: WeightedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_graph(g))
