"""State spaces and generator matrices for the six particle processes.

All processes are driven by the same mechanism: an edge ``xy`` of weight ``c_xy``
fires and applies the vertex transposition ``x <-> y`` to whatever sits on the
graph (a walker, labels, occupation, colours, a pinned cycle, a matching).

Interchange states are one-line permutations ``eta`` with ``eta[x]`` the label at
vertex ``x``; the position of label ``i`` is ``eta^-1(i)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadColorCounts,
    BadParticleCount,
    DimensionMismatch,
    IncompatibleKinds,
    OddVertexCount,
    SizeLimit,
    TooSmall,
)
from .graph import WeightedGraph
from .limits import check_size
from .perm import all_images, rank_array

RW, IP, EP, CEP, CP, MP = "RW", "IP", "EP", "CEP", "CP", "MP"
KINDS = (RW, IP, EP, CEP, CP, MP)


def _swap(v: int, x: int, y: int) -> int:
    return y if v == x else x if v == y else v


def _canon_edges(edges) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(a, b), max(a, b)) for a, b in edges))


@dataclass(frozen=True, eq=False)
class StateSpace:
    kind: str
    n: int
    params: tuple = ()
    states: tuple = field(default=(), repr=False)

    def __post_init__(self):
        index = {s: i for i, s in enumerate(self.states)}
        object.__setattr__(self, "_index", index)

    def __len__(self):
        return len(self.states)

    def rank(self, state) -> int:
        return self._index[state]

    def unrank(self, i: int):
        return self.states[i]

    def step(self, state, x: int, y: int):
        """State after the edge ``xy`` fires."""
        if self.kind == RW:
            return _swap(state, x, y)
        if self.kind in (IP, CEP):
            s = list(state)
            s[x], s[y] = s[y], s[x]
            return tuple(s)
        if self.kind == EP:
            return tuple(sorted(_swap(v, x, y) for v in state))
        # CP and MP: relabel the endpoints of every edge
        return _canon_edges((_swap(a, x, y), _swap(b, x, y)) for a, b in state)

    def label(self, state) -> str:
        if self.kind == RW:
            return str(state + 1)
        if self.kind in (IP, CEP):
            return "".join(str(v + (self.kind == IP)) for v in state) if self.n < 10 \
                else ",".join(str(v) for v in state)
        if self.kind == EP:
            return "{" + ",".join(str(v + 1) for v in state) + "}"
        return "{" + ",".join(f"{a + 1}-{b + 1}" for a, b in state) + "}"

    @property
    def params_text(self) -> str:
        return ",".join(str(p) for p in self.params)


def _cycles(n: int) -> list:
    out = set()
    for rest in itertools.permutations(range(1, n)):
        if rest[0] > rest[-1]:
            continue
        order = (0,) + rest
        out.add(_canon_edges((order[i], order[(i + 1) % n]) for i in range(n)))
    return sorted(out)


def _matchings(vertices: tuple[int, ...]) -> list:
    if not vertices:
        return [()]
    first, rest = vertices[0], vertices[1:]
    out = []
    for j, partner in enumerate(rest):
        remaining = rest[:j] + rest[j + 1:]
        for m in _matchings(remaining):
            out.append(((first, partner),) + m)
    return out


def state_space(kind: str, n: int, params=(), max_n: int | None = None) -> StateSpace:
    """Enumerate the states of a process on ``n`` vertices in canonical order."""
    kind = kind.upper()
    params = tuple(params) if not isinstance(params, int) else (params,)
    if kind == RW:
        states = tuple(range(n))
    elif kind == IP:
        check_size(n, max_n, "interchange process")
        states = tuple(tuple(int(v) for v in row) for row in all_images(n))
    elif kind == EP:
        if len(params) != 1:
            raise BadParticleCount("exclusion process needs one particle count")
        k = int(params[0])
        if not 1 <= k <= n - 1:
            raise BadParticleCount(f"particle count must be in 1..{n - 1}, got {k}")
        # colexicographic: compare the largest elements first
        states = tuple(sorted(itertools.combinations(range(n), k), key=lambda c: c[::-1]))
    elif kind == CEP:
        counts = tuple(int(c) for c in params)
        if len(counts) < 2 or any(c < 1 for c in counts) or sum(counts) != n:
            raise BadColorCounts(f"need r >= 2 positive counts summing to {n}, got {counts}")
        check_size(n, max_n, "colored exclusion process")
        word = tuple(i for i, c in enumerate(counts) for _ in range(c))
        states = tuple(sorted(set(itertools.permutations(word))))
        params = counts
    elif kind == CP:
        if n < 4:
            raise TooSmall(f"cycle process needs n >= 4, got {n}")
        if n > 8:
            raise SizeLimit(f"cycle process limited to n <= 8, got {n}")
        states = tuple(_cycles(n))
    elif kind == MP:
        if n % 2 or n < 4:
            raise OddVertexCount(f"matching process needs even n >= 4, got {n}")
        if n > 10:
            raise SizeLimit(f"matching process limited to n <= 10, got {n}")
        states = tuple(_matchings(tuple(range(n))))
    else:
        raise ValueError(f"unknown process kind {kind!r}")
    return StateSpace(kind, n, params, states)


def expected_size(kind: str, n: int, params=()) -> int:
    kind = kind.upper()
    if kind == RW:
        return n
    if kind == IP:
        return math.factorial(n)
    if kind == EP:
        return math.comb(n, params[0])
    if kind == CEP:
        out = math.factorial(n)
        for c in params:
            out //= math.factorial(c)
        return out
    if kind == CP:
        return math.factorial(n - 1) // 2
    if kind == MP:
        k = n // 2
        return math.factorial(2 * k) // (2 ** k * math.factorial(k))
    raise ValueError(kind)


@dataclass(frozen=True, eq=False)
class Generator:
    """Symmetric rate matrix ``Q`` (rows sum to zero) over an enumerated state space."""

    space: StateSpace
    Q: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = np.array(self.Q, dtype=np.float64)
        q.setflags(write=False)
        object.__setattr__(self, "Q", q)

    @property
    def kind(self) -> str:
        return self.space.kind

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def spectrum(self, tol=None):
        from .spectra import DEFAULT_TOL, spectrum_of
        return spectrum_of(self, tol or DEFAULT_TOL)

    def gap(self, tol=None) -> float:
        from .spectra import DEFAULT_TOL, spectral_gap
        return spectral_gap(self, tol or DEFAULT_TOL)


def _finish(off_diag: np.ndarray) -> np.ndarray:
    np.fill_diagonal(off_diag, 0.0)
    off_diag[np.diag_indices_from(off_diag)] = -off_diag.sum(axis=1)
    return off_diag


def _build_generic(g: WeightedGraph, space: StateSpace) -> Generator:
    m = len(space)
    Q = np.zeros((m, m))
    edges = g.edges()
    for i, s in enumerate(space.states):
        for x, y, c in edges:
            t = space.step(s, x, y)
            if t != s:
                Q[i, space.rank(t)] += c
    return Generator(space, _finish(Q))


def build_rw(g: WeightedGraph) -> Generator:
    return Generator(state_space(RW, g.n), _finish(np.array(g.weights, dtype=np.float64)))


def build_ip(g: WeightedGraph, max_n: int | None = None) -> Generator:
    space = state_space(IP, g.n, max_n=max_n)
    imgs = all_images(g.n)
    m = len(imgs)
    rows = np.arange(m)
    Q = np.zeros((m, m))
    for x, y, c in g.edges():
        swapped = imgs.copy()
        swapped[:, [x, y]] = swapped[:, [y, x]]
        Q[rows, rank_array(swapped)] += c
    return Generator(space, _finish(Q))


def build_ep(g: WeightedGraph, k: int) -> Generator:
    return _build_generic(g, state_space(EP, g.n, (k,)))


def build_cep(g: WeightedGraph, counts, max_n: int | None = None) -> Generator:
    return _build_generic(g, state_space(CEP, g.n, tuple(counts), max_n=max_n))


def build_cycle(g: WeightedGraph) -> Generator:
    return _build_generic(g, state_space(CP, g.n))


def build_matching(g: WeightedGraph) -> Generator:
    return _build_generic(g, state_space(MP, g.n))


def build(g: WeightedGraph, kind: str, params=(), max_n: int | None = None) -> Generator:
    kind = kind.upper()
    if kind == RW:
        return build_rw(g)
    if kind == IP:
        return build_ip(g, max_n)
    if kind == EP:
        return build_ep(g, params[0] if not isinstance(params, int) else params)
    if kind == CEP:
        return build_cep(g, params, max_n)
    if kind == CP:
        return build_cycle(g)
    if kind == MP:
        return build_matching(g)
    raise ValueError(f"unknown process kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ContractionMap:
    source: StateSpace
    target: StateSpace
    lift: np.ndarray = field(repr=False)

    def image(self, i: int) -> int:
        return int(np.flatnonzero(self.lift[i])[0])

    def fiber_sizes(self) -> np.ndarray:
        return self.lift.sum(axis=0)


def _projection(source: StateSpace, target: StateSpace):
    n = source.n
    if source.kind == target.kind and source.params == target.params:
        return lambda s: s
    if source.kind == IP:
        def positions(eta):
            xi = [0] * n
            for x, label in enumerate(eta):
                xi[label] = x
            return xi

        if target.kind == RW:
            return lambda eta: positions(eta)[0]
        if target.kind == EP:
            k = target.params[0]
            return lambda eta: tuple(sorted(positions(eta)[:k]))
        if target.kind == CEP:
            colour = [i for i, c in enumerate(target.params) for _ in range(c)]
            return lambda eta: tuple(colour[label] for label in eta)
        if target.kind == CP:
            def to_cycle(eta):
                xi = positions(eta)
                return _canon_edges((xi[i], xi[(i + 1) % n]) for i in range(n))
            return to_cycle
        if target.kind == MP:
            k = n // 2

            def to_matching(eta):
                xi = positions(eta)
                return _canon_edges((xi[i], xi[i + k]) for i in range(k))
            return to_matching
    if source.kind == CEP and target.kind == EP and target.params[0] == source.params[0]:
        return lambda word: tuple(x for x, colour in enumerate(word) if colour == 0)
    raise IncompatibleKinds(f"no contraction {source.kind}{source.params} -> {target.kind}{target.params}")


def contraction(source: StateSpace, target: StateSpace) -> ContractionMap:
    """Lift matrix ``P[s1, s2] = 1`` iff ``pi(s1) = s2`` for the natural contraction."""
    if source.n != target.n:
        raise IncompatibleKinds("state spaces live on different vertex sets")
    pi = _projection(source, target)
    P = np.zeros((len(source), len(target)), dtype=np.int8)
    for i, s in enumerate(source.states):
        P[i, target.rank(pi(s))] = 1
    P.setflags(write=False)
    return ContractionMap(source, target, P)


def verify_intertwining(q1: Generator, q2: Generator, p: ContractionMap) -> float:
    """``max |Q1 P - P Q2|``; zero up to rounding when ``p`` is a contraction."""
    P = p.lift.astype(np.float64)
    if q1.Q.shape[0] != P.shape[0] or q2.Q.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"Q1 {q1.Q.shape}, P {P.shape}, Q2 {q2.Q.shape} do not chain")
    return float(np.max(np.abs(q1.Q @ P - P @ q2.Q)))


def lift_rw_eigenfunction(f, k: int, n: int) -> np.ndarray:
    """``g(zeta) = sum_{x in zeta} f(x)`` on the k-particle exclusion states."""
    space = state_space(EP, n, (k,))
    f = np.asarray(f, dtype=np.float64)
    return np.array([f[list(s)].sum() for s in space.states])


def dump_generator(gen: Generator) -> str:
    """Matrix-market style dump: header comments, size line, then 1-based ``row col value`` triples."""
    sp = gen.space
    lines = ["%%MatrixMarket matrix coordinate real symmetric",
             f"% kind {sp.kind}", f"% n {sp.n}", f"% params {sp.params_text}"]
    lines += [f"% state {i + 1} {sp.label(s)}" for i, s in enumerate(sp.states)]
    rows, cols = np.nonzero(np.tril(gen.Q))
    lines.append(f"{gen.dim} {gen.dim} {len(rows)}")
    lines += [f"{r + 1} {c + 1} {float(gen.Q[r, c])!r}" for r, c in zip(rows, cols)]
    return "\n".join(lines) + "\n"


def load_matrix_dump(text: str) -> tuple[dict, np.ndarray]:
    """Parse a ``dump_generator`` document back into ``(header, Q)``."""
    header: dict = {"states": []}
    body = []
    for line in text.splitlines():
        if line.startswith("%%"):
            continue
        if line.startswith("%"):
            key, _, value = line[1:].strip().partition(" ")
            if key == "state":
                header["states"].append(value.split(" ", 1)[1])
            else:
                header[key] = value
        elif line.strip():
            body.append(line.split())
    nrows, ncols, _ = (int(t) for t in body[0])
    Q = np.zeros((nrows, ncols))
    for r, c, v in body[1:]:
        Q[int(r) - 1, int(c) - 1] = Q[int(c) - 1, int(r) - 1] = float(v)
    return header, Q
