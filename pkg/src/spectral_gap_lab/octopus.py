"""Matrix machinery behind the star-versus-complement comparison inequality.

The reduction vertex is always vertex 0 here. Star rates ``c_1..c_{n-1}`` are the
conductances from 0, ``c_0 = -sum c_i``, and ``cc = sum c_i^2 + sum_{i<j} c_i c_j``.
``C`` lives on all of S_n; ``X``, the correction matrix and the rate-free integer
matrices ``A^J`` and ``B^K`` live on the even permutations.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .errors import BadSubset, SizeLimit
from .graph import WeightedGraph
from .limits import check_size
from .perm import (
    KLEIN_H,
    KLEIN_H0,
    OTHER,
    THREE_CYCLE,
    CosetPartition,
    Permutation,
    all_images,
    classify_relative,
    enumerate_even,
    even_fixing,
    left_cosets,
    parities,
    parse_cycles,
    rank_array,
)
from .report import CheckResult
from .spectra import DEFAULT_TOL, Spectrum, Tolerances, eigvals_sym, is_psd


@dataclass(frozen=True, eq=False)
class RateSystem:
    n: int
    c: np.ndarray  # c_1 .. c_{n-1}

    def __post_init__(self):
        c = np.array(self.c, dtype=np.float64).ravel()
        if self.n < 2 or len(c) != self.n - 1:
            raise ValueError(f"need n >= 2 and n-1 rates, got n={self.n}, {len(c)} rates")
        if np.any(c < 0) or not np.all(np.isfinite(c)):
            raise ValueError("rates must be finite and nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_rates(cls, rates) -> RateSystem:
        rates = np.asarray(rates, dtype=np.float64).ravel()
        return cls(len(rates) + 1, rates)

    @classmethod
    def from_graph(cls, g: WeightedGraph, x: int) -> RateSystem:
        """Star rates at ``x``; the remaining vertices keep their relative order as 1..n-1."""
        x = g.check_vertex(x)
        return cls.from_rates([g.weights[x, v] for v in range(g.n) if v != x])

    @property
    def c0(self) -> float:
        return -float(self.c.sum())

    @property
    def cc(self) -> float:
        c = self.c
        return float(np.sum(c * c) + 0.5 * (c.sum() ** 2 - np.sum(c * c)))

    @property
    def full(self) -> np.ndarray:
        """``(c_0, c_1, ..., c_{n-1})``."""
        return np.concatenate([[self.c0], self.c])

    def c_J(self, J) -> float:
        full = self.full
        return float(np.prod([full[i] for i in J]))

    def pair_rate(self, i: int, j: int) -> float:
        full = self.full
        return float(full[i] * full[j])


def _parity_basis(n: int) -> np.ndarray:
    """Lehmer ranks ordered: even ascending, then odd ascending."""
    par = parities(n)
    ranks = np.arange(len(par))
    return np.concatenate([ranks[par == 1], ranks[par == -1]])


@dataclass(frozen=True, eq=False)
class OctopusMatrices:
    rates: RateSystem
    C: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Cprime: np.ndarray = field(repr=False)
    basis: np.ndarray = field(repr=False)  # Lehmer rank of each basis position

    @property
    def half(self) -> int:
        return self.C.shape[0] // 2

    def c_tilde(self) -> np.ndarray:
        """The PSD part ``[[X^t X / cc, X^t], [X, cc I]]``; undefined when all rates vanish."""
        cc = self.rates.cc
        X = self.X
        h = self.half
        out = np.empty_like(self.C)
        out[:h, :h] = X.T @ X / cc
        out[:h, h:] = X.T
        out[h:, :h] = X
        out[h:, h:] = cc * np.eye(h)
        return out

    def to_basis(self, f) -> np.ndarray:
        """Reorder a function indexed by Lehmer rank into the parity basis."""
        return np.asarray(f, dtype=np.float64)[self.basis]


def build_C(r: RateSystem, max_n: int | None = None) -> OctopusMatrices:
    n = r.n
    check_size(n, max_n, "octopus matrix C")
    imgs = all_images(n)
    basis = _parity_basis(n)
    pos = np.empty(len(basis), dtype=np.int64)
    pos[basis] = np.arange(len(basis))
    m = len(basis)
    C = np.zeros((m, m))
    rows = pos[np.arange(m)]
    for i, j in itertools.combinations(range(n), 2):
        swapped = imgs.copy()
        swapped[:, [i, j]] = swapped[:, [j, i]]
        C[rows, pos[rank_array(swapped)]] = r.pair_rate(i, j)
    C[np.diag_indices(m)] = r.cc
    h = m // 2
    X = C[h:, :h].copy()
    Cprime = r.cc ** 2 * np.eye(h) - X.T @ X
    for a in (C, X, Cprime):
        a.setflags(write=False)
    return OctopusMatrices(r, C, X, Cprime, basis)


def build_C_exact(rates) -> tuple[list, list, list]:
    """``(C, X, C')`` as nested lists of ``Fraction`` for small n; exact arithmetic throughout."""
    rates = [Fraction(c) for c in rates]
    n = len(rates) + 1
    if n > 5:
        raise SizeLimit("exact construction is meant for n <= 5")
    full = [-sum(rates)] + rates
    cc = sum(c * c for c in rates) + sum(a * b for a, b in itertools.combinations(rates, 2))
    perms = [tuple(p) for p in itertools.permutations(range(n))]
    evens = [p for p in perms if Permutation(p).is_even]
    odds = [p for p in perms if not Permutation(p).is_even]
    order = evens + odds
    pos = {p: k for k, p in enumerate(order)}
    m = len(order)
    C = [[Fraction(0)] * m for _ in range(m)]
    for k, eta in enumerate(order):
        C[k][k] = cc
        for i, j in itertools.combinations(range(n), 2):
            nxt = list(eta)
            nxt[i], nxt[j] = nxt[j], nxt[i]
            C[k][pos[tuple(nxt)]] = full[i] * full[j]
    h = m // 2
    X = [row[:h] for row in C[h:]]
    Cp = [[(cc * cc if a == b else 0) - sum(X[k][a] * X[k][b] for k in range(h))
           for b in range(h)] for a in range(h)]
    return C, X, Cp


def _gradient_energy(f: np.ndarray, n: int, i: int, j: int) -> float:
    """``nu[(grad_ij f)^2]`` for f indexed by Lehmer rank."""
    imgs = all_images(n)
    swapped = imgs.copy()
    swapped[:, [i, j]] = swapped[:, [j, i]]
    d = f[rank_array(swapped)] - f
    return float(np.mean(d * d))


def star_residual(star, f, x: int = 0) -> float:
    """Star energy minus mesh energy for star conductances ``star`` around vertex ``x``.

    ``star[k]`` is the rate from ``x`` to the k-th other vertex in increasing order.
    """
    f = np.asarray(f, dtype=np.float64)
    n = len(star) + 1
    if len(f) != math.factorial(n):
        raise ValueError(f"f must have {math.factorial(n)} entries")
    others = [v for v in range(n) if v != x]
    star = np.asarray(star, dtype=np.float64)
    total = star.sum()
    lhs = sum(c * _gradient_energy(f, n, x, y) for c, y in zip(star, others) if c > 0)
    rhs = 0.0
    if total > 0:
        for a, b in itertools.combinations(range(n - 1), 2):
            w = star[a] * star[b] / total
            if w > 0:
                rhs += w * _gradient_energy(f, n, others[a], others[b])
    return lhs - rhs


def octopus_residual(g: WeightedGraph, x: int, f, max_n: int | None = None) -> float:
    """Left side minus right side of the octopus inequality; nonnegative in theory."""
    x = g.check_vertex(x)
    check_size(g.n, max_n, "octopus residual")
    star = [g.weights[x, v] for v in range(g.n) if v != x]
    return star_residual(star, f, x)


def quadratic_form_identity(r: RateSystem, f, max_n: int | None = None) -> float:
    """``|n! (-c_0) residual - 2 f^t C f|`` with the residual evaluated by gradients."""
    check_size(r.n, max_n, "octopus identity")
    f = np.asarray(f, dtype=np.float64)
    mats = build_C(r, max_n)
    fb = mats.to_basis(f)
    quad = float(fb @ mats.C @ fb)
    lhs = math.factorial(r.n) * (-r.c0) * star_residual(r.c, f, 0)
    return abs(lhs - 2.0 * quad)


# -- rate-free integer matrices ------------------------------------------------


@dataclass(frozen=True, eq=False)
class CosetBlockMatrix:
    n: int
    subset: tuple[int, ...]
    M: np.ndarray = field(repr=False)
    partition: CosetPartition = field(repr=False)
    ambient: tuple[Permutation, ...] = field(repr=False)

    def blocked(self) -> np.ndarray:
        order = self.partition.ordering(self.ambient)
        return self.M[np.ix_(order, order)]

    def block_structure(self) -> tuple[bool, bool]:
        """``(off-diagonal coset blocks all zero, all diagonal blocks equal)``."""
        b = self.blocked()
        size = len(self.partition.blocks[0])
        k = len(self.partition.blocks)
        first = b[:size, :size]
        off_zero = True
        diag_equal = True
        for i in range(k):
            for j in range(k):
                blk = b[i * size:(i + 1) * size, j * size:(j + 1) * size]
                if i == j:
                    diag_equal &= bool(np.array_equal(blk, first))
                else:
                    off_zero &= not np.any(blk)
        return off_zero, diag_equal

    def diagonal_block(self) -> np.ndarray:
        size = len(self.partition.blocks[0])
        return self.blocked()[:size, :size]


def _even_index(n: int) -> tuple[list[Permutation], np.ndarray]:
    evens = enumerate_even(n)
    lookup = np.full(math.factorial(n), -1, dtype=np.int64)
    lookup[[p.rank() for p in evens]] = np.arange(len(evens))
    return evens, lookup


def _a_weight(sigma: Permutation, J) -> int:
    tag = classify_relative(Permutation.identity(sigma.n), sigma, J).tag
    return {OTHER: 0, THREE_CYCLE: -1}.get(tag, 2)


def _check_subset(n: int, S, size: int, need_zero: bool = False) -> tuple[int, ...]:
    S = tuple(sorted(set(int(i) for i in S)))
    if len(S) != size or any(not 0 <= i < n for i in S):
        raise BadSubset(f"need a {size}-subset of 0..{n - 1}, got {S}")
    if need_zero and 0 not in S:
        raise BadSubset(f"subset {S} must contain vertex 0")
    return S


def build_AJ(n: int, J, max_n: int | None = None) -> CosetBlockMatrix:
    """Integer matrix on even permutations: 2 on the diagonal and for double transpositions
    inside J, -1 for 3-cycles inside J, 0 elsewhere (all relative to ``eta^-1 eta'``)."""
    if n < 4:
        raise SizeLimit("A^J needs n >= 4")
    check_size(n, max_n, "A^J")
    J = _check_subset(n, J, 4)
    evens, lookup = _even_index(n)
    imgs = np.array([p.images for p in evens], dtype=np.int64)
    sub = even_fixing(n, J)
    M = np.zeros((len(evens), len(evens)), dtype=np.int64)
    rows = np.arange(len(evens))
    for sigma in sub:
        # column of eta∘sigma
        cols = lookup[rank_array(imgs[:, list(sigma.images)])]
        M[rows, cols] = _a_weight(sigma, J)
    M.setflags(write=False)
    return CosetBlockMatrix(n, J, M, left_cosets(evens, sub), tuple(evens))


def build_AJ_pairwise(n: int, J) -> np.ndarray:
    """Slow reference: classify every pair of even permutations directly."""
    J = _check_subset(n, J, 4)
    evens = enumerate_even(n)
    weight = {"identity": 2, "two_two_cycles": 2, THREE_CYCLE: -1, OTHER: 0}
    return np.array([[weight[classify_relative(a, b, J).tag] for b in evens] for a in evens],
                    dtype=np.int64)


def epsilon(J) -> int:
    """Sign of ``-c_J``: +1 when J contains the reduction vertex 0."""
    return 1 if 0 in J else -1


def build_BK(n: int, K, max_n: int | None = None) -> CosetBlockMatrix:
    if n < 5:
        raise SizeLimit("B^K needs n >= 5")
    K = _check_subset(n, K, 5, need_zero=True)
    total = None
    for J in itertools.combinations(K, 4):
        term = epsilon(J) * build_AJ(n, J, max_n).M
        total = term if total is None else total + term
    total.setflags(write=False)
    evens = enumerate_even(n)
    return CosetBlockMatrix(n, K, total, left_cosets(evens, even_fixing(n, K)), tuple(evens))


def corr_decomposition_sum(r: RateSystem, max_n: int | None = None) -> np.ndarray:
    """``sum_{|J|=4} (-c_J) A^J(n)``; the zero matrix for n <= 3."""
    n = r.n
    h = math.factorial(n) // 2
    out = np.zeros((h, h))
    if n < 4:
        return out
    for J in itertools.combinations(range(n), 4):
        out += -r.c_J(J) * build_AJ(n, J, max_n).M
    return out


def verify_corr_decomposition(r: RateSystem, max_n: int | None = None) -> float:
    """Max entrywise gap between the correction matrix and its rate-product expansion."""
    mats = build_C(r, max_n)
    return float(np.max(np.abs(mats.Cprime - corr_decomposition_sum(r, max_n))))


def coefficient_margins(r: RateSystem) -> dict:
    """For each 4-subset J: ``(sum_{K > J, 0 in K, |K|=5} eps_J |c_K| / |c_0|, -c_J)``."""
    n = r.n
    c0 = abs(r.c0)
    out = {}
    for J in itertools.combinations(range(n), 4):
        lhs = 0.0
        if c0 > 0:
            for i in range(n):
                K = set(J) | {i}
                if i in J or 0 not in K:
                    continue
                lhs += epsilon(J) * abs(r.c_J(K)) / c0
        out[J] = (lhs, -r.c_J(J))
    return out


def verify_coefficient_bound(r: RateSystem, rtol: float = 1e-12):
    """``(all bounds hold, J with the smallest slack)``.

    When 0 is not in J the bound is an equality and is checked as such.
    """
    if r.n < 5:
        raise SizeLimit("coefficient bound is stated for n >= 5")
    margins = coefficient_margins(r)
    scale = max(1.0, max(abs(v) for pair in margins.values() for v in pair))
    ok = True
    worst, worst_slack = None, math.inf
    for J, (lhs, rhs) in margins.items():
        slack = rhs - lhs
        if slack < -rtol * scale:
            ok = False
        if 0 not in J and abs(slack) > rtol * scale:
            ok = False
        if slack < worst_slack:
            worst, worst_slack = J, slack
    return ok, worst


# -- named matrices and their exact facts -----------------------------------


def matrix_A() -> CosetBlockMatrix:
    return build_AJ(4, (0, 1, 2, 3))


def matrices_A5() -> list[np.ndarray]:
    """``A^(i) = A^{{0..4} minus i}(5)`` for i = 0..4."""
    full = set(range(5))
    return [build_AJ(5, tuple(sorted(full - {i}))).M for i in range(5)]


def matrix_B() -> CosetBlockMatrix:
    return build_BK(5, (0, 1, 2, 3, 4))


def klein_ordering() -> list[int]:
    """Positions of the even permutations of 4 points grouped by left cosets of the Klein group."""
    evens = enumerate_even(4)
    return left_cosets(evens, KLEIN_H).ordering(evens)


def a4_block_form() -> np.ndarray:
    """``3 blockdiag(E_4, E_4, E_4) - E_12``."""
    return 3 * np.kron(np.eye(3, dtype=np.int64), np.ones((4, 4), dtype=np.int64)) \
        - np.ones((12, 12), dtype=np.int64)


def spectrum_matches(values, expected: dict, tol: Tolerances = DEFAULT_TOL,
                     cluster_abs: float = 1e-8) -> tuple[bool, float]:
    """Cluster ``values`` and compare to ``{value: multiplicity}``; also return max eigenvalue error."""
    spec = Spectrum.from_values(values, tol, cluster_abs=cluster_abs)
    got = {round(v): m for v, m in spec.clusters}
    err = max(min(abs(v - e) for e in expected) for v in spec.values)
    return got == expected and len(spec.clusters) == len(expected), float(err)


def coset_sums_B(B: np.ndarray) -> np.ndarray:
    """``sum_{s in H0} B[id, eta' s]`` for every even ``eta'`` of 5 points."""
    evens, lookup = _even_index(5)
    id_row = B[lookup[0]]
    out = np.zeros(len(evens), dtype=np.int64)
    for k, eta in enumerate(evens):
        out[k] = sum(id_row[lookup[(eta @ s).rank()]] for s in KLEIN_H0)
    return out


def coset_contributions(B: np.ndarray, eta: Permutation) -> list[int]:
    evens, lookup = _even_index(5)
    id_row = B[lookup[0]]
    return sorted((int(id_row[lookup[(eta @ s).rank()]]) for s in KLEIN_H0), reverse=True)


def verify_matrix_facts(n: int, tol: Tolerances = DEFAULT_TOL) -> list[CheckResult]:
    """Exact facts about A (n=4) and additionally B (n=5), as check results."""
    if n not in (4, 5):
        raise ValueError("matrix facts are stated for n = 4 and n = 5")
    checks = []
    A = matrix_A()
    ok, err = spectrum_matches(eigvals_sym(A.M.astype(float), tol), {0: 10, 12: 2}, tol)
    checks.append(CheckResult.measure(
        "A.spectrum", err if ok else math.inf, 1e-9,
        "eigenvalues 0 x10 and 12 x2" if ok else "multiplicities differ",
        "spectrum of A"))
    order = klein_ordering()
    diff = np.abs(A.M[np.ix_(order, order)] - a4_block_form()).max()
    checks.append(CheckResult.measure("A.klein_block_form", diff, 0,
                                      "A = 3 blockdiag(E4,E4,E4) - E12", "block form of A"))
    checks.append(CheckResult.measure("A.trace", abs(int(np.trace(A.M)) - 24), 0,
                                      f"trace {int(np.trace(A.M))}", "diagonal of A is 2"))
    if n == 4:
        return checks

    As = matrices_A5()
    B = matrix_B().M
    ok, err = spectrum_matches(eigvals_sym(B.astype(float), tol), {0: 45, 24: 15}, tol)
    checks.append(CheckResult.measure(
        "B.spectrum", err if ok else math.inf, 1e-9,
        "eigenvalues 0 x45 and 24 x15" if ok else "multiplicities differ", "spectrum of B"))
    checks.append(CheckResult.measure("B.trace", abs(int(np.trace(B)) - 360), 0,
                                      f"trace {int(np.trace(B))}", "trace of B"))
    combo = As[1] + As[2] + As[3] + As[4] - As[0]
    checks.append(CheckResult.measure("B.definition", np.abs(B - combo).max(), 0,
                                      "B = A1+A2+A3+A4-A0", "signed sum of A^J"))
    checks.append(CheckResult.measure("B.annihilates_A0", np.abs(B @ As[0]).max(), 0,
                                      "B A0 = 0", "B vanishes on the image of A0"))
    worst = max(int(np.abs(Ai @ Ai - 12 * Ai).max()) for Ai in As)
    checks.append(CheckResult.measure("A_i.idempotent", worst, 0,
                                      "(A_i)^2 = 12 A_i for i=0..4", "A_i / 12 is a projection"))
    Bp = sum(As)
    checks.append(CheckResult.measure("B_plus.idempotent", np.abs(Bp @ Bp - 24 * Bp).max(), 0,
                                      "(B+)^2 = 24 B+", "B+ / 24 is a projection"))
    checks.append(CheckResult.measure("B.idempotent", np.abs(B @ B - 24 * B).max(), 0,
                                      "B^2 = 24 B", "B / 24 is a projection"))
    sums = coset_sums_B(B)
    cases = {s: coset_contributions(B, parse_cycles(s, 5)) for s in ("()", "(1 2 3)", "(0 1 2)")}
    checks.append(CheckResult.measure(
        "B.klein_coset_sums", int(np.abs(sums).max()), 0,
        f"all 60 coset sums zero; representative contributions {cases}",
        "B kills indicators of Klein cosets"))
    blocks_ok = all(all(build_AJ(5, J).block_structure()) for J in itertools.combinations(range(5), 4))
    same_as_A = all(np.array_equal(build_AJ(5, J).diagonal_block(), _relabelled_A(J))
                    for J in itertools.combinations(range(5), 4))
    checks.append(CheckResult.measure("A_J.coset_blocks", 0 if blocks_ok and same_as_A else 1, 0,
                                      "5 equal diagonal blocks per J, off-blocks zero",
                                      "coset block structure of A^J"))
    return checks


def _relabelled_A(J) -> np.ndarray:
    """A re-indexed so that it lines up with the identity-coset block of ``A^J(5)``.

    The increasing bijection ``J -> {0,1,2,3}`` conjugates the alternating group on J
    onto the one on four points.
    """
    relabel = {p: i for i, p in enumerate(sorted(J))}
    A = matrix_A()
    pos = {p.rank(): i for i, p in enumerate(A.ambient)}
    idx = []
    for s in even_fixing(5, J):
        images = [relabel[s(p)] for p in sorted(J)]
        idx.append(pos[Permutation(tuple(images)).rank()])
    return A.M[np.ix_(idx, idx)]


# -- sweeps ---------------------------------------------------------------------


def random_rates(rng: np.random.Generator, n: int, zeros: int = 0) -> RateSystem:
    c = 1.0 - rng.random(n - 1)
    if zeros:
        c[rng.choice(n - 1, size=min(zeros, n - 1), replace=False)] = 0.0
    return RateSystem(n, c)


def c_is_psd(r: RateSystem, tol: Tolerances = DEFAULT_TOL, max_n: int | None = None):
    mats = build_C(r, max_n)
    return is_psd(mats.C, tol)


def c_min_eig(mats: OctopusMatrices, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of C through its block form: the spectrum is ``cc +- sigma(X)``."""
    top = float(eigvals_sym(mats.X.T @ mats.X, tol)[-1])
    return mats.rates.cc - math.sqrt(max(top, 0.0))


def schur_split_residual(mats: OctopusMatrices) -> float:
    """``max |(C - C~) - blockdiag(C'/cc, 0)|``."""
    h = mats.half
    target = np.zeros_like(mats.C)
    target[:h, :h] = mats.Cprime / mats.rates.cc
    return float(np.max(np.abs(mats.C - mats.c_tilde() - target)))
