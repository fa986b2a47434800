"""Permutations of {0..n-1} in one-line form.

Composition is functional: ``(a @ b)(i) == a(b(i))``. An interchange state ``eta``
maps vertices to labels, so swapping the labels at ``x`` and ``y`` is ``eta @ transpose(x, y, n)``.
Orderings everywhere follow the Lehmer rank, which coincides with lexicographic
order of the image tuples.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SizeLimit, SizeMismatch
from .limits import HARD_MAX_N

IDENTITY = "identity"
TWO_TWO_CYCLES = "two_two_cycles"
THREE_CYCLE = "three_cycle"
OTHER = "other"


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a bijection of 0..{len(images) - 1}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __matmul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def inverse(self) -> Permutation:
        return inverse(self)

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = []
            i = start
            while not seen[i]:
                seen[i] = True
                cyc.append(i)
                i = self.images[i]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        """Lengths of the nontrivial cycles, descending."""
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def support(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.images) if i != v)

    def parity(self) -> int:
        """+1 for even, -1 for odd."""
        return parity(self)

    @property
    def is_even(self) -> bool:
        return parity(self) == 1

    def rank(self) -> int:
        return lehmer_rank(self)

    def __str__(self):
        return to_cycle_string(self)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(n)))


def _check_sizes(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise SizeMismatch(f"permutation sizes differ: {a.n} vs {b.n}")


def compose(a: Permutation, b: Permutation) -> Permutation:
    _check_sizes(a, b)
    return Permutation(tuple(a.images[i] for i in b.images))


def inverse(a: Permutation) -> Permutation:
    inv = [0] * a.n
    for i, v in enumerate(a.images):
        inv[v] = i
    return Permutation(tuple(inv))


def transpose(x: int, y: int, n: int) -> Permutation:
    if x == y:
        raise ValueError("transposition needs two distinct points")
    images = list(range(n))
    images[x], images[y] = y, x
    return Permutation(tuple(images))


def parity(a: Permutation) -> int:
    n_cycles = len(a.cycles(include_fixed=True))
    return 1 if (a.n - n_cycles) % 2 == 0 else -1


def lehmer_code(a: Permutation) -> list[int]:
    imgs = a.images
    return [sum(1 for j in range(i + 1, a.n) if imgs[j] < imgs[i]) for i in range(a.n)]


def lehmer_rank(a: Permutation) -> int:
    code = lehmer_code(a)
    r = 0
    for i, d in enumerate(code):
        r = r * (a.n - i) + d
    return r


def lehmer_unrank(r: int, n: int) -> Permutation:
    if not 0 <= r < math.factorial(n):
        raise ValueError(f"rank {r} out of range for n={n}")
    code = []
    for base in range(1, n + 1):
        code.append(r % base)
        r //= base
    code.reverse()
    pool = list(range(n))
    return Permutation(tuple(pool.pop(d) for d in code))


def _check_enum_size(n: int) -> None:
    if n > HARD_MAX_N:
        raise SizeLimit(f"full enumeration limited to n <= {HARD_MAX_N}, got {n}")
    if n < 1:
        raise ValueError("n must be positive")


@lru_cache(maxsize=None)
def all_images(n: int) -> np.ndarray:
    """All of S_n as an (n!, n) int array in Lehmer order."""
    _check_enum_size(n)
    arr = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def parities(n: int) -> np.ndarray:
    """Sign of every permutation of S_n, in Lehmer order."""
    arr = all_images(n)
    # inversion count parity
    inv = np.zeros(len(arr), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            inv += arr[:, i] > arr[:, j]
    out = np.where(inv % 2 == 0, 1, -1)
    out.setflags(write=False)
    return out


def rank_array(images: np.ndarray) -> np.ndarray:
    """Vectorised Lehmer rank for a stack of one-line permutations."""
    images = np.asarray(images)
    m, n = images.shape
    ranks = np.zeros(m, dtype=np.int64)
    for i in range(n):
        smaller_after = (images[:, i + 1:] < images[:, i:i + 1]).sum(axis=1)
        ranks = ranks * (n - i) + smaller_after
    return ranks


def enumerate_all(n: int) -> list[Permutation]:
    return [Permutation(tuple(row)) for row in all_images(n)]


def enumerate_even(n: int) -> list[Permutation]:
    """Even permutations in ascending Lehmer rank; there are n!/2 of them for n >= 2."""
    if n < 2:
        raise ValueError("n must be at least 2")
    imgs = all_images(n)
    return [Permutation(tuple(row)) for row in imgs[parities(n) == 1]]


def even_fixing(n: int, points) -> list[Permutation]:
    """Even permutations of {0..n-1} that move only ``points`` (the alternating group on them)."""
    points = sorted(set(points))
    out = []
    for perm in itertools.permutations(points):
        images = list(range(n))
        for p, q in zip(points, perm):
            images[p] = q
        sigma = Permutation(tuple(images))
        if sigma.is_even:
            out.append(sigma)
    return sorted(out, key=lehmer_rank)


@dataclass(frozen=True)
class RelativeClass:
    tag: str
    support: frozenset[int]


def classify_relative(a: Permutation, b: Permutation, J) -> RelativeClass:
    """Classify ``a^-1 b``: identity, two disjoint 2-cycles inside J, a 3-cycle inside J, or other."""
    _check_sizes(a, b)
    J = frozenset(J)
    if len(J) not in (3, 4):
        raise ValueError("J must have 3 or 4 elements")
    g = inverse(a) @ b
    supp = g.support()
    if not supp:
        return RelativeClass(IDENTITY, supp)
    if supp <= J:
        ct = g.cycle_type()
        if ct == (2, 2):
            return RelativeClass(TWO_TWO_CYCLES, supp)
        if ct == (3,):
            return RelativeClass(THREE_CYCLE, supp)
    return RelativeClass(OTHER, supp)


@dataclass(frozen=True)
class CosetPartition:
    """Left cosets ``eta * sub``; blocks hold Lehmer ranks in S_n."""

    blocks: tuple[tuple[int, ...], ...]
    representatives: tuple[int, ...]

    def block_of(self) -> dict[int, int]:
        return {r: b for b, block in enumerate(self.blocks) for r in block}

    def ordering(self, ambient) -> list[int]:
        """Positions in ``ambient`` listed block by block."""
        pos = {p.rank(): i for i, p in enumerate(ambient)}
        return [pos[r] for block in self.blocks for r in block]


def left_cosets(ambient, sub) -> CosetPartition:
    """Partition ``ambient`` into left cosets ``eta * sub``.

    Each block lists ``rep @ s`` for ``s`` in ascending-rank order of ``sub``, so
    equal-shaped blocks line up entry by entry; ``rep`` is the block's least rank.
    """
    ambient = list(ambient)
    sub = sorted(sub, key=lehmer_rank)
    if sub[0].support():
        raise ValueError("subgroup must contain the identity")
    ambient_ranks = {p.rank() for p in ambient}
    assigned: set[int] = set()
    blocks = []
    for eta in sorted(ambient, key=lehmer_rank):
        if eta.rank() in assigned:
            continue
        block = tuple((eta @ s).rank() for s in sub)
        if not set(block) <= ambient_ranks:
            raise ValueError("subgroup does not act inside the ambient set")
        assigned.update(block)
        blocks.append(block)
    return CosetPartition(blocks=tuple(blocks), representatives=tuple(b[0] for b in blocks))


def from_cycles(cycles, n: int) -> Permutation:
    images = list(range(n))
    for cyc in cycles:
        for i, p in enumerate(cyc):
            images[p] = cyc[(i + 1) % len(cyc)]
    return Permutation(tuple(images))


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, n: int) -> Permutation:
    """Parse cycle notation like ``(0 1)(2 3)``, ``(0,1,2)`` or compact ``(012)``."""
    cycles = []
    stripped = text.replace(" ", "")
    if stripped in ("", "()", "id"):
        return Permutation.identity(n)
    for body in _CYCLE_RE.findall(text):
        body = body.strip()
        if re.search(r"[\s,]", body):
            pts = [int(t) for t in re.split(r"[\s,]+", body) if t]
        else:
            pts = [int(ch) for ch in body]
        if any(not 0 <= p < n for p in pts):
            raise ValueError(f"cycle {body!r} has points outside 0..{n - 1}")
        cycles.append(pts)
    return from_cycles(cycles, n)


def parse_one_line(text: str) -> Permutation:
    return Permutation(tuple(int(t) for t in re.findall(r"-?\d+", text)))


def to_cycle_string(a: Permutation) -> str:
    cycles = a.cycles()
    if not cycles:
        return "()"
    return "".join("(" + " ".join(str(i) for i in c) + ")" for c in cycles)


# Klein four-groups used in the block arguments for A and B.
KLEIN_H = tuple(parse_cycles(s, 4) for s in ("()", "(0 1)(2 3)", "(0 2)(1 3)", "(0 3)(1 2)"))
KLEIN_H0 = tuple(parse_cycles(s, 5) for s in ("()", "(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"))
