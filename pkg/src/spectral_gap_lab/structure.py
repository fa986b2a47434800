"""Structure of the interchange spectrum and the end-to-end gap verification.

Covers Young diagram bookkeeping (partitions, hook dimensions), subset sums of
random walk eigenvalues inside the interchange spectrum, the conjugate pairing
``lambda + lambda' = 2 sum c``, the subspace H of functions with no single-particle
component and its bottom eigenvalue ``mu``, and the report tying it all together.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import chains
from .errors import InvarianceViolated, SizeLimit, ZeroNotSimple
from .graph import WeightedGraph, reduce_at
from .limits import check_size
from .octopus import RateSystem, build_C, c_min_eig
from .perm import all_images, parities
from .report import CheckResult
from .spectra import DEFAULT_TOL, Tolerances, eigvals_sym, multiset_subset, rw_eigenvalues, spectral_gap

PARTITION_MAX_N = 12
H_RANK_CUTOFF = 1e-10
INVARIANCE_REL = 1e-8


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"{parts} is not a non-increasing sequence of positive integers")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> Partition:
        return Partition(tuple(sum(1 for p in self.parts if p > i) for i in range(self.parts[0] if self.parts else 0)))

    @classmethod
    def hook(cls, n: int, k: int) -> Partition:
        """The L-shaped diagram ``(n-k, 1^k)``."""
        return cls((n - k,) + (1,) * k)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(n: int) -> list[Partition]:
    """All partitions of ``n`` in reverse-lexicographic order, starting from ``(n)``."""
    if n > PARTITION_MAX_N:
        raise SizeLimit(f"partition enumeration limited to n <= {PARTITION_MAX_N}")
    if n < 1:
        raise ValueError("n must be positive")

    def gen(rest: int, cap: int):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in gen(rest - first, first):
                yield (first,) + tail

    return [Partition(p) for p in gen(n, n)]


def hook_dimension(p: Partition) -> int:
    """Dimension of the irreducible representation via the hook length product."""
    parts = p.parts if isinstance(p, Partition) else tuple(p)
    cols = Partition(parts).conjugate().parts
    prod = 1
    for i, row in enumerate(parts):
        for j in range(row):
            prod *= (row - j - 1) + (cols[j] - i - 1) + 1
    return math.factorial(sum(parts)) // prod


class SubsetSumResult(NamedTuple):
    ok: bool
    count: int
    degenerate: bool
    expected: int
    unmatched: list


def subset_sum_multiset(rw_values) -> list[float]:
    """Each k-subset sum of the nonzero RW eigenvalues, repeated ``C(n-1, k)`` times."""
    lam = sorted(rw_values)[1:]
    m = len(lam)
    out = []
    for k in range(m + 1):
        for sub in itertools.combinations(lam, k):
            out.extend([float(sum(sub))] * math.comb(m, k))
    return out


def subset_sum_check(g: WeightedGraph, tol: Tolerances = DEFAULT_TOL,
                     max_n: int | None = None) -> SubsetSumResult:
    """Match all subset sums (with multiplicity) inside the interchange spectrum.

    ``count`` is the number of matched values. The count must reach
    ``C(2(n-1), n-1)`` unless the RW spectrum has a repeated eigenvalue, in which
    case the count requirement is dropped and ``degenerate`` is set.
    """
    check_size(g.n, max_n, "subset-sum check")
    rw = np.sort(rw_eigenvalues(g, tol))
    ip = chains.build_ip(g, max_n).spectrum(tol)
    sums = subset_sum_multiset(rw)
    ok, unmatched = multiset_subset(sums, ip, tol.match_tol(ip.radius))
    count = len(sums) - len(unmatched)
    expected = math.comb(2 * (g.n - 1), g.n - 1)
    gaps = np.diff(rw)
    degenerate = bool(np.any(gaps <= tol.cluster_abs(float(rw[-1]))))
    if not degenerate:
        ok = ok and count == expected
    return SubsetSumResult(ok, count, degenerate, expected, unmatched)


def conjugate_pairing_check(g: WeightedGraph, tol: Tolerances = DEFAULT_TOL,
                            max_n: int | None = None) -> bool:
    """Pair the sorted IP spectrum bottom-to-top; every pair must sum to ``2 sum c``."""
    return conjugate_pairing_defect(g, tol, max_n) <= tol.match_tol(2 * g.total_weight())


def conjugate_pairing_defect(g: WeightedGraph, tol: Tolerances = DEFAULT_TOL,
                             max_n: int | None = None) -> float:
    check_size(g.n, max_n, "pairing check")
    vals = np.array(chains.build_ip(g, max_n).spectrum(tol).values)
    return float(np.max(np.abs(vals + vals[::-1] - 2 * g.total_weight())))


def sign_eigen_residual(g: WeightedGraph, max_n: int | None = None) -> float:
    """``||(-L)h - 2 sum c h||`` for the sign function ``h``."""
    Q = chains.build_ip(g, max_n).Q
    h = parities(g.n).astype(np.float64)
    return float(np.linalg.norm(-Q @ h - 2 * g.total_weight() * h))


@dataclass(frozen=True, eq=False)
class HSubspace:
    n: int
    dim: int
    basis: np.ndarray


def position_indicators(n: int) -> np.ndarray:
    """Columns ``1{eta_x = i}`` for x, i in 0..n-1, column index ``x*n + i``."""
    imgs = all_images(n)
    cols = np.zeros((len(imgs), n * n))
    for x in range(n):
        cols[np.arange(len(imgs)), x * n + imgs[:, x]] = 1.0
    return cols


def label_indicators(n: int) -> np.ndarray:
    """Columns ``1{xi_i = x}`` (label i sits at x), built from inverse permutations."""
    imgs = all_images(n)
    xi = np.argsort(imgs, axis=1)
    cols = np.zeros((len(imgs), n * n))
    for i in range(n):
        cols[np.arange(len(imgs)), i * n + xi[:, i]] = 1.0
    return cols


def h_subspace(n: int, max_n: int | None = None) -> HSubspace:
    """Orthonormal basis of the complement of all single-position indicators."""
    check_size(n, max_n, "H subspace")
    ind = position_indicators(n)
    q, r, _ = scipy.linalg.qr(ind, mode="full", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > H_RANK_CUTOFF * max(1.0, diag[0])))
    basis = q[:, rank:]
    basis.setflags(write=False)
    return HSubspace(n, basis.shape[1], basis)


def mu_ip(g: WeightedGraph, tol: Tolerances = DEFAULT_TOL, max_n: int | None = None,
          h: HSubspace | None = None) -> float:
    """Bottom of the interchange spectrum restricted to H; ``inf`` when H is trivial."""
    h = h or h_subspace(g.n, max_n)
    if h.dim == 0:
        return math.inf
    M = -chains.build_ip(g, max_n).Q
    B = h.basis
    MB = M @ B
    R = B.T @ MB
    scale = max(1.0, float(np.max(np.abs(M))))
    leak = float(np.linalg.norm(MB - B @ R, ord=2))
    if leak > INVARIANCE_REL * scale:
        raise InvarianceViolated(f"H is not invariant: leak {leak:.3e}")
    return float(eigvals_sym(0.5 * (R + R.T), tol)[0])


def _gap_or_nan(g: WeightedGraph, kind: str, params=(), tol: Tolerances = DEFAULT_TOL,
                max_n: int | None = None) -> float:
    try:
        return spectral_gap(chains.build(g, kind, params, max_n), tol)
    except ZeroNotSimple:
        return math.nan


def _cep_params(n: int) -> list[tuple[int, ...]]:
    out = []
    for p in partitions(n):
        if len(p.parts) >= 2 and len(p.parts) < n:
            out.append(p.parts)
    return out


def verify_aldous(g: WeightedGraph, tol: Tolerances = DEFAULT_TOL,
                  max_n: int | None = None) -> list[CheckResult]:
    """All gap comparisons for one graph as a list of checks."""
    check_size(g.n, max_n, "Aldous verification")
    lam_rw = spectral_gap(chains.build_rw(g), tol)
    lam_ip = spectral_gap(chains.build_ip(g, max_n), tol)
    scale = max(1.0, lam_rw)
    checks = [CheckResult.measure(
        "aldous.equality", abs(lam_ip - lam_rw), 1e-7 * scale,
        f"lambda_RW={lam_rw!r} lambda_IP={lam_ip!r}", "random walk and interchange gaps coincide")]

    reduced_ip = []
    for x in range(g.n):
        if g.n >= 3:
            red = reduce_at(g, x).base
            lam_red = spectral_gap(chains.build_rw(red), tol)
            checks.append(CheckResult.measure(
                f"reduction.monotone[x={x + 1}]", max(0.0, lam_rw - lam_red), 1e-9 * scale,
                f"lambda_RW(G_x)={lam_red!r}", "reduction does not lower the RW gap"))
            reduced_ip.append(spectral_gap(chains.build_ip(red, max_n), tol))
        mats = build_C(RateSystem.from_graph(g, x), max_n)
        lo = c_min_eig(mats, tol)
        floor = -tol.psd_floor(float(np.max(np.abs(mats.C))))
        checks.append(CheckResult.measure(
            f"octopus.psd[x={x + 1}]", max(0.0, -lo), floor,
            f"min_eig={lo!r}", "octopus matrix at x is positive semidefinite"))

    mu = mu_ip(g, tol, max_n)
    if math.isinf(mu):
        checks.append(CheckResult.skipped("mu.min", "H is trivial for n=2"))
        checks.append(CheckResult.skipped("mu.ge_rw", "H is trivial for n=2"))
        checks.append(CheckResult.skipped("mu.ge_reduced", "H is trivial for n=2"))
    else:
        mu_scale = 1e-7 * max(1.0, lam_rw, mu)
        checks.append(CheckResult.measure(
            "mu.min", abs(lam_ip - min(lam_rw, mu)), mu_scale,
            f"mu={mu!r}", "interchange gap is min of RW gap and mu"))
        checks.append(CheckResult.measure(
            "mu.ge_rw", max(0.0, lam_rw - mu), mu_scale, f"mu={mu!r}", "mu dominates the RW gap"))
        worst = max(reduced_ip) if reduced_ip else -math.inf
        checks.append(CheckResult.measure(
            "mu.ge_reduced", max(0.0, worst - mu), mu_scale,
            f"max_x lambda_IP(G_x)={worst!r}", "mu dominates every reduced interchange gap"))

    if g.n <= 5:
        for k in range(1, g.n):
            lam = spectral_gap(chains.build_ep(g, k), tol)
            checks.append(CheckResult.measure(
                f"ep[k={k}].equal", abs(lam - lam_rw), 1e-7 * scale,
                f"lambda_EP={lam!r}", "exclusion gap equals RW gap"))
        for counts in _cep_params(g.n):
            lam = spectral_gap(chains.build_cep(g, counts, max_n), tol)
            label = ",".join(map(str, counts))
            checks.append(CheckResult.measure(
                f"cep[{label}].equal", abs(lam - lam_rw), 1e-7 * scale,
                f"lambda_CEP={lam!r}", "colored exclusion gap equals RW gap"))
        if g.n >= 4:
            lam = _gap_or_nan(g, chains.CP, (), tol, max_n)
            checks.append(_dominance("cycle.ge_rw", lam, lam_rw, scale, "cycle process gap dominates RW gap"))
        if g.n >= 4 and g.n % 2 == 0:
            lam = _gap_or_nan(g, chains.MP, (), tol, max_n)
            checks.append(_dominance("matching.ge_rw", lam, lam_rw, scale, "matching process gap dominates RW gap"))
    return checks


def _dominance(name: str, lam: float, lam_rw: float, scale: float, claim: str) -> CheckResult:
    if math.isnan(lam):
        return CheckResult(name, "fail", math.inf, 1e-7 * scale, "zero eigenvalue not simple", claim)
    return CheckResult.measure(name, max(0.0, lam_rw - lam), 1e-7 * scale, f"lambda={lam!r}", claim)
