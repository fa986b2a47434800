"""Symmetric eigensolver, spectra as clustered multisets, PSD and gap checks."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotSymmetric, ZeroNotSimple

# Matrices up to this dimension go through Jacobi; larger ones through LAPACK.
JACOBI_MAX_DIM = 128


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerance coefficients; absolute values are derived from a scale.

    ``eigen_rel`` bounds the Jacobi off-diagonal Frobenius norm relative to ``||M||_F``.
    The remaining three are multiplied by ``max(1, spectral radius)`` (clustering,
    matching) or ``1 + max|entry|`` (PSD floor, applied with a negative sign).
    """

    eigen_rel: float = 1e-12
    cluster_rel: float = 1e-8
    psd_rel: float = 1e-8
    match_rel: float = 1e-7

    def __post_init__(self):
        for name in ("eigen_rel", "cluster_rel", "psd_rel", "match_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def cluster_abs(self, radius: float) -> float:
        return self.cluster_rel * max(1.0, abs(radius))

    def match_tol(self, radius: float) -> float:
        return self.match_rel * max(1.0, abs(radius))

    def psd_floor(self, max_entry: float) -> float:
        return -self.psd_rel * (1.0 + abs(max_entry))

    def as_dict(self) -> dict:
        return {"eigen_rel": self.eigen_rel, "cluster_rel": self.cluster_rel,
                "psd_rel": self.psd_rel, "match_rel": self.match_rel}


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Spectrum:
    values: tuple[float, ...]
    clusters: tuple[tuple[float, int], ...]

    @classmethod
    def from_values(cls, values, tol: Tolerances = DEFAULT_TOL, cluster_abs: float | None = None):
        vals = np.sort(np.asarray(values, dtype=np.float64))
        if cluster_abs is None:
            radius = float(np.max(np.abs(vals))) if len(vals) else 0.0
            cluster_abs = tol.cluster_abs(radius)
        return cls(tuple(float(v) for v in vals), _cluster(vals, cluster_abs))

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def radius(self) -> float:
        return max((abs(v) for v in self.values), default=0.0)

    def multiplicity(self, value: float, atol: float) -> int:
        return sum(m for v, m in self.clusters if abs(v - value) <= atol)

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def as_dict(self) -> dict:
        return {"clusters": [{"value": v, "multiplicity": m} for v, m in self.clusters],
                "values": list(self.values)}

    @classmethod
    def from_json(cls, text: str) -> Spectrum:
        d = json.loads(text)
        return cls(tuple(d["values"]),
                   tuple((c["value"], c["multiplicity"]) for c in d["clusters"]))


def _cluster(sorted_vals: np.ndarray, gap: float) -> tuple[tuple[float, int], ...]:
    """Single-linkage grouping: a new cluster starts wherever consecutive values differ by more than ``gap``."""
    if len(sorted_vals) == 0:
        return ()
    breaks = np.flatnonzero(np.diff(sorted_vals) > gap) + 1
    out = []
    for group in np.split(sorted_vals, breaks):
        out.append((float(np.mean(group)), int(len(group))))
    return tuple(out)


def check_symmetric(m, rtol: float = 1e-12) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and float(np.max(np.abs(m - m.T))) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return m


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: m-1 rounds of disjoint pairs covering every pair once (m even)."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(m, eigen_rel: float = 1e-12, max_sweeps: int = 60):
    """Cyclic Jacobi with a parallel (round-robin) pair ordering.

    Each round rotates n/2 disjoint pairs at once, so a round is a couple of
    vectorised row/column updates. Returns ascending eigenvalues and the matching
    orthonormal eigenvectors as columns.
    """
    a = np.array(m, dtype=np.float64)
    dim = a.shape[0]
    v = np.eye(dim)
    if dim <= 1:
        return np.diag(a).copy(), v
    size = dim + (dim % 2)
    schedule = []
    for p, q in _round_robin(size):
        keep = q < dim  # drop pairs with the padding index
        schedule.append((p[keep], q[keep]))
    norm = np.linalg.norm(a)
    target = eigen_rel * norm
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= target:
            break
        for p, q in schedule:
            apq = a[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigs_sym(m, tol: Tolerances = DEFAULT_TOL, method: str = "auto"):
    """Eigen-decomposition of a symmetric matrix: ``(Spectrum, eigenvectors)``.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM``, LAPACK above).
    """
    m = check_symmetric(m)
    m = 0.5 * (m + m.T)
    if method == "auto":
        method = "jacobi" if m.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        w, v = jacobi_eigh(m, tol.eigen_rel)
    elif method == "lapack":
        w, v = np.linalg.eigh(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    return Spectrum.from_values(w, tol), v


def eigvals_sym(m, tol: Tolerances = DEFAULT_TOL, method: str = "auto") -> np.ndarray:
    m = check_symmetric(m)
    if method == "auto":
        method = "jacobi" if m.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "lapack":
        return np.linalg.eigvalsh(0.5 * (m + m.T))
    return jacobi_eigh(0.5 * (m + m.T), tol.eigen_rel)[0]


def _generator_matrix(gen) -> np.ndarray:
    return np.asarray(getattr(gen, "Q", gen), dtype=np.float64)


def spectrum_of(gen, tol: Tolerances = DEFAULT_TOL) -> Spectrum:
    """Spectrum of ``-Q`` for a generator (or a raw rate matrix)."""
    return Spectrum.from_values(eigvals_sym(-_generator_matrix(gen), tol), tol)


def spectral_gap(gen, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest nonzero eigenvalue of ``-Q``; raises if the zero eigenvalue is not simple."""
    spec = spectrum_of(gen, tol)
    if spec.dim < 2:
        raise ZeroNotSimple("a one-state chain has no spectral gap")
    zero_tol = tol.cluster_abs(spec.radius)
    n_zero = sum(1 for v in spec.values if abs(v) <= zero_tol)
    if n_zero != 1:
        raise ZeroNotSimple(f"zero eigenvalue has multiplicity {n_zero}")
    return spec.values[1]


def is_psd(m, tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    m = check_symmetric(m)
    if m.size == 0:
        return True, 0.0
    lo = float(eigvals_sym(m, tol)[0])
    return lo >= tol.psd_floor(float(np.max(np.abs(m)))), lo


def multiset_subset(small, big, tol: float | None = None) -> tuple[bool, list[float]]:
    """Greedy sorted matching; each value of ``big`` is consumed at most once.

    ``tol`` defaults to the match tolerance scaled by the larger spectral radius.
    """
    s = sorted(small.values if isinstance(small, Spectrum) else small)
    b = sorted(big.values if isinstance(big, Spectrum) else big)
    if tol is None:
        radius = max([abs(v) for v in s + b], default=0.0)
        tol = DEFAULT_TOL.match_tol(radius)
    unmatched = []
    j = 0
    for v in s:
        while j < len(b) and b[j] < v - tol:
            j += 1
        if j < len(b) and abs(b[j] - v) <= tol:
            j += 1
        else:
            unmatched.append(v)
    return not unmatched, unmatched


def variational_check(gen, lambda1: float, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``L^2 + lambda1 L`` is PSD while ``L^2 + (lambda1 + eps) L`` is not, with ``eps = 1e-4 lambda1``."""
    L = _generator_matrix(gen)
    L2 = L @ L
    ok_at, _ = is_psd(L2 + lambda1 * L, tol)
    ok_above, _ = is_psd(L2 + (lambda1 * (1 + 1e-4)) * L, tol)
    return ok_at and not ok_above


def rw_eigenvalues(g, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    return eigvals_sym(g.laplacian(), tol)


def interlacing_check(g, x: int, slack: float | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> tuple[bool, float]:
    """Check ``l_j(G) <= l_j(G_x) <= l_{j+1}(G)`` for j=1..n-2 and ``l_1(G_x) >= l_1(G)``.

    Returns ``(ok, max_violation)``; violations are measured as positive overshoot.
    """
    from .graph import reduce_at

    x = g.check_vertex(x)
    if g.n < 3:
        raise ValueError("interlacing needs n >= 3")
    full = rw_eigenvalues(g, tol)
    red = rw_eigenvalues(reduce_at(g, x).base, tol)
    if slack is None:
        slack = 1e-9 * max(1.0, float(full[-1]))
    worst = max(0.0, full[1] - red[1])
    for j in range(1, g.n - 1):
        worst = max(worst, full[j] - red[j], red[j] - full[j + 1])
    return worst <= slack, float(worst)
