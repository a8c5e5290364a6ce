"""epsilon-stability of row sets.

A set of vectors is epsilon-stable when every member sits at distance at
least epsilon from the span of the others. This module computes that
numerically (reorthogonalized Gram-Schmidt), evaluates the closed-form lower
bounds and the exact per-row distances for the shifted nilpotent blocks,
builds the explicit orthogonal bases used to derive them, and provides the
perturbation-bound calculators for noisy row sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matrix import BlockSpec, as_array, build_tbn, shift

__all__ = [
    "HypothesisError",
    "RowSet",
    "StabilityReport",
    "PerturbationBudget",
    "StabilityCheck",
    "geometric_sum",
    "orthonormalize",
    "dist_to_span",
    "leave_one_out_distances",
    "epsilon_stability",
    "closed_form_superdiag",
    "closed_form_all_rows",
    "superdiag_row_distances",
    "block_row_distances",
    "superdiag_report",
    "all_rows_report",
    "orthobasis_topdown",
    "orthobasis_botup",
    "orthobasis_botstan",
    "bound_perturbed_target",
    "bound_perturbed_spanning",
    "continued_stability_check",
    "span_perturbation_bound",
    "delta_n_eps",
    "mainthm_ratio",
    "ZHypothesis",
    "check_mainthm_hypotheses",
    "ManyStableReport",
    "manystable_size",
    "verify_manystable",
]

EPS = np.finfo(np.float64).eps
# a vector whose Gram-Schmidt residual falls below this fraction of its norm
# is treated as already in the span
RANK_TOL = 64 * EPS


class HypothesisError(ValueError):
    """A bound was requested outside the hypotheses under which it holds."""


def _vec(v) -> np.ndarray:
    return np.asarray(v, dtype=np.complex128).ravel()


def _norm(v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(v.real ** 2 + v.imag ** 2)))


@dataclass(frozen=True)
class RowSet:
    """``m`` vectors of common dimension ``n`` plus their parent row indices."""

    vectors: np.ndarray
    source_indices: tuple[int, ...] = ()

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128, copy=True)
        if v.ndim != 2:
            raise ValueError("RowSet needs a 2-D array of vectors")
        m, n = v.shape
        if m < 1:
            raise ValueError("RowSet needs at least one vector")
        if m > n:
            raise ValueError(f"RowSet of {m} vectors exceeds dimension {n}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        idx = tuple(int(i) for i in self.source_indices) or tuple(range(m))
        if len(idx) != m:
            raise ValueError("source_indices length does not match vector count")
        object.__setattr__(self, "source_indices", idx)

    @classmethod
    def from_matrix(cls, A, indices: Sequence[int] | None = None) -> "RowSet":
        a = as_array(A)
        if indices is None:
            indices = range(a.shape[0])
        idx = list(indices)
        return cls(a[idx], tuple(idx))

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class StabilityReport:
    per_row_distance: np.ndarray
    epsilon: float
    method: str
    source_indices: tuple[int, ...] = ()

    @classmethod
    def from_distances(cls, distances, method: str, source_indices=()) -> "StabilityReport":
        d = np.asarray(distances, dtype=np.float64).copy()
        d.setflags(write=False)
        idx = tuple(source_indices) or tuple(range(len(d)))
        return cls(d, float(d.min()), method, idx)

    def to_csv(self) -> str:
        lines = ["row_index,distance"]
        lines += [f"{i},{d:.17g}" for i, d in zip(self.source_indices, self.per_row_distance)]
        lines.append(f"epsilon,{self.epsilon:.17g},method,{self.method}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- numerics


def geometric_sum(x: float, count: int) -> float:
    """``sum_{i<count} x**i`` for ``x = |z|^2 >= 0``.

    Closed form away from ``|z| = 1``, direct summation within 1e-3 of it.
    """
    if count <= 0:
        return 0.0
    if abs(math.sqrt(x) - 1.0) > 1e-3:
        return (1.0 - x ** count) / (1.0 - x)
    return float(sum(x ** i for i in range(count)))


def orthonormalize(vectors) -> np.ndarray:
    """Orthonormal rows spanning ``vectors`` (CGS with one reorthogonalization).

    Vectors already in the span of their predecessors (residual below
    ``RANK_TOL`` times their norm) are skipped.
    """
    v = np.asarray(vectors, dtype=np.complex128)
    if v.size == 0:
        return np.zeros((0, v.shape[-1] if v.ndim == 2 else 0), dtype=np.complex128)
    q = np.zeros_like(v)
    r = 0
    for x in v:
        nx = _norm(x)
        if nx == 0.0:
            continue
        w = x.copy()
        for _ in range(2):
            if r:
                w -= q[:r].T @ (q[:r].conj() @ w)
        nw = _norm(w)
        if nw <= RANK_TOL * nx:
            continue
        q[r] = w / nw
        r += 1
    return q[:r]


def _residual(v: np.ndarray, q: np.ndarray) -> np.ndarray:
    w = v.copy()
    if q.shape[0]:
        for _ in range(2):
            w -= q.T @ (q.conj() @ w)
    return w


def dist_to_span(v, S) -> float:
    """Euclidean distance from ``v`` to ``Span(S)``; ``Span()`` is ``{0}``."""
    v = _vec(v)
    S = np.asarray(S, dtype=np.complex128)
    if S.size == 0:
        return _norm(v)
    S = S.reshape(-1, v.size)
    return _norm(_residual(v, orthonormalize(S)))


def leave_one_out_distances(vectors) -> np.ndarray:
    """All ``dist(v_j, Span{v_i : i != j})`` from one factorization.

    With ``V = L Q`` (``L`` lower triangular, ``Q`` orthonormal rows) the
    distance of ``v_j`` to the others is ``1 / ||L^{-1} e_j||``. Falls back
    to the per-row computation when the set is numerically dependent.
    """
    v = np.asarray(vectors, dtype=np.complex128)
    m = v.shape[0]
    q = orthonormalize(v)
    if q.shape[0] < m:
        return np.array([dist_to_span(v[j], np.delete(v, j, axis=0)) for j in range(m)])
    L = v @ q.conj().T
    Linv = np.linalg.solve(L, np.eye(m, dtype=np.complex128))
    col = np.sqrt(np.sum(np.abs(Linv) ** 2, axis=0))
    return 1.0 / col


def epsilon_stability(rows: RowSet) -> StabilityReport:
    v = rows.vectors
    m = v.shape[0]
    d = np.empty(m)
    for j in range(m):
        others = np.delete(v, j, axis=0)
        d[j] = dist_to_span(v[j], others)
    return StabilityReport.from_distances(d, "numeric", rows.source_indices)


# ------------------------------------------------------- closed-form bounds


def _check_off_circle(z: complex):
    if abs(abs(z) - 1.0) < 1e-12:
        raise ValueError("closed forms need |z| != 1")


def closed_form_superdiag(z: complex) -> float:
    """``min{1, |1 - |z|^2|^(1/2)}``: lower bound for the rows ``z e_i + e_{i+1}``."""
    _check_off_circle(z)
    return min(1.0, math.sqrt(abs(1.0 - abs(z) ** 2)))


def closed_form_all_rows(z: complex, b: int) -> float:
    """Lower bound on the stability of all rows of ``T_{b,n} + zI``."""
    _check_off_circle(z)
    r = abs(z)
    if r > 1.0:
        return math.sqrt(r * r - 1.0)
    return r ** (b + 1) * math.sqrt(1.0 - r * r)


def superdiag_row_distances(z: complex, m: int) -> np.ndarray:
    """Exact distances within ``{z e_i + e_{i+1} : 1 <= i <= m}``.

    Row ``l`` sits at squared distance ``|z|^(2l)/S(l) + 1/S(m-l+1)`` from the
    others, ``S(k) = sum_{i<k} |z|^(2i)``.
    """
    if m < 1:
        raise ValueError("m must be positive")
    x = abs(z) ** 2
    d2 = [x ** l / geometric_sum(x, l) + 1.0 / geometric_sum(x, m - l + 1) for l in range(1, m + 1)]
    return np.sqrt(np.array(d2))


def block_row_distances(z: complex, size: int) -> np.ndarray:
    """Exact distances within the rows of one block ``T_size + zI``.

    Row ``l`` is at distance ``|z|^l / S(l)^(1/2)``; at ``z = 0`` every
    row but the last (which is zero) is a unit coordinate vector.
    """
    if size < 1:
        raise ValueError("block size must be positive")
    if z == 0:
        d = np.ones(size)
        d[-1] = 0.0
        return d
    x = abs(z) ** 2
    return np.array([math.sqrt(x ** l / geometric_sum(x, l)) for l in range(1, size + 1)])


def superdiag_report(z: complex, m: int) -> StabilityReport:
    return StabilityReport.from_distances(
        superdiag_row_distances(z, m), "closed-form-superdiag", tuple(range(m)))


def all_rows_report(spec: BlockSpec, z: complex) -> StabilityReport:
    parts = [block_row_distances(z, s) for s in spec.block_sizes]
    return StabilityReport.from_distances(np.concatenate(parts), "closed-form-all-rows")


# --------------------------------------------------------- explicit bases


def orthobasis_topdown(z: complex, count: int, n: int) -> np.ndarray:
    """Orthogonal basis ``w_1..w_count`` of ``{z e_i + e_{i+1} : i <= count}``.

    Rows of the returned ``count x n`` array; coordinate ``j`` holds ``e_{j+1}``.
    """
    if not 0 <= count <= n - 1:
        raise ValueError("need 0 <= count <= n-1")
    z = complex(z)
    x = abs(z) ** 2
    w = np.zeros((count, n), dtype=np.complex128)
    for k in range(1, count + 1):
        w[k - 1, k] = 1.0
        scale = z / geometric_sum(x, k)
        for j in range(k):
            w[k - 1, j] += scale * (-z) ** (k - 1 - j) * x ** j
    return w


def orthobasis_botup(z: complex, ell: int, m: int, n: int) -> np.ndarray:
    """Orthogonal basis ``w_{ell+1}..w_m`` of ``{z e_i + e_{i+1} : ell < i <= m}``."""
    if not (ell + 1 <= m <= n - 1 and ell >= 0):
        raise ValueError("need ell+1 <= m <= n-1")
    z = complex(z)
    x = abs(z) ** 2
    zb = z.conjugate()
    w = np.zeros((m - ell, n), dtype=np.complex128)
    for r, k in enumerate(range(ell + 1, m + 1)):
        w[r, k - 1] = z
        tail = 1.0 / geometric_sum(x, m - k + 1)
        for j in range(k + 1, m + 2):
            w[r, j - 1] += tail * (-zb) ** (j - k - 1)
    return w


def orthobasis_botstan(z: complex, ell: int, b: int, n: int | None = None) -> np.ndarray:
    """``{z e_i : ell < i <= b+1}``, the basis of the trailing rows of a block."""
    if z == 0:
        raise ValueError("basis collapses at z = 0")
    if not 0 <= ell <= b:
        raise ValueError("need 0 <= ell <= b")
    n = b + 1 if n is None else n
    if n < b + 1:
        raise ValueError("dimension too small for the block")
    w = np.zeros((b + 1 - ell, n), dtype=np.complex128)
    for r, i in enumerate(range(ell + 1, b + 2)):
        w[r, i - 1] = z
    return w


# ---------------------------------------------------- perturbation bounds


def bound_perturbed_target(f_phi_norm: float) -> float:
    """Change in ``dist(Z_i, .)`` from adding ``f phi`` to ``Z_i`` is at most ``f||phi||``."""
    if f_phi_norm < 0:
        raise ValueError("f_phi_norm must be non-negative")
    return float(f_phi_norm)


def bound_perturbed_spanning(z_norm: float, f_phi_norm: float, d1: float,
                             epsilon: float | None = None) -> float:
    """Bound on the change of ``dist(Z_i, Span)`` when one spanning vector moves.

    ``d1`` is the distance of the moved vector to the rest of the span. With
    ``epsilon`` (``d1 >= epsilon > 2 f||phi||``) the simplified form
    ``z_norm * f||phi|| * 20/epsilon`` is also evaluated and the smaller bound
    returned.
    """
    if not d1 > f_phi_norm:
        raise HypothesisError(f"need d1 > f||phi|| (d1={d1}, f||phi||={f_phi_norm})")
    exact = z_norm * f_phi_norm * (4 * d1 + 2 * f_phi_norm) / (d1 - f_phi_norm) ** 2
    if epsilon is None:
        return exact
    if not (epsilon > 2 * f_phi_norm and d1 >= epsilon):
        raise HypothesisError(f"need d1 >= epsilon > 2 f||phi|| (epsilon={epsilon})")
    return min(exact, z_norm * f_phi_norm * 20.0 / epsilon)


@dataclass(frozen=True)
class PerturbationBudget:
    """``epsilon`` of the clean set, ``k`` vectors, ``max f_i||phi_i||``, ``max(1, ||Z_i||)``."""

    epsilon: float
    k: int
    f_phi_max: float
    z_max_norm: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        for name in ("epsilon", "f_phi_max", "z_max_norm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_vectors(cls, Z, f_phi) -> "PerturbationBudget":
        """Budget for rows ``Z`` perturbed by rows ``f_phi`` (already scaled)."""
        Z = np.asarray(Z, dtype=np.complex128)
        P = np.asarray(f_phi, dtype=np.complex128)
        eps = epsilon_stability(RowSet(Z)).epsilon
        fmax = float(np.max(np.linalg.norm(P, axis=1)))
        zmax = max(1.0, float(np.max(np.linalg.norm(Z, axis=1))))
        return cls(eps, Z.shape[0], fmax, zmax)


class StabilityCheck(tuple):
    """``(holds, threshold)``."""

    __slots__ = ()

    def __new__(cls, holds: bool, threshold: float):
        return super().__new__(cls, (bool(holds), float(threshold)))

    @property
    def holds(self) -> bool:
        return self[0]

    @property
    def threshold(self) -> float:
        return self[1]


def continued_stability_check(budget: PerturbationBudget) -> StabilityCheck:
    """Whether perturbing the vectors one at a time keeps the set (epsilon/2)-stable."""
    f = budget.f_phi_max
    threshold = math.sqrt(40.0 * budget.k * f * (budget.z_max_norm + f))
    return StabilityCheck(20.0 >= budget.epsilon > threshold, threshold)


def span_perturbation_bound(budget: PerturbationBudget, v_norm: float) -> tuple[float, float]:
    """Bounds on ``|dist(v, Span Z) - dist(v, Span Z~)|``, returned as a pair.

    The first is ``(40/epsilon) k ||v|| max f||phi||``; the second is the
    looser ``||v|| sqrt(10 k max f||phi|| / max(1, ||Z||))``.
    """
    half = PerturbationBudget(budget.epsilon / 2.0, budget.k, budget.f_phi_max, budget.z_max_norm)
    if not continued_stability_check(half).holds:
        raise HypothesisError("epsilon/2 does not clear the continued-stability threshold")
    f = budget.f_phi_max
    first = 40.0 / budget.epsilon * budget.k * v_norm * f
    second = v_norm * math.sqrt(10.0 * budget.k * f / budget.z_max_norm)
    return first, second


def delta_n_eps(n: int, gamma: float, epsilon: float, z_max_norm: float) -> float:
    """``n^(3/4 - gamma/2) (log n)^(1/4) sqrt(z_max_norm) / epsilon``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if math.isinf(epsilon):
        return 0.0
    return n ** (0.75 - gamma / 2) * math.log(n) ** 0.25 * math.sqrt(z_max_norm) / epsilon


def mainthm_ratio(n: int, gamma: float, epsilon: float) -> float:
    """``n^(3/4 - gamma/2) log n / epsilon`` (infinite when epsilon is 0)."""
    if epsilon <= 0:
        return math.inf
    return n ** (0.75 - gamma / 2) * math.log(n) / epsilon


@dataclass(frozen=True)
class ZHypothesis:
    z: complex
    full_size: int
    full_epsilon: float
    full_ratio: float
    size: int
    epsilon: float
    ratio: float
    satisfied: bool
    dropped: tuple[int, ...] = field(default=())

    @property
    def full_satisfied(self) -> bool:
        return self.full_ratio < 1.0


def _max_drops(n: int) -> int:
    if n < 3:
        return 0
    return int(math.floor(n / math.log(n) ** 1.1))


def check_mainthm_hypotheses(M, gamma: float, z_grid: Sequence[complex],
                             threshold: float = 1.0) -> list[ZHypothesis]:
    """Greedy search for a large stable row subset of ``M + zI``, per ``z``.

    Starting from all rows, repeatedly drop the row closest to the span of
    the others (at most ``floor(n / log^1.1 n)`` times). The first (largest)
    subset on that path whose ratio ``n^(3/4-gamma/2) log n / epsilon`` is
    below ``threshold`` is kept; if none is, the subset with the smallest
    ratio is reported with ``satisfied=False``. This is a heuristic and may
    under-report the best achievable epsilon.
    """
    if not gamma > 1.5:
        raise ValueError("the main theorem needs gamma > 1.5")
    a = as_array(M)
    n = a.shape[0]
    out = []
    for z in z_grid:
        rows = shift(a, z).entries
        keep = list(range(n))
        dropped: list[int] = []
        d = epsilon_stability(RowSet(rows[keep], tuple(keep))).per_row_distance
        full_eps = float(d.min())
        best = (mainthm_ratio(n, gamma, full_eps), full_eps, len(keep), ())
        for _ in range(min(_max_drops(n), n - 1)):
            if best[0] < threshold:
                break
            j = int(np.argmin(d))
            dropped.append(keep.pop(j))
            d = epsilon_stability(RowSet(rows[keep], tuple(keep))).per_row_distance
            eps = float(d.min())
            ratio = mainthm_ratio(n, gamma, eps)
            if ratio < best[0]:
                best = (ratio, eps, len(keep), tuple(dropped))
        ratio, eps, size, drop = best
        out.append(ZHypothesis(complex(z), n, full_eps, mainthm_ratio(n, gamma, full_eps),
                               size, eps, ratio, ratio < threshold, drop))
    return out


# ------------------------------------------------------- many stable rows


@dataclass(frozen=True)
class ManyStableReport:
    n: int
    z: complex
    seed: int
    rows_tested: int
    threshold: float
    distances: np.ndarray
    passed: bool

    @property
    def min_distance(self) -> float:
        return float(self.distances.min())


def manystable_size(n: int) -> int:
    return int(math.floor(n - n ** (5.0 / 6.0)))


def verify_manystable(n: int, ensemble, z: complex, seed: int) -> ManyStableReport:
    """Test that the first ``floor(n - n^(5/6))`` rows of ``R_n + zI`` are
    ``(n^(-1/12)/2)``-stable, ``R_n`` having iid entries ``x/sqrt(n)``."""
    from .ensembles import NoiseMatrixSpec, sample_noise_matrix

    if n < 16:
        raise ValueError("n must be at least 16")
    R = sample_noise_matrix(NoiseMatrixSpec(n, 0.0, ensemble, seed))
    rows = shift(R, z).entries
    m = manystable_size(n)
    d = leave_one_out_distances(rows[:m])
    thr = n ** (-1.0 / 12.0) / 2.0
    d.setflags(write=False)
    return ManyStableReport(n, complex(z), int(seed), m, thr, d, bool(np.all(d >= thr)))


def tbn_shifted(spec: BlockSpec, z: complex):
    """``T_{b,n} + zI`` (convenience for the stability experiments)."""
    return shift(build_tbn(spec), z)
