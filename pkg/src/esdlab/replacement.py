"""Log-determinant diagnostics for comparing two noisy versions of a matrix.

Two sequences have asymptotically equal ESDs when (i) their normalized
Frobenius norms stay bounded and (ii) ``(1/n) log|det(. + zI)|`` agrees for
almost every ``z``. The functions here measure both quantities, plus the
row-distance factorization of ``|det|`` and the least singular value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eigen import smallest_singular_value
from .ensembles import NoiseEnsemble, NoiseMatrixSpec, sample_noise_matrix
from .matrix import SINGULAR, add_scaled, as_array, frobenius_norm_sq_over_n, log_abs_det_lu, shift

__all__ = [
    "DEFAULT_Z_GRID",
    "RowDistanceProfile",
    "row_distance_profile",
    "Trial",
    "ReplacementDiagnostic",
    "replacement_diagnostic",
    "LogDistanceReport",
    "log_distance_bound_check",
    "LeastSingularReport",
    "least_singular_experiment",
]

DEFAULT_Z_GRID = tuple(
    complex(r * math.cos(t), r * math.sin(t))
    for r in (0.3, 0.7, 1.3)
    for t in (0.0, math.pi / 3, 2 * math.pi / 3, math.pi)
)


@dataclass(frozen=True)
class RowDistanceProfile:
    """``d_i`` = distance of row ``i`` to the span of rows ``1..i-1``."""

    distances: np.ndarray

    @property
    def log_distances(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.distances)

    @property
    def log_abs_det(self) -> float:
        return float(np.sum(self.log_distances))


def row_distance_profile(A) -> RowDistanceProfile:
    a = as_array(A)
    n = a.shape[0]
    d = np.empty(n)
    q = np.zeros_like(a)
    r = 0
    for i in range(n):
        w = a[i].copy()
        for _ in range(2):
            if r:
                w -= q[:r].T @ (q[:r].conj() @ w)
        nw = float(np.linalg.norm(w))
        if nw <= 64 * np.finfo(float).eps * float(np.linalg.norm(a[i])):
            nw = 0.0
        d[i] = nw
        if nw > 0:
            q[r] = w / nw
            r += 1
    d.setflags(write=False)
    return RowDistanceProfile(d)


@dataclass(frozen=True)
class Trial:
    z: complex
    seed: int
    logdet_a: float | None
    logdet_b: float | None

    @property
    def singular(self) -> bool:
        return self.logdet_a is None or self.logdet_b is None

    def gap(self, n: int) -> float:
        if self.singular:
            return math.nan
        return abs(self.logdet_a - self.logdet_b) / n


@dataclass(frozen=True)
class ReplacementDiagnostic:
    n: int
    gamma: float
    ensembles: tuple[str, str]
    z_grid: tuple[complex, ...]
    seeds: tuple[int, ...]
    trials: tuple[Trial, ...]
    cond_i: tuple[tuple[float, float], ...]  # per seed: (frob A, frob B) normalized

    def gaps(self, z: complex) -> np.ndarray:
        return np.array([t.gap(self.n) for t in self.trials if t.z == z])

    def median_gap(self, z: complex) -> float:
        g = self.gaps(z)
        g = g[~np.isnan(g)]
        return float(np.median(g)) if g.size else math.nan

    def median_gaps(self) -> np.ndarray:
        return np.array([self.median_gap(z) for z in self.z_grid])

    @property
    def singular_count(self) -> int:
        return sum(t.singular for t in self.trials)

    def to_csv(self) -> str:
        rows = ["z_re,z_im,seed,logdet_a,logdet_b,gap"]
        for t in self.trials:
            la = "singular" if t.logdet_a is None else f"{t.logdet_a:.17g}"
            lb = "singular" if t.logdet_b is None else f"{t.logdet_b:.17g}"
            g = "nan" if t.singular else f"{t.gap(self.n):.17g}"
            rows.append(f"{t.z.real:.17g},{t.z.imag:.17g},{t.seed},{la},{lb},{g}")
        return "\n".join(rows) + "\n"

    def summary_csv(self) -> str:
        rows = ["n,z_re,z_im,median_gap,singular_trials"]
        for z in self.z_grid:
            bad = sum(t.singular for t in self.trials if t.z == z)
            rows.append(f"{self.n},{z.real:.17g},{z.imag:.17g},{self.median_gap(z):.17g},{bad}")
        return "\n".join(rows) + "\n"


def _logdet_or_none(A):
    v = log_abs_det_lu(A)
    return None if v is SINGULAR else float(v)


def _check_grid(z_grid):
    for z in z_grid:
        if abs(abs(z) - 1.0) < 1e-12:
            raise ValueError(f"z-grid must avoid the unit circle (got {z})")


def replacement_diagnostic(M, gamma: float, ens_a: NoiseEnsemble, ens_b: NoiseEnsemble,
                           z_grid: Sequence[complex] = DEFAULT_Z_GRID,
                           seeds: Sequence[int] = tuple(range(20))) -> ReplacementDiagnostic:
    """Per (z, seed) log-determinants of ``M + n^-gamma Phi + zI`` and the same with ``Psi``.

    ``Phi`` and ``Psi`` are drawn once per seed and reused across the grid.
    Singular LU factorizations are recorded rather than raised.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    z_grid = tuple(complex(z) for z in z_grid)
    _check_grid(z_grid)
    a = as_array(M)
    n = a.shape[0]
    trials, cond = [], []
    for seed in seeds:
        A = add_scaled(a, sample_noise_matrix(NoiseMatrixSpec(n, gamma, ens_a, seed)), 1.0)
        B = add_scaled(a, sample_noise_matrix(NoiseMatrixSpec(n, gamma, ens_b, seed)), 1.0)
        cond.append((frobenius_norm_sq_over_n(A), frobenius_norm_sq_over_n(B)))
        for z in z_grid:
            trials.append(Trial(z, int(seed), _logdet_or_none(shift(A, z)), _logdet_or_none(shift(B, z))))
    return ReplacementDiagnostic(n, float(gamma), (ens_a.name, ens_b.name), z_grid,
                                 tuple(int(s) for s in seeds), tuple(trials), tuple(cond))


@dataclass(frozen=True)
class LogDistanceReport:
    max_abs_log: float
    ratio: float
    argmax_row: int


def log_distance_bound_check(A, start_row: int = 1) -> LogDistanceReport:
    """``max_{i >= start_row} |log d_i|`` and its ratio to ``log n`` (rows 1-based)."""
    a = as_array(A)
    n = a.shape[0]
    if not 1 <= start_row <= n:
        raise ValueError("need 1 <= start_row <= n")
    logs = np.abs(row_distance_profile(a).log_distances[start_row - 1:])
    j = int(np.argmax(logs))
    m = float(logs[j])
    ratio = math.inf if math.isinf(m) else (m / math.log(n) if n > 1 else math.inf)
    return LogDistanceReport(m, ratio, start_row + j)


@dataclass(frozen=True)
class LeastSingularReport:
    n: int
    gamma: float
    seeds: tuple[int, ...]
    sigmas: np.ndarray

    @property
    def c_hat(self) -> float:
        """``max`` over seeds of ``-log sigma_n / log n``."""
        if np.any(self.sigmas <= 0):
            return math.inf
        return float(np.max(-np.log(self.sigmas) / math.log(self.n)))


def least_singular_experiment(M, gamma: float, ens: NoiseEnsemble,
                              seeds: Sequence[int]) -> LeastSingularReport:
    a = as_array(M)
    n = a.shape[0]
    if float(np.linalg.norm(a)) > float(n) ** 10:
        raise ValueError("||M||_F exceeds n^10; not polynomially bounded")
    sig = []
    for seed in seeds:
        A = add_scaled(a, sample_noise_matrix(NoiseMatrixSpec(n, gamma, ens, seed)), 1.0)
        sig.append(smallest_singular_value(A))
    s = np.array(sig)
    s.setflags(write=False)
    return LeastSingularReport(n, float(gamma), tuple(int(x) for x in seeds), s)

