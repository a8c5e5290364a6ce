"""Acceptance gates, shared by ``tests/test_acceptance.py`` and ``esdlab selftest``.

Each gate returns a :class:`CriterionResult`. Gates marked ``documented``
encode a claim that does not hold as literally stated; they are still run
and still fail, and the analysis lives in the project notes. Monte Carlo
thresholds were frozen from ``tools/oracle_thresholds.py`` (LAPACK on the
same matrices) plus a margin; the oracle values are quoted next to each.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .eigen import singular_values
from .ensembles import CLI_NAMES, NoiseEnsemble, NoiseMatrixSpec, Stream, sample_noise_matrix, stream_key
from .esd import DIRAC_ZERO, UNIT_CIRCLE, ESD, pooled, radial_cdf_distance, radial_transport_distance
from .experiments import block_trials
from .matrix import BlockSpec, build_tbn, build_tn, log_abs_det_lu, shift
from .replacement import DEFAULT_Z_GRID, replacement_diagnostic, row_distance_profile
from .stability import (HypothesisError, PerturbationBudget, RowSet, all_rows_report,
                        bound_perturbed_spanning, closed_form_all_rows, closed_form_superdiag,
                        dist_to_span, epsilon_stability, geometric_sum, orthobasis_botstan,
                        orthobasis_botup, orthobasis_topdown, span_perturbation_bound,
                        superdiag_row_distances, verify_manystable)

# frozen thresholds (oracle value in the comment)
FIG1_MEDIAN_MAX = 0.10  # oracle 0.0717 at n=500 (0.560 at n=50)
UNIVERSALITY_FINAL_MAX = 0.015  # oracle KS 0.0582, 0.0236, 0.0071 along the ladder
REGIME_FACTOR = 5.0  # oracle W1 factors 87 (to delta_0) and 34 (to the circle); KS factors 1
REPLACEMENT_MIN_DECREASING = 10  # oracle: 11 of 12
REPLACEMENT_FINAL_MAX = 5e-3  # oracle max per-z median at n=400: 2.2e-3
# floating-point slack for the deterministic inequalities (not a statistical margin)
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class CriterionResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float
    documented: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("FAIL (documented)" if self.documented else "FAIL")
        return f"[{tag}] criterion {self.key}: {self.title} -- {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# ------------------------------------------------------------------ 1


def criterion_1() -> CriterionResult:
    def work():
        worst_d = worst_s = 0.0
        for seed in range(100):
            A = sample_noise_matrix(NoiseMatrixSpec(50, 0.0, NoiseEnsemble("cgauss"), seed))
            ld = log_abs_det_lu(A)
            sd = row_distance_profile(A).log_abs_det
            ss = float(np.sum(np.log(singular_values(A).values)))
            worst_d = max(worst_d, abs(sd - ld))
            worst_s = max(worst_s, abs(ss - ld))
        return worst_d, worst_s

    (wd, ws), sec = _timed(work)
    ok = wd <= 1e-6 and ws <= 1e-6 and sec < 30
    return CriterionResult("1", "determinant identity", ok,
                           f"max|sum log d - LU|={wd:.2e}, max|sum log sigma - LU|={ws:.2e}", sec)


# ------------------------------------------------------------------ 2


def _grid():
    return DEFAULT_Z_GRID


def _superdiag_indices(spec: BlockSpec) -> list[int]:
    sd = spec.superdiagonal()
    return [i for i in range(spec.n - 1) if sd[i]]


def criterion_2a() -> CriterionResult:
    def work():
        worst = math.inf
        for b in (2, 4, 8):
            spec = BlockSpec(4 * (b + 1), b)
            T = build_tbn(spec)
            for z in _grid():
                eps = epsilon_stability(RowSet.from_matrix(shift(T, z))).epsilon
                worst = min(worst, eps - closed_form_all_rows(z, b))
        return worst

    margin, sec = _timed(work)
    return CriterionResult("2a", "all rows of T_{b,n}+zI clear the all-rows bound", margin >= -1e-9 and sec < 60,
                           f"min(eps - bound)={margin:.3e}", sec)


def criterion_2b() -> CriterionResult:
    def work():
        worst = 0.0
        for b in (2, 4, 8):
            A = shift(build_tn(b + 1), 0)
            for z in _grid():
                eps = epsilon_stability(RowSet.from_matrix(shift(A, z))).epsilon
                worst = max(worst, abs(eps - closed_form_all_rows(z, b)))
        return worst

    dev, sec = _timed(work)
    return CriterionResult("2b", "single block: numeric eps equals the all-rows closed form",
                           dev <= 1e-9 and sec < 60, f"max|eps - closed form|={dev:.3e}", sec, documented=True)


def criterion_2c() -> CriterionResult:
    def work():
        worst = math.inf
        for b in (2, 4, 8):
            spec = BlockSpec(4 * (b + 1), b)
            A = shift(build_tbn(spec), 0)
            idx = _superdiag_indices(spec)
            for z in _grid():
                eps = epsilon_stability(RowSet.from_matrix(shift(A, z), idx)).epsilon
                worst = min(worst, eps - closed_form_superdiag(z))
        return worst

    margin, sec = _timed(work)
    return CriterionResult("2c", "superdiagonal rows clear the superdiagonal bound", margin >= -1e-9 and sec < 60,
                           f"min(eps - bound)={margin:.3e}", sec)


def criterion_2_exact() -> CriterionResult:
    """Numeric distances against the exact per-row formulas (all rows and superdiagonal rows)."""
    def work():
        worst = 0.0
        for b in (2, 4, 8):
            spec = BlockSpec(4 * (b + 1), b)
            T = build_tbn(spec)
            for z in _grid():
                A = shift(T, z)
                num = epsilon_stability(RowSet.from_matrix(A)).per_row_distance
                worst = max(worst, float(np.max(np.abs(num - all_rows_report(spec, z).per_row_distance))))
                one = epsilon_stability(RowSet.from_matrix(shift(build_tn(b + 1), z)))
                rows = shift(build_tn(b + 2), z).entries[: b + 1]
                sd = epsilon_stability(RowSet(rows)).per_row_distance
                worst = max(worst, abs(one.epsilon - all_rows_report(BlockSpec(b + 1, b), z).epsilon),
                            float(np.max(np.abs(sd - superdiag_row_distances(z, b + 1)))))
        return worst

    dev, sec = _timed(work)
    return CriterionResult("2-exact", "numeric eps equals the exact per-row distance formulas",
                           dev <= 1e-9 and sec < 60, f"max deviation={dev:.3e}", sec)


# ------------------------------------------------------------------ 3


def _pairwise_offdiag(w: np.ndarray) -> float:
    if w.shape[0] < 2:
        return 0.0
    G = w.conj() @ w.T
    return float(np.max(np.abs(G - np.diag(np.diag(G)))))


def _mutual(a: np.ndarray, b: np.ndarray) -> float:
    d1 = max(dist_to_span(v, b) for v in a)
    d2 = max(dist_to_span(v, a) for v in b)
    return max(d1, d2)


def _source_rows(z, lo: int, hi: int, n: int) -> np.ndarray:
    """Rows ``z e_i + e_{i+1}`` for ``lo <= i <= hi`` (1-based) in ``C^n``."""
    out = np.zeros((hi - lo + 1, n), dtype=np.complex128)
    for r, i in enumerate(range(lo, hi + 1)):
        out[r, i - 1] = z
        out[r, i] = 1.0
    return out


def criterion_3() -> CriterionResult:
    def work():
        ortho = span = norm = 0.0
        for z in (0.5, 0.5 + 0.5j, 2.0):
            x = abs(z) ** 2
            for m in range(1, 13):
                n = m + 1
                w = orthobasis_topdown(z, m, n)
                src = _source_rows(z, 1, m, n)
                ortho = max(ortho, _pairwise_offdiag(w))
                span = max(span, _mutual(w, src))
                for k in range(1, m + 1):
                    want = geometric_sum(x, k + 1) / geometric_sum(x, k)
                    norm = max(norm, abs(float(np.vdot(w[k - 1], w[k - 1]).real) - want))
                for ell in range(0, m):
                    w = orthobasis_botup(z, ell, m, n)
                    src = _source_rows(z, ell + 1, m, n)
                    ortho = max(ortho, _pairwise_offdiag(w))
                    span = max(span, _mutual(w, src))
                    for r, k in enumerate(range(ell + 1, m + 1)):
                        want = geometric_sum(x, m - k + 2) / geometric_sum(x, m - k + 1)
                        norm = max(norm, abs(float(np.vdot(w[r], w[r]).real) - want))
                b = m
                for ell in range(0, b + 1):
                    w = orthobasis_botstan(z, ell, b)
                    src = np.vstack([_source_rows(z, ell + 1, b, b + 1)] if ell + 1 <= b else
                                    [np.zeros((0, b + 1), dtype=np.complex128)])
                    last = np.zeros((1, b + 1), dtype=np.complex128)
                    last[0, b] = z
                    src = np.vstack([src, last])
                    ortho = max(ortho, _pairwise_offdiag(w))
                    span = max(span, _mutual(w, src))
                    norm = max(norm, float(np.max(np.abs(np.linalg.norm(w, axis=1) - abs(z)))))
        return ortho, span, norm

    (o, s, nm), sec = _timed(work)
    ok = o <= 1e-10 and s <= 1e-9 and nm <= 1e-10
    return CriterionResult("3", "explicit orthogonal bases", ok,
                           f"max inner product={o:.2e}, max span distance={s:.2e}, max norm error={nm:.2e}", sec)


# ------------------------------------------------------------------ 4


def _rand_vecs(rng, k, n):
    return (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / math.sqrt(2)


def target_perturbation_instances(count=1000, seed=11):
    """Yield ``(measured_change, bound)`` for one-row perturbations of the target vector."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 21))
        i = int(rng.integers(1, n + 1))
        Z = _rand_vecs(rng, i, n)
        phi = _rand_vecs(rng, 1, n)[0]
        f = float(rng.uniform(0, 2)) * 10.0 ** float(rng.uniform(-6, 0))
        S = Z[:-1]
        change = abs(dist_to_span(Z[-1], S) - dist_to_span(Z[-1] + f * phi, S))
        yield change, f * float(np.linalg.norm(phi))


def spanning_perturbation_instances(count=1000, seed=12):
    """Yield ``(measured_change, bound)`` when the first spanning vector is perturbed."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < count:
        n = int(rng.integers(3, 21))
        i = int(rng.integers(2, n + 1))
        Z = _rand_vecs(rng, i, n)
        phi = _rand_vecs(rng, 1, n)[0]
        d1 = dist_to_span(Z[0], Z[1:i - 1])
        fphi = float(rng.uniform(0.0, 0.95)) * d1 * 10.0 ** float(rng.uniform(-4, 0))
        f = fphi / float(np.linalg.norm(phi))
        moved = Z[: i - 1].copy()
        moved[0] = moved[0] + f * phi
        change = abs(dist_to_span(Z[-1], Z[: i - 1]) - dist_to_span(Z[-1], moved))
        bound = bound_perturbed_spanning(float(np.linalg.norm(Z[-1])), fphi, d1)
        done += 1
        yield change, bound


def span_perturbation_instances(count=1000, seed=13):
    """Yield ``(measured_change, bound)`` for the all-rows perturbation bound."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < count:
        n = int(rng.integers(2, 16))
        k = int(rng.integers(1, n + 1))
        Z = _rand_vecs(rng, k, n)
        eps = epsilon_stability(RowSet(Z)).epsilon
        zmax = max(1.0, float(np.max(np.linalg.norm(Z, axis=1))))
        if not 0 < eps <= 40:
            continue
        # largest admissible f||phi|| solves 40 k f (zmax + f) = (eps/2)^2
        q = (eps / 2) ** 2 / (40 * k)
        fcap = (-zmax + math.sqrt(zmax * zmax + 4 * q)) / 2
        fmax = fcap * float(rng.uniform(0.01, 0.99))
        dirs = _rand_vecs(rng, k, n)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        scales = fmax * rng.uniform(0.0, 1.0, size=k)
        scales[int(rng.integers(k))] = fmax
        P = dirs * scales[:, None]
        v = _rand_vecs(rng, 1, n)[0]
        budget = PerturbationBudget(eps, k, fmax, zmax)
        try:
            first, _ = span_perturbation_bound(budget, float(np.linalg.norm(v)))
        except HypothesisError:
            continue
        change = abs(dist_to_span(v, Z) - dist_to_span(v, Z + P))
        done += 1
        yield change, first


def criterion_4() -> CriterionResult:
    def work():
        out = []
        for gen in (target_perturbation_instances, spanning_perturbation_instances, span_perturbation_instances):
            viol = sum(c > b + ROUNDING_SLACK * (1 + b) for c, b in gen())
            out.append(viol)
        return out

    viol, sec = _timed(work)
    return CriterionResult("4", "perturbation inequalities", sum(viol) == 0,
                           f"violations target/spanning/span-bound = {viol[0]}/{viol[1]}/{viol[2]} of 1000 each",
                           sec)


# ------------------------------------------------------------------ 5


def criterion_5(jobs: int = 1) -> CriterionResult:
    def work():
        med, nonconv = {}, 0
        for n in (50, 500):
            trials = block_trials([n], "n-minus-1", 10.0, ["cgauss"], range(5), jobs)
            nonconv += sum(not t.converged for t in trials)
            atoms = np.concatenate([t.atoms for t in trials])
            med[n] = float(np.median(np.abs(np.abs(atoms) - 1.0)))
        return med, nonconv

    (med, nonconv), sec = _timed(work)
    ok = med[500] < FIG1_MEDIAN_MAX and med[500] < med[50] and nonconv == 0 and sec < 300
    return CriterionResult("5", "figure-1 reproduction", ok,
                           f"median||lambda|-1| n=500: {med[500]:.4f} (threshold {FIG1_MEDIAN_MAX}), "
                           f"n=50: {med[50]:.4f}, nonconverged={nonconv}", sec)


# ------------------------------------------------------------------ 6


def criterion_6(jobs: int = 1) -> CriterionResult:
    def work():
        dist = []
        for n in (128, 256, 512):
            trials = block_trials([n], "n-minus-1", 2.0, ["cgauss", "bern"], range(20), jobs)
            g = pooled(t.esd for t in trials if t.ensemble == "cgauss")
            b = pooled(t.esd for t in trials if t.ensemble == "bern")
            dist.append(radial_cdf_distance(g, b))
        return dist

    d, sec = _timed(work)
    ok = d[0] > d[1] > d[2] and d[2] < UNIVERSALITY_FINAL_MAX and sec < 1800
    return CriterionResult("6", "universality trend (pooled radial CDF distance)", ok,
                           "distance " + " > ".join(f"{x:.4f}" for x in d)
                           + f" (final threshold {UNIVERSALITY_FINAL_MAX})", sec)


# ------------------------------------------------------------------ 7


_regime_cache: dict = {}


def _regime_esds(jobs: int):
    if "esds" not in _regime_cache:
        n = 512
        small = block_trials([n], "fixed:2", 2.0, ["bern"], range(20), jobs)
        large = block_trials([n], "n-minus-1", 2.0, ["bern"], range(20), jobs)
        _regime_cache["esds"] = ([t.esd for t in small], [t.esd for t in large],
                                 all(t.converged for t in small + large))
    return _regime_cache["esds"]


def _regime(metric: Callable[[ESD, object], float], jobs: int):
    small, large, conv = _regime_esds(jobs)
    med = lambda esds, ref: float(np.median([metric(e, ref) for e in esds]))  # noqa: E731
    return (med(small, DIRAC_ZERO), med(large, DIRAC_ZERO),
            med(small, UNIT_CIRCLE), med(large, UNIT_CIRCLE), conv)


def _regime_result(key, title, metric, jobs, documented):
    t = time.perf_counter()
    s_d, l_d, s_c, l_c, conv = _regime(metric, jobs)
    sec = time.perf_counter() - t
    f1 = l_d / s_d if s_d > 0 else math.inf
    f2 = s_c / l_c if l_c > 0 else math.inf
    ok = f1 >= REGIME_FACTOR and f2 >= REGIME_FACTOR and conv and sec < 1800
    return CriterionResult(key, title, ok,
                           f"to delta_0: b=2 {s_d:.4f} vs b=n-1 {l_d:.4f} (x{f1:.1f}); "
                           f"to circle: b=n-1 {l_c:.4f} vs b=2 {s_c:.4f} (x{f2:.1f}); need x{REGIME_FACTOR:g}",
                           sec, documented)


def criterion_7_ks(jobs: int = 1) -> CriterionResult:
    return _regime_result("7", "block regimes, sup radial CDF distance", radial_cdf_distance, jobs, True)


def criterion_7_w1(jobs: int = 1) -> CriterionResult:
    return _regime_result("7-w1", "block regimes, L1 radial CDF distance", radial_transport_distance, jobs, False)


# ------------------------------------------------------------------ 8


def criterion_8(jobs: int = 1) -> CriterionResult:
    from .experiments import parallel_map

    def work():
        ns = (100, 200, 400)
        diags = parallel_map(lambda n: replacement_diagnostic(build_tn(n), 2.0, NoiseEnsemble("cgauss"),
                                                              NoiseEnsemble("bern"), DEFAULT_Z_GRID,
                                                              range(20)), list(ns), jobs)
        med = np.array([d.median_gaps() for d in diags])
        return med, sum(d.singular_count for d in diags)

    (med, sing), sec = _timed(work)
    dec = int(np.sum(np.all(np.diff(med, axis=0) < 0, axis=0)))
    final = float(np.nanmax(med[-1]))
    ok = dec >= REPLACEMENT_MIN_DECREASING and final <= REPLACEMENT_FINAL_MAX
    return CriterionResult("8", "replacement gaps shrink with n", ok,
                           f"{dec}/12 z decreasing (need {REPLACEMENT_MIN_DECREASING}), "
                           f"max final median {final:.2e} (threshold {REPLACEMENT_FINAL_MAX:g}), singular={sing}",
                           sec)


# ------------------------------------------------------------------ 9


def criterion_9() -> CriterionResult:
    def work():
        out = {}
        for z in (0j, 2 + 0j):
            out[z] = sum(verify_manystable(256, NoiseEnsemble("cgauss"), z, s).passed for s in range(20))
        return out

    res, sec = _timed(work)
    ok = all(v >= 19 for v in res.values())
    return CriterionResult("9", "many stable rows", ok,
                           ", ".join(f"z={z.real:g}: {v}/20 pass" for z, v in res.items()), sec)


# ------------------------------------------------------------------ 10


def criterion_10() -> CriterionResult:
    def work():
        worst_mean = worst_var = 0.0
        for name in CLI_NAMES:
            x = NoiseEnsemble(name).draw(Stream(stream_key(2024)), np.arange(10 ** 6))
            worst_mean = max(worst_mean, abs(x.real.mean()), abs(x.imag.mean()))
            worst_var = max(worst_var, abs(np.mean(x.real ** 2 + x.imag ** 2) - 1.0))
        return worst_mean, worst_var

    (m, v), sec = _timed(work)
    ok = m <= 5e-3 and v <= 5e-3 and sec < 10
    return CriterionResult("10", "ensemble normalization", ok,
                           f"max|mean|={m:.2e}, max|E|x|^2-1|={v:.2e}", sec)


FAST = ("1", "2a", "2b", "2c", "2-exact", "3", "4", "9", "10")
CRITERIA: dict[str, Callable[..., CriterionResult]] = {
    "1": criterion_1,
    "2a": criterion_2a,
    "2b": criterion_2b,
    "2c": criterion_2c,
    "2-exact": criterion_2_exact,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7_ks,
    "7-w1": criterion_7_w1,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
}
TAKES_JOBS = {"5", "6", "7", "7-w1", "8"}


def run(key: str, jobs: int = 1) -> CriterionResult:
    fn = CRITERIA[key]
    return fn(jobs) if key in TAKES_JOBS else fn()
