import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from esdlab.eigen import singular_values
from esdlab.ensembles import NoiseEnsemble, NoiseMatrixSpec, sample_noise_matrix
from esdlab.matrix import build_tn, log_abs_det_lu, shift
from esdlab.replacement import (
    DEFAULT_Z_GRID, least_singular_experiment, log_distance_bound_check, replacement_diagnostic,
    row_distance_profile,
)

from helpers import crandn

CG, BE = NoiseEnsemble("cgauss"), NoiseEnsemble("bern")
GRID = (0.3, 0.7j, -1.3)


def test_default_grid():
    assert len(DEFAULT_Z_GRID) == 12
    assert sorted({round(abs(z), 12) for z in DEFAULT_Z_GRID}) == [0.3, 0.7, 1.3]


def test_profile_examples():
    np.testing.assert_allclose(row_distance_profile(np.diag([2.0, 3.0])).distances, [2, 3])
    d = row_distance_profile([[1, 0], [1, 1]]).distances
    np.testing.assert_allclose(d, [1, 1])
    assert row_distance_profile([[1, 2], [2, 4]]).distances[1] == 0.0


@given(st.integers(1, 50), st.integers(0, 2**32 - 1))
def test_three_way_log_determinant(n, seed):
    A = crandn(np.random.default_rng(seed), n, n)
    a = row_distance_profile(A).log_abs_det
    b = log_abs_det_lu(A)
    c = float(np.sum(np.log(singular_values(A).values)))
    assert abs(a - b) <= 1e-6 * max(1, abs(b)) and abs(c - b) <= 1e-6 * max(1, abs(b))


def test_permutation_leaves_logdet():
    rng = np.random.default_rng(8)
    A = crandn(rng, 30, 30)
    P = np.eye(30)[rng.permutation(30)]
    assert row_distance_profile(P @ A @ P.T).log_abs_det == pytest.approx(
        row_distance_profile(A).log_abs_det, abs=1e-9)


def test_diagnostic_basics():
    T = build_tn(30)
    d = replacement_diagnostic(T, 2.0, CG, BE, GRID, range(4))
    assert len(d.trials) == 12 and d.singular_count == 0
    assert all(max(c) < 4 for c in d.cond_i)
    swapped = replacement_diagnostic(T, 2.0, BE, CG, GRID, range(4))
    for z in GRID:
        np.testing.assert_allclose(d.gaps(z), swapped.gaps(z), atol=1e-14)
    same = replacement_diagnostic(T, 2.0, CG, CG, GRID, range(4))
    assert np.all(same.median_gaps() == 0)
    lines = d.to_csv().splitlines()
    assert lines[0] == "z_re,z_im,seed,logdet_a,logdet_b,gap" and len(lines) == 13
    assert d.summary_csv().splitlines()[0] == "n,z_re,z_im,median_gap,singular_trials"


def test_diagnostic_records_singular_trials():
    d = replacement_diagnostic(build_tn(10), math.inf, CG, BE, (0.0, 0.5), range(2))
    assert d.singular_count == 2
    assert np.isnan(d.median_gap(0.0)) and d.median_gap(0.5) == 0.0
    assert "singular" in d.to_csv()


def test_diagnostic_validation():
    with pytest.raises(ValueError):
        replacement_diagnostic(build_tn(5), 0.0, CG, BE)
    with pytest.raises(ValueError):
        replacement_diagnostic(build_tn(5), 2.0, CG, BE, (1j,))


def test_log_distance_examples():
    rep = log_distance_bound_check(np.eye(10))
    assert rep.max_abs_log == 0.0 and rep.ratio == 0.0
    assert log_distance_bound_check(build_tn(10)).ratio == math.inf
    with pytest.raises(ValueError):
        log_distance_bound_check(np.eye(3), start_row=4)


def test_log_distance_unperturbed_shift():
    n, z = 40, 0.5
    rep = log_distance_bound_check(shift(build_tn(n), z))
    x = z * z
    logs = [0.5 * math.log(1 + x ** k * (1 - x) / (1 - x ** k)) for k in range(1, n)]
    expected = n * abs(math.log(z)) + sum(logs)
    # the last row carries the whole determinant deficit
    assert rep.argmax_row == n
    assert rep.max_abs_log == pytest.approx(expected, rel=1e-8)
    assert rep.ratio == pytest.approx(n * abs(math.log(z)) / math.log(n), rel=0.02)


def test_log_distance_perturbed_is_modest():
    n = 200
    T = shift(build_tn(n), 0.5).entries
    for seed in range(20):
        X = sample_noise_matrix(NoiseMatrixSpec(n, 2.0, "cgauss", seed)).entries
        rep = log_distance_bound_check(T + X)
        assert math.isfinite(rep.ratio) and rep.ratio < 5


def test_least_singular():
    rep = least_singular_experiment(np.eye(40), 10.0, CG, range(3))
    assert abs(rep.c_hat) < 1e-6
    rep = least_singular_experiment(build_tn(200), 2.0, CG, range(20))
    assert math.isfinite(rep.c_hat) and rep.c_hat > 0
    assert least_singular_experiment(build_tn(20), math.inf, CG, range(1)).c_hat == math.inf
    with pytest.raises(ValueError):
        least_singular_experiment(np.eye(2) * 1e4, 2.0, CG, range(1))
