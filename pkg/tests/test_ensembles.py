import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from esdlab.ensembles import (
    CLI_NAMES, NoiseEnsemble, NoiseMatrixSpec, Stream, sample_entries, sample_noise_matrix,
    sample_scalar, stream_key,
)
from esdlab.matrix import frobenius_norm_sq_over_n

N_GATE = 10**6
ALL = sorted(CLI_NAMES)


def big_sample(name, count=N_GATE, seed=0):
    return NoiseEnsemble(name).draw(Stream(stream_key(seed, 99)), np.arange(count))


def test_names_and_validation():
    assert NoiseEnsemble("bern").kind == "bernoulliPM1"
    assert NoiseEnsemble("complexGaussian").name == "cgauss"
    with pytest.raises(ValueError):
        NoiseEnsemble("cauchy")
    with pytest.raises(ValueError):
        NoiseMatrixSpec(0, 1.0, "cgauss", 0)
    with pytest.raises(ValueError):
        NoiseMatrixSpec(4, -1.0, "cgauss", 0)


@pytest.mark.parametrize("name", ALL)
def test_normalization(name):
    x = big_sample(name)
    assert abs(x.mean()) < 5e-3
    assert abs(np.mean(np.abs(x) ** 2) - 1) < 5e-3
    if name != "cgauss" and name != "cbern4":
        assert np.all(x.imag == 0)


@pytest.mark.parametrize("name", ALL)
def test_lag_one_correlation(name):
    x = big_sample(name, seed=5)
    c = np.mean(x[1:] * np.conj(x[:-1]))
    assert abs(c) < 5e-3


def test_supports():
    assert set(np.unique(big_sample("bern", 1000).real)) == {-1.0, 1.0}
    assert set(np.round(big_sample("cbern4", 1000), 12)) == {1, -1, 1j, -1j}
    u = big_sample("usym", 10**5).real
    assert u.min() >= -np.sqrt(3) and u.max() <= np.sqrt(3)
    g = big_sample("cgauss", 10**5)
    assert abs(np.mean(g.real ** 2) - 0.5) < 0.01 and abs(np.mean(g.real * g.imag)) < 0.01


def test_sample_scalar_is_counter_addressed():
    s = Stream(stream_key(3, 1))
    e = NoiseEnsemble("rgauss")
    full = e.draw(s, np.arange(10))
    assert sample_scalar(e, s, 7) == full[7]


@given(st.integers(1, 30), st.integers(0, 2**63 - 1), st.sampled_from(ALL), st.data())
def test_row_subsets_match_full_matrix(n, seed, name, data):
    spec = NoiseMatrixSpec(n, 0.0, name, seed)
    rows = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n))
    full = sample_entries(spec, np.arange(n))
    np.testing.assert_array_equal(sample_entries(spec, rows), full[rows])


def test_determinism_and_independence():
    a = sample_noise_matrix(NoiseMatrixSpec(20, 1.0, "cgauss", 1))
    assert a == sample_noise_matrix(NoiseMatrixSpec(20, 1.0, "cgauss", 1))
    assert a != sample_noise_matrix(NoiseMatrixSpec(20, 1.0, "cgauss", 2))
    b = sample_noise_matrix(NoiseMatrixSpec(20, 1.0, "rgauss", 1))
    assert not np.allclose(a.entries.real, b.entries.real)


def test_thread_count_does_not_matter():
    specs = [NoiseMatrixSpec(64, 2.0, "bern", s) for s in range(8)]
    serial = [sample_noise_matrix(s).entries for s in specs]
    out = [None] * len(specs)

    def work(i):
        out[i] = sample_noise_matrix(specs[i]).entries

    threads = [threading.Thread(target=work, args=(i,)) for i in range(len(specs))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for a, b in zip(serial, out):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("name", ALL)
def test_frobenius_scale(name):
    n = 200
    X = sample_noise_matrix(NoiseMatrixSpec(n, 0.0, name, 4)).entries
    # (1/n) ||sqrt(n) X||_F^2 has mean n
    assert frobenius_norm_sq_over_n(np.sqrt(n) * X) == pytest.approx(n, rel=0.05)


def test_gamma_scaling():
    n = 50
    X = sample_noise_matrix(NoiseMatrixSpec(n, 10.0, "bern", 0)).entries
    assert np.max(np.abs(X)) == pytest.approx(n ** -10.5)
    Z = sample_noise_matrix(NoiseMatrixSpec(n, float("inf"), "bern", 0)).entries
    assert np.all(Z == 0)
