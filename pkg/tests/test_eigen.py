import numpy as np
import pytest
from hypothesis import given, strategies as st

from esdlab.eigen import (
    eigenvalues, hessenberg, multiset_distance, singular_values, smallest_singular_value,
    sort_multiset,
)
from esdlab.matrix import build_tn, log_abs_det_lu

from helpers import crandn, random_unitary

seeds = st.integers(0, 2**32 - 1)


def test_nilpotent_spectrum_is_zero():
    for n in (1, 2, 7, 30):
        sp = eigenvalues(build_tn(n))
        assert sp.converged and np.all(sp.eigenvalues == 0)


def test_diagonal_and_permutation():
    sp = eigenvalues(np.diag([3.0, -1.0, 2j]))
    assert multiset_distance(sp.eigenvalues, [3, -1, 2j]) < 1e-14
    P = np.roll(np.eye(5), 1, axis=1)
    w = eigenvalues(P).eigenvalues
    assert multiset_distance(w, np.exp(2j * np.pi * np.arange(5) / 5)) < 1e-12


def test_singular_value_examples():
    sv = singular_values(np.diag([3.0, -4.0]))
    np.testing.assert_allclose(sv.values, [4, 3], atol=1e-14)
    assert sv.largest == pytest.approx(4.0)
    np.testing.assert_allclose(singular_values(build_tn(6)).values, [1] * 5 + [0], atol=1e-14)
    Q = random_unitary(np.random.default_rng(0), 8)
    np.testing.assert_allclose(singular_values(Q).values, 1.0, atol=1e-12)
    assert smallest_singular_value(np.diag([1.0, 0.25])) == pytest.approx(0.25)


@given(st.integers(2, 30), seeds)
def test_agrees_with_lapack(n, seed):
    A = crandn(np.random.default_rng(seed), n, n)
    sp = eigenvalues(A)
    assert sp.converged
    assert multiset_distance(sp.eigenvalues, np.linalg.eigvals(A)) < 1e-9 * n
    assert sp.residual_estimate < 1e-10


@given(st.integers(2, 30), seeds)
def test_similarity_invariance(n, seed):
    rng = np.random.default_rng(seed)
    A = crandn(rng, n, n)
    Q = random_unitary(rng, n)
    d = multiset_distance(eigenvalues(A).eigenvalues, eigenvalues(Q @ A @ Q.conj().T).eigenvalues)
    assert d < 1e-8 * n


@given(st.integers(2, 25), seeds, st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_shift_equivariance(n, seed, z):
    A = crandn(np.random.default_rng(seed), n, n)
    w = eigenvalues(A).eigenvalues
    wz = eigenvalues(A + z * np.eye(n)).eigenvalues
    assert multiset_distance(wz, w + z) < 1e-9 * n


@given(st.integers(2, 25), seeds)
def test_det_products_agree(n, seed):
    A = crandn(np.random.default_rng(seed), n, n)
    a = np.sum(np.log(np.abs(eigenvalues(A).eigenvalues)))
    b = np.sum(np.log(singular_values(A).values))
    c = log_abs_det_lu(A)
    assert abs(a - c) <= 1e-8 * max(1, abs(c)) and abs(b - c) <= 1e-8 * max(1, abs(c))


@given(st.integers(1, 30), seeds)
def test_hessenberg_form_and_norm(n, seed):
    A = crandn(np.random.default_rng(seed), n, n)
    H = hessenberg(A)
    assert np.all(np.tril(H, -2) == 0)
    assert np.linalg.norm(H) == pytest.approx(np.linalg.norm(A), rel=1e-10)
    assert np.trace(H) == pytest.approx(np.trace(A), abs=1e-10 * n)
    sv = singular_values(A).values
    assert np.all(sv >= 0) and np.all(np.diff(sv) <= 0)


def test_iteration_cap_sets_flag():
    A = crandn(np.random.default_rng(1), 20, 20)
    sp = eigenvalues(A, max_sweeps=1)
    assert not sp.converged and sp.n == 20


def test_sort_multiset_lexicographic():
    w = sort_multiset([1 + 1j, 1 - 1j, -2, 0.5j])
    assert w.tolist() == [-2, 0.5j, 1 - 1j, 1 + 1j]
    with pytest.raises(ValueError):
        multiset_distance([1, 2], [1])
