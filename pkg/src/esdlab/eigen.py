"""Eigenvalues and singular values of dense complex matrices.

Everything runs on the in-house Hessenberg + shifted QR kernels (compiled
or pure Python, see :mod:`esdlab._backend`); no LAPACK eigensolver is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .matrix import as_array

__all__ = [
    "Spectrum",
    "SingularValues",
    "hessenberg",
    "eigenvalues",
    "singular_values",
    "smallest_singular_value",
    "sort_multiset",
    "multiset_distance",
]

SWEEPS_PER_DIMENSION = 40


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues (with multiplicity) plus QR bookkeeping.

    ``residual_estimate`` is the largest subdiagonal modulus that was set to
    zero at a deflation, a cheap backward-error proxy.
    """

    eigenvalues: np.ndarray
    iterations: int
    converged: bool
    residual_estimate: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def sorted(self) -> np.ndarray:
        return sort_multiset(self.eigenvalues)


@dataclass(frozen=True)
class SingularValues:
    values: np.ndarray

    @property
    def smallest(self) -> float:
        return float(self.values[-1])

    @property
    def largest(self) -> float:
        return float(self.values[0])


def _work_copy(A) -> np.ndarray:
    return np.array(as_array(A), dtype=np.complex128, order="C")


def hessenberg(A, backend: str | None = None) -> np.ndarray:
    """Upper Hessenberg matrix unitarily similar to ``A``."""
    H = _work_copy(A)
    _backend.get(backend).hessenberg_inplace(H)
    return H


def eigenvalues(A, backend: str | None = None, max_sweeps: int | None = None) -> Spectrum:
    H = _work_copy(A)
    n = H.shape[0]
    k = _backend.get(backend)
    k.hessenberg_inplace(H)
    if max_sweeps is None:
        max_sweeps = SWEEPS_PER_DIMENSION * n
    w, sweeps, converged, residual = k.hqr_eigenvalues(H, max_sweeps)
    w = np.asarray(w, dtype=np.complex128)
    w.setflags(write=False)
    return Spectrum(w, int(sweeps), bool(converged), float(residual))


def singular_values(A, backend: str | None = None) -> SingularValues:
    """Square roots of the eigenvalues of ``A^H A``, sorted descending."""
    a = as_array(A)
    gram = a.conj().T @ a
    # enforce exact Hermitian symmetry so the QR iterates stay Hermitian-like
    gram = 0.5 * (gram + gram.conj().T)
    spec = eigenvalues(gram, backend=backend)
    lam = np.clip(spec.eigenvalues.real, 0.0, None)
    values = np.sort(np.sqrt(lam))[::-1].copy()
    values.setflags(write=False)
    return SingularValues(values)


def smallest_singular_value(A, backend: str | None = None) -> float:
    return singular_values(A, backend=backend).smallest


def sort_multiset(values) -> np.ndarray:
    """Sort complex values by (real, imag)."""
    v = np.asarray(values, dtype=np.complex128).ravel()
    order = np.lexsort((v.imag, v.real))
    return v[order]


def multiset_distance(a, b) -> float:
    """Max pairwise gap after lexicographic sorting of both multisets."""
    sa, sb = sort_multiset(a), sort_multiset(b)
    if sa.shape != sb.shape:
        raise ValueError("multisets differ in size")
    if sa.size == 0:
        return 0.0
    return float(np.max(np.abs(sa - sb)))
