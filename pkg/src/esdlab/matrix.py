"""Dense complex matrices, the nilpotent block constructors and a few
elementary functionals (normalized Frobenius norm, LU log-determinant)."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import _backend

__all__ = [
    "ComplexMatrix",
    "BlockSpec",
    "SingularFlag",
    "SINGULAR",
    "as_array",
    "build_tn",
    "build_tbn",
    "shift",
    "add_scaled",
    "frobenius_norm_sq_over_n",
    "log_abs_det_lu",
    "dump_matrix",
    "load_matrix",
]


class ComplexMatrix:
    """Immutable dense ``n x n`` complex matrix.

    The entries are stored as a read-only row-major ``complex128`` array.
    Construction rejects non-square input, ``n = 0`` and non-finite entries.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.complex128, copy=True, order="C")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("matrix dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a.setflags(write=False)
        self._a = a

    @property
    def n(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._a

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == self._a.dtype:
            return self._a.copy() if copy else self._a
        return self._a.astype(dtype)

    def row(self, i: int) -> np.ndarray:
        return self._a[i]

    def copy_array(self) -> np.ndarray:
        """Return a writable copy of the entries."""
        return self._a.copy()

    def __eq__(self, other):
        if not isinstance(other, ComplexMatrix):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self.n, self._a.tobytes()))

    def __repr__(self):
        return f"ComplexMatrix(n={self.n})"


def as_array(A) -> np.ndarray:
    """View ``A`` (ComplexMatrix or array-like) as a square complex ndarray."""
    if isinstance(A, ComplexMatrix):
        return A.entries
    a = np.asarray(A, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class BlockSpec:
    """Shape of ``T_{b,n}``: ``n // (b+1)`` blocks ``T_{b+1}`` then ``T_k``."""

    n: int
    b: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("T_{b,n} needs n >= 2")
        if not 1 <= self.b <= self.n - 1:
            raise ValueError(f"block parameter must satisfy 1 <= b <= n-1, got b={self.b}, n={self.n}")

    @property
    def trailing_block_size(self) -> int:
        return self.n - (self.n // (self.b + 1)) * (self.b + 1)

    @property
    def block_sizes(self) -> list[int]:
        sizes = [self.b + 1] * (self.n // (self.b + 1))
        if self.trailing_block_size:
            sizes.append(self.trailing_block_size)
        return sizes

    def superdiagonal(self) -> np.ndarray:
        """The 0/1 superdiagonal: runs of ``b`` ones split by single zeros."""
        pattern = []
        for size in self.block_sizes:
            if pattern:
                pattern.append(0)
            pattern.extend([1] * (size - 1))
        return np.array(pattern, dtype=int)


class SingularFlag:
    """Sentinel returned by :func:`log_abs_det_lu` for a numerically singular matrix."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "SINGULAR"

    def __bool__(self):
        return False


SINGULAR = SingularFlag()


def build_tn(n: int) -> ComplexMatrix:
    """Nilpotent ``n x n`` Jordan block: ones at ``(i, i+1)``, zero elsewhere."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return ComplexMatrix(np.eye(n, k=1, dtype=np.complex128))


def build_tbn(spec: BlockSpec) -> ComplexMatrix:
    a = np.zeros((spec.n, spec.n), dtype=np.complex128)
    idx = np.arange(spec.n - 1)
    a[idx, idx + 1] = spec.superdiagonal()
    return ComplexMatrix(a)


def shift(A, z: complex) -> ComplexMatrix:
    """``A + z I``."""
    a = np.array(as_array(A), dtype=np.complex128)
    a[np.diag_indices_from(a)] += z
    return ComplexMatrix(a)


def add_scaled(A, X, s: float) -> ComplexMatrix:
    """``A + s X`` entrywise."""
    a, x = as_array(A), as_array(X)
    if a.shape != x.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    return ComplexMatrix(a + s * x)


def frobenius_norm_sq_over_n(A) -> float:
    a = as_array(A)
    return float(np.sum(a.real ** 2 + a.imag ** 2) / a.shape[0])


def log_abs_det_lu(A, backend: str | None = None):
    """``log|det A|`` from row-pivoted LU, or :data:`SINGULAR`.

    A pivot below ``n * eps * max_row_norm`` (Euclidean row norms of ``A``)
    makes the matrix numerically singular.
    """
    work = np.array(as_array(A), dtype=np.complex128, order="C")
    value, singular = _backend.get(backend).lu_log_abs_det(work)
    return SINGULAR if singular else value


_TOKEN = re.compile(r"^([+-]?[^+-]*(?:[eE][+-]?\d+)?)([+-][^+-]*(?:[eE][+-]?\d+)?)i$")


def _format_entry(x: complex) -> str:
    return f"{x.real:.17g}{x.imag:+.17g}i"


def _parse_entry(token: str) -> complex:
    m = _TOKEN.match(token)
    if m is None:
        raise ValueError(f"bad matrix entry {token!r}")
    return complex(float(m.group(1)), float(m.group(2)))


def dump_matrix(A, fh) -> None:
    """Write ``n`` then ``n`` lines of ``re+imi`` tokens."""
    a = as_array(A)
    fh.write(f"{a.shape[0]}\n")
    for row in a:
        fh.write(" ".join(_format_entry(x) for x in row) + "\n")


def load_matrix(fh) -> ComplexMatrix:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    n = int(lines[0])
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        toks = ln.split()
        if len(toks) != n:
            raise ValueError(f"expected {n} entries per row, found {len(toks)}")
        rows.append([_parse_entry(t) for t in toks])
    return ComplexMatrix(rows)
