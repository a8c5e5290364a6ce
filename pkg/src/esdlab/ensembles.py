"""Seeded iid noise laws (mean 0, variance 1) and scaled noise matrices.

Randomness is counter based: draw number ``i`` of a stream is a SplitMix64
finalizer applied to ``key + (i+1) * golden``, so any entry of any matrix
can be regenerated on its own, independent of fill order or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import ComplexMatrix

__all__ = [
    "KINDS",
    "CLI_NAMES",
    "NoiseEnsemble",
    "NoiseMatrixSpec",
    "Stream",
    "stream_key",
    "sample_scalar",
    "sample_noise_matrix",
]

KINDS = ("complexGaussian", "realGaussian", "bernoulliPM1", "complexBernoulli4", "uniformSym")
CLI_NAMES = {
    "cgauss": "complexGaussian",
    "rgauss": "realGaussian",
    "bern": "bernoulliPM1",
    "cbern4": "complexBernoulli4",
    "usym": "uniformSym",
}
_SHORT = {v: k for k, v in CLI_NAMES.items()}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1
_TWO53 = 2.0 ** -53


def _mix(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):  # wrap-around multiplication is intended
        x = (x ^ (x >> np.uint64(30))) * _M1
        x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def _mix_int(x: int) -> int:
    return int(_mix(np.uint64(x & _MASK)))


def stream_key(seed: int, *labels: int) -> int:
    """Fold ``seed`` and integer labels into a 64-bit stream key."""
    k = _mix_int(seed)
    for lab in labels:
        k = _mix_int(k ^ _mix_int(lab + 0x632BE59BD9B4E019))
    return k


@dataclass(frozen=True)
class Stream:
    """Random-access stream of 64-bit words; ``words(i)`` is a pure function."""

    key: int

    def words(self, counters) -> np.ndarray:
        c = np.asarray(counters, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix(np.uint64(self.key) + (c + np.uint64(1)) * _GOLDEN)

    def uniforms(self, counters) -> np.ndarray:
        """Uniform doubles in ``[0, 1)`` with 53 random bits."""
        return (self.words(counters) >> np.uint64(11)).astype(np.float64) * _TWO53


@dataclass(frozen=True)
class NoiseEnsemble:
    kind: str

    def __post_init__(self):
        kind = CLI_NAMES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown ensemble {self.kind!r}; choose from {sorted(CLI_NAMES)}")
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_name(cls, name: str) -> "NoiseEnsemble":
        return cls(name)

    @property
    def name(self) -> str:
        return _SHORT[self.kind]

    @property
    def ident(self) -> int:
        return KINDS.index(self.kind)

    def draw(self, stream: Stream, index) -> np.ndarray:
        """Draws number ``index`` (array) of the law from ``stream``.

        Each draw consumes the two words ``2*index`` and ``2*index + 1``.
        """
        idx = np.asarray(index, dtype=np.uint64)
        c0 = idx * np.uint64(2)
        u1 = stream.uniforms(c0)
        kind = self.kind
        if kind == "bernoulliPM1":
            return np.where(u1 < 0.5, -1.0, 1.0).astype(np.complex128)
        if kind == "complexBernoulli4":
            q = np.minimum((u1 * 4.0).astype(np.int64), 3)
            return np.array([1.0, 1j, -1.0, -1j])[q]
        if kind == "uniformSym":
            return (math.sqrt(3.0) * (2.0 * u1 - 1.0)).astype(np.complex128)
        u2 = stream.uniforms(c0 + np.uint64(1))
        # Box-Muller; 1 - u1 lies in (0, 1] so the log is finite
        rad = np.sqrt(-2.0 * np.log1p(-u1))
        ang = 2.0 * np.pi * u2
        g1, g2 = rad * np.cos(ang), rad * np.sin(ang)
        if kind == "realGaussian":
            return g1.astype(np.complex128)
        return (g1 + 1j * g2) / math.sqrt(2.0)


def sample_scalar(ensemble: NoiseEnsemble, stream: Stream, index: int) -> complex:
    """One unscaled draw (draw number ``index`` of ``stream``)."""
    return complex(ensemble.draw(stream, np.array([index]))[0])


@dataclass(frozen=True)
class NoiseMatrixSpec:
    """``n^-gamma * Phi`` with ``Phi`` iid ``x/sqrt(n)``; ``gamma = inf`` gives zero."""

    n: int
    gamma: float
    ensemble: NoiseEnsemble
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if isinstance(self.ensemble, str):
            object.__setattr__(self, "ensemble", NoiseEnsemble(self.ensemble))

    @property
    def scale(self) -> float:
        if math.isinf(self.gamma):
            return 0.0
        return self.n ** (-self.gamma) / math.sqrt(self.n)

    def stream(self) -> Stream:
        return Stream(stream_key(self.seed, self.ensemble.ident, self.n))


def sample_entries(spec: NoiseMatrixSpec, rows) -> np.ndarray:
    """Unscaled entries ``x`` for the given rows (any subset, any order)."""
    rows = np.asarray(rows, dtype=np.uint64)
    n = np.uint64(spec.n)
    cols = np.arange(spec.n, dtype=np.uint64)
    idx = rows[:, None] * n + cols[None, :]
    return spec.ensemble.draw(spec.stream(), idx)


def sample_noise_matrix(spec: NoiseMatrixSpec) -> ComplexMatrix:
    if spec.scale == 0.0:
        return ComplexMatrix(np.zeros((spec.n, spec.n), dtype=np.complex128))
    x = sample_entries(spec, np.arange(spec.n))
    return ComplexMatrix(spec.scale * x)
