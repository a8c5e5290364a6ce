"""Empirical spectral distributions and distances to the reference limits.

Three distances are provided:

* ``radial_cdf_distance``: sup over a fixed radius grid of the gap between
  radial CDFs (a Kolmogorov-type statistic on the eigenvalue moduli);
* ``radial_transport_distance``: the L1 gap between radial CDFs on
  ``[0, 3]``, i.e. the 1-Wasserstein distance of the moduli clipped to that
  window. Unlike the sup statistic it shrinks as atoms move *towards* a
  singular limit (a point mass or the circle) without landing on it;
* ``testfn_distance``: sup over a family of compactly supported bumps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union

import numpy as np

from .eigen import Spectrum

__all__ = [
    "ESD",
    "ReferenceMeasure",
    "DIRAC_ZERO",
    "UNIT_CIRCLE",
    "UNIT_DISK",
    "TestFunctionFamily",
    "RADIAL_GRID",
    "esd_from_spectrum",
    "pooled",
    "radial_cdf",
    "radial_cdf_distance",
    "radial_transport_distance",
    "testfn_distance",
]

RADIAL_GRID = np.linspace(0.0, 3.0, 2000)
R_MAX = 3.0


@dataclass(frozen=True)
class ESD:
    """Uniform probability measure on ``atoms`` (complex, with multiplicity)."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.array(self.atoms, dtype=np.complex128, copy=True).ravel()
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @property
    def n(self) -> int:
        return self.atoms.size

    def moduli(self) -> np.ndarray:
        return np.abs(self.atoms)

    def translate(self, z: complex) -> "ESD":
        return ESD(self.atoms + z)

    def to_csv(self) -> str:
        rows = ["re,im"] + [f"{x.real:.17g},{x.imag:.17g}" for x in self.atoms]
        return "\n".join(rows) + "\n"


def esd_from_spectrum(spec: Spectrum) -> ESD:
    if not spec.converged:
        raise ValueError("spectrum did not converge; refusing to build an ESD from it")
    return ESD(spec.eigenvalues)


def pooled(esds: Iterable[ESD]) -> ESD:
    """Equal-weight mixture of equally sized ESDs (atoms concatenated)."""
    esds = list(esds)
    if not esds:
        raise ValueError("nothing to pool")
    return ESD(np.concatenate([e.atoms for e in esds]))


@dataclass(frozen=True)
class ReferenceMeasure:
    kind: str

    _KINDS = ("diracZero", "unitCircleUniform", "unitDiskUniform")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown reference measure {self.kind!r}")

    def radial_cdf(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.kind == "diracZero":
            return np.where(r >= 0, 1.0, 0.0)
        if self.kind == "unitCircleUniform":
            return np.where(r >= 1.0, 1.0, 0.0)
        return np.clip(r, 0.0, None) ** 2 * (r < 1.0) + (r >= 1.0)


DIRAC_ZERO = ReferenceMeasure("diracZero")
UNIT_CIRCLE = ReferenceMeasure("unitCircleUniform")
UNIT_DISK = ReferenceMeasure("unitDiskUniform")

Target = Union[ESD, ReferenceMeasure]


def radial_cdf(mu: ESD, r) -> np.ndarray:
    """Fraction of atoms with modulus ``<= r``."""
    m = np.sort(mu.moduli())
    r = np.asarray(r, dtype=np.float64)
    if m.size == 0:
        return np.zeros_like(r)
    return np.searchsorted(m, r, side="right") / m.size


def _cdf(target: Target, r) -> np.ndarray:
    if isinstance(target, ESD):
        return radial_cdf(target, r)
    return target.radial_cdf(r)


def radial_cdf_distance(mu: ESD, target: Target) -> float:
    """``max_r |F_mu(r) - F_target(r)|`` over 2000 radii in ``[0, 3]``."""
    return float(np.max(np.abs(radial_cdf(mu, RADIAL_GRID) - _cdf(target, RADIAL_GRID))))


def _disk_gap_integral(c: float, a: float, b: float) -> float:
    """``int_a^b |c - r^2| dr`` for ``0 <= a <= b <= 1``."""
    def prim(lo, hi):  # int (c - r^2)
        return c * (hi - lo) - (hi ** 3 - lo ** 3) / 3.0
    s = np.sqrt(c)
    if s <= a:
        return -prim(a, b)
    if s >= b:
        return prim(a, b)
    return prim(a, s) - prim(s, b)


def radial_transport_distance(mu: ESD, target: Target) -> float:
    """``int_0^3 |F_mu(r) - F_target(r)| dr``, evaluated exactly.

    ``F_mu`` is a step function and every reference CDF is piecewise
    constant or quadratic, so the integral splits into closed-form pieces.
    """
    pts = [0.0, R_MAX, 1.0] + list(np.clip(mu.moduli(), 0.0, R_MAX))
    if isinstance(target, ESD):
        pts += list(np.clip(target.moduli(), 0.0, R_MAX))
    br = np.unique(np.array(pts))
    lo, hi = br[:-1], br[1:]
    mid = 0.5 * (lo + hi)
    fm = radial_cdf(mu, mid)
    if isinstance(target, ESD) or target.kind != "unitDiskUniform":
        return float(np.sum(np.abs(fm - _cdf(target, mid)) * (hi - lo)))
    total = 0.0
    for a, b, c in zip(lo, hi, fm):
        if a >= 1.0:
            total += abs(c - 1.0) * (b - a)
        else:
            total += _disk_gap_integral(float(c), float(a), float(b))
    return float(total)


@dataclass(frozen=True)
class TestFunctionFamily:
    """Bumps ``(1 - (|w - c|/h)^2)^3`` on ``|w - c| < h``."""

    __test__ = False  # keep pytest from collecting this class

    centers: tuple[complex, ...]
    bandwidths: tuple[float, ...]

    @classmethod
    def default(cls) -> "TestFunctionFamily":
        g = np.linspace(-2.0, 2.0, 9)
        centers = tuple(complex(x, y) for y in g for x in g)
        return cls(centers, (0.5, 0.25))

    def __len__(self):
        return len(self.centers) * len(self.bandwidths)

    def evaluate(self, w) -> np.ndarray:
        """Matrix ``G[f, j] = g_f(w_j)`` over all functions ``f``."""
        w = np.asarray(w, dtype=np.complex128).ravel()
        c = np.array(self.centers)
        rows = []
        for h in self.bandwidths:
            r = np.abs(w[None, :] - c[:, None]) / h
            rows.append(np.where(r < 1.0, (1.0 - np.minimum(r, 1.0) ** 2) ** 3, 0.0))
        return np.vstack(rows)

    def integrate_esd(self, mu: ESD) -> np.ndarray:
        if mu.n == 0:
            return np.zeros(len(self))
        return self.evaluate(mu.atoms).mean(axis=1)


CIRCLE_NODES = 4096
DISK_GRID = 512


@lru_cache(maxsize=None)
def _reference_integrals(kind: str, fam: TestFunctionFamily) -> np.ndarray:
    if kind == "diracZero":
        out = fam.evaluate(np.array([0.0]))[:, 0]
    elif kind == "unitCircleUniform":
        theta = 2.0 * np.pi * np.arange(CIRCLE_NODES) / CIRCLE_NODES
        out = fam.evaluate(np.exp(1j * theta)).mean(axis=1)
    else:
        # midpoint rule on the cells of a DISK_GRID^2 lattice over [-1, 1]^2
        t = -1.0 + (np.arange(DISK_GRID) + 0.5) * (2.0 / DISK_GRID)
        X, Y = np.meshgrid(t, t)
        inside = X ** 2 + Y ** 2 < 1.0
        w = (X + 1j * Y)[inside]
        out = np.zeros(len(fam))
        for start in range(0, w.size, 8192):
            out += fam.evaluate(w[start:start + 8192]).sum(axis=1)
        out /= w.size
    out.setflags(write=False)
    return out


def testfn_distance(mu1: ESD, mu2: Target, fam: TestFunctionFamily | None = None) -> float:
    """``max_g |int g dmu1 - int g dmu2|`` over the family."""
    fam = TestFunctionFamily.default() if fam is None else fam
    a = fam.integrate_esd(mu1)
    if isinstance(mu2, ESD):
        b = fam.integrate_esd(mu2)
    else:
        b = _reference_integrals(mu2.kind, fam)
    return float(np.max(np.abs(a - b)))
