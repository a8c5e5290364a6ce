"""Pre-registration run for the Monte Carlo acceptance thresholds.

Recomputes the statistics of the figure-1, universality, block-regime and
replacement gates on exactly the matrices the acceptance suite uses, but with
LAPACK (``numpy.linalg.eigvals`` / ``slogdet``) in place of the in-house
kernels. The printed values were used to freeze the constants in
``esdlab.acceptance``; rerun with ``python tools/oracle_thresholds.py``.
"""

import json
import sys
import time

import numpy as np

from esdlab.esd import DIRAC_ZERO, UNIT_CIRCLE, ESD, pooled, radial_cdf_distance, radial_transport_distance
from esdlab.experiments import perturbed_matrix
from esdlab.matrix import BlockSpec, build_tbn, build_tn, shift
from esdlab.replacement import DEFAULT_Z_GRID


def lapack_esd(M, gamma, ens, seed):
    return ESD(np.linalg.eigvals(perturbed_matrix(M, gamma, ens, seed).entries))


def figure1():
    out = {}
    for n in (50, 500):
        atoms = np.concatenate([lapack_esd(build_tn(n), 10.0, "cgauss", s).atoms for s in range(5)])
        out[n] = float(np.median(np.abs(np.abs(atoms) - 1.0)))
    return out


def universality():
    out = {}
    for n in (128, 256, 512):
        g = pooled(lapack_esd(build_tn(n), 2.0, "cgauss", s) for s in range(20))
        b = pooled(lapack_esd(build_tn(n), 2.0, "bern", s) for s in range(20))
        out[n] = dict(ks=radial_cdf_distance(g, b), w1=radial_transport_distance(g, b))
    return out


def regimes():
    n = 512
    res = {}
    for label, b in (("b2", 2), ("bn1", n - 1)):
        T = build_tbn(BlockSpec(n, b))
        esds = [lapack_esd(T, 2.0, "bern", s) for s in range(20)]
        res[label] = {
            "ks_dirac": float(np.median([radial_cdf_distance(e, DIRAC_ZERO) for e in esds])),
            "ks_circle": float(np.median([radial_cdf_distance(e, UNIT_CIRCLE) for e in esds])),
            "w1_dirac": float(np.median([radial_transport_distance(e, DIRAC_ZERO) for e in esds])),
            "w1_circle": float(np.median([radial_transport_distance(e, UNIT_CIRCLE) for e in esds])),
        }
    return res


def replacement():
    med = {}
    for n in (100, 200, 400):
        T = build_tn(n)
        rows = []
        for z in DEFAULT_Z_GRID:
            gaps = []
            for s in range(20):
                a = shift(perturbed_matrix(T, 2.0, "cgauss", s), z).entries
                b = shift(perturbed_matrix(T, 2.0, "bern", s), z).entries
                gaps.append(abs(np.linalg.slogdet(a)[1] - np.linalg.slogdet(b)[1]) / n)
            rows.append(float(np.median(gaps)))
        med[n] = rows
    dec = sum(med[100][j] > med[200][j] > med[400][j] for j in range(len(DEFAULT_Z_GRID)))
    return dict(medians=med, decreasing=dec)


def main(which):
    jobs = dict(figure1=figure1, universality=universality, regimes=regimes, replacement=replacement)
    for name in which or jobs:
        t = time.time()
        print(name, json.dumps(jobs[name](), indent=1), f"({time.time() - t:.1f}s)", flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
