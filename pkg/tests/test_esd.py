import numpy as np
import pytest
from hypothesis import given, strategies as st

from esdlab.eigen import Spectrum
from esdlab.esd import (
    DIRAC_ZERO, ESD, UNIT_CIRCLE, UNIT_DISK, ReferenceMeasure, TestFunctionFamily,
    esd_from_spectrum, pooled, radial_cdf, radial_cdf_distance, radial_transport_distance,
    testfn_distance as tf_distance,
)

seeds = st.integers(0, 2**32 - 1)


def rand_esd(rng, k=None):
    k = int(rng.integers(1, 40)) if k is None else k
    return ESD(rng.uniform(0, 2.5, k) * np.exp(2j * np.pi * rng.uniform(size=k)))


def disk_quantiles(n):
    k = np.arange(1, n + 1)
    return ESD(np.sqrt(k / n) * np.exp(2.399963j * k))


def test_esd_basics():
    e = ESD([1, 1j, -2])
    assert e.n == 3 and e.moduli().tolist() == [1, 1, 2]
    assert e.translate(1).atoms.tolist() == [2, 1 + 1j, -1]
    assert e.to_csv().splitlines()[0] == "re,im"
    with pytest.raises(ValueError):
        ReferenceMeasure("gaussian")
    assert pooled([ESD([1]), ESD([2])]).n == 2


def test_refuses_unconverged_spectrum():
    sp = Spectrum(np.zeros(3, complex), 5, False, 0.0)
    with pytest.raises(ValueError):
        esd_from_spectrum(sp)
    assert esd_from_spectrum(Spectrum(np.zeros(3, complex), 0, True, 0.0)).n == 3


def test_radial_examples():
    assert radial_cdf_distance(ESD(np.zeros(10)), DIRAC_ZERO) == 0.0
    ring = ESD(np.exp(2j * np.pi * np.arange(64) / 64))
    assert radial_cdf_distance(ring, UNIT_CIRCLE) == 0.0
    assert radial_cdf_distance(ESD(np.zeros(10)), UNIT_CIRCLE) == 1.0
    assert radial_cdf_distance(disk_quantiles(4000), UNIT_DISK) <= 1 / 2000
    assert radial_cdf(ESD([0.5, 2.0]), [0.4, 0.5, 3]).tolist() == [0, 0.5, 1]


def test_transport_examples():
    assert radial_transport_distance(ESD(np.zeros(5)), DIRAC_ZERO) == 0.0
    assert radial_transport_distance(ESD(np.zeros(5)), UNIT_CIRCLE) == pytest.approx(1.0)
    assert radial_transport_distance(ESD(0.5 * np.ones(4)), UNIT_CIRCLE) == pytest.approx(0.5)
    assert radial_transport_distance(disk_quantiles(4000), UNIT_DISK) < 1e-3
    # the disk's mean radius is 2/3
    assert radial_transport_distance(ESD([0.0]), UNIT_DISK) == pytest.approx(2 / 3)


@given(seeds)
def test_transport_between_equal_size_esds(seed):
    rng = np.random.default_rng(seed)
    a, b = rand_esd(rng, 17), rand_esd(rng, 17)
    ref = np.mean(np.abs(np.sort(a.moduli()) - np.sort(b.moduli())))
    assert radial_transport_distance(a, b) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("metric", [radial_cdf_distance, radial_transport_distance, tf_distance])
@given(seed=seeds)
def test_metric_axioms(metric, seed):
    rng = np.random.default_rng(seed)
    a, b, c = rand_esd(rng), rand_esd(rng), rand_esd(rng)
    ab = metric(a, b)
    assert ab >= 0 and ab == pytest.approx(metric(b, a), abs=1e-12)
    assert ab <= metric(a, c) + metric(c, b) + 1e-12
    assert metric(a, a) == 0.0
    perm = ESD(a.atoms[rng.permutation(a.n)])
    assert metric(perm, b) == pytest.approx(ab, abs=1e-12)


def test_testfn_examples():
    fam = TestFunctionFamily.default()
    assert len(fam) == 162
    assert tf_distance(ESD(np.zeros(7)), DIRAC_ZERO) == 0.0
    assert tf_distance(ESD([0.0]), ESD([0.5])) > 0.5
    n = 4096
    ring = ESD(np.exp(2j * np.pi * (np.arange(n) + 0.37) / n))
    narrow = TestFunctionFamily(fam.centers, (0.25,))
    assert tf_distance(ring, UNIT_CIRCLE, narrow) < 1e-3
    assert tf_distance(disk_quantiles(20000), UNIT_DISK) < 0.02
