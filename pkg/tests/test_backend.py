import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from esdlab import _backend
from esdlab.eigen import eigenvalues, hessenberg, multiset_distance
from esdlab.matrix import log_abs_det_lu

from helpers import crandn

needs_compiled = pytest.mark.skipif(_backend.compiled is None, reason="extension not built")


def test_default_is_compiled_when_available():
    assert _backend.NAME == ("compiled" if _backend.compiled is not None else "python")


def test_env_forces_python():
    env = dict(os.environ, ESDLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from esdlab import _backend; print(_backend.NAME)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
@given(st.integers(1, 25), st.integers(0, 2**32 - 1))
def test_backends_agree(n, seed):
    A = crandn(np.random.default_rng(seed), n, n)
    np.testing.assert_allclose(hessenberg(A, "compiled"), hessenberg(A, "python"), atol=1e-12)
    a, b = eigenvalues(A, "compiled"), eigenvalues(A, "python")
    assert a.converged and b.converged
    assert multiset_distance(a.eigenvalues, b.eigenvalues) < 1e-10 * n
    assert log_abs_det_lu(A, "compiled") == pytest.approx(log_abs_det_lu(A, "python"), abs=1e-10)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get("fortran")
