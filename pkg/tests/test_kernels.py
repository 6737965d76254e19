import os
import subprocess
import sys

import numpy as np
import pytest

from cayley_ising import kernels
from cayley_ising.configurations import BoundarySpec, conditional_form, from_index
from cayley_ising.gibbs import GibbsSpec, _kernel_inputs, mcmc_sample
from cayley_ising.model import Couplings

compiled = pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")


@pytest.mark.parametrize("backend", ["python", pytest.param("cython", marks=compiled)])
@pytest.mark.parametrize("k, n, bc", [(2, 2, "plus"), (2, 1, "minus"), (3, 1, "plus")])
def test_ball_forms_match_reference(backend, k, n, bc):
    nfree, base, balls, parity = _kernel_inputs(k, n, BoundarySpec(bc), n + 1)
    forms = np.asarray(kernels.get_backend(backend).ball_forms(
        0, 2**nfree, base, nfree, balls, parity))
    for index in range(0, 2**nfree, max(1, 2**nfree // 97)):
        f = conditional_form(from_index(k, n, index, BoundarySpec(bc)))
        assert tuple(forms[index]) == (f.a, f.b, f.c_even, f.c_odd)


@compiled
def test_backends_agree_on_chunks():
    nfree, base, balls, parity = _kernel_inputs(2, 3, BoundarySpec.minus(), 4)
    py = kernels.get_backend("python").ball_forms(1000, 5000, base, nfree, balls, parity)
    cy = kernels.get_backend("cython").ball_forms(1000, 5000, base, nfree, balls, parity)
    assert np.array_equal(np.asarray(py), np.asarray(cy))


@compiled
def test_backends_give_identical_chains():
    spec = GibbsSpec(2, 2, Couplings(-1, "1/4", -1), 0.4)
    a = mcmc_sample(spec, 3000, seed=9, backend="python")
    b = mcmc_sample(spec, 3000, seed=9, backend="cython")
    assert a == b


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_var_forces_fallback():
    env = dict(os.environ, CAYLEY_ISING_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from cayley_ising import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
