import math
from fractions import Fraction as F

import numpy as np
import pytest

from cayley_ising import tree
from cayley_ising.configurations import (
    BoundarySpec,
    from_index,
    from_minus_set,
    truncated_direct_hamiltonian,
)
from cayley_ising.contours import extract_contours
from cayley_ising.errors import DomainError, PreconditionError, ResourceError
from cayley_ising.gibbs import (
    GibbsSpec,
    density_of_states,
    exact_gibbs,
    mcmc_sample,
    p_plus,
    p_plus_all,
    two_phase_report,
)
from cayley_ising.model import Couplings, PeriodicCouplings

J0 = Couplings(-1, 0, -1)


def direct_marginal(k, n, J, beta, boundary):
    """Oracle: edge/pair/field sums per configuration, then a plain
    log-sum-exp over all of them."""
    size = tree.volume_size(k, n)
    logw, plus = [], []
    for index in range(2**size):
        c = from_index(k, n, index, boundary)
        h = truncated_direct_hamiltonian(c, J, n + 1)
        logw.append(-beta * float(h))
        plus.append(c.spin(()) == 1)
    m = max(logw)
    w = [math.exp(x - m) for x in logw]
    z = math.fsum(w)
    return math.fsum(x for x, p in zip(w, plus) if p) / z, m + math.log(z)


def test_single_vertex_closed_form():
    res = exact_gibbs(GibbsSpec(2, 0, J0, 1.0))
    assert res.root_marginal_plus == pytest.approx(1 / (1 + math.exp(-8)), rel=1e-14)


@pytest.mark.parametrize("beta", [0.1, 1.0, 7.0])
def test_zero_couplings_give_half(beta):
    res = exact_gibbs(GibbsSpec(2, 2, Couplings(0, 0, 0), beta))
    assert res.root_marginal_plus == pytest.approx(0.5, abs=1e-15)
    assert res.log_partition == pytest.approx(10 * math.log(2), rel=1e-14)


@pytest.mark.parametrize("k, n, J, beta, bc", [
    (2, 2, J0, 2.0, "plus"),
    (2, 2, Couplings(F(3, 2), F(-1, 3), F(1, 4)), 0.7, "minus"),
    (3, 1, Couplings(-1, F(1, 2), F(-1, 2)), 1.3, "plus"),
    (1, 3, Couplings(2, -1, F(1, 5)), 0.4, "minus"),
    (2, 1, PeriodicCouplings(4, 1, -1, 1), 0.9, "plus"),
])
def test_matches_direct_enumeration(k, n, J, beta, bc):
    ref_p, ref_logz = direct_marginal(k, n, J, beta, BoundarySpec(bc))
    res = exact_gibbs(GibbsSpec(k, n, J, beta, BoundarySpec(bc)))
    assert res.root_marginal_plus == pytest.approx(ref_p, rel=1e-12)
    assert res.log_partition == pytest.approx(ref_logz, rel=1e-12)


def test_workers_do_not_change_results():
    a = density_of_states(2, 2, workers=1, backend="python")
    b = density_of_states(2, 2, workers=4, backend="python", cap=2**24)
    assert a.total == b.total


def test_events():
    spec = GibbsSpec(2, 2, J0, 1.0)
    res = exact_gibbs(spec, events={
        "root_minus": lambda s: s[:, 0] == -1,
        "all_plus": lambda s: (s == 1).all(axis=1),
    })
    assert res.events["root_minus"] == pytest.approx(res.root_marginal_minus, rel=1e-12)
    assert 0.9 < res.events["all_plus"] < 1


def test_input_domain():
    with pytest.raises(DomainError):
        exact_gibbs(GibbsSpec(2, 1, J0, 0.0))
    with pytest.raises(DomainError):
        exact_gibbs(GibbsSpec(2, 1, J0, -1.0))
    with pytest.raises(ResourceError):
        exact_gibbs(GibbsSpec(2, 3, J0, 1.0), cap=2**20)


def test_ball_set_convention_invariance():
    a = exact_gibbs(GibbsSpec(2, 2, J0, 1.5))
    b = exact_gibbs(GibbsSpec(2, 2, J0, 1.5, ball_radius=4))
    assert a.root_marginal_plus == pytest.approx(b.root_marginal_plus, rel=1e-12)


def test_p_plus_examples():
    (g,) = extract_contours(from_minus_set(2, 2, [()]))
    r1 = p_plus(g, GibbsSpec(2, 2, J0, 1.0))
    assert r1.size == 4 and r1.holds and r1.bound == pytest.approx(math.exp(-4))
    r2 = p_plus(g, GibbsSpec(2, 2, J0, 2.0))
    assert r2.holds and r2.bound == pytest.approx(math.exp(-8))
    # oracle: the same probability as a per-configuration event
    direct = exact_gibbs(GibbsSpec(2, 2, J0, 1.0), events={
        "gamma": lambda s: np.array([g in extract_contours(from_index(2, 2, _idx(row)))
                                     for row in s])})
    assert r1.value == pytest.approx(direct.events["gamma"], rel=1e-12)


def _idx(row):
    return int(sum(1 << v for v, s in enumerate(row) if s == -1))


def test_p_plus_preconditions():
    with pytest.raises(PreconditionError):
        p_plus_all(GibbsSpec(2, 1, Couplings(1, 0, -1), 1.0))
    with pytest.raises(PreconditionError):
        p_plus_all(GibbsSpec(2, 1, J0, 1.0, BoundarySpec.minus()))


def test_two_phase_symmetry_and_high_temperature():
    rows = two_phase_report(2, J0, [0.01, 1.0])
    assert all(r["symmetry_gap"] <= 1e-12 for r in rows)
    hot = [r for r in rows if r["beta"] == 0.01]
    assert all(abs(r["root_marginal_plus"] - 0.5) < 0.05 for r in hot)
    with pytest.raises(PreconditionError):
        two_phase_report(1, Couplings(1, 1, -2), [1.0])


def test_mcmc_agrees_with_exact():
    spec = GibbsSpec(2, 2, J0, 1.0)
    exact = exact_gibbs(spec).root_marginal_plus
    est = mcmc_sample(spec, 10**5, seed=11)
    assert est.stderr > 0
    assert abs(est.root_marginal_plus - exact) <= 3 * est.stderr


def test_mcmc_moderate_beta():
    spec = GibbsSpec(2, 2, J0, 0.3)
    exact = exact_gibbs(spec).root_marginal_plus
    est = mcmc_sample(spec, 30_000, seed=2)
    assert abs(est.root_marginal_plus - exact) <= 3 * est.stderr


def test_mcmc_infinite_temperature():
    est = mcmc_sample(GibbsSpec(2, 2, J0, 0.0), 20_000, seed=1)
    assert abs(est.root_marginal_plus - 0.5) <= 3 * est.stderr + 1e-3


def test_mcmc_seed_repeatable():
    spec = GibbsSpec(2, 1, J0, 0.5)
    assert mcmc_sample(spec, 5000, seed=4) == mcmc_sample(spec, 5000, seed=4)
