import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlearnlab.batch import (
    PacParams,
    agnostic_experiment,
    agnostic_trials,
    erm,
    measure_examples,
    measure_then_erm,
    noisy_joint,
    pac_experiment,
    pac_trials,
    realizable_states,
)
from qlearnlab.bounds import (
    CALIBRATION,
    BoundFormulas,
    agnostic_regret_bound,
    freedman_expected,
    freedman_high_prob,
    freedman_threshold,
    loglog,
    m_agn_lb,
    m_agn_ub,
    m_pac_lb,
    m_pac_ub,
    m_pac_ub_alt,
    multiclass_agnostic_regret_bound,
    mw_regret_bound,
)
from qlearnlab.core import Distribution, HypothesisClass, full_class, joint_error, true_error
from qlearnlab.errors import PreconditionError
from qlearnlab.quantum import RegisterLayout, StateVector, prepare_agnostic_example

CONSTANTS_1_2 = HypothesisClass(1, 2, [(0,), (1,)])


def test_erm_examples():
    H = full_class(2, 2)
    assert erm([(0, 1), (1, 0)], H) == (1, 0)
    assert erm([], H) == H[0]
    assert erm([(0, 0)] * 3 + [(0, 1)], CONSTANTS_1_2) == (0,)
    with pytest.raises(PreconditionError):
        erm([], HypothesisClass(1, 2, []))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_erm_minimises_empirical_mistakes(seed):
    rng = np.random.default_rng(seed)
    H = full_class(2, 3)
    sample = [(int(rng.integers(2)), int(rng.integers(3))) for _ in range(int(rng.integers(1, 15)))]
    h = erm(sample, H)
    mistakes = lambda g: sum(g[x] != y for x, y in sample)
    best = min(mistakes(g) for g in H)
    assert mistakes(h) == best
    assert h == next(g for g in H if mistakes(g) == best)


def test_measure_then_erm_on_point_masses_equals_classical():
    H = full_class(2, 3)
    lay = RegisterLayout.example(2, 3)
    sample = [(0, 2), (1, 1), (0, 2), (1, 0)]
    states = [StateVector.basis(lay, x=x, y=y) for x, y in sample]
    assert measure_examples(states, np.random.default_rng(0)) == sample
    assert measure_then_erm(states, H, np.random.default_rng(0)) == erm(sample, H)


def test_repeated_states_are_independent_copies():
    D = Distribution.uniform(4)
    states = realizable_states(D, (0, 1, 0, 1), 2, 400)
    xs = [x for x, _ in measure_examples(states, np.random.default_rng(0))]
    assert set(xs) == {0, 1, 2, 3}


def test_pac_params_validation():
    with pytest.raises(PreconditionError):
        PacParams(0, 0.1, 10)
    with pytest.raises(PreconditionError):
        PacParams(0.1, 1.0, 10)
    with pytest.raises(PreconditionError):
        PacParams(0.1, 0.1, -1)


def test_pac_singleton_class():
    H = HypothesisClass(3, 2, [(0, 1, 1)])
    params = PacParams(0.1, 0.1, 0, trials=20)
    assert pac_experiment(H, Distribution.uniform(3), (0, 1, 1), params) == 1.0
    with pytest.raises(PreconditionError):
        pac_experiment(H, Distribution.uniform(3), (1, 1, 1), params)


def test_pac_at_formula_value_and_huge_m():
    H = full_class(3, 2)
    D = Distribution([0.2, 0.3, 0.5])
    target = (1, 0, 1)
    m = m_pac_ub(3, 2, 0.2, 0.2)
    assert pac_experiment(H, D, target, PacParams(0.2, 0.2, m, trials=200, seed=1)) >= 0.8
    assert pac_experiment(H, D, target, PacParams(0.2, 0.2, 10 * m, trials=200, seed=2)) == 1.0


def test_pac_trials_are_reproducible_and_exact():
    H = full_class(2, 2)
    D = Distribution([0.4, 0.6])
    p = PacParams(0.1, 0.1, 3, trials=30, seed=9)
    a, b = pac_trials(H, D, (1, 1), p), pac_trials(H, D, (1, 1), p)
    assert np.array_equal(a, b)
    # every trial error is an exact sum of point masses
    assert set(np.round(a, 12)) <= {0.0, 0.4, 0.6, 1.0}


def test_agnostic_realizable_reduces_to_error():
    H = full_class(2, 2)
    marg = Distribution([0.3, 0.7])
    target = (0, 1)
    J = Distribution.realizable_joint(marg, target, 2)
    params = PacParams(0.1, 0.1, 25, trials=40, seed=3)
    regrets = agnostic_trials(H, J, params)
    errors = pac_trials(H, marg, target, params)
    assert np.allclose(regrets, errors)
    for h in H:
        assert joint_error(h, J, 2) == pytest.approx(true_error(h, marg, target))


def test_agnostic_singleton_and_noise():
    H = HypothesisClass(2, 3, [(2, 1)])
    J = noisy_joint(Distribution.uniform(2), (0, 0), 3, 0.3)
    assert agnostic_experiment(H, J, PacParams(0.1, 0.1, 5, trials=10)) == 1.0
    assert J.joint(3)[0].tolist() == pytest.approx([0.35, 0.075, 0.075])


def test_agnostic_state_measurement_statistics():
    J = Distribution([0.1, 0.2, 0.3, 0.4])
    s = prepare_agnostic_example(J, RegisterLayout.example(2, 2))
    counts = np.zeros(4)
    for x, y in measure_examples([s] * 20000, np.random.default_rng(5)):
        counts[x * 2 + y] += 1
    freq = counts / counts.sum()
    assert np.all(np.abs(freq - J.probs) < 5 * np.sqrt(J.probs * (1 - J.probs) / 20000))


# bounds -----------------------------------------------------------------------


def test_regression_value():
    # direct evaluation: ceil((3 log2(3) log2(10) + log2(10)) / 0.1) = ceil(191.17...) = 192
    assert m_pac_ub(3, 3, 0.1, 0.1, C=1) == 192
    assert CALIBRATION.m_pac(3, 3, 0.1, 0.1) == 192


def test_bound_formulas_by_hand():
    l2 = math.log2
    assert m_pac_lb(2, 0.25, 0.5) == math.ceil((2 + 1) / 0.25)
    assert m_agn_lb(2, 0.5, 0.5) == math.ceil(3 / 0.25)
    assert m_agn_ub(2, 4, 0.5, 0.5) == math.ceil((2 * 2 + 1) / 0.25)
    assert m_pac_ub_alt(2, 4, 0.5, 0.5) == math.ceil((2 * (2 + 1 + 1) + 1) / 0.5)
    assert m_pac_ub(1, 2, 0.5, 0.5, C=3) == math.ceil(3 * (l2(2) * l2(2) + 1) / 0.5)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 6), st.integers(2, 5), st.floats(0.01, 0.4), st.floats(0.01, 0.9))
def test_halving_eps_at_least_doubles(nd, k, eps, delta):
    for f in (lambda e: m_pac_lb(nd, e, delta), lambda e: m_pac_ub(nd, k, e, delta),
              lambda e: m_agn_lb(nd, e, delta), lambda e: m_agn_ub(nd, k, e, delta)):
        assert f(eps / 2) >= 2 * f(eps) - 1


@pytest.mark.parametrize("eps,delta", [(0, 0.1), (1, 0.1), (0.1, 0), (0.1, 1.5)])
def test_bound_domain(eps, delta):
    with pytest.raises(PreconditionError):
        m_pac_ub(1, 2, eps, delta)


def test_calibration_validation():
    with pytest.raises(PreconditionError):
        BoundFormulas(C_pac=0)


def test_online_bounds():
    with pytest.raises(PreconditionError):
        loglog(3)
    assert loglog(16) == pytest.approx(math.log(math.log(16)))
    assert freedman_threshold(2, 64, 1.0) == pytest.approx(16 + 256 * math.log(math.log(64)) + 256)
    assert freedman_high_prob(1, 16, 0.05) == pytest.approx(8 + 256 * (math.log(math.log(16)) + math.log(20)))
    assert freedman_expected(1, 16) == pytest.approx(freedman_threshold(1, 16, 1.0))
    assert agnostic_regret_bound(2, 100) == pytest.approx(24 * math.sqrt(200 * (math.log(100) + 1)))
    assert multiclass_agnostic_regret_bound(1, 2, 100) == pytest.approx(24 * math.sqrt(8 * 100 * (math.log(100) + 1)))
    assert mw_regret_bound(4, 1000) == pytest.approx(math.sqrt(1000 * math.log(4) / 2))
