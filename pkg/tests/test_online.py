import itertools
import math

import numpy as np
import pytest

from qlearnlab.batch import noisy_joint
from qlearnlab.core import Distribution, HypothesisClass, full_class
from qlearnlab.dims import littlestone_dim
from qlearnlab.errors import InvalidCertificateError, PreconditionError, ProtocolViolation
from qlearnlab.certificates import MistakeTree
from qlearnlab.online import (
    MeasureAndLearn,
    MWLearner,
    PointMassAdversary,
    ProtocolConfig,
    RandomDistributionAdversary,
    SOALearner,
    StochasticAdversary,
    TableLearner,
    TreeAdversary,
    enumerate_deterministic_learners,
    exhaustive_learner_sweep,
    martingale_report,
    minimax_mistakes,
    regret_eval,
    regret_sweep,
    run_protocol,
    run_streams,
)


class FixedLearner:
    quantum = False

    def __init__(self, h):
        self.h = tuple(h)

    def hypothesis(self, t, x=None):
        return self.h

    def update(self, x, y):
        pass


class FixedDistributionAdversary:
    def __init__(self, dists):
        self.dists = dists

    def distribution(self, t, history, h):
        return self.dists[t]


def _run(model, learner, adversary, H, T, realizable=True, seed=0, eps=None):
    return run_protocol(ProtocolConfig(model, T, realizable, eps), learner, adversary, H,
                        np.random.default_rng(seed))


def test_config_validation():
    with pytest.raises(PreconditionError):
        ProtocolConfig("classical", 3)
    with pytest.raises(PreconditionError):
        ProtocolConfig("input", 0)
    with pytest.raises(PreconditionError):
        ProtocolConfig("dist", 3, mistake_threshold=1.5)


def test_run_streams_are_deterministic_and_distinct():
    a, b = run_streams(3, 1), run_streams(3, 1)
    assert a["learner"].random() == b["learner"].random()
    c = run_streams(3, 1)
    vals = {name: g.random() for name, g in c.items()}
    assert len(set(vals.values())) == 4


def test_target_learner_has_zero_loss():
    H = full_class(2, 2)
    tr = _run("input", FixedLearner((0, 1)), PointMassAdversary(H, [(1, 1)]), H, 1)
    assert tr.indicator_loss == 0 and tr.probabilistic_loss == 0


def test_mistake_threshold_indicator():
    H = full_class(1, 2)
    dists = [Distribution([0.8, 0.2]), Distribution([0.3, 0.7]), Distribution([0.5, 0.5])]
    tr = _run("dist", FixedLearner((0,)), FixedDistributionAdversary(dists), H, 3, realizable=False, eps=0.4)
    assert tr.column("P").tolist() == pytest.approx([0.2, 0.7, 0.5])
    assert tr.column("L_eps").tolist() == [0, 1, 1]


def test_step_order_is_enforced():
    calls = []

    class SpyLearner(FixedLearner):
        def hypothesis(self, t, x=None):
            calls.append(("h", x))
            return self.h

        def update(self, x, y):
            calls.append(("update", x, y))

    class SpyAdversary:
        def point(self, t, history):
            calls.append(("point",))
            return 0

        def label(self, t, history, x, y_hat):
            calls.append(("label", y_hat))
            return 1

        def distribution(self, t, history, h):
            calls.append(("dist", h))
            return Distribution.point_mass(2, 1)

    H = full_class(1, 2)
    _run("input", SpyLearner((0,)), SpyAdversary(), H, 1)
    assert calls == [("point",), ("h", 0), ("label", 0), ("update", 0, 1)]
    calls.clear()
    _run("dist", SpyLearner((0,)), SpyAdversary(), H, 1)
    assert calls == [("h", None), ("dist", (0,)), ("update", 0, 1)]


def test_model_learner_compatibility():
    H = full_class(1, 2)
    with pytest.raises(PreconditionError):
        _run("quantum", SOALearner(H), PointMassAdversary(H, [(0, 0)]), H, 1)
    with pytest.raises(PreconditionError):
        _run("input", MeasureAndLearn(SOALearner(H), np.random.default_rng()), PointMassAdversary(H, [(0, 0)]), H, 1)


def test_realizability_violation():
    H = HypothesisClass(2, 2, [(0, 0), (1, 1)])
    with pytest.raises(ProtocolViolation):
        _run("input", MWLearner(H, 2, rng=np.random.default_rng(0)), PointMassAdversary(H, [(0, 0), (1, 1)]), H, 2)
    # the same sequence is fine in agnostic mode
    _run("input", MWLearner(H, 2, rng=np.random.default_rng(0)), PointMassAdversary(H, [(0, 0), (1, 1)]), H, 2,
         realizable=False)
    soa = SOALearner(H)
    soa.update(0, 0)
    with pytest.raises(ProtocolViolation):
        soa.update(1, 1)


def test_soa_mistakes_on_all_sequences_full_2_2():
    H = full_class(2, 2)
    worst = 0
    for target in H:
        for xs in itertools.product(range(2), repeat=4):
            tr = _run("input", SOALearner(H), PointMassAdversary(H, [(x, target[x]) for x in xs]), H, 4)
            worst = max(worst, tr.indicator_loss)
    assert worst <= littlestone_dim(H).value == 2


def test_soa_singleton_never_errs():
    H = HypothesisClass(3, 3, [(2, 0, 1)])
    rng = np.random.default_rng(0)
    seq = [(int(x), (2, 0, 1)[x]) for x in rng.integers(3, size=20)]
    assert _run("input", SOALearner(H), PointMassAdversary(H, seq), H, 20).indicator_loss == 0


def test_soa_prefers_smallest_label_on_ties():
    assert SOALearner(full_class(2, 3)).hypothesis(0) == (0, 0)


def test_mw_singleton_has_zero_regret():
    H = HypothesisClass(2, 2, [(1, 0)])
    J = Distribution.uniform(4)
    tr = _run("dist", MWLearner(H, 50, rng=np.random.default_rng(1)),
              StochasticAdversary(H, J, rng=np.random.default_rng(2)), H, 50, realizable=False)
    assert all(r.h == (1, 0) for r in tr.rounds)
    assert regret_eval(tr).agnostic_regret == pytest.approx(0.0, abs=1e-12)


def test_mw_weights_update():
    H = full_class(1, 2)
    mw = MWLearner(H, 10, eta=math.log(2))
    mw.update(0, 1)
    assert mw.weights().tolist() == pytest.approx([1 / 3, 2 / 3])


def test_mw_regret_against_standard_guarantee():
    H = full_class(2, 2)
    marg = Distribution.uniform(2)
    J = noisy_joint(marg, (0, 1), 2, 0.3)
    T = 1000
    regrets = []
    for s in range(100):
        streams = run_streams(500 + s)
        tr = run_protocol(ProtocolConfig("input", T, False), MWLearner(H, T, rng=streams["learner"]),
                          StochasticAdversary(H, J, rng=streams["adversary"]), H, streams["harness"])
        regrets.append(regret_eval(tr).agnostic_regret)
    assert np.mean(regrets) <= 1.2 * math.sqrt(T * math.log(len(H)) / 2)


def test_stochastic_point_mass_equals_point_mass_adversary():
    H = full_class(2, 3)
    J = Distribution.point_mass(6, 1 * 3 + 2)
    a = _run("dist", SOALearner(H), StochasticAdversary(H, J, rng=np.random.default_rng(0)), H, 5)
    b = _run("dist", SOALearner(H), PointMassAdversary(H, [(1, 2)] * 5), H, 5)
    assert [(r.x, r.y, r.h, r.P, r.I) for r in a.rounds] == [(r.x, r.y, r.h, r.P, r.I) for r in b.rounds]


def test_point_mass_quantum_examples_measure_to_sequence():
    H = full_class(2, 2)
    seq = [(0, 1), (1, 0), (1, 0), (0, 1)]
    streams = run_streams(8)
    tr = run_protocol(ProtocolConfig("quantum", 4), MeasureAndLearn(SOALearner(H), streams["measure"]),
                      PointMassAdversary(H, seq), H)
    assert [(r.x, r.y) for r in tr.rounds] == seq


def test_tree_adversary_requires_verified_tree():
    H = HypothesisClass(2, 2, [(0, 0)])
    with pytest.raises(InvalidCertificateError):
        TreeAdversary(H, MistakeTree(2, 1, [0], [[0, 1]]))


def test_tree_adversary_beats_every_deterministic_learner():
    H = full_class(2, 2)
    tree = littlestone_dim(H).certificate
    count = 0
    for table in enumerate_deterministic_learners(H, 2):
        tr = _run("input", TableLearner(2, table), TreeAdversary(H, tree), H, 2)
        assert tr.indicator_loss >= tree.depth
        count += 1
    assert count == 2**10


def test_minimax_and_sweep_agree():
    for H in (full_class(1, 2), full_class(2, 2), HypothesisClass(2, 2, [(0, 0), (0, 1), (1, 0)])):
        assert exhaustive_learner_sweep(H, H.n) == minimax_mistakes(H, H.n) == littlestone_dim(H).value


def test_martingale_zero_when_learner_is_target():
    H = full_class(2, 2)
    rng = np.random.default_rng(0)
    tr = _run("dist", FixedLearner((1, 0)), RandomDistributionAdversary(H, (1, 0), rng), H, 8)
    assert np.all(tr.column("M") == 0)
    rep = martingale_report([tr, tr])
    assert rep.centred()
    with pytest.raises(PreconditionError):
        martingale_report([_run("dist", FixedLearner((1, 0)), RandomDistributionAdversary(H, (1, 0), rng), H, 3)])


def _soa_suite(count, T, seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        H = full_class(3, 2) if i % 2 else full_class(2, 3)
        target = H[int(rng.integers(len(H)))]
        streams = run_streams(seed, i)
        learner = MeasureAndLearn(SOALearner(H), streams["measure"])
        adv = RandomDistributionAdversary(H, target, streams["adversary"])
        out.append(run_protocol(ProtocolConfig("quantum", T), learner, adv, H, streams["harness"]))
    return out


def test_martingale_suite_centres_and_bounds_variation():
    trs = _soa_suite(400, 16, seed=5)
    rep = martingale_report(trs, deltas=(1.0,))
    assert rep.centred(3.0)
    assert rep.variation_ok.all()
    assert rep.exceedance[1.0] <= math.exp(-1) + 0.05
    for tr in trs:
        P, I = tr.column("P"), tr.column("I")
        assert np.all((P >= 0) & (P <= 1)) and set(I.tolist()) <= {0, 1}
        assert tr.quadratic_variation == pytest.approx(float(np.sum(P * (1 - P))))


def test_regret_eval_best_in_class_and_realizable():
    H = full_class(2, 2)
    J = Distribution([0.1, 0.2, 0.4, 0.3])
    tr = _run("dist", FixedLearner((1, 0)), FixedDistributionAdversary([J] * 3), H, 3, realizable=False)
    assert regret_eval(tr).agnostic_regret == pytest.approx(0.0, abs=1e-12)
    assert regret_eval(tr).realizable_regret is None

    marg = Distribution([0.25, 0.75])
    R = Distribution.realizable_joint(marg, (0, 1), 2)
    tr = _run("dist", FixedLearner((1, 1)), FixedDistributionAdversary([R] * 4), H, 4)
    rep = regret_eval(tr)
    assert rep.agnostic_regret == pytest.approx(rep.realizable_regret) == pytest.approx(1.0)


def test_regret_eval_hand_computed():
    H = HypothesisClass(1, 2, [(0,), (1,)])
    dists = [Distribution([0.9, 0.1]), Distribution([0.2, 0.8]), Distribution([0.5, 0.5])]
    learner_hs = iter([(0,), (0,), (1,)])

    class Scripted(FixedLearner):
        def hypothesis(self, t, x=None):
            return next(learner_hs)

    tr = _run("dist", Scripted((0,)), FixedDistributionAdversary(dists), H, 3, realizable=False)
    # learner loss 0.1 + 0.8 + 0.5 = 1.4; member (0,) 1.4, member (1,) 0.9 + 0.2 + 0.5 = 1.6
    assert tr.probabilistic_loss == pytest.approx(1.4)
    assert regret_eval(tr).agnostic_regret == pytest.approx(0.0)
    assert regret_eval(tr).best_in_class == (0,)


def test_regret_sweep_rows():
    H = full_class(1, 2)
    J = Distribution([0.7, 0.3])
    rows = regret_sweep(H, "mw", lambda H_, s: StochasticAdversary(H_, J, rng=s["adversary"]), "dist",
                        [20, 80], trials=5, seed=1)
    assert [r["T"] for r in rows] == [20, 80]
    assert "ratio_to_previous" in rows[1]
