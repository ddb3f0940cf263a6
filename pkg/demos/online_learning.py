"""Online learning against three kinds of feedback.

The same seeds drive the learner and adversary in every model, so the
only difference between runs is how the example reaches the learner.
"""

from qlearnlab.core import Distribution, HypothesisClass, full_class
from qlearnlab.dims import littlestone_dim
from qlearnlab.online import (
    ProtocolConfig,
    StochasticAdversary,
    TreeAdversary,
    make_learner,
    regret_eval,
    run_protocol,
    run_streams,
)

H = HypothesisClass(3, 2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)])
res = littlestone_dim(H)
L, tree = res.value, res.certificate
print("threshold class, Ldim =", L)

# A shattered tree forces the standard optimal algorithm into L mistakes.
for model in ("input", "dist", "quantum"):
    streams = run_streams(0)
    tr = run_protocol(ProtocolConfig(model, L), make_learner("soa", H, L, model, streams),
                      TreeAdversary(H, tree), H, streams["harness"])
    print(f"  {model:7s} tree adversary: {tr.indicator_loss} mistakes in {tr.T} rounds")

# Agnostic regret of multiplicative weights on a noisy stream.
G = full_class(2, 2)
joint = Distribution([0.35, 0.15, 0.1, 0.4])
for T in (100, 400, 1600):
    streams = run_streams(7)
    tr = run_protocol(ProtocolConfig("quantum", T, realizable=False), make_learner("mw", G, T, "quantum", streams),
                      StochasticAdversary(G, joint, rng=streams["adversary"]), G, streams["harness"])
    print(f"  T={T:5d}: agnostic regret {regret_eval(tr).agnostic_regret:7.2f}")
