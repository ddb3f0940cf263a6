"""PAC learning from measured quantum examples.

ERM on measured copies is run at the calibrated sample size and at
smaller sizes, and we report how often the error stays under epsilon.
"""

from qlearnlab.batch import PacParams, agnostic_experiment, noisy_joint, pac_experiment
from qlearnlab.bounds import CALIBRATION
from qlearnlab.core import Distribution, full_class
from qlearnlab.dims import natarajan_dim

H = full_class(3, 3)
D = Distribution([0.6, 0.3, 0.1])
target = (2, 0, 1)
eps, delta = 0.1, 0.1

d = natarajan_dim(H).value
m = CALIBRATION.m_pac(d, H.k, eps, delta)
print(f"Natarajan dimension {d}, calibrated sample size m = {m}")
for size in (2, 8, m):
    rate = pac_experiment(H, D, target, PacParams(eps, delta, size, trials=300, seed=1))
    print(f"  m = {size:4d}: error <= eps in {rate:.1%} of trials")

J = noisy_joint(D, target, H.k, 0.2)
m_agn = CALIBRATION.m_agn(d, H.k, eps, delta)
rate = agnostic_experiment(H, J, PacParams(eps, delta, m_agn, trials=100, seed=2))
print(f"agnostic with 20% label noise, m = {m_agn}: regret <= eps in {rate:.1%} of trials")
