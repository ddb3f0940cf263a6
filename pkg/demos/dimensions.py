"""Exact dimensions of a small multiclass class, each with a checkable witness.

Run with ``python3 demos/dimensions.py``.
"""

from qlearnlab.core import HypothesisClass, full_class
from qlearnlab.dims import bandit_littlestone_dim, littlestone_dim, mc_littlestone_dim, natarajan_dim, vc_dim
from qlearnlab.trees import verify_BL_shattered, verify_mcL_shattered, verify_n_shattered

# Three functions on a two-point domain, three labels.
H = HypothesisClass(2, 3, [(0, 1), (1, 2), (2, 0)])
print("class:", H.members)

nat = natarajan_dim(H)
print("Natarajan dimension:", nat.value, "witness:", nat.certificate)
print("  witness checks out:", verify_n_shattered(H, nat.certificate))

mc = mc_littlestone_dim(H)
print("multiclass Littlestone dimension:", mc.value)
print("  tree checks out:", verify_mcL_shattered(H, mc.certificate))

bl = bandit_littlestone_dim(H)
print("bandit Littlestone dimension:", bl.value)
print("  tree checks out:", verify_BL_shattered(H, bl.certificate))

# On binary classes the classical notions are available too.
B = full_class(3, 2)
print("\nall 8 binary functions on 3 points: VC =", vc_dim(B).value, " Ldim =", littlestone_dim(B).value)
