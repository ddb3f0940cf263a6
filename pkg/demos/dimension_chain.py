"""Loss classes sit between the binary and bandit dimensions.

For a class H we build the binary loss class, find a deepest shattered
tree for it, and turn that tree into a bandit tree for H of equal depth.
"""

from qlearnlab.core import HypothesisClass, full_class
from qlearnlab.dims import littlestone_dim
from qlearnlab.trees import (
    appendix_f_transform,
    dim_chain_report,
    example_tree_from_loss_certificate,
    lemma_tree_transform,
    loss_class,
    verify_BL_shattered,
    verify_L_shattered,
)

for H in (full_class(2, 3), HypothesisClass(3, 3, [(0, 1, 2), (1, 1, 0), (2, 0, 0), (0, 2, 1)])):
    rep = dim_chain_report(H)
    print(f"n={H.n} k={H.k} |H|={len(H)}")
    print(f"  Ldim(loss class) = {rep.ldim_loss} <= BLdim = {rep.bldim} <= {rep.bound_4klogk:.1f}")

    lc = loss_class(H)
    ztree = example_tree_from_loss_certificate(lc, littlestone_dim(lc.cls).certificate)
    bandit_tree = appendix_f_transform(H, ztree)
    print(f"  transformed tree depth {bandit_tree.depth}, valid: {verify_BL_shattered(H, bandit_tree)}")

# In the binary case the loss tree maps back to an ordinary mistake tree.
B = HypothesisClass(3, 2, [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)])
lc = loss_class(B)
ztree = example_tree_from_loss_certificate(lc, littlestone_dim(lc.cls).certificate)
tree = lemma_tree_transform(B, ztree)
print(f"\nthresholds on 3 points: Ldim {littlestone_dim(B).value}, recovered tree depth {tree.depth}, "
      f"valid: {verify_L_shattered(B, tree)}")
