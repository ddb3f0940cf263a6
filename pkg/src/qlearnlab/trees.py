"""Shattering verifiers, the loss class, and the two tree transforms that relate
``Ldim`` of the loss class to ``Ldim(H)`` (binary) and ``BLdim(H)`` (multiclass).

The verifiers walk every root-to-leaf path with a boolean mask over the rows
of ``H.table``; they share no code with the dimension recursions in
:mod:`qlearnlab.dims`, which is what lets each side check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import ExampleTree, MistakeTree, ShatteredSet
from .core import HypothesisClass
from .dims import bandit_littlestone_dim, littlestone_dim, mc_littlestone_dim
from .errors import DomainError, InvalidCertificateError, InvariantError, PreconditionError, SizeLimitError

LOSS_DOMAIN_CAP = 40


def _walk(H: HypothesisClass, tree: MistakeTree, negate: bool) -> bool:
    table = H.table
    if len(H) == 0:
        return False

    def rec(i: int, alive: np.ndarray) -> bool:
        if not tree.is_internal(i):
            return bool(alive.any())
        col = table[:, tree.nodes[i]]
        for j in range(tree.arity):
            hit = col == tree.edges[i, j]
            if not rec(tree.child(i, j), alive & (~hit if negate else hit)):
                return False
        return True

    return rec(0, np.ones(len(H), dtype=bool))


def _points_ok(H: HypothesisClass, tree: MistakeTree) -> bool:
    if tree.nodes.size == 0:
        return True
    return bool(tree.nodes.min() >= 0 and tree.nodes.max() < H.n
                and tree.edges.min() >= 0 and tree.edges.max() < H.k)


def _check_arity(tree: MistakeTree, arity: int) -> None:
    if tree.arity != arity:
        raise PreconditionError(f"expected a tree of arity {arity}, got {tree.arity}")


def verify_L_shattered(H: HypothesisClass, tree: MistakeTree) -> bool:
    """True iff every root-to-leaf edge sequence is realised by some member.

    Sibling edges must carry the labels 0 and 1. Either order is accepted, so
    trees built with ``y`` on the left and ``not y`` on the right check as-is.
    """
    if H.k != 2:
        raise DomainError("L-shattering is for binary classes; use verify_mcL_shattered")
    _check_arity(tree, 2)
    if not _points_ok(H, tree):
        return False
    if tree.nodes.size and not np.all(np.sort(tree.edges, axis=1) == [0, 1]):
        return False
    return _walk(H, tree, negate=False)


def verify_mcL_shattered(H: HypothesisClass, tree: MistakeTree) -> bool:
    _check_arity(tree, 2)
    if not _points_ok(H, tree):
        return False
    if tree.nodes.size and np.any(tree.edges[:, 0] == tree.edges[:, 1]):
        return False
    return _walk(H, tree, negate=False)


def verify_BL_shattered(H: HypothesisClass, tree: MistakeTree) -> bool:
    """Every path needs a member that disagrees with every edge label on it."""
    _check_arity(tree, H.k)
    if not _points_ok(H, tree):
        return False
    if tree.nodes.size and not np.all(np.sort(tree.edges, axis=1) == np.arange(H.k)):
        return False
    return _walk(H, tree, negate=True)


def verify_shattered_set(H: HypothesisClass, cert: ShatteredSet) -> bool:
    """VC shattering: all ``2**|S|`` binary patterns appear on ``S``."""
    if len(H) == 0 or len(set(cert.points)) != cert.size:
        return False
    if any(not 0 <= x < H.n for x in cert.points):
        return False
    pats = {tuple(r) for r in H.table[:, list(cert.points)].tolist()}
    return all(
        tuple((bits >> (cert.size - 1 - i)) & 1 for i in range(cert.size)) in pats
        for bits in range(2**cert.size)
    )


def verify_n_shattered(H: HypothesisClass, cert: ShatteredSet) -> bool:
    """Natarajan shattering of ``cert.points`` witnessed by ``cert.f0, cert.f1``."""
    if not cert.is_natarajan:
        raise PreconditionError("Natarajan verification needs witness maps f0, f1")
    if len(H) == 0 or len(set(cert.points)) != cert.size:
        return False
    if any(not 0 <= x < H.n for x in cert.points):
        return False
    if any(a == b for a, b in zip(cert.f0, cert.f1)):
        return False
    pats = {tuple(r) for r in H.table[:, list(cert.points)].tolist()}
    for bits in range(2**cert.size):
        want = tuple(cert.f0[i] if bits >> i & 1 else cert.f1[i] for i in range(cert.size))
        if want not in pats:
            return False
    return True


@dataclass(frozen=True)
class LossClass:
    """Binary class on ``Z = X x Y`` with members ``z=(x, y) -> 1[h(x) != y]``.

    ``z = x * k + y`` (x-major). Members coming from different ``h`` with the
    same loss pattern are stored once.
    """

    cls: HypothesisClass
    n: int
    k: int

    def z_index(self, x: int, y: int) -> int:
        return x * self.k + y

    def point(self, z: int) -> tuple[int, int]:
        return divmod(z, self.k)


def loss_pattern(h, k: int) -> tuple[int, ...]:
    return tuple(int(h[x] != y) for x in range(len(h)) for y in range(k))


def loss_class(H: HypothesisClass) -> LossClass:
    if H.k < 2:
        raise DomainError("loss class needs k >= 2")
    if H.n * H.k > LOSS_DOMAIN_CAP:
        raise SizeLimitError(f"loss class domain {H.n}*{H.k} exceeds {LOSS_DOMAIN_CAP}")
    members = [loss_pattern(h, H.k) for h in H]
    return LossClass(HypothesisClass(H.n * H.k, 2, members), H.n, H.k)


def example_tree_from_loss_certificate(lc: LossClass, tree: MistakeTree) -> ExampleTree:
    """Reinterpret an L-tree over ``Z`` (edges 0 left, 1 right) as an example tree."""
    if tree.arity != 2 or (tree.nodes.size and not np.all(tree.edges == [0, 1])):
        raise InvalidCertificateError("loss-class tree must have edges labelled 0 (left) and 1 (right)")
    xs, ys = np.divmod(tree.nodes, lc.k) if tree.nodes.size else ([], [])
    return ExampleTree(tree.depth, xs, ys)


def _as_loss_tree(lc: LossClass, ztree: ExampleTree) -> MistakeTree:
    size = ztree.xs.size
    if size and (ztree.xs.max() >= lc.n or ztree.ys.max() >= lc.k or ztree.xs.min() < 0 or ztree.ys.min() < 0):
        raise InvalidCertificateError("example tree mentions points or labels outside the class")
    return MistakeTree(2, ztree.depth, ztree.xs * lc.k + ztree.ys, np.tile([0, 1], (size, 1)))


def _require_loss_shattered(H: HypothesisClass, ztree: ExampleTree) -> None:
    lc = loss_class(H)
    if not verify_L_shattered(lc.cls, _as_loss_tree(lc, ztree)):
        raise InvalidCertificateError("example tree is not L-shattered by the loss class")


def lemma_tree_transform(H: HypothesisClass, ztree: ExampleTree) -> MistakeTree:
    """Binary case: node ``(x, y)`` becomes node ``x`` with left edge ``y`` and right edge ``1 - y``."""
    if H.k != 2:
        raise DomainError("lemma_tree_transform is for binary classes")
    _require_loss_shattered(H, ztree)
    edges = np.stack([ztree.ys, 1 - ztree.ys], axis=1) if ztree.xs.size else []
    out = MistakeTree(2, ztree.depth, ztree.xs, edges)
    if not verify_L_shattered(H, out):
        raise InvariantError("transformed tree failed L-shattering")
    return out


def appendix_f_transform(H: HypothesisClass, ztree: ExampleTree) -> MistakeTree:
    """k-ary tree BL-shattered by ``H`` from an L-tree of the loss class.

    Root ``(x0, y0)`` becomes node ``x0`` with edges ``0..k-1``; the edge
    labelled ``y0`` continues with the right subtree and every other edge with
    a copy of the left subtree.
    """
    if H.k < 2:
        raise DomainError("appendix_f_transform needs k >= 2")
    _require_loss_shattered(H, ztree)
    k = H.k

    def build(i: int, depth: int):
        if depth == 0:
            return None
        x0, y0 = int(ztree.xs[i]), int(ztree.ys[i])
        kids = [build(ztree.right(i) if y == y0 else ztree.left(i), depth - 1) for y in range(k)]
        return (x0, tuple(range(k)), kids)

    out = MistakeTree.from_nested(k, ztree.depth, build(0, ztree.depth))
    if not verify_BL_shattered(H, out):
        raise InvariantError("transformed tree failed BL-shattering")
    return out


@dataclass(frozen=True)
class ChainReport:
    ldim_loss: int
    bldim: int
    mcldim: int
    bound_4klogk: float

    @property
    def within_bound(self) -> bool:
        return self.bldim <= self.bound_4klogk


def dim_chain_report(H: HypothesisClass) -> ChainReport:
    """``Ldim`` of the loss class, ``BLdim`` and ``mcLdim`` of ``H``.

    ``Ldim(loss class) <= BLdim(H)`` is checked exactly; the comparison against
    ``4 k log2(k) mcLdim(H)`` is only reported.
    """
    if H.k < 2:
        raise DomainError("dimension chain needs k >= 2")
    ldim_loss = littlestone_dim(loss_class(H).cls).value
    bldim = bandit_littlestone_dim(H).value
    mcldim = mc_littlestone_dim(H).value
    if ldim_loss > bldim:
        raise InvariantError(f"Ldim(loss class) = {ldim_loss} exceeds BLdim = {bldim}")
    return ChainReport(ldim_loss, bldim, mcldim, 4 * H.k * math.log2(H.k) * mcldim)
