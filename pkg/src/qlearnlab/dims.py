"""Exact combinatorial dimensions of finite classes, each returned with a certificate.

Set dimensions (VC, Natarajan) are found by scanning subsets in increasing
size; both properties are hereditary so the scan stops at the first size with
no shattered subset. Tree dimensions (Littlestone, multiclass Littlestone,
bandit Littlestone) use the usual recursion over restrictions, memoised on the
bitmask of surviving members of the root class.

The empty class has every dimension equal to -1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .certificates import MistakeTree, ShatteredSet
from .core import HypothesisClass
from .errors import DomainError, SizeLimitError

MAX_MEMBERS = 4096
MAX_DOMAIN = 10


@dataclass(frozen=True)
class DimensionResult:
    value: int
    certificate: ShatteredSet | MistakeTree | None = None


def check_caps(H: HypothesisClass) -> None:
    if len(H) > MAX_MEMBERS or H.n > MAX_DOMAIN:
        raise SizeLimitError(
            f"dimension search is capped at {MAX_MEMBERS} members and {MAX_DOMAIN} points "
            f"(got {len(H)} members on {H.n} points)"
        )


def _floor_log2(m: int) -> int:
    return m.bit_length() - 1


class DimensionSolver:
    """Memoised tree-dimension recursions over subsets of one root class.

    Subsets are bitmasks over the root's member indices, so restricting to
    ``h(x) == y`` is a single ``&`` with ``H.label_masks[x][y]``.
    """

    def __init__(self, H: HypothesisClass):
        check_caps(H)
        self.H = H
        self.masks = H.label_masks
        self._ldim: dict[int, int] = {}
        self._mcldim: dict[int, int] = {}
        self._bldim: dict[int, int] = {}

    def ldim(self, S: int) -> int:
        if S == 0:
            return -1
        if S & (S - 1) == 0:
            return 0
        hit = self._ldim.get(S)
        if hit is not None:
            return hit
        cap = _floor_log2(S.bit_count())
        best = 0
        for row in self.masks:
            a, b = S & row[0], S & row[1]
            if not a or not b:
                continue
            left = self.ldim(a)
            if left < best:
                continue
            best = max(best, 1 + min(left, self.ldim(b)))
            if best == cap:
                break
        self._ldim[S] = best
        return best

    def mcldim(self, S: int) -> int:
        if S == 0:
            return -1
        if S & (S - 1) == 0:
            return 0
        hit = self._mcldim.get(S)
        if hit is not None:
            return hit
        cap = _floor_log2(S.bit_count())
        best = 0
        for row in self.masks:
            parts = [S & m for m in row if S & m]
            if len(parts) < 2:
                continue
            vals = sorted((self.mcldim(p) for p in parts), reverse=True)
            best = max(best, 1 + vals[1])
            if best == cap:
                break
        self._mcldim[S] = best
        return best

    def bldim(self, S: int) -> int:
        if S == 0:
            return -1
        hit = self._bldim.get(S)
        if hit is not None:
            return hit
        best = 0
        for row in self.masks:
            # an edge whose label no member uses keeps S unchanged; that branch only
            # needs BLdim(S) >= depth - 1, which holds inductively, so it is skipped
            worst = None
            for m in row:
                T = S & ~m
                if T == S:
                    continue
                v = self.bldim(T)
                if worst is None or v < worst:
                    worst = v
                    if worst + 1 <= best:
                        break
            if worst is not None:
                best = max(best, worst + 1)
        self._bldim[S] = best
        return best

    # certificate construction: smallest x first, then smallest labels

    def ltree(self, S: int, depth: int):
        if depth == 0:
            return None
        for x, row in enumerate(self.masks):
            a, b = S & row[0], S & row[1]
            if self.ldim(a) >= depth - 1 and self.ldim(b) >= depth - 1:
                return (x, (0, 1), [self.ltree(a, depth - 1), self.ltree(b, depth - 1)])
        raise AssertionError("no splitting point at the requested depth")

    def mctree(self, S: int, depth: int):
        if depth == 0:
            return None
        for x, row in enumerate(self.masks):
            for y0, y1 in itertools.combinations(range(len(row)), 2):
                a, b = S & row[y0], S & row[y1]
                if self.mcldim(a) >= depth - 1 and self.mcldim(b) >= depth - 1:
                    return (x, (y0, y1), [self.mctree(a, depth - 1), self.mctree(b, depth - 1)])
        raise AssertionError("no splitting point at the requested depth")

    def bltree(self, S: int, depth: int):
        if depth == 0:
            return None
        for x, row in enumerate(self.masks):
            subs = [S & ~m for m in row]
            if all(T == S or self.bldim(T) >= depth - 1 for T in subs):
                return (x, tuple(range(len(row))), [self.bltree(T, depth - 1) for T in subs])
        raise AssertionError("no splitting point at the requested depth")


def _require_binary(H: HypothesisClass, name: str) -> None:
    if H.k != 2:
        raise DomainError(f"{name} is defined here for k = 2 only (got k = {H.k})")


def _patterns(H: HypothesisClass, points: tuple[int, ...]) -> set[tuple[int, ...]]:
    return set(map(tuple, H.table[:, list(points)].tolist()))


def vc_dim(H: HypothesisClass) -> DimensionResult:
    """Largest shattered subset; certificate is the lexicographically smallest one."""
    _require_binary(H, "VC dimension")
    check_caps(H)
    if len(H) == 0:
        return DimensionResult(-1)
    best: tuple[int, ...] = ()
    for d in range(1, min(H.n, _floor_log2(len(H))) + 1):
        found = next(
            (S for S in itertools.combinations(range(H.n), d) if len(_patterns(H, S)) == 2**d),
            None,
        )
        if found is None:
            break
        best = found
    return DimensionResult(len(best), ShatteredSet(best))


def _n_witness(H: HypothesisClass, S: tuple[int, ...]):
    pats = _patterns(H, S)
    if len(pats) < 2 ** len(S):
        return None
    cols = [sorted({p[i] for p in pats}) for i in range(len(S))]
    choices = [list(itertools.combinations(c, 2)) for c in cols]
    for pairs in itertools.product(*choices):
        f0 = tuple(a for a, _ in pairs)
        f1 = tuple(b for _, b in pairs)
        if all(
            tuple(f1[i] if bits >> i & 1 else f0[i] for i in range(len(S))) in pats
            for bits in range(2 ** len(S))
        ):
            return f0, f1
    return None


def natarajan_dim(H: HypothesisClass) -> DimensionResult:
    """Largest N-shattered subset with witnesses ``f0 < f1`` pointwise.

    Ordering the witness pair loses nothing: swapping ``f0(x), f1(x)`` only
    relabels which subsets ``T`` pick which side.
    """
    check_caps(H)
    if len(H) == 0:
        return DimensionResult(-1)
    best = ShatteredSet(())
    for d in range(1, min(H.n, _floor_log2(len(H))) + 1):
        found = None
        for S in itertools.combinations(range(H.n), d):
            w = _n_witness(H, S)
            if w is not None:
                found = ShatteredSet(S, *w)
                break
        if found is None:
            break
        best = found
    if best.size == 0:
        return DimensionResult(0, ShatteredSet((), (), ()))
    return DimensionResult(best.size, best)


def littlestone_dim(H: HypothesisClass) -> DimensionResult:
    _require_binary(H, "Littlestone dimension")
    solver = DimensionSolver(H)
    d = solver.ldim(H.full_mask)
    if d < 0:
        return DimensionResult(-1)
    return DimensionResult(d, MistakeTree.from_nested(2, d, solver.ltree(H.full_mask, d)))


def mc_littlestone_dim(H: HypothesisClass) -> DimensionResult:
    solver = DimensionSolver(H)
    d = solver.mcldim(H.full_mask)
    if d < 0:
        return DimensionResult(-1)
    return DimensionResult(d, MistakeTree.from_nested(2, d, solver.mctree(H.full_mask, d)))


def bandit_littlestone_dim(H: HypothesisClass) -> DimensionResult:
    """Depth of the deepest complete k-ary tree BL-shattered by ``H``.

    Each internal node's k child edges carry the labels ``0..k-1`` in order.
    """
    if H.k < 2:
        raise DomainError("bandit Littlestone dimension needs k >= 2")
    solver = DimensionSolver(H)
    d = solver.bldim(H.full_mask)
    if d < 0:
        return DimensionResult(-1)
    return DimensionResult(d, MistakeTree.from_nested(H.k, d, solver.bltree(H.full_mask, d)))


DIMENSIONS = {
    "vc": vc_dim,
    "natarajan": natarajan_dim,
    "ldim": littlestone_dim,
    "mcldim": mc_littlestone_dim,
    "bldim": bandit_littlestone_dim,
}
