"""Shattering certificates: point sets with optional Natarajan witnesses, and
complete trees stored as flat breadth-first arrays.

A complete ``arity``-ary tree of depth ``d`` has ``(arity**d - 1) / (arity - 1)``
internal nodes; node ``i`` has children ``arity * i + 1 + j``. Indices past the
internal-node range are leaves and carry no data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import PreconditionError


def internal_count(arity: int, depth: int) -> int:
    if depth == 0:
        return 0
    return (arity**depth - 1) // (arity - 1)


def _frozen(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=np.int64)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ShatteredSet:
    """Certificate for VCdim (``f0 = f1 = None``) or Ndim (witness label maps on ``points``)."""

    points: tuple[int, ...]
    f0: tuple[int, ...] | None = None
    f1: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.f0 is None) != (self.f1 is None):
            raise PreconditionError("Natarajan witnesses come in pairs")
        if self.f0 is not None and not (len(self.f0) == len(self.f1) == len(self.points)):
            raise PreconditionError("witness maps must have one label per certificate point")

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def is_natarajan(self) -> bool:
        return self.f0 is not None

    def __eq__(self, other):
        if not isinstance(other, ShatteredSet):
            return NotImplemented
        return (self.points, self.f0, self.f1) == (other.points, other.f0, other.f1)


class MistakeTree:
    """Complete tree with a domain point at each internal node and a label per child edge.

    ``nodes[i]`` is the point at internal node ``i`` and ``edges[i, j]`` the
    label on the edge to its ``j``-th child.
    """

    def __init__(self, arity: int, depth: int, nodes: Sequence[int], edges):
        if arity < 2:
            raise PreconditionError(f"tree arity must be >= 2, got {arity}")
        if depth < 0:
            raise PreconditionError("tree depth must be >= 0")
        size = internal_count(arity, depth)
        self.arity = arity
        self.depth = depth
        self.nodes = _frozen(nodes)
        self.edges = _frozen(edges, (size, arity)) if size else _frozen(np.zeros((0, arity)))
        if self.nodes.shape != (size,):
            raise PreconditionError(f"depth-{depth} {arity}-ary tree needs {size} nodes, got {self.nodes.size}")

    @classmethod
    def leaf(cls, arity: int = 2) -> MistakeTree:
        return cls(arity, 0, [], [])

    @classmethod
    def from_nested(cls, arity: int, depth: int, nested) -> MistakeTree:
        """Lay out a nested ``(x, edge_labels, children)`` tree (``None`` for a leaf) in BFS order."""
        nodes, edges = [], []
        level = [nested]
        for _ in range(depth):
            nxt = []
            for node in level:
                if node is None:
                    raise PreconditionError("nested tree is not complete at the declared depth")
                x, labels, children = node
                nodes.append(x)
                edges.append(list(labels))
                nxt.extend(children)
            level = nxt
        return cls(arity, depth, nodes, edges)

    def __eq__(self, other):
        if not isinstance(other, MistakeTree):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.depth == other.depth
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self):
        return f"MistakeTree(arity={self.arity}, depth={self.depth})"

    def child(self, i: int, j: int) -> int:
        return self.arity * i + 1 + j

    def is_internal(self, i: int) -> bool:
        return i < self.nodes.size

    def paths(self) -> Iterator[list[tuple[int, int]]]:
        """Every root-to-leaf path as a list of ``(point, edge_label)`` steps."""
        if self.depth == 0:
            yield []
            return
        stack = [(0, [])]
        while stack:
            i, prefix = stack.pop()
            if not self.is_internal(i):
                yield prefix
                continue
            x = int(self.nodes[i])
            for j in reversed(range(self.arity)):
                stack.append((self.child(i, j), prefix + [(x, int(self.edges[i, j]))]))

    def subtree(self, j: int) -> MistakeTree:
        """The depth ``d-1`` subtree below the root's ``j``-th edge."""
        if self.depth == 0:
            raise PreconditionError("a leaf has no subtrees")
        nodes, edges = [], []
        level = [self.child(0, j)]
        for _ in range(self.depth - 1):
            nodes.extend(int(self.nodes[i]) for i in level)
            edges.extend(self.edges[i].tolist() for i in level)
            level = [self.child(i, c) for i in level for c in range(self.arity)]
        return MistakeTree(self.arity, self.depth - 1, nodes, edges)


class ExampleTree:
    """Complete binary tree with a labeled example ``(x, y)`` at each internal node.

    Left edges carry 0 and right edges 1.
    """

    arity = 2

    def __init__(self, depth: int, xs: Sequence[int], ys: Sequence[int]):
        size = internal_count(2, depth)
        self.depth = depth
        self.xs = _frozen(xs)
        self.ys = _frozen(ys)
        if self.xs.shape != (size,) or self.ys.shape != (size,):
            raise PreconditionError(f"depth-{depth} example tree needs {size} nodes")

    def __eq__(self, other):
        if not isinstance(other, ExampleTree):
            return NotImplemented
        return (
            self.depth == other.depth
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
        )

    def __repr__(self):
        return f"ExampleTree(depth={self.depth})"

    def left(self, i: int) -> int:
        return 2 * i + 1

    def right(self, i: int) -> int:
        return 2 * i + 2

    def is_internal(self, i: int) -> bool:
        return i < self.xs.size
