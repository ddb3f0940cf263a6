"""Finite hypothesis classes, distributions and labeled examples.

Domains are ``range(n)`` and label sets ``range(k)``; any other finite domain
has to be mapped onto integers by the caller. A hypothesis is a tuple of
``n`` labels. Classes keep their members sorted lexicographically so that
every downstream tie-break (ERM, certificates, SOA) is deterministic.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError, SizeLimitError

Hypothesis = tuple[int, ...]

FULL_CLASS_CAP = 65536
PROB_TOL = 1e-12


class LabeledExample(NamedTuple):
    x: int
    y: int


class HypothesisClass:
    """A finite set of total label maps ``h: range(n) -> range(k)``.

    Duplicate members are collapsed and the remainder sorted, so two classes
    with the same behaviours compare equal.
    """

    def __init__(self, n: int, k: int, members: Iterable[Sequence[int]] = ()):
        if n < 1:
            raise PreconditionError(f"domain size must be >= 1, got {n}")
        if k < 1:
            raise PreconditionError(f"number of labels must be >= 1, got {k}")
        rows = set()
        for h in members:
            h = tuple(int(v) for v in h)
            if len(h) != n:
                raise PreconditionError(f"hypothesis {h} has length {len(h)}, expected {n}")
            if any(v < 0 or v >= k for v in h):
                raise PreconditionError(f"hypothesis {h} has a label outside range({k})")
            rows.add(h)
        self._n = n
        self._k = k
        self._members: tuple[Hypothesis, ...] = tuple(sorted(rows))

    @property
    def n(self) -> int:
        return self._n

    @property
    def k(self) -> int:
        return self._k

    @property
    def members(self) -> tuple[Hypothesis, ...]:
        return self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        return iter(self._members)

    def __getitem__(self, i: int) -> Hypothesis:
        return self._members[i]

    def __contains__(self, h) -> bool:
        return tuple(h) in self.index

    def __eq__(self, other) -> bool:
        if not isinstance(other, HypothesisClass):
            return NotImplemented
        return (self._n, self._k, self._members) == (other._n, other._k, other._members)

    def __hash__(self) -> int:
        return hash((self._n, self._k, self._members))

    def __repr__(self) -> str:
        return f"HypothesisClass(n={self._n}, k={self._k}, size={len(self)})"

    @cached_property
    def table(self) -> np.ndarray:
        """Read-only ``(len(H), n)`` integer array of member labels."""
        t = np.array(self._members, dtype=np.int64).reshape(len(self._members), self._n)
        t.setflags(write=False)
        return t

    @cached_property
    def index(self) -> dict[Hypothesis, int]:
        return {h: i for i, h in enumerate(self._members)}

    @cached_property
    def label_masks(self) -> tuple[tuple[int, ...], ...]:
        """``label_masks[x][y]`` is the bitmask of member indices with ``h(x) == y``."""
        masks = [[0] * self._k for _ in range(self._n)]
        for i, h in enumerate(self._members):
            bit = 1 << i
            for x, y in enumerate(h):
                masks[x][y] |= bit
        return tuple(tuple(row) for row in masks)

    @property
    def full_mask(self) -> int:
        return (1 << len(self._members)) - 1

    def subclass(self, mask: int) -> HypothesisClass:
        """Members selected by a bitmask over member indices."""
        picked = [h for i, h in enumerate(self._members) if mask >> i & 1]
        return HypothesisClass(self._n, self._k, picked)

    def check_point(self, x: int) -> None:
        if not 0 <= x < self._n:
            raise PreconditionError(f"domain point {x} outside range({self._n})")

    def check_label(self, y: int) -> None:
        if not 0 <= y < self._k:
            raise PreconditionError(f"label {y} outside range({self._k})")


def empty_class(n: int, k: int) -> HypothesisClass:
    return HypothesisClass(n, k, ())


def full_class(n: int, k: int) -> HypothesisClass:
    """All ``k**n`` label maps on ``n`` points, in lexicographic order."""
    if not (1 <= n <= 8 and 2 <= k <= 4) or k**n > FULL_CLASS_CAP:
        raise SizeLimitError(f"full_class({n}, {k}) is outside the enumeration cap")
    return HypothesisClass(n, k, itertools.product(range(k), repeat=n))


def restrict_consistent(H: HypothesisClass, x: int, y: int) -> HypothesisClass:
    """Members with ``h(x) == y``, order preserved."""
    H.check_point(x)
    H.check_label(y)
    return HypothesisClass(H.n, H.k, (h for h in H if h[x] == y))


def restrict_inconsistent(H: HypothesisClass, x: int, y: int) -> HypothesisClass:
    """Members with ``h(x) != y``, order preserved."""
    H.check_point(x)
    H.check_label(y)
    return HypothesisClass(H.n, H.k, (h for h in H if h[x] != y))


def empirical_error(h: Sequence[int], sample: Sequence[LabeledExample]) -> Fraction:
    """Exact fraction of ``sample`` that ``h`` mislabels."""
    if len(sample) == 0:
        raise PreconditionError("empirical error of an empty sample is undefined")
    wrong = sum(1 for x, y in sample if h[x] != y)
    return Fraction(wrong, len(sample))


class Distribution:
    """Probability vector over ``range(support_size)``.

    A joint distribution over ``X x Y`` is stored flat in x-major order
    (index ``x * k + y``); see :meth:`joint`.
    """

    __slots__ = ("_probs",)

    def __init__(self, probs: Iterable[float]):
        p = np.array(list(probs), dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise PreconditionError("distribution must be a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise PreconditionError("distribution has negative or non-finite entries")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise PreconditionError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        self._probs = p

    @classmethod
    def uniform(cls, size: int) -> Distribution:
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, size: int, at: int) -> Distribution:
        p = np.zeros(size)
        p[at] = 1.0
        return cls(p)

    @classmethod
    def normalized(cls, weights: Iterable[float]) -> Distribution:
        """Rescale non-negative weights; rounding is pushed into the largest entry."""
        w = np.array(list(weights), dtype=float)
        p = w / w.sum()
        p[np.argmax(p)] += 1.0 - p.sum()
        return cls(p)

    @classmethod
    def random(cls, size: int, rng: np.random.Generator) -> Distribution:
        """Uniform draw from the probability simplex."""
        return cls.normalized(rng.dirichlet(np.ones(size)))

    @classmethod
    def realizable_joint(cls, marginal: Distribution, target: Sequence[int], k: int) -> Distribution:
        """Joint distribution putting ``marginal[x]`` on ``(x, target[x])``."""
        n = marginal.support_size
        p = np.zeros(n * k)
        for x in range(n):
            p[x * k + target[x]] = marginal.probs[x]
        return cls(p)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def support_size(self) -> int:
        return self._probs.size

    def __len__(self) -> int:
        return self._probs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __repr__(self) -> str:
        return f"Distribution({self._probs.tolist()})"

    def joint(self, k: int) -> np.ndarray:
        """View as an ``(n, k)`` matrix; requires ``support_size % k == 0``."""
        if self._probs.size % k:
            raise PreconditionError(f"support {self._probs.size} is not a multiple of k={k}")
        return self._probs.reshape(-1, k)

    def is_point_mass(self) -> bool:
        return bool(np.count_nonzero(self._probs) == 1)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        return rng.choice(self._probs.size, size=size, p=self._probs)


def true_error(h: Sequence[int], D: Distribution, target: Sequence[int]) -> float:
    """``sum_x D(x) * 1[h(x) != target(x)]``, computed exactly over the support."""
    if D.support_size != len(h) or len(target) != len(h):
        raise PreconditionError(
            f"support size {D.support_size} does not match domain size {len(h)}"
        )
    wrong = np.asarray(h) != np.asarray(target)
    return float(min(1.0, D.probs[wrong].sum()))


def joint_error(h: Sequence[int], D: Distribution, k: int) -> float:
    """``P_{(x,y)~D}[h(x) != y]`` for a joint distribution over ``X x Y``."""
    J = D.joint(k)
    if J.shape[0] != len(h):
        raise PreconditionError(f"joint support has {J.shape[0]} points, hypothesis {len(h)}")
    hit = J[np.arange(len(h)), np.asarray(h)].sum()
    return float(min(1.0, max(0.0, J.sum() - hit)))


def joint_errors(H: HypothesisClass, D: Distribution) -> np.ndarray:
    """Vector of :func:`joint_error` for every member of ``H``."""
    J = D.joint(H.k)
    marg = J.sum(axis=1)
    hit = J[np.arange(H.n)[None, :], H.table]
    return np.clip((marg[None, :] - hit).sum(axis=1), 0.0, 1.0)


def draw_sample(D: Distribution, target: Sequence[int], m: int, rng: np.random.Generator) -> list[LabeledExample]:
    xs = D.sample(rng, size=m)
    return [LabeledExample(int(x), int(target[x])) for x in xs]
