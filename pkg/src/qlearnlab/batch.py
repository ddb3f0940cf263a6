"""Batch learning: ERM, measure-then-ERM on quantum examples, and Monte Carlo
PAC / agnostic experiments.

Generalisation error is always computed exactly by summing over the finite
support, so the only randomness in an experiment is the sample itself. Trial
``i`` of an experiment seeded with ``s`` draws from ``default_rng([s, i])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Distribution, HypothesisClass, LabeledExample, joint_error, joint_errors, true_error
from .errors import PreconditionError
from .quantum import (
    RegisterLayout,
    StateVector,
    decode_example,
    prepare_agnostic_example,
    prepare_realizable_example,
    sample_outcomes,
)


@dataclass(frozen=True)
class PacParams:
    epsilon: float
    delta: float
    m: int
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise PreconditionError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise PreconditionError(f"delta must lie in (0, 1), got {self.delta}")
        if self.m < 0 or self.trials < 1:
            raise PreconditionError("need m >= 0 and at least one trial")


def _label_counts(sample: Sequence[LabeledExample], n: int, k: int) -> np.ndarray:
    counts = np.zeros((n, k), dtype=np.int64)
    if len(sample):
        xs, ys = np.asarray(sample, dtype=np.int64).T
        np.add.at(counts, (xs, ys), 1)
    return counts


def erm(sample: Sequence[LabeledExample], H: HypothesisClass) -> tuple[int, ...]:
    """Member with the fewest mistakes on ``sample``; ties go to the earliest member."""
    if len(H) == 0:
        raise PreconditionError("ERM over an empty class")
    counts = _label_counts(sample, H.n, H.k)
    hits = counts[np.arange(H.n)[None, :], H.table].sum(axis=1)
    return H[int(np.argmax(hits))]


def measure_examples(states: Sequence[StateVector], rng: np.random.Generator) -> list[LabeledExample]:
    """Measure each state once and decode ``(x, y)``.

    Repeated references to one state object are independent copies; they are
    measured in a single vectorised call.
    """
    out: list[LabeledExample | None] = [None] * len(states)
    groups: dict[int, list[int]] = {}
    for i, s in enumerate(states):
        groups.setdefault(id(s), []).append(i)
    for positions in groups.values():
        state = states[positions[0]]
        for i, m in zip(positions, sample_outcomes(state, rng, len(positions))):
            out[i] = LabeledExample(*decode_example(state.layout, int(m)))
    return out


def measure_then_erm(states: Sequence[StateVector], H: HypothesisClass, rng: np.random.Generator) -> tuple[int, ...]:
    return erm(measure_examples(states, rng), H)


def realizable_states(D: Distribution, target: Sequence[int], k: int, m: int) -> list[StateVector]:
    state = prepare_realizable_example(D, target, RegisterLayout.example(D.support_size, k))
    return [state] * m


def agnostic_states(D: Distribution, n: int, k: int, m: int) -> list[StateVector]:
    state = prepare_agnostic_example(D, RegisterLayout.example(n, k))
    return [state] * m


Learner = Callable[[list, np.random.Generator], Sequence[int]]


def pac_trials(H: HypothesisClass, D: Distribution, target: Sequence[int], params: PacParams,
               learner: Learner | None = None) -> np.ndarray:
    """Exact generalisation error of the learner's output in each trial."""
    if tuple(target) not in H:
        raise PreconditionError("target must be a member of the class")
    learner = learner or (lambda states, rng: measure_then_erm(states, H, rng))
    states = realizable_states(D, target, H.k, params.m)
    errs = np.empty(params.trials)
    for i in range(params.trials):
        rng = np.random.default_rng([params.seed, i])
        errs[i] = true_error(learner(states, rng), D, target)
    return errs


def pac_experiment(H: HypothesisClass, D: Distribution, target: Sequence[int], params: PacParams,
                   learner: Learner | None = None) -> float:
    """Fraction of trials whose output has error at most ``epsilon``."""
    return float(np.mean(pac_trials(H, D, target, params, learner) <= params.epsilon))


def agnostic_trials(H: HypothesisClass, D: Distribution, params: PacParams) -> np.ndarray:
    """Exact regret ``L_D(h) - min_{h' in H} L_D(h')`` of measure-then-ERM per trial."""
    if len(H) == 0:
        raise PreconditionError("agnostic learning over an empty class")
    best = float(joint_errors(H, D).min())
    states = agnostic_states(D, H.n, H.k, params.m)
    regrets = np.empty(params.trials)
    for i in range(params.trials):
        rng = np.random.default_rng([params.seed, i])
        regrets[i] = max(0.0, joint_error(measure_then_erm(states, H, rng), D, H.k) - best)
    return regrets


def agnostic_experiment(H: HypothesisClass, D: Distribution, params: PacParams) -> float:
    return float(np.mean(agnostic_trials(H, D, params) <= params.epsilon))


def noisy_joint(marginal: Distribution, target: Sequence[int], k: int, noise: float) -> Distribution:
    """Labels from ``target`` except with probability ``noise``, spread over the other labels."""
    n = marginal.support_size
    p = np.zeros((n, k))
    for x in range(n):
        p[x, :] = marginal.probs[x] * noise / (k - 1)
        p[x, target[x]] = marginal.probs[x] * (1 - noise)
    return Distribution.normalized(p.reshape(-1))
