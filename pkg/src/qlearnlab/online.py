"""Online learning protocols, learners, adversaries, and loss / regret /
martingale bookkeeping.

Three models share one harness:

``input``
    adversary shows ``x_t``, learner commits to ``h_t``, adversary reveals
    ``y_t``; the loss is the indicator, so ``P_t == I_t``.
``dist``
    learner commits to ``h_t``, adversary picks a joint ``D_t`` (seeing
    ``h_t``), the harness draws ``(x_t, y_t) ~ D_t`` and reveals it.
``quantum``
    as ``dist`` but the adversary's ``D_t`` is handed to the learner as a
    quantum example, and the learner decides what to do with it (measure it).

In the last two models ``P_t = P_{D_t}[h_t(x) != y]`` is computed by the
harness and never shown to the learner.

Each run draws from four independent streams (learner, adversary, harness,
measurement) split from ``(seed, trial)``, so the same scenario replayed in
a different model uses the same learner and adversary randomness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bounds import freedman_threshold
from .certificates import MistakeTree
from .core import Distribution, HypothesisClass, joint_error, joint_errors
from .dims import DimensionSolver, mc_littlestone_dim
from .errors import InvalidCertificateError, PreconditionError, ProtocolViolation, SizeLimitError
from .quantum import RegisterLayout, StateVector, decode_example, measure_computational, prepare_agnostic_example
from .trees import verify_L_shattered, verify_mcL_shattered

MODELS = ("input", "dist", "quantum")


def run_streams(seed: int, trial: int = 0) -> dict[str, np.random.Generator]:
    names = ("learner", "adversary", "harness", "measure")
    kids = np.random.SeedSequence([seed, trial]).spawn(len(names))
    return {n: np.random.default_rng(s) for n, s in zip(names, kids)}


@dataclass(frozen=True)
class ProtocolConfig:
    model: str
    T: int
    realizable: bool = True
    mistake_threshold: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise PreconditionError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.T < 1:
            raise PreconditionError("T must be >= 1")
        if self.mistake_threshold is not None and not 0 < self.mistake_threshold < 1:
            raise PreconditionError("mistake threshold must lie in (0, 1)")


@dataclass(frozen=True)
class RoundRecord:
    t: int
    D: Distribution
    x: int
    y: int
    h: tuple[int, ...]
    P: float
    I: int
    M: float
    W_partial: float
    L_eps: int | None = None


@dataclass
class Transcript:
    config: ProtocolConfig
    H: HypothesisClass
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def T(self) -> int:
        return len(self.rounds)

    @property
    def indicator_loss(self) -> int:
        """Realised mistakes ``sum_t 1[h_t(x_t) != y_t]``."""
        return sum(r.I for r in self.rounds)

    @property
    def probabilistic_loss(self) -> float:
        """Expected mistakes ``sum_t P_{D_t}[h_t(x) != y]``."""
        return float(sum(r.P for r in self.rounds))

    @property
    def quadratic_variation(self) -> float:
        return self.rounds[-1].W_partial if self.rounds else 0.0

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rounds])


# learners ---------------------------------------------------------------


class SOALearner:
    """Standard optimal algorithm over a version space.

    Predicts, at every point, the label whose consistent restriction has the
    largest (multiclass) Littlestone dimension, ties to the smallest label. The
    full hypothesis may lie outside ``H``.
    """

    quantum = False

    def __init__(self, H: HypothesisClass):
        if len(H) == 0:
            raise PreconditionError("SOA needs a non-empty class")
        self.H = H
        self.solver = DimensionSolver(H)
        self.version = H.full_mask
        self._cache: dict[int, tuple[int, ...]] = {}

    def hypothesis(self, t: int, x: int | None = None) -> tuple[int, ...]:
        V = self.version
        h = self._cache.get(V)
        if h is None:
            h = tuple(
                max(range(self.H.k), key=lambda y, row=row: (self.solver.mcldim(V & row[y]), -y))
                for row in self.H.label_masks
            )
            self._cache[V] = h
        return h

    def update(self, x: int, y: int) -> None:
        V = self.version & self.H.label_masks[x][y]
        if V == 0:
            raise ProtocolViolation(f"example ({x}, {y}) is inconsistent with every remaining hypothesis")
        self.version = V


class MWLearner:
    """Exponential weights over the members of a finite class.

    Plays a member drawn in proportion to its weight and multiplies each weight
    by ``exp(-eta * 1[h(x_t) != y_t])`` after the reveal.
    """

    quantum = False

    def __init__(self, H: HypothesisClass, T: int, eta: float | None = None, rng: np.random.Generator | None = None):
        if len(H) == 0:
            raise PreconditionError("multiplicative weights needs a non-empty class")
        self.H = H
        self.eta = math.sqrt(8 * math.log(len(H)) / T) if eta is None else eta
        self.rng = rng if rng is not None else np.random.default_rng()
        self.log_w = np.zeros(len(H))

    def weights(self) -> np.ndarray:
        w = np.exp(self.log_w - self.log_w.max())
        return w / w.sum()

    def hypothesis(self, t: int, x: int | None = None) -> tuple[int, ...]:
        cdf = np.cumsum(self.weights())
        i = int(min(np.searchsorted(cdf, self.rng.random() * cdf[-1], side="right"), len(cdf) - 1))
        return self.H[i]

    def update(self, x: int, y: int) -> None:
        self.log_w -= self.eta * (self.H.table[:, x] != y)


class TableLearner:
    """Deterministic learner given as a lookup ``(history, x) -> predicted label``."""

    quantum = False

    def __init__(self, n: int, table: dict, default: int = 0):
        self.n = n
        self.table = table
        self.default = default
        self.history: tuple = ()

    def hypothesis(self, t: int, x: int | None = None) -> tuple[int, ...]:
        h = [self.default] * self.n
        if x is not None:
            h[x] = self.table.get((self.history, x), self.default)
        return tuple(h)

    def update(self, x: int, y: int) -> None:
        self.history += ((x, y),)


class MeasureAndLearn:
    """Quantum learner that measures each example and forwards it to a classical learner."""

    quantum = True

    def __init__(self, inner, rng: np.random.Generator):
        self.inner = inner
        self.rng = rng

    def hypothesis(self, t: int, x: int | None = None) -> tuple[int, ...]:
        return self.inner.hypothesis(t, x)

    def observe(self, state: StateVector) -> tuple[int, int]:
        m, _ = measure_computational(state, self.rng)
        x, y = decode_example(state.layout, m)
        self.inner.update(x, y)
        return x, y

    def update(self, x: int, y: int) -> None:
        self.inner.update(x, y)


# adversaries --------------------------------------------------------------


def _point(n: int, k: int, x: int, y: int) -> Distribution:
    return Distribution.point_mass(n * k, x * k + y)


class PointMassAdversary:
    """Replays a fixed sequence of examples as point masses."""

    def __init__(self, H: HypothesisClass, sequence: Sequence[tuple[int, int]]):
        self.n, self.k = H.n, H.k
        self.sequence = [tuple(map(int, e)) for e in sequence]

    def _at(self, t: int) -> tuple[int, int]:
        if t >= len(self.sequence):
            raise PreconditionError(f"point-mass sequence has only {len(self.sequence)} rounds")
        return self.sequence[t]

    def point(self, t: int, history) -> int:
        return self._at(t)[0]

    def label(self, t: int, history, x: int, y_hat: int) -> int:
        return self._at(t)[1]

    def distribution(self, t: int, history, h) -> Distribution:
        return _point(self.n, self.k, *self._at(t))


class TreeAdversary:
    """Walks a shattered tree, always revealing an edge label the learner did not predict.

    Every round spent inside the tree is a forced mistake. Once a leaf is
    reached the adversary settles on the first member consistent with the
    path and keeps presenting it at point 0.
    """

    def __init__(self, H: HypothesisClass, tree: MistakeTree):
        ok = verify_L_shattered(H, tree) if H.k == 2 else verify_mcL_shattered(H, tree)
        if not ok:
            raise InvalidCertificateError("tree adversary needs a shattered tree")
        self.H = H
        self.tree = tree
        self.node = 0
        self.version = H.full_mask
        self.target: tuple[int, ...] | None = None

    def _step(self, y_hat: int) -> tuple[int, int]:
        if self.tree.is_internal(self.node):
            x = int(self.tree.nodes[self.node])
            labels = self.tree.edges[self.node]
            j = next((j for j, e in enumerate(labels) if e != y_hat), 0)
            y = int(labels[j])
            self.node = self.tree.child(self.node, j)
            self.version &= self.H.label_masks[x][y]
            return x, y
        if self.target is None:
            first = (self.version & -self.version).bit_length() - 1
            self.target = self.H[first]
        return 0, self.target[0]

    def point(self, t: int, history) -> int:
        if self.tree.is_internal(self.node):
            return int(self.tree.nodes[self.node])
        return 0

    def label(self, t: int, history, x: int, y_hat: int) -> int:
        return self._step(y_hat)[1]

    def distribution(self, t: int, history, h) -> Distribution:
        x = self.point(t, history)
        x, y = self._step(int(h[x]))
        return _point(self.H.n, self.H.k, x, y)


class StochasticAdversary:
    """Fixed joint distribution, drawn i.i.d. each round.

    Pass ``target`` to make it realizable with ``D`` a marginal over ``X``;
    otherwise ``D`` is a joint distribution over ``X x Y`` stored x-major.
    """

    def __init__(self, H: HypothesisClass, D: Distribution, target: Sequence[int] | None = None,
                 rng: np.random.Generator | None = None):
        self.n, self.k = H.n, H.k
        self.joint = Distribution.realizable_joint(D, target, H.k) if target is not None else D
        if self.joint.support_size != self.n * self.k:
            raise PreconditionError("distribution does not match the class")
        self.rng = rng if rng is not None else np.random.default_rng()
        self._pending: tuple[int, int] | None = None

    def point(self, t: int, history) -> int:
        z = int(self.joint.sample(self.rng))
        self._pending = divmod(z, self.k)
        return self._pending[0]

    def label(self, t: int, history, x: int, y_hat: int) -> int:
        return self._pending[1]

    def distribution(self, t: int, history, h) -> Distribution:
        return self.joint


class RandomDistributionAdversary:
    """Realizable adversary with a fresh uniformly random ``D_t`` over ``X`` each round."""

    def __init__(self, H: HypothesisClass, target: Sequence[int], rng: np.random.Generator):
        self.H = H
        self.target = tuple(target)
        self.rng = rng
        self._pending = None

    def point(self, t: int, history) -> int:
        x = int(Distribution.random(self.H.n, self.rng).sample(self.rng))
        self._pending = (x, self.target[x])
        return x

    def label(self, t: int, history, x: int, y_hat: int) -> int:
        return self._pending[1]

    def distribution(self, t: int, history, h) -> Distribution:
        return Distribution.realizable_joint(Distribution.random(self.H.n, self.rng), self.target, self.H.k)


# harness ------------------------------------------------------------------


def run_protocol(config: ProtocolConfig, learner, adversary, H: HypothesisClass,
                 rng: np.random.Generator | None = None) -> Transcript:
    """Run ``config.T`` rounds and record every round.

    ``rng`` draws the realised example in the ``dist`` model and is unused
    otherwise. In realizable mode every example the adversary puts mass on
    must agree with some single member of ``H``.
    """
    if config.model == "quantum" and not getattr(learner, "quantum", False):
        raise PreconditionError("quantum model needs a learner that accepts quantum examples")
    if config.model != "quantum" and getattr(learner, "quantum", False):
        raise PreconditionError("quantum learners only run in the quantum model")
    rng = rng if rng is not None else np.random.default_rng()
    n, k = H.n, H.k
    layout = RegisterLayout.example(n, k) if config.model == "quantum" else None
    transcript = Transcript(config, H)
    version = H.full_mask
    W = 0.0

    for t in range(config.T):
        history = transcript.rounds
        if config.model == "input":
            x = adversary.point(t, history)
            h = tuple(learner.hypothesis(t, x))
            y = adversary.label(t, history, x, h[x])
            D = _point(n, k, x, y)
            learner.update(x, y)
        else:
            h = tuple(learner.hypothesis(t))
            D = adversary.distribution(t, history, h)
            if D.support_size != n * k:
                raise ProtocolViolation(f"adversary distribution has {D.support_size} entries, expected {n * k}")
            if config.model == "dist":
                x, y = divmod(int(D.sample(rng)), k)
                learner.update(x, y)
            else:
                x, y = learner.observe(prepare_agnostic_example(D, layout))

        if config.realizable:
            for z in np.flatnonzero(D.probs):
                version &= H.label_masks[z // k][z % k]
            if version == 0:
                raise ProtocolViolation(f"round {t}: revealed examples are not realised by any member of H")

        I = int(h[x] != y)
        P = float(I) if config.model == "input" else joint_error(h, D, k)
        W += P * (1 - P)
        eps = config.mistake_threshold
        transcript.rounds.append(
            RoundRecord(t, D, x, y, h, P, I, P - I, W, None if eps is None else int(P > eps))
        )
    return transcript


@dataclass(frozen=True)
class RegretReport:
    realizable_regret: float | None
    agnostic_regret: float
    best_in_class: tuple[int, ...]


def _consistent_mask(transcript: Transcript) -> int:
    H = transcript.H
    V = H.full_mask
    for r in transcript.rounds:
        for z in np.flatnonzero(r.D.probs):
            V &= H.label_masks[z // H.k][z % H.k]
    return V


def class_losses(transcript: Transcript) -> np.ndarray:
    """Cumulative ``sum_t P_{D_t}[h(x) != y]`` for every member ``h``."""
    H = transcript.H
    total = np.zeros(len(H))
    cache: dict[int, np.ndarray] = {}
    for r in transcript.rounds:
        key = id(r.D)
        if key not in cache:
            cache[key] = joint_errors(H, r.D)
        total += cache[key]
    return total


def regret_eval(transcript: Transcript, H: HypothesisClass | None = None) -> RegretReport:
    """Agnostic regret (cumulative loss minus best member) and, when every
    revealed example is consistent with some member, the realizable regret
    ``sup_{h*} sum_t P_{x ~ D_t}[h_t(x) != h*(x)]`` over consistent ``h*``."""
    if H is not None and H != transcript.H:
        transcript = Transcript(transcript.config, H, transcript.rounds)
    H = transcript.H
    losses = class_losses(transcript)
    best = int(np.argmin(losses))
    agnostic = transcript.probabilistic_loss - float(losses[best])
    V = _consistent_mask(transcript)
    realizable = None
    if V:
        margs = np.array([r.D.joint(H.k).sum(axis=1) for r in transcript.rounds])
        hs = np.array([r.h for r in transcript.rounds])
        realizable = max(
            float(np.sum(margs * (hs != np.asarray(H[i])[None, :])))
            for i in range(len(H)) if V >> i & 1
        )
    return RegretReport(realizable, agnostic, H[best])


# martingale accounting ----------------------------------------------------


@dataclass(frozen=True)
class MartingaleReport:
    bin_edges: np.ndarray
    bin_mean: np.ndarray
    bin_stderr: np.ndarray
    W: np.ndarray
    prob_loss: np.ndarray
    indicator_loss: np.ndarray
    ldim: np.ndarray
    variation_ok: np.ndarray
    exceedance: dict[float, float]
    exceedance_limit: dict[float, float]

    @property
    def max_abs_z(self) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.bin_stderr > 0, np.abs(self.bin_mean) / self.bin_stderr, 0.0)
        return float(z.max()) if z.size else 0.0

    def centred(self, sigmas: float = 3.0) -> bool:
        """Every bin mean lies within ``sigmas`` standard errors of 0 (exactly 0 when the spread is 0)."""
        zero_spread = self.bin_stderr == 0
        return bool(np.all(np.abs(self.bin_mean[zero_spread]) < 1e-12) and self.max_abs_z <= sigmas)


def martingale_report(transcripts: Sequence[Transcript], deltas: Iterable[float] = (0.5, 1.0),
                      bin_width: int = 1) -> MartingaleReport:
    """Empirical checks on ``M_t = P_t - I_t`` across independent runs of equal length.

    Reports the across-run mean and standard error of ``M_t`` per bin of
    rounds, the per-run predictable quadratic variation ``W_T`` against
    ``sum P_t + Ldim``, and how often ``sum P_t`` exceeds
    ``8 Ldim + 256 loglog T + 256 delta`` compared with ``exp(-delta)``.
    """
    if not transcripts:
        raise PreconditionError("no transcripts")
    T = transcripts[0].T
    if any(tr.T != T for tr in transcripts):
        raise PreconditionError("transcripts must share the same horizon")
    if T < 4:
        raise PreconditionError("the Freedman bound is stated for T >= 4")
    M = np.array([tr.column("M") for tr in transcripts])
    edges = np.arange(0, T + bin_width, bin_width)
    edges[-1] = T
    binned = np.array([M[:, a:b].mean(axis=1) for a, b in zip(edges[:-1], edges[1:])]).T
    mean = binned.mean(axis=0)
    stderr = binned.std(axis=0, ddof=1) / np.sqrt(len(transcripts)) if len(transcripts) > 1 else np.zeros_like(mean)

    dims: dict[HypothesisClass, int] = {}
    ldim = np.array([dims.setdefault(tr.H, mc_littlestone_dim(tr.H).value) for tr in transcripts])
    W = np.array([tr.quadratic_variation for tr in transcripts])
    PL = np.array([tr.probabilistic_loss for tr in transcripts])
    IL = np.array([tr.indicator_loss for tr in transcripts])
    ok = W <= PL + ldim + 1e-9

    exceed, limit = {}, {}
    for d in deltas:
        thr = np.array([freedman_threshold(l, T, d) for l in ldim])
        exceed[d] = float(np.mean(PL > thr))
        limit[d] = math.exp(-d)
    return MartingaleReport(edges, mean, stderr, W, PL, IL, ldim, ok, exceed, limit)


# exhaustive deterministic learners ------------------------------------------


def _decision_points(H: HypothesisClass, T: int) -> list[tuple[tuple, int]]:
    points = []

    def rec(history: tuple, V: int):
        if len(history) == T:
            return
        for x in range(H.n):
            points.append((history, x))
            for y in range(H.k):
                W = V & H.label_masks[x][y]
                if W:
                    rec(history + ((x, y),), W)

    rec((), H.full_mask)
    return points


def worst_case_mistakes(H: HypothesisClass, predict, T: int) -> int:
    """Most mistakes a realizable input-model adversary can force in ``T`` rounds.

    ``predict(history, x)`` is the learner's label for ``x`` after ``history``.
    """

    def rec(history: tuple, V: int) -> int:
        if len(history) == T:
            return 0
        best = 0
        for x in range(H.n):
            guess = predict(history, x)
            for y in range(H.k):
                W = V & H.label_masks[x][y]
                if W:
                    best = max(best, int(guess != y) + rec(history + ((x, y),), W))
        return best

    if len(H) == 0:
        raise PreconditionError("empty class")
    return rec((), H.full_mask)


def enumerate_deterministic_learners(H: HypothesisClass, T: int, cap: int = 1 << 16):
    """Every deterministic input-model learner over the reachable histories of length < ``T``.

    Yields lookup tables ``{(history, x): label}``.
    """
    points = _decision_points(H, T)
    if H.k ** len(points) > cap:
        raise SizeLimitError(f"{H.k}**{len(points)} learners exceed the cap of {cap}")
    for labels in itertools.product(range(H.k), repeat=len(points)):
        yield dict(zip(points, labels))


def exhaustive_learner_sweep(H: HypothesisClass, T: int) -> int:
    """Minimum over all deterministic learners of the worst-case mistake count."""
    return min(
        worst_case_mistakes(H, lambda hist, x, tab=tab: tab[(hist, x)], T)
        for tab in enumerate_deterministic_learners(H, T)
    )


def minimax_mistakes(H: HypothesisClass, T: int) -> int:
    """Game value by backward induction: the learner picks the label minimising the adversary's best reply."""

    memo: dict[tuple[int, int], int] = {}

    def value(V: int, left: int) -> int:
        if left == 0:
            return 0
        key = (V, left)
        if key not in memo:
            best = 0
            for row in H.label_masks:
                options = [(y, V & row[y]) for y in range(H.k) if V & row[y]]
                learner_best = min(
                    max(int(guess != y) + value(W, left - 1) for y, W in options)
                    for guess in range(H.k)
                )
                best = max(best, learner_best)
            memo[key] = best
        return memo[key]

    return value(H.full_mask, T)


# sweeps -------------------------------------------------------------------


def make_learner(kind: str, H: HypothesisClass, T: int, model: str, streams: dict):
    if kind == "soa":
        inner = SOALearner(H)
    elif kind == "mw":
        inner = MWLearner(H, T, rng=streams["learner"])
    else:
        raise PreconditionError(f"unknown learner {kind!r}")
    return MeasureAndLearn(inner, streams["measure"]) if model == "quantum" else inner


def regret_sweep(H: HypothesisClass, learner: str, make_adversary, model: str, T_grid: Sequence[int],
                 trials: int, seed: int, realizable: bool = False) -> list[dict]:
    """Mean losses and regrets over ``trials`` seeded runs at each horizon.

    ``make_adversary(H, streams)`` builds a fresh adversary for one run.
    """
    rows = []
    for T in T_grid:
        regrets, prob, ind = [], [], []
        for i in range(trials):
            streams = run_streams(seed, i)
            cfg = ProtocolConfig(model, T, realizable)
            tr = run_protocol(cfg, make_learner(learner, H, T, model, streams), make_adversary(H, streams), H,
                              streams["harness"])
            regrets.append(regret_eval(tr).agnostic_regret)
            prob.append(tr.probabilistic_loss)
            ind.append(tr.indicator_loss)
        r = np.array(regrets)
        rows.append({
            "T": T,
            "trials": trials,
            "mean_regret": float(r.mean()),
            "stderr_regret": float(r.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0,
            "mean_prob_loss": float(np.mean(prob)),
            "mean_indicator_loss": float(np.mean(ind)),
        })
    for prev, row in zip(rows, rows[1:]):
        row["ratio_to_previous"] = row["mean_regret"] / prev["mean_regret"] if prev["mean_regret"] else float("nan")
    return rows
