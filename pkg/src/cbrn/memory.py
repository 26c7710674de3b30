"""One-shot delta-rule learning and recall between Cue Balls and a Recall Net.

Each Cue Ball is a group of cue neurons, one per stored pattern.  Recall
weights (cue to recall) hold the presentation vector a neuron replays into
the Recall Net; cue weights (recall to cue) drive the matching neuron's
pre-threshold output to the learning value theta; cross weights couple cue
neurons across balls so a recognized pattern in one ball recalls its linked
pattern in another.  With zero-initialized weights and unit learning rates,
every learning rule reaches its target in a single update and is a strict
no-op afterwards.

A system instance is single-writer while learning.  Response and recall
calls never mutate state, so a trained system may be queried concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    IntraBallLink,
    NeuronIndexError,
    NoAssociation,
    NoRecognition,
    UnknownBall,
)
from .patterns import AttributeCatalog, PatternVector


@dataclass
class SystemConfig:
    """Learning constants shared by every ball of a system."""

    dim: int = 13_456
    eps_w: float = 1.0  # recall-weight learning rate
    eps_v: float = 1.0  # cue-weight learning rate
    lambda_cb: float = 1.0  # cross-weight learning rate
    theta: float = 100.0  # learning value: target pre-threshold output
    threshold: float = 72.0  # firing cutoff of the cue step function
    epochs: int = 1  # update repetitions per learn call
    normalized: bool = True  # presentation vectors carry unit energy

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if min(self.eps_w, self.eps_v, self.lambda_cb) <= 0:
            raise ValueError("learning rates must be positive")
        if not self.theta > self.threshold > 0:
            raise ValueError(
                "need theta > threshold > 0, otherwise trained neurons never fire"
            )
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")


class CueBall:
    """Cue weights of one attribute group; one neuron per stored pattern."""

    def __init__(self, ball_id: str, labels, dim: int) -> None:
        self.id = ball_id
        self.labels = list(labels)
        self.v = np.zeros((len(self.labels), dim))

    @property
    def n(self) -> int:
        return len(self.labels)


class RecallBank:
    """Recall weights of one ball: row i is what neuron i replays into the net."""

    def __init__(self, ball_id: str, n: int, dim: int) -> None:
        self.id = ball_id
        self.w = np.zeros((n, dim))


@dataclass(frozen=True)
class CueResponse:
    """Pre-threshold outputs of one ball plus the thresholding outcome."""

    q: np.ndarray
    fired: tuple[int, ...]  # indices with q >= threshold, ascending
    argmax: int  # lowest index attaining the maximum
    threshold: float

    @property
    def x(self) -> np.ndarray:
        """Thresholded outputs: 1 where fired, else 0."""
        out = np.zeros(len(self.q), dtype=np.uint8)
        out[list(self.fired)] = 1
        return out


@dataclass(frozen=True)
class UpdateReport:
    """Diagnostics of one learn call."""

    errors: tuple[float, ...]  # error before each update step
    final_error: float  # error after the last step
    deltas: tuple[float, ...]  # max-abs update term per step

    @property
    def max_delta(self) -> float:
        return max(self.deltas)


@dataclass(frozen=True)
class AssociationResult:
    """Outcome of a cross-ball recall."""

    source_neuron: int
    target_neuron: int
    q: float  # target neuron's pre-threshold response
    recalled: np.ndarray


def recall_error(target: PatternVector, output: PatternVector) -> float:
    """Half squared distance between a target pattern and the recalled output."""
    t = np.asarray(target, dtype=np.float64)
    y = np.asarray(output, dtype=np.float64)
    if t.shape != y.shape:
        raise DimensionMismatch(f"shapes {t.shape} and {y.shape} differ")
    return 0.5 * float(np.sum((t - y) ** 2))


def cue_error(theta: float, q) -> float:
    """Half squared distance of pre-threshold outputs from the learning value."""
    return 0.5 * float(np.sum((theta - np.asarray(q, dtype=np.float64)) ** 2))


def cross_error(theta: float, q) -> float:
    """Same diagnostic as `cue_error`, for cross-ball responses."""
    return cue_error(theta, q)


class MemorySystem:
    """A set of Cue Balls sharing one Recall Net dimension, plus cross links."""

    def __init__(self, config: SystemConfig | None = None) -> None:
        self.config = config or SystemConfig()
        self.balls: dict[str, CueBall] = {}
        self.banks: dict[str, RecallBank] = {}
        # directed cross weights keyed by (from_ball, from_neuron, to_ball, to_neuron)
        self.links: dict[tuple[str, int, str, int], float] = {}

    @classmethod
    def from_catalog(cls, catalog: AttributeCatalog, config: SystemConfig | None = None):
        system = cls(config)
        for group in catalog:
            system.add_ball(group.name, group.labels)
        return system

    def add_ball(self, ball_id: str, labels) -> CueBall:
        if ball_id in self.balls:
            raise ValueError(f"ball {ball_id!r} already exists")
        labels = list(labels)
        if not labels:
            raise ValueError(f"ball {ball_id!r} needs at least one neuron")
        ball = CueBall(ball_id, labels, self.config.dim)
        self.balls[ball_id] = ball
        self.banks[ball_id] = RecallBank(ball_id, ball.n, self.config.dim)
        return ball

    def ball(self, ball_id: str) -> CueBall:
        try:
            return self.balls[ball_id]
        except KeyError:
            raise UnknownBall(f"unknown ball {ball_id!r}; have {sorted(self.balls)}") from None

    def bank(self, ball_id: str) -> RecallBank:
        self.ball(ball_id)
        return self.banks[ball_id]

    def resolve_ball(self, name: str) -> str:
        """Map a user-supplied ball name to a stored id, case-insensitively."""
        if name in self.balls:
            return name
        folded = {bid.casefold(): bid for bid in self.balls}
        if name.casefold() in folded:
            return folded[name.casefold()]
        raise UnknownBall(f"unknown ball {name!r}; have {sorted(self.balls)}")

    def _check_neuron(self, ball: CueBall, neuron: int) -> None:
        if not 0 <= neuron < ball.n:
            raise NeuronIndexError(
                f"neuron {neuron} out of range for ball {ball.id!r} (n={ball.n})"
            )

    def _check_vector(self, vector) -> np.ndarray:
        v = np.asarray(vector, dtype=np.float64).reshape(-1)
        if v.size != self.config.dim:
            raise DimensionMismatch(
                f"vector has {v.size} components, system dimension is {self.config.dim}"
            )
        return v

    # -- recall path --------------------------------------------------------

    def recall_forward(self, ball_id: str, neuron: int) -> np.ndarray:
        """Pattern replayed by one cue neuron held at output 1.

        Only that neuron's own weight row contributes; there is no summation
        over the other cue neurons.
        """
        bank = self.bank(ball_id)
        self._check_neuron(self.ball(ball_id), neuron)
        return bank.w[neuron].copy()

    def learn_recall_weights(self, ball_id: str, neuron: int, target) -> UpdateReport:
        """Delta-rule update of a neuron's recall row toward the target vector.

        The neuron's output is held at 1 while learning, so each step adds
        eps_w * (target - row).  From zero weights with eps_w = 1 one step
        stores the target exactly and a repeat is a no-op.
        """
        bank = self.bank(ball_id)
        self._check_neuron(self.ball(ball_id), neuron)
        t = self._check_vector(target)
        row = bank.w[neuron]
        errors, deltas = [], []
        for _ in range(self.config.epochs):
            errors.append(recall_error(t, row))
            delta = self.config.eps_w * (t - row)
            deltas.append(float(np.abs(delta).max()))
            row += delta
        return UpdateReport(tuple(errors), recall_error(t, row), tuple(deltas))

    # -- cue path -----------------------------------------------------------

    def cue_response(self, ball_id: str, probe, threshold: float | None = None) -> CueResponse:
        """Pre-threshold outputs of every neuron in a ball for a probe vector."""
        ball = self.ball(ball_id)
        p = self._check_vector(probe)
        thr = self.config.threshold if threshold is None else float(threshold)
        q = ball.v @ p
        fired = tuple(int(i) for i in np.flatnonzero(q >= thr))
        return CueResponse(q=q, fired=fired, argmax=int(np.argmax(q)), threshold=thr)

    def learn_cue_weights(self, ball_id: str, neuron: int, y=None) -> UpdateReport:
        """Delta-rule update of a neuron's cue row toward output theta.

        `y` is the recall output presented back to the ball; by default the
        neuron's own stored row.  Each step adds eps_v * (theta - q) * y.
        From zero weights with eps_v = 1 and unit-energy y, one step puts the
        row at theta * y, after which the response is exactly theta.
        """
        ball = self.ball(ball_id)
        self._check_neuron(ball, neuron)
        if y is None:
            y = self.recall_forward(ball_id, neuron)
        yv = self._check_vector(y)
        theta = self.config.theta
        row = ball.v[neuron]
        errors, deltas = [], []
        for _ in range(self.config.epochs):
            q = float(row @ yv)
            errors.append(0.5 * (theta - q) ** 2)
            delta = self.config.eps_v * (theta - q) * yv
            deltas.append(float(np.abs(delta).max()))
            row += delta
        return UpdateReport(
            tuple(errors), 0.5 * (theta - float(row @ yv)) ** 2, tuple(deltas)
        )

    # -- cross path ---------------------------------------------------------

    def cross_response(
        self, from_ball: str, from_neuron: int, to_ball: str, threshold: float | None = None
    ) -> CueResponse:
        """Responses in the target ball when a source neuron fires (output 1)."""
        src = self.ball(from_ball)
        dst = self.ball(to_ball)
        if src.id == dst.id:
            raise IntraBallLink("cue neurons within one ball are not connected")
        self._check_neuron(src, from_neuron)
        thr = self.config.threshold if threshold is None else float(threshold)
        q = np.array(
            [self.links.get((src.id, from_neuron, dst.id, l), 0.0) for l in range(dst.n)]
        )
        fired = tuple(int(i) for i in np.flatnonzero(q >= thr))
        return CueResponse(q=q, fired=fired, argmax=int(np.argmax(q)), threshold=thr)

    def _learn_link(self, from_ball: str, k: int, to_ball: str, l: int) -> UpdateReport:
        key = (from_ball, k, to_ball, l)
        u = self.links.get(key, 0.0)
        theta = self.config.theta
        errors, deltas = [], []
        for _ in range(self.config.epochs):
            q = u  # source output is 1
            errors.append(0.5 * (theta - q) ** 2)
            delta = self.config.lambda_cb * (theta - q)
            deltas.append(abs(delta))
            u += delta
        self.links[key] = u
        return UpdateReport(tuple(errors), 0.5 * (theta - u) ** 2, tuple(deltas))

    def learn_cross_weights(
        self, ball_a: str, k: int, ball_b: str, l: int
    ) -> tuple[UpdateReport, UpdateReport]:
        """Train the (a,k) <-> (b,l) cross pair, both directions.

        Each direction starts from zero and reaches theta in one step with
        lambda_cb = 1; the reverse direction is trained by swapping the roles
        of the two balls.
        """
        a = self.ball(ball_a)
        b = self.ball(ball_b)
        if a.id == b.id:
            raise IntraBallLink(
                f"pair ({ball_a}:{k}, {ball_b}:{l}) stays within one ball"
            )
        self._check_neuron(a, k)
        self._check_neuron(b, l)
        forward = self._learn_link(a.id, k, b.id, l)
        backward = self._learn_link(b.id, l, a.id, k)
        return forward, backward

    # -- composite operations -----------------------------------------------

    def store(self, ball_id: str, neuron: int, target) -> tuple[UpdateReport, UpdateReport]:
        """Memorize one pattern: learn the recall row, then the cue row from it."""
        w_report = self.learn_recall_weights(ball_id, neuron, target)
        v_report = self.learn_cue_weights(ball_id, neuron)
        return w_report, v_report

    def associate(
        self, from_ball: str, probe, to_ball: str, threshold: float | None = None
    ) -> AssociationResult:
        """Recognize a probe in one ball and recall its linked pattern in another."""
        response = self.cue_response(from_ball, probe, threshold)
        if not response.fired:
            raise NoRecognition(
                f"no neuron in {from_ball!r} reached threshold "
                f"{response.threshold} (max q = {response.q.max():.6g})"
            )
        k = response.argmax
        cross = self.cross_response(from_ball, k, to_ball, threshold)
        if not cross.fired:
            raise NoAssociation(
                f"no trained link from {from_ball}:{k} fired in {to_ball!r}"
            )
        l = cross.argmax
        recalled = self.recall_forward(to_ball, l)
        return AssociationResult(
            source_neuron=k, target_neuron=l, q=float(cross.q[l]), recalled=recalled
        )
