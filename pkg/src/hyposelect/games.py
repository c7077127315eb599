"""Game engines: the primal game and the cutting-with-margin (dual) game.

Primal game over P_Q: starting from u_0 = 0, the player names a violated
test h_k ∈ H_{P,ε}(u_k) and the adversary answers with u_{k+1} ≥ u_k such
that h_k·u_{k+1} ≥ min_{v∈P_Q} h_k·v − ε/2. The game ends once u_k + ε·1
is (up to slack τ) inside P_Q.

Dual game over Δ_n: the player names a point h_k of the current universe,
the adversary keeps a halfspace g·h ≤ c that misses the open ℓ1 ball of
radius ε around h_k. The game ends when the universe is empty.

Strategies are plain callables; see :class:`PrimalPlayer`,
:class:`PrimalAdversary`, :class:`DualPlayer` and :class:`DualAdversary`.
Both engines validate every move and raise :class:`IllegalMoveError`
naming the offender and round.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .distributions import (
    DistanceVector,
    FloatArray,
    HypothesisClass,
    TestDirection,
    clean_simplex_vector,
    tv_rows,
)
from .entropy_player import MAX_RESOLVES, WitnessPool, max_entropy_test, maximize_entropy
from .logging_config import get_logger
from .lp import simplex_point
from .sampling import SampleOracle, progress_step
from .tv_geometry import DEFAULT_TOL, MarginQuery, support_min, violated_test_value

logger = get_logger(__name__)

# Slack on exact legality comparisons.
LEGALITY_TOL = 1e-12

# Membership slack for player moves; entropy maximizers touch the boundary.
MEMBERSHIP_TOL = 1e-7

_DIGITS = 12


class IllegalMoveError(RuntimeError):
    """A strategy broke the rules of the game it was playing."""

    def __init__(self, role: str, round: int, message: str) -> None:
        super().__init__(f"illegal {role} move in round {round}: {message}")
        self.role = role
        self.round = round


class EmptyUniverseError(ValueError):
    """A dual player was asked to move in an empty universe."""


# ---------------------------------------------------------------------------
# Primal game
# ---------------------------------------------------------------------------


class PrimalPlayer(Protocol):
    def __call__(self, u: DistanceVector, eps: float, Q: HypothesisClass) -> TestDirection: ...


class PrimalAdversary(Protocol):
    def __call__(
        self, u: DistanceVector, h: TestDirection, Q: HypothesisClass
    ) -> DistanceVector: ...


@dataclass(eq=False)
class PrimalTranscript:
    """u_0, u_1, … and the tests h_0, h_1, … that produced them."""

    eps: float
    points: list[DistanceVector] = field(default_factory=list)
    tests: list[TestDirection] = field(default_factory=list)
    finished: bool = False

    @property
    def rounds(self) -> int:
        return len(self.tests)

    @property
    def final_point(self) -> DistanceVector:
        return self.points[-1]


def validate_primal_move(
    u_k: DistanceVector,
    h_k: TestDirection,
    u_next: DistanceVector,
    eps: float,
    Q: HypothesisClass,
    tol: float = DEFAULT_TOL,
) -> bool:
    """Whether u_next ≥ u_k and h_k·u_next ≥ min_{v∈P_Q} h_k·v − eps/2 − tol."""
    if not np.all(u_next.values >= u_k.values):
        return False
    value = support_min(h_k, Q, tol).value
    return float(h_k.weights @ u_next.values) >= value - eps / 2 - tol


def run_primal_game(
    Q: HypothesisClass,
    eps: float,
    player: PrimalPlayer,
    adversary: PrimalAdversary,
    max_rounds: int,
    *,
    slack: float | None = None,
    tol: float = DEFAULT_TOL,
) -> PrimalTranscript:
    """Play until max_h G(h) ≤ eps + slack or ``max_rounds`` moves.

    ``slack`` defaults to eps/8.
    """
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    slack = eps / 8 if slack is None else slack
    u = DistanceVector.zeros(Q.n)
    transcript = PrimalTranscript(eps=eps, points=[u])

    for k in range(max_rounds):
        value, _ = violated_test_value(MarginQuery(u, eps), Q, tol)
        if value <= eps + slack:
            transcript.finished = True
            break
        h = player(u, eps, Q)
        played = support_min(h, Q, tol).value - float(h.weights @ u.values)
        if played <= eps:
            raise IllegalMoveError("player", k, f"test margin {played:.6g} is not above {eps}")
        u_next = adversary(u, h, Q)
        if not validate_primal_move(u, h, u_next, eps, Q, tol):
            raise IllegalMoveError("adversary", k, "response breaks the primal rule")
        transcript.tests.append(h)
        transcript.points.append(u_next)
        u = u_next
    else:
        value, _ = violated_test_value(MarginQuery(u, eps), Q, tol)
        transcript.finished = value <= eps + slack

    logger.debug(f"primal game: {transcript.rounds} rounds, finished={transcript.finished}")
    return transcript


def replay_primal_transcript(
    transcript: PrimalTranscript, Q: HypothesisClass, tol: float = DEFAULT_TOL
) -> None:
    """Re-validate every recorded move; raises IllegalMoveError on the first bad one."""
    if not transcript.points or np.any(transcript.points[0].values != 0):
        raise IllegalMoveError("adversary", 0, "transcript does not start at the origin")
    if len(transcript.points) != len(transcript.tests) + 1:
        raise ValueError("transcript needs exactly one more point than tests")
    eps = transcript.eps
    for k, h in enumerate(transcript.tests):
        u, u_next = transcript.points[k], transcript.points[k + 1]
        if support_min(h, Q, tol).value - float(h.weights @ u.values) <= eps - tol:
            raise IllegalMoveError("player", k, "recorded test is not violated")
        if not validate_primal_move(u, h, u_next, eps, Q, tol):
            raise IllegalMoveError("adversary", k, "recorded response breaks the primal rule")


class MaxEntropyPrimalPlayer:
    """Plays the highest-entropy test of {h : G(h) ≥ eps + slack}.

    One witness pool serves the whole game; u only grows, so the pooled
    relaxations stay nested.
    """

    def __init__(self, slack: float, max_cuts: int = 500) -> None:
        self.slack = slack
        self.max_cuts = max_cuts
        self._pool: WitnessPool | None = None

    def __call__(self, u: DistanceVector, eps: float, Q: HypothesisClass) -> TestDirection:
        if self._pool is None or self._pool.Q is not Q:
            self._pool = WitnessPool(Q)
        solution = max_entropy_test(
            u, eps, Q, self.slack, pool=self._pool, max_cuts=self.max_cuts, check_feasible=False
        )
        return solution.h


class ProgressAdversary:
    """Answers with u_{k+1} = max(u_k, z) where z comes from a progress step."""

    def __init__(self, oracle: SampleOracle, alpha: float, beta: float = 0.05) -> None:
        self.oracle = oracle
        self.alpha = alpha
        self.beta = beta
        self.witnesses: list[FloatArray] = []

    def __call__(self, u: DistanceVector, h: TestDirection, Q: HypothesisClass) -> DistanceVector:
        output = progress_step(u, h, self.alpha, self.beta, self.oracle, Q)
        self.witnesses.append(output.witness.probs)
        return DistanceVector(np.maximum(u.values, output.z.values))


# ---------------------------------------------------------------------------
# Cutting-with-margin game
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cut:
    """The kept halfspace {h : direction·h ≤ offset}."""

    direction: FloatArray
    offset: float

    def contains(self, h: FloatArray, tol: float = MEMBERSHIP_TOL) -> bool:
        return float(self.direction @ h) <= self.offset + tol

    def half_range(self) -> float:
        return float(self.direction.max() - self.direction.min()) / 2

    def misses_ball(self, center: FloatArray, radius: float) -> bool:
        """Whether the open ℓ1 ball around ``center`` within Δ_n's hull avoids the cut."""
        if self.half_range() <= 0:
            return False
        reach = float(self.direction @ center) - radius * self.half_range()
        return reach >= self.offset - LEGALITY_TOL


@dataclass(frozen=True, eq=False)
class DualUniverse:
    """H_k = Δ_n ∩ {every kept cut}."""

    n: int
    eps: float
    cuts: tuple[Cut, ...] = ()

    @property
    def directions(self) -> FloatArray:
        if not self.cuts:
            return np.zeros((0, self.n))
        return np.vstack([cut.direction for cut in self.cuts])

    @property
    def offsets(self) -> FloatArray:
        return np.array([cut.offset for cut in self.cuts], dtype=np.float64)

    def contains(self, h: FloatArray, tol: float = MEMBERSHIP_TOL) -> bool:
        if np.any(h < -tol) or abs(float(h.sum()) - 1.0) > tol:
            return False
        return all(cut.contains(h, tol) for cut in self.cuts)

    def is_empty(self) -> bool:
        return simplex_point(self.directions, self.offsets) is None

    def with_cut(self, cut: Cut) -> DualUniverse:
        return DualUniverse(self.n, self.eps, (*self.cuts, cut))


class DualPlayer(Protocol):
    def __call__(self, universe: DualUniverse) -> TestDirection: ...


class DualAdversary(Protocol):
    def __call__(self, universe: DualUniverse, h: TestDirection) -> Cut: ...


@dataclass(eq=False)
class DualTranscript:
    n: int
    eps: float
    tests: list[TestDirection] = field(default_factory=list)
    cuts: list[Cut] = field(default_factory=list)
    emptied: bool = False

    @property
    def rounds(self) -> int:
        return len(self.cuts)


def dual_round_bound(n: int, eps: float) -> int:
    """⌈8 ln n / eps²⌉ rounds suffice for the max-entropy player."""
    if n < 2:
        raise ValueError(f"the round bound needs n >= 2, got {n}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return math.ceil(8 * math.log(n) / eps**2)


def run_dual_game(
    n: int,
    eps: float,
    player: DualPlayer,
    adversary: DualAdversary,
    max_rounds: int,
) -> DualTranscript:
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    universe = DualUniverse(n, eps)
    transcript = DualTranscript(n=n, eps=eps)

    for k in range(max_rounds):
        if universe.is_empty():
            transcript.emptied = True
            break
        h = player(universe)
        if not universe.contains(h.weights):
            raise IllegalMoveError("player", k, "test lies outside the current universe")
        cut = adversary(universe, h)
        if not cut.misses_ball(h.weights, eps):
            raise IllegalMoveError("adversary", k, f"cut meets the radius-{eps} ball around h")
        transcript.tests.append(h)
        transcript.cuts.append(cut)
        universe = universe.with_cut(cut)
    else:
        transcript.emptied = universe.is_empty()

    logger.debug(f"dual game n={n} eps={eps}: {transcript.rounds} rounds")
    return transcript


class MaxEntropyDualPlayer:
    """Picks the entropy maximizer of the current universe.

    A maximizer that overshoots a cut by more than the membership slack is
    re-solved, first from a cold start and then with the overshooting cuts
    tightened by their excess. If that never lands inside, an LP point of
    the universe is played instead.
    """

    def __init__(self) -> None:
        self._multipliers = np.zeros(0)

    def __call__(self, universe: DualUniverse) -> TestDirection:
        if universe.is_empty():
            raise EmptyUniverseError("no test left to play")
        directions, offsets = universe.directions, universe.offsets
        start = np.append(self._multipliers, np.zeros(len(universe.cuts) - self._multipliers.size))
        tightened = offsets.copy()
        for attempt in range(MAX_RESOLVES + 1):
            weights, _, mu = maximize_entropy(-directions, -tightened, start)
            self._multipliers = mu
            h = clean_simplex_vector(weights)
            if universe.contains(h):
                return TestDirection(h)
            excess = directions @ h - offsets
            logger.debug(f"max-entropy test overshoots a cut by {excess.max():.3g}; re-solving")
            if attempt == 0:
                start = np.zeros(len(universe.cuts))
            else:
                tightened = tightened - np.clip(excess, 0.0, None) - MEMBERSHIP_TOL / 2
                start = mu

        logger.warning(f"entropy dual missed the universe after {MAX_RESOLVES} re-solves")
        point = simplex_point(directions, offsets)
        if point is None:
            raise EmptyUniverseError("no test left to play")
        return TestDirection(clean_simplex_vector(point))


def arbitrary_test_player(universe: DualUniverse) -> TestDirection:
    """First vertex e_i inside the universe, else an LP vertex biased to low indices."""
    for index in range(universe.n):
        vertex = np.zeros(universe.n)
        vertex[index] = 1.0
        if universe.contains(vertex, tol=LEGALITY_TOL):
            return TestDirection(vertex)
    bias = np.arange(1, universe.n + 1, dtype=np.float64)
    point = simplex_point(universe.directions, universe.offsets, objective=bias)
    if point is None:
        raise EmptyUniverseError("no test left to play")
    return TestDirection(point)


def greedy_diameter_adversary(universe: DualUniverse, h: TestDirection) -> Cut:
    """Cut along e_a − e_b for the heaviest a and lightest b ≠ a."""
    weights = h.weights
    a = int(np.argmax(weights))
    others = np.where(np.arange(weights.size) == a, np.inf, weights)
    b = int(np.argmin(others))
    direction = np.zeros(weights.size)
    direction[a], direction[b] = 1.0, -1.0
    return Cut(direction, float(weights[a] - weights[b]) - universe.eps)


class RandomDirectionAdversary:
    """Cuts along a random sign vector, tangent to the excluded ball."""

    def __init__(self, seed: int | np.random.SeedSequence = 0) -> None:
        self._rng = np.random.default_rng(seed)

    def __call__(self, universe: DualUniverse, h: TestDirection) -> Cut:
        if universe.n < 2:
            raise ValueError("random cuts need n >= 2")
        while True:
            direction = self._rng.choice([-1.0, 1.0], size=universe.n)
            if direction.max() > direction.min():
                break
        cut = Cut(direction, 0.0)
        return Cut(direction, float(direction @ h.weights) - universe.eps * cut.half_range())


class PrimalInducedAdversary:
    """Dual cuts read off a primal game played against a progress adversary.

    Each answer u_{k+1} to h_k keeps {h : h·(u_{k+1} − v(p′_k)) ≤ −ε_primal},
    with p′_k the support witness of h_k. That halfspace contains
    H_{P,ε}(u_{k+1}) and misses the ε_primal/4 ball around h_k, so the
    dual game must be played at radius ε_primal/4.
    """

    def __init__(self, Q: HypothesisClass, oracle: SampleOracle, primal_eps: float) -> None:
        self.Q = Q
        self.primal_eps = primal_eps
        self.adversary = ProgressAdversary(oracle, alpha=primal_eps / 2)
        self.points: list[DistanceVector] = [DistanceVector.zeros(Q.n)]

    def __call__(self, universe: DualUniverse, h: TestDirection) -> Cut:
        u = self.points[-1]
        u_next = self.adversary(u, h, self.Q)
        self.points.append(u_next)
        witness_distances = tv_rows(self.Q.matrix, self.adversary.witnesses[-1])
        return Cut(u_next.values - witness_distances, -self.primal_eps)


# ---------------------------------------------------------------------------
# Transcript text format
# ---------------------------------------------------------------------------


def _fmt(values: Sequence[float] | FloatArray) -> str:
    return " ".join(f"{float(x):.{_DIGITS}g}" for x in values)


def _header(kind: str, n: int, eps: float, extra: str = "") -> str:
    return f"{kind} n={n} eps={eps:.{_DIGITS}g}{extra}"


def _parse_header(line: str, kind: str) -> dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != kind:
        raise ValueError(f"expected a {kind} transcript header, got {line!r}")
    return dict(part.split("=", 1) for part in parts[1:])


def serialize_primal_transcript(transcript: PrimalTranscript) -> str:
    """One move per line: ``<round> player <h…>`` then ``<round> adversary <u…>``."""
    n = transcript.points[0].n
    lines = [_header("primal", n, transcript.eps, f" finished={int(transcript.finished)}")]
    for k, h in enumerate(transcript.tests):
        lines.append(f"{k} player {_fmt(h.weights)}")
        lines.append(f"{k} adversary {_fmt(transcript.points[k + 1].values)}")
    return "\n".join(lines) + "\n"


def parse_primal_transcript(text: str) -> PrimalTranscript:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty transcript")
    header = _parse_header(lines[0], "primal")
    n = int(header["n"])
    transcript = PrimalTranscript(
        eps=float(header["eps"]),
        points=[DistanceVector.zeros(n)],
        finished=header.get("finished", "0") == "1",
    )
    for line in lines[1:]:
        round_str, role, *values = line.split()
        vector = np.array([float(x) for x in values])
        if vector.size != n:
            raise ValueError(f"round {round_str}: expected {n} values, got {vector.size}")
        if role == "player":
            transcript.tests.append(TestDirection(clean_simplex_vector(vector)))
        elif role == "adversary":
            transcript.points.append(DistanceVector(vector))
        else:
            raise ValueError(f"round {round_str}: unknown role {role!r}")
    return transcript


def serialize_dual_transcript(transcript: DualTranscript) -> str:
    """``<round> player <h…>`` then ``<round> adversary <offset> <direction…>``."""
    lines = [_header("dual", transcript.n, transcript.eps, f" emptied={int(transcript.emptied)}")]
    for k, (h, cut) in enumerate(zip(transcript.tests, transcript.cuts, strict=True)):
        lines.append(f"{k} player {_fmt(h.weights)}")
        lines.append(f"{k} adversary {_fmt([cut.offset, *cut.direction])}")
    return "\n".join(lines) + "\n"


def parse_dual_transcript(text: str) -> DualTranscript:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty transcript")
    header = _parse_header(lines[0], "dual")
    transcript = DualTranscript(
        n=int(header["n"]),
        eps=float(header["eps"]),
        emptied=header.get("emptied", "0") == "1",
    )
    for line in lines[1:]:
        round_str, role, *values = line.split()
        vector = np.array([float(x) for x in values])
        if role == "player":
            transcript.tests.append(TestDirection(clean_simplex_vector(vector)))
        elif role == "adversary":
            transcript.cuts.append(Cut(vector[1:], float(vector[0])))
        else:
            raise ValueError(f"round {round_str}: unknown role {role!r}")
    return transcript
