"""Information games: query strategies, the game loop and post-hoc consistency audits."""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from app.core.adversary.continuous import ContAdversary, certified_hardness
from app.core.adversary.extension import Fiber, binary_fibers, psi_function
from app.core.adversary.families import disjoint_solutions
from app.core.adversary.mixed import MIAdversary
from app.core.centerpoint import VersionPolytope, estimate_centerpoint
from app.core.exceptions import AdversaryInvariantError, EmptyVersionSet, StructuralError
from app.core.instances import Instance, InstanceParams, MaxAffineFunction, Polytope, exact_chart
from app.core.oracles import Query, Response, Target, ThresholdForm, Transcript, respond, response_key
from app.schemas.game import GameReport

logger = logging.getLogger(__name__)


class GameStrategy(Protocol):
    name: str

    def next_query(self) -> Query: ...

    def observe(self, query: Query, response: Response) -> None: ...


class Adversary(Protocol):
    def respond(self, query: Query) -> Response: ...

    def is_unambiguous(self, eps: float | None = None) -> bool: ...


def _coordinate_direction(dim: int, index: int) -> np.ndarray:
    direction = np.zeros(dim)
    direction[index] = 1.0
    return direction


class BisectionStrategy:
    """Round-robin over fibers; per fiber, coordinate bisection with subgradient signs."""

    name = "bisect"

    def __init__(self, n: int, d: int, R: float) -> None:
        self.n, self.d = n, d
        self.fibers = binary_fibers(n)
        self.lo = {x: np.full(d, -R) for x in self.fibers}
        self.hi = {x: np.full(d, R) for x in self.fibers}
        self.turn = 0
        self._pending: tuple[Fiber, int, float] | None = None

    def next_query(self) -> Query:
        fiber = self.fibers[self.turn % len(self.fibers)]
        coord = (self.turn // len(self.fibers)) % self.d
        y = 0.5 * (self.lo[fiber] + self.hi[fiber])
        self._pending = (fiber, coord, float(y[coord]))
        self.turn += 1
        point = np.concatenate((np.asarray(fiber, dtype=float), y))
        return Query(point, Target.SUB, ThresholdForm(_coordinate_direction(self.n + self.d, self.n + coord), 0.0))

    def observe(self, query: Query, response: Response) -> None:
        fiber, coord, mid = self._pending
        if response >= 0:
            self.hi[fiber][coord] = mid
        else:
            self.lo[fiber][coord] = mid


class RandomStrategy:
    """Uniform fiber and point, random continuous direction, subgradient sign."""

    name = "random"

    def __init__(self, n: int, d: int, R: float, seed: int = 0) -> None:
        self.n, self.d, self.R = n, d, R
        self.fibers = binary_fibers(n)
        self.rng = np.random.default_rng(seed)

    def next_query(self) -> Query:
        fiber = self.fibers[self.rng.integers(len(self.fibers))]
        y = self.rng.uniform(-self.R, self.R, size=self.d)
        direction = np.concatenate((np.zeros(self.n), self.rng.standard_normal(self.d)))
        point = np.concatenate((np.asarray(fiber, dtype=float), y))
        return Query(point, Target.SUB, ThresholdForm(direction, 0.0))

    def observe(self, query: Query, response: Response) -> None:
        return None


class CenterpointGameStrategy:
    """Centerpoint of its own version set over {0, 1}^n × [-R, R]^d, cut by coordinate signs."""

    name = "centerpoint"

    def __init__(self, n: int, d: int, R: float, seed: int = 0, samples: int = 500) -> None:
        self.n, self.d, self.R = n, d, R
        self.seed = seed
        self.samples = samples
        self.turn = 0
        self.version = self._fresh_version()

    def _fresh_version(self) -> VersionPolytope:
        version = VersionPolytope(self.n, self.d, max(self.R, 1.0))
        for j in range(self.n):
            e = _coordinate_direction(self.n + self.d, j)
            version.polytope = version.polytope.with_cut(-e, 0.0).with_cut(e, 1.0)
        for i in range(self.d):
            e = _coordinate_direction(self.n + self.d, self.n + i)
            version.polytope = version.polytope.with_cut(e, self.R).with_cut(-e, self.R)
        return version

    def next_query(self) -> Query:
        seed = np.random.SeedSequence([self.seed, self.turn])
        try:
            point = estimate_centerpoint(self.version, samples=self.samples, seed=seed).point
        except EmptyVersionSet:
            self.version = self._fresh_version()
            point = estimate_centerpoint(self.version, samples=self.samples, seed=seed).point
        coord = self.turn % self.d
        self.turn += 1
        direction = _coordinate_direction(self.n + self.d, self.n + coord)
        return Query(point.vector, Target.SUB, ThresholdForm(direction, 0.0))

    def observe(self, query: Query, response: Response) -> None:
        direction = query.form.direction
        self.version.add_cut(direction if response >= 0 else -direction, query.point)


STRATEGIES: dict[str, Callable[..., GameStrategy]] = {
    "bisect": lambda n, d, R, seed: BisectionStrategy(n, d, R),
    "random": lambda n, d, R, seed: RandomStrategy(n, d, R, seed),
    "centerpoint": lambda n, d, R, seed: CenterpointGameStrategy(n, d, R, seed),
}


def make_strategy(name: str, n: int, d: int, R: float, seed: int = 0) -> GameStrategy:
    try:
        return STRATEGIES[name](n, d, R, seed)
    except KeyError:
        raise StructuralError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None


@dataclass
class GameResult:
    stop_round: int
    reached_unambiguous: bool
    transcript: Transcript


def run_game(strategy: GameStrategy, adversary: Adversary, eps: float, max_rounds: int) -> GameResult:
    """Alternate strategy queries and adversary answers until the transcript is eps-unambiguous.

    Returns:
        GameResult whose stop_round is the first unambiguous round (0 if unambiguous
        before any query), or max_rounds if that never happens
    """
    transcript = Transcript()
    if adversary.is_unambiguous(eps):
        return GameResult(stop_round=0, reached_unambiguous=True, transcript=transcript)
    for round_ in range(1, max_rounds + 1):
        query = strategy.next_query()
        response = adversary.respond(query)
        strategy.observe(query, response)
        transcript.record(query, response, round_)
        if adversary.is_unambiguous(eps):
            logger.info(f"{strategy.name}: unambiguous after {round_} rounds")
            return GameResult(stop_round=round_, reached_unambiguous=True, transcript=transcript)
    logger.info(f"{strategy.name}: still ambiguous after {max_rounds} rounds")
    return GameResult(stop_round=max_rounds, reached_unambiguous=False, transcript=transcript)


def measure_hardness(
    family: Sequence[Instance],
    eps: float,
    strategy_names: Sequence[str] = ("bisect", "random", "centerpoint"),
    seeds: Sequence[int] = (0,),
    max_rounds: int = 200,
) -> int:
    """Smallest continuous stop round over strategies against a never-committing adversary."""
    d, R = family[0].d, family[0].params.R
    rounds = []
    for name in strategy_names:
        for seed in seeds if name == "random" else seeds[:1]:
            adversary = ContAdversary(family, eps, ell=None)
            result = run_game(make_strategy(name, 0, d, R, seed), adversary, eps, max_rounds)
            if not audit_continuous(adversary):
                logger.error(f"{name} (seed {seed}): no registered member reproduces the answer log")
                raise AdversaryInvariantError("continuous answer log is not reproduced by any survivor")
            rounds.append(result.stop_round)
    return min(rounds)


def transfer_bound(n: int, ell: int) -> int:
    """2^(n-1) ℓ for n ≥ 1 and ℓ for n = 0."""
    return ell if n == 0 else 2 ** (n - 1) * ell


def audit_continuous(adversary: ContAdversary) -> bool:
    """Some registered member or the committed maximum reproduces the whole answer log."""
    for inst in adversary.consistent_instances():
        if all(
            response_key(respond(query.form, query.target, exact_chart(inst, query.point))) == response_key(response)
            for query, response in adversary.answer_log
        ):
            return True
    return False


def audit_psi(adversary: MIAdversary, samples: int, seed: int = 0) -> bool:
    """Every sampled survivor collection F gives a ψ_F matching the full transcript."""
    rng = np.random.default_rng(seed)
    choices = adversary.fiber_choices()
    for _ in range(samples):
        F = {x_bar: options[rng.integers(len(options))] for x_bar, options in choices.items()}
        for query, response in adversary.answer_log:
            if response_key(adversary.psi_response(F, query)) != response_key(response):
                logger.error(f"ψ_F disagrees with the transcript at {query.point}")
                return False
    return True


def psi_instance(F: dict[Fiber, MaxAffineFunction], n: int, M: float, R: float, opt: float, d: int) -> Instance:
    """ψ_F as an instance whose integer points are exactly {0, 1}^n."""
    objective = psi_function(F, n, M, R, opt)
    halfspaces = []
    for j in range(n):
        e = _coordinate_direction(n + d, j)
        halfspaces.extend(((-e, 0.0), (e, 1.0)))
    feasible = Polytope.from_halfspaces(n + d, max(R, 1.0), halfspaces)
    return Instance(objective, feasible, InstanceParams(n, d, max(R, 1.0), 0.0, M), label="psi")


def starved_pair(adversary: MIAdversary) -> tuple[dict, dict] | None:
    """Two consistent collections that differ on one uncommitted fiber and share nothing else of use.

    The uncommitted fiber gets two survivors with disjoint eps-solutions; every other
    fiber gets a function whose minimum exceeds opt + eps.
    """
    for x_bar, fiber in adversary.per_fiber.items():
        if fiber.committed is not None:
            continue
        members = fiber.surviving.instances
        pair = next(
            (
                (f, g)
                for i, f in enumerate(members)
                for g in members[i + 1 :]
                if disjoint_solutions(f.objective, g.objective, adversary.eps, adversary.R, adversary.opt)
            ),
            None,
        )
        if pair is None:
            continue
        rest = {}
        for other, other_fiber in adversary.per_fiber.items():
            if other == x_bar:
                continue
            if other_fiber.committed is not None:
                rest[other] = other_fiber.committed.objective
                continue
            survivors = other_fiber.surviving.instances
            if len(survivors) < 2:
                return None
            objective = survivors[0].objective
            for inst in survivors[1:]:
                objective = objective.maximum(inst.objective)
            rest[other] = objective
        return {**rest, x_bar: pair[0].objective}, {**rest, x_bar: pair[1].objective}
    return None


def play_mi_game(
    family: Sequence[Instance],
    n: int,
    eps: float,
    strategy: GameStrategy,
    max_rounds: int,
    ell: int | None = None,
    measured_ell: int | None = None,
    audit_samples: int = 100,
    seed: int = 0,
) -> GameReport:
    """Play one strategy against the mixed-integer adversary and audit the transcript.

    Args:
        family: Registered continuous family (n = 0 instances)
        n: Integer dimension of the game
        eps: Accuracy
        strategy: Query strategy over [0, 1]^n × [-R, R]^d
        max_rounds: Round cap
        ell: Horizon; defaults to min(measured_ell, ⌊log₂ k⌋)
        measured_ell: Continuous hardness measured beforehand, if any
        audit_samples: Number of sampled ψ_F collections
        seed: Audit seed

    Returns:
        GameReport with the stop round, the 2^(n-1) ℓ bound and the audit outcome
    """
    certified = certified_hardness(len(family))
    if ell is None:
        ell = certified if measured_ell is None else min(measured_ell, certified)
    adversary = MIAdversary(family, n, eps, ell)
    result = run_game(strategy, adversary, eps, max_rounds)
    consistent = audit_psi(adversary, audit_samples, seed)
    bound = transfer_bound(n, ell)
    logger.info(
        f"Game {strategy.name} n={n}: stop {result.stop_round}, bound {bound}, consistent={consistent}"
    )
    return GameReport(
        strategy=strategy.name,
        n=n,
        d=family[0].d,
        family_size=len(family),
        eps=eps,
        ell=ell,
        certified_ell=certified,
        measured_ell=measured_ell,
        bound=bound,
        stop_round=result.stop_round,
        reached_unambiguous=result.reached_unambiguous,
        bound_met=result.stop_round >= bound,
        consistent=consistent,
        max_inner_queries=max(adversary.inner_queries, default=0),
        committed_fibers=len(adversary.committed_fibers),
        transcript=result.transcript.records,
    )
