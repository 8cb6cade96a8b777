"""Solving over a finite family with binary queries: surviving-set halving plus exact replay."""

import logging
import math
from collections import defaultdict
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from app.core.adversary.families import linf_cone
from app.core.catalog import SUITE_RADIUS
from app.core.centerpoint import CenterpointStrategy
from app.core.exceptions import ContractViolation, InfeasibleInstance, StructuralError
from app.core.instances import (
    FirstOrderInfo,
    Instance,
    InstanceParams,
    MixedPoint,
    Polytope,
    brute_force_opt,
    exact_chart,
)
from app.core.oracles import (
    BinaryForm,
    Oracle,
    QueryCounter,
    Response,
    Target,
    Transcript,
    budget_report,
    full_response,
    response_key,
)
from app.schemas.halving import HalvingReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Split:
    """Response classes packed into A, and the members inside (U1) and outside (U0) of A."""

    A: frozenset[tuple]
    U0: list[int]
    U1: list[int]


@dataclass(frozen=True, eq=False)
class MajorityValue:
    key: tuple
    response: Response
    members: list[int]


def split_set(members: Sequence[int], response_map: Mapping[int, Response]) -> Split | MajorityValue:
    """Split members by response, or report the response shared by more than half of them.

    Classes are packed into A largest first (ties by response key) until |U1| ≥ |U|/4.
    Without a majority every class holds at most |U|/2 members, so |U1| also stays ≤ 3|U|/4.

    Raises:
        StructuralError: If fewer than two members are given
    """
    if len(members) < 2:
        raise StructuralError("splitting needs at least two members")
    classes: dict[tuple, list[int]] = defaultdict(list)
    for i in members:
        classes[response_key(response_map[i])].append(i)
    ordered = sorted(classes.items(), key=lambda item: (-len(item[1]), item[0]))
    top_key, top_members = ordered[0]
    if 2 * len(top_members) > len(members):
        return MajorityValue(top_key, response_map[top_members[0]], top_members)

    packed: set[tuple] = set()
    inside: list[int] = []
    for key, group in ordered:
        if 4 * len(inside) >= len(members):
            break
        packed.add(key)
        inside.extend(group)
    outside = [i for i in members if response_key(response_map[i]) not in packed]
    return Split(frozenset(packed), outside, sorted(inside))


@dataclass
class HalvingState:
    U: list[int]
    Q: list[MixedPoint]
    H: list[FirstOrderInfo]
    counter: QueryCounter
    rounds: int = 0
    splits: int = 0
    mismatches: int = 0


def _first_order(inst: Instance, z: MixedPoint) -> FirstOrderInfo:
    return full_response(Target.FIRST_ORDER, exact_chart(inst, z))


def halving_query_bound(family_size: int, budget: int) -> float:
    """2 (log_{4/3} |I| + u)."""
    return 2.0 * (math.log(family_size, 4.0 / 3.0) + budget)


def halving_solve(
    family: Sequence[Instance],
    true_instance: Instance,
    wrapped: CenterpointStrategy,
    eps: float,
    transcript: Transcript | None = None,
) -> tuple[MixedPoint, QueryCounter, HalvingState]:
    """Find an eps-solution of the hidden member using binary queries only.

    Each round asks the wrapped strategy for its next point z, asks whether z is
    feasible, and then either splits the surviving set with one membership query or
    checks the majority response with one equality query. A confirmed majority
    response is exactly the hidden member's response, so it is replayed to the
    wrapped strategy.

    Args:
        family: Finite family sharing (n, d); the hidden member is one of them
        true_instance: Member answering the queries
        wrapped: Exact full-information strategy with budget u
        eps: Accuracy the wrapped strategy was configured for
        transcript: Optional log of the binary queries

    Returns:
        (solution, counter, final state)

    Raises:
        ContractViolation: If the wrapped strategy asks for more than u points
        InfeasibleInstance: If the last survivor has no feasible point
    """
    if not any(inst is true_instance for inst in family):
        raise StructuralError(f"{true_instance.label!r} is not a member of the family")
    oracle = Oracle(true_instance, QueryCounter(), transcript)
    state = HalvingState(U=list(range(len(family))), Q=[], H=[], counter=oracle.counter)
    pending: MixedPoint | None = None
    logger.info(f"Halving over {len(family)} members with wrapped budget {wrapped.budget} (eps={eps})")

    while True:
        if len(state.U) == 1:
            optimum = brute_force_opt(family[state.U[0]])
            if not optimum.feasible:
                raise InfeasibleInstance(f"{family[state.U[0]].label!r} has no feasible point")
            logger.info(f"Halving ended with one survivor after {state.rounds} rounds")
            return optimum.point, state.counter, state
        if pending is None:
            if len(state.Q) >= wrapped.budget:
                if not wrapped.finished and wrapped.propose() is not None:
                    logger.error(f"Wrapped strategy asked for point {len(state.Q) + 1} with budget {wrapped.budget}")
                    raise ContractViolation(f"wrapped strategy exceeded its budget u = {wrapped.budget}")
                return wrapped.answer(), state.counter, state
            pending = wrapped.propose()
            if pending is None:
                logger.info(f"Wrapped strategy answered after {len(state.Q)} replayed responses")
                return wrapped.answer(), state.counter, state

        z = pending
        state.rounds += 1
        feasible = oracle.is_feasible(z)
        state.U = [i for i in state.U if (not np.any(exact_chart(family[i], z).separation)) == feasible]
        if len(state.U) < 2:
            continue

        responses = {i: _first_order(family[i], z) for i in state.U}
        outcome = split_set(state.U, responses)
        if isinstance(outcome, Split):
            inside = oracle.ask(
                z, Target.FIRST_ORDER, BinaryForm("member-of-split", lambda info: response_key(info) in outcome.A)
            )
            state.U = outcome.U1 if inside else outcome.U0
            state.splits += 1
            logger.debug(f"Round {state.rounds}: split, {len(state.U)} survivors")
            continue

        matches = oracle.ask(
            z, Target.FIRST_ORDER, BinaryForm("equals-majority", lambda info: response_key(info) == outcome.key)
        )
        if not matches:
            rejected = set(outcome.members)
            state.U = [i for i in state.U if i not in rejected]
            state.mismatches += 1
            logger.debug(f"Round {state.rounds}: majority rejected, {len(state.U)} survivors")
            continue
        state.U = outcome.members
        state.Q.append(z)
        state.H.append(outcome.response)
        wrapped.observe(z, outcome.response)
        pending = None
        logger.debug(f"Round {state.rounds}: replayed response {len(state.H)}")


def halving_report(
    family: Sequence[Instance],
    true_instance: Instance,
    wrapped: CenterpointStrategy,
    eps: float,
    transcript: Transcript | None = None,
) -> HalvingReport:
    solution, counter, state = halving_solve(family, true_instance, wrapped, eps, transcript)
    optimum = brute_force_opt(true_instance)
    value = true_instance.objective(solution)
    queries = budget_report(counter)
    bound = halving_query_bound(len(family), wrapped.budget)
    return HalvingReport(
        true_label=true_instance.label,
        family_size=len(family),
        x=list(solution.x),
        y=[float(v) for v in solution.y],
        value=value,
        gap=value - optimum.value,
        eps=eps,
        terminated_by="singleton" if len(state.U) == 1 else "wrapped",
        rounds=state.rounds,
        splits=state.splits,
        mismatches=state.mismatches,
        replayed=len(state.Q),
        wrapped_budget=wrapped.budget,
        survivors=len(state.U),
        queries=queries,
        query_bound=bound,
        bound_met=queries.total <= bound,
    )


def shifted_family(size: int, eps: float, seed: int = 0, d: int = 1, n: int = 0, M: float = 1.0) -> list[Instance]:
    """`size` members M ‖(x, y) - (x_j, c_j)‖∞ with optimum 0 on a random 0/±1 fiber.

    Centers c_j are uniform in [-R/2, R/2]^d with R = 1.5, so every optimal fiber keeps
    a deep ball of radius 0.5 around its minimizer.
    """
    if size < 1:
        raise StructuralError("family size must be positive")
    rng = np.random.default_rng(np.random.SeedSequence([seed, size, n, d]))
    R = SUITE_RADIUS
    params = InstanceParams(n=n, d=d, R=R, rho=0.5, M=M)
    box = Polytope.box(n + d, R)
    members = []
    for j in range(size):
        x_j = rng.integers(-1, 2, size=n).astype(float) if n else np.zeros(0)
        c_j = rng.uniform(-R / 2.0, R / 2.0, size=d)
        label = f"shift-{j}"
        members.append(Instance(linf_cone(np.concatenate((x_j, c_j)), M, label), box, params, label))
    logger.debug(f"Built shifted family of {size} members (n={n}, d={d}, eps={eps})")
    return members
