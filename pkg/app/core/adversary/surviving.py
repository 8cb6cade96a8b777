"""Surviving sets and the eps-unambiguity check."""

import logging
from collections import defaultdict
from collections.abc import Sequence

import numpy as np

from app.core.exceptions import AdversaryInvariantError, StructuralError
from app.core.instances import (
    Instance,
    MixedPoint,
    brute_force_opt,
    exact_chart,
    integer_fibers,
)
from app.core.oracles import Query, Response, respond, response_key
from app.core.simplex import lp_feasible

logger = logging.getLogger(__name__)


class SurvivingSet:
    """Members of a registered family consistent with every (query, response) so far."""

    def __init__(self, family: Sequence[Instance]) -> None:
        if not family:
            raise StructuralError("a surviving set needs a non-empty family")
        self.family = list(family)
        self.members = list(range(len(family)))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def instances(self) -> list[Instance]:
        return [self.family[i] for i in self.members]

    def responses(self, query: Query) -> dict[tuple, list[int]]:
        """Group current members by the exact response their chart gives to query."""
        groups: dict[tuple, list[int]] = defaultdict(list)
        for i in self.members:
            inst = self.family[i]
            groups[response_key(respond(query.form, query.target, exact_chart(inst, query.point)))].append(i)
        return groups

    def response_of(self, index: int, query: Query) -> Response:
        return respond(query.form, query.target, exact_chart(self.family[index], query.point))

    def matching(self, query: Query, response: Response) -> list[int]:
        key = response_key(response)
        return [i for i in self.members if response_key(self.response_of(i, query)) == key]

    def keep(self, query: Query, response: Response) -> None:
        """Drop members whose response differs; the set may never become empty."""
        kept = self.matching(query, response)
        if not kept:
            logger.error("Surviving set emptied by a response")
            raise AdversaryInvariantError("no registered member is consistent with the response")
        self.members = kept

    def closure_member(self, i: int, j: int) -> Instance:
        """max(f_i, f_j) over the shared feasible set, consistent whenever both members are."""
        first, second = self.family[i], self.family[j]
        return Instance(
            objective=first.objective.maximum(second.objective),
            feasible=first.feasible,
            params=first.params,
            label=f"max({first.label},{second.label})",
        )


def common_sublevel_point(instances: Sequence[Instance], levels: Sequence[float]) -> np.ndarray | None:
    """A point y with f_I(y) ≤ level_I for every continuous (n = 0) instance I, or None."""
    if not instances:
        raise StructuralError("cannot intersect an empty set of sublevel sets")
    if any(inst.n != 0 for inst in instances):
        raise StructuralError("sublevel intersection takes n = 0 instances")
    d = instances[0].d
    constraints = []
    for inst, level in zip(instances, levels):
        f = inst.objective
        constraints.extend(zip(f.slopes, level - f.offsets))
        constraints.extend(inst.feasible.fiber_constraints(()))
    if d == 0:
        return np.zeros(0) if all(c >= -1e-9 for _, c in constraints) else None
    return lp_feasible(constraints, min(inst.feasible.box_radius for inst in instances), dim=d)


def check_unambiguous(instances: Sequence[Instance], eps: float) -> MixedPoint | None:
    """A point that is an eps-approximate solution of every instance, or None.

    Args:
        instances: Instances over the same (n, d)
        eps: Accuracy

    Returns:
        A common eps-solution; for a single instance its brute-force optimum
    """
    if not instances:
        raise StructuralError("cannot check an empty surviving set")
    if len(instances) == 1:
        optimum = brute_force_opt(instances[0])
        return optimum.point
    n, d = instances[0].n, instances[0].d
    if any((inst.n, inst.d) != (n, d) for inst in instances):
        raise StructuralError("surviving instances must share (n, d)")
    optima = []
    for inst in instances:
        optimum = brute_force_opt(inst)
        if not optimum.feasible:
            return None
        optima.append(optimum.value)
    radius = min(inst.feasible.box_radius for inst in instances)
    for x in integer_fibers(n, radius):
        x_vec = np.asarray(x, dtype=float)
        constraints = []
        empty = False
        for inst, opt in zip(instances, optima):
            f = inst.objective
            rhs = opt + eps - f.offsets - f.slopes[:, :n] @ x_vec
            constraints.extend(zip(f.slopes[:, n:], rhs))
            fiber = inst.feasible.fiber_constraints(x)
            if fiber is None:
                empty = True
                break
            constraints.extend(fiber)
        if empty:
            continue
        if d == 0:
            if all(c >= -1e-9 for _, c in constraints):
                return MixedPoint(x=x, y=np.zeros(0))
            continue
        y = lp_feasible(constraints, radius, dim=d)
        if y is not None:
            return MixedPoint(x=x, y=y)
    return None
