"""Resisting oracle over a finite continuous family (majority answers, then a committed maximum)."""

import logging
import math
from collections.abc import Sequence

from app.core.adversary.surviving import SurvivingSet, check_unambiguous
from app.core.exceptions import AdversaryInvariantError, StructuralError
from app.core.instances import Instance, brute_force_opt, exact_chart
from app.core.oracles import Query, Response, respond, validate_query

logger = logging.getLogger(__name__)


def certified_hardness(k: int) -> int:
    """Rounds a k-member family survives against binary responses: ⌊log₂ k⌋."""
    if k < 1:
        raise StructuralError("family size must be positive")
    return int(math.floor(math.log2(k)))


class ContAdversary:
    """Answers continuous queries so that distinct-optimum survivors stay alive.

    Before round `ell` every answer is the one given by most survivors (ties: the
    smallest response key) and inconsistent survivors are dropped. At round `ell` the
    adversary commits to the maximum of all survivors, whose minimum exceeds opt + eps,
    and answers from it from then on. `ell=None` never commits.
    """

    def __init__(self, family: Sequence[Instance], eps: float, ell: int | None = None, opt: float = 0.0) -> None:
        if any(inst.n != 0 for inst in family):
            raise StructuralError("the continuous adversary takes n = 0 instances")
        self.surviving = SurvivingSet(family)
        self.eps = eps
        self.ell = ell
        self.opt = opt
        self.round = 0
        self.committed: Instance | None = None
        self.committed_at: int | None = None
        self.answer_log: list[tuple[Query, Response]] = []
        self._cache: dict[tuple, Response] = {}

    @property
    def dim(self) -> int:
        return self.surviving.family[0].dim

    def _commit(self) -> None:
        members = self.surviving.instances
        if len(members) < 2:
            logger.error(f"Cannot commit at round {self.round}: {len(members)} survivor(s)")
            raise AdversaryInvariantError("commit needs at least two survivors")
        objective = members[0].objective
        for inst in members[1:]:
            objective = objective.maximum(inst.objective)
        committed = Instance(objective, members[0].feasible, members[0].params, label="f_max")
        minimum = brute_force_opt(committed).value
        if minimum <= self.opt + self.eps:
            logger.error(f"Committed maximum has minimum {minimum} ≤ opt + eps")
            raise AdversaryInvariantError(f"committed maximum has minimum {minimum} ≤ opt + eps")
        self.committed = committed
        self.committed_at = self.round
        logger.info(f"Committed to the maximum of {len(members)} survivors at round {self.round} (min {minimum:.6g})")

    def respond(self, query: Query) -> Response:
        validate_query(query, self.dim)
        key = (query.target.value, repr(query.form.to_json()), tuple(float(v) for v in query.point))
        if key in self._cache:
            response = self._cache[key]
            self.answer_log.append((query, response))
            return response

        self.round += 1
        if self.committed is None and self.ell is not None and self.round >= self.ell:
            self._commit()
        if self.committed is not None:
            response = respond(query.form, query.target, exact_chart(self.committed, query.point))
            self.surviving.members = self.surviving.matching(query, response)
        else:
            groups = self.surviving.responses(query)
            best_key = min(groups, key=lambda k: (-len(groups[k]), k))
            self.surviving.members = groups[best_key]
            response = self.surviving.response_of(groups[best_key][0], query)
        self._cache[key] = response
        self.answer_log.append((query, response))
        return response

    def consistent_instances(self) -> list[Instance]:
        """Registered survivors plus the committed maximum, if any."""
        members = self.surviving.instances
        if self.committed is not None:
            members = members + [self.committed]
        return members

    def is_unambiguous(self, eps: float | None = None) -> bool:
        eps = self.eps if eps is None else eps
        return check_unambiguous(self.consistent_instances(), eps) is not None
