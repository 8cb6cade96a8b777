"""Mixed-integer adversary: one continuous adversary per 0/1 fiber behind hereditary transforms."""

import logging
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from app.core.adversary.continuous import ContAdversary
from app.core.adversary.extension import (
    Fiber,
    binary_fibers,
    closest_fiber,
    fiber_shift,
    fiber_slope,
    psi_eval,
)
from app.core.adversary.surviving import common_sublevel_point
from app.core.exceptions import QueryFormatError, UnsupportedQueryClass
from app.core.instances import (
    ChartOutput,
    FirstOrderInfo,
    InfoKind,
    Instance,
    MaxAffineFunction,
    MixedPoint,
    brute_force_opt,
)
from app.core.oracles import (
    BinaryForm,
    BitForm,
    FullForm,
    Query,
    QueryForm,
    Response,
    Target,
    ThresholdForm,
    fixed_point_bit,
    respond,
    validate_query,
)

logger = logging.getLogger(__name__)


def _identity(response: Response) -> Response:
    return response


@dataclass(frozen=True, eq=False)
class HereditaryTransform:
    """Inner fiber query plus the post-map B; `constant` answers without any inner query."""

    inner_target: Target | None
    inner_form: QueryForm | None
    post: Callable[[Response], Response]
    delta: float
    slope: np.ndarray
    constant: Response | None = None

    @property
    def needs_inner_query(self) -> bool:
        return self.inner_form is not None


def _lift(target: Target, delta: float, slope: np.ndarray) -> Callable[[FirstOrderInfo], FirstOrderInfo]:
    """Map a fiber's full response to the full response of its tilted extension."""

    def lift(info: FirstOrderInfo) -> FirstOrderInfo:
        match target:
            case Target.VAL:
                return FirstOrderInfo(InfoKind.VALUE, value=info.value + delta)
            case Target.SUB:
                return FirstOrderInfo(InfoKind.SUBGRADIENT, vector=np.concatenate((slope, info.vector)))
            case Target.FIRST_ORDER:
                return FirstOrderInfo(
                    InfoKind.FIRST_ORDER,
                    vector=np.concatenate((slope, info.vector)),
                    value=info.value + delta,
                )
        raise UnsupportedQueryClass(f"no lift for target {target}")

    return lift


def hereditary_transform(
    form: QueryForm,
    target: Target,
    delta: float,
    slope: np.ndarray,
) -> HereditaryTransform:
    """Rewrite a full-space query as one fiber-space query and a post-map.

    Args:
        form: Query form asked in the full space
        target: Value, subgradient or first-order target
        delta: Value shift ⟨M_r, x - r⟩ at the query point
        slope: Integer-coordinate slope M_r of the fiber

    Returns:
        HereditaryTransform satisfying B(h_*(v)) = h(v + δ) and B(h_*(g)) = h(M_r, g)

    Raises:
        UnsupportedQueryClass: For plain value bits and separation targets
    """
    n = slope.size
    if target is Target.SEP:
        raise UnsupportedQueryClass("separation queries are answered from the domain, not transformed")
    match form:
        case FullForm():
            return HereditaryTransform(target, form, _lift(target, delta, slope), delta, slope)
        case ThresholdForm(direction=u, c=c) if target is Target.VAL:
            inner = ThresholdForm(u, c - float(u[0]) * delta)
            return HereditaryTransform(target, inner, _identity, delta, slope)
        case ThresholdForm(direction=u, c=c) if target is Target.SUB:
            inner = ThresholdForm(u[n:], c - float(u[:n] @ slope))
            return HereditaryTransform(target, inner, _identity, delta, slope)
        case BitForm(shift=None) if target is Target.VAL:
            raise UnsupportedQueryClass("plain value bits are not hereditary; use a shifted bit")
        case BitForm(coord=coord, bit_index=index, shift=shift) if target is Target.VAL:
            return HereditaryTransform(target, BitForm(coord, index, shift + delta), _identity, delta, slope)
        case BitForm(coord=coord, bit_index=index) if target is Target.SUB:
            if coord < n:
                constant = fixed_point_bit(float(slope[coord]), index)
                return HereditaryTransform(None, None, _identity, delta, slope, constant=constant)
            return HereditaryTransform(target, BitForm(coord - n, index), _identity, delta, slope)
        case BinaryForm(identifier=identifier, predicate=predicate):
            lift = _lift(target, delta, slope)
            inner = BinaryForm(f"{identifier}@lift", lambda info: predicate(lift(info)))
            return HereditaryTransform(target, inner, _identity, delta, slope)
    raise UnsupportedQueryClass(f"no hereditary counterpart for {form!r} on {target}")


def domain_chart(dim: int) -> ChartOutput:
    """Chart of the domain [0, 1]^n × [-R, R]^d at an in-domain point (feasible, value unused)."""
    return ChartOutput(separation=np.zeros(dim), value=0.0, subgradient=np.zeros(dim))


def truncated_chart(dim: int, opt: float) -> ChartOutput:
    return ChartOutput(separation=np.zeros(dim), value=opt, subgradient=np.zeros(dim))


class MIAdversary:
    """Answers mixed-integer queries over [0, 1]^n × [-R, R]^d through per-fiber adversaries."""

    def __init__(
        self,
        family: Sequence[Instance],
        n: int,
        eps: float,
        ell: int | None,
        opt: float = 0.0,
    ) -> None:
        first = family[0]
        self.n = n
        self.d = first.d
        self.M = first.params.M
        self.R = first.params.R
        self.eps = eps
        self.opt = opt
        self.ell = ell
        self.per_fiber: dict[Fiber, ContAdversary] = {
            x_bar: ContAdversary(family, eps, ell, opt) for x_bar in binary_fibers(n)
        }
        self.slopes: dict[Fiber, np.ndarray] = {x_bar: fiber_slope(x_bar, self.M, self.R) for x_bar in self.per_fiber}
        self.round = 0
        self.inner_queries: list[int] = []
        self.answer_log: list[tuple[Query, Response]] = []

    @property
    def dim(self) -> int:
        return self.n + self.d

    def _check_domain(self, query: Query) -> None:
        validate_query(query, self.dim)
        x, y = query.point[: self.n], query.point[self.n :]
        if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12) or np.any(np.abs(y) > self.R + 1e-12):
            raise QueryFormatError("query point outside [0, 1]^n × [-R, R]^d")

    def respond(self, query: Query) -> Response:
        self._check_domain(query)
        self.round += 1
        if query.target is Target.SEP:
            response = respond(query.form, query.target, domain_chart(self.dim))
            self.inner_queries.append(0)
            self.answer_log.append((query, response))
            return response

        x, y = query.point[: self.n], query.point[self.n :]
        r = closest_fiber(x)
        slope = self.slopes[r]
        delta = fiber_shift(x, r, slope)
        fiber = self.per_fiber[r]
        transform = hereditary_transform(query.form, query.target, delta, slope)
        inner = 1
        truncation_test = Query(y, Target.VAL, ThresholdForm(-1.0, delta - self.opt))
        if fiber.respond(truncation_test) >= 0:
            response = respond(query.form, query.target, truncated_chart(self.dim, self.opt))
        elif transform.needs_inner_query:
            inner += 1
            response = transform.post(fiber.respond(Query(y, transform.inner_target, transform.inner_form)))
        else:
            response = transform.constant
        self.inner_queries.append(inner)
        self.answer_log.append((query, response))
        return response

    @property
    def committed_fibers(self) -> list[Fiber]:
        return [x_bar for x_bar, adversary in self.per_fiber.items() if adversary.committed is not None]

    def fiber_minima(self) -> dict[Fiber, list[tuple[Instance, float]]]:
        """Consistent instances of every fiber with their minimum values."""
        return {
            x_bar: [(inst, brute_force_opt(inst).value) for inst in adversary.consistent_instances()]
            for x_bar, adversary in self.per_fiber.items()
        }

    def common_solution(self, eps: float | None = None) -> MixedPoint | None:
        """A point that is an eps-solution of every consistent ψ_F, or None.

        On its own fiber ψ_F equals F(x̄), so (x̄, y) qualifies iff every choice f for x̄
        has f(y) ≤ min(min f, m) + eps, where m is the smallest minimum any other fiber
        can still take.
        """
        eps = self.eps if eps is None else eps
        minima = self.fiber_minima()
        for x_bar, options in minima.items():
            m_other = min((m for other, opts in minima.items() if other != x_bar for _, m in opts), default=math.inf)
            levels = [min(m, m_other) + eps for _, m in options]
            y = common_sublevel_point([inst for inst, _ in options], levels)
            if y is not None:
                return MixedPoint(x=x_bar, y=y)
        return None

    def is_unambiguous(self, eps: float | None = None) -> bool:
        return self.common_solution(eps) is not None

    def fiber_choices(self) -> dict[Fiber, list[MaxAffineFunction]]:
        """Functions each fiber may still hold: consistent registered members and the committed maximum."""
        return {
            x_bar: [inst.objective for inst in adversary.consistent_instances()]
            for x_bar, adversary in self.per_fiber.items()
        }

    def psi_response(self, F: Mapping[Fiber, MaxAffineFunction], query: Query) -> Response:
        """Response ψ_F gives to query under the shared chart conventions."""
        if query.target is Target.SEP:
            return respond(query.form, query.target, domain_chart(self.dim))
        value = psi_eval(F, query.point, self.n, self.M, self.R, self.opt)
        chart = ChartOutput(separation=np.zeros(self.dim), value=value.value, subgradient=value.subgradient)
        return respond(query.form, query.target, chart)

