"""Oracle taxonomy: full, bit, threshold and binary post-processings of the exact chart."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import MAX_BIT_INDEX, MIN_BIT_INDEX, SIGN_BIT_INDEX
from app.core.exceptions import QueryFormatError
from app.core.instances import (
    ChartOutput,
    FirstOrderInfo,
    InfoKind,
    Instance,
    MixedPoint,
    exact_chart,
)
from app.schemas.oracle import BudgetReport, TranscriptRecord

logger = logging.getLogger(__name__)

Response = FirstOrderInfo | int | bool


class Target(StrEnum):
    SEP = "sep"
    VAL = "val"
    SUB = "sub"
    FIRST_ORDER = "first_order"


class QueryKind(StrEnum):
    FULL = "full"
    BIT = "bit"
    THRESHOLD = "threshold"
    BINARY = "binary"


@dataclass(frozen=True)
class FullForm:
    kind = QueryKind.FULL

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value}


@dataclass(frozen=True)
class BitForm:
    """Bit `bit_index` of coordinate `coord`; `shift` is added to a value first (None: plain bit)."""

    coord: int
    bit_index: int
    shift: float | None = None
    kind = QueryKind.BIT

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "coord": self.coord, "bit_index": self.bit_index, "shift": self.shift}


@dataclass(frozen=True, eq=False)
class ThresholdForm:
    """sgn(⟨direction, g⟩ - c) with sgn(0) = +1; a value target takes a scalar direction."""

    direction: np.ndarray
    c: float
    kind = QueryKind.THRESHOLD

    def __post_init__(self) -> None:
        direction = np.atleast_1d(np.asarray(self.direction, dtype=float)).ravel()
        direction.flags.writeable = False
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "c", float(self.c))

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "direction": [float(v) for v in self.direction], "c": self.c}


@dataclass(frozen=True, eq=False)
class BinaryForm:
    """An arbitrary yes/no predicate of the full response; only the identifier is serialized."""

    identifier: str
    predicate: Callable[[FirstOrderInfo], bool] = field(compare=False)
    kind = QueryKind.BINARY

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "identifier": self.identifier}


QueryForm = FullForm | BitForm | ThresholdForm | BinaryForm


@dataclass(frozen=True, eq=False)
class Query:
    point: np.ndarray
    target: Target
    form: QueryForm

    def __post_init__(self) -> None:
        point = self.point.vector if isinstance(self.point, MixedPoint) else self.point
        point = np.asarray(point, dtype=float).ravel()
        point.flags.writeable = False
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "target", Target(self.target))

    @property
    def kind(self) -> QueryKind:
        return self.form.kind


def sgn(value: float) -> int:
    return 1 if value >= 0.0 else -1


def fixed_point_bit(value: float, index: int) -> int:
    """Bit of the sign-magnitude fixed-point expansion; index 64 is the sign bit."""
    if index == SIGN_BIT_INDEX:
        return 1 if value < 0.0 else 0
    return math.floor(math.ldexp(abs(value), -index)) % 2


def validate_query(query: Query, dim: int) -> None:
    """Raise QueryFormatError unless the query is well-formed for dimension dim."""
    if query.point.size != dim:
        raise QueryFormatError(f"query point has dimension {query.point.size}, expected {dim}")
    if not np.all(np.isfinite(query.point)):
        raise QueryFormatError("query point must be finite")
    form, target = query.form, query.target
    if isinstance(form, FullForm | BinaryForm):
        return
    if target is Target.FIRST_ORDER:
        raise QueryFormatError("the first-order target only accepts full and binary forms")
    width = 1 if target is Target.VAL else dim
    if isinstance(form, BitForm):
        if not MIN_BIT_INDEX <= form.bit_index <= MAX_BIT_INDEX:
            raise QueryFormatError(f"bit index {form.bit_index} outside [{MIN_BIT_INDEX}, {MAX_BIT_INDEX}]")
        if not 0 <= form.coord < width:
            raise QueryFormatError(f"bit coordinate {form.coord} outside [0, {width})")
        if form.shift is not None and target is not Target.VAL:
            raise QueryFormatError("a shift is only legal for value bits")
        return
    if isinstance(form, ThresholdForm):
        if form.direction.size != width:
            raise QueryFormatError(f"threshold direction has size {form.direction.size}, expected {width}")
        return
    raise QueryFormatError(f"unknown query form {form!r}")


def full_response(target: Target, chart: ChartOutput) -> FirstOrderInfo:
    """The full-information answer the chart gives for target."""
    match target:
        case Target.SEP:
            return FirstOrderInfo(InfoKind.SEPARATION, vector=chart.separation)
        case Target.VAL:
            return FirstOrderInfo(InfoKind.VALUE, value=chart.value)
        case Target.SUB:
            return FirstOrderInfo(InfoKind.SUBGRADIENT, vector=chart.subgradient)
        case Target.FIRST_ORDER:
            if not chart.feasible:
                return FirstOrderInfo(InfoKind.SEPARATION, vector=chart.separation)
            return FirstOrderInfo(InfoKind.FIRST_ORDER, vector=chart.subgradient, value=chart.value)


def respond(form: QueryForm, target: Target, chart: ChartOutput) -> Response:
    """Apply a permissible post-processing to the chart output."""
    full = full_response(target, chart)
    match form:
        case FullForm():
            return full
        case BitForm(coord=coord, bit_index=index, shift=shift):
            if target is Target.VAL:
                return fixed_point_bit(full.value + (shift or 0.0), index)
            return fixed_point_bit(float(full.vector[coord]), index)
        case ThresholdForm(direction=direction, c=c):
            if target is Target.VAL:
                return sgn(float(direction[0]) * full.value - c)
            return sgn(float(direction @ full.vector) - c)
        case BinaryForm(predicate=predicate):
            return bool(predicate(full))
    raise QueryFormatError(f"unknown query form {form!r}")


def response_key(response: Response) -> tuple:
    """Exact, hashable and ordered identity of a response."""
    if isinstance(response, FirstOrderInfo):
        return (1, response.key())
    return (0, int(response))


def response_to_json(response: Response) -> Any:
    if isinstance(response, FirstOrderInfo):
        return response.to_json()
    if isinstance(response, bool):
        return response
    return int(response)


@dataclass
class QueryCounter:
    counts: dict[QueryKind, int] = field(default_factory=lambda: {kind: 0 for kind in QueryKind})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def record(self, kind: QueryKind) -> None:
        self.counts[kind] += 1

    def merge(self, other: "QueryCounter") -> None:
        for kind, count in other.counts.items():
            self.counts[kind] += count


def budget_report(counter: QueryCounter) -> BudgetReport:
    return BudgetReport(
        full=counter.counts[QueryKind.FULL],
        bit=counter.counts[QueryKind.BIT],
        threshold=counter.counts[QueryKind.THRESHOLD],
        binary=counter.counts[QueryKind.BINARY],
        total=counter.total,
    )


class Transcript:
    """Ordered log of (query, response) pairs, serialized as JSON lines."""

    def __init__(self) -> None:
        self.records: list[TranscriptRecord] = []

    def __len__(self) -> int:
        return len(self.records)

    def record(self, query: Query, response: Response, cumulative_total: int) -> None:
        self.records.append(
            TranscriptRecord(
                form=query.form.to_json(),
                target=query.target.value,
                point=[float(v) for v in query.point],
                response=response_to_json(response),
                cumulative_total=cumulative_total,
            )
        )

    def to_jsonl(self) -> str:
        return "".join(record.model_dump_json() + "\n" for record in self.records)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")
        logger.info(f"Wrote {len(self.records)} transcript records to {path}")


def answer(inst: Instance, q: Query, counter: QueryCounter, transcript: Transcript | None = None) -> Response:
    """Answer one query against an instance's exact chart.

    Args:
        inst: Instance whose chart answers
        q: Query to answer
        counter: Incremented by exactly one after validation
        transcript: Optional log receiving the (query, response) pair

    Returns:
        FirstOrderInfo for full queries, 0/1 for bits, ±1 for thresholds, bool for binary

    Raises:
        QueryFormatError: If the query is ill-formed; nothing is counted
    """
    validate_query(q, inst.dim)
    counter.record(q.kind)
    response = respond(q.form, q.target, exact_chart(inst, q.point))
    if transcript is not None:
        transcript.record(q, response, counter.total)
    return response


class Oracle:
    """An instance bound to a counter and optional transcript."""

    def __init__(
        self,
        inst: Instance,
        counter: QueryCounter | None = None,
        transcript: Transcript | None = None,
    ) -> None:
        self.inst = inst
        self.counter = counter or QueryCounter()
        self.transcript = transcript

    @property
    def dim(self) -> int:
        return self.inst.dim

    def ask(self, point: "MixedPoint | ArrayLike", target: Target, form: QueryForm) -> Response:
        return answer(self.inst, Query(point, target, form), self.counter, self.transcript)

    def sign_query(self, point: "MixedPoint | ArrayLike", target: Target) -> Callable[[np.ndarray], int]:
        """a ↦ sgn⟨a, g⟩ for the target vector at point, one threshold query per call."""
        return lambda a: self.ask(point, target, ThresholdForm(a, 0.0))

    def bit_query(self, point: "MixedPoint | ArrayLike", target: Target) -> Callable[[int, int], int]:
        """(coord, index) ↦ that bit of the target vector at point."""
        return lambda coord, index: self.ask(point, target, BitForm(coord, index))

    def is_feasible(self, point: "MixedPoint | ArrayLike") -> bool:
        return self.ask(point, Target.SEP, BinaryForm("feasible", lambda info: not np.any(info.vector)))
