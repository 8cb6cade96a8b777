"""Approximate separations, value cuts and value comparisons from bit and sign queries."""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import MAX_BIT_INDEX, MIN_BIT_INDEX, ORTHONORMAL_TOLERANCE, SIGN_BIT_INDEX
from app.core.exceptions import StructuralError
from app.core.instances import (
    FirstOrderInfo,
    InfoKind,
    Instance,
    MixedPoint,
    gradient_bound,
    value_bound,
)
from app.core.oracles import Oracle, QueryCounter, QueryKind, Target, ThresholdForm, Transcript

logger = logging.getLogger(__name__)


class RecoveryMode(StrEnum):
    BIT = "bit"
    DIR = "dir"


@dataclass(frozen=True)
class ApproxOracleSpec:
    """Target accuracy and query family of an approximate oracle."""

    eps: float
    mode: RecoveryMode

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise StructuralError("eps must be positive")
        object.__setattr__(self, "mode", RecoveryMode(self.mode))

    def eps_prime(self, inst: Instance) -> float:
        """Per-coordinate bit accuracy eps / (2 (n + d) R)."""
        return self.eps / (2.0 * inst.dim * inst.params.R)

    def validate_for(self, inst: Instance) -> None:
        if self.eps > 2.0 * inst.params.M * inst.params.R:
            raise StructuralError(f"eps = {self.eps} exceeds 2MR for instance {inst.label!r}")


def sign_query_count(dim: int, eps: float) -> int:
    """Sign queries approx_unit_vector spends for (dim, eps)."""
    if dim == 1:
        return 1
    delta = eps / (2.0 * dim)
    return (dim - 1) * math.ceil(math.log2(8.0 / delta))


def _counted(query: Callable, counter: QueryCounter | None, kind: QueryKind) -> Callable:
    if counter is None:
        return query

    def wrapped(*args):
        counter.record(kind)
        return query(*args)

    return wrapped


def _orthonormal_complement(u: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Component of e orthogonal to the unit vector u, normalized (twice for stability)."""
    v = e - (u @ e) * u
    v -= (u @ v) * u
    norm = np.linalg.norm(v)
    if norm < ORTHONORMAL_TOLERANCE:
        raise StructuralError("degenerate frame during vector recovery")
    return v / norm


def _bisect_plane(sign_query: Callable[[np.ndarray], int], u: np.ndarray, v: np.ndarray, rounds: int) -> np.ndarray:
    """Direction of the projection of g onto span{u, v} to angular width 2π / 2^rounds."""
    lo, hi = -math.pi, math.pi
    for _ in range(rounds):
        mid = 0.5 * (lo + hi)
        normal = -math.sin(mid) * u + math.cos(mid) * v
        if sign_query(normal) >= 0:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return math.cos(theta) * u + math.sin(theta) * v


def approx_unit_vector(
    sign_query: Callable[[np.ndarray], int],
    dim: int,
    eps: float,
    counter: QueryCounter | None = None,
) -> np.ndarray:
    """Recover g / ‖g‖ to Euclidean accuracy eps from sign queries a ↦ sgn⟨a, g⟩.

    The estimate is grown one coordinate at a time: the direction found so far and
    the next basis vector span a plane in which one cone bisection locates the
    projection of g.

    Args:
        sign_query: Oracle for sgn⟨a, g⟩ with sgn(0) = +1; g must be non-zero
        dim: Dimension of g
        eps: Accuracy in (0, 1)
        counter: When given, one threshold query is recorded per sign call

    Returns:
        Unit vector within eps of g / ‖g‖

    Raises:
        StructuralError: If dim < 1 or eps is outside (0, 1)
    """
    if dim < 1:
        raise StructuralError("dimension must be at least 1")
    if not 0.0 < eps < 1.0:
        raise StructuralError(f"eps must lie in (0, 1), got {eps}")
    query = _counted(sign_query, counter, QueryKind.THRESHOLD)
    basis = np.eye(dim)
    if dim == 1:
        return np.array([float(query(basis[0]))])

    rounds = math.ceil(math.log2(8.0 / (eps / (2.0 * dim))))
    estimate = basis[0]
    for k in range(1, dim):
        partner = _orthonormal_complement(estimate, basis[k])
        estimate = _bisect_plane(query, estimate, partner, rounds)
        estimate /= np.linalg.norm(estimate)
    return estimate


def bit_range(magnitude_bound: float, eps_inf: float) -> list[int]:
    """Magnitude bit indices read, from ⌊log₂ bound⌋ down to the accuracy bit."""
    if eps_inf <= 0:
        raise StructuralError("eps_inf must be positive")
    bottom = max(-math.ceil(math.log2(1.0 / eps_inf)), MIN_BIT_INDEX)
    if magnitude_bound <= 0:
        return []
    top = min(math.floor(math.log2(magnitude_bound)), MAX_BIT_INDEX - 1)
    return list(range(top, bottom - 1, -1))


def approx_vector_bits(
    bit_query: Callable[[int, int], int],
    dim: int,
    magnitude_bound: float,
    eps_inf: float,
    counter: QueryCounter | None = None,
) -> np.ndarray:
    """Rebuild v with ‖v̂ - v‖∞ ≤ eps_inf from its sign bit and magnitude bits.

    Args:
        bit_query: (coord, index) ↦ bit; index 64 is the sign
        dim: Length of v
        magnitude_bound: Bound on every |v_i|
        eps_inf: Coordinate accuracy
        counter: When given, one bit query is recorded per call

    Returns:
        The truncated expansion of v
    """
    query = _counted(bit_query, counter, QueryKind.BIT)
    indices = bit_range(magnitude_bound, eps_inf)
    estimate = np.zeros(dim)
    for coord in range(dim):
        negative = query(coord, SIGN_BIT_INDEX) == 1
        magnitude = sum(math.ldexp(1.0, index) for index in indices if query(coord, index))
        estimate[coord] = -magnitude if negative else magnitude
    return estimate


def make_approx_separation(
    inst: Instance,
    z: "MixedPoint | ArrayLike",
    eps: float,
    mode: RecoveryMode,
    counter: QueryCounter,
    transcript: Transcript | None = None,
) -> FirstOrderInfo:
    """Separation whose cut keeps every eps-deep point of C.

    One binary feasibility query decides membership; an infeasible point then gets its
    separator rebuilt from bits (bit mode) or from sign queries (dir mode).
    """
    oracle = Oracle(inst, counter, transcript)
    dim = inst.dim
    if oracle.is_feasible(z):
        return FirstOrderInfo(InfoKind.SEPARATION, vector=np.zeros(dim))
    R = inst.params.R
    if RecoveryMode(mode) is RecoveryMode.BIT:
        eps_prime = min(eps / (2.0 * dim * R), 0.5 / dim)
        vector = approx_vector_bits(oracle.bit_query(z, Target.SEP), dim, 1.0, eps_prime)
    else:
        tolerance = min(eps / (2.0 * R * math.sqrt(dim)), 0.5)
        vector = approx_unit_vector(oracle.sign_query(z, Target.SEP), dim, tolerance)
    return FirstOrderInfo(InfoKind.SEPARATION, vector=vector)


def make_approx_value_cut(
    inst: Instance,
    z: "MixedPoint | ArrayLike",
    eps: float,
    mode: RecoveryMode,
    counter: QueryCounter,
    transcript: Transcript | None = None,
) -> np.ndarray:
    """ĝ such that ⟨ĝ, z'⟩ ≥ ⟨ĝ, z⟩ implies f(z') ≥ f(z) - eps on the box."""
    oracle = Oracle(inst, counter, transcript)
    dim = inst.dim
    R = inst.params.R
    if RecoveryMode(mode) is RecoveryMode.BIT:
        bound = gradient_bound(inst, np.inf)
        if bound == 0.0:
            return np.zeros(dim)
        return approx_vector_bits(oracle.bit_query(z, Target.SUB), dim, bound, eps / (2.0 * dim * R))
    bound = gradient_bound(inst, 2)
    if bound == 0.0:
        return np.zeros(dim)
    tolerance = min(eps / (2.0 * bound * R * math.sqrt(dim)), 0.5)
    return approx_unit_vector(oracle.sign_query(z, Target.SUB), dim, tolerance)


def estimate_value(
    inst: Instance,
    z: "MixedPoint | ArrayLike",
    accuracy: float,
    mode: RecoveryMode,
    counter: QueryCounter,
    transcript: Transcript | None = None,
) -> float:
    """f(z) to within accuracy, from value bits or scalar thresholds.

    Bit mode reads the sign and the magnitude bits down to 2·accuracy, then returns
    the midpoint of the remaining interval.
    """
    oracle = Oracle(inst, counter, transcript)
    bound = value_bound(inst)
    if RecoveryMode(mode) is RecoveryMode.BIT:
        query = oracle.bit_query(z, Target.VAL)
        step = 2.0 * accuracy
        truncated = float(approx_vector_bits(lambda _, index: query(0, index), 1, bound, step)[0])
        indices = bit_range(bound, step)
        width = math.ldexp(1.0, indices[-1]) if indices else bound
        return math.copysign(abs(truncated) + 0.5 * width, truncated)
    lo, hi = -bound, bound
    while hi - lo > 2.0 * accuracy:
        mid = 0.5 * (lo + hi)
        if oracle.ask(z, Target.VAL, ThresholdForm(1.0, mid)) >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def approx_value_compare(
    inst: Instance,
    z: "MixedPoint | ArrayLike",
    z_other: "MixedPoint | ArrayLike",
    eps: float,
    mode: RecoveryMode,
    counter: QueryCounter,
    transcript: Transcript | None = None,
) -> bool:
    """Answer "f(z) ≤ f(z')?" from two ±eps/2 estimates.

    True whenever f(z) < f(z') - eps, false whenever f(z) > f(z') + eps; either answer
    inside the band. At most 2·(log₂(2U/eps) + 2) queries.
    """
    value = estimate_value(inst, z, eps / 2.0, mode, counter, transcript)
    other = estimate_value(inst, z_other, eps / 2.0, mode, counter, transcript)
    return value <= other


def select_best(
    inst: Instance,
    candidates: Sequence["MixedPoint | ArrayLike"],
    eps: float,
    mode: RecoveryMode,
    counter: QueryCounter,
    transcript: Transcript | None = None,
) -> int:
    """Index of an eps-best candidate: every value estimated once to ±eps/2, first minimum wins."""
    if not candidates:
        raise StructuralError("cannot select from an empty candidate list")
    values = [estimate_value(inst, z, eps / 2.0, mode, counter, transcript) for z in candidates]
    return int(np.argmin(values))
