"""Instances, exact first-order charts and brute-force reference oracles."""

import itertools
import logging
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import (
    FIBER_GUARD,
    MEMBERSHIP_TOLERANCE,
    NORMAL_TOLERANCE,
)
from app.core.exceptions import FiberGuardExceeded, StructuralError
from app.core.simplex import lp_feasible, lp_minimize

logger = logging.getLogger(__name__)

__all__ = [
    "BruteForceResult",
    "ChartOutput",
    "ClassAudit",
    "FirstOrderInfo",
    "InfoKind",
    "Instance",
    "InstanceParams",
    "MaxAffineFunction",
    "MixedPoint",
    "Polytope",
    "as_vector",
    "audit_class",
    "brute_force_opt",
    "deep_point_check",
    "evaluate",
    "exact_chart",
    "gradient_bound",
    "integer_fibers",
    "lp_feasible",
    "max_deep_radius",
    "separate",
    "subgradient",
    "value_bound",
]


def _frozen(values: ArrayLike, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=float, ndmin=ndim)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MixedPoint:
    """A point of Z^n x R^d with the integer and continuous parts kept apart."""

    x: tuple[int, ...]
    y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        object.__setattr__(self, "y", _frozen(np.asarray(self.y, dtype=float).ravel(), 1))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def d(self) -> int:
        return self.y.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate((np.asarray(self.x, dtype=float), self.y))

    @classmethod
    def from_vector(cls, z: ArrayLike, n: int) -> "MixedPoint":
        z = np.asarray(z, dtype=float).ravel()
        return cls(x=tuple(int(round(v)) for v in z[:n]), y=z[n:])

    def to_list(self) -> list[float]:
        return [float(v) for v in self.vector]

    def __repr__(self) -> str:
        return f"MixedPoint(x={self.x}, y={np.round(self.y, 6).tolist()})"


def as_vector(z: "MixedPoint | ArrayLike", dim: int | None = None) -> np.ndarray:
    """Return z as a flat float vector, checking its length when dim is given."""
    vector = z.vector if isinstance(z, MixedPoint) else np.asarray(z, dtype=float).ravel()
    if dim is not None and vector.size != dim:
        raise StructuralError(f"expected a point of dimension {dim}, got {vector.size}")
    return vector


class InfoKind(StrEnum):
    SEPARATION = "separation"
    VALUE = "value"
    SUBGRADIENT = "subgradient"
    FIRST_ORDER = "first_order"


@dataclass(frozen=True, eq=False)
class FirstOrderInfo:
    """Output of a first-order chart.

    SEPARATION carries a vector (zero iff feasible), VALUE a real, SUBGRADIENT a
    vector and FIRST_ORDER both the value and the subgradient at a feasible point.
    """

    kind: InfoKind
    vector: np.ndarray | None = None
    value: float | None = None

    def __post_init__(self) -> None:
        if self.vector is not None:
            object.__setattr__(self, "vector", _frozen(np.asarray(self.vector, dtype=float).ravel(), 1))
        if self.value is not None:
            object.__setattr__(self, "value", float(self.value))

    @property
    def is_feasible_marker(self) -> bool:
        return self.kind is InfoKind.SEPARATION and not np.any(self.vector)

    def key(self) -> tuple:
        """Hashable, totally ordered identity used for exact response matching."""
        vector = tuple(float(v) for v in self.vector) if self.vector is not None else ()
        value = self.value if self.value is not None else 0.0
        return (self.kind.value, value, vector)

    def to_json(self) -> dict:
        payload: dict = {"kind": self.kind.value}
        if self.value is not None:
            payload["value"] = self.value
        if self.vector is not None:
            payload["vector"] = [float(v) for v in self.vector]
        return payload


@dataclass(frozen=True, eq=False)
class MaxAffineFunction:
    """z ↦ max_i (⟨a_i, z⟩ + b_i)."""

    slopes: np.ndarray
    offsets: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        slopes = np.array(self.slopes, dtype=float, ndmin=2)
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if slopes.shape[0] == 0:
            raise StructuralError("a max-affine function needs at least one piece")
        if slopes.shape[0] != offsets.size:
            raise StructuralError(
                f"{slopes.shape[0]} slope rows but {offsets.size} offsets"
            )
        slopes.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_pieces(cls, pieces: Sequence[Sequence[float]], label: str = "") -> "MaxAffineFunction":
        """Build from rows [a_1, ..., a_dim, b]."""
        rows = np.array(pieces, dtype=float, ndmin=2)
        return cls(slopes=rows[:, :-1], offsets=rows[:, -1], label=label)

    @classmethod
    def constant(cls, dim: int, value: float, label: str = "") -> "MaxAffineFunction":
        return cls(slopes=np.zeros((1, dim)), offsets=[value], label=label)

    @property
    def dim(self) -> int:
        return self.slopes.shape[1]

    @property
    def n_pieces(self) -> int:
        return self.slopes.shape[0]

    def piece_values(self, z: "MixedPoint | ArrayLike") -> np.ndarray:
        return self.slopes @ as_vector(z, self.dim) + self.offsets

    def __call__(self, z: "MixedPoint | ArrayLike") -> float:
        return float(self.piece_values(z).max())

    def active_index(self, z: "MixedPoint | ArrayLike") -> int:
        return int(np.argmax(self.piece_values(z)))

    def subgradient(self, z: "MixedPoint | ArrayLike") -> np.ndarray:
        return self.slopes[self.active_index(z)].copy()

    def values_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at every row of an (N, dim) array."""
        return (points @ self.slopes.T + self.offsets).max(axis=1)

    def fiber_lipschitz(self, n: int) -> float:
        """ℓ∞-Lipschitz constant in the continuous coordinates."""
        return float(np.abs(self.slopes[:, n:]).sum(axis=1).max(initial=0.0))

    def maximum(self, other: "MaxAffineFunction", label: str = "") -> "MaxAffineFunction":
        """Pointwise max; this function's pieces keep the lower indices."""
        if other.dim != self.dim:
            raise StructuralError("cannot combine functions of different dimension")
        return MaxAffineFunction(
            slopes=np.vstack((self.slopes, other.slopes)),
            offsets=np.concatenate((self.offsets, other.offsets)),
            label=label or f"max({self.label},{other.label})",
        )

    def shifted(self, delta: float, label: str = "") -> "MaxAffineFunction":
        return MaxAffineFunction(self.slopes, self.offsets + delta, label=label or self.label)

    def to_pieces(self) -> list[list[float]]:
        return [[*map(float, a), float(b)] for a, b in zip(self.slopes, self.offsets)]


@dataclass(frozen=True, eq=False)
class Polytope:
    """[-R, R]^dim intersected with halfspaces ⟨normal, z⟩ ≤ offset (unit normals)."""

    dim: int
    box_radius: float
    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self) -> None:
        normals = np.array(self.normals, dtype=float).reshape(-1, self.dim)
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if normals.shape[0] != offsets.size:
            raise StructuralError("every halfspace needs exactly one offset")
        if self.box_radius <= 0:
            raise StructuralError("box radius must be positive")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(np.abs(norms - 1.0) > NORMAL_TOLERANCE):
            raise StructuralError("stored halfspace normals must have unit norm")
        normals.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "box_radius", float(self.box_radius))

    @classmethod
    def box(cls, dim: int, radius: float) -> "Polytope":
        return cls(dim=dim, box_radius=radius, normals=np.zeros((0, dim)), offsets=np.zeros(0))

    @classmethod
    def from_halfspaces(
        cls, dim: int, radius: float, halfspaces: Sequence[tuple[ArrayLike, float]]
    ) -> "Polytope":
        """Normalize raw (g, c) pairs; a zero normal with c ≥ 0 is dropped."""
        polytope = cls.box(dim, radius)
        for normal, offset in halfspaces:
            polytope = polytope.with_cut(normal, offset)
        return polytope

    @property
    def n_halfspaces(self) -> int:
        return self.offsets.size

    @property
    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        return [(g.copy(), float(c)) for g, c in zip(self.normals, self.offsets)]

    def with_cut(self, normal: ArrayLike, offset: float) -> "Polytope":
        """Return a new polytope with ⟨normal, z⟩ ≤ offset added (normalized)."""
        normal = np.asarray(normal, dtype=float).ravel()
        if normal.size != self.dim:
            raise StructuralError(f"cut normal has dimension {normal.size}, expected {self.dim}")
        norm = float(np.linalg.norm(normal))
        if norm == 0.0:
            if offset >= 0.0:
                return self
            raise StructuralError("a zero normal with negative offset describes an empty set")
        return Polytope(
            dim=self.dim,
            box_radius=self.box_radius,
            normals=np.vstack((self.normals, normal / norm)),
            offsets=np.append(self.offsets, float(offset) / norm),
        )

    def contains(self, z: "MixedPoint | ArrayLike", tol: float = MEMBERSHIP_TOLERANCE) -> bool:
        z = as_vector(z, self.dim)
        if np.any(np.abs(z) > self.box_radius + tol):
            return False
        return bool(np.all(self.normals @ z <= self.offsets + tol))

    def contains_many(self, points: np.ndarray, tol: float = MEMBERSHIP_TOLERANCE) -> np.ndarray:
        """Membership mask for every row of an (N, dim) array."""
        inside = np.all(np.abs(points) <= self.box_radius + tol, axis=1)
        if self.n_halfspaces:
            inside &= np.all(points @ self.normals.T <= self.offsets + tol, axis=1)
        return inside

    def fiber_constraints(self, x: Sequence[int]) -> list[tuple[np.ndarray, float]] | None:
        """Halfspaces over y describing the slice at integer part x, or None if x is outside the box."""
        n = len(x)
        x_vec = np.asarray(x, dtype=float)
        if np.any(np.abs(x_vec) > self.box_radius + MEMBERSHIP_TOLERANCE):
            return None
        rhs = self.offsets - self.normals[:, :n] @ x_vec
        return [(g, float(c)) for g, c in zip(self.normals[:, n:], rhs)]


@dataclass(frozen=True)
class InstanceParams:
    n: int
    d: int
    R: float
    rho: float
    M: float

    def __post_init__(self) -> None:
        if self.n < 0 or self.d < 0 or self.n + self.d < 1:
            raise StructuralError("need n, d ≥ 0 with n + d ≥ 1")
        if self.R <= 0 or self.M <= 0 or self.rho < 0:
            raise StructuralError("need R > 0, M > 0 and rho ≥ 0")

    @property
    def dim(self) -> int:
        return self.n + self.d


@dataclass(frozen=True, eq=False)
class Instance:
    """A max-affine objective over a polyhedral region inside the [-R, R] box."""

    objective: MaxAffineFunction
    feasible: Polytope
    params: InstanceParams
    label: str = ""

    def __post_init__(self) -> None:
        dim = self.params.dim
        if self.objective.dim != dim or self.feasible.dim != dim:
            raise StructuralError(
                f"instance {self.label!r}: objective/feasible dimensions must equal n + d = {dim}"
            )
        if self.feasible.box_radius > self.params.R + NORMAL_TOLERANCE:
            raise StructuralError(f"instance {self.label!r}: feasible box exceeds R")
        lipschitz = self.objective.fiber_lipschitz(self.params.n)
        if lipschitz > self.params.M + 1e-9:
            raise StructuralError(
                f"instance {self.label!r}: fiber Lipschitz constant {lipschitz} exceeds M = {self.params.M}"
            )

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def is_unconstrained(self) -> bool:
        return self.feasible.n_halfspaces == 0


@dataclass(frozen=True, eq=False)
class ChartOutput:
    """Everything the deterministic first-order chart knows at one point."""

    separation: np.ndarray
    value: float
    subgradient: np.ndarray

    @property
    def feasible(self) -> bool:
        return not np.any(self.separation)


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    feasible: bool
    point: MixedPoint | None = None
    value: float | None = None
    fibers_checked: int = 0


@dataclass(frozen=True)
class ClassAudit:
    box_contained: bool
    optimal_fiber: tuple[int, ...] | None
    deep_radius: float
    deep_ok: bool
    lipschitz: float
    lipschitz_ok: bool

    @property
    def ok(self) -> bool:
        return self.box_contained and self.deep_ok and self.lipschitz_ok


def evaluate(f: MaxAffineFunction, z: "MixedPoint | ArrayLike") -> float:
    return f(z)


def subgradient(f: MaxAffineFunction, z: "MixedPoint | ArrayLike") -> np.ndarray:
    """Slope of the lowest-index piece attaining the max."""
    return f.subgradient(z)


def separate(C: Polytope, z: "MixedPoint | ArrayLike") -> FirstOrderInfo:
    """Upper box faces +e_1..+e_dim, then lower faces -e_1..-e_dim, then stored halfspaces, each in order."""
    z = as_vector(z, C.dim)
    above = np.flatnonzero(z > C.box_radius + MEMBERSHIP_TOLERANCE)
    if above.size:
        return FirstOrderInfo(InfoKind.SEPARATION, vector=np.eye(C.dim)[above[0]])
    below = np.flatnonzero(z < -C.box_radius - MEMBERSHIP_TOLERANCE)
    if below.size:
        return FirstOrderInfo(InfoKind.SEPARATION, vector=-np.eye(C.dim)[below[0]])
    if C.n_halfspaces:
        violated = np.flatnonzero(C.normals @ z > C.offsets + MEMBERSHIP_TOLERANCE)
        if violated.size:
            return FirstOrderInfo(InfoKind.SEPARATION, vector=C.normals[violated[0]])
    return FirstOrderInfo(InfoKind.SEPARATION, vector=np.zeros(C.dim))


def exact_chart(inst: Instance, z: "MixedPoint | ArrayLike") -> ChartOutput:
    z = as_vector(z, inst.dim)
    return ChartOutput(
        separation=separate(inst.feasible, z).vector,
        value=inst.objective(z),
        subgradient=inst.objective.subgradient(z),
    )


def deep_point_check(C: Polytope, z: "MixedPoint | ArrayLike", r: float) -> bool:
    """True iff the ℓ∞ ball of radius r around z lies in C."""
    if r < 0:
        raise StructuralError("radius must be non-negative")
    z = as_vector(z, C.dim)
    if np.any(np.abs(z) + r > C.box_radius + NORMAL_TOLERANCE):
        return False
    if not C.n_halfspaces:
        return True
    reach = C.normals @ z + r * np.abs(C.normals).sum(axis=1)
    return bool(np.all(reach <= C.offsets + NORMAL_TOLERANCE))


def integer_fibers(n: int, radius: float, guard: int = FIBER_GUARD) -> Iterator[tuple[int, ...]]:
    """Every x in Z^n ∩ [-radius, radius]^n in lexicographic order."""
    half = math.floor(radius + NORMAL_TOLERANCE)
    count = (2 * half + 1) ** n
    if count > guard:
        raise FiberGuardExceeded(f"{count} fibers exceed the enumeration guard of {guard}")
    return itertools.product(range(-half, half + 1), repeat=n)


def value_bound(inst: Instance) -> float:
    """U with |f| ≤ U on the box."""
    f = inst.objective
    return float((np.abs(f.offsets) + np.abs(f.slopes).sum(axis=1) * inst.params.R).max())


def gradient_bound(inst: Instance, ord: float = np.inf) -> float:
    """Norm bound on every subgradient the chart can return."""
    return float(np.linalg.norm(inst.objective.slopes, ord=ord, axis=1).max())


def _fiber_minimum(inst: Instance, x: tuple[int, ...], t_bound: float) -> tuple[np.ndarray, float] | None:
    constraints = inst.feasible.fiber_constraints(x)
    if constraints is None:
        return None
    d = inst.d
    n = inst.n
    f = inst.objective
    x_vec = np.asarray(x, dtype=float)
    # Variables (y, t): a_y·y - t ≤ -b - a_x·x and g_y·y ≤ c'.
    piece_rows = np.hstack((f.slopes[:, n:], -np.ones((f.n_pieces, 1))))
    piece_rhs = -f.offsets - f.slopes[:, :n] @ x_vec
    if constraints:
        region_rows = np.hstack((np.array([g for g, _ in constraints]).reshape(-1, d), np.zeros((len(constraints), 1))))
        region_rhs = np.array([c for _, c in constraints])
    else:
        region_rows = np.zeros((0, d + 1))
        region_rhs = np.zeros(0)
    radius = inst.feasible.box_radius
    lower = np.append(np.full(d, -radius), -t_bound)
    upper = np.append(np.full(d, radius), t_bound)
    cost = np.zeros(d + 1)
    cost[-1] = 1.0
    result = lp_minimize(
        cost,
        np.vstack((piece_rows, region_rows)),
        np.concatenate((piece_rhs, region_rhs)),
        lower,
        upper,
    )
    if not result.is_optimal:
        return None
    return result.x[:d], result.objective


def brute_force_opt(inst: Instance, guard: int = FIBER_GUARD) -> BruteForceResult:
    """Exact optimum by enumerating every integer fiber and solving one LP per fiber.

    Args:
        inst: Instance to solve
        guard: Maximum number of fibers to enumerate

    Returns:
        BruteForceResult; feasible is False when no fiber meets C

    Raises:
        FiberGuardExceeded: If the fiber count exceeds guard
    """
    t_bound = value_bound(inst) + 1.0
    best: BruteForceResult = BruteForceResult(feasible=False)
    checked = 0
    for x in integer_fibers(inst.n, inst.feasible.box_radius, guard):
        checked += 1
        solved = _fiber_minimum(inst, x, t_bound)
        if solved is None:
            continue
        y, _ = solved
        point = MixedPoint(x=x, y=y)
        value = inst.objective(point)
        if not best.feasible or value < best.value - 1e-12:
            best = BruteForceResult(feasible=True, point=point, value=value)
    if not best.feasible:
        logger.info(f"Instance {inst.label!r} is infeasible ({checked} fibers checked)")
        return BruteForceResult(feasible=False, fibers_checked=checked)
    return BruteForceResult(feasible=True, point=best.point, value=best.value, fibers_checked=checked)


def max_deep_radius(C: Polytope, x: Sequence[int]) -> tuple[float, np.ndarray] | None:
    """Largest r such that some point on fiber x has its ℓ∞ r-ball inside C.

    Returns:
        (radius, y) for the deepest point, or None when the fiber is empty
    """
    n = len(x)
    d = C.dim - n
    x_vec = np.asarray(x, dtype=float)
    x_room = C.box_radius - (float(np.abs(x_vec).max()) if n else 0.0)
    if x_room < 0:
        return None
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    for i in range(d):
        for sign in (1.0, -1.0):
            row = np.zeros(d + 1)
            row[i] = sign
            row[-1] = 1.0
            rows.append(row)
            rhs.append(C.box_radius)
    for g, c in zip(C.normals, C.offsets):
        rows.append(np.append(g[n:], np.abs(g).sum()))
        rhs.append(float(c - g[:n] @ x_vec))
    cost = np.zeros(d + 1)
    cost[-1] = -1.0
    result = lp_minimize(
        cost,
        np.array(rows).reshape(-1, d + 1),
        np.array(rhs),
        np.append(np.full(d, -C.box_radius), 0.0),
        np.append(np.full(d, C.box_radius), x_room),
    )
    if not result.is_optimal:
        return None
    return float(result.x[-1]), result.x[:d]


def audit_class(inst: Instance, guard: int = FIBER_GUARD) -> ClassAudit:
    """Check box containment, a full-dimensional ρ-deep point on the optimal fiber, and M."""
    box_contained = inst.feasible.box_radius <= inst.params.R + NORMAL_TOLERANCE
    lipschitz = inst.objective.fiber_lipschitz(inst.n)
    optimum = brute_force_opt(inst, guard)
    radius = 0.0
    fiber = None
    if optimum.feasible:
        fiber = optimum.point.x
        deepest = max_deep_radius(inst.feasible, fiber)
        radius = deepest[0] if deepest else 0.0
    return ClassAudit(
        box_contained=box_contained,
        optimal_fiber=fiber,
        deep_radius=radius,
        deep_ok=optimum.feasible and radius >= inst.params.rho - 1e-9,
        lipschitz=lipschitz,
        lipschitz_ok=lipschitz <= inst.params.M + 1e-9,
    )
