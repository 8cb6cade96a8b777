"""Centerpoint cutting-plane solver over a mixed-integer version polytope."""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import (
    DEFAULT_CENTERPOINT_DIRECTIONS,
    DEFAULT_CENTERPOINT_SAMPLES,
    EPS_PRIME_DIVISOR,
    FIBER_GUARD,
    MIN_ACCEPTANCE_RATE,
)
from app.core.exceptions import EmptyVersionSet, NoFeasibleFound, StructuralError
from app.core.instances import (
    FirstOrderInfo,
    InfoKind,
    Instance,
    InstanceParams,
    MixedPoint,
    Polytope,
    as_vector,
    integer_fibers,
)
from app.core.oracles import FullForm, Oracle, QueryCounter, Target, Transcript, budget_report
from app.core.recovery import RecoveryMode, make_approx_separation, make_approx_value_cut, select_best
from app.core.simplex import lp_minimize
from app.schemas.solver import SolverReport

logger = logging.getLogger(__name__)

MIN_FIBER_SAMPLES = 64


class OracleMode(StrEnum):
    EXACT = "exact"
    BIT = "bit"
    DIR = "dir"


@dataclass(frozen=True)
class SolverConfig:
    eps: float
    mode: OracleMode = OracleMode.EXACT
    seed: int = 0
    max_iterations: int | None = None
    centerpoint_samples: int = DEFAULT_CENTERPOINT_SAMPLES
    centerpoint_directions: int = DEFAULT_CENTERPOINT_DIRECTIONS
    rho_prime: float | None = None

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise StructuralError("eps must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise StructuralError("the iteration cap must be at least 1")
        if self.centerpoint_samples < 1 or self.centerpoint_directions < 1:
            raise StructuralError("sample and direction counts must be positive")
        object.__setattr__(self, "mode", OracleMode(self.mode))

    @property
    def eps_prime(self) -> float:
        return self.eps / EPS_PRIME_DIVISOR

    def rho_prime_for(self, params: InstanceParams) -> float:
        """eps' ρ / (4MR) unless overridden."""
        if self.rho_prime is not None:
            return self.rho_prime
        return self.eps_prime * params.rho / (4.0 * params.M * params.R)


def iteration_budget(params: InstanceParams, eps: float, rho_prime: float | None = None) -> int:
    """T = ⌈2^n (n+d)(d+1) ln(2R / min(ρ', 1))⌉, or ⌈e d ln(...)⌉ when n = 0.

    Args:
        params: Class parameters of the instance
        eps: Target accuracy
        rho_prime: Depth used by the cuts; defaults to (eps/6) ρ / (4MR)

    Raises:
        StructuralError: If the depth is not positive
    """
    if rho_prime is None:
        rho_prime = SolverConfig(eps=eps).rho_prime_for(params)
    if rho_prime <= 0:
        raise StructuralError("the iteration budget needs a positive depth rho'")
    log_term = math.log(2.0 * params.R / min(rho_prime, 1.0))
    if params.n == 0:
        budget = math.e * params.d * log_term
    else:
        budget = 2**params.n * params.dim * (params.d + 1) * log_term
    return max(1, math.ceil(budget))


class VersionPolytope:
    """Box plus accumulated cuts; only ever shrinks."""

    def __init__(self, n: int, d: int, box_radius: float) -> None:
        self.n = n
        self.d = d
        self.polytope = Polytope.box(n + d, box_radius)

    @property
    def dim(self) -> int:
        return self.n + self.d

    @property
    def n_cuts(self) -> int:
        return self.polytope.n_halfspaces

    def add_cut(self, normal: ArrayLike, through: "MixedPoint | ArrayLike") -> None:
        """Keep {z' : ⟨normal, z'⟩ ≤ ⟨normal, through⟩}."""
        normal = np.asarray(normal, dtype=float).ravel()
        offset = float(normal @ as_vector(through, self.dim))
        self.polytope = self.polytope.with_cut(normal, offset)

    def contains(self, z: "MixedPoint | ArrayLike") -> bool:
        return self.polytope.contains(z)


@dataclass
class FiberBox:
    lo: np.ndarray
    hi: np.ndarray
    anchor: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))


@dataclass
class FiberCache:
    """Bounding boxes of fiber slices; None marks a slice found empty (it stays empty)."""

    boxes: dict[tuple[int, ...], FiberBox | None] = field(default_factory=dict)
    lp_solves: int = 0


@dataclass(frozen=True)
class CenterpointEstimate:
    point: MixedPoint
    depth: float
    volume: float


def _fiber_box(P: Polytope, x: tuple[int, ...], d: int, cache: FiberCache) -> FiberBox | None:
    constraints = P.fiber_constraints(x)
    if constraints is None:
        return None
    A = np.array([g for g, _ in constraints]).reshape(-1, d)
    b = np.array([c for _, c in constraints])
    lo = np.empty(d)
    hi = np.empty(d)
    extremes = []
    for i in range(d):
        for sign, bound in ((1.0, lo), (-1.0, hi)):
            cost = np.zeros(d)
            cost[i] = sign
            cache.lp_solves += 1
            result = lp_minimize(cost, A, b, -P.box_radius, P.box_radius)
            if not result.is_optimal:
                return None
            bound[i] = result.x[i]
            extremes.append(result.x)
    return FiberBox(lo=lo, hi=np.maximum(hi, lo), anchor=np.mean(extremes, axis=0))


def _sample_fiber(
    P: Polytope,
    x: tuple[int, ...],
    box: FiberBox,
    count: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    x_part = np.broadcast_to(np.asarray(x, dtype=float), (count, len(x)))
    y_part = rng.uniform(box.lo, box.hi, size=(count, box.lo.size))
    points = np.hstack((x_part, y_part))
    accepted = points[P.contains_many(points)]
    return accepted, count


def _fiber_samples(
    P: VersionPolytope,
    samples: int,
    rng: np.random.Generator,
    cache: FiberCache,
) -> list[tuple[tuple[int, ...], np.ndarray, float]]:
    """(fiber, accepted points, estimated d-volume) for every live fiber."""
    n, d = P.n, P.d
    polytope = P.polytope
    fibers = list(integer_fibers(n, polytope.box_radius, FIBER_GUARD))
    if d == 0:
        return [
            (x, np.asarray([x], dtype=float), 1.0)
            for x in fibers
            if polytope.contains(np.asarray(x, dtype=float))
        ]

    live = [x for x in fibers if cache.boxes.get(x, ...) is not None]
    per_fiber = max(samples // max(len(live), 1), MIN_FIBER_SAMPLES)
    results = []
    for x in live:
        if x not in cache.boxes:
            cache.boxes[x] = _fiber_box(polytope, x, d, cache)
            if cache.boxes[x] is None:
                continue
        box = cache.boxes[x]
        accepted, drawn = _sample_fiber(polytope, x, box, per_fiber, rng)
        if len(accepted) < MIN_ACCEPTANCE_RATE * drawn:
            refreshed = _fiber_box(polytope, x, d, cache)
            cache.boxes[x] = refreshed
            if refreshed is None:
                continue
            box = refreshed
            accepted, drawn = _sample_fiber(polytope, x, box, per_fiber, rng)
        if len(accepted):
            results.append((x, accepted, box.volume * len(accepted) / drawn))
        else:
            # Thin slice: keep one interior point carrying at most the undetected mass.
            anchor = np.concatenate((np.asarray(x, dtype=float), box.anchor))
            results.append((x, anchor[None, :], box.volume / (drawn + 1)))
    return results


def _weighted_median(values: np.ndarray, weights: np.ndarray) -> float:
    order = np.argsort(values, kind="stable")
    cumulative = np.cumsum(weights[order])
    return float(values[order][np.searchsorted(cumulative, 0.5 * cumulative[-1])])


def estimate_centerpoint(
    P: VersionPolytope,
    samples: int = DEFAULT_CENTERPOINT_SAMPLES,
    seed: int | np.random.SeedSequence = 0,
    directions: int = DEFAULT_CENTERPOINT_DIRECTIONS,
    cache: FiberCache | None = None,
) -> CenterpointEstimate:
    """Sampled minimax centerpoint of the mixed-integer points of P.

    Candidates are the centroids of every live fiber slice plus the centroid of all
    samples placed on the volume-weighted median fiber. The chosen candidate maximizes
    the smallest sampled mass on either side of a hyperplane through it, over a fixed
    set of random directions.

    Args:
        P: Version polytope
        samples: Rejection samples, split across live fibers
        seed: Seed or SeedSequence; the estimate is deterministic given it
        directions: Number of random unit directions used for ranking
        cache: Fiber bounding boxes reused between calls on a shrinking P

    Returns:
        CenterpointEstimate with the chosen point, its sampled depth and the total volume

    Raises:
        EmptyVersionSet: If no fiber of P has mass left
    """
    rng = np.random.default_rng(seed)
    cache = cache if cache is not None else FiberCache()
    per_fiber = _fiber_samples(P, samples, rng, cache)
    if not per_fiber:
        raise EmptyVersionSet("no mixed-integer point left in the version polytope")

    points = np.vstack([pts for _, pts, _ in per_fiber])
    weights = np.concatenate([np.full(len(pts), vol / len(pts)) for _, pts, vol in per_fiber])
    total = float(weights.sum())
    if total <= 0:
        raise EmptyVersionSet("the version polytope has no volume left")

    candidates = [pts.mean(axis=0) for _, pts, _ in per_fiber]
    if P.n:
        fiber_x = np.array([x for x, _, _ in per_fiber], dtype=float)
        fiber_mass = np.array([vol for _, _, vol in per_fiber])
        median_x = [round(_weighted_median(fiber_x[:, j], fiber_mass)) for j in range(P.n)]
        y_centroid = (weights[:, None] * points[:, P.n :]).sum(axis=0) / total
        candidates.append(np.concatenate((np.asarray(median_x, dtype=float), y_centroid)))
    candidates = np.array(candidates)

    units = rng.standard_normal((directions, P.dim))
    units /= np.linalg.norm(units, axis=1, keepdims=True)
    projected = points @ units.T
    best_index, best_depth = 0, -1.0
    for index, candidate in enumerate(candidates):
        level = candidate @ units.T
        below = weights @ (projected <= level)
        above = weights @ (projected >= level)
        depth = float(np.minimum(below, above).min()) / total
        if depth > best_depth:
            best_index, best_depth = index, depth
    point = MixedPoint.from_vector(candidates[best_index], P.n)
    return CenterpointEstimate(point=point, depth=min(max(best_depth, 0.0), 1.0), volume=total)


def approx_centerpoint(
    P: VersionPolytope,
    n: int,
    d: int,
    samples: int = DEFAULT_CENTERPOINT_SAMPLES,
    seed: int = 0,
) -> MixedPoint:
    if (P.n, P.d) != (n, d):
        raise StructuralError(f"version polytope is over (n, d) = {(P.n, P.d)}, not {(n, d)}")
    return estimate_centerpoint(P, samples=samples, seed=seed).point


class CuttingPlaneRun:
    """Mutable state shared by the solver loop and its query-strategy form."""

    def __init__(self, params: InstanceParams, config: SolverConfig, budget: int) -> None:
        self.params = params
        self.config = config
        self.budget = budget
        self.version = VersionPolytope(params.n, params.d, params.R)
        self.cache = FiberCache()
        self.pool: list[MixedPoint] = []
        self.pool_values: list[float | None] = []
        self.iterations = 0
        self.min_depth = 1.0
        self.stop_reason: str | None = None

    @property
    def finished(self) -> bool:
        return self.stop_reason is not None

    def next_point(self) -> MixedPoint | None:
        if self.finished:
            return None
        if self.iterations >= self.budget:
            self.stop_reason = "budget"
            return None
        seed = np.random.SeedSequence([self.config.seed, self.iterations])
        try:
            estimate = estimate_centerpoint(
                self.version,
                samples=self.config.centerpoint_samples,
                seed=seed,
                directions=self.config.centerpoint_directions,
                cache=self.cache,
            )
        except EmptyVersionSet as e:
            logger.info(f"Stopping after {self.iterations} iterations: {e}")
            self.stop_reason = "version_set_empty"
            return None
        self.iterations += 1
        self.min_depth = min(self.min_depth, estimate.depth)
        return estimate.point

    def separation_cut(self, z: MixedPoint, normal: np.ndarray) -> None:
        self.version.add_cut(normal, z)
        logger.debug(f"Iteration {self.iterations}: separation cut at {z}")

    def value_cut(self, z: MixedPoint, normal: np.ndarray, value: float | None = None) -> None:
        self.pool.append(z)
        self.pool_values.append(value)
        if not np.any(normal):
            logger.info(f"Iteration {self.iterations}: zero subgradient at {z}, stopping")
            self.stop_reason = "stationary"
            return
        self.version.add_cut(normal, z)
        logger.debug(f"Iteration {self.iterations}: value cut at {z}")

    def best_exact(self) -> tuple[MixedPoint, float]:
        if not self.pool:
            raise NoFeasibleFound(f"no feasible point found in {self.iterations} iterations")
        index = min(range(len(self.pool)), key=lambda i: self.pool_values[i])
        return self.pool[index], self.pool_values[index]


def solve(
    inst: Instance,
    config: SolverConfig,
    counter: QueryCounter | None = None,
    transcript: Transcript | None = None,
) -> SolverReport:
    """Run the centerpoint cutting-plane method against one oracle mode.

    Args:
        inst: Instance to minimize
        config: Accuracy, oracle mode, seed and sampling parameters
        counter: Receives every query; a fresh one is used when omitted
        transcript: Optional query log

    Returns:
        SolverReport of the selected point

    Raises:
        NoFeasibleFound: If no feasible point was recorded
    """
    counter = counter if counter is not None else QueryCounter()
    rho_prime = config.rho_prime_for(inst.params)
    budget = config.max_iterations or iteration_budget(inst.params, config.eps, rho_prime)
    run = CuttingPlaneRun(inst.params, config, budget)
    oracle = Oracle(inst, counter, transcript)
    mode = config.mode
    logger.info(f"Solving {inst.label!r} in {mode} mode with budget {budget}")

    while (z := run.next_point()) is not None:
        if mode is OracleMode.EXACT:
            info = oracle.ask(z, Target.FIRST_ORDER, FullForm())
            if info.kind is InfoKind.SEPARATION:
                run.separation_cut(z, info.vector)
            else:
                run.value_cut(z, info.vector, info.value)
            continue
        recovery = RecoveryMode(mode.value)
        separation = make_approx_separation(inst, z, rho_prime, recovery, counter, transcript)
        if np.any(separation.vector):
            run.separation_cut(z, separation.vector)
        else:
            normal = make_approx_value_cut(inst, z, config.eps_prime, recovery, counter, transcript)
            run.value_cut(z, normal)

    if not run.pool:
        logger.error(f"No feasible point for {inst.label!r} after {run.iterations} iterations")
        raise NoFeasibleFound(f"no feasible point found in {run.iterations} iterations")
    if mode is OracleMode.EXACT:
        solution, _ = run.best_exact()
    else:
        index = select_best(inst, run.pool, config.eps_prime, RecoveryMode(mode.value), counter, transcript)
        solution = run.pool[index]

    report = budget_report(counter)
    return SolverReport(
        label=inst.label,
        x=list(solution.x),
        y=[float(v) for v in solution.y],
        value=inst.objective(solution),
        iterations=run.iterations,
        iteration_budget=budget,
        stop_reason=run.stop_reason or "budget",
        query_total=report.total,
        queries=report,
        feasible_pool_size=len(run.pool),
        min_depth=run.min_depth,
        mode=mode.value,
        eps=config.eps,
        seed=config.seed,
    )


class CenterpointStrategy:
    """Exact full-information centerpoint method as a propose/observe/answer strategy.

    Each proposal costs one first-order query, so `budget` is also the query budget.
    """

    name = "exact-centerpoint"

    def __init__(self, params: InstanceParams, config: SolverConfig, budget: int | None = None) -> None:
        if budget is None:
            budget = config.max_iterations or iteration_budget(params, config.eps, config.rho_prime_for(params))
        self.run = CuttingPlaneRun(params, config, budget)

    @property
    def budget(self) -> int:
        return self.run.budget

    @property
    def finished(self) -> bool:
        return self.run.finished

    def propose(self) -> MixedPoint | None:
        return self.run.next_point()

    def observe(self, z: MixedPoint, info: FirstOrderInfo) -> None:
        if info.kind is InfoKind.SEPARATION:
            if np.any(info.vector):
                self.run.separation_cut(z, info.vector)
            return
        self.run.value_cut(z, info.vector, info.value)

    def answer(self) -> MixedPoint:
        return self.run.best_exact()[0]
