"""Run exact-oracle strategies against inexact oracles through the under/outer models."""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Literal, Protocol

import numpy as np

from app.core.centerpoint import CenterpointStrategy, SolverConfig
from app.core.exceptions import NoFeasibleFound, StructuralError
from app.core.inexact.outer import OuterModel
from app.core.inexact.projection import audit_projection
from app.core.inexact.under import UnderModel
from app.core.instances import (
    FirstOrderInfo,
    InfoKind,
    Instance,
    InstanceParams,
    MixedPoint,
    brute_force_opt,
    exact_chart,
    gradient_bound,
)
from app.core.oracles import QueryCounter, QueryKind, budget_report
from app.schemas.robust import ProjectionAuditReport, RobustReport

logger = logging.getLogger(__name__)

Algo = Literal["subgradient", "centerpoint"]


class ExactStrategy(Protocol):
    name: str

    @property
    def finished(self) -> bool: ...

    def propose(self) -> MixedPoint | None: ...

    def observe(self, z: MixedPoint, info: FirstOrderInfo) -> None: ...

    def answer(self) -> MixedPoint: ...


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    direction = rng.standard_normal(dim)
    return direction / np.linalg.norm(direction)


class NoisyOracle:
    """Full first-order answers with bounded value noise, subgradient noise and rotated separators.

    Subgradient noise has norm at most eta_g / D with D = 2R√dim, so a reported affine
    is off by at most eta_f + eta_g anywhere in the box.
    """

    def __init__(self, inst: Instance, eta_f: float, eta_g: float, seed: int = 0, counter: QueryCounter | None = None) -> None:
        if eta_f < 0 or eta_g < 0:
            raise StructuralError("noise levels must be non-negative")
        self.inst = inst
        self.eta_f = eta_f
        self.eta_g = eta_g
        self.rng = np.random.default_rng(seed)
        self.counter = counter if counter is not None else QueryCounter()
        self.diameter = 2.0 * inst.params.R * math.sqrt(inst.dim)

    def first_order(self, z: MixedPoint) -> FirstOrderInfo:
        self.counter.record(QueryKind.FULL)
        chart = exact_chart(self.inst, z)
        dim = self.inst.dim
        if not chart.feasible:
            rotated = chart.separation + min(self.eta_g, 0.5) * self.rng.uniform() * _unit(self.rng, dim)
            return FirstOrderInfo(InfoKind.SEPARATION, vector=rotated)
        value = chart.value + self.rng.uniform(-self.eta_f, self.eta_f)
        subgradient = chart.subgradient + self.eta_g / self.diameter * self.rng.uniform() * _unit(self.rng, dim)
        return FirstOrderInfo(InfoKind.FIRST_ORDER, vector=subgradient, value=value)


class SubgradientDescent:
    """Switching subgradient method on the box: objective steps R/(G√k), constraint steps R/√k."""

    name = "subgradient"

    def __init__(self, params: InstanceParams, rounds: int, gradient_norm: float) -> None:
        if params.n != 0:
            raise StructuralError("subgradient descent runs on continuous (n = 0) instances")
        self.params = params
        self.rounds = rounds
        self.objective_step = params.R / (max(gradient_norm, 1e-12) * math.sqrt(rounds))
        self.constraint_step = params.R / math.sqrt(rounds)
        self.z = np.zeros(params.d)
        self.iterations = 0
        self.best: tuple[float, np.ndarray] | None = None
        self.stationary = False

    @property
    def budget(self) -> int:
        return self.rounds

    @property
    def finished(self) -> bool:
        return self.stationary or self.iterations >= self.rounds

    def propose(self) -> MixedPoint | None:
        if self.finished:
            return None
        self.iterations += 1
        return MixedPoint.from_vector(self.z, 0)

    def observe(self, z: MixedPoint, info: FirstOrderInfo) -> None:
        R = self.params.R
        if info.kind is InfoKind.SEPARATION:
            norm = float(np.linalg.norm(info.vector))
            if norm > 0:
                self.z = np.clip(self.z - self.constraint_step * info.vector / norm, -R, R)
            return
        if self.best is None or info.value < self.best[0]:
            self.best = (info.value, z.vector.copy())
        if not np.any(info.vector):
            self.stationary = True
            return
        self.z = np.clip(self.z - self.objective_step * info.vector, -R, R)

    def answer(self) -> MixedPoint:
        if self.best is None:
            raise NoFeasibleFound(f"no feasible point in {self.iterations} subgradient steps")
        return MixedPoint.from_vector(self.best[1], 0)


def make_exact_strategy(inst: Instance, algo: Algo, rounds: int, seed: int = 0) -> ExactStrategy:
    match algo:
        case "subgradient":
            return SubgradientDescent(inst.params, rounds, gradient_bound(inst, ord=2))
        case "centerpoint":
            config = SolverConfig(eps=1.0, seed=seed, max_iterations=rounds)
            return CenterpointStrategy(inst.params, config, budget=rounds)
    raise StructuralError(f"unknown strategy {algo!r}")


@dataclass
class InterfaceRun:
    point: MixedPoint
    under: UnderModel
    outer: OuterModel
    counter: QueryCounter


def run_through_interface(
    inst: Instance,
    strategy: ExactStrategy,
    oracle: NoisyOracle,
) -> InterfaceRun:
    """Feed noisy answers to an exact-oracle strategy after making them globally consistent.

    Feasible reports go through the outer model first (it may still exclude the point)
    and then through the under-model, whose support at z is what the strategy sees.
    Infeasible reports reach the strategy as the outer model's (possibly tilted) separator.
    """
    under = UnderModel(inst.dim)
    outer = OuterModel(inst.dim, inst.params.R)
    while (z := strategy.propose()) is not None:
        info = oracle.first_order(z)
        if info.kind is InfoKind.SEPARATION:
            _, normal = outer.update(z.vector, False, info.vector)
            strategy.observe(z, FirstOrderInfo(InfoKind.SEPARATION, vector=normal))
            continue
        _, normal = outer.update(z.vector, True)
        if normal is not None:
            strategy.observe(z, FirstOrderInfo(InfoKind.SEPARATION, vector=normal))
            continue
        _, support = under.update(z.vector, info.value, info.vector)
        under.add_slack(oracle.eta_f + oracle.eta_g)
        strategy.observe(z, FirstOrderInfo(InfoKind.FIRST_ORDER, vector=support.slope, value=support.value))
    return InterfaceRun(strategy.answer(), under, outer, oracle.counter)


def certificate_gap(inst: Instance, under: UnderModel, point: MixedPoint) -> float:
    """Gap of point on h = max(f - slack, model) over the instance's feasible set."""
    h = under.certificate(inst.objective)
    p = inst.params
    M = max(p.M, h.fiber_lipschitz(p.n))
    certificate = Instance(h, inst.feasible, InstanceParams(p.n, p.d, p.R, p.rho, M), label="certificate")
    return h(point) - brute_force_opt(certificate).value


def robustify(
    inst: Instance,
    eta_f: float,
    eta_g: float,
    algo: Algo = "subgradient",
    rounds: int = 100,
    seed: int = 0,
    projection_points: int = 0,
    with_exact_reference: bool = True,
) -> RobustReport:
    """Run one exact-oracle strategy against an (eta_f, eta_g)-inexact oracle.

    Args:
        inst: Instance to minimize
        eta_f: Value noise level
        eta_g: Subgradient noise level
        algo: "subgradient" (n = 0 only) or "centerpoint"
        rounds: Query budget k
        seed: Noise and sampling seed
        projection_points: Points fed to the online projection harness (0 skips it)
        with_exact_reference: Also run the strategy with an exact oracle

    Returns:
        RobustReport comparing the true gap with the certificate gap plus twice the slack
        and, with the exact reference, with the exact-oracle gap plus 2k(eta_f + eta_g)
    """
    optimum = brute_force_opt(inst)
    if not optimum.feasible:
        raise NoFeasibleFound(f"{inst.label!r} has no feasible point")
    logger.info(f"Robustifying {algo} on {inst.label!r}: eta=({eta_f}, {eta_g}), {rounds} rounds")
    strategy = make_exact_strategy(inst, algo, rounds, seed)
    run = run_through_interface(inst, strategy, NoisyOracle(inst, eta_f, eta_g, seed))
    value = inst.objective(run.point)
    gap = value - optimum.value
    cert_gap = certificate_gap(inst, run.under, run.point)

    exact_gap = k_eta_ok = None
    if with_exact_reference:
        reference = run_through_interface(inst, make_exact_strategy(inst, algo, rounds, seed), NoisyOracle(inst, 0.0, 0.0, seed))
        exact_gap = inst.objective(reference.point) - optimum.value
        # each of the k answers is off by at most eta_f + eta_g anywhere in the box
        allowance = 2.0 * run.counter.total * (eta_f + eta_g)
        k_eta_ok = gap <= exact_gap + allowance + 1e-9

    projection = None
    if projection_points:
        rng = np.random.default_rng(np.random.SeedSequence([seed, projection_points]))
        points = rng.uniform(-inst.params.R, inst.params.R, size=(projection_points, inst.dim))
        audit = audit_projection(inst.feasible, points, delta_cap=max(eta_g, 1e-9), seed=seed)
        projection = ProjectionAuditReport(
            steps=audit.steps,
            cuts=audit.cuts,
            max_excess=audit.max_excess,
            contains_C=audit.contains_C,
            stable=audit.stable,
        )

    slack = run.under.accumulated_slack
    return RobustReport(
        label=inst.label,
        algo=algo,
        rounds=rounds,
        eta_f=eta_f,
        eta_g=eta_g,
        x=list(run.point.x),
        y=[float(v) for v in run.point.y],
        value=value,
        gap=gap,
        certificate_gap=cert_gap,
        exact_gap=exact_gap,
        k_eta_ok=k_eta_ok,
        slack=slack,
        bound_ok=gap <= cert_gap + 2.0 * slack + 1e-9,
        model_consistent=run.under.consistent(),
        under_cases=dict(Counter(case.value for case in run.under.cases)),
        outer_cases=dict(Counter(case.value for case in run.outer.cases)),
        queries=budget_report(run.counter),
        projection=projection,
    )
