"""Euclidean projections by Dykstra sweeps, separator tilting and online approximate projection."""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import CAP_CONSTANT, PROJECTION_MAX_SWEEPS, PROJECTION_TOLERANCE, TILT_TOLERANCE
from app.core.exceptions import StructuralError, TiltError
from app.core.instances import Polytope

logger = logging.getLogger(__name__)


def polytope_rows(P: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """Box faces followed by the stored halfspaces, as (normals, offsets)."""
    eye = np.eye(P.dim)
    normals = np.vstack((eye, -eye, P.normals))
    offsets = np.concatenate((np.full(2 * P.dim, P.box_radius), P.offsets))
    return normals, offsets


def dykstra(
    point: ArrayLike,
    normals: np.ndarray,
    offsets: np.ndarray,
    tol: float = PROJECTION_TOLERANCE,
    max_sweeps: int = PROJECTION_MAX_SWEEPS,
) -> np.ndarray:
    """Projection of point onto {z : normals z ≤ offsets} by Dykstra's alternating projections.

    Stops once a full sweep moves the iterate by less than tol and no row is violated
    by more than tol, or after max_sweeps sweeps.
    """
    x = np.asarray(point, dtype=float).ravel().copy()
    if normals.shape[0] == 0:
        return x
    sq_norms = np.einsum("ij,ij->i", normals, normals)
    increments = np.zeros((normals.shape[0], x.size))
    for sweep in range(max_sweeps):
        start = x.copy()
        for j, (a, b) in enumerate(zip(normals, offsets)):
            y = x + increments[j]
            violation = float(a @ y) - b
            x = y - (violation / sq_norms[j]) * a if violation > 0 and sq_norms[j] > 0 else y
            increments[j] = y - x
        if np.linalg.norm(x - start) < tol and float((normals @ x - offsets).max()) < tol:
            return x
    logger.warning(f"Dykstra stopped after {max_sweeps} sweeps without meeting tolerance {tol}")
    return x


def project(P: Polytope, point: ArrayLike) -> np.ndarray:
    normals, offsets = polytope_rows(P)
    return dykstra(point, normals, offsets)


def distance(P: Polytope, point: ArrayLike) -> float:
    point = np.asarray(point, dtype=float).ravel()
    return float(np.linalg.norm(point - project(P, point)))


def tilt_separator(g_hat: ArrayLike, x: ArrayLike, Y: Sequence[ArrayLike]) -> np.ndarray:
    """Nearest vector to g_hat whose halfspace through x keeps every point of Y, normalized.

    Args:
        g_hat: Reported separator
        x: Point the halfspace passes through
        Y: Points known to be feasible

    Returns:
        Unit normal g with ⟨g, y⟩ ≤ ⟨g, x⟩ for all y in Y; g_hat itself when nothing is violated

    Raises:
        TiltError: If only the zero vector satisfies the constraints near g_hat
    """
    g_hat = np.asarray(g_hat, dtype=float).ravel()
    x = np.asarray(x, dtype=float).ravel()
    norm = float(np.linalg.norm(g_hat))
    if norm == 0.0:
        raise StructuralError("cannot tilt a zero separator")
    g_hat = g_hat / norm
    if not Y:
        return g_hat
    rows = np.array([np.asarray(y, dtype=float).ravel() - x for y in Y])
    if float((rows @ g_hat).max()) <= 0.0:
        return g_hat
    g = dykstra(g_hat, rows, np.zeros(len(rows)), tol=TILT_TOLERANCE)
    g_norm = float(np.linalg.norm(g))
    if g_norm <= TILT_TOLERANCE:
        logger.error(f"Tilt cone at {x} collapsed to zero")
        raise TiltError(f"no halfspace through {x} near the reported separator keeps the known points")
    logger.debug(f"Tilted separator by {float(np.linalg.norm(g - g_hat)):.3g}")
    return g / g_norm


@dataclass
class ProjectionState:
    """Outer set P ⊇ C with every returned projection and its error bound."""

    P: Polytope
    delta_cap: float
    threshold: float
    returned: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    error_track: list[float] = field(default_factory=list)
    cuts: int = 0

    @classmethod
    def start(cls, P: Polytope, delta_cap: float, threshold: float | None = None) -> "ProjectionState":
        if delta_cap < 0:
            raise StructuralError("the projection error cap must be non-negative")
        if threshold is None:
            threshold = math.sqrt(diameter(P) * delta_cap)
        return cls(P=P, delta_cap=delta_cap, threshold=threshold)

    @property
    def last_error(self) -> float:
        return self.error_track[-1] if self.error_track else 0.0


def diameter(P: Polytope) -> float:
    """Euclidean diameter 2R√dim of the bounding box."""
    return 2.0 * P.box_radius * math.sqrt(P.dim)


def project_online(state: ProjectionState, x: ArrayLike, pi_tilde: ArrayLike) -> np.ndarray:
    """Turn an approximate projection of x onto C into one that stays exact for P.

    pi_tilde is first re-projected onto P. Far from x (distance ≥ threshold) a
    halfspace with outer normal x - π̃, pushed out by s + ε_prev, is added and x is
    projected onto the new P; otherwise P is kept and x is projected onto it.

    Returns:
        π̄, which is also recorded in state with its error bound ε
    """
    x = np.asarray(x, dtype=float).ravel()
    p = project(state.P, pi_tilde)
    delta = 2.0 * state.delta_cap
    dist = float(np.linalg.norm(x - p))
    D = diameter(state.P)
    previous = state.last_error

    if dist >= state.threshold and dist > 0.0:
        u = (x - p) / dist
        s = 4.0 * D * delta / dist + delta
        push = s + previous
        state.P = state.P.with_cut(u, float(u @ p) + push)
        state.cuts += 1
        pi_bar = project(state.P, x)
        reach = max(D, dist + delta)
        error = max(2.0 * push + delta, CAP_CONSTANT * math.sqrt(reach * push) + delta)
        logger.debug(f"Projection cut at distance {dist:.4g}, push {push:.3g}, error {error:.3g}")
    else:
        pi_bar = project(state.P, x)
        error = max(previous, 2.0 * state.threshold + delta)

    state.returned.append((x, pi_bar))
    state.error_track.append(error)
    return pi_bar


def verify_stability(state: ProjectionState, tol: float = 1e-6) -> bool:
    """Every returned π̄ is still the projection of its x onto the final P."""
    return all(np.allclose(project(state.P, x), pi_bar, rtol=0.0, atol=tol) for x, pi_bar in state.returned)


@dataclass
class ProjectionAudit:
    steps: int
    cuts: int
    max_excess: float
    contains_C: bool
    stable: bool


def audit_projection(
    C: Polytope,
    points: np.ndarray,
    delta_cap: float,
    seed: int = 0,
    samples: int = 1000,
    noise: Callable[[np.random.Generator, int], np.ndarray] | None = None,
) -> ProjectionAudit:
    """Feed noisy projections onto C through project_online and check every guarantee.

    Noise defaults to a uniform direction scaled by U(0, delta_cap).

    Returns:
        ProjectionAudit with max(dist(π̄_i, C) - ε_i), whether P ⊇ C held on sampled points
        of C after every step, and the final stability check
    """
    rng = np.random.default_rng(seed)
    if noise is None:

        def noise(generator: np.random.Generator, dim: int) -> np.ndarray:
            direction = generator.standard_normal(dim)
            return direction / np.linalg.norm(direction) * generator.uniform(0.0, delta_cap)

    box = Polytope.box(C.dim, C.box_radius)
    state = ProjectionState.start(box, delta_cap)
    inner = _sample_inside(C, samples, rng)
    max_excess = -np.inf
    contains_C = True
    for x in points:
        pi_tilde = project(C, x) + noise(rng, C.dim)
        pi_bar = project_online(state, x, pi_tilde)
        max_excess = max(max_excess, distance(C, pi_bar) - state.last_error)
        if inner.size and not np.all(state.P.contains_many(inner, tol=1e-9)):
            contains_C = False
    logger.info(f"Projection audit: {len(points)} steps, {state.cuts} cuts, max excess {max_excess:.3g}")
    return ProjectionAudit(
        steps=len(points),
        cuts=state.cuts,
        max_excess=float(max_excess) if len(points) else 0.0,
        contains_C=contains_C,
        stable=verify_stability(state),
    )


def _sample_inside(C: Polytope, samples: int, rng: np.random.Generator) -> np.ndarray:
    candidates = rng.uniform(-C.box_radius, C.box_radius, size=(samples, C.dim))
    return candidates[C.contains_many(candidates, tol=0.0)]
