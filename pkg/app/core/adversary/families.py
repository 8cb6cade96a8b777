"""Finite continuous families whose members have pairwise disjoint eps-solution sets."""

import itertools
import logging
from collections.abc import Sequence

import numpy as np

from app.core.exceptions import ConstructionError, StructuralError
from app.core.instances import Instance, InstanceParams, MaxAffineFunction, Polytope, brute_force_opt
from app.core.simplex import lp_feasible

logger = logging.getLogger(__name__)

FAMILY_OPT = 0.0


def center_spacing(M: float, eps: float) -> float:
    """Axis spacing of the centers; twice the eps-solution radius plus eps."""
    return 2.0 * eps / M + eps


def axis_positions(M: float, R: float, eps: float) -> list[float]:
    """s, -s, 2s, -2s, ... kept inside [-R/2, R/2]."""
    s = center_spacing(M, eps)
    positions = []
    level = 1
    while level * s <= R / 2.0 + 1e-12:
        positions.extend((level * s, -level * s))
        level += 1
    return positions


def linf_cone(center: np.ndarray, M: float, label: str = "") -> MaxAffineFunction:
    """y ↦ M ‖y - center‖∞ as 2d affine pieces."""
    d = center.size
    slopes = np.vstack((M * np.eye(d), -M * np.eye(d)))
    offsets = np.concatenate((-M * center, M * center))
    return MaxAffineFunction(slopes, offsets, label=label)


def disjoint_solutions(f: MaxAffineFunction, g: MaxAffineFunction, eps: float, R: float, opt: float = FAMILY_OPT) -> bool:
    """True iff no y in the box has f(y) ≤ opt + eps and g(y) ≤ opt + eps."""
    constraints = [(a, opt + eps - b) for h in (f, g) for a, b in zip(h.slopes, h.offsets)]
    return lp_feasible(constraints, R, dim=f.dim) is None


def ny_hard_family(d: int, M: float, R: float, eps: float, k: int) -> list[Instance]:
    """k unconstrained members M ‖y - c_j‖∞ with common optimum 0 and disjoint eps-solutions.

    Centers are taken from the grid of axis positions, nearest levels first. Every
    pair is checked by LP before the family is returned.

    Args:
        d: Continuous dimension
        M: Lipschitz constant (ℓ∞)
        R: Box half-width
        eps: Accuracy the family must resist
        k: Number of members

    Returns:
        List of k instances with n = 0

    Raises:
        ConstructionError: If the box cannot hold k centers or a pair overlaps
    """
    if d < 1 or k < 1:
        raise StructuralError("need d ≥ 1 and k ≥ 1")
    positions = axis_positions(M, R, eps)
    ranked = sorted(
        itertools.product(range(len(positions)), repeat=d),
        key=lambda index: (max(index), index),
    )
    if len(ranked) < k:
        raise ConstructionError(f"only {len(ranked)} centers fit in the box, {k} requested")
    params = InstanceParams(n=0, d=d, R=R, rho=R, M=M)
    box = Polytope.box(d, R)
    members = []
    for j, index in enumerate(ranked[:k]):
        center = np.array([positions[i] for i in index])
        label = f"cone-{j}"
        members.append(Instance(linf_cone(center, M, label), box, params, label))
    for f, g in itertools.combinations(members, 2):
        if not disjoint_solutions(f.objective, g.objective, eps, R):
            logger.error(f"Members {f.label} and {g.label} share an eps-solution")
            raise ConstructionError(f"{f.label} and {g.label} share an eps-approximate solution")
    logger.info(f"Built hard family of {k} members in d={d} (eps={eps}, M={M}, R={R})")
    return members


def check_game_family(family: Sequence[Instance], eps: float) -> list[Instance]:
    """Validate a loaded family for the adversary game and return it as a list.

    Members must be continuous instances of one dimension, share the optimum value 0
    and have pairwise disjoint eps-solution sets.

    Raises:
        StructuralError: If any of these fails
    """
    members = list(family)
    if not members:
        raise StructuralError("the game family is empty")
    if any(inst.n != 0 or inst.d != members[0].d for inst in members):
        raise StructuralError("game family members must be continuous instances of one dimension")
    for inst in members:
        optimum = brute_force_opt(inst)
        if not optimum.feasible or abs(optimum.value - FAMILY_OPT) > 1e-9:
            raise StructuralError(f"{inst.label!r} does not attain the common optimum {FAMILY_OPT}")
    R = min(inst.params.R for inst in members)
    for f, g in itertools.combinations(members, 2):
        if not disjoint_solutions(f.objective, g.objective, eps, R):
            raise StructuralError(f"{f.label} and {g.label} share an eps-approximate solution")
    return members
