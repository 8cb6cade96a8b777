"""Instance files and the bundled instance suite."""

import logging
import math
from collections.abc import Iterable
from pathlib import Path

import numpy as np

from app.core.exceptions import ConstructionError
from app.core.instances import (
    Instance,
    InstanceParams,
    MaxAffineFunction,
    Polytope,
    brute_force_opt,
    max_deep_radius,
)
from app.schemas.instance import InstanceFile

logger = logging.getLogger(__name__)

SUITE_RADIUS = 1.5
SUITE_MIN_RHO = 0.1
SUITE_MAX_RHO = 0.5
SUITE_ATTEMPTS = 50


def instance_from_file(model: InstanceFile) -> Instance:
    dim = model.n + model.d
    halfspaces = [(row[:dim], row[dim]) for row in model.halfspaces]
    return Instance(
        objective=MaxAffineFunction.from_pieces(model.pieces, label=model.label),
        feasible=Polytope.from_halfspaces(dim, model.R, halfspaces),
        params=InstanceParams(n=model.n, d=model.d, R=model.R, rho=model.rho, M=model.M),
        label=model.label,
    )


def instance_to_file(inst: Instance) -> InstanceFile:
    p = inst.params
    return InstanceFile(
        label=inst.label,
        n=p.n,
        d=p.d,
        R=p.R,
        rho=p.rho,
        M=p.M,
        pieces=inst.objective.to_pieces(),
        halfspaces=[[*map(float, g), float(c)] for g, c in inst.feasible.halfspaces],
    )


def load_instance(path: str | Path) -> Instance:
    """Read and validate one instance JSON file.

    Raises:
        pydantic.ValidationError: If the file does not match the documented fields
        StructuralError: If the parsed instance violates its class parameters
    """
    text = Path(path).read_text(encoding="utf-8")
    inst = instance_from_file(InstanceFile.model_validate_json(text))
    logger.debug(f"Loaded instance {inst.label!r} from {path}")
    return inst


def dump_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(instance_to_file(inst).model_dump_json(indent=2) + "\n", encoding="utf-8")


def load_family(directory: str | Path) -> list[Instance]:
    """Every *.json instance in a directory, in file-name order."""
    paths = sorted(Path(directory).glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no instance files in {directory}")
    return [load_instance(path) for path in paths]


def _random_instance(n: int, d: int, rng: np.random.Generator, label: str) -> Instance | None:
    dim = n + d
    pieces = rng.integers(2, 5)
    slopes = rng.uniform(-1.0, 1.0, size=(pieces, dim))
    offsets = rng.uniform(-0.5, 0.5, size=pieces)
    objective = MaxAffineFunction(slopes, offsets, label=label)

    center = np.concatenate((rng.integers(-1, 2, size=n).astype(float), rng.uniform(-0.5, 0.5, size=d)))
    halfspaces = []
    for _ in range(rng.integers(1, 3)):
        normal = rng.standard_normal(dim)
        normal /= np.linalg.norm(normal)
        margin = rng.uniform(0.3, 0.6)
        halfspaces.append((normal, float(normal @ center + margin * np.abs(normal).sum())))
    feasible = Polytope.from_halfspaces(dim, SUITE_RADIUS, halfspaces)

    lipschitz = objective.fiber_lipschitz(n)
    M = max(math.ceil(lipschitz * 100.0) / 100.0, 0.1)
    provisional = Instance(objective, feasible, InstanceParams(n, d, SUITE_RADIUS, 0.0, M), label)
    optimum = brute_force_opt(provisional)
    if not optimum.feasible:
        return None
    deepest = max_deep_radius(feasible, optimum.point.x)
    if deepest is None or deepest[0] < SUITE_MIN_RHO:
        return None
    rho = math.floor(min(deepest[0], SUITE_MAX_RHO) * 1000.0) / 1000.0
    return Instance(objective, feasible, InstanceParams(n, d, SUITE_RADIUS, rho, M), label)


def bundled_suite(
    n_values: Iterable[int] = (0, 1, 2),
    d_values: Iterable[int] = (1, 2, 3),
    per_cell: int = 2,
    seed: int = 0,
) -> list[Instance]:
    """Deterministic random class members with a ρ-deep ball on the optimal fiber.

    Raises:
        ConstructionError: If a cell cannot produce a valid instance
    """
    suite = []
    for n in n_values:
        for d in d_values:
            for index in range(per_cell):
                rng = np.random.default_rng(np.random.SeedSequence([seed, n, d, index]))
                label = f"suite-n{n}-d{d}-{index}"
                for _ in range(SUITE_ATTEMPTS):
                    inst = _random_instance(n, d, rng, label)
                    if inst is not None:
                        suite.append(inst)
                        break
                else:
                    logger.error(f"Could not build suite instance {label}")
                    raise ConstructionError(f"no valid instance for {label} in {SUITE_ATTEMPTS} attempts")
    logger.info(f"Built bundled suite of {len(suite)} instances")
    return suite
