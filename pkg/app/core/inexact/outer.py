"""Approximate outer approximation of a feasible set from inexact separation reports."""

import logging
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.exceptions import StructuralError
from app.core.inexact.projection import tilt_separator
from app.core.instances import Polytope, separate

logger = logging.getLogger(__name__)


class OuterCase(StrEnum):
    KEPT = "i"
    EXCLUDED = "ii"
    CUT = "iii"
    TILTED = "iv"


class OuterModel:
    """Box intersected with every accepted cut, plus the points reported feasible."""

    def __init__(self, dim: int, box_radius: float) -> None:
        self.polytope = Polytope.box(dim, box_radius)
        self.known_feasible: list[np.ndarray] = []
        self.cases: list[OuterCase] = []

    @property
    def dim(self) -> int:
        return self.polytope.dim

    def contains(self, z: ArrayLike) -> bool:
        return self.polytope.contains(z)

    def update(self, x: ArrayLike, feasible: bool, approx_halfspace: ArrayLike | None = None) -> tuple[OuterCase, np.ndarray | None]:
        """Fold one feasibility report at x into the model.

        Args:
            x: Query point
            feasible: Reported flag
            approx_halfspace: Reported separator, present iff the flag is infeasible

        Returns:
            The case taken and the normal the caller should treat as the separator at x
            (None when x stays feasible)
        """
        x = np.asarray(x, dtype=float).ravel()
        if feasible != (approx_halfspace is None):
            raise StructuralError("a separator must accompany exactly the infeasible reports")

        if feasible:
            if self.polytope.contains(x):
                self.known_feasible.append(x)
                return self._record(OuterCase.KEPT, x), None
            normal = separate(self.polytope, x).vector
            return self._record(OuterCase.EXCLUDED, x), normal

        normal = np.asarray(approx_halfspace, dtype=float).ravel()
        case = OuterCase.CUT
        if any(float(normal @ (y - x)) > 0.0 for y in self.known_feasible):
            normal = tilt_separator(normal, x, self.known_feasible)
            case = OuterCase.TILTED
        self.polytope = self.polytope.with_cut(normal, float(normal @ x))
        return self._record(case, x), normal

    def _record(self, case: OuterCase, x: np.ndarray) -> OuterCase:
        self.cases.append(case)
        logger.debug(f"Outer-model case {case.value} at {x}")
        return case
