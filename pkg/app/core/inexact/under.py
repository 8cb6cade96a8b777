"""Approximate under-approximation of an objective from inexact (value, subgradient) reports."""

import logging
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import AFFINE_TOLERANCE
from app.core.exceptions import StructuralError
from app.core.instances import MaxAffineFunction

logger = logging.getLogger(__name__)


class UnderCase(StrEnum):
    APPENDED = "i"
    SUPPORTED = "ii"
    SHIFTED = "iii"


@dataclass(frozen=True, eq=False)
class Support:
    """Affine y ↦ value + ⟨slope, y - point⟩ reported at point."""

    point: np.ndarray
    value: float
    slope: np.ndarray

    def __call__(self, y: ArrayLike) -> float:
        return self.value + float(self.slope @ (np.asarray(y, dtype=float) - self.point))


class UnderModel:
    """max_i L̃_i over the supports accepted so far.

    Updates never look at the noise levels; `accumulated_slack` is booked by the caller
    that knows them.
    """

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise StructuralError("an under-model needs dimension ≥ 1")
        self.dim = dim
        self.supports: list[Support] = []
        self.accumulated_slack = 0.0
        self.cases: list[UnderCase] = []

    def __len__(self) -> int:
        return len(self.supports)

    def __call__(self, y: ArrayLike) -> float:
        if not self.supports:
            return -np.inf
        return max(support(y) for support in self.supports)

    def active(self, y: ArrayLike) -> Support:
        """Lowest-index support attaining the maximum at y."""
        values = [support(y) for support in self.supports]
        return self.supports[int(np.argmax(values))]

    def update(self, z: ArrayLike, v_tilde: float, g_tilde: ArrayLike) -> tuple[UnderCase, Support]:
        """Fold one reported (value, subgradient) pair into the model.

        Args:
            z: Query point
            v_tilde: Reported value at z
            g_tilde: Reported subgradient at z

        Returns:
            The case taken and the support now answering at z
        """
        z = np.asarray(z, dtype=float).ravel()
        g_tilde = np.asarray(g_tilde, dtype=float).ravel()
        if z.size != self.dim or g_tilde.size != self.dim:
            raise StructuralError(f"under-model update needs vectors of size {self.dim}")
        candidate = Support(z, float(v_tilde), g_tilde)
        case = UnderCase.APPENDED

        if self.supports:
            excess = max(candidate(s.point) - self(s.point) for s in self.supports)
            if excess > AFFINE_TOLERANCE:
                candidate = Support(z, candidate.value - excess, g_tilde)
                case = UnderCase.SHIFTED
            current = self(z)
            if candidate.value < current - AFFINE_TOLERANCE:
                own = self.active(z)
                candidate = Support(z, current, own.slope)
                case = UnderCase.SUPPORTED

        self.supports.append(candidate)
        self.cases.append(case)
        logger.debug(f"Under-model case {case.value} at {z} (value {candidate.value:.6g})")
        return case, candidate

    def add_slack(self, amount: float) -> None:
        if amount < 0:
            raise StructuralError("slack must be non-negative")
        self.accumulated_slack += amount

    def as_function(self, label: str = "model") -> MaxAffineFunction:
        slopes = np.array([s.slope for s in self.supports])
        offsets = np.array([s.value - float(s.slope @ s.point) for s in self.supports])
        return MaxAffineFunction(slopes, offsets, label=label)

    def certificate(self, f: MaxAffineFunction) -> MaxAffineFunction:
        """h = max(f - slack, model): convex and equal to every accepted support at its point."""
        return f.shifted(-self.accumulated_slack).maximum(self.as_function(), label="certificate")

    def consistent(self, tol: float = 1e-9) -> bool:
        """Every support attains the model at its own point."""
        return all(abs(self(s.point) - s.value) <= tol for s in self.supports)
