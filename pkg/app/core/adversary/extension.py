"""Tilted extension of fiber functions and the combined function ψ_F."""

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from app.core.constants import FIBER_SLOPE_FACTOR
from app.core.exceptions import StructuralError
from app.core.instances import MaxAffineFunction, MixedPoint, as_vector

Fiber = tuple[int, ...]


def binary_fibers(n: int) -> list[Fiber]:
    return list(itertools.product((0, 1), repeat=n))


def fiber_slope(x_bar: Sequence[int], M: float, R: float) -> np.ndarray:
    """3MR · sgn(x̄ - 1/2) per integer coordinate."""
    return np.array([FIBER_SLOPE_FACTOR * M * R * (1.0 if v else -1.0) for v in x_bar])


def closest_fiber(x: ArrayLike) -> Fiber:
    """Closest 0/1 point in ℓ∞; ties at 1/2 go to 0."""
    return tuple(1 if v > 0.5 else 0 for v in np.asarray(x, dtype=float).ravel())


def fiber_shift(x: ArrayLike, r: Sequence[int], slope: np.ndarray) -> float:
    """δ = ⟨M_r, x - r⟩ (never positive on [0, 1]^n)."""
    return float(slope @ (np.asarray(x, dtype=float) - np.asarray(r, dtype=float)))


def is_truncated(value: float, delta: float, opt: float) -> bool:
    """Whether f(y) + δ ≤ opt, written as the threshold sgn(-v - (δ - opt)) = +1."""
    return -value - (delta - opt) >= 0.0


def extend_truncate(f: MaxAffineFunction, x_bar: Sequence[int], M: float, R: float, opt: float) -> MaxAffineFunction:
    """f̂(x, y) = max{f(y) + ⟨M_x̄, x - x̄⟩, opt} over n + d variables.

    The constant piece comes first, so at ties the chart reports the truncated branch.
    """
    n = len(x_bar)
    slope = fiber_slope(x_bar, M, R)
    lifted_slopes = np.hstack((np.broadcast_to(slope, (f.n_pieces, n)), f.slopes))
    lifted_offsets = f.offsets - float(slope @ np.asarray(x_bar, dtype=float))
    constant = np.zeros((1, n + f.dim))
    return MaxAffineFunction(
        slopes=np.vstack((constant, lifted_slopes)),
        offsets=np.concatenate(([opt], lifted_offsets)),
        label=f"ext[{f.label}@{''.join(map(str, x_bar))}]",
    )


@dataclass(frozen=True)
class PsiValue:
    value: float
    subgradient: np.ndarray
    truncated: bool


def psi_eval(
    F: Mapping[Fiber, MaxAffineFunction],
    z: "MixedPoint | ArrayLike",
    n: int,
    M: float,
    R: float,
    opt: float,
) -> PsiValue:
    """Value and chart subgradient of ψ_F at z = (x, y) with x in [0, 1]^n."""
    if not F:
        raise StructuralError("ψ needs one function per fiber")
    d = next(iter(F.values())).dim
    z = as_vector(z, n + d)
    x, y = z[:n], z[n:]
    r = closest_fiber(x)
    slope = fiber_slope(r, M, R)
    delta = fiber_shift(x, r, slope)
    f = F[r]
    value = f(y)
    if is_truncated(value, delta, opt):
        return PsiValue(value=opt, subgradient=np.zeros(n + d), truncated=True)
    return PsiValue(value=value + delta, subgradient=np.concatenate((slope, f.subgradient(y))), truncated=False)


def psi_function(F: Mapping[Fiber, MaxAffineFunction], n: int, M: float, R: float, opt: float) -> MaxAffineFunction:
    """ψ_F as one max-affine function: the max of every fiber's extension.

    Agrees with psi_eval in value on [0, 1]^n × [-R, R]^d when every f ≤ opt + 1.5MR.
    """
    fibers = sorted(F)
    pieces = extend_truncate(F[fibers[0]], fibers[0], M, R, opt)
    for x_bar in fibers[1:]:
        extension = extend_truncate(F[x_bar], x_bar, M, R, opt)
        pieces = pieces.maximum(
            MaxAffineFunction(extension.slopes[1:], extension.offsets[1:]),
        )
    return MaxAffineFunction(pieces.slopes, pieces.offsets, label="psi")
