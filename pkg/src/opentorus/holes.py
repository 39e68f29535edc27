"""Holes: open metric balls removed from the torus, and their survivor sets K."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RadiusTooLarge, ThickeningSwallowsHole
from .system import Point, torus_distance, wrap_diff


@dataclass(frozen=True)
class Hole:
    """Open ball B^X(center, radius); K = {x : d(x, center) >= radius}.

    radius < 1/2 so the ball embeds.  The tighter bookkeeping bound
    radius < r0 = 1/4 is enforced by the operations whose contracts
    need it, not at construction (oversize holes are useful for
    sanity probes).
    """

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"hole radius must be positive, got {self.radius}")
        if self.radius >= 0.5:
            raise RadiusTooLarge(
                f"hole radius must be < 1/2 to embed, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) % 1.0 for c in self.center))


def in_K(hole: Hole, x) -> bool:
    """True iff x survives: d(x, center) >= radius (boundary survives)."""
    return torus_distance(x, np.asarray(hole.center)) >= hole.radius


def in_K_points(hole: Hole, pos: np.ndarray) -> np.ndarray:
    """Vectorized in_K over an (N, m) array of torus positions."""
    d = wrap_diff(pos - np.asarray(hole.center))
    return np.einsum("ij,ij->i", d, d) >= hole.radius * hole.radius


def thicken(hole: Hole, rho: float) -> Hole:
    """Shrink the hole: thickening K by rho is K(center, radius - rho).

    Raises ThickeningSwallowsHole when rho >= radius, since then the
    thickened survivor set is all of X and carries no constraint.
    """
    if rho <= 0:
        raise ValueError(f"thickening must be positive, got {rho}")
    if rho >= hole.radius:
        raise ThickeningSwallowsHole(
            f"thickening {rho} >= hole radius {hole.radius}")
    return Hole(center=hole.center, radius=hole.radius - rho)
