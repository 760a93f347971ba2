import logging
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .energy import nehari, part_residuals
from .exceptions import CutoffExceedsInjectivityRadius, OverlappingSupports
from .groundstate import sample_bubble

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedPair:
    """Value of the two-bubble map i_eps(x, y) together with its audit data."""
    x: np.ndarray
    y: np.ndarray
    eps: float
    field: object = dataclass_field(repr=False)
    part_residuals: tuple
    admissible: bool
    admissible_injectivity: bool

    @property
    def plus(self):
        return self.field.positive_part

    @property
    def minus(self):
        return self.field.negative_part


def default_cutoff(manifold):
    return min(manifold.injectivity_radius, 0.25 * min(manifold.lengths))


def projected_bubble(center, eps, profile, manifold, params, r_cut=None):
    """Nehari-projected positive bubble t_eps(u_{eps,x}) u_{eps,x}."""
    if r_cut is None:
        r_cut = default_cutoff(manifold)
    return nehari(sample_bubble(profile, eps, manifold, center, r_cut), params).projected


def seed_pair(x, y, eps, profile, manifold, params, r_cut=None):
    """
    i_eps(x, y) = t(u_x) u_x - t(u_y) u_y.

    Supports are the open r_cut-balls around x and y, so dist(x, y) >= 2 r_cut keeps
    them disjoint. F_eps membership is recorded with both thresholds in use,
    2 eps R_0 (``admissible``) and 2 eps r_0 (``admissible_injectivity``).
    """
    if r_cut is None:
        r_cut = default_cutoff(manifold)
    if r_cut > manifold.injectivity_radius * (1.0 + 1e-12):
        raise CutoffExceedsInjectivityRadius(
            f"Cutoff radius {r_cut:.6g} exceeds the injectivity radius {manifold.injectivity_radius:.6g}."
        )
    x = manifold.as_points(x)
    y = manifold.as_points(y)
    distance = float(manifold.dist(x, y))
    if distance < 2.0 * r_cut * (1.0 - 1e-12):
        raise OverlappingSupports(
            f"dist(x, y) = {distance:.6g} is below twice the cutoff radius {r_cut:.6g}."
        )

    plus = projected_bubble(x, eps, profile, manifold, params, r_cut)
    minus = projected_bubble(y, eps, profile, manifold, params, r_cut)
    seed = plus - minus
    residuals = part_residuals(seed, params)
    logger.debug("seed pair dist=%.4g residuals=(%.2e, %.2e)", distance, *residuals)
    return SeedPair(
        x=x,
        y=y,
        eps=float(eps),
        field=seed,
        part_residuals=residuals,
        admissible=distance >= 2.0 * eps * manifold.diameter,
        admissible_injectivity=distance >= 2.0 * eps * manifold.injectivity_radius,
    )
