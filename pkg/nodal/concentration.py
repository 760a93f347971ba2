import itertools
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import (
    ConcentrationInvariantError,
    NegativeValues,
    NotConcentrated,
    NotSignChanging,
    ZeroField,
)

logger = logging.getLogger(__name__)

DEFAULT_RADIUS = 10.0
DEFAULT_ETA = 0.9


@dataclass(frozen=True)
class ConcentrationReport:
    r: float
    values: np.ndarray = field(repr=False)
    coefficient: float
    argmax: int
    argmax_point: np.ndarray
    eta: float = None


class CenterPair(NamedTuple):
    c_plus: np.ndarray
    c_minus: np.ndarray
    separation: float
    coefficient_plus: float
    coefficient_minus: float


def _periodic_convolve(values, kernel):
    spectrum = np.fft.rfftn(values) * np.fft.rfftn(kernel)
    return np.fft.irfftn(spectrum, s=values.shape)


def ball_kernel(manifold, r):
    """Indicator of the open ball B(0, r) over lattice lags; all of M once r reaches the diameter."""
    if r >= manifold.diameter:
        return np.ones(manifold.shape)
    return (manifold.lag_distances() < r).astype(float)


def conc(u, r, eta=None):
    """C_{u,r}(x) = int_{B(x,r)} |u| / int_M |u| at every node."""
    if r <= 0:
        raise ValueError("The concentration radius must be positive.")
    manifold = u.manifold
    mass = np.abs(u.values) * manifold.quad_weight
    total = float(mass.sum())
    if total == 0.0:
        raise ZeroField("The concentration function of the zero field is undefined.")
    values = np.clip(_periodic_convolve(mass, ball_kernel(manifold, r)) / total, 0.0, 1.0)
    argmax = int(np.argmax(values))
    return ConcentrationReport(
        r=float(r),
        values=values,
        coefficient=float(values.flat[argmax]),
        argmax=argmax,
        argmax_point=manifold.node(argmax),
        eta=eta,
    )


def cutoff_weight(t, eta):
    """phi_eta: 0 below 1 - eta, 1 above eta, linear in between."""
    if not 0.5 < eta < 1.0:
        raise ValueError("eta must lie in (1/2, 1).")
    return np.clip((np.asarray(t, dtype=float) - (1.0 - eta)) / (2.0 * eta - 1.0), 0.0, 1.0)


def _localize(u, r, eta):
    report = conc(u, r, eta=eta)
    if report.coefficient <= eta:
        raise NotConcentrated(f"r-concentration coefficient {report.coefficient:.4f} does not exceed eta = {eta}.")
    localized = u.with_values(cutoff_weight(report.values, eta) * u.values)

    manifold = u.manifold
    support = np.flatnonzero(localized.values)
    if support.size:
        reach = float(manifold.dist(report.argmax_point, manifold.nodes[support]).max())
        if reach > 2.0 * r:
            raise ConcentrationInvariantError(
                f"Localized support reaches {reach:.4g} from the concentration point, beyond 2r = {2.0 * r:.4g}."
            )
    return localized, report


def localize(u, r, eta=DEFAULT_ETA):
    """Phi_{r,eta}(u) = phi_eta(C_{u,r}) u, supported in a 2r-ball around the concentration point."""
    localized, _ = _localize(u, r, eta)
    return localized


def _refine(manifold, potential, index):
    """Quadratic least-squares fit of the potential on the 3^n neighborhood of a node."""
    n = manifold.n
    spacings = np.asarray(manifold.spacings)
    lattice = np.unravel_index(index, manifold.shape)
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=n)))
    samples = np.array([
        potential[tuple((np.asarray(lattice) + offset) % np.asarray(manifold.shape))] for offset in offsets
    ])
    steps = offsets * spacings
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    design = np.column_stack(
        [np.ones(len(steps))] + [steps[:, i] for i in range(n)] + [steps[:, i] * steps[:, j] for i, j in pairs]
    )
    coefficients, *_ = np.linalg.lstsq(design, samples, rcond=None)
    gradient = coefficients[1:n + 1]
    hessian = np.zeros((n, n))
    for (i, j), c in zip(pairs, coefficients[n + 1:]):
        if i == j:
            hessian[i, i] = 2.0 * c
        else:
            hessian[i, j] = hessian[j, i] = c
    node = manifold.node(index)
    if np.any(np.linalg.eigvalsh(hessian) <= 0.0):
        return node
    shift = np.clip(-np.linalg.solve(hessian, gradient), -spacings, spacings)
    return manifold.exp(node, shift)


def center_mass(u):
    """Riemannian center of mass: argmin of P_u(x) = int d(x, y)^2 u(y) over M."""
    if np.any(u.values < 0.0):
        raise NegativeValues("The center of mass needs a nonnegative density.")
    if u.is_zero():
        raise ZeroField("The center of mass of the zero field is undefined.")
    manifold = u.manifold
    support = conc(u, manifold.injectivity_radius)
    if support.coefficient < 1.0 - 1e-12:
        raise NotConcentrated(
            f"Only {support.coefficient:.4f} of the mass fits in a ball of the injectivity radius."
        )
    potential = _periodic_convolve(u.values * manifold.quad_weight, manifold.lag_distances() ** 2)
    index = int(np.argmin(potential))
    return _refine(manifold, potential, index)


def cm_pair(u, params, r=DEFAULT_RADIUS, eta=DEFAULT_ETA):
    """
    Centers of mass of the localized (u+)^p and (u-)^p at radius eps*r, and their distance.
    """
    plus = u.positive_part
    minus = u.negative_part
    if plus.is_zero() or minus.is_zero():
        raise NotSignChanging("cm_pair needs a sign-changing field.")
    manifold = u.manifold
    radius = params.eps * r
    slack = float(np.sqrt(np.sum(np.square(manifold.spacings))))

    centers = []
    coefficients = []
    for part in (plus, minus):
        density = part.with_values(part.values ** params.p)
        localized, report = _localize(density, radius, eta)
        center = center_mass(localized)
        above = np.flatnonzero(report.values > eta)
        reach = float(manifold.dist(center, manifold.nodes[above]).max())
        if reach > 2.0 * radius + slack:
            raise ConcentrationInvariantError(
                f"Center of mass lies {reach:.4g} from a concentration point, beyond 2r = {2.0 * radius:.4g}."
            )
        centers.append(center)
        coefficients.append(report.coefficient)

    separation = float(manifold.dist(centers[0], centers[1]))
    logger.debug("cm pair separation %.6g", separation)
    return CenterPair(centers[0], centers[1], separation, coefficients[0], coefficients[1])


def concentration_check(u, params, r=DEFAULT_RADIUS, eta=DEFAULT_ETA):
    """Largest fraction of int |u+-|^p captured by a ball of radius eps*r, for each sign."""
    fractions = []
    for part in (u.positive_part, u.negative_part):
        if part.is_zero():
            fractions.append(0.0)
            continue
        density = part.with_values(part.values ** params.p)
        fractions.append(conc(density, params.eps * r).coefficient)
    return fractions[0], fractions[1], min(fractions) >= eta
