import logging
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .elliptic import DEFAULT_TOL, K_eps, apply_operator, nonlinearity
from .exceptions import ZeroField
from .field import bilinear, eps_norm, integrate, lp_norm, sign_split

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyBreakdown:
    quadratic: float
    potential: float
    total: float
    nehari_residual: float
    grad_norm: float

    def as_dict(self):
        return asdict(self)


class NehariProjection(NamedTuple):
    t: float
    projected: object
    residual: float


class GroundConstants(NamedTuple):
    S_eps: float
    m_eps: float
    alpha: float


def _terms(u, params):
    quadratic_form = bilinear(u, u, params)
    power = integrate(np.abs(u.values) ** params.p, u.manifold, params)
    return quadratic_form, power


def energy_value(u, params):
    """J_eps(u) without the gradient solve."""
    quadratic_form, power = _terms(u, params)
    return 0.5 * quadratic_form - power / params.p


def breakdown(u, k_u, params):
    """Energy breakdown of u given a precomputed K_eps(u)."""
    quadratic_form, power = _terms(u, params)
    quadratic = 0.5 * quadratic_form
    potential = power / params.p
    grad = u - k_u
    return EnergyBreakdown(
        quadratic=quadratic,
        potential=potential,
        total=quadratic - potential,
        nehari_residual=quadratic_form - power,
        grad_norm=float(np.sqrt(max(bilinear(grad, grad, params), 0.0))),
    )


def j_eps(u, params, tol=DEFAULT_TOL):
    return breakdown(u, K_eps(u, params, tol=tol), params)


def grad_residual(u, params, tol=DEFAULT_TOL):
    """Gradient representative J'_eps(u) = u - K_eps(u)."""
    return u - K_eps(u, params, tol=tol)


def directional_derivative(u, v, params):
    """Weak form dJ_eps(u)[v] = L_eps(u, v) - eps^{-n} int |u|^{p-2} u v."""
    return bilinear(u, v, params) - integrate(nonlinearity(u, params).values * v.values, u.manifold, params)


def nehari(u, params):
    quadratic_form, power = _terms(u, params)
    if power == 0.0:
        raise ZeroField("Cannot scale the zero field onto the Nehari set.")
    t = (quadratic_form / power) ** (1.0 / (params.p - 2.0))
    projected = t * u
    residual = t ** 2 * quadratic_form - t ** params.p * power
    return NehariProjection(t=t, projected=projected, residual=residual)


def relative_nehari_residual(u, params):
    quadratic_form, power = _terms(u, params)
    if quadratic_form == 0.0:
        return float("inf")
    return abs(quadratic_form - power) / quadratic_form


def part_residuals(u, params):
    """Relative Nehari residuals of u_plus and u_minus (inf for a vanishing part)."""
    return (
        relative_nehari_residual(u.positive_part, params),
        relative_nehari_residual(u.negative_part, params),
    )


def in_nodal_set(u, params, rtol=1e-8):
    """Discrete E_eps membership: both signed parts nonzero and on the Nehari set."""
    plus, minus = part_residuals(u, params)
    return plus <= rtol and minus <= rtol


def project_sign_parts(u, params, part_floor=1e-6):
    """
    Scale u_plus and u_minus onto the Nehari set separately. A part whose eps-norm is
    below ``part_floor`` times that of u counts as absent and u is scaled as a whole.
    """
    split = sign_split(u, params)
    scale = eps_norm(u, params)
    if scale == 0.0:
        raise ZeroField("Cannot project the zero field.")
    if min(split.gap_plus, split.gap_minus) <= part_floor * scale:
        return nehari(u, params).projected
    return nehari(split.plus, params).projected - nehari(split.minus, params).projected


def constants(u_ground, params):
    """S_eps as the Rayleigh quotient at u_ground, with m_eps and the tube radius alpha."""
    p = params.p
    norm_p = lp_norm(u_ground, p, params)
    if norm_p == 0.0:
        raise ZeroField("constants() needs a nonzero ground field.")
    s_eps = bilinear(u_ground, u_ground, params) / norm_p ** 2
    m_eps = (p - 2.0) / (2.0 * p) * s_eps ** (p / (p - 2.0))
    alpha = 0.5 * s_eps ** (p / (2.0 * (p - 2.0)))
    return GroundConstants(S_eps=s_eps, m_eps=m_eps, alpha=alpha)


def pde_residual(u, params):
    """eps-weighted 2-norm of A_eps u - |u|^{p-2} u."""
    return lp_norm(apply_operator(u, params) - nonlinearity(u, params), 2, params)


def tube_image_bound(gap, s_eps, p):
    """Upper bound on the cone gap of K_eps(u) in terms of the gap of u."""
    return s_eps ** (-p / 2.0) * gap ** (p - 1.0)
