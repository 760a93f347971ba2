import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import CoercivityViolated, ManifoldMismatch
from .manifold import TorusManifold

logger = logging.getLogger(__name__)

PLAIN = "plain"
CURVED = "curved"


@dataclass(frozen=True, eq=False)
class Field:
    """Grid function on a torus: the discrete stand-in for an element of H_eps."""
    manifold: TorusManifold
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.size == self.manifold.node_count and values.shape != self.manifold.shape:
            values = values.reshape(self.manifold.shape)
        if values.shape != self.manifold.shape:
            raise ValueError(f"Field of shape {values.shape} does not fit a grid of shape {self.manifold.shape}.")
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, manifold):
        return cls(manifold, np.zeros(manifold.shape))

    @classmethod
    def constant(cls, manifold, value):
        return cls(manifold, np.full(manifold.shape, float(value)))

    @classmethod
    def from_function(cls, manifold, function):
        mesh = np.meshgrid(*manifold.coordinates, indexing="ij")
        return cls(manifold, function(*mesh))

    def with_values(self, values):
        return Field(self.manifold, values)

    def _check(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        if other.manifold != self.manifold:
            raise ManifoldMismatch("Fields live on different manifolds.")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self.with_values(self.values - other.values)

    def __neg__(self):
        return self.with_values(-self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Field):
            return NotImplemented
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.with_values(self.values / float(scalar))

    @property
    def positive_part(self):
        return self.with_values(np.maximum(self.values, 0.0))

    @property
    def negative_part(self):
        return self.with_values(np.maximum(-self.values, 0.0))

    def is_zero(self):
        return not np.any(self.values)

    def translated(self, shift):
        return self.with_values(self.manifold.translate(self.values, shift))


@dataclass(frozen=True)
class EpsParams:
    """
    eps, base dimension n, fiber dimension m and the exponents they induce.

    ``curvature`` is s_g: a constant (or a field-shaped array) so curved bases need
    no interface change; flat tori pass 0.
    """
    eps: float
    n: int
    m: int
    curvature: object = 0.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive.")
        if self.m < 1:
            raise ValueError("The fiber dimension m must be at least 1.")
        if self.n + self.m <= 2:
            raise ValueError("n + m must exceed 2 for the exponents to be defined.")
        if np.min(self.coefficient) <= 0:
            raise CoercivityViolated(
                f"1 + s_g eps^2 / a = {np.min(self.coefficient):.4g} is not positive; reduce eps."
            )

    @classmethod
    def for_manifold(cls, manifold, eps, m):
        return cls(eps=float(eps), n=manifold.n, m=int(m), curvature=manifold.curvature)

    @property
    def a(self):
        return 4.0 * (self.n + self.m - 1) / (self.n + self.m - 2)

    @property
    def p(self):
        return 2.0 * (self.n + self.m) / (self.n + self.m - 2)

    @property
    def coefficient(self):
        return 1.0 + np.asarray(self.curvature, dtype=float) * self.eps ** 2 / self.a

    @property
    def c_lo(self):
        return float(np.sqrt(min(1.0, np.min(self.coefficient))))

    @property
    def c_hi(self):
        return float(np.sqrt(max(1.0, np.max(self.coefficient))))

    @property
    def measure_scale(self):
        """eps^{-n}: the weight of the eps-rescaled integrals."""
        return self.eps ** (-self.n)


class SignSplit(NamedTuple):
    plus: Field
    minus: Field
    gap_plus: float
    gap_minus: float


def integrate(values, manifold, params):
    """eps^{-n} * rectangle rule."""
    return params.measure_scale * float(np.sum(values)) * manifold.quad_weight


def bilinear(u, v, params, mode=CURVED):
    """
    Discrete <u, v>_eps (mode ``plain``) or L_eps(u, v) (mode ``curved``).

    The gradient term is the pairing -sum v * Laplacian_h(u), so the form is the
    duality pairing of v against the discrete operator of the elliptic module.
    """
    if u.manifold != v.manifold:
        raise ManifoldMismatch("Fields live on different manifolds.")
    if mode not in (PLAIN, CURVED):
        raise ValueError(f"Unknown bilinear mode {mode!r}.")
    manifold = u.manifold
    kappa = 1.0 if mode == PLAIN else params.coefficient
    density = -params.eps ** 2 * v.values * manifold.laplacian(u.values) + kappa * u.values * v.values
    return integrate(density, manifold, params)


def eps_norm(u, params, mode=PLAIN):
    return float(np.sqrt(max(bilinear(u, u, params, mode), 0.0)))


def lp_norm(u, q, params):
    if q < 1:
        raise ValueError("lp_norm needs q >= 1.")
    return integrate(np.abs(u.values) ** q, u.manifold, params) ** (1.0 / q)


def sign_split(u, params):
    """
    u = u_plus - u_minus with the cone gaps L_eps(u_minus, u_minus)^(1/2) (distance
    bound to P) and L_eps(u_plus, u_plus)^(1/2) (distance bound to -P).
    """
    plus = u.positive_part
    minus = u.negative_part
    gap_plus = float(np.sqrt(max(bilinear(minus, minus, params), 0.0)))
    gap_minus = float(np.sqrt(max(bilinear(plus, plus, params), 0.0)))
    return SignSplit(plus, minus, gap_plus, gap_minus)
