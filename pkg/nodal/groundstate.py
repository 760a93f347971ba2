"""
Ground state of the limit problem -Laplacian U + U = U^{q-1} on R^n.

U is computed by radial shooting on U(0): too large an amplitude makes the
trajectory cross zero, too small makes it turn back up. Bisection on the
amplitude pins U(0); the trajectory is kept up to the last radius where it is
still reliable and continued by the fitted exponential tail.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize

from .exceptions import BracketNotFound, CutoffExceedsInjectivityRadius, SubcriticalityViolated
from .field import Field

logger = logging.getLogger(__name__)

DEFAULT_R_MAX = 24.0
DEFAULT_SAMPLES = 8192
DEFAULT_TOL = 1e-12
TAIL_LEVEL = 1e-7
START_RADIUS = 1e-6
RELIABLE_MARGIN = 6.0
BRACKET = (1.0, 10.0)
MAX_AMPLITUDE = 1e6

OVERSHOOT = "overshoot"
UNDERSHOOT = "undershoot"


@dataclass(frozen=True)
class RadialProfile:
    n: int
    q: float
    r_max: float
    radii: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)
    u0: float
    decay_rate: float
    decay_constant: float
    mE: float = None

    def __call__(self, r):
        return np.interp(r, self.radii, self.samples, right=0.0)

    def metadata(self):
        return {
            "n": self.n,
            "q": self.q,
            "r_max": self.r_max,
            "sample_count": int(self.samples.size),
            "u0": self.u0,
            "decay_rate": self.decay_rate,
            "decay_constant": self.decay_constant,
            "mE": self.mE,
        }


def critical_exponent(n):
    return float("inf") if n <= 2 else 2.0 * n / (n - 2.0)


def _rhs(n, q):
    def rhs(r, y):
        u, du = y
        return [du, -(n - 1) / r * du + u - np.abs(u) ** (q - 2.0) * u]
    return rhs


def _crossing(r, y):
    return y[0]


_crossing.terminal = True
_crossing.direction = -1


def _turning(r, y):
    return y[1]


_turning.terminal = True
_turning.direction = 1


def _initial_state(amplitude, n, q):
    curvature = (amplitude - amplitude ** (q - 1.0)) / n
    return [amplitude + 0.5 * curvature * START_RADIUS ** 2, curvature * START_RADIUS]


def _integrate(amplitude, n, q, r_end):
    return integrate.solve_ivp(
        _rhs(n, q),
        (START_RADIUS, r_end),
        _initial_state(amplitude, n, q),
        method="DOP853",
        rtol=1e-11,
        atol=1e-14,
        events=[_crossing, _turning],
        dense_output=True,
    )


def _classify(amplitude, n, q, r_end):
    if amplitude <= 1.0:
        return UNDERSHOOT
    solution = _integrate(amplitude, n, q, r_end)
    return OVERSHOOT if solution.t_events[0].size else UNDERSHOOT


def shoot(n, q, tol=DEFAULT_TOL, r_max=DEFAULT_R_MAX, samples=DEFAULT_SAMPLES):
    if q <= 2.0 or q >= critical_exponent(n):
        raise SubcriticalityViolated(f"q = {q} is not in (2, {critical_exponent(n)}) for n = {n}.")

    lo, hi = BRACKET
    while _classify(hi, n, q, r_max) != OVERSHOOT:
        lo, hi = hi, 2.0 * hi
        if hi > MAX_AMPLITUDE:
            raise BracketNotFound(f"No overshooting amplitude below {MAX_AMPLITUDE} for n={n}, q={q}.")
        logger.debug("widening shooting bracket to [%g, %g]", lo, hi)

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _classify(mid, n, q, r_max) == OVERSHOOT:
            hi = mid
        else:
            lo = mid

    amplitude = lo
    trajectory = _integrate(amplitude, n, q, r_max)
    r_event = trajectory.t[-1]
    r_match = r_event - RELIABLE_MARGIN if r_event < r_max else r_max
    dense_radii = np.linspace(START_RADIUS, r_match, 4096)
    dense_values = trajectory.sol(dense_radii)[0]
    below = np.flatnonzero(dense_values <= TAIL_LEVEL * amplitude)
    if below.size:
        r_match = dense_radii[below[0]]
    if r_match < 4.0:
        raise BracketNotFound(f"Shooting trajectory unreliable beyond r = {r_match:.3g}; tighten tol.")

    window = np.linspace(max(2.0, r_match - 4.0), r_match, 256)
    slope, _ = np.polyfit(window, np.log(trajectory.sol(window)[0]), 1)
    decay_rate = -float(slope)
    u_match = float(trajectory.sol(r_match)[0])

    radii = np.linspace(0.0, r_max, samples)
    values = np.empty_like(radii)
    values[0] = amplitude
    inner = (radii > 0.0) & (radii <= r_match)
    values[inner] = trajectory.sol(np.maximum(radii[inner], START_RADIUS))[0]
    outer = radii > r_match
    values[outer] = u_match * np.exp(-decay_rate * (radii[outer] - r_match))

    far = radii >= 2.0
    decay_constant = float(np.max(values[far] * np.exp(decay_rate * radii[far])))

    profile = RadialProfile(
        n=n,
        q=float(q),
        r_max=float(r_max),
        radii=radii,
        samples=values,
        u0=float(amplitude),
        decay_rate=decay_rate,
        decay_constant=decay_constant,
    )
    profile = replace(profile, mE=m_E(profile))
    logger.info(
        "ground state n=%d q=%.4g: U(0)=%.10f decay=%.4f m(E)=%.8f (reliable to r=%.2f)",
        n, q, amplitude, decay_rate, profile.mE, r_match,
    )
    return profile


def sphere_factor(n, radii):
    if n == 1:
        return 2.0 * np.ones_like(radii)
    if n == 2:
        return 2.0 * np.pi * radii
    if n == 3:
        return 4.0 * np.pi * radii ** 2
    raise ValueError(f"Unsupported dimension {n}.")


def radial_integral(profile, density):
    return float(integrate.simpson(density * sphere_factor(profile.n, profile.radii), x=profile.radii))


def m_E(profile):
    """m(E) = (q-2)/(2q) * ||U||_q^q."""
    q = profile.q
    return (q - 2.0) / (2.0 * q) * radial_integral(profile, np.abs(profile.samples) ** q)


def nehari_scaling_level(profile):
    """
    Minimize the Nehari level of the dilations U(s r) over s: an oracle for m(E)
    that uses the gradient energy rather than the q-norm alone.
    """
    n, q = profile.n, profile.q
    gradient = radial_integral(profile, np.gradient(profile.samples, profile.radii) ** 2)
    mass = radial_integral(profile, profile.samples ** 2)
    power = radial_integral(profile, np.abs(profile.samples) ** q)

    def level(s):
        quadratic = s ** (2 - n) * gradient + s ** (-n) * mass
        return (q - 2.0) / (2.0 * q) * quadratic ** (q / (q - 2.0)) / (s ** (-n) * power) ** (2.0 / (q - 2.0))

    result = optimize.minimize_scalar(level, bounds=(0.5, 2.0), method="bounded", options={"xatol": 1e-10})
    return float(result.fun)


def radial_ode_residual(profile):
    """Finite-difference residual of U'' + (n-1)/r U' - U + U^{q-1} at interior samples."""
    r = profile.radii
    u = profile.samples
    dr = r[1] - r[0]
    second = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dr ** 2
    first = (u[2:] - u[:-2]) / (2.0 * dr)
    interior = r[1:-1]
    residual = second + (profile.n - 1) / interior * first - u[1:-1] + np.abs(u[1:-1]) ** (profile.q - 2.0) * u[1:-1]
    return interior, residual


def smooth_cutoff(distance, radius):
    """Quintic smoothstep: 1 on [0, radius/2], 0 from radius on, C^2 in between."""
    s = np.clip(2.0 * (radius - distance) / radius, 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def sample_bubble(profile, eps, manifold, center, cutoff_radius):
    """y -> U(dist(center, y)/eps) * chi_r(dist(center, y)) on the grid of ``manifold``."""
    if eps <= 0:
        raise ValueError("eps must be positive.")
    if cutoff_radius > manifold.injectivity_radius * (1.0 + 1e-12):
        raise CutoffExceedsInjectivityRadius(
            f"Cutoff radius {cutoff_radius:.6g} exceeds the injectivity radius {manifold.injectivity_radius:.6g}."
        )
    distance = manifold.distance_field(center)
    return Field(manifold, profile(distance / eps) * smooth_cutoff(distance, cutoff_radius))
