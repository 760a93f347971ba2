import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import NoConvergence
from .field import Field

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class LinearSolveReport:
    iterations: int
    final_residual: float
    converged: bool


def _apply(values, manifold, params):
    return -params.eps ** 2 * manifold.laplacian(values) + params.coefficient * values


def apply_operator(u, params):
    """A_eps u = -eps^2 Laplacian_h u + c(x) u."""
    return u.with_values(_apply(u.values, u.manifold, params))


def operator_diagonal(manifold, params):
    return params.eps ** 2 * sum(2.0 / h ** 2 for h in manifold.spacings) + params.coefficient


def default_max_iterations(manifold):
    return max(500, min(manifold.node_count, 20000))


def solve_K(phi, params, tol=DEFAULT_TOL, max_iterations=None, initial=None):
    """
    Solve A_eps u = phi by diagonally preconditioned conjugate gradients.

    The residual reported is ||A u - phi|| / ||phi|| in the eps-weighted 2-norm
    (the eps^{-n} w weight cancels in the ratio). Convergence is confirmed on the
    true residual, not the recursively updated one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive.")
    manifold = phi.manifold
    if max_iterations is None:
        max_iterations = default_max_iterations(manifold)

    b = phi.values
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return Field.zeros(manifold), LinearSolveReport(iterations=0, final_residual=0.0, converged=True)

    diagonal = operator_diagonal(manifold, params)
    x = np.zeros(manifold.shape) if initial is None else np.array(initial.values, dtype=float)
    r = b - _apply(x, manifold, params)
    relative = float(np.linalg.norm(r)) / b_norm
    if relative <= tol:
        return Field(manifold, x), LinearSolveReport(iterations=0, final_residual=relative, converged=True)

    z = r / diagonal
    d = z.copy()
    rz = float(np.vdot(r, z))
    for iteration in range(1, max_iterations + 1):
        ad = _apply(d, manifold, params)
        step = rz / float(np.vdot(d, ad))
        x += step * d
        r -= step * ad
        if float(np.linalg.norm(r)) / b_norm <= tol:
            r = b - _apply(x, manifold, params)
            relative = float(np.linalg.norm(r)) / b_norm
            if relative <= tol:
                return Field(manifold, x), LinearSolveReport(
                    iterations=iteration, final_residual=relative, converged=True
                )
            logger.debug("CG restart at iteration %d: true residual %.3e", iteration, relative)
            z = r / diagonal
            d = z.copy()
            rz = float(np.vdot(r, z))
            continue
        z = r / diagonal
        rz_next = float(np.vdot(r, z))
        d = z + (rz_next / rz) * d
        rz = rz_next

    relative = float(np.linalg.norm(b - _apply(x, manifold, params))) / b_norm
    logger.warning("CG stopped after %d iterations at relative residual %.3e", max_iterations, relative)
    raise NoConvergence(max_iterations, relative)


def nonlinearity(u, params):
    """|u|^{p-2} u."""
    return u.with_values(np.abs(u.values) ** (params.p - 2.0) * u.values)


def K_eps(u, params, tol=DEFAULT_TOL, initial=None):
    """K_eps(u) = A_eps^{-1}(|u|^{p-2} u)."""
    solution, _ = solve_K(nonlinearity(u, params), params, tol=tol, initial=initial)
    return solution
