"""
Per-seed work of a sweep: flow one seed to a critical point and audit the result.

Nothing here touches Django, so worker processes can import it cold.
"""
import logging
import logging.config
from dataclasses import dataclass, field

import numpy as np

from .concentration import DEFAULT_ETA, DEFAULT_RADIUS, cm_pair, concentration_check
from .elliptic import K_eps
from .energy import constants, j_eps, pde_residual, tube_image_bound
from .exceptions import NodalLabError
from .field import EpsParams, Field, sign_split
from .flow import FlowConfig, Outcome, Region, classify_region, flow_then_polish
from .manifold import TorusManifold

logger = logging.getLogger(__name__)

POSITIVE = "positive"
NODAL = "nodal"


@dataclass(frozen=True)
class SeedTask:
    index: int
    kind: str
    eps: float
    m: int
    lengths: tuple
    grid_sizes: tuple
    values: np.ndarray = field(repr=False)
    seed: dict
    flow: FlowConfig
    polish_steps: int = 200
    s_eps: float = None
    radius: float = DEFAULT_RADIUS
    eta: float = DEFAULT_ETA
    pde_factor: float = 10.0


def configure_worker_logging(formatter, level):
    """Route the worker's `nodal` records through the parent's console formatter."""
    logging.config.dictConfig({
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"worker": dict(formatter)},
        "handlers": {"console": {"class": "logging.StreamHandler", "formatter": "worker"}},
        "loggers": {"nodal": {"handlers": ["console"], "level": level, "propagate": False}},
    })


def assess(u, params, kind, alpha, s_eps=None, radius=DEFAULT_RADIUS, eta=DEFAULT_ETA,
           pde_factor=10.0, stop_delta=1e-12, solver_tol=1e-10):
    """Diagnostics of a flow limit, computed from the field alone."""
    energy = j_eps(u, params, tol=solver_tol)
    split = sign_split(u, params)
    region = classify_region(u, alpha, params, split=split, total=energy.total)
    residual = pde_residual(u, params)
    frac_plus, frac_minus, concentrated = concentration_check(u, params, r=radius, eta=eta)

    cm = None
    if kind == NODAL and not (split.plus.is_zero() or split.minus.is_zero()):
        try:
            pair = cm_pair(u, params, r=radius, eta=eta)
            cm = {
                "c_plus": pair.c_plus.tolist(),
                "c_minus": pair.c_minus.tolist(),
                "separation": pair.separation,
                "coefficient_plus": pair.coefficient_plus,
                "coefficient_minus": pair.coefficient_minus,
            }
        except NodalLabError as exc:
            cm = {"error": type(exc).__name__, "detail": str(exc)}

    ground = None
    if kind == POSITIVE and not u.is_zero():
        ground = constants(u, params)._asdict()
        if s_eps is None:
            s_eps = ground["S_eps"]

    tube_audit = None
    if s_eps is not None:
        gap = min(split.gap_plus, split.gap_minus)
        image = sign_split(K_eps(u, params, tol=solver_tol), params)
        tube_audit = {
            "gap": gap,
            "image_gap": min(image.gap_plus, image.gap_minus),
            "bound": tube_image_bound(gap, s_eps, params.p),
        }

    return {
        "energy": energy.as_dict(),
        "grad_norm": energy.grad_norm,
        "region": region.value,
        "gap_plus": split.gap_plus,
        "gap_minus": split.gap_minus,
        "pde_residual": residual,
        "pde_ok": bool(residual <= pde_factor * np.sqrt(stop_delta)),
        "concentration": {"plus": frac_plus, "minus": frac_minus, "passed": bool(concentrated)},
        "cm": cm,
        "constants": ground,
        "tube_audit": tube_audit,
    }


def run_seed(task):
    """
    Flow one seed with the projected flow and a plain polish.

    Returns the record payload and the final grid values; numerical failures
    become an ``error:<Class>`` outcome instead of propagating.
    """
    manifold = TorusManifold(tuple(task.lengths), tuple(task.grid_sizes))
    params = EpsParams.for_manifold(manifold, task.eps, task.m)
    record = {"kind": task.kind, "eps": task.eps, "index": task.index, "seed": task.seed}

    try:
        u, projected, polish = flow_then_polish(
            Field(manifold, task.values), task.flow, params, polish_steps=task.polish_steps
        )
        traces = [trace for trace in (projected, polish) if trace is not None]
        diagnostics = assess(
            u, params, task.kind, task.flow.alpha,
            s_eps=task.s_eps, radius=task.radius, eta=task.eta, pde_factor=task.pde_factor,
            stop_delta=task.flow.stop_delta, solver_tol=task.flow.solver_tol,
        )
    except NodalLabError as exc:
        logger.warning("eps=%g %s seed %d failed: %s", task.eps, task.kind, task.index, exc)
        record.update(outcome=f"error:{type(exc).__name__}", converged=False, error=str(exc))
        return record, None

    final = traces[-1]
    record.update(diagnostics)
    record.update(
        outcome=final.outcome.value,
        converged=bool(final.outcome == Outcome.CONVERGED and diagnostics["grad_norm"] <= task.flow.grad_tol),
        steps=sum(trace.steps for trace in traces),
        nodal_set_violations=sum(trace.nodal_set_violations() for trace in traces),
        stayed_outside_tubes=all(trace.stayed_outside_tubes for trace in traces),
        traces=[trace.summary() for trace in traces],
    )
    if task.kind == NODAL and record["converged"] and record["region"] != Region.Z_CANDIDATE.value:
        logger.info("eps=%g nodal seed %d converged into %s", task.eps, task.index, record["region"])
    return record, np.asarray(u.values)
