import logging
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .elliptic import DEFAULT_TOL, K_eps
from .energy import breakdown, energy_value, in_nodal_set, project_sign_parts
from .exceptions import StepCollapse
from .field import sign_split

logger = logging.getLogger(__name__)

PLAIN = "plain"
NEHARI_PROJECTED = "nehari_projected"
MODES = (PLAIN, NEHARI_PROJECTED)

MIN_STEP = 1e-12
ROUNDOFF = 64.0 * np.finfo(float).eps


class Region(str, Enum):
    TUBE_PLUS = "TubePlus"
    TUBE_MINUS = "TubeMinus"
    SUBLEVEL_ZERO = "SublevelZero"
    Z_CANDIDATE = "Zcandidate"


class Outcome(str, Enum):
    CONVERGED = "Converged"
    ENTERED_TUBE_PLUS = "EnteredTube(+)"
    ENTERED_TUBE_MINUS = "EnteredTube(-)"
    ENERGY_NONPOSITIVE = "EnergyNonpositive"
    MAX_STEPS = "MaxSteps"


TUBES = (Region.TUBE_PLUS, Region.TUBE_MINUS)


@dataclass(frozen=True)
class FlowConfig:
    step: float = 0.5
    backtrack: float = 0.5
    max_steps: int = 20000
    stop_delta: float = 1e-12
    mode: str = PLAIN
    alpha: float = 1.0
    solver_tol: float = DEFAULT_TOL
    part_floor: float = 1e-6
    collapse_floor: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.step <= 1.0:
            raise ValueError("The flow step must lie in (0, 1].")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError("The backtracking factor must lie in (0, 1).")
        if self.stop_delta <= 0:
            raise ValueError("stop_delta must be positive.")
        if self.alpha <= 0:
            raise ValueError("The tube radius alpha must be positive.")
        if self.collapse_floor <= 0:
            raise ValueError("collapse_floor must be positive.")
        if self.mode not in MODES:
            raise ValueError(f"Unknown flow mode {self.mode!r}.")

    @property
    def grad_tol(self):
        return float(np.sqrt(self.stop_delta))


@dataclass(frozen=True)
class TraceEntry:
    step: int
    h: float
    energy: object
    gap_plus: float
    gap_minus: float
    region: Region
    in_nodal_set: bool


@dataclass
class FlowTrace:
    mode: str
    alpha: float
    entries: list = field(default_factory=list)
    outcome: Outcome = None

    @property
    def start_region(self):
        return self.entries[0].region

    @property
    def final(self):
        return self.entries[-1]

    @property
    def steps(self):
        return self.entries[-1].step

    def energies(self):
        return np.array([entry.energy.total for entry in self.entries])

    def nodal_set_violations(self):
        """Iterates in the discrete E_eps set that come within alpha of a cone."""
        return sum(
            1 for entry in self.entries
            if entry.in_nodal_set and min(entry.gap_plus, entry.gap_minus) <= self.alpha
        )

    @property
    def stayed_outside_tubes(self):
        return all(entry.region == Region.Z_CANDIDATE for entry in self.entries)

    def summary(self):
        final = self.final
        return {
            "mode": self.mode,
            "outcome": self.outcome.value if self.outcome else None,
            "steps": self.steps,
            "energy": final.energy.as_dict(),
            "gap_plus": final.gap_plus,
            "gap_minus": final.gap_minus,
            "region": final.region.value,
            "nodal_set_violations": self.nodal_set_violations(),
            "stayed_outside_tubes": self.stayed_outside_tubes,
        }


def flow_step(u, h, params, tol=DEFAULT_TOL, k_u=None):
    """(1 - h) u + h K_eps(u), i.e. u - h J'_eps(u)."""
    if not 0.0 < h <= 1.0:
        raise ValueError("The flow step must lie in (0, 1].")
    if k_u is None:
        k_u = K_eps(u, params, tol=tol)
    return (1.0 - h) * u + h * k_u


def classify_region(u, alpha, params, split=None, total=None):
    if alpha <= 0:
        raise ValueError("alpha must be positive.")
    if split is None:
        split = sign_split(u, params)
    if split.gap_plus <= alpha:
        return Region.TUBE_PLUS
    if split.gap_minus <= alpha:
        return Region.TUBE_MINUS
    if total is None:
        total = energy_value(u, params)
    if total <= 0.0:
        return Region.SUBLEVEL_ZERO
    return Region.Z_CANDIDATE


def _observe(u, k_u, step, h, config, params):
    energy = breakdown(u, k_u, params)
    split = sign_split(u, params)
    return TraceEntry(
        step=step,
        h=h,
        energy=energy,
        gap_plus=split.gap_plus,
        gap_minus=split.gap_minus,
        region=classify_region(u, config.alpha, params, split=split, total=energy.total),
        in_nodal_set=in_nodal_set(u, params),
    )


def _collapsed(entry, config):
    """The iterate has fallen into the basin of the zero field; J tends to 0 from above."""
    return 2.0 * entry.energy.quadratic <= config.collapse_floor ** 2


def _finish(u, trace, outcome):
    trace.outcome = outcome
    final = trace.final
    logger.info(
        "%s flow: %s after %d steps, J=%.10g, |J'|=%.3e, region %s",
        trace.mode, outcome.value, final.step, final.energy.total, final.energy.grad_norm, final.region.value,
    )
    return u, trace


def flow_run(u0, config, params):
    """
    Negative gradient flow u <- (1 - h) u + h K_eps(u) with backtracking.

    Stops on |J'| <= sqrt(delta) (Converged), on entering a tube the run did not
    start in, on J <= 0 or an eps-norm below ``collapse_floor`` (EnergyNonpositive),
    or after ``max_steps`` accepted steps.
    """
    projected = config.mode == NEHARI_PROJECTED
    u = u0
    k_u = K_eps(u, params, tol=config.solver_tol)
    entry = _observe(u, k_u, 0, config.step, config, params)
    trace = FlowTrace(mode=config.mode, alpha=config.alpha, entries=[entry])
    if _collapsed(entry, config):
        return _finish(u, trace, Outcome.ENERGY_NONPOSITIVE)
    if entry.energy.grad_norm <= config.grad_tol:
        return _finish(u, trace, Outcome.CONVERGED)

    for step in range(1, config.max_steps + 1):
        h = config.step
        current = entry.energy
        while True:
            candidate = flow_step(u, h, params, k_u=k_u)
            if projected:
                candidate = project_sign_parts(candidate, params, part_floor=config.part_floor)
            k_candidate = K_eps(candidate, params, tol=config.solver_tol, initial=k_u)
            energy = breakdown(candidate, k_candidate, params)
            if energy.total < current.total:
                break
            stalled = (
                projected
                and energy.total <= current.total + ROUNDOFF * max(abs(current.total), 1.0)
                and energy.grad_norm < current.grad_norm
            )
            if stalled:
                break
            h *= config.backtrack
            logger.debug("step %d: backtracking to h=%.3e", step, h)
            if h < MIN_STEP:
                raise StepCollapse(f"Backtracking reduced the step below {MIN_STEP} at step {step}.")

        u, k_u = candidate, k_candidate
        entry = _observe(u, k_u, step, h, config, params)
        trace.entries.append(entry)

        if _collapsed(entry, config):
            return _finish(u, trace, Outcome.ENERGY_NONPOSITIVE)
        if entry.energy.grad_norm <= config.grad_tol:
            return _finish(u, trace, Outcome.CONVERGED)
        if entry.region in TUBES and entry.region != trace.start_region:
            outcome = Outcome.ENTERED_TUBE_PLUS if entry.region == Region.TUBE_PLUS else Outcome.ENTERED_TUBE_MINUS
            return _finish(u, trace, outcome)
        if entry.energy.total <= 0.0:
            return _finish(u, trace, Outcome.ENERGY_NONPOSITIVE)

    logger.warning("flow stopped at max_steps=%d with |J'|=%.3e", config.max_steps, entry.energy.grad_norm)
    return _finish(u, trace, Outcome.MAX_STEPS)


def flow_then_polish(u0, config, params, polish_steps=200):
    """
    Minimize over the discrete E_eps set with the projected flow, then run the plain
    flow from its limit so the reported field is a critical point of J_eps itself.
    """
    u, projected_trace = flow_run(u0, replace(config, mode=NEHARI_PROJECTED), params)
    if projected_trace.outcome != Outcome.CONVERGED:
        return u, projected_trace, None
    u, polish_trace = flow_run(u, replace(config, mode=PLAIN, max_steps=polish_steps), params)
    return u, projected_trace, polish_trace


def trace_as_dict(trace):
    return {
        "summary": trace.summary(),
        "entries": [
            {**asdict(entry), "energy": entry.energy.as_dict(), "region": entry.region.value}
            for entry in trace.entries
        ],
    }
