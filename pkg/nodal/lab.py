"""
Experiment orchestration: eps sweeps for the positive and nodal energy levels,
the multiplicity search with solution clustering, and archive diagnostics.

Seeds of one eps run concurrently on a process pool; results are collected in
seed order, so the archive does not depend on the scheduling.
"""
import contextlib
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from django.conf import settings
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .archive import SolutionArchive, SolutionRecord, archive_io, summary_rows
from .bubble import default_cutoff, projected_bubble, seed_pair
from .energy import constants
from .exceptions import MixedEps, NodalLabError
from .field import EpsParams, eps_norm
from .flow import Outcome
from .groundstate import nehari_scaling_level, shoot
from .manifold import TorusManifold
from .runner import NODAL, POSITIVE, SeedTask, assess, configure_worker_logging, run_seed

logger = logging.getLogger(__name__)

GROUND = "ground"
SWEEP_M = "sweep_m"
SWEEP_D = "sweep_d"
MULTIPLICITY = "multiplicity"
DIAGNOSE = "diagnose"
KINDS = (GROUND, SWEEP_M, SWEEP_D, MULTIPLICITY, DIAGNOSE)

MAX_RANDOM_ATTEMPTS = 1000

CLUSTER_NOTE = (
    "Nodal solutions are counted modulo lattice translations of the torus and the sign "
    "symmetry u -> -u; the count is compared with the lower bound 2n for the flat n-torus."
)


def expected_nodal_pairs(n):
    """Lower bound on the number of nodal solution pairs for the flat n-torus."""
    return 2 * n


def record_id(eps, kind, index):
    return f"eps{eps:.6g}-{kind}-{index:04d}"


# Seeds

def _pairs_from_points(points, manifold, r_cut):
    pairs = []
    for i, x in enumerate(points):
        for y in points[i + 1:]:
            if manifold.dist(x, y) >= 2.0 * r_cut * (1.0 - 1e-12):
                pairs.append((x, y))
    return pairs


def _lattice_points(manifold, per_axis):
    axes = [(np.arange(per_axis) + 0.5) * length / per_axis for length in manifold.lengths]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, manifold.n)


def _random_pairs(manifold, r_cut, count, random_seed):
    rng = np.random.default_rng(random_seed)
    lengths = np.asarray(manifold.lengths)
    pairs = []
    for _ in range(MAX_RANDOM_ATTEMPTS * count):
        x, y = rng.uniform(0.0, 1.0, size=(2, manifold.n)) * lengths
        if manifold.dist(x, y) >= 2.0 * r_cut:
            pairs.append((x, y))
            if len(pairs) == count:
                break
    if len(pairs) < count:
        logger.warning("only %d of %d random seed pairs are separated by 2 r_cut", len(pairs), count)
    return pairs


def seed_pairs(config, manifold=None):
    """Bubble center pairs for the configured strategy, truncated to ``seeds.count``."""
    manifold = manifold or config.manifold
    seeds = config.seeds
    r_cut = seeds["r_cut"] or default_cutoff(manifold)
    strategy = seeds["strategy"]
    if strategy == "net":
        net = manifold.separated_net(seeds["net_radius"] or 0.5 * r_cut)
        pairs = _pairs_from_points(list(net.points), manifold, r_cut)
    elif strategy == "grid":
        pairs = _pairs_from_points(list(_lattice_points(manifold, seeds["per_axis"])), manifold, r_cut)
    elif strategy == "random":
        pairs = _random_pairs(manifold, r_cut, seeds["count"], seeds["random_seed"])
    else:
        pairs = [(np.asarray(x, dtype=float), np.asarray(y, dtype=float)) for x, y in seeds["pairs"]]
    if seeds["count"] is not None:
        pairs = pairs[:seeds["count"]]
    return [(manifold.as_points(x), manifold.as_points(y)) for x, y in pairs], r_cut


def positive_centers(pairs):
    centers = []
    for x, _ in pairs:
        if not any(np.array_equal(x, seen) for seen in centers):
            centers.append(x)
    return centers


# Execution

@contextlib.contextmanager
def _pool(jobs):
    if jobs is None or jobs <= 1:
        yield None
        return
    formatter = settings.LOGGING["formatters"]["verbose"]
    level = logging.getLogger("nodal").getEffectiveLevel()
    with ProcessPoolExecutor(max_workers=jobs, initializer=configure_worker_logging,
                             initargs=(formatter, level)) as pool:
        yield pool


def _run_tasks(pool, tasks):
    if pool is None:
        results = [run_seed(task) for task in tasks]
    else:
        results = list(pool.map(run_seed, tasks))
    return [
        SolutionRecord.from_payload(record_id(task.eps, task.kind, task.index), payload,
                                    values, _manifold_of(task))
        for task, (payload, values) in zip(tasks, results)
    ]


def _manifold_of(task):
    return TorusManifold(tuple(task.lengths), tuple(task.grid_sizes))


def _task(config, params, kind, index, u0, seed, alpha, s_eps):
    manifold = u0.manifold
    return SeedTask(
        index=index,
        kind=kind,
        eps=params.eps,
        m=params.m,
        lengths=manifold.lengths,
        grid_sizes=manifold.grid_sizes,
        values=np.asarray(u0.values),
        seed=seed,
        flow=config.flow_config(alpha=alpha),
        polish_steps=config.polish_steps,
        s_eps=s_eps,
        radius=config.concentration["radius"],
        eta=config.concentration["eta"],
        pde_factor=config.checks["pde_factor"],
    )


def run_positive(config, params, profile, centers, r_cut, pool=None):
    """Flow Nehari-projected single bubbles to positive solutions; their minimum energy is m_eps."""
    manifold = config.manifold
    tasks = []
    for index, center in enumerate(centers):
        u0 = projected_bubble(center, params.eps, profile, manifold, params, r_cut)
        seed_constants = constants(u0, params)
        seed = {"strategy": config.seeds["strategy"], "x": center.tolist(), "r_cut": r_cut}
        tasks.append(_task(config, params, POSITIVE, index, u0, seed, seed_constants.alpha, seed_constants.S_eps))
    records = _run_tasks(pool, tasks)
    logger.info("eps=%g: %d/%d positive runs converged", params.eps,
                sum(record.converged for record in records), len(records))
    return records


def run_nodal(config, params, profile, pairs, r_cut, alpha, s_eps, pool=None):
    """Flow the two-bubble seeds i_eps(x, y); the least converged nodal energy is d_eps."""
    manifold = config.manifold
    tasks = []
    failed = []
    for index, (x, y) in enumerate(pairs):
        try:
            pair = seed_pair(x, y, params.eps, profile, manifold, params, r_cut)
        except NodalLabError as exc:
            logger.warning("eps=%g: seed pair %d rejected: %s", params.eps, index, exc)
            failed.append(SolutionRecord(
                record_id=record_id(params.eps, NODAL, index),
                kind=NODAL,
                eps=params.eps,
                index=index,
                seed={"strategy": config.seeds["strategy"], "x": x.tolist(), "y": y.tolist()},
                outcome=f"error:{type(exc).__name__}",
                error=str(exc),
            ))
            continue
        seed = {
            "strategy": config.seeds["strategy"],
            "x": pair.x.tolist(),
            "y": pair.y.tolist(),
            "r_cut": r_cut,
            "admissible": pair.admissible,
            "admissible_injectivity": pair.admissible_injectivity,
            "part_residuals": list(pair.part_residuals),
        }
        tasks.append(_task(config, params, NODAL, index, pair.field, seed, alpha, s_eps))
    records = sorted(_run_tasks(pool, tasks) + failed, key=lambda record: record.index)
    logger.info("eps=%g: %d/%d nodal runs converged", params.eps,
                sum(record.converged for record in records), len(records))
    return records


# Clustering

def _anchor(record, sign):
    if record.cm and "c_plus" in record.cm:
        return np.asarray(record.cm["c_plus" if sign > 0 else "c_minus"])
    values = record.field.values
    index = np.argmax(values) if sign > 0 else np.argmin(values)
    return record.field.manifold.node(index)


def _equivalent(a, b, params, energy_tol, shape_tol):
    ja, jb = a.total_energy, b.total_energy
    if abs(ja - jb) > energy_tol * max(abs(ja), 1.0):
        return False
    manifold = a.field.manifold
    u, v = a.field, b.field
    scale = max(eps_norm(u, params), eps_norm(v, params))
    target = _anchor(a, 1)
    for sign in (1, -1):
        shift = manifold.lattice_shift(manifold.wrapped_difference(_anchor(b, sign), target))
        candidate = sign * v.translated(shift)
        if eps_norm(u - candidate, params) <= shape_tol * scale:
            return True
    return False


def cluster_solutions(records, m, energy_tol=1e-3, shape_tol=0.05):
    """
    Count nodal solutions up to lattice translation and u -> -u.

    Only converged sign-changing records with a field take part; each gets a
    ``cluster_id``, the others are reset to None.
    """
    eps_values = {record.eps for record in records}
    if len(eps_values) > 1:
        raise MixedEps(f"cluster_solutions needs records of one eps, got {sorted(eps_values)}.")
    members = [
        record for record in records
        if record.kind == NODAL and record.converged and record.field is not None and record.sign_changing
    ]
    for record in records:
        record.cluster_id = None
    if not members:
        return 0

    params = EpsParams.for_manifold(members[0].field.manifold, members[0].eps, m)
    size = len(members)
    adjacency = np.eye(size, dtype=bool)
    for i in range(size):
        for j in range(i + 1, size):
            if _equivalent(members[i], members[j], params, energy_tol, shape_tol):
                adjacency[i, j] = adjacency[j, i] = True
    count, labels = connected_components(csr_matrix(adjacency), directed=False)
    for record, label in zip(members, labels):
        record.cluster_id = int(label)
    logger.info("eps=%g: %d nodal records form %d clusters", params.eps, size, count)
    return int(count)


# Experiments

def ground_profile(config, n=None, p=None):
    if n is None or p is None:
        params = config.params(config.eps_list[0])
        n, p = params.n, params.p
    section = config.groundstate
    return shoot(n, p, tol=section["tol"], r_max=section["r_max"], samples=section["samples"])


def new_archive(config, kind, profile):
    manifold = config.manifold
    return SolutionArchive(
        kind=kind,
        name=config.name,
        config=config.data,
        lengths=manifold.lengths,
        grid_sizes=manifold.grid_sizes,
        m=config.m,
        profile=profile,
        ground={**profile.metadata(), "nehari_scaling_level": nehari_scaling_level(profile)},
    )


def run_experiment(config, kind, jobs=None, save=True):
    """Run one experiment kind and return its archive, written to ``config.output_dir`` when ``save``."""
    if kind not in KINDS:
        raise ValueError(f"Unknown experiment kind {kind!r}; expected one of {KINDS}.")
    if kind == DIAGNOSE:
        return run_diagnose(config.output_dir, save=save)

    manifold = config.manifold
    profile = ground_profile(config)
    archive = new_archive(config, kind, profile)
    logger.info("%s: m(E) = %.10g for n=%d q=%g", config.name, profile.mE, profile.n, profile.q)

    if kind != GROUND:
        pairs, r_cut = seed_pairs(config, manifold)
        centers = positive_centers(pairs) or [manifold.node(0)]
        if kind == MULTIPLICITY:
            archive.notes.append(CLUSTER_NOTE)
        with _pool(jobs) as pool:
            for eps in sorted(config.eps_list, reverse=True):
                _run_eps(config, kind, archive, config.params(eps), profile, pairs, centers, r_cut, pool)

    if save:
        archive_io(archive, "save", config.output_dir)
    return archive


def _run_eps(config, kind, archive, params, profile, pairs, centers, r_cut, pool):
    positives = run_positive(config, params, profile, centers, r_cut, pool)
    archive.extend(positives)
    if kind == SWEEP_M:
        return

    ground = _ground_constants(positives)
    if ground is None:
        logger.warning("eps=%g: no converged positive solution, nodal runs skipped", params.eps)
        return
    if not pairs:
        logger.warning("eps=%g: no admissible seed pairs for r_cut", params.eps)
        return

    nodal = run_nodal(config, params, profile, pairs, r_cut, ground["alpha"], ground["S_eps"], pool)
    archive.extend(nodal)
    if kind == MULTIPLICITY:
        count = cluster_solutions(nodal, params.m, **config.clustering)
        archive.notes.append(
            f"eps={params.eps:g}: {count} nodal clusters, expected at least {expected_nodal_pairs(params.n)}."
        )


def _ground_constants(positives):
    """S_eps, m_eps and alpha at the least-energy converged positive record."""
    converged = [record for record in positives if record.converged and record.constants]
    best = min(converged, key=lambda record: (record.total_energy, record.index), default=None)
    return best.constants if best else None


def diagnose(archive):
    """Recompute every diagnostic of the stored fields and re-cluster multiplicity archives."""
    config = archive.config
    flow = config.get("flow", {})
    concentration = config.get("concentration", {})
    checks = config.get("checks", {})
    stop_delta = flow.get("stop_delta", 1e-12)

    for eps in archive.eps_values:
        params = EpsParams(eps=eps, n=len(archive.lengths), m=archive.m)
        positives = archive.records_for(eps, POSITIVE)
        nodal = archive.records_for(eps, NODAL)
        ground = _ground_constants(positives)
        for record in positives + nodal:
            if record.field is None:
                continue
            if ground:
                alpha, s_eps = ground["alpha"], ground["S_eps"]
            else:
                alpha, s_eps = constants(record.field, params).alpha, None
            diagnostics = assess(
                record.field, params, record.kind, alpha,
                s_eps=s_eps,
                radius=concentration.get("radius", 10.0),
                eta=concentration.get("eta", 0.9),
                pde_factor=checks.get("pde_factor", 10.0),
                stop_delta=stop_delta,
                solver_tol=flow.get("solver_tol", 1e-10),
            )
            for key, value in diagnostics.items():
                setattr(record, key, value)
            record.converged = bool(record.outcome == Outcome.CONVERGED.value and record.grad_norm <= np.sqrt(stop_delta))
        if archive.kind == MULTIPLICITY:
            cluster_solutions(nodal, archive.m, **config.get("clustering", {}))
    logger.info("diagnosed %d records over %d eps values", len(archive.records), len(archive.eps_values))
    return summary_rows(archive)


def run_diagnose(path, save=True):
    archive = archive_io(path, "load")
    diagnose(archive)
    if save:
        archive_io(archive, "save", path)
    return archive

