import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DimensionMismatch, InverseOutsideInjectivityRadius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetReport:
    eps: float
    indices: np.ndarray
    points: np.ndarray
    overlap_constant: int
    min_separation: float

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class TorusManifold:
    """
    Flat n-torus (n = 1, 2, 3) discretized on the cell-centered uniform lattice.

    Node ``i`` along axis ``k`` sits at ``(i + 1/2) * h_k``; fields are stored as
    arrays of shape ``grid_sizes`` in C order, so the linear node index is the
    ``np.ravel_multi_index`` of the lattice index.
    """
    lengths: tuple
    grid_sizes: tuple

    def __post_init__(self):
        lengths = tuple(float(value) for value in np.atleast_1d(self.lengths))
        sizes = tuple(int(value) for value in np.atleast_1d(self.grid_sizes))
        if not 1 <= len(lengths) <= 3:
            raise DimensionMismatch(f"Torus dimension must be 1, 2 or 3, got {len(lengths)}.")
        if len(sizes) != len(lengths):
            raise DimensionMismatch("lengths and grid_sizes must have the same number of axes.")
        if any(length <= 0 for length in lengths):
            raise ValueError("Every period must be positive.")
        if any(size < 8 for size in sizes):
            raise ValueError("Every axis needs at least 8 nodes.")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "grid_sizes", sizes)

    @property
    def n(self):
        return len(self.lengths)

    @property
    def shape(self):
        return self.grid_sizes

    @property
    def node_count(self):
        return int(np.prod(self.grid_sizes))

    @property
    def spacings(self):
        return tuple(length / size for length, size in zip(self.lengths, self.grid_sizes))

    @property
    def quad_weight(self):
        return float(np.prod(self.spacings))

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    @property
    def diameter(self):
        return float(np.sqrt(sum((length / 2.0) ** 2 for length in self.lengths)))

    @property
    def injectivity_radius(self):
        return min(self.lengths) / 2.0

    @property
    def curvature(self):
        # s_g of the flat metric
        return 0.0

    @cached_property
    def coordinates(self):
        return tuple((np.arange(size) + 0.5) * h for size, h in zip(self.grid_sizes, self.spacings))

    @cached_property
    def nodes(self):
        mesh = np.meshgrid(*self.coordinates, indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.n)

    def node(self, index):
        return self.nodes[int(index)].copy()

    def as_points(self, x):
        points = np.asarray(x, dtype=float)
        if points.ndim == 0:
            points = points.reshape(1)
        if points.shape[-1] != self.n:
            raise DimensionMismatch(f"Expected points with {self.n} coordinates, got shape {points.shape}.")
        return points

    def wrapped_difference(self, x, y):
        """Signed per-axis difference y - x reduced to [-L_i/2, L_i/2]."""
        periods = np.asarray(self.lengths)
        delta = self.as_points(y) - self.as_points(x)
        return delta - periods * np.round(delta / periods)

    def dist(self, x, y):
        delta = self.wrapped_difference(x, y)
        return np.sqrt(np.sum(delta ** 2, axis=-1))

    def exp(self, x, v):
        return np.mod(self.as_points(x) + self.as_points(v), np.asarray(self.lengths))

    def log(self, x, y):
        delta = self.wrapped_difference(x, y)
        norm = float(np.max(np.sqrt(np.sum(delta ** 2, axis=-1))))
        if norm >= self.injectivity_radius:
            raise InverseOutsideInjectivityRadius(
                f"dist(x, y) = {norm:.6g} is not below the injectivity radius {self.injectivity_radius:.6g}."
            )
        return delta

    def exp_log(self, x, arg, mode="forward"):
        if mode == "forward":
            return self.exp(x, arg)
        if mode == "inverse":
            return self.log(x, arg)
        raise ValueError(f"Unknown exp_log mode {mode!r}.")

    def distance_field(self, center):
        """Distances from ``center`` to every node, shaped like a field."""
        center = self.as_points(center)
        squared = np.zeros(self.shape)
        for axis, (coords, length) in enumerate(zip(self.coordinates, self.lengths)):
            delta = coords - center[axis]
            delta = delta - length * np.round(delta / length)
            expand = [np.newaxis] * self.n
            expand[axis] = slice(None)
            squared = squared + (delta ** 2)[tuple(expand)]
        return np.sqrt(squared)

    def lag_distances(self):
        """Length of every lattice lag k*h (wrapped), shaped like a field; used as convolution kernels."""
        squared = np.zeros(self.shape)
        for axis, (size, h) in enumerate(zip(self.grid_sizes, self.spacings)):
            lag = np.arange(size)
            lag = np.minimum(lag, size - lag) * h
            expand = [np.newaxis] * self.n
            expand[axis] = slice(None)
            squared = squared + (lag ** 2)[tuple(expand)]
        return np.sqrt(squared)

    def laplacian(self, values):
        """Second-order periodic central differences, axis by axis."""
        result = np.zeros_like(values)
        for axis, h in enumerate(self.spacings):
            result += (np.roll(values, 1, axis=axis) - 2.0 * values + np.roll(values, -1, axis=axis)) / h ** 2
        return result

    def lattice_shift(self, vector):
        vector = self.as_points(vector)
        return tuple(int(np.round(v / h)) % size for v, h, size in zip(vector, self.spacings, self.grid_sizes))

    def translate(self, values, shift):
        return np.roll(values, tuple(shift), axis=tuple(range(self.n)))

    def separated_net(self, eps):
        """
        Greedy maximal set of nodes with pairwise distance >= 2*eps.

        Maximality makes the 2*eps-balls cover every node; the report carries the
        largest number of 3*eps-balls any node lies in.
        """
        tol = 1e-9 * max(self.lengths)
        covered = np.zeros(self.node_count, dtype=bool)
        chosen = []
        while not covered.all():
            index = int(np.argmax(~covered))
            chosen.append(index)
            covered |= self.dist(self.nodes[index], self.nodes) < 2.0 * eps - tol

        points = self.nodes[chosen]
        overlap = np.zeros(self.node_count, dtype=int)
        for point in points:
            overlap += self.dist(point, self.nodes) < 3.0 * eps
        if len(points) > 1:
            pairwise = np.array([self.dist(p, points[i + 1:]).min() for i, p in enumerate(points[:-1])])
            min_separation = float(pairwise.min())
        else:
            min_separation = float("inf")
        logger.debug("separated net eps=%.4g: %d points, overlap constant %d", eps, len(points), overlap.max())
        return NetReport(
            eps=float(eps),
            indices=np.asarray(chosen, dtype=int),
            points=points,
            overlap_constant=int(overlap.max()),
            min_separation=min_separation,
        )
