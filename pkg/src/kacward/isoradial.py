"""Isoradial lattice regions and their Ising weights.

Every edge carries the half-angle ``theta`` of its rhombus: the angle between
the edge and a side of the rhombus spanned by the edge and its dual edge.
Generated lattices have unit edge length, so the common circumradius is
``1 / (2 cos theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import CouplingUndefinedError, InvalidIsoradialError, PreconditionError
from .geometry import PlanarGraph, turning_angle_vectors

ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class IsoradialLattice:
    """A finite region of an isoradial graph.

    ``interior[v]`` is True when ``v`` has the same degree in the region as in
    the infinite lattice; angle sums are only enforced there.
    """

    graph: PlanarGraph
    theta: np.ndarray
    circumradius: float
    interior: np.ndarray
    kind: str = "custom"

    @property
    def k_bound(self) -> float:
        return float(self.theta.min())

    @property
    def K_bound(self) -> float:
        return float(self.theta.max())

    @property
    def deficient(self) -> np.ndarray:
        """Vertices whose degree is smaller than in the full lattice."""
        return ~self.interior

    def angle_sums(self) -> np.ndarray:
        s = np.zeros(self.graph.n_vertices)
        np.add.at(s, self.graph.edges[:, 0], self.theta)
        np.add.at(s, self.graph.edges[:, 1], self.theta)
        return s

    def critical_weights(self) -> np.ndarray:
        return np.tan(self.theta / 2)


@dataclass(frozen=True)
class IsingWeights:
    beta: float
    J: np.ndarray
    x: np.ndarray


def _check_angle_sums(graph, theta, interior):
    sums = np.zeros(graph.n_vertices)
    np.add.at(sums, graph.edges[:, 0], theta)
    np.add.at(sums, graph.edges[:, 1], theta)
    for v in np.flatnonzero(interior):
        if abs(sums[v] - math.pi) > ANGLE_TOL:
            raise InvalidIsoradialError(
                f"angle sum at interior vertex {v} is {sums[v]!r}, expected pi", vertex=int(v))


def _surrounded(graph: PlanarGraph) -> np.ndarray:
    """Vertices whose incident edges leave no angular gap of pi or more."""
    out = np.zeros(graph.n_vertices, dtype=bool)
    for v in range(graph.n_vertices):
        nbrs = graph.ccw_neighbors(v)
        if len(nbrs) < 3:
            continue
        gaps = []
        for a, b in zip(nbrs, nbrs[1:] + nbrs[:1]):
            t = turning_angle_vectors(complex(graph.direction[a]), complex(graph.direction[b]))
            gaps.append(t if t > 0 else t + 2 * math.pi)
        out[v] = max(gaps) < math.pi - ANGLE_TOL
    return out


def _finish(points, edges, theta_value, full_degree, kind):
    graph = PlanarGraph(points, edges)
    used = graph.degree > 0
    if not used.all():
        remap = -np.ones(graph.n_vertices, dtype=np.int64)
        remap[used] = np.arange(used.sum())
        graph = PlanarGraph(graph.points[used], remap[graph.edges])
    theta = np.full(graph.n_edges, theta_value)
    interior = graph.degree == full_degree
    _check_angle_sums(graph, theta, interior)
    radius = 1.0 / (2.0 * math.cos(theta_value))
    return IsoradialLattice(graph, theta, radius, interior, kind)


def build_square(box_radius: int | None = None, *, shape=None) -> IsoradialLattice:
    """Square lattice on {(i, j): |i|, |j| <= r}, or an ``nx`` by ``ny`` vertex grid."""
    if shape is None:
        if box_radius is None or box_radius < 1:
            raise PreconditionError("box_radius must be >= 1")
        xs = ys = np.arange(-box_radius, box_radius + 1)
    else:
        nx, ny = shape
        if nx < 1 or ny < 1:
            raise PreconditionError("grid shape must be positive")
        xs, ys = np.arange(nx), np.arange(ny)
    index = {}
    points = []
    for j in ys:
        for i in xs:
            index[(int(i), int(j))] = len(points)
            points.append(complex(i, j))
    edges = []
    for (i, j), v in index.items():
        if (i + 1, j) in index:
            edges.append((v, index[(i + 1, j)]))
        if (i, j + 1) in index:
            edges.append((v, index[(i, j + 1)]))
    return _finish(np.array(points), edges, math.pi / 4, 4, "square")


_OMEGA = complex(0.5, math.sqrt(3) / 2)


def _triangular_points(box_radius, keep):
    jmax = int(math.floor(box_radius / (math.sqrt(3) / 2) + 1e-9))
    index, points = {}, []
    for j in range(-jmax, jmax + 1):
        for i in range(-2 * box_radius - jmax - 1, 2 * box_radius + jmax + 2):
            z = i + j * _OMEGA
            if abs(z.real) <= box_radius + 1e-9 and abs(z.imag) <= box_radius + 1e-9 and keep(i, j):
                index[(i, j)] = len(points)
                points.append(z)
    return index, points


def build_triangular(box_radius: int) -> IsoradialLattice:
    """Triangular lattice points in the square [-r, r]^2 with unit edges."""
    if box_radius < 1:
        raise PreconditionError("box_radius must be >= 1")
    index, points = _triangular_points(box_radius, lambda i, j: True)
    edges = []
    for (i, j), v in index.items():
        for di, dj in ((1, 0), (0, 1), (-1, 1)):
            w = index.get((i + di, j + dj))
            if w is not None:
                edges.append((v, w))
    return _finish(np.array(points), edges, math.pi / 6, 6, "triangular")


def build_hexagonal(box_radius: int) -> IsoradialLattice:
    """Honeycomb vertices in the square [-r, r]^2 with unit edges.

    Obtained from the triangular lattice by deleting the sublattice of hexagon
    centers ``(i - j) = 0 mod 3``.
    """
    if box_radius < 1:
        raise PreconditionError("box_radius must be >= 1")
    index, points = _triangular_points(box_radius, lambda i, j: (i - j) % 3 != 0)
    edges = []
    for (i, j), v in index.items():
        for di, dj in ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)):
            w = index.get((i + di, j + dj))
            if w is not None and v < w:
                edges.append((v, w))
    return _finish(np.array(points), edges, math.pi / 3, 3, "hexagonal")


BUILDERS = {
    "square": build_square,
    "tri": build_triangular,
    "triangular": build_triangular,
    "hex": build_hexagonal,
    "hexagonal": build_hexagonal,
}


def build_lattice(kind: str, box_radius: int) -> IsoradialLattice:
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise PreconditionError(f"unknown lattice kind {kind!r}") from None
    return builder(box_radius)


def from_rhombic_data(vertices, edges, theta, circumradius=None, interior=None) -> IsoradialLattice:
    """Validate user-supplied rhombic data.

    Parameters
    ----------
    theta : array_like
        Half-angle per undirected edge, in (0, pi).
    interior : array_like of bool, optional
        Which vertices have full lattice degree. When omitted, a vertex is
        taken as interior if its edges leave no angular gap of pi or more.

    Raises
    ------
    InvalidIsoradialError
        If an angle lies outside (0, pi) or an interior angle sum is not pi.
    """
    graph = vertices if isinstance(vertices, PlanarGraph) else PlanarGraph(vertices, edges)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (graph.n_edges,):
        raise InvalidIsoradialError("one theta per edge is required")
    bad = np.flatnonzero((theta <= 0) | (theta >= math.pi))
    if len(bad):
        raise InvalidIsoradialError(f"theta out of (0, pi) at edge {bad[0]}")
    if interior is None:
        interior = _surrounded(graph)
    else:
        interior = np.asarray(interior, dtype=bool)
    _check_angle_sums(graph, theta, interior)
    if circumradius is None:
        lengths = np.abs(graph.direction[0::2])
        radii = lengths / (2 * np.cos(theta))
        circumradius = float(np.median(radii)) if len(radii) else 1.0
    return IsoradialLattice(graph, theta, float(circumradius), interior, "custom")


def weights(lattice: IsoradialLattice, beta: float) -> IsingWeights:
    """Ising weights x_e = tanh(beta J_e) with tanh J_e = tan(theta_e / 2).

    At ``beta == 1`` the critical weights tan(theta_e / 2) are returned
    directly, so they exist even where J_e is infinite or undefined.
    """
    if not (0 < beta <= 1):
        raise PreconditionError("beta must lie in (0, 1]")
    t = np.tan(lattice.theta / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        J = np.arctanh(t)
    if beta == 1:
        return IsingWeights(1.0, J, t.copy())
    if np.any(t >= 1):
        k = int(np.flatnonzero(t >= 1)[0])
        raise CouplingUndefinedError(
            f"edge {k} has theta >= pi/2; its coupling constant is not finite")
    return IsingWeights(float(beta), J, np.tanh(beta * J))
