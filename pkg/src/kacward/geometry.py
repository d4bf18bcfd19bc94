"""Straight-line embedded graphs in the plane.

Vertices are complex numbers, undirected edges are index pairs into the
vertex array. Undirected edge ``k`` yields the directed edges ``2k`` (as
listed) and ``2k + 1`` (reversed), so the reversal of a directed edge ``d``
is ``d ^ 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import InvalidEdgeError, InvalidGraphError

GEOMETRIC_TOL = 1e-9


def reverse(d: int) -> int:
    """Index of the reversed directed edge."""
    return d ^ 1


def undirected(d: int) -> int:
    return d >> 1


def arg_principal(z: complex) -> float:
    """Principal argument in (-pi, pi]; the negative real axis maps to +pi."""
    a = math.atan2(z.imag, z.real)
    if a == -math.pi:
        return math.pi
    return a


def turning_angle_vectors(u: complex, v: complex) -> float:
    """Arg(v / u) on the principal branch (-pi, pi]."""
    if u == 0 or v == 0:
        raise InvalidEdgeError("zero-length edge has no direction")
    cross = u.real * v.imag - u.imag * v.real
    dot = u.real * v.real + u.imag * v.imag
    a = math.atan2(cross, dot)
    if a == -math.pi:
        return math.pi
    return a


def orientation(a: complex, b: complex, c: complex, tol: float = GEOMETRIC_TOL) -> int:
    """Sign of the turn a -> b -> c; 0 when c is within ``tol`` of the line ab."""
    u = b - a
    v = c - a
    cross = u.real * v.imag - u.imag * v.real
    length = abs(u)
    if length == 0.0:
        return 0
    if abs(cross) <= tol * length:
        return 0
    return 1 if cross > 0 else -1


def _on_segment(p: complex, a: complex, b: complex, tol: float) -> bool:
    # assumes p collinear with ab
    lo_x, hi_x = min(a.real, b.real) - tol, max(a.real, b.real) + tol
    lo_y, hi_y = min(a.imag, b.imag) - tol, max(a.imag, b.imag) + tol
    return lo_x <= p.real <= hi_x and lo_y <= p.imag <= hi_y


def classify_pair(p1, p2, q1, q2, shared: int, tol: float = GEOMETRIC_TOL) -> str:
    """Classify two segments.

    ``shared`` is the number of common endpoints (by vertex identity).
    Returns one of ``"ok"`` (disjoint or meeting at a common endpoint only),
    ``"cross"`` (proper crossing interior to both), ``"overlap"`` (sharing a
    segment or both endpoints) or ``"touch"`` (an endpoint of one lies in
    the interior of the other).
    """
    if shared == 2:
        return "overlap"
    if shared == 1:
        # arrange so that p1 == q1 is the shared vertex
        if p1 == q2 or p2 == q2:
            q1, q2 = q2, q1
        if p2 == q1:
            p1, p2 = p2, p1
        v = p1
        a, b = p2 - v, q2 - v
        if orientation(v, p2, q2, tol) == 0 and (a.real * b.real + a.imag * b.imag) > 0:
            return "overlap"
        return "ok"
    o1 = orientation(p1, p2, q1, tol)
    o2 = orientation(p1, p2, q2, tol)
    o3 = orientation(q1, q2, p1, tol)
    o4 = orientation(q1, q2, p2, tol)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return "cross"
    if o1 == 0 and o2 == 0:
        if (_on_segment(q1, p1, p2, tol) or _on_segment(q2, p1, p2, tol)
                or _on_segment(p1, q1, q2, tol)):
            return "overlap"
        return "ok"
    if o1 == 0 and _on_segment(q1, p1, p2, tol):
        return "touch"
    if o2 == 0 and _on_segment(q2, p1, p2, tol):
        return "touch"
    if o3 == 0 and _on_segment(p1, q1, q2, tol):
        return "touch"
    if o4 == 0 and _on_segment(p2, q1, q2, tol):
        return "touch"
    return "ok"


@dataclass
class ValidationReport:
    """Outcome of :func:`validate`; never raises."""

    ok: bool
    violations: list = field(default_factory=list)
    crossings: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _scan(points: np.ndarray, edges: np.ndarray, tol: float) -> ValidationReport:
    violations = []
    crossings = []
    m = len(edges)
    for k, (i, j) in enumerate(edges):
        if i == j:
            violations.append((k, k, "loop"))
        elif abs(points[i] - points[j]) <= tol:
            violations.append((k, k, "degenerate"))
    if len(points):
        tree = cKDTree(np.column_stack([points.real, points.imag]))
        for a, b in sorted(tree.query_pairs(tol)):
            violations.append((int(a), int(b), "coincident-vertices"))
    if m < 2:
        return ValidationReport(not violations, violations, crossings)

    a = points[edges[:, 0]]
    b = points[edges[:, 1]]
    xlo = np.minimum(a.real, b.real) - tol
    xhi = np.maximum(a.real, b.real) + tol
    ylo = np.minimum(a.imag, b.imag) - tol
    yhi = np.maximum(a.imag, b.imag) + tol
    # sweep along x to keep the candidate set small
    order = np.argsort(xlo, kind="stable")
    xlo_sorted = xlo[order]
    for pos, k in enumerate(order):
        stop = np.searchsorted(xlo_sorted, xhi[k], side="right")
        cand = order[pos + 1:stop]
        if len(cand) == 0:
            continue
        cand = cand[(ylo[cand] <= yhi[k]) & (yhi[cand] >= ylo[k]) & (xhi[cand] >= xlo[k])]
        ek = edges[k]
        for l in cand:
            el = edges[l]
            shared = len({int(ek[0]), int(ek[1])} & {int(el[0]), int(el[1])})
            kind = classify_pair(points[ek[0]], points[ek[1]], points[el[0]], points[el[1]],
                                 shared, tol)
            pair = (int(min(k, l)), int(max(k, l)))
            if kind == "cross":
                crossings.append(pair)
            elif kind != "ok":
                violations.append(pair + (kind,))
    crossings.sort()
    violations.sort()
    return ValidationReport(not violations, violations, crossings)


def validate(graph_or_vertices, edges=None, tol: float = GEOMETRIC_TOL) -> ValidationReport:
    """Check the pairwise-intersection rule and report every violating pair.

    Accepts either a :class:`PlanarGraph` or raw ``(vertices, edges)``.
    """
    if isinstance(graph_or_vertices, PlanarGraph):
        return _scan(graph_or_vertices.points, graph_or_vertices.edges, tol)
    points = as_points(graph_or_vertices)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return _scan(points, e, tol)


def as_points(vertices) -> np.ndarray:
    v = np.asarray(vertices)
    if np.iscomplexobj(v):
        return v.astype(np.complex128).ravel()
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return np.zeros(0, dtype=np.complex128)
    if v.ndim == 1:
        # real numbers are points on the real axis
        v = np.column_stack([v, np.zeros_like(v)])
    if v.ndim != 2 or v.shape[1] != 2:
        raise InvalidGraphError("vertices must be complex numbers or (x, y) pairs")
    if not np.all(np.isfinite(v)):
        raise InvalidGraphError("vertex coordinates must be finite")
    return v[:, 0] + 1j * v[:, 1]


class PlanarGraph:
    """A finite straight-line graph embedded in the plane.

    Parameters
    ----------
    vertices : array_like
        Complex numbers or ``(x, y)`` pairs.
    edges : array_like of shape (m, 2)
        Undirected edges as vertex-index pairs. Edge ``k`` gives directed
        edges ``2k`` (listed orientation) and ``2k + 1``.
    tol : float
        Geometric tolerance for coincidence tests.

    Raises
    ------
    InvalidGraphError
        If two edges overlap, touch away from a common endpoint, or two
        vertices coincide.
    """

    def __init__(self, vertices, edges, tol: float = GEOMETRIC_TOL):
        self.points = as_points(vertices)
        self.points.setflags(write=False)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        n = len(self.points)
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise InvalidGraphError("edge refers to a missing vertex")
        self.edges = e
        self.edges.setflags(write=False)
        self.tol = tol
        report = _scan(self.points, self.edges, tol)
        if not report.ok:
            raise InvalidGraphError(
                f"invalid embedding: {len(report.violations)} violating pair(s), "
                f"first {report.violations[0]}", report)
        self.crossings = frozenset(report.crossings)

        m = len(e)
        tail = np.empty(2 * m, dtype=np.int64)
        head = np.empty(2 * m, dtype=np.int64)
        tail[0::2], head[0::2] = e[:, 0], e[:, 1]
        tail[1::2], head[1::2] = e[:, 1], e[:, 0]
        self.tail, self.head = tail, head
        self.direction = self.points[head] - self.points[tail]
        out = [[] for _ in range(n)]
        for d in range(2 * m):
            out[tail[d]].append(d)
        self.out_edges = [tuple(o) for o in out]
        self.degree = np.array([len(o) for o in out], dtype=np.int64)

    # sizes -----------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.points)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_directed(self) -> int:
        return 2 * len(self.edges)

    @property
    def max_degree(self) -> int:
        return int(self.degree.max()) if len(self.degree) else 0

    def __len__(self):
        return self.n_edges

    def __repr__(self):
        return (f"PlanarGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges}, "
                f"crossings={len(self.crossings)})")

    # directed-edge helpers --------------------------------------------
    def in_edges(self, v: int) -> tuple:
        return tuple(d ^ 1 for d in self.out_edges[v])

    def successors(self, d: int) -> tuple:
        """Non-backtracking continuations of ``d``."""
        back = d ^ 1
        return tuple(g for g in self.out_edges[self.head[d]] if g != back)

    def directed_index(self, u: int, v: int) -> int:
        for d in self.out_edges[u]:
            if self.head[d] == v:
                return d
        raise KeyError(f"no edge ({u}, {v})")

    def midpoint(self, d: int) -> complex:
        return 0.5 * (self.points[self.tail[d]] + self.points[self.head[d]])

    def angle(self, d: int) -> float:
        """Direction angle Arg(h(d) - t(d)) on the principal branch."""
        return arg_principal(complex(self.direction[d]))

    def turning_angle(self, e: int, g: int) -> float:
        return turning_angle(self, e, g)

    def ccw_neighbors(self, v: int) -> list:
        """Outgoing directed edges at ``v`` sorted counterclockwise by angle."""
        return sorted(self.out_edges[v], key=lambda d: self.angle(d))

    # derived graphs ---------------------------------------------------
    def edge_subgraph(self, keep) -> "PlanarGraph":
        """Graph on the same vertex array with only the listed undirected edges."""
        keep = sorted(int(k) for k in keep)
        return PlanarGraph(self.points, self.edges[keep], self.tol)

    def without_edges(self, drop) -> "PlanarGraph":
        drop = {int(k) for k in drop}
        return self.edge_subgraph(k for k in range(self.n_edges) if k not in drop)


def turning_angle(graph: PlanarGraph, e: int, g: int) -> float:
    """Turning angle from directed edge ``e`` to ``g`` in (-pi, pi].

    The reversal ``g == -e`` gives exactly ``pi``.
    """
    if g == e ^ 1:
        return math.pi
    return turning_angle_vectors(complex(graph.direction[e]), complex(graph.direction[g]))


def count_crossings(graph: PlanarGraph, edge_subset=None) -> int:
    """Number of unordered crossing pairs among ``edge_subset`` (default: all)."""
    if edge_subset is None:
        return len(graph.crossings)
    s = set(int(k) for k in edge_subset)
    return sum(1 for a, b in graph.crossings if a in s and b in s)


@dataclass(frozen=True)
class ModifiedGraph:
    """The graph with edges e, g replaced by the half-edges {m(e), h(e)}, {t(g), m(g)}.

    ``graph`` is ``None`` when ``g == -e`` (the two half-edges coincide).
    ``half_in`` and ``half_out`` are undirected edge indices in ``graph``;
    ``directed_in`` = (m(e), h(e)) and ``directed_out`` = (t(g), m(g)) are
    directed indices. ``base_edge`` maps each remaining edge to its index in
    the base graph (``-1`` for the half-edges).
    """

    base: PlanarGraph
    e: int
    g: int
    graph: PlanarGraph | None
    weights: np.ndarray | None
    half_in: int
    half_out: int
    directed_in: int
    directed_out: int
    loose_ends: tuple
    base_edge: np.ndarray | None

    @property
    def degenerate(self) -> bool:
        return self.graph is None


def modify_graph(graph: PlanarGraph, e: int, g: int, weights=None) -> ModifiedGraph:
    """Build G_{e,g}.

    The half-edge {m(e), h(e)} inherits the weight of ``e``; the half-edge
    {t(g), m(g)} has weight one (for ``g != -e``).
    """
    if weights is None:
        weights = np.ones(graph.n_edges)
    weights = np.asarray(weights, dtype=float)
    ue, ug = e >> 1, g >> 1
    if g == e ^ 1:
        return ModifiedGraph(graph, e, g, None, None, -1, -1, -1, -1,
                             (graph.midpoint(e), graph.midpoint(g)), None)
    keep = [k for k in range(graph.n_edges) if k not in (ue, ug)]
    pts = list(graph.points)
    me = len(pts)
    pts.append(graph.midpoint(e))
    if g == e:
        mg = me
    else:
        mg = len(pts)
        pts.append(graph.midpoint(g))
    edges = [tuple(graph.edges[k]) for k in keep]
    w = [weights[k] for k in keep]
    base_edge = list(keep)
    half_in = len(edges)
    edges.append((me, int(graph.head[e])))
    w.append(weights[ue])
    base_edge.append(-1)
    half_out = len(edges)
    edges.append((int(graph.tail[g]), mg))
    w.append(1.0)
    base_edge.append(-1)
    mod = PlanarGraph(np.array(pts), edges, graph.tol)
    return ModifiedGraph(graph, e, g, mod, np.array(w), half_in, half_out,
                         2 * half_in, 2 * half_out,
                         (complex(pts[me]), complex(pts[mg])), np.array(base_edge))


def germs_interleave(v: complex, a1: complex, a2: complex, b1: complex, b2: complex) -> bool:
    """Whether the pair of rays (v->b1, v->b2) separates (v->a1, v->a2).

    Used to decide if two passages of curves through the common point ``v``
    cross each other there. All four directions must be distinct.
    """
    ref = a1 - v

    def ang(p):
        t = turning_angle_vectors(ref, p - v)
        return t if t >= 0 else t + 2 * math.pi

    x = ang(a2)
    y1, y2 = ang(b1), ang(b2)
    if min(abs(x), abs(y1), abs(y2), abs(y1 - x), abs(y2 - x), abs(y1 - y2)) < 1e-12:
        raise InvalidGraphError("curve germs coincide; passages share an edge")
    return (0 < y1 < x) != (0 < y2 < x)


def circumcenter(a: complex, b: complex, c: complex) -> complex:
    """Center of the circle through three non-collinear points."""
    b0, c0 = b - a, c - a
    d = 2 * (b0.real * c0.imag - b0.imag * c0.real)
    if abs(d) < 1e-15:
        raise InvalidGraphError("collinear points have no circumcenter")
    bb, cc = abs(b0) ** 2, abs(c0) ** 2
    ux = (c0.imag * bb - b0.imag * cc) / d
    uy = (b0.real * cc - c0.real * bb) / d
    return a + complex(ux, uy)
