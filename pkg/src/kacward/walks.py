"""Brute-force combinatorics of non-backtracking walks and even subgraphs.

Everything here is computed from the definitions (turning angles, edge
weights, geometric crossings) and serves as the oracle against which the
linear-algebra routes in :mod:`kacward.operator` are checked.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import EnumerationCapError, InvalidGraphError, NoCertificateError, PreconditionError
from .geometry import PlanarGraph, count_crossings, germs_interleave, turning_angle
from .operator import assemble, check_edge_weights, walk_series_powers

DEFAULT_WALK_CAP = 2_000_000
MAX_CYCLE_RANK = 22
MAX_LISTED_RANK = 16


@dataclass(frozen=True)
class Walk:
    """A non-backtracking walk given by its directed-edge indices."""

    edges: tuple
    weight: complex
    winding: float

    @property
    def length(self) -> int:
        return len(self.edges) - 1

    def __len__(self):
        return self.length

    def to_json(self) -> str:
        return json.dumps({"edges": list(self.edges),
                           "weight": [self.weight.real, self.weight.imag],
                           "winding": self.winding})


def check_walk(graph: PlanarGraph, edges) -> None:
    for a, b in zip(edges, edges[1:]):
        if graph.head[a] != graph.tail[b] or b == a ^ 1:
            raise PreconditionError(f"({a}, {b}) is not a non-backtracking step")


def winding(graph: PlanarGraph, edges) -> float:
    """Total turning angle; the last edge contributes its incoming turn."""
    return float(sum(turning_angle(graph, a, b) for a, b in zip(edges, edges[1:])))


def walk_weight(graph: PlanarGraph, x, edges) -> complex:
    """exp(i/2 * winding) times the weights of all edges but the last."""
    x = check_edge_weights(graph, x)
    if len(edges) <= 1:
        return 1 + 0j
    prod = 1.0
    for d in edges[:-1]:
        prod *= x[d >> 1]
    return cmath.exp(0.5j * winding(graph, edges)) * prod


def make_walk(graph: PlanarGraph, x, edges) -> Walk:
    edges = tuple(int(d) for d in edges)
    check_walk(graph, edges)
    return Walk(edges, walk_weight(graph, x, edges), winding(graph, edges))


def reversed_walk(graph: PlanarGraph, x, walk: Walk) -> Walk:
    return make_walk(graph, x, [d ^ 1 for d in reversed(walk.edges)])


def _forbidden(kind, e, g):
    """Predicate telling whether ``d`` may be *gone through* at ``position``."""
    ue, ug = e >> 1, g >> 1
    if kind == "W":
        return lambda d, pos: False
    if kind == "U":
        bad = {e ^ 1, g ^ 1}
        return lambda d, pos: d in bad
    if kind == "V":
        def f(d, pos):
            u = d >> 1
            if u == ue and pos > 0:
                return True
            return ue != ug and u == ug
        return f
    raise PreconditionError(f"unknown walk class {kind!r}")


def _dfs(graph, x, e, max_len, cap, forbidden, avoid):
    """Depth-first enumeration yielding (edges, weight, winding) for every walk
    from ``e`` of length <= max_len, children in increasing index order."""
    angle_cache = {}

    def ang(a, b):
        key = (a, b)
        t = angle_cache.get(key)
        if t is None:
            t = angle_cache[key] = turning_angle(graph, a, b)
        return t

    count = 0
    stack = [((e,), 0.0, 1.0)]
    while stack:
        edges, alpha, prod = stack.pop()
        count += 1
        if count > cap:
            raise EnumerationCapError(f"walk enumeration exceeded cap {cap}", count=count)
        yield edges, alpha, prod
        n = len(edges) - 1
        last = edges[-1]
        if n >= max_len or forbidden(last, n):
            continue
        xl = prod * x[last >> 1]
        children = [d for d in graph.successors(last) if (d >> 1) not in avoid]
        for d in reversed(children):
            stack.append((edges + (d,), alpha + ang(last, d), xl))


def enumerate_walks(graph: PlanarGraph, x, e: int, g: int, max_len: int, *, kind: str = "W",
                    avoid=(), cap: int = DEFAULT_WALK_CAP) -> list:
    """All walks from ``e`` to ``g`` of length at most ``max_len``.

    ``kind`` selects the class: ``"W"`` (all walks), ``"U"`` (walks not going
    through -e or -g) or ``"V"`` (walks going through the undirected edge of
    ``e`` once and, if different, never through that of ``g``). Edges in
    ``avoid`` are treated as deleted from the graph. The output is in
    lexicographic order of the edge sequences.
    """
    x = check_edge_weights(graph, x)
    forbidden = _forbidden(kind, e, g)
    avoid = {int(a) for a in avoid}
    out = []
    try:
        for edges, alpha, prod in _dfs(graph, x, e, max_len, cap, forbidden, avoid):
            if edges[-1] == g and not (kind == "V" and len(edges) == 1):
                out.append(Walk(edges, cmath.exp(0.5j * alpha) * prod, alpha))
    except EnumerationCapError as err:
        err.partial = out
        raise
    return out


def walk_sums(graph: PlanarGraph, x, e: int, max_len: int, *, kind: str = "W", g: int | None = None,
              avoid=(), cap: int = DEFAULT_WALK_CAP) -> np.ndarray:
    """Sums of walk weights from ``e`` grouped by length and final edge.

    Returns an array ``S`` of shape (max_len + 1, n_directed) with
    ``S[r, d]`` the sum over enumerated walks of length ``r`` ending at ``d``.
    For ``kind`` other than ``"W"`` the target ``g`` fixes the class.
    """
    x = check_edge_weights(graph, x)
    forbidden = _forbidden(kind, e, e if g is None else g)
    avoid = {int(a) for a in avoid}
    S = np.zeros((max_len + 1, graph.n_directed), dtype=complex)
    for edges, alpha, prod in _dfs(graph, x, e, max_len, cap, forbidden, avoid):
        S[len(edges) - 1, edges[-1]] += cmath.exp(0.5j * alpha) * prod
    if kind == "V":
        S[0] = 0
    return S


def combinatorial_certificate(graph: PlanarGraph, x):
    """(C, epsilon) = (1, (Delta - 1) * max x): the number of walks of length r
    from a fixed edge is at most (Delta - 1)^r."""
    from .operator import SeriesCertificate
    x = check_edge_weights(graph, x)
    branching = max(graph.max_degree - 1, 0)
    return SeriesCertificate(1.0, branching * float(x.max()) if len(x) else 0.0)


def resolvent_sum(graph: PlanarGraph, x, e: int, g: int, kind: str = "W", avoid=()) -> complex:
    """Exact (infinite) sum of weights over a walk class, via a restricted resolvent.

    Walks are grouped by their internal edges: a class is the set of walks
    whose internal directed edges avoid a forbidden set, so its weight sum is
    a single entry of ``(I - Lambda_A)^{-1}`` sandwiched between the first
    and last steps.
    """
    x = check_edge_weights(graph, x)
    L = assemble(graph, x).toarray()
    n = graph.n_directed
    avoid = {int(a) for a in avoid}
    allowed = np.array([(d >> 1) not in avoid for d in range(n)])
    if kind == "W":
        through = allowed.copy()
    elif kind == "U":
        through = allowed.copy()
        through[e ^ 1] = through[g ^ 1] = False
    elif kind == "V":
        through = allowed.copy()
        through[[e, e ^ 1]] = False
        through[[g, g ^ 1]] = False
    else:
        raise PreconditionError(f"unknown walk class {kind!r}")
    if not allowed[e] or not allowed[g]:
        return 0j
    if kind in ("W", "U"):
        if not through[e]:
            return complex(e == g)
        A = np.flatnonzero(through)
        M = L[np.ix_(A, A)]
        R = np.linalg.inv(np.eye(len(A)) - M)
        ia = int(np.searchsorted(A, e))
        if through[g]:
            return complex(R[ia, int(np.searchsorted(A, g))])
        return complex((R[ia, :] @ L[A, g]))
    # V: first step out of e, interior avoids e and g, last step into g
    A = np.flatnonzero(through)
    M = L[np.ix_(A, A)]
    R = np.linalg.inv(np.eye(len(A)) - M)
    return complex(L[e, g] + L[e, A] @ R @ L[A, g])


# closed walks and crossings ----------------------------------------------

def _as_cycle(edges):
    edges = tuple(int(d) for d in edges)
    if len(edges) > 1 and edges[0] == edges[-1]:
        edges = edges[:-1]
    return edges


def _visits(graph, cyc):
    """(vertex, in-germ point, out-germ point, undirected in, undirected out)."""
    pts = graph.points
    out = []
    n = len(cyc)
    for i in range(n):
        a, b = cyc[i - 1], cyc[i]
        if graph.head[a] != graph.tail[b]:
            raise PreconditionError("edge sequence is not a closed walk")
        v = int(graph.tail[b])
        out.append((v, pts[graph.tail[a]], pts[graph.head[b]], a >> 1, b >> 1))
    return out


def mutual_crossings(graph: PlanarGraph, walk_a, walk_b) -> int:
    """Number of crossings between two edge-disjoint closed paths."""
    ca, cb = _as_cycle(walk_a), _as_cycle(walk_b)
    if {d >> 1 for d in ca} & {d >> 1 for d in cb}:
        raise InvalidGraphError("closed paths are not edge-disjoint")
    total = 0
    for a in ca:
        for b in cb:
            if (min(a >> 1, b >> 1), max(a >> 1, b >> 1)) in graph.crossings:
                total += 1
    pts = graph.points
    va, vb = _visits(graph, ca), _visits(graph, cb)
    for v, p_in, p_out, _, _ in va:
        for w, q_in, q_out, _, _ in vb:
            if v == w and germs_interleave(pts[v], p_in, p_out, q_in, q_out):
                total += 1
    return total


def self_crossings(graph: PlanarGraph, walk) -> int:
    """Number of self-crossings C of a closed path.

    Crossings happen either where two of its edges cross or at a vertex it
    passes through twice with interleaving germs.
    """
    cyc = _as_cycle(walk)
    if len({d >> 1 for d in cyc}) != len(cyc):
        raise PreconditionError("not a path: an undirected edge is used twice")
    total = 0
    und = sorted(d >> 1 for d in cyc)
    for i, a in enumerate(und):
        for b in und[i + 1:]:
            if (a, b) in graph.crossings:
                total += 1
    pts = graph.points
    visits = _visits(graph, cyc)
    for i, (v, p_in, p_out, _, _) in enumerate(visits):
        for w, q_in, q_out, _, _ in visits[i + 1:]:
            if v == w and germs_interleave(pts[v], p_in, p_out, q_in, q_out):
                total += 1
    return total


def closed_winding(graph: PlanarGraph, walk) -> float:
    cyc = _as_cycle(walk)
    return winding(graph, cyc + cyc[:1])


def whitney_check(graph: PlanarGraph, walk, tol: float = 1e-12) -> bool:
    """-exp(i/2 * winding) == (-1)^C for a closed path."""
    c = self_crossings(graph, walk)
    phase = -cmath.exp(0.5j * closed_winding(graph, walk))
    return abs(phase - (-1) ** c) < tol


def enumerate_closed_paths(graph: PlanarGraph, max_len: int, cap: int = DEFAULT_WALK_CAP) -> list:
    """Closed paths as edge tuples (e_0, ..., e_n = e_0), one rotation each.

    The chosen rotation starts at the smallest directed index; both
    orientations are listed.
    """
    out = []
    count = 0
    for start in range(graph.n_directed):
        stack = [((start,), {start >> 1})]
        while stack:
            edges, used = stack.pop()
            count += 1
            if count > cap:
                raise EnumerationCapError("closed-path enumeration exceeded cap", count, out)
            if len(edges) - 1 >= max_len:
                continue
            for d in sorted(graph.successors(edges[-1]), reverse=True):
                if d == start and len(edges) >= 1:
                    out.append(edges + (d,))
                elif d > start and (d >> 1) not in used:
                    stack.append((edges + (d,), used | {d >> 1}))
    out.sort()
    return out


# even subgraphs -----------------------------------------------------------

@dataclass(frozen=True)
class EvenSubgraph:
    edges: tuple
    crossings: int
    weight: float

    @property
    def signed_weight(self) -> float:
        return (-1) ** self.crossings * self.weight


def cycle_space_basis(graph: PlanarGraph, edge_subset=None) -> list:
    """GF(2) basis of the cycle space as Python-int edge bitmasks."""
    edges = range(graph.n_edges) if edge_subset is None else sorted(int(k) for k in edge_subset)
    adj = {}
    for k in edges:
        u, v = (int(t) for t in graph.edges[k])
        adj.setdefault(u, []).append((v, k))
        adj.setdefault(v, []).append((u, k))
    root_mask = {}
    tree = set()
    for s in sorted(adj):
        if s in root_mask:
            continue
        root_mask[s] = 0
        queue = [s]
        for u in queue:
            for v, k in adj[u]:
                if v not in root_mask:
                    root_mask[v] = root_mask[u] ^ (1 << k)
                    tree.add(k)
                    queue.append(v)
    basis = []
    for k in edges:
        if k not in tree:
            u, v = (int(t) for t in graph.edges[k])
            basis.append(root_mask[u] ^ root_mask[v] ^ (1 << k))
    return basis


def odd_set_solution(graph: PlanarGraph, odd_vertices, edge_subset=None):
    """An edge set (bitmask) whose odd-degree vertices are exactly ``odd_vertices``.

    Returns ``None`` if no such set exists in the given edge subset.
    """
    edges = range(graph.n_edges) if edge_subset is None else sorted(int(k) for k in edge_subset)
    adj = {}
    for k in edges:
        u, v = (int(t) for t in graph.edges[k])
        adj.setdefault(u, []).append((v, k))
        adj.setdefault(v, []).append((u, k))
    comp, root_mask = {}, {}
    for s in sorted(adj):
        if s in comp:
            continue
        comp[s], root_mask[s] = s, 0
        queue = [s]
        for u in queue:
            for v, k in adj[u]:
                if v not in comp:
                    comp[v], root_mask[v] = s, root_mask[u] ^ (1 << k)
                    queue.append(v)
    odd = [int(v) for v in odd_vertices]
    by_comp = {}
    for v in odd:
        if v not in comp:
            return None
        by_comp.setdefault(comp[v], []).append(v)
    mask = 0
    for vs in by_comp.values():
        if len(vs) % 2:
            return None
        for v in vs:
            mask ^= root_mask[v]
    return mask


def _mask_edges(mask: int) -> tuple:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return tuple(out)


def iter_affine_space(particular: int, basis: list):
    """All ``particular ^ span(basis)`` elements in Gray-code order."""
    cur = particular
    yield cur
    for i in range(1, 1 << len(basis)):
        cur ^= basis[(i & -i).bit_length() - 1]
        yield cur


def enumerate_even(graph: PlanarGraph, x=None, max_rank: int = MAX_LISTED_RANK) -> list:
    """All even subgraphs with their crossing counts and monomials.

    Iterates over the cycle space instead of all edge subsets.
    """
    x = check_edge_weights(graph, 1.0 if x is None else x)
    basis = cycle_space_basis(graph)
    if len(basis) > max_rank:
        raise EnumerationCapError(
            f"cycle space of rank {len(basis)} exceeds cap {max_rank}", count=1 << len(basis))
    out = []
    for mask in iter_affine_space(0, basis):
        edges = _mask_edges(mask)
        w = float(np.prod(x[list(edges)])) if edges else 1.0
        out.append(EvenSubgraph(edges, count_crossings(graph, edges), w))
    out.sort(key=lambda h: (len(h.edges), h.edges))
    return out


def _bits(masks, m):
    return np.array([[(mk >> k) & 1 for k in range(m)] for mk in masks], dtype=bool).reshape(len(masks), m)


def affine_generating_function(graph: PlanarGraph, x, particular: int, basis: list,
                               phase=None, max_rank: int = MAX_CYCLE_RANK) -> complex:
    """Sum over H in particular ^ span(basis) of (-1)^C(H) prod x_H.

    Vectorized over blocks of the Gray-code enumeration.
    """
    m = graph.n_edges
    d = len(basis)
    if d > max_rank:
        raise EnumerationCapError(f"cycle space of rank {d} exceeds cap {max_rank}", count=1 << d)
    x = np.asarray(x, dtype=float)
    low = min(d, 14)
    table = np.zeros((1, m), dtype=bool)
    for b in _bits(basis[:low], m):
        table = np.vstack([table, table ^ b])
    high = _bits(basis[low:], m)
    cross = np.array(sorted(graph.crossings), dtype=np.int64).reshape(-1, 2)
    total = 0.0
    shift = _bits([particular], m)[0]
    for cur in _iter_gray(high, shift):
        H = table ^ cur
        w = np.prod(np.where(H, x, 1.0), axis=1)
        if len(cross):
            parity = np.count_nonzero(H[:, cross[:, 0]] & H[:, cross[:, 1]], axis=1) & 1
            w = np.where(parity == 1, -w, w)
        total += w.sum()
    return total


def _iter_gray(rows, start):
    cur = start.copy()
    yield cur
    for i in range(1, 1 << len(rows)):
        cur = cur ^ rows[(i & -i).bit_length() - 1]
        yield cur


def oracle_Z(graph: PlanarGraph, x, max_rank: int = MAX_CYCLE_RANK) -> float:
    """Crossing-signed generating function of even subgraphs by enumeration."""
    x = check_edge_weights(graph, x)
    if graph.n_edges == 0:
        return 1.0
    return float(affine_generating_function(graph, x, 0, cycle_space_basis(graph), max_rank=max_rank))


def closed_walk_logZ(graph: PlanarGraph, x, R: int, override: bool = False, method: str = "trace"):
    """Truncated -sum over closed walks of w / (2 |walk|), with a tail bound.

    Closed walks of length r contribute trace(Lambda^r) in total (``method=
    "trace"``) or are enumerated one by one (``method="enumerate"``).
    Refuses weights outside ||x|| < 1 / (Delta - 1) unless ``override``.
    """
    x = check_edge_weights(graph, x)
    cert = combinatorial_certificate(graph, x)
    if cert.epsilon >= 1 and not override:
        raise NoCertificateError(
            "weights outside the convergence regime ||x|| < 1/(Delta - 1)")
    if graph.n_edges == 0:
        return 0.0, 0.0
    total = 0j
    if method == "trace":
        for r, P in enumerate(walk_series_powers(assemble(graph, x), R)):
            if r:
                total -= P.diagonal().sum() / (2 * r)
    elif method == "enumerate":
        for e in range(graph.n_directed):
            S = walk_sums(graph, x, e, R)
            for r in range(1, R + 1):
                total -= S[r, e] / (2 * r)
    else:
        raise PreconditionError(f"unknown method {method!r}")
    eps = cert.epsilon
    tail = graph.n_edges * eps ** (R + 1) / ((R + 1) * (1 - eps)) if eps < 1 else math.inf
    return float(total.real), tail
