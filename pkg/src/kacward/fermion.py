"""Fermionic generating function from half-edge configurations.

For directed edges e, g the configurations are the subgraphs of the modified
graph G_{e,g} that contain both half-edges and leave every vertex of G with
even degree. Each one carries the winding of its left-most path from
(m(e), h(e)) to (t(g), m(g)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidGraphError,
    NotFermionConfigError,
    ZeroPartitionFunctionError,
)
from .geometry import ModifiedGraph, PlanarGraph, count_crossings, modify_graph, turning_angle
from .operator import check_edge_weights
from .walks import (
    MAX_CYCLE_RANK,
    Walk,
    _mask_edges,
    closed_winding,
    cycle_space_basis,
    iter_affine_space,
    odd_set_solution,
    oracle_Z,
    self_crossings,
    winding,
)


@dataclass(frozen=True)
class FermionConfig:
    """One element H of fE(e, g).

    ``edges`` are undirected edge indices of ``modified.graph``; ``leftmost``
    is the left-most path as a walk in that graph.
    """

    modified: ModifiedGraph
    edges: tuple
    leftmost: Walk
    weight: float

    @property
    def winding(self) -> float:
        return self.leftmost.winding


def leftmost_path(modified: ModifiedGraph, H) -> Walk:
    """Left-most path through the configuration ``H``.

    Starting on (m(e), h(e)), always continue along the unvisited edge of
    ``H`` with the largest turning angle until (t(g), m(g)) is traversed.
    """
    if modified.degenerate:
        raise NotFermionConfigError("fE(e, -e) is empty")
    G = modified.graph
    H = {int(k) for k in H}
    if modified.half_in not in H or modified.half_out not in H:
        raise NotFermionConfigError("configuration must contain both half-edges")
    d = modified.directed_in
    path = [d]
    visited = {d >> 1}
    while d != modified.directed_out:
        options = [c for c in G.out_edges[G.head[d]] if (c >> 1) in H and (c >> 1) not in visited]
        if not options:
            raise NotFermionConfigError("left-most path got stuck; H is not in fE(e, g)")
        d = max(options, key=lambda c: turning_angle(G, d, c))
        path.append(d)
        visited.add(d >> 1)
    if len(visited) < len(H):
        # leftover must be an even subgraph of G
        rest = H - visited
        deg = np.zeros(G.n_vertices, dtype=int)
        for k in rest:
            deg[G.edges[k]] += 1
        if np.any(deg % 2):
            raise NotFermionConfigError("remainder of H is not even")
    return Walk(tuple(path), 0j, winding(G, path))


def enumerate_fE(graph: PlanarGraph, e: int, g: int, x=None,
                 max_rank: int = MAX_CYCLE_RANK) -> list:
    """All configurations in fE(e, g), each with its left-most path.

    The half-edge of ``e`` carries ``x_e``, that of ``g`` weight one. For
    ``g == -e`` the family is empty.
    """
    x = check_edge_weights(graph, 1.0 if x is None else x)
    mod = modify_graph(graph, e, g, x)
    if mod.degenerate:
        return []
    G = mod.graph
    fixed = (mod.half_in, mod.half_out)
    rest = [k for k in range(G.n_edges) if k not in fixed]
    parity = {}
    for k in fixed:
        for v in G.edges[k]:
            parity[int(v)] = parity.get(int(v), 0) ^ 1
    loose = {int(G.head[mod.directed_out]), int(G.tail[mod.directed_in])}
    odd = [v for v, p in parity.items() if p and v not in loose]
    particular = odd_set_solution(G, odd, rest)
    if particular is None:
        return []
    basis = cycle_space_basis(G, rest)
    if len(basis) > max_rank:
        from .exceptions import EnumerationCapError
        raise EnumerationCapError(f"cycle space rank {len(basis)} exceeds cap", count=1 << len(basis))
    fixed_mask = (1 << fixed[0]) | (1 << fixed[1])
    out = []
    for mask in iter_affine_space(particular, basis):
        edges = _mask_edges(mask | fixed_mask)
        lm = leftmost_path(mod, edges)
        out.append(FermionConfig(mod, edges, lm, float(np.prod(mod.weights[list(edges)]))))
    out.sort(key=lambda c: (len(c.edges), c.edges))
    return out


def fermionic_F(graph: PlanarGraph, x, e: int, g: int, Z: float | None = None) -> complex:
    """F_{e,g} = delta_{e,g} + Z^-1 sum_H exp(-i/2 alpha(Gamma_H)) prod x_H."""
    x = check_edge_weights(graph, x)
    if Z is None:
        Z = oracle_Z(graph, x)
    if Z == 0:
        raise ZeroPartitionFunctionError("Z vanishes; F is undefined")
    total = sum(cmath.exp(-0.5j * c.winding) * c.weight for c in enumerate_fE(graph, e, g, x))
    return (1.0 if e == g else 0.0) + total / Z


def fermion_matrix(graph: PlanarGraph, x, rows=None) -> np.ndarray:
    """Dense F over directed-edge pairs (optionally only the given rows)."""
    x = check_edge_weights(graph, x)
    Z = oracle_Z(graph, x)
    n = graph.n_directed
    rows = range(n) if rows is None else list(rows)
    F = np.zeros((len(rows), n), dtype=complex)
    for i, e in enumerate(rows):
        for g in range(n):
            F[i, g] = fermionic_F(graph, x, e, g, Z)
    return F


def symmetrized_observable(F, e: int, g_undirected: int, theta) -> complex:
    """(cos(theta_g / 2))^-1 (F_{e,g} + F_{e,-g}) for the undirected edge g.

    ``F`` is a full matrix or a callable ``F(e, g)``.
    """
    get = F if callable(F) else (lambda a, b: F[a, b])
    th = theta[g_undirected] if np.ndim(theta) else theta
    return (get(e, 2 * g_undirected) + get(e, 2 * g_undirected + 1)) / math.cos(th / 2)


@dataclass(frozen=True)
class SignCheck:
    """Both sides of the crossing-parity / winding identity for one configuration."""

    crossings_graph: int
    crossings_path: int
    phase: complex
    phase_split: complex
    detour: bool

    @property
    def holds(self) -> bool:
        s1, s2 = (-1) ** self.crossings_graph, (-1) ** self.crossings_path
        return s1 == s2 and abs(self.phase - s1) < 1e-9 and abs(self.phase_split - s1) < 1e-9


def _augment(mod: ModifiedGraph, via):
    G = mod.graph
    me = int(G.tail[mod.directed_in])
    mg = int(G.head[mod.directed_out])
    pts = list(G.points)
    edges = [tuple(int(t) for t in ed) for ed in G.edges]
    if via is None:
        edges.append((mg, me))
        return PlanarGraph(np.array(pts), edges), [2 * (len(edges) - 1)]
    v = len(pts)
    pts.append(via)
    edges.append((mg, v))
    edges.append((v, me))
    k = len(edges)
    return PlanarGraph(np.array(pts), edges), [2 * (k - 2), 2 * (k - 1)]


def closing_curve(mod: ModifiedGraph):
    """Augment G_{e,g} by gamma = (m(g), m(e)), or a two-segment detour.

    The detour runs through the midpoint of gamma displaced along its normal;
    offsets are tried in a fixed order until the result is a valid graph.
    """
    try:
        aug, gam = _augment(mod, None)
        return aug, gam, False
    except InvalidGraphError:
        pass
    a, b = mod.loose_ends[1], mod.loose_ends[0]
    mid = 0.5 * (a + b)
    normal = 1j * (b - a) / abs(b - a) if b != a else 1.0
    scale = max(abs(b - a), 1.0)
    for k in range(1, 41):
        for sign in (1, -1):
            via = mid + sign * 0.0731 * k * scale * normal
            try:
                aug, gam = _augment(mod, via)
                return aug, gam, True
            except InvalidGraphError:
                continue
    raise InvalidGraphError("could not route a closing curve")


def sign_check(config: FermionConfig) -> SignCheck:
    """Evaluate (-1)^C(H + gamma), (-1)^C(closed path) and -exp(i/2 alpha)."""
    mod = config.modified
    if mod.e >> 1 == mod.g >> 1:
        raise NotFermionConfigError("the closing-curve identity concerns distinct edges")
    aug, gam, detour = closing_curve(mod)
    H = set(config.edges) | {d >> 1 for d in gam}
    c_graph = count_crossings(aug, H)
    cycle = list(gam) + list(config.leftmost.edges)
    c_path = self_crossings(aug, cycle)
    alpha = closed_winding(aug, cycle)
    seq = list(config.leftmost.edges[-1:]) + list(gam) + list(config.leftmost.edges[:1])
    beta = sum(turning_angle(aug, p, q) for p, q in zip(seq, seq[1:]))
    return SignCheck(c_graph, c_path, -cmath.exp(0.5j * alpha),
                     -cmath.exp(0.5j * (config.winding + beta)), detour)
