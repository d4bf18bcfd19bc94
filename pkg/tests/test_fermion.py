import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import k4_crossing, random_planar, small_graphs, square_cycle
from kacward.exceptions import InvalidGraphError, NotFermionConfigError, ZeroPartitionFunctionError
from kacward.geometry import PlanarGraph, modify_graph
from kacward.operator import assemble, invert, kac_ward
from kacward.fermion import (
    enumerate_fE,
    fermion_matrix,
    fermionic_F,
    leftmost_path,
    sign_check,
    symmetrized_observable,
)
from kacward.walks import oracle_Z


def count_fE_bruteforce(graph, e, g):
    """Subsets of the modified graph holding both half-edges, even at all
    vertices of the original graph (checked over all 2^m subsets)."""
    mod = modify_graph(graph, e, g)
    if mod.degenerate:
        return 0
    G = mod.graph
    loose = {int(G.head[mod.directed_out]), int(G.tail[mod.directed_in])}
    need = (1 << mod.half_in) | (1 << mod.half_out)
    n = 0
    for mask in range(1 << G.n_edges):
        if mask & need != need:
            continue
        deg = np.zeros(G.n_vertices, int)
        for k in range(G.n_edges):
            if mask >> k & 1:
                deg[list(G.edges[k])] += 1
        if all(deg[v] % 2 == 0 for v in range(G.n_vertices) if v not in loose):
            n += 1
    return n


def test_four_cycle_diagonal():
    G = square_cycle()
    for x in (0.2, 0.5, 0.9):
        assert fermionic_F(G, x, 0, 0) == pytest.approx(1 / (1 + x ** 4), abs=1e-14)


def test_four_cycle_configs():
    G = square_cycle()
    # continuing ccw from 0 -> 1 into 1 -> 2 closes through the half-edges alone
    (c,) = enumerate_fE(G, 0, 2)
    assert c.edges == (c.modified.half_in, c.modified.half_out)
    # arriving at 1 through 2 -> 1 would leave vertex 1 odd
    assert enumerate_fE(G, 0, 3) == []


def test_reverse_family_is_empty():
    G = small_graphs()["box2x3"]
    for e in range(G.n_directed):
        assert enumerate_fE(G, e, e ^ 1) == []
        assert fermionic_F(G, 0.4, e, e ^ 1) == 0


@pytest.mark.parametrize("name", ["4-cycle", "box2x2", "box2x3", "hexagon"])
def test_config_counts_match_bruteforce(name):
    G = small_graphs()[name]
    for e in range(0, G.n_directed, 3):
        for g in range(G.n_directed):
            assert len(enumerate_fE(G, e, g)) == count_fE_bruteforce(G, e, g)


@pytest.mark.parametrize("name", ["4-cycle", "box2x3", "random10"])
def test_diagonal_is_ratio_of_partition_functions(name):
    G = small_graphs()[name]
    x = np.random.default_rng(2).uniform(0.1, 0.9, G.n_edges)
    Z = oracle_Z(G, x)
    for k in range(G.n_edges):
        keep = [j for j in range(G.n_edges) if j != k]
        Zk = oracle_Z(PlanarGraph(G.points, G.edges[keep]), x[keep])
        for e in (2 * k, 2 * k + 1):
            assert fermionic_F(G, x, e, e, Z) == pytest.approx(Zk / Z, abs=1e-13)


@pytest.mark.parametrize("name", ["4-cycle", "box2x2", "box2x3", "hexagon"])
def test_conjugate_is_inverse(name):
    G = small_graphs()[name]
    x = np.random.default_rng(4).uniform(0.1, 0.95, G.n_edges)
    F = fermion_matrix(G, x)
    Ti = invert(kac_ward(assemble(G, x))).matrix
    assert np.abs(np.conj(F) - Ti).max() < 1e-10


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_conjugate_is_inverse_random(seed):
    G = random_planar(seed, 7, 8)
    x = np.random.default_rng(seed).uniform(0.05, 0.95, G.n_edges)
    rows = [0, G.n_directed - 1]
    F = fermion_matrix(G, x, rows)
    Ti = invert(kac_ward(assemble(G, x))).matrix
    assert np.abs(np.conj(F) - Ti[rows]).max() < 1e-10


def test_leftmost_path_endpoints():
    G = small_graphs()["box2x3"]
    for c in enumerate_fE(G, 0, 6):
        lm = c.leftmost.edges
        assert lm[0] == c.modified.directed_in
        assert lm[-1] == c.modified.directed_out
        assert len(set(d >> 1 for d in lm)) == len(lm)


def test_leftmost_path_rejects_bad_configurations():
    mod = modify_graph(square_cycle(), 0, 4)
    with pytest.raises(NotFermionConfigError):
        leftmost_path(mod, [mod.half_in])
    with pytest.raises(NotFermionConfigError):
        leftmost_path(modify_graph(square_cycle(), 0, 1), [])


def skew_k4():
    """Convex quadrilateral with both diagonals crossing away from their midpoints."""
    return PlanarGraph([0, 3, 2 + 2j, 0.5j], [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])


def test_midpoint_on_crossing_is_rejected():
    # the diagonals of the unit square cross exactly at their midpoints
    with pytest.raises(InvalidGraphError):
        modify_graph(k4_crossing(), 8, 10)


def test_conjugate_is_inverse_with_crossing():
    G = skew_k4()
    x = np.linspace(0.2, 0.8, 6)
    Ti = invert(kac_ward(assemble(G, x))).matrix
    assert np.abs(np.conj(fermion_matrix(G, x)) - Ti).max() < 1e-10


@pytest.mark.parametrize("graph", [small_graphs()["box2x3"], skew_k4(), small_graphs()["random10"]],
                         ids=["box2x3", "skew-k4", "random10"])
def test_sign_identity(graph):
    for e in range(0, graph.n_directed, 3):
        for g in range(graph.n_directed):
            if e >> 1 == g >> 1:
                continue
            for c in enumerate_fE(graph, e, g):
                assert sign_check(c).holds


def test_sign_check_rejects_same_edge():
    c = enumerate_fE(square_cycle(), 0, 0)[0]
    with pytest.raises(NotFermionConfigError):
        sign_check(c)


def test_zero_partition_function():
    with pytest.raises(ZeroPartitionFunctionError):
        fermionic_F(square_cycle(), 0.5, 0, 2, Z=0.0)


def test_symmetrized_observable_formula():
    F = np.arange(16, dtype=complex).reshape(4, 4)
    th = math.pi / 3
    assert symmetrized_observable(F, 1, 1, th) == pytest.approx((F[1, 2] + F[1, 3]) / math.cos(th / 2))
    assert symmetrized_observable(lambda a, b: F[a, b], 1, 0, [th, 0.1]) == pytest.approx(
        (F[1, 0] + F[1, 1]) / math.cos(th / 2))
