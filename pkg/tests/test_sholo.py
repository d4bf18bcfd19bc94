import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kacward.exceptions import OffLineError
from kacward.geometry import turning_angle
from kacward.isoradial import build_lattice, build_square, from_rhombic_data
from kacward.sholo import (
    S_apply,
    S_inverse,
    basis_vector,
    chain_residuals,
    corner_line,
    corners,
    critical_operator,
    is_sholomorphic_at,
    kernel_equivalence_check,
    line_field,
    observable_column,
    project,
    residual_table,
)

LATTICES = [("square", 2), ("tri", 2), ("hex", 3)]

finite = st.floats(-10, 10, allow_nan=False)


def random_f(lattice, seed=0):
    rng = np.random.default_rng(seed)
    m = lattice.graph.n_edges
    return rng.normal(size=m) + 1j * rng.normal(size=m)


def test_project_examples():
    assert project(1 + 1j, 1) == 1
    assert project(1j, 1) == 0
    w = cmath.exp(0.25j * math.pi)
    assert project(1, w) == pytest.approx(w * math.cos(math.pi / 4))
    assert project(3j, 1j) == pytest.approx(3j)


@settings(max_examples=50, deadline=None)
@given(finite, finite, st.floats(-math.pi, math.pi))
def test_project_is_orthogonal_projection(a, b, phi):
    w, line = complex(a, b), cmath.exp(1j * phi)
    p = project(w, line)
    assert project(p, line) == pytest.approx(p, abs=1e-12)
    # p is on the line and w - p is orthogonal to it
    assert abs((np.conj(line) * p).imag) < 1e-12
    assert abs((np.conj(line) * (w - p)).real) < 1e-12
    assert project(w, line) + project(w, 1j * line) == pytest.approx(w, abs=1e-12)


def test_line_field_reverse_is_rotated():
    G = build_square(1).graph
    lines = line_field(G)
    # l_{-e} = -i l_e up to sign
    r = lines[1::2] / lines[0::2]
    assert np.allclose(np.abs(r.real), 0, atol=1e-15)
    assert np.allclose(np.abs(r), 1)


@pytest.mark.parametrize("kind,r", LATTICES)
def test_S_round_trip(kind, r):
    L = build_lattice(kind, r)
    f = random_f(L)
    phi = S_apply(f, L)
    lines = line_field(L.graph)
    assert np.abs(np.imag(np.conj(lines) * phi)).max() < 1e-14
    assert np.allclose(S_inverse(phi, L), f, atol=1e-13)


def test_S_inverse_rejects_off_line_values():
    L = build_square(1)
    phi = S_apply(random_f(L), L)
    phi[3] += 0.1 * 1j * line_field(L.graph)[3]
    with pytest.raises(OffLineError):
        S_inverse(phi, L)


@pytest.mark.parametrize("kind,r", LATTICES)
def test_corner_angle_is_sum_of_half_angles(kind, r):
    L = build_lattice(kind, r)
    G = L.graph
    for z in np.flatnonzero(L.interior):
        cs = corners(G, int(z))
        assert len(cs) == G.degree[z]
        for c in cs:
            a = turning_angle(G, c.e1, c.e2) % (2 * math.pi)
            assert a == pytest.approx(L.theta[c.e1 >> 1] + L.theta[c.e2 >> 1], abs=1e-12)
            # the dual vertex is at distance R from z
            assert abs(G.points[z] - c.dual) == pytest.approx(L.circumradius, rel=1e-12)


def test_corner_line_branches():
    L = build_square(1)
    c = corners(L.graph, 4)[0]
    assert corner_line(L.graph, c, -1) == -corner_line(L.graph, c)
    assert abs(corner_line(L.graph, c)) == pytest.approx(1)


@pytest.mark.parametrize("kind,r", LATTICES)
def test_branch_independence(kind, r):
    L = build_lattice(kind, r)
    f = random_f(L, 1)
    for z in np.flatnonzero(L.interior):
        a = is_sholomorphic_at(f, int(z), L)
        b = is_sholomorphic_at(f, int(z), L, branch=-1)
        assert np.allclose(a.residuals, b.residuals, atol=1e-14, rtol=0)


@pytest.mark.parametrize("c", [1, 1j, 2 - 3j])
@pytest.mark.parametrize("kind,r", LATTICES)
def test_constants_are_sholomorphic(kind, r, c):
    L = build_lattice(kind, r)
    f = np.full(L.graph.n_edges, c, dtype=complex)
    TSf = critical_operator(L) @ S_apply(f, L)
    for z in np.flatnonzero(L.interior):
        assert is_sholomorphic_at(f, int(z), L).residual < 1e-12
        assert np.abs(TSf[list(L.graph.in_edges(int(z)))]).max() < 1e-12


def test_boundary_vertex_not_applicable():
    L = build_square(1)
    res = is_sholomorphic_at(np.ones(L.graph.n_edges), 0, L)
    assert not res.applicable and math.isnan(res.residual)


def test_random_function_is_not_sholomorphic():
    L = build_square(2)
    f = random_f(L, 3)
    assert not any(is_sholomorphic_at(f, int(z), L).holds for z in np.flatnonzero(L.interior))


@pytest.mark.parametrize("kind,r", LATTICES)
def test_kernel_equivalence(kind, r):
    L = build_lattice(kind, r)
    T = critical_operator(L)
    e = int(np.flatnonzero(L.interior)[0])
    e = L.graph.out_edges[e][0]
    funcs = [random_f(L, 5), observable_column(L, e, T), np.ones(L.graph.n_edges)]
    for f in funcs:
        for z in np.flatnonzero(L.interior):
            chk = kernel_equivalence_check(f, int(z), L, T)
            assert chk.consistent


@pytest.mark.parametrize("kind,r", LATTICES)
def test_chain_forms_agree(kind, r):
    L = build_lattice(kind, r)
    T = critical_operator(L)
    f = random_f(L, 7)
    for z in np.flatnonzero(L.interior):
        R = chain_residuals(f, int(z), L, T)
        assert R.shape == (L.graph.degree[z], 4)
        # the four forms are the same quantity rewritten
        assert np.abs(R - R[:, [3]]).max() < 1e-12 * max(1.0, R.max())


@pytest.mark.parametrize("kind,r", LATTICES)
def test_observable_column_defect_at_tail(kind, r):
    L = build_lattice(kind, r)
    G = L.graph
    T = critical_operator(L)
    for z0 in np.flatnonzero(L.interior)[:3]:
        e = G.out_edges[int(z0)][0]
        f = observable_column(L, e, T)
        for z in np.flatnonzero(L.interior):
            res = is_sholomorphic_at(f, int(z), L).residual
            if z == G.tail[e]:
                assert res > 1e-3
            else:
                assert res < 1e-9


def test_basis_vector_on_line():
    G = build_square(1).graph
    v = basis_vector(G, 5)
    assert np.count_nonzero(v) == 1
    assert v[5] == pytest.approx(line_field(G)[5])


@settings(max_examples=15, deadline=None)
@given(st.floats(-math.pi, math.pi), st.integers(0, 23))
def test_observable_rotation_covariance(phi, e):
    # rotating the lattice by phi multiplies f_e by +-exp(-i phi / 2)
    L = build_square(1)
    rot = cmath.exp(1j * phi)
    M = from_rhombic_data(L.graph.points * rot, L.graph.edges, L.theta, interior=L.interior)
    f, g = observable_column(L, e), observable_column(M, e)
    target = cmath.exp(-0.5j * phi)
    assert min(np.abs(g - target * f).max(), np.abs(g + target * f).max()) < 1e-10


def test_residual_table_rows():
    L = build_lattice("tri", 2)
    rows = residual_table(np.ones(L.graph.n_edges), L)
    assert len(rows) == int(L.graph.degree[L.interior].sum())
    assert max(r for _, _, r in rows) < 1e-12
