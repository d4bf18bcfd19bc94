import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kacward.exceptions import CouplingUndefinedError, InvalidIsoradialError, PreconditionError
from kacward.geometry import PlanarGraph, validate
from kacward.isoradial import (
    build_hexagonal,
    build_lattice,
    build_square,
    build_triangular,
    from_rhombic_data,
    weights,
)

LATTICES = [("square", 3), ("tri", 3), ("hex", 4)]


def test_square_radius_one():
    L = build_square(1)
    assert L.graph.n_vertices == 9
    assert L.graph.n_edges == 12
    assert np.all(L.theta == math.pi / 4)
    assert L.circumradius == pytest.approx(1 / math.sqrt(2))
    assert L.interior.sum() == 1


def test_square_shape():
    L = build_square(shape=(4, 4))
    assert (L.graph.n_vertices, L.graph.n_edges, L.interior.sum()) == (16, 24, 4)


@pytest.mark.parametrize("kind,r", LATTICES)
def test_interior_angle_sums(kind, r):
    L = build_lattice(kind, r)
    s = L.angle_sums()
    assert np.all(np.abs(s[L.interior] - math.pi) < 1e-9)
    assert np.all(s[~L.interior] < math.pi + 1e-9)
    assert validate(L.graph).ok


def test_interior_degrees():
    assert set(build_triangular(3).graph.degree[build_triangular(3).interior]) == {6}
    assert set(build_hexagonal(4).graph.degree[build_hexagonal(4).interior]) == {3}


def test_unit_edges_and_circumradius():
    for kind, r in LATTICES:
        L = build_lattice(kind, r)
        assert np.allclose(np.abs(L.graph.direction), 1.0)
        assert L.circumradius == pytest.approx(1 / (2 * math.cos(L.theta[0])))
    assert build_triangular(2).circumradius == pytest.approx(1 / math.sqrt(3))
    assert build_hexagonal(2).circumradius == pytest.approx(1.0)


@pytest.mark.parametrize("kind,expected", [
    ("square", 0.41421356237309503),
    ("tri", 0.2679491924311227),
    ("hex", 0.5773502691896257),
])
def test_critical_weights(kind, expected):
    L = build_lattice(kind, 2)
    x = weights(L, 1.0).x
    assert np.all(x == np.tan(L.theta / 2))
    assert x[0] == pytest.approx(expected, rel=1e-14)


def test_square_half_temperature():
    x = weights(build_square(1), 0.5).x
    assert x[0] == pytest.approx(math.tanh(0.5 * math.atanh(math.tan(math.pi / 8))), rel=1e-15)
    assert x[0] == pytest.approx(0.2168, abs=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.98), st.floats(0.001, 0.01))
def test_weights_increase_with_beta(beta, step):
    L = build_triangular(1)
    lo, hi = weights(L, beta).x, weights(L, beta + step).x
    assert np.all(lo < hi) and np.all(hi < weights(L, 1.0).x)


def test_weights_vanish_as_beta_to_zero():
    assert np.all(weights(build_square(1), 1e-9).x < 1e-9)


def test_weights_beta_range():
    with pytest.raises(PreconditionError):
        weights(build_square(1), 0.0)
    with pytest.raises(PreconditionError):
        weights(build_square(1), 1.5)


def test_criticality_identity_at_interior_vertices():
    for kind, r in LATTICES:
        L = build_lattice(kind, r)
        x = weights(L, 1.0).x
        G = L.graph
        for z in np.flatnonzero(L.interior):
            s = sum(math.atan(x[d >> 1]) for d in G.out_edges[z])
            assert s == pytest.approx(math.pi / 2, abs=1e-12)


def test_rhombic_round_trip():
    L = build_square(2)
    M = from_rhombic_data(L.graph.points, L.graph.edges, L.theta)
    assert np.array_equal(M.interior, L.interior)
    assert M.circumradius == pytest.approx(L.circumradius)


def _star(theta):
    pts = [0, 1, 1j, -1, -1j]
    return from_rhombic_data(pts, [(0, k) for k in range(1, 5)], theta,
                             interior=[True, False, False, False, False])


def test_mixed_angles_pass_iff_sum_is_pi():
    a, b = math.pi / 3, math.pi / 6
    _star([a, b, a, b])
    with pytest.raises(InvalidIsoradialError) as info:
        _star([a, a, a, b])
    assert info.value.vertex == 0


def test_thin_rhombus_bound_recorded():
    th = np.full(12, math.pi / 4)
    th[0] = 0.999 * math.pi
    L = from_rhombic_data(build_square(1).graph, None, th, interior=np.zeros(9, bool))
    assert L.K_bound == pytest.approx(0.999 * math.pi)
    with pytest.raises(CouplingUndefinedError):
        weights(L, 0.5)
    assert weights(L, 1.0).x[0] == pytest.approx(math.tan(0.4995 * math.pi))


def test_theta_out_of_range():
    G = PlanarGraph([0, 1], [(0, 1)])
    with pytest.raises(InvalidIsoradialError):
        from_rhombic_data(G, None, [math.pi])
