import numpy as np
import pytest
from scipy.spatial import Delaunay

from kacward.geometry import PlanarGraph
from kacward.isoradial import build_square


def cycle(n, radius=1.0):
    pts = radius * np.exp(2j * np.pi * np.arange(n) / n)
    return PlanarGraph(pts, [(i, (i + 1) % n) for i in range(n)])


def square_cycle():
    return PlanarGraph([0, 1, 1 + 1j, 1j], [(0, 1), (1, 2), (2, 3), (3, 0)])


def k4_crossing():
    """Unit square with both diagonals; the diagonals cross once."""
    return PlanarGraph([0, 1, 1 + 1j, 1j], [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])


def box(nx, ny):
    return build_square(shape=(nx, ny)).graph


def random_planar(seed, n_points=9, n_edges=10):
    """Random crossing-free graph: a subset of a Delaunay triangulation."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, (n_points, 2))
    tri = Delaunay(pts)
    edges = set()
    for s in tri.simplices:
        for a, b in ((s[0], s[1]), (s[1], s[2]), (s[0], s[2])):
            edges.add((int(min(a, b)), int(max(a, b))))
    edges = sorted(edges)
    keep = rng.choice(len(edges), size=min(n_edges, len(edges)), replace=False)
    return PlanarGraph(pts, [edges[k] for k in sorted(keep)])


def small_graphs():
    """Named crossing-free graphs with at most 16 edges."""
    return {
        "4-cycle": square_cycle(),
        "hexagon": cycle(6),
        "box2x2": box(2, 2),
        "box2x3": box(2, 3),
        "box2x4": box(2, 4),
        "box3x3": box(3, 3),
        "random10": random_planar(1, 9, 10),
        "random14": random_planar(2, 10, 14),
    }


@pytest.fixture
def c4():
    return square_cycle()


@pytest.fixture
def k4():
    return k4_crossing()


@pytest.fixture
def box3():
    return build_square(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
