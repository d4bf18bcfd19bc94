"""Independent reference implementations used only by the tests.

These avoid the library's code paths: subsets are enumerated directly over
all 2^m edge sets, crossings use exact rational orientation tests, and the
transition matrix is built from complex phases with plain loops.
"""

import cmath
import itertools
import math
from fractions import Fraction

import numpy as np


def _frac(z):
    return Fraction(z.real), Fraction(z.imag)


def _orient(a, b, c):
    (ax, ay), (bx, by), (cx, cy) = a, b, c
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (v > 0) - (v < 0)


def segments_cross(p1, p2, q1, q2):
    """Proper crossing of two segments with four distinct endpoints (exact)."""
    P1, P2, Q1, Q2 = map(_frac, (p1, p2, q1, q2))
    return (_orient(P1, P2, Q1) * _orient(P1, P2, Q2) < 0
            and _orient(Q1, Q2, P1) * _orient(Q1, Q2, P2) < 0)


def crossing_pairs(points, edges):
    out = set()
    for k, l in itertools.combinations(range(len(edges)), 2):
        a, b = edges[k]
        c, d = edges[l]
        if len({a, b, c, d}) < 4:
            continue
        if segments_cross(points[a], points[b], points[c], points[d]):
            out.add((k, l))
    return out


def brute_Z(points, edges, x):
    """Sum over all edge subsets with even degrees of (-1)^C(H) prod x_H."""
    m = len(edges)
    assert m <= 18
    x = np.broadcast_to(np.asarray(x, dtype=float), (m,))
    cross = crossing_pairs(points, edges)
    total = 0.0
    for mask in range(1 << m):
        deg = {}
        w = 1.0
        chosen = []
        for k in range(m):
            if mask >> k & 1:
                chosen.append(k)
                w *= x[k]
                for v in edges[k]:
                    deg[v] = deg.get(v, 0) ^ 1
        if any(deg.values()):
            continue
        c = sum(1 for k, l in cross if (mask >> k & 1) and (mask >> l & 1))
        total += (-1) ** c * w
    return total


def naive_transition(points, edges, x):
    """Dense Lambda from the definition, with 2k / 2k+1 directed layout."""
    m = len(edges)
    x = np.broadcast_to(np.asarray(x, dtype=float), (m,))
    tail, head = [], []
    for a, b in edges:
        tail += [a, b]
        head += [b, a]
    n = 2 * m
    L = np.zeros((n, n), dtype=complex)
    for e in range(n):
        for g in range(n):
            if head[e] != tail[g] or g == e ^ 1:
                continue
            ratio = (points[head[g]] - points[tail[g]]) / (points[head[e]] - points[tail[e]])
            ang = cmath.phase(ratio)
            if ang == -math.pi:
                ang = math.pi
            L[e, g] = x[e >> 1] * cmath.exp(0.5j * ang)
    return L


def brute_walk_sum(L, e, g, r):
    """Sum over all non-backtracking index sequences of length r of the product
    of Lambda entries (recursive, no caching)."""
    n = L.shape[0]

    def rec(cur, left):
        if left == 0:
            return 1.0 + 0j if cur == g else 0j
        s = 0j
        for d in range(n):
            if L[cur, d] != 0:
                s += L[cur, d] * rec(d, left - 1)
        return s

    return rec(e, r)


def bisect_xi(a2, lo=1e-12, hi=None, iters=200):
    """Plain bisection for sum arctan(a2 / s) = pi / 2."""
    a2 = np.asarray(a2, dtype=float)
    if hi is None:
        hi = 10 * a2.sum() + 1
    f = lambda s: np.arctan(a2 / s).sum() - math.pi / 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
