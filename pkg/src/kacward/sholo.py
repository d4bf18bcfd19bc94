"""Projection operator S and s-holomorphicity on isoradial regions.

Functions on undirected edges (the real vector space X) are complex arrays
indexed by undirected edge; line-valued functions on directed edges (the
space L) are complex arrays indexed by directed edge whose entries lie on
the lines l_e = exp(-i/2 Arg(h(e) - t(e))) R.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import OffLineError
from .geometry import PlanarGraph, circumcenter, turning_angle
from .isoradial import IsoradialLattice
from .operator import assemble, kac_ward, solve


def project(w, line):
    """Orthogonal projection of ``w`` onto ``line * R`` (``|line| = 1``)."""
    return line * np.real(np.conj(line) * w)


def line_field(graph: PlanarGraph) -> np.ndarray:
    """Unit representative of l_e for every directed edge."""
    ang = np.array([graph.angle(d) for d in range(graph.n_directed)])
    return np.exp(-0.5j * ang)


def S_apply(f, lattice: IsoradialLattice) -> np.ndarray:
    """Sf(e) = sin(theta_e / 2) Proj(f(e); l_e)."""
    f = np.asarray(f, dtype=complex)
    lines = line_field(lattice.graph)
    s = np.repeat(np.sin(lattice.theta / 2), 2)
    return s * project(np.repeat(f, 2), lines)


def S_inverse(phi, lattice: IsoradialLattice, tol: float = 1e-9) -> np.ndarray:
    """(sin(theta_e / 2))^-1 (phi(e) + phi(-e)) per undirected edge."""
    phi = np.asarray(phi, dtype=complex)
    lines = line_field(lattice.graph)
    off = np.abs(np.imag(np.conj(lines) * phi))
    scale = max(1.0, float(np.abs(phi).max(initial=0.0)))
    if np.any(off > tol * scale):
        d = int(np.argmax(off))
        raise OffLineError(f"value at directed edge {d} is off its line by {off[d]:.3e}")
    return (phi[0::2] + phi[1::2]) / np.sin(lattice.theta / 2)


def critical_operator(lattice: IsoradialLattice):
    """T = I - Lambda for the critical weights tan(theta / 2)."""
    return kac_ward(assemble(lattice.graph, lattice.critical_weights()))


@dataclass(frozen=True)
class Corner:
    """Two consecutive incoming edges at ``z`` (counterclockwise) and the dual vertex."""

    z: int
    e1: int
    e2: int
    dual: complex


def corners(graph: PlanarGraph, z: int) -> list:
    out = graph.ccw_neighbors(z)
    pts = graph.points
    res = []
    k = len(out)
    if k < 2:
        return res
    for i in range(k):
        o1, o2 = out[i], out[(i + 1) % k]
        zs = circumcenter(pts[z], pts[graph.head[o1]], pts[graph.head[o2]])
        res.append(Corner(z, o1 ^ 1, o2 ^ 1, zs))
    return res


def corner_line(graph: PlanarGraph, corner: Corner, branch: int = 1) -> complex:
    """Unit representative of (z - z*)^(-1/2) R on the principal branch (times ``branch``)."""
    w = 1 / cmath.sqrt(complex(graph.points[corner.z] - corner.dual))
    return branch * w / abs(w)


@dataclass(frozen=True)
class SholResult:
    applicable: bool
    holds: bool
    residual: float
    residuals: tuple


def is_sholomorphic_at(f, z: int, lattice: IsoradialLattice, tol: float = 1e-9,
                       branch: int = 1) -> SholResult:
    """Compare Proj(f(e1); l) with Proj(f(e2); l) at every corner of ``z``.

    Boundary vertices are reported as not applicable.
    """
    if not lattice.interior[z]:
        return SholResult(False, False, math.nan, ())
    f = np.asarray(f, dtype=complex)
    G = lattice.graph
    res = []
    for c in corners(G, z):
        line = corner_line(G, c, branch)
        res.append(float(abs(project(f[c.e1 >> 1], line) - project(f[c.e2 >> 1], line))))
    r = max(res) if res else 0.0
    return SholResult(True, r < tol, r, tuple(res))


def residual_table(f, lattice: IsoradialLattice) -> list:
    """(vertex, dual vertex, residual) rows for every corner of every interior vertex."""
    f = np.asarray(f, dtype=complex)
    G = lattice.graph
    rows = []
    for z in np.flatnonzero(lattice.interior):
        for c in corners(G, int(z)):
            line = corner_line(G, c)
            r = float(abs(project(f[c.e1 >> 1], line) - project(f[c.e2 >> 1], line)))
            rows.append((int(z), c.dual, r))
    return rows


@dataclass(frozen=True)
class KernelCheck:
    kernel_residual: float
    shol_residual: float
    kernel_holds: bool
    shol_holds: bool

    @property
    def consistent(self) -> bool:
        return self.kernel_holds == self.shol_holds


def kernel_equivalence_check(f, z: int, lattice: IsoradialLattice, T=None,
                             tol: float = 1e-9) -> KernelCheck:
    """Evaluate both sides of: T S f vanishes on In(z) iff f is s-holomorphic at z."""
    if T is None:
        T = critical_operator(lattice)
    TSf = T @ S_apply(f, lattice)
    k = float(np.abs(TSf[list(lattice.graph.in_edges(z))]).max())
    s = is_sholomorphic_at(f, z, lattice, tol)
    return KernelCheck(k, s.residual, k < tol, s.holds)


def chain_residuals(f, z: int, lattice: IsoradialLattice, T=None) -> np.ndarray:
    """Residuals of four equivalent forms of the corner condition.

    Row ``i`` belongs to the i-th corner of ``z``; the columns are: the
    Kac-Ward form on T S f, the local form on S f with general weights, the
    form with critical weights substituted, and the projection form.
    """
    G = lattice.graph
    if T is None:
        T = critical_operator(lattice)
    x = lattice.critical_weights()
    Sf = S_apply(f, lattice)
    TSf = T @ Sf
    rows = []
    for c in corners(G, z):
        e1, e2 = c.e1, c.e2
        x1, x2 = x[e1 >> 1], x[e2 >> 1]
        t1, t2 = lattice.theta[e1 >> 1], lattice.theta[e2 >> 1]
        rot = cmath.exp(0.5j * turning_angle(G, e1, e2))
        r0 = TSf[e1] / x1 - rot * TSf[e2] / x2
        r1 = (Sf[e1] / x1 + 1j * Sf[e1 ^ 1]) - rot * (Sf[e2] / x2 - 1j * Sf[e2 ^ 1])
        lhs2 = cmath.exp(-0.5j * t1) * (Sf[e1] * math.cos(t1 / 2) + 1j * Sf[e1 ^ 1] * math.sin(t1 / 2)) / math.sin(t1 / 2)
        rhs2 = cmath.exp(0.5j * t2) * (Sf[e2] * math.cos(t2 / 2) - 1j * Sf[e2 ^ 1] * math.sin(t2 / 2)) / math.sin(t2 / 2)
        line = corner_line(G, c)
        r3 = project(f[e1 >> 1], line) - project(f[e2 >> 1], line)
        rows.append([abs(r0), abs(r1), abs(lhs2 - rhs2), abs(r3)])
    return np.array(rows)


def basis_vector(graph: PlanarGraph, d: int) -> np.ndarray:
    """i_d: the unit vector of l_d supported on the directed edge ``d``."""
    v = np.zeros(graph.n_directed, dtype=complex)
    v[d] = cmath.exp(-0.5j * graph.angle(d))
    return v


def observable_column(lattice: IsoradialLattice, e: int, T=None) -> np.ndarray:
    """f_e = (T S)^-1 i_{-e} = S^-1 T^-1 i_{-e}, as a function on undirected edges."""
    if T is None:
        T = critical_operator(lattice)
    y = solve(T, basis_vector(lattice.graph, e ^ 1))
    return S_inverse(y, lattice)
