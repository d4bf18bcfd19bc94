"""Spectral radius, norm bounds, criticality certificates and decay measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.csgraph import shortest_path

from .exceptions import (
    CertificateImpossibleError,
    NoCertificateError,
    NumericalError,
    PreconditionError,
)
from .geometry import PlanarGraph
from .isoradial import IsoradialLattice, build_lattice, weights
from .operator import SeriesCertificate, assemble, distance_matrix, invert, kac_ward
from .sholo import S_apply, critical_operator

XI_TOL = 1e-12


def _directed_weights(x, n_directed: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = np.full(n_directed, float(x))
    elif x.shape == (n_directed // 2,):
        x = np.repeat(x, 2)
    if x.shape != (n_directed,):
        raise PreconditionError(f"expected {n_directed // 2} or {n_directed} weights, got {x.shape}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise PreconditionError("conjugation needs positive finite weights")
    return x


def conjugated_matrix(transition, x):
    """B = D^-1 Lambda D with D = diag(sqrt(x_e)) over directed edges.

    ``x`` may be given per undirected or per directed edge. The result has
    the same sparsity format as ``transition``.
    """
    n = transition.shape[0]
    d = np.sqrt(_directed_weights(x, n))
    if sp.issparse(transition):
        return (sp.diags(1 / d) @ transition @ sp.diags(d)).tocsr()
    return np.asarray(transition) / d[:, None] * d[None, :]


def scaling_constant(x) -> float:
    """||D|| ||D^-1|| = sqrt(max x / min x)."""
    x = np.asarray(x, dtype=float)
    return math.sqrt(x.max() / x.min())


class EpsilonBound(NamedTuple):
    """Per-edge supremum of x(beta)/x(1) and the [m, M] envelope above it."""

    epsilon: float
    envelope: float


def _ratio(beta, j):
    return np.tanh(beta * j) / np.tanh(j)


def epsilon_bound(lattice: IsoradialLattice, beta: float) -> EpsilonBound:
    """epsilon = max_e tanh(beta J_e) / tanh(J_e), with the envelope over j in [m, M].

    ``tanh m = tan(k/2)`` and ``tanh M = tan(K/2)`` for the extreme half-angles
    ``k``, ``K`` of the region. At ``beta == 1`` both are 1.
    """
    if not (0 < beta <= 1):
        raise PreconditionError("beta must lie in (0, 1]")
    if beta == 1:
        return EpsilonBound(1.0, 1.0)
    w = weights(lattice, beta)
    eps = float(np.max(w.x / np.tan(lattice.theta / 2)))
    m = math.atanh(math.tan(lattice.k_bound / 2))
    M = math.atanh(math.tan(lattice.K_bound / 2))
    grid = np.linspace(m, M, 2049) if M > m else np.array([m])
    env = float(np.max(_ratio(beta, grid)))
    return EpsilonBound(eps, max(env, eps))


def decay_bound(lattice: IsoradialLattice, beta: float) -> SeriesCertificate:
    """Constants (C, epsilon) of |Lambda^r_{e,g}| <= C epsilon^r for beta < 1."""
    if beta >= 1:
        raise NoCertificateError("at beta = 1 there is no geometric decay certificate")
    eb = epsilon_bound(lattice, beta)
    x = weights(lattice, beta).x
    return SeriesCertificate(scaling_constant(x), eb.epsilon)


def operator_norm(A) -> float:
    """Largest singular value (dense)."""
    A = A.toarray() if sp.issparse(A) else np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(A)[0])


@dataclass(frozen=True)
class SpectralRadius:
    """Dense eigensolve together with Gelfand estimates ||A^n||_2^(1/n)."""

    eigen: float
    gelfand: dict

    def __float__(self):
        return self.eigen


def spectral_radius(A, powers=(16, 32)) -> SpectralRadius:
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=complex)
    if A.size == 0:
        return SpectralRadius(0.0, {n: 0.0 for n in powers})
    rho = float(np.abs(scipy.linalg.eigvals(A)).max())
    gel = {}
    for n in powers:
        nrm = operator_norm(np.linalg.matrix_power(A, n))
        gel[n] = nrm ** (1.0 / n)
    return SpectralRadius(rho, gel)


def xi(z: int, xhat, graph: PlanarGraph) -> float:
    """Solution s of sum_{e in Out(z)} arctan(xhat_e^2 / s) = pi/2.

    The left side decreases strictly from deg(z) pi/2 to 0, so the root is
    unique when deg(z) >= 2. A single outgoing edge never reaches pi/2 and
    gives the limiting value 0.
    """
    out = graph.out_edges[z]
    if len(out) == 0:
        raise PreconditionError(f"vertex {z} has no outgoing edges")
    if len(out) == 1:
        return 0.0
    a = np.asarray(xhat, dtype=float)[list(out)] ** 2
    if np.any(a <= 0):
        raise PreconditionError("directed weights must be positive")

    def f(s):
        return float(np.sum(np.arctan(a / s))) - math.pi / 2

    hi = 2 * a.sum() / math.pi
    lo = hi
    while f(lo) <= 0:
        lo /= 2
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def xi_values(xhat, graph: PlanarGraph) -> np.ndarray:
    return np.array([xi(z, xhat, graph) for z in range(graph.n_vertices)])


def critical_directed_weights(lattice: IsoradialLattice) -> np.ndarray:
    """xhat_e = sqrt(tan(theta_e / 2)) on both orientations."""
    return np.repeat(np.sqrt(np.tan(lattice.theta / 2)), 2)


@dataclass
class Certificate:
    """Directed weights with every xi below one, and how they were reached.

    ``steps`` records ``(z, w, delta)`` for each perturbation of the edge
    ``(w, z)``.
    """

    xhat: np.ndarray
    xi: np.ndarray
    shells: list
    initial_xi: np.ndarray
    steps: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return bool(np.all(self.xi < 1))

    def as_dict(self) -> dict:
        return {
            "xi": {str(v): float(s) for v, s in enumerate(self.xi)},
            "weights": {str(d): float(w) for d, w in enumerate(self.xhat)},
            "shells": [list(map(int, s)) for s in self.shells],
            "steps": [[int(z), int(w), float(dl)] for z, w, dl in self.steps],
        }


def _shells(graph: PlanarGraph, sources) -> list:
    n = graph.n_vertices
    adj = sp.csr_matrix((np.ones(len(graph.edges)), (graph.edges[:, 0], graph.edges[:, 1])),
                        shape=(n, n))
    dist = shortest_path(adj, directed=False, unweighted=True, indices=sources).min(axis=0)
    if not np.all(np.isfinite(dist)):
        raise CertificateImpossibleError("a component has no deficient vertex")
    dist = dist.astype(int)
    return [np.flatnonzero(dist == r).tolist() for r in range(dist.max() + 1)]


def criticality_certificate(lattice: IsoradialLattice, delta_max: float = 1.0,
                            bisection_steps: int = 60) -> Certificate:
    """Perturb the critical directed weights shell by shell until all xi < 1.

    Shells are graph-distance layers around the vertices of deficient degree.
    Each new vertex ``z`` is treated through its first neighbour ``w`` in the
    previous layers: xhat_(w,z) is multiplied by (1 + delta) and xhat_(z,w)
    divided by it, with delta the largest value in (0, delta_max] (found by
    bisection) keeping xi_w <= 1 - margin, margin = min(1e-3, (1 - xi_w) / 2).
    """
    G = lattice.graph
    sources = np.flatnonzero(lattice.deficient)
    if len(sources) == 0:
        raise CertificateImpossibleError("region has no vertex of deficient degree")
    xh = critical_directed_weights(lattice)
    initial = xi_values(xh, G)
    shells = _shells(G, sources)
    level = np.empty(G.n_vertices, dtype=int)
    for r, s in enumerate(shells):
        level[s] = r
    steps = []
    for r in range(1, len(shells)):
        for z in shells[r]:
            w = next(G.head[d] for d in G.out_edges[z] if level[G.head[d]] == r - 1)
            d = G.directed_index(w, z)
            xi_w = xi(w, xh, G)
            margin = min(1e-3, (1 - xi_w) / 2)
            if margin <= 0:
                raise NumericalError(f"xi at vertex {w} is not below one ({xi_w!r})")

            def xi_after(delta):
                trial = xh.copy()
                trial[d] *= 1 + delta
                return xi(w, trial, G)

            if xi_after(delta_max) <= 1 - margin:
                delta = delta_max
            else:
                lo, hi = 0.0, delta_max
                for _ in range(bisection_steps):
                    mid = 0.5 * (lo + hi)
                    if xi_after(mid) <= 1 - margin:
                        lo = mid
                    else:
                        hi = mid
                delta = lo
            if delta <= 0:
                raise NumericalError(f"no admissible perturbation at edge ({w}, {z})")
            xh[d] *= 1 + delta
            xh[d ^ 1] /= 1 + delta
            steps.append((int(z), int(w), float(delta)))
    final = xi_values(xh, G)
    return Certificate(xh, final, shells, initial, steps)


def factorization_error(xhat, lattice: IsoradialLattice) -> float:
    """max |xhat_e xhat_-e / tan(theta_e / 2) - 1|."""
    xhat = np.asarray(xhat)
    return float(np.abs(xhat[0::2] * xhat[1::2] / np.tan(lattice.theta / 2) - 1).max())


def _fit(xs, ys):
    keep = np.isfinite(ys)
    if keep.sum() < 2:
        return math.nan, math.nan
    slope, intercept = np.polyfit(np.asarray(xs)[keep], np.asarray(ys)[keep], 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class DecayProfile:
    """max |(Lambda^r)_{e,g}| per r, its log-linear fit, and the T^-1 distance profile.

    ``bound`` is C epsilon^r when constants were supplied. ``distances`` and
    ``inverse_max`` give max |T^-1_{e,g}| over pairs at each walk distance.
    """

    r: np.ndarray
    max_entry: np.ndarray
    slope: float
    intercept: float
    bound: np.ndarray | None
    distances: np.ndarray | None
    inverse_max: np.ndarray | None
    inverse_slope: float
    meta: dict

    @property
    def fitted_epsilon(self) -> float:
        return math.exp(self.slope)

    @property
    def fitted_C(self) -> float:
        return math.exp(self.intercept)

    @property
    def within_bound(self) -> bool:
        if self.bound is None:
            return True
        return bool(np.all(self.max_entry <= self.bound * (1 + 1e-12)))


def decay_profile(transition, r_max: int = 20, *, C: float | None = None,
                  epsilon: float | None = None, fit_from: int = 4,
                  inverse: bool = True, meta: dict | None = None) -> DecayProfile:
    """Measure entry decay of Lambda^r for r <= r_max and of T^-1 with distance."""
    L = sp.csr_matrix(transition)
    P = sp.identity(L.shape[0], dtype=complex, format="csr")
    mx = []
    for _ in range(r_max + 1):
        mx.append(float(np.abs(P.data).max()) if P.nnz else 0.0)
        P = P @ L
    mx = np.array(mx)
    r = np.arange(r_max + 1)
    with np.errstate(divide="ignore"):
        logs = np.log(mx)
    slope, intercept = _fit(r[fit_from:], logs[fit_from:])
    bound = None
    if C is not None and epsilon is not None:
        bound = C * epsilon ** r.astype(float)
    dists = inv_max = None
    inv_slope = math.nan
    if inverse:
        Ti = np.abs(invert(kac_ward(L)).matrix)
        D = distance_matrix(L)
        finite = np.isfinite(D)
        dists = np.unique(D[finite]).astype(int)
        inv_max = np.array([Ti[D == k].max() for k in dists])
        sel = dists >= 1
        with np.errstate(divide="ignore"):
            inv_slope, _ = _fit(dists[sel], np.log(inv_max[sel]))
    return DecayProfile(r, mx, slope, intercept, bound, dists, inv_max, inv_slope, dict(meta or {}))


def supercritical_profile(lattice: IsoradialLattice, beta: float, r_max: int = 20,
                          fit_from: int = 4, inverse: bool = True) -> DecayProfile:
    """decay_profile with C = ||D|| ||D^-1|| and epsilon from epsilon_bound."""
    w = weights(lattice, beta)
    cert = decay_bound(lattice, beta)
    Lam = assemble(lattice.graph, w.x)
    meta = {"kind": lattice.kind, "beta": float(beta), "n_edges": int(lattice.graph.n_edges),
            "epsilon": cert.epsilon, "C": cert.C}
    return decay_profile(Lam, r_max, C=cert.C, epsilon=cert.epsilon, fit_from=fit_from,
                         inverse=inverse, meta=meta)


class NoninvertibilityResult(NamedTuple):
    """||T phi||_2 / ||phi||_2 for phi = S 1_H, with the two supporting bounds."""

    ratio: float
    sup_norm: float
    sup_bound: float
    norm: float
    norm_bound: float
    n_H: int
    n_support: int


def noninvertibility_ratio(kind: str, box_radius: int) -> NoninvertibilityResult:
    """Test vector S 1_H on the edges H inside [-r, r]^2 of a critical lattice.

    The operator is built on the box of radius ``r + 1`` so that every vertex
    of H has its full lattice neighbourhood.
    """
    if box_radius < 1:
        raise PreconditionError("box_radius must be >= 1")
    lat = build_lattice(kind, box_radius + 1)
    G = lat.graph
    P = G.points[G.edges]
    tol = 1e-9
    H = ((np.abs(P.real) <= box_radius + tol) & (np.abs(P.imag) <= box_radius + tol)).all(axis=1)
    phi = S_apply(H.astype(float), lat)
    Tphi = critical_operator(lat) @ phi
    norm = float(np.linalg.norm(phi))
    sup = float(np.abs(Tphi).max())
    return NoninvertibilityResult(
        ratio=float(np.linalg.norm(Tphi)) / norm,
        sup_norm=sup,
        sup_bound=math.tan(lat.K_bound / 2) * G.max_degree,
        norm=norm,
        norm_bound=math.sin(lat.k_bound / 2) * math.sqrt(int(H.sum())),
        n_H=int(H.sum()),
        n_support=int(np.count_nonzero(np.abs(Tphi) > 1e-12)),
    )
