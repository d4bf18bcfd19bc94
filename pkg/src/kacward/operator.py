"""Kac-Ward transition matrix, operator, determinant and inverse."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .exceptions import (
    BranchAmbiguityError,
    MissingWeightError,
    NoCertificateError,
    PreconditionError,
    SingularOperatorError,
)
from .geometry import PlanarGraph, turning_angle

SOLVE_TOL = 1e-9


def check_edge_weights(graph: PlanarGraph, weights) -> np.ndarray:
    """Broadcast a scalar or validate a per-edge weight array."""
    if weights is None:
        raise MissingWeightError("edge weights are required")
    x = np.asarray(weights, dtype=float)
    if x.ndim == 0:
        x = np.full(graph.n_edges, float(x))
    if x.shape != (graph.n_edges,):
        raise MissingWeightError(
            f"expected {graph.n_edges} edge weights, got shape {x.shape}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise PreconditionError("edge weights must be positive and finite")
    return x


def assemble(graph: PlanarGraph, weights) -> sp.csr_matrix:
    """Transition matrix on directed edges.

    Entry ``(e, g)`` is ``x_e * exp(i/2 * angle(e, g))`` when ``g`` continues
    ``e`` without backtracking; note the weight is that of the source edge.
    """
    x = check_edge_weights(graph, weights)
    rows, cols, vals = [], [], []
    for e in range(graph.n_directed):
        xe = x[e >> 1]
        for g in graph.successors(e):
            rows.append(e)
            cols.append(g)
            vals.append(xe * cmath.exp(0.5j * turning_angle(graph, e, g)))
    n = graph.n_directed
    return sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(n, n))


def kac_ward(transition) -> sp.csr_matrix:
    """T = I - Lambda."""
    n = transition.shape[0]
    return (sp.identity(n, dtype=complex, format="csr") - transition).tocsr()


def _dense(a) -> np.ndarray:
    return a.toarray() if sp.issparse(a) else np.asarray(a, dtype=complex)


def _lu(T):
    A = _dense(T)
    if A.size == 0:
        return A, None, None
    with warnings.catch_warnings():
        # exact zero pivots are reported below as SingularOperatorError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.min() <= A.shape[0] * np.finfo(float).eps * max(d.max(), 1.0):
        raise SingularOperatorError(
            f"operator is numerically singular (smallest pivot {d.min():.3e})")
    return A, lu, piv


def log_determinant(T) -> complex:
    """Complex logarithm of det T (sum of logs of the LU pivots)."""
    A, lu, piv = _lu(T)
    if lu is None:
        return 0j
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    return complex(np.sum(np.log(np.diag(lu).astype(complex)))) + (1j * math.pi if swaps % 2 else 0)


def determinant(T) -> complex:
    """det T via complex LU with partial pivoting."""
    A, lu, piv = _lu(T)
    if lu is None:
        return 1 + 0j
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    det = complex(np.prod(np.diag(lu)))
    return -det if swaps % 2 else det


def partition_Z(T_or_det, *, reference: float | None = None, rel_tol: float = 1e-8) -> float:
    """Z as a square root of det T.

    The positive root is returned unless an oracle ``reference`` value is
    given, in which case its sign is used. A determinant that is not a
    positive real within ``rel_tol`` has no real square root and raises.
    """
    if isinstance(T_or_det, (complex, float, int, np.number)):
        det = complex(T_or_det)
    else:
        det = determinant(T_or_det)
    if abs(det.imag) > rel_tol * abs(det) or det.real <= 0:
        raise BranchAmbiguityError(
            f"det T = {det!r} has no real square root; use the even-subgraph oracle")
    root = math.sqrt(det.real)
    if reference is not None and reference < 0:
        return -root
    return root


@dataclass(frozen=True)
class InverseOperator:
    """Dense inverse with factorization diagnostics.

    ``condition`` is the 1-norm condition number ||T||_1 ||T^-1||_1,
    ``pivot_growth`` is max|U| / max|T| and ``residual`` is
    ``max|T T^-1 - I|``.
    """

    matrix: np.ndarray
    condition: float
    pivot_growth: float
    residual: float

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __getitem__(self, key):
        return self.matrix[key]

    @property
    def shape(self):
        return self.matrix.shape


def invert(T) -> InverseOperator:
    """Inverse of T by LU solves against the identity columns."""
    A, lu, piv = _lu(T)
    n = A.shape[0]
    if lu is None:
        return InverseOperator(np.zeros((0, 0), dtype=complex), 1.0, 1.0, 0.0)
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=complex))
    residual = float(np.abs(A @ inv - np.eye(n)).max())
    cond = float(np.abs(A).sum(axis=0).max() * np.abs(inv).sum(axis=0).max())
    growth = float(np.abs(np.triu(lu)).max() / max(np.abs(A).max(), 1e-300))
    return InverseOperator(inv, cond, growth, residual)


def solve(T, rhs) -> np.ndarray:
    """Solve T y = rhs for one or several right-hand sides (columns)."""
    A, lu, piv = _lu(T)
    return scipy.linalg.lu_solve((lu, piv), np.asarray(rhs, dtype=complex))


def walk_series_term(transition, r: int) -> sp.csr_matrix:
    """Lambda^r by repeated sparse multiplication."""
    if r < 0:
        raise PreconditionError("r must be non-negative")
    n = transition.shape[0]
    out = sp.identity(n, dtype=complex, format="csr")
    L = sp.csr_matrix(transition)
    for _ in range(r):
        out = out @ L
    return out


def walk_series_powers(transition, r_max: int):
    """Yield Lambda^0, ..., Lambda^r_max."""
    n = transition.shape[0]
    P = sp.identity(n, dtype=complex, format="csr")
    L = sp.csr_matrix(transition)
    yield P
    for _ in range(r_max):
        P = P @ L
        yield P


class SeriesCertificate(NamedTuple):
    """Entrywise bound |Lambda^r_{e,g}| <= C * epsilon^r."""

    C: float
    epsilon: float

    def tail(self, R: int) -> float:
        """Bound on the entrywise remainder after the term of order R."""
        if self.epsilon >= 1:
            return math.inf
        return self.C * self.epsilon ** (R + 1) / (1 - self.epsilon)


def walk_series_sum(transition, R: int, certificate: SeriesCertificate | None = None,
                    override: bool = False):
    """Partial sum sum_{r <= R} Lambda^r with its certified tail bound.

    Without a certificate the call is refused unless ``override`` is set, in
    which case the tail bound is reported as infinite.
    """
    if certificate is None and not override:
        raise NoCertificateError(
            "no convergence certificate; pass one from kacward.spectral or override=True")
    total = None
    for P in walk_series_powers(transition, R):
        total = P.copy() if total is None else total + P
    tail = certificate.tail(R) if certificate is not None else math.inf
    return total.toarray(), tail


def _pattern(transition) -> sp.csr_matrix:
    L = sp.csr_matrix(transition)
    return sp.csr_matrix((np.ones(L.nnz), L.indices, L.indptr), shape=L.shape)


def distance_matrix(graph_or_transition) -> np.ndarray:
    """All-pairs length of shortest non-backtracking walks; ``inf`` if none."""
    if isinstance(graph_or_transition, PlanarGraph):
        L = assemble(graph_or_transition, 1.0)
    else:
        L = graph_or_transition
    return shortest_path(_pattern(L), method="D", directed=True, unweighted=True)


def distance(graph_or_transition, e: int, g: int) -> float:
    """Length of a shortest walk from ``e`` to ``g`` (``inf`` when unreachable)."""
    if isinstance(graph_or_transition, PlanarGraph):
        L = assemble(graph_or_transition, 1.0)
    else:
        L = graph_or_transition
    d = shortest_path(_pattern(L), method="D", directed=True, unweighted=True, indices=[e])
    return float(d[0, g])
