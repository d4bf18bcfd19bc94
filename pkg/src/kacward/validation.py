"""Input validation shared by the estimators and the command line."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import InvalidGraphError, PreconditionError
from .geometry import PlanarGraph
from .isoradial import IsoradialLattice
from .operator import check_edge_weights


def check_graph(obj) -> PlanarGraph:
    """Accept a PlanarGraph, an IsoradialLattice or a ``(vertices, edges)`` pair."""
    if isinstance(obj, IsoradialLattice):
        return obj.graph
    if isinstance(obj, PlanarGraph):
        return obj
    if isinstance(obj, dict) and "vertices" in obj:
        return PlanarGraph(obj["vertices"], obj.get("edges", []))
    if isinstance(obj, (tuple, list)) and len(obj) == 2:
        return PlanarGraph(*obj)
    raise InvalidGraphError(f"cannot interpret {type(obj).__name__} as a planar graph")


def check_lattice(obj) -> IsoradialLattice:
    if not isinstance(obj, IsoradialLattice):
        raise PreconditionError("an IsoradialLattice is required")
    return obj


def check_weights(graph: PlanarGraph, weights) -> np.ndarray:
    return check_edge_weights(graph, weights)


def check_beta(beta) -> float:
    beta = float(beta)
    if not (0 < beta <= 1) or math.isnan(beta):
        raise PreconditionError(f"beta must lie in (0, 1], got {beta}")
    return beta


def check_directed_edges(graph: PlanarGraph, edges) -> np.ndarray:
    e = np.atleast_1d(np.asarray(edges))
    if e.dtype.kind not in "iu" or np.any(e < 0) or np.any(e >= graph.n_directed):
        raise PreconditionError(f"directed edge indices must lie in [0, {graph.n_directed})")
    return e.astype(np.int64)


def check_rows(X, n: int) -> np.ndarray:
    """2-D complex array with ``n`` columns (one per directed edge)."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n:
        raise PreconditionError(f"expected arrays with {n} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise PreconditionError("input contains non-finite values")
    return X


def check_positive(name: str, value) -> float:
    value = float(value)
    if not value > 0:
        raise PreconditionError(f"{name} must be positive")
    return value
