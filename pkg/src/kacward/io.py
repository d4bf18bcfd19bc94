"""Reading graph files and writing deterministic JSON / CSV output.

Complex numbers are written as ``[re, im]`` pairs and angles in radians.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform

import numpy as np
import scipy
import scipy.sparse as sp

from .exceptions import PreconditionError
from .geometry import GEOMETRIC_TOL, PlanarGraph
from .isoradial import IsoradialLattice, from_rhombic_data


def _fail(path, msg, line=None):
    where = f"{path}:{line}" if line is not None else str(path)
    raise PreconditionError(f"{where}: {msg}")


def parse_graph(text: str, path="<input>", tol: float = GEOMETRIC_TOL) -> dict:
    """Parse graph or lattice JSON into a plain dict with numpy arrays.

    Keys: ``graph`` (PlanarGraph), ``weights`` (array or None) and
    ``lattice`` (IsoradialLattice or None, when ``theta`` is present).
    Parse errors report the line number.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(path, f"invalid JSON (column {exc.colno}): {exc.msg}", exc.lineno)
    if not isinstance(data, dict):
        _fail(path, "top level must be an object")
    if "vertices" not in data:
        _fail(path, "missing key 'vertices'")
    try:
        verts = np.asarray(data["vertices"], dtype=float).reshape(-1, 2)
        edges = np.asarray(data.get("edges", []), dtype=np.int64).reshape(-1, 2)
    except (TypeError, ValueError) as exc:
        _fail(path, f"malformed vertices or edges: {exc}")
    if len(edges) and (edges.min() < 0 or edges.max() >= len(verts)):
        _fail(path, "edge endpoint out of range")
    graph = PlanarGraph(verts, edges, tol)
    w = data.get("weights")
    if w is not None:
        w = np.asarray(w, dtype=float)
        if w.shape != (graph.n_edges,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
            _fail(path, "weights must be one positive real per edge")
    lattice = None
    if "theta" in data:
        lattice = from_rhombic_data(graph, None, data["theta"], data.get("circumradius"),
                                    data.get("interior"))
    return {"graph": graph, "weights": w, "lattice": lattice}


def load_graph(path, tol: float = GEOMETRIC_TOL) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _fail(path, exc.strerror or str(exc))
    return parse_graph(text, path, tol)


def graph_to_dict(graph: PlanarGraph, weights=None) -> dict:
    out = {"vertices": [[float(p.real), float(p.imag)] for p in graph.points],
           "edges": [[int(a), int(b)] for a, b in graph.edges]}
    if weights is not None:
        out["weights"] = [float(v) for v in np.broadcast_to(weights, (graph.n_edges,))]
    return out


def lattice_to_dict(lattice: IsoradialLattice) -> dict:
    out = graph_to_dict(lattice.graph)
    out["theta"] = [float(t) for t in lattice.theta]
    out["circumradius"] = float(lattice.circumradius)
    return out


def cpair(z) -> list:
    z = complex(z)
    return [jsonable(z.real), jsonable(z.imag)]


def jsonable(obj):
    """Recursively convert numpy / complex values into JSON-ready objects.

    Non-finite floats become ``None``.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def dumps_line(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True) + "\n"


def versions() -> dict:
    from . import __version__

    return {"kacward": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def envelope(command: str, config: dict, seed: int, result: dict) -> dict:
    return {"command": command, "config": config, "versions": versions(), "seed": int(seed),
            "result": result}


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def matrix_triplets(A) -> list:
    """(row, col, re, im) for the stored entries of a sparse matrix."""
    M = sp.coo_matrix(A)
    order = np.lexsort((M.col, M.row))
    return [(int(M.row[k]), int(M.col[k]), float(M.data[k].real), float(M.data[k].imag))
            for k in order]


def dense_rows(A) -> list:
    """Rows of a dense complex matrix as interleaved re, im columns."""
    A = np.asarray(A, dtype=complex)
    out = np.empty((A.shape[0], 2 * A.shape[1]))
    out[:, 0::2] = A.real
    out[:, 1::2] = A.imag
    return out.tolist()


def dense_header(n: int) -> list:
    return [f"{p}{j}" for j in range(n) for p in ("re", "im")]


def walk_record(walk) -> dict:
    return {"edges": [int(d) for d in walk.edges], "weight": cpair(walk.weight),
            "winding": float(walk.winding)}


def walk_lines(walks) -> str:
    return "".join(dumps_line(walk_record(w)) for w in walks)
