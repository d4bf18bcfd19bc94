"""Command line front end.

Every subcommand writes one report that embeds the configuration, library
versions and seed, so reruns with the same arguments are byte-identical.
Exit codes: 0 on success, 2 when a precondition fails, 3 on numerical
failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np
from threadpoolctl import threadpool_limits

from . import io as kio
from .exceptions import (
    EnumerationCapError,
    MissingWeightError,
    NumericalError,
    PreconditionError,
)
from .fermion import fermion_matrix
from .isoradial import build_lattice, weights as ising_weights
from .operator import assemble, determinant, invert, kac_ward, log_determinant, partition_Z
from .sholo import (
    S_apply,
    chain_residuals,
    critical_operator,
    is_sholomorphic_at,
    observable_column,
    residual_table,
)
from .spectral import (
    conjugated_matrix,
    criticality_certificate,
    epsilon_bound,
    noninvertibility_ratio,
    operator_norm,
    scaling_constant,
    spectral_radius,
    supercritical_profile,
)
from .walks import (
    closed_winding,
    enumerate_closed_paths,
    enumerate_walks,
    oracle_Z,
    self_crossings,
    walk_sums,
)

ORACLE_EDGE_CAP = 16
AGREEMENT_TOL = 1e-10


class Problem:
    """The graph, lattice and weights a command operates on."""

    def __init__(self, graph, lattice, weights, source):
        self.graph = graph
        self.lattice = lattice
        self.weights = weights
        self.source = source

    def require_lattice(self):
        if self.lattice is None:
            raise PreconditionError("this command needs an isoradial lattice (--lattice or theta data)")
        return self.lattice

    def require_weights(self):
        if self.weights is None:
            raise MissingWeightError("no weights: give them in the input, or use --x or --random-weights")
        return self.weights


def load_problem(args) -> Problem:
    lattice = None
    file_weights = None
    if args.input:
        data = kio.load_graph(args.input, args.geometric_tol)
        graph, lattice, file_weights = data["graph"], data["lattice"], data["weights"]
        source = {"input": os.path.basename(args.input)}
    elif args.lattice:
        if args.radius is None:
            raise PreconditionError("--lattice needs --radius")
        lattice = build_lattice(args.lattice, args.radius)
        graph = lattice.graph
        source = {"lattice": args.lattice, "radius": args.radius}
    else:
        raise PreconditionError("give --input FILE or --lattice KIND --radius N")
    if args.x is not None:
        w = np.full(graph.n_edges, float(args.x))
    elif args.random_weights:
        w = np.random.default_rng(args.seed).uniform(0.05, 0.95, graph.n_edges)
    elif file_weights is not None:
        w = file_weights
    elif lattice is not None:
        w = ising_weights(lattice, args.beta).x
    else:
        w = None
    return Problem(graph, lattice, w, source)


def config_of(args) -> dict:
    keys = ("lattice", "radius", "beta", "x", "random_weights", "format", "edge", "target",
            "max_len", "kind", "radii", "r_max", "oracle_cap", "geometric_tol", "solve_tol",
            "test_tol", "what")
    cfg = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if args.input:
        cfg["input"] = os.path.basename(args.input)
    return cfg


def _checked_inverse(T, args):
    inv = invert(T)
    if not inv.residual <= args.solve_tol:
        raise NumericalError(f"LU residual {inv.residual:.3e} exceeds --solve-tol {args.solve_tol:g}")
    return inv


# commands -----------------------------------------------------------------

def cmd_z(args):
    p = load_problem(args)
    G = p.graph
    if G.n_edges == 0:
        res = {"oracle_Z": 1.0, "det_T": [1.0, 0.0], "sqrt_det": 1.0, "agreement": True,
               "oracle_infeasible": False}
        return res, [("Z", 1.0)], ["quantity", "value"]
    x = p.require_weights()
    T = kac_ward(assemble(G, x))
    det = determinant(T)
    res = {"det_T": det, "log_det_T": log_determinant(T), "n_edges": G.n_edges,
           "n_crossings": len(G.crossings)}
    if G.n_edges <= args.oracle_cap:
        Z = oracle_Z(G, x)
        root = partition_Z(det, reference=Z)
        res.update(oracle_Z=Z, sqrt_det=root, oracle_infeasible=False,
                   relative_error=abs(Z - root) / abs(Z),
                   agreement=abs(Z - root) <= AGREEMENT_TOL * abs(Z))
    else:
        res.update(sqrt_det=partition_Z(det), oracle_infeasible=True, agreement=None)
    rows = [(k, res[k]) for k in ("oracle_Z", "sqrt_det") if k in res]
    return res, rows, ["quantity", "value"]


def cmd_inverse(args):
    p = load_problem(args)
    L = assemble(p.graph, p.require_weights())
    T = kac_ward(L)
    if args.what in ("transition", "operator"):
        A = L if args.what == "transition" else T
        trip = kio.matrix_triplets(A)
        res = {"dim": A.shape[0], "layout": "triplets", "entries": [[r, c, re, im] for r, c, re, im in trip]}
        return res, trip, ["row", "col", "re", "im"]
    inv = _checked_inverse(T, args)
    res = {"dim": inv.shape[0], "layout": "dense-row-major", "condition_1norm": inv.condition,
           "pivot_growth": inv.pivot_growth, "residual": inv.residual,
           "matrix": [[kio.cpair(v) for v in row] for row in inv.matrix]}
    return res, kio.dense_rows(inv.matrix), kio.dense_header(inv.shape[0])


def cmd_fermion(args):
    p = load_problem(args)
    G, x = p.graph, p.require_weights()
    if G.n_edges > args.oracle_cap:
        raise EnumerationCapError(f"{G.n_edges} edges exceed the enumeration cap {args.oracle_cap}")
    F = fermion_matrix(G, x)
    Ti = _checked_inverse(kac_ward(assemble(G, x)), args).matrix
    err = float(np.abs(np.conj(F) - Ti).max()) if F.size else 0.0
    res = {"dim": F.shape[0], "max_abs_error_conjF_vs_inverse": err,
           "matrix": [[kio.cpair(v) for v in row] for row in F]}
    return res, kio.dense_rows(F), kio.dense_header(F.shape[0])


def cmd_observable(args):
    p = load_problem(args)
    lat = p.require_lattice()
    G = lat.graph
    e = args.edge if args.edge is not None else 0
    if not 0 <= e < G.n_directed:
        raise PreconditionError(f"edge {e} out of range")
    T = critical_operator(lat)
    f = observable_column(lat, e, T)
    table = residual_table(f, lat)
    source = int(G.tail[e])
    off = [r for v, _, r in table if v != source]
    at = [r for v, _, r in table if v == source]
    res = {"edge": e, "source_vertex": source,
           "column": {str(k): kio.cpair(v) for k, v in enumerate(f)},
           "residuals": [{"vertex": v, "face": kio.cpair(c), "residual": r} for v, c, r in table],
           "max_residual_off_source": max(off) if off else 0.0,
           "max_residual_at_source": max(at) if at else None}
    rows = [(v, c.real, c.imag, r) for v, c, r in table]
    return res, rows, ["vertex", "face_x", "face_y", "residual"]


def cmd_sholo_check(args):
    p = load_problem(args)
    lat = p.require_lattice()
    G = lat.graph
    T = critical_operator(lat)
    interior = [int(z) for z in np.flatnonzero(lat.interior)]
    TS1 = T @ S_apply(np.ones(G.n_edges), lat)
    ones = max((float(np.abs(TS1[list(G.in_edges(z))]).max()) for z in interior), default=0.0)
    rng = np.random.default_rng(args.seed)
    f = rng.normal(size=G.n_edges) + 1j * rng.normal(size=G.n_edges)
    spread = 0.0
    branch = 0.0
    for z in interior:
        ch = chain_residuals(f, z, lat, T)
        spread = max(spread, float((np.ptp(ch, axis=1) / np.maximum(ch.max(axis=1), 1e-300)).max()))
        a = is_sholomorphic_at(f, z, lat, branch=1).residuals
        b = is_sholomorphic_at(f, z, lat, branch=-1).residuals
        branch = max(branch, float(np.max(np.abs(np.subtract(a, b)))))
    rows = [(z, float(np.abs(TS1[list(G.in_edges(z))]).max())) for z in interior]
    res = {"n_interior": len(interior), "constant_kernel_residual": ones,
           "chain_relative_spread": spread, "branch_difference": branch}
    return res, rows, ["vertex", "TS1_residual"]


def cmd_spectral(args):
    p = load_problem(args)
    x = p.require_weights()
    L = assemble(p.graph, x)
    sr = spectral_radius(L)
    B = conjugated_matrix(L, x)
    res = {"rho_eigen": sr.eigen, "rho_gelfand": {str(k): v for k, v in sr.gelfand.items()},
           "norm_B": operator_norm(B), "C": scaling_constant(x)}
    if p.lattice is not None:
        eb = epsilon_bound(p.lattice, args.beta)
        res.update(epsilon=eb.epsilon, epsilon_envelope=eb.envelope)
    rows = [(k, v) for k, v in res.items() if not isinstance(v, dict)]
    return res, rows, ["quantity", "value"]


def cmd_decay(args):
    p = load_problem(args)
    lat = p.require_lattice()
    prof = supercritical_profile(lat, args.beta, args.r_max)
    res = {"C": prof.meta["C"], "epsilon": prof.meta["epsilon"], "fitted_slope": prof.slope,
           "log_epsilon": math.log(prof.meta["epsilon"]), "within_bound": prof.within_bound,
           "profile": [{"r": int(r), "max_entry": m, "bound": b}
                       for r, m, b in zip(prof.r, prof.max_entry, prof.bound)],
           "inverse_profile": [{"distance": int(d), "max_entry": m}
                               for d, m in zip(prof.distances, prof.inverse_max)],
           "inverse_slope": prof.inverse_slope}
    rows = list(zip(prof.r.tolist(), prof.max_entry.tolist(), prof.bound.tolist()))
    return res, rows, ["r", "max_entry", "bound"]


def cmd_certificate(args):
    p = load_problem(args)
    lat = p.require_lattice()
    cert = criticality_certificate(lat)
    rho = spectral_radius(assemble(lat.graph, lat.critical_weights()), powers=())
    res = cert.as_dict()
    res.update(certified=cert.certified, max_xi=float(cert.xi.max()), rho_eigen=rho.eigen)
    rows = [(v, float(s)) for v, s in enumerate(cert.xi)]
    return res, rows, ["vertex", "xi"]


def cmd_noninv(args):
    kind = args.lattice or "square"
    radii = [int(r) for r in args.radii.split(",")]
    out = [noninvertibility_ratio(kind, r) for r in radii]
    ratios = [o.ratio for o in out]
    res = {"kind": kind,
           "rows": [dict(radius=r, **o._asdict()) for r, o in zip(radii, out)],
           "strictly_decreasing": all(a > b for a, b in zip(ratios, ratios[1:]))}
    rows = [(r, o.ratio, o.sup_norm, o.sup_bound, o.norm, o.norm_bound, o.n_H) for r, o in zip(radii, out)]
    return res, rows, ["radius", "ratio", "sup_norm", "sup_bound", "norm", "norm_bound", "n_H"]


def cmd_walks(args):
    p = load_problem(args)
    G, x = p.graph, p.require_weights()
    e = args.edge if args.edge is not None else 0
    g = args.target if args.target is not None else e
    for d in (e, g):
        if not 0 <= d < G.n_directed:
            raise PreconditionError(f"directed edge {d} out of range")
    walks = enumerate_walks(G, x, e, g, args.max_len, kind=args.kind)
    S = walk_sums(G, x, e, args.max_len, kind=args.kind, g=g)[:, g]
    res = {"n_walks": len(walks), "walks": [kio.walk_record(w) for w in walks],
           "sums_by_length": [kio.cpair(s) for s in S]}
    rows = [(r, s.real, s.imag) for r, s in enumerate(S)]
    return res, rows, ["r", "sum_re", "sum_im"], walks


def cmd_whitney(args):
    p = load_problem(args)
    G = p.graph
    paths = enumerate_closed_paths(G, args.max_len)
    rows = []
    worst = 0.0
    for path in paths:
        c = self_crossings(G, path)
        alpha = closed_winding(G, path)
        err = abs(-complex(np.exp(0.5j * alpha)) - (-1) ** c)
        worst = max(worst, err)
        rows.append((" ".join(map(str, path)), alpha, c, err))
    res = {"n_paths": len(paths), "max_phase_error": worst,
           "all_hold": worst < args.test_tol}
    return res, rows, ["path", "winding", "crossings", "phase_error"]


COMMANDS = {
    "z": cmd_z, "inverse": cmd_inverse, "fermion": cmd_fermion, "observable": cmd_observable,
    "sholo-check": cmd_sholo_check, "spectral": cmd_spectral, "decay": cmd_decay,
    "certificate": cmd_certificate, "noninv": cmd_noninv, "walks": cmd_walks,
    "whitney": cmd_whitney,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--input", help="graph or lattice JSON file")
    src.add_argument("--lattice", choices=["square", "tri", "hex"])
    src.add_argument("--radius", type=int)
    src.add_argument("--beta", type=float, default=1.0)
    src.add_argument("--x", type=float, help="uniform edge weight")
    src.add_argument("--random-weights", action="store_true",
                     help="weights uniform in (0.05, 0.95) drawn from --seed")
    out = common.add_argument_group("output")
    out.add_argument("--format", choices=["json", "csv", "jsonl"], default="json")
    out.add_argument("--output", "-o")
    out.add_argument("--seed", type=int, default=0)
    out.add_argument("--threads", type=int)
    tol = common.add_argument_group("tolerances")
    tol.add_argument("--geometric-tol", type=float, default=1e-9)
    tol.add_argument("--solve-tol", type=float, default=1e-9)
    tol.add_argument("--test-tol", type=float, default=1e-12)

    parser = argparse.ArgumentParser(prog="kacward", description="Kac-Ward operator toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp_ = sub.add_parser(name, parents=[common])
        if name in ("z", "fermion"):
            sp_.add_argument("--oracle-cap", type=int, default=ORACLE_EDGE_CAP)
        if name == "inverse":
            sp_.add_argument("--what", choices=["inverse", "transition", "operator"], default="inverse")
        if name in ("observable", "walks"):
            sp_.add_argument("--edge", type=int)
        if name == "walks":
            sp_.add_argument("--target", type=int)
            sp_.add_argument("--kind", choices=["W", "U", "V"], default="W")
            sp_.add_argument("--max-len", type=int, default=6)
        if name == "whitney":
            sp_.add_argument("--max-len", type=int, default=8)
        if name == "decay":
            sp_.add_argument("--r-max", type=int, default=20)
        if name == "noninv":
            sp_.add_argument("--radii", default="4,8,16")
    return parser


def _threads(args):
    if args.threads is not None:
        n = args.threads
    elif os.environ.get("KW_THREADS"):
        try:
            n = int(os.environ["KW_THREADS"])
        except ValueError:
            raise PreconditionError("KW_THREADS must be an integer") from None
    else:
        return None
    if n < 1:
        raise PreconditionError("thread count must be positive")
    return n


def _validate(args):
    for name in ("geometric_tol", "solve_tol", "test_tol"):
        if getattr(args, name) <= 0:
            raise PreconditionError(f"--{name.replace('_', '-')} must be positive")
    if not 0 < args.beta <= 1:
        raise PreconditionError("--beta must lie in (0, 1]")
    if args.format == "jsonl" and args.command != "walks":
        raise PreconditionError("jsonl output is only available for walks")


def run(argv=None) -> tuple[int, str, str | None]:
    """Execute a command and return ``(exit_code, text, output_path)``."""
    args = build_parser().parse_args(argv)
    try:
        _validate(args)
        with threadpool_limits(limits=_threads(args)):
            out = COMMANDS[args.command](args)
        res, rows, header = out[:3]
        env = kio.envelope(args.command, config_of(args), args.seed, res)
        if args.format == "json":
            text = kio.dumps(env)
        elif args.format == "csv":
            text = kio.to_csv(header, rows)
        else:
            head = {k: v for k, v in env.items() if k != "result"}
            text = kio.dumps_line(head) + kio.walk_lines(out[3])
        return 0, text, args.output
    except PreconditionError as exc:
        return 2, f"error: {exc}\n", None
    except NumericalError as exc:
        return 3, f"numerical error: {exc}\n", None


def main(argv=None) -> int:
    code, text, path = run(argv)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (sys.stdout if code == 0 else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
