"""Command line front end.

Subcommands: ``eig-verify``, ``svd-verify``, ``track``, ``suite`` and
``compare``. Reports are JSON documents tagged ``"schema": "mptk/1"``.
Exit status: 0 when every applicable bound holds, 1 on a violation, 2 on
usage or input errors.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import sys

import numpy as np

from . import __version__, harness, homotopy
from .errors import MptkError
from .homotopy import BlockPartition
from .mmio import read_matrix
from .pipeline import eig_verify, svd_verify

SCHEMA = "mptk/1"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def clean(obj):
    """JSON-ready copy of ``obj``: non-finite floats become null, arrays lists."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load(path):
    return read_matrix(path), {"path": path, "sha256": _digest(path)}


def _partition(text):
    return BlockPartition.parse(text)


def _profile_dict(profile):
    return {"path_minima": profile.path_minima, "resolution": profile.resolution}


def _grid_dict(v):
    meta = v.path.meta
    return {
        "points": meta.grid_points,
        "samples": len(v.path.t),
        "adaptive_insertions": meta.adaptive_insertions,
        "step_refinements": meta.step_refinements,
        "block_ambiguity": [list(x) for x in meta.block_ambiguity],
        "discontinuities": meta.discontinuities,
        "continuity_flags": len(meta.continuity_flags),
        "gauge_residual": v.gauge_residual,
        "gauge_min_eigenvalue": v.gauge_min_eig,
    }


def verification_document(command, v, inputs):
    """ReportDocument for one verification run."""
    if v.kind == "hermitian":
        gaps = {"delta": _profile_dict(v.gaps)}
    else:
        gaps = {"rho": _profile_dict(v.gaps.rho), "rho_hat": _profile_dict(v.gaps.rho_hat),
                "sigma_block": _profile_dict(v.gaps.sigma_block),
                "sigma_min": v.gaps.sigma_min, "square": v.gaps.square}
    applicable = [r for r in v.reports if r.applicable]
    satisfied = [r for r in applicable if r.satisfied]
    doc = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": command,
        "inputs": inputs,
        "partition": list(v.path.partition.sizes),
        "grid": _grid_dict(v),
        "gaps": gaps,
        "reports": [r.to_dict() for r in v.reports],
        "classical_squared": v.squared_classical.to_dict(),
        "endpoint": v.endpoint,
        "summary": {"reports": len(v.reports), "applicable": len(applicable),
                    "satisfied": len(satisfied), "ok": len(satisfied) == len(applicable)},
    }
    return clean(doc)


def _emit(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _target(args, k):
    if args.target_block is None:
        return None
    if not 1 <= args.target_block <= k:
        raise UsageError(f"--target-block must lie in 1..{k}")
    return args.target_block - 1


def cmd_eig_verify(args):
    A, a_info = _load(args.a)
    dA, da_info = _load(args.da)
    partition = _partition(args.partition)
    v = eig_verify(A, dA, partition, args.grid, _target(args, partition.k), not args.no_adaptive)
    doc = verification_document("eig-verify", v, {"a": a_info, "da": da_info})
    _emit(doc, args.out)
    return EXIT_OK if doc["summary"]["ok"] else EXIT_VIOLATION


def cmd_svd_verify(args):
    B, b_info = _load(args.b)
    dB, db_info = _load(args.db)
    partition = _partition(args.partition)
    v = svd_verify(B, dB, partition, args.grid, _target(args, partition.k), not args.no_adaptive)
    doc = verification_document("svd-verify", v, {"b": b_info, "db": db_info})
    _emit(doc, args.out)
    return EXIT_OK if doc["summary"]["ok"] else EXIT_VIOLATION


def _pair_args(args):
    if args.a and args.da and not (args.b or args.db):
        return "hermitian", args.a, args.da
    if args.b and args.db and not (args.a or args.da):
        return "general", args.b, args.db
    raise UsageError("give either --a and --da, or --b and --db")


def _complex_dict(X):
    return {"real": X.real, "imag": X.imag}


def cmd_track(args):
    kind, p, dp = _pair_args(args)
    M, m_info = _load(p)
    dM, dm_info = _load(dp)
    partition = _partition(args.partition)
    adaptive = not args.no_adaptive
    if kind == "hermitian":
        path = homotopy.track_eig_path(M, dM, partition, args.grid, adaptive)
        data = {"eigenvalues": path.eigs, "bases": _complex_dict(path.bases)}
        gaps = {"delta": _profile_dict(homotopy.gap_profile_eig(path))}
    else:
        path = homotopy.track_svd_path(M, dM, partition, args.grid, adaptive)
        data = {"singular_values": path.sings, "left": _complex_dict(path.lefts),
                "right": _complex_dict(path.rights)}
        g = homotopy.gap_profile_svd(path)
        gaps = {"rho": _profile_dict(g.rho), "rho_hat": _profile_dict(g.rho_hat),
                "sigma_min": g.sigma_min}
    meta = path.meta
    doc = clean({
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": "track",
        "kind": kind,
        "inputs": {"matrix": m_info, "direction": dm_info},
        "partition": list(partition.sizes),
        "grid": {"points": meta.grid_points, "samples": len(path.t),
                 "adaptive_insertions": meta.adaptive_insertions,
                 "step_refinements": meta.step_refinements,
                 "block_ambiguity": [list(x) for x in meta.block_ambiguity]},
        "gaps": gaps,
        "t": path.t,
        **data,
    })
    _emit(doc, args.dump_path or args.out)
    return EXIT_OK


def _suite_configs(raw):
    if isinstance(raw, dict) and "suites" in raw:
        raw = raw["suites"]
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list) or not all(isinstance(c, dict) for c in raw):
        raise UsageError("suite config must be an object or a list of objects")
    try:
        return [harness.SuiteConfig.from_dict(c) for c in raw]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad suite config: {exc}") from None


def cmd_suite(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: invalid JSON ({exc})") from None
    reports = [harness.run_suite(c) for c in _suite_configs(raw)]
    doc = clean({
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": "suite",
        "inputs": {"config": {"path": args.config, "sha256": _digest(args.config)}},
        "suites": [r.to_dict() for r in reports],
        "ok": all(r.ok for r in reports),
    })
    _emit(doc, args.out)
    return EXIT_OK if doc["ok"] else EXIT_VIOLATION


COMPARE_FIELDS = ("scale", "bound_id", "block", "lhs", "rhs", "slack", "applicable", "satisfied")


def cmd_compare(args):
    kind, p, dp = _pair_args(args)
    M, _ = _load(p)
    dM, _ = _load(dp)
    partition = _partition(args.partition)
    try:
        scales = [float(s) for s in args.scales.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"malformed --scales {args.scales!r}") from None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COMPARE_FIELDS)
    ok = True
    verify = eig_verify if kind == "hermitian" else svd_verify
    for s in scales:
        v = verify(M, s * dM, partition, args.grid)
        ok &= v.ok
        for r in [v.squared_classical] + v.reports:
            name = r.bound_id.value + ("^2" if r.condition_note == "squared" else "")
            writer.writerow([repr(s), name, "" if r.block is None else r.block + 1,
                             repr(r.lhs), repr(r.rhs), repr(r.slack), int(r.applicable),
                             int(r.satisfied)])
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser():
    parser = argparse.ArgumentParser(prog="mptk", description="Combined perturbation bound toolkit.")
    parser.add_argument("--version", action="version", version=f"mptk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--partition", required=True, help="block sizes, e.g. 1,2,3")
        p.add_argument("--grid", type=int, default=homotopy.DEFAULT_GRID, help="grid points")
        p.add_argument("--no-adaptive", action="store_true", help="skip adaptive refinement")
        p.add_argument("--out", help="write the report here instead of stdout")

    p = sub.add_parser("eig-verify", help="Hermitian bounds along A + t dA")
    p.add_argument("--a", required=True)
    p.add_argument("--da", required=True)
    p.add_argument("--target-block", type=int, help="1-based block for single-block bounds")
    common(p)
    p.set_defaults(func=cmd_eig_verify)

    p = sub.add_parser("svd-verify", help="singular value bounds along B + t dB")
    p.add_argument("--b", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--target-block", type=int, help="1-based block for single-block bounds")
    common(p)
    p.set_defaults(func=cmd_svd_verify)

    p = sub.add_parser("track", help="dump a tracked path as JSON")
    for name in ("--a", "--da", "--b", "--db"):
        p.add_argument(name)
    p.add_argument("--dump-path", help="output JSON file")
    common(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("suite", help="run randomized verification suites")
    p.add_argument("--config", required=True, help="JSON suite configuration")
    p.add_argument("--out")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("compare", help="CSV of new vs classical slacks over a scale sweep")
    for name in ("--a", "--da", "--b", "--db"):
        p.add_argument(name)
    p.add_argument("--partition", required=True)
    p.add_argument("--scales", default="1", help="comma separated multipliers of the perturbation")
    p.add_argument("--grid", type=int, default=homotopy.DEFAULT_GRID)
    p.add_argument("--csv", help="output CSV file")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MptkError, ValueError, OSError) as exc:
        label = f"{type(exc).__name__}: " if isinstance(exc, MptkError) else ""
        print(f"mptk: error: {label}{exc}", file=sys.stderr)
        return EXIT_USAGE
