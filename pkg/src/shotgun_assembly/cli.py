"""Batch experiment driver: every pipeline as a seeded subcommand.

A run is a pure function of (config, seed, workers); all three are recorded
in every file the run writes, JSON for single-object results and CSV for
tables. Files land atomically (write to a temp file, then rename), and all
computation happens before the first byte is written, so an error never
leaves a partial result behind. The default seed comes from the environment
variable SHOTGUN_SEED when set; every value is overridable by flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from multiprocessing import get_context

import numpy as np

from .admissibility import (
    check_admissibility,
    strong_report_to_json,
    strongly_admissible,
    xi_survey,
)
from .blocking import certificate_to_json, find_blocking, report_to_json, verify_certificate
from .errors import ShotgunError
from .estimators import (
    assembly_threshold,
    decay_diagnostics,
    decay_table_to_csv,
    decay_table_to_json,
    extinction_probability,
    iso_decay_rate,
    iso_mc,
    iso_series,
)
from .graphs import Graph, generate_er, graph_from_json, graph_to_json
from .reconstruct import (
    build_profile,
    label_depth,
    reconstruct,
    result_to_json,
    verify_reconstruction,
)

SEED_ENV = "SHOTGUN_SEED"


# ---------------------------------------------------------------------------
# Plumbing


def _samples(text: str) -> int:
    """Accept scientific notation for sample counts (1e6 and friends)."""
    value = int(float(text))
    if value < 1:
        raise argparse.ArgumentTypeError("samples must be >= 1")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _resolve_seed(args: argparse.Namespace) -> None:
    if args.seed is None:
        args.seed = int(os.environ.get(SEED_ENV, "0"))


def _header(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "format", "seed", "workers"}
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None
    }
    config.pop("subcommand", None)
    return {
        "subcommand": args.subcommand,
        "seed": args.seed,
        "workers": args.workers,
        "config": config,
    }


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_text(header: dict, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _emit(args: argparse.Namespace, payload: dict | None, table: str | None) -> list[str]:
    """Write the selected formats and return the paths written."""
    written = []
    fmt = args.format
    if fmt in ("json", "both"):
        if payload is None:
            raise ValueError(f"{args.subcommand} has no JSON output")
        path = args.out + ".json"
        _atomic_write(path, _json_text(payload))
        written.append(path)
    if fmt in ("csv", "both"):
        if table is None:
            raise ValueError(f"{args.subcommand} has no CSV output for this config")
        path = args.out + ".csv"
        _atomic_write(path, table)
        written.append(path)
    return written


def _validate_rho(r: int, rho: float) -> int:
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    m = label_depth(rho, r)
    if not 1 <= m <= r - 2:
        raise ValueError(
            f"rho {rho} with r {r} gives label depth {m}, outside "
            f"[1, r - 2] = [1, {r - 2}]; increase r or lower rho"
        )
    return m


def _load_graph(path: str) -> Graph:
    """Read a graph file: JSON (as written by gen) or an edge list.

    Edge lists start with an 'n m' header line; separators may be spaces or
    commas, and lines starting with # are skipped.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return graph_from_json(json.loads(text))
    lines = [
        ln.replace(",", " ").split()
        for ln in text.splitlines()
        if ln.strip() and not ln.startswith("#")
    ]
    if not lines or len(lines[0]) != 2:
        raise ValueError(f"{path}: expected an 'n m' header line")
    n, m = int(lines[0][0]), int(lines[0][1])
    if len(lines) != m + 1:
        raise ValueError(f"{path}: header promises {m} edges, found {len(lines) - 1}")
    return Graph.build(n, [(int(a), int(b)) for a, b in lines[1:]])


def _obtain_graph(args: argparse.Namespace) -> Graph:
    if args.graph is not None:
        return _load_graph(args.graph)
    if args.n is None or args.lam is None:
        raise ValueError("need either --graph FILE or both --n and --lambda")
    return generate_er(args.n, args.lam, args.seed)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_estimate(args: argparse.Namespace) -> list[str]:
    """Extinction probability, isomorphism series and MC, decay table."""
    q = extinction_probability(args.lam)
    series = iso_series(args.lam, args.series_size)
    mc = iso_mc(args.lam, args.samples, args.seed, args.workers, args.workers > 1)
    rate = iso_decay_rate(args.lam, series.partial_sum)
    threshold = assembly_threshold(args.n, args.lam, series.partial_sum)
    table = decay_diagnostics(
        args.lam,
        args.r_max,
        args.samples,
        args.seed + 1,
        args.workers,
        args.workers > 1,
        args.series_size,
    )
    header = _header(args)
    payload = {
        "header": header,
        "q": q,
        "series": {
            "partial_sum": series.partial_sum,
            "terms_by_size": list(series.terms_by_size),
            "max_size": series.max_size,
            "tail_allowance": series.tail_allowance(),
        },
        "mc": {
            "mean": mc.mean,
            "std_error": mc.std_error,
            "samples": mc.samples,
            "excluded_truncated": mc.excluded_truncated,
        },
        "alpha_hat": rate,
        "threshold_r": threshold,
        "decay": decay_table_to_json(table),
    }
    csv_text = "# " + json.dumps(header, sort_keys=True) + "\n" + decay_table_to_csv(table)
    return _emit(args, payload, csv_text)


def cmd_gen(args: argparse.Namespace) -> list[str]:
    """Sample a sparse random graph and write it to a file."""
    g = generate_er(args.n, args.lam, args.seed)
    header = _header(args)
    payload = dict(graph_to_json(g))
    payload["header"] = header
    lines = ["# " + json.dumps(header, sort_keys=True), f"{args.n},{g.edge_count}"]
    lines.extend(f"{u},{v}" for u, v in g.edges)
    return _emit(args, payload, "\n".join(lines) + "\n")


def cmd_profile(args: argparse.Namespace) -> list[str]:
    """Dump every vertex's rooted r-neighborhood from a graph file."""
    m = _validate_rho(args.r, args.rho)
    g = _load_graph(args.graph)
    prof = build_profile(g, args.r, args.rho)
    header = _header(args)
    entries = []
    rows = []
    for i, entry in enumerate(prof.entries):
        entries.append(
            {
                "n": entry.n,
                "root": entry.root,
                "edges": [list(e) for e in entry.edges],
                "depth": list(entry.depth),
            }
        )
        rows.append([i, entry.n, len(entry.edges), max(entry.depth)])
    payload = {
        "header": header,
        "r": args.r,
        "rho": args.rho,
        "label_depth": m,
        "entries": entries,
    }
    table = _csv_text(header, ["entry", "ball_n", "ball_edges", "ball_depth"], rows)
    return _emit(args, payload, table)


def cmd_reconstruct(args: argparse.Namespace) -> list[str]:
    """Sample or load a graph, run the pipeline, verify, report."""
    _validate_rho(args.r, args.rho)
    g = _obtain_graph(args)
    prof = build_profile(g, args.r, args.rho)
    result = reconstruct(prof)
    verified = verify_reconstruction(g, result)
    payload = {
        "header": _header(args),
        "result": result_to_json(replace(result, success=verified)),
        "verified": verified,
    }
    return _emit(args, payload, None)


def cmd_blocking(args: argparse.Namespace) -> list[str]:
    """Search for a profile-preserving surgery certificate and verify it."""
    if args.r < 1 or args.L < 1:
        raise ValueError("need r >= 1 and L >= 1")
    g = _obtain_graph(args)
    cert = find_blocking(g, args.r, args.L)
    if cert is None:
        payload = {"header": _header(args), "found": False, "certificate": None, "report": None}
    else:
        report = verify_certificate(g, cert)
        payload = {
            "header": _header(args),
            "found": True,
            "certificate": certificate_to_json(cert),
            "report": report_to_json(report),
        }
    return _emit(args, payload, None)


def cmd_admissibility(args: argparse.Namespace) -> list[str]:
    """Run both admissibility checkers, optionally with pair diagnostics."""
    _validate_rho(args.r, args.rho)
    if args.format in ("csv", "both") and args.survey_pairs < 1:
        raise ValueError("csv output is the pair survey; needs --survey-pairs >= 1")
    g = _obtain_graph(args)
    admissible = check_admissibility(g, args.r, args.rho)
    strong, report = strongly_admissible(g, args.r, args.rho, args.L)
    header = _header(args)
    payload = {
        "header": header,
        "admissible": admissible,
        "strongly_admissible": strong,
        "strong_report": strong_report_to_json(report),
    }
    table = None
    if args.survey_pairs > 0:
        survey = xi_survey(g, args.r, max_pairs=args.survey_pairs)
        payload["survey"] = survey
        cols = sorted(survey)
        table = _csv_text(header, cols, [[survey[c] for c in cols]])
    return _emit(args, payload, table)


def _sweep_task(task: tuple) -> tuple[int, bool, bool]:
    n, lam, r, rho, trial_seed = task
    g = generate_er(n, lam, trial_seed)
    result = reconstruct(build_profile(g, r, rho))
    success = verify_reconstruction(g, result)
    admissible = check_admissibility(g, r, rho)
    return r, success, admissible


def cmd_sweep(args: argparse.Namespace) -> list[str]:
    """Success-rate and admissibility-rate curves over a radius grid.

    Radii where the label depth falls outside [1, r - 2] cannot run the
    pipeline; their rows keep the trial count but leave the rates blank.
    Per-trial seeds derive from (seed, r, trial), so results do not depend
    on how trials are scheduled across workers.
    """
    if args.r_min < 1 or args.r_max < args.r_min:
        raise ValueError("need 1 <= r-min <= r-max")
    tasks = []
    invalid = []
    for r in range(args.r_min, args.r_max + 1):
        try:
            _validate_rho(r, args.rho)
        except ValueError:
            invalid.append(r)
            continue
        for t in range(args.trials):
            ss = np.random.SeedSequence(entropy=[args.seed, r, t])
            tasks.append((args.n, args.lam, r, args.rho, int(ss.generate_state(1)[0])))
    if args.workers > 1 and len(tasks) > 1:
        with get_context().Pool(min(args.workers, len(tasks))) as pool:
            outcomes = pool.map(_sweep_task, tasks)
    else:
        outcomes = [_sweep_task(t) for t in tasks]

    per_r: dict[int, list[tuple[bool, bool]]] = {}
    for r, success, admissible in outcomes:
        per_r.setdefault(r, []).append((success, admissible))
    header = _header(args)
    rows = []
    json_rows = []
    for r in range(args.r_min, args.r_max + 1):
        if r in invalid:
            rows.append([r, args.trials, 0, "", ""])
            json_rows.append({"r": r, "trials": args.trials, "valid": False})
            continue
        got = per_r[r]
        s_rate = sum(s for s, _ in got) / len(got)
        a_rate = sum(a for _, a in got) / len(got)
        rows.append([r, len(got), 1, repr(float(s_rate)), repr(float(a_rate))])
        json_rows.append(
            {
                "r": r,
                "trials": len(got),
                "valid": True,
                "success_rate": float(s_rate),
                "admissible_rate": float(a_rate),
            }
        )
    payload = {"header": header, "rows": json_rows}
    table = _csv_text(
        header, ["r", "trials", "valid", "success_rate", "admissible_rate"], rows
    )
    return _emit(args, payload, table)


# ---------------------------------------------------------------------------
# Parser


def _add_common(p: argparse.ArgumentParser, formats: tuple[str, ...], default_format: str) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"default ${SEED_ENV} or 0")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", default=None, help="output stem (default: subcommand name)")
    p.add_argument("--format", choices=formats, default=default_format)


def _add_graph_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", default=None, help="graph file (JSON or edge list)")
    p.add_argument("--n", type=_positive_int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shotgun-assembly",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("estimate", help="extinction, isomorphism series/MC, decay table")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--samples", type=_samples, default=100_000)
    p.add_argument("--n", type=_positive_int, default=100_000, help="for threshold_r")
    p.add_argument("--r-max", type=_positive_int, default=8)
    p.add_argument("--series-size", type=_positive_int, default=12)
    _add_common(p, ("json", "csv", "both"), "both")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("gen", help="sample a sparse random graph to a file")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    _add_common(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("profile", help="dump rooted r-neighborhoods of a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--r", type=_positive_int, required=True)
    p.add_argument("--rho", type=float, default=0.6)
    _add_common(p, ("json", "csv", "both"), "json")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("reconstruct", help="profile -> pipeline -> verified result")
    _add_graph_source(p)
    p.add_argument("--r", type=_positive_int, required=True)
    p.add_argument("--rho", type=float, default=0.6)
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("blocking", help="find and verify a surgery certificate")
    _add_graph_source(p)
    p.add_argument("--r", type=_positive_int, required=True)
    p.add_argument("--L", type=_positive_int, default=3)
    _add_common(p, ("json",), "json")
    p.set_defaults(func=cmd_blocking)

    p = sub.add_parser("admissibility", help="both checkers plus pair diagnostics")
    _add_graph_source(p)
    p.add_argument("--r", type=_positive_int, required=True)
    p.add_argument("--rho", type=float, default=0.6)
    p.add_argument("--L", type=_positive_int, default=3)
    p.add_argument("--survey-pairs", type=int, default=0)
    _add_common(p, ("json", "csv", "both"), "json")
    p.set_defaults(func=cmd_admissibility)

    p = sub.add_parser("sweep", help="success and admissibility curves over r")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--r-min", type=_positive_int, default=2)
    p.add_argument("--r-max", type=_positive_int, default=12)
    p.add_argument("--trials", type=_positive_int, default=50)
    p.add_argument("--rho", type=float, default=0.6)
    _add_common(p, ("json", "csv", "both"), "csv")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _resolve_seed(args)
    if args.out is None:
        args.out = args.subcommand
    try:
        written = args.func(args)
    except (ValueError, OSError, ShotgunError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
