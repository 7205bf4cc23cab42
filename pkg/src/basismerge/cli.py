"""Command-line pipeline: ``basismerge <subcommand> [options]``.

Exit codes: 0 success, 1 unexpected or I/O failure, 2 usage, 3 invalid input
or configuration, 4 infeasible timestep, 5 exhaustive search cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .aggregation import SCHEMA_VERSION, bases_document
from .casestudy import TEMPLATES, CaseStudyConfig, generate_case_study
from .dataio import InputError, load_network, load_timeseries, write_json, write_network, write_timeseries
from .merging import com_partition
from .metrics import emit_bases_table, emit_points, emit_tables, error_report
from .pipeline import Analysis, InfeasibleTimestep, analyse, pairwise_mergers, solve_timesteps, verify_partition
from .strategies import (
    EXHAUSTIVE_CAP, AdjacencyList, ExhaustiveCapExceeded, StrategyTrace, detect_adjacency,
    exhaustive_strategy, greedy_adjacent_strategy, greedy_strategy,
)
from .transport import ConfigurationError, ContractViolation, build_template, lmp

OUT_ENV = "BASISMERGE_OUT"

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_CAP = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _outdir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_inputs(args):
    return load_network(args.network), load_timeseries(args.timeseries)


def _analyse(args) -> Analysis:
    net, data = _load_inputs(args)
    return analyse(net, data, jobs=args.jobs)


def cmd_gen_case(args) -> list[Path]:
    cfg = CaseStudyConfig(weeks=args.weeks, seed=args.seed, template=args.template)
    net, data = generate_case_study(cfg)
    out = _outdir(args)
    return [write_network(out / "network.json", net),
            write_timeseries(out / "timeseries.csv", data, net)]


def cmd_solve(args) -> list[Path]:
    net, data = _load_inputs(args)
    template = build_template(net)
    path = _outdir(args) / "solutions.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "objective"] + list(template.col_names) + [f"lmp_{n}" for n in net.nodes])
        for t, _, sol, _ in solve_timesteps(net, data, jobs=args.jobs):
            prices = lmp(net, sol.dual)
            w.writerow([t + 1, repr(sol.objective)] + [repr(float(v)) for v in sol.primal]
                       + [repr(prices[n]) for n in net.nodes])
    return [path]


def _write_bases(a: Analysis, out: Path) -> list[Path]:
    bs = a.bases
    doc = bases_document(bs)
    exact = dict(a.exactness.to_dict(), schema_version=SCHEMA_VERSION,
                 full_objective=float(a.objectives.sum()),
                 aggregated_objective=float(sum(a.aggregated.ov)), n_bases=len(bs))
    return [write_json(out / "bases.json", doc),
            emit_bases_table([g.descriptor for g in bs], out),
            emit_points(out / "points.csv", a.net, a.rhs, a.labels),
            write_json(out / "exactness.json", exact)]


def cmd_bases(args) -> list[Path]:
    return _write_bases(_analyse(args), _outdir(args))


def _adjacency(args, a: Analysis) -> tuple[AdjacencyList, dict]:
    if args.adjacency == "file":
        if not args.adjacency_file:
            raise UsageError("--adjacency file requires --adjacency-file")
        try:
            doc = json.loads(Path(args.adjacency_file).read_text(encoding="utf-8"))
            pairs = [tuple(int(v) for v in p) for p in doc["pairs"]]
            adj = AdjacencyList(pairs)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{args.adjacency_file}: invalid adjacency file ({exc})") from exc
        unknown = sorted({i for p in adj.pairs for i in p} - set(a.bases.ids))
        if unknown:
            raise InputError(f"{args.adjacency_file}: unknown basis ids {unknown}")
        return adj, {"mode": "file", "pairs": adj.sorted_pairs()}
    mode = args.adjacency.replace("-", "_")
    return detect_adjacency(a.bases, a.rhs, mode=mode)


def _run_strategy(name: str, args, a: Analysis, out: Path, written: list[Path]) -> StrategyTrace:
    if name == "exhaustive":
        return exhaustive_strategy(a.bases, cap=args.exhaustive_cap, target_k=args.target_k)
    if name == "greedy":
        return greedy_strategy(a.bases, target_k=args.target_k)
    adj, audit = _adjacency(args, a)
    written.append(write_json(out / "adjacency.json", dict(audit, schema_version=SCHEMA_VERSION)))
    return greedy_adjacent_strategy(a.bases, adj, target_k=args.target_k)


def _write_merge_outputs(traces: Sequence[StrategyTrace], a: Analysis, out: Path,
                         verify: bool, written: list[Path]) -> None:
    main = traces[0]
    trace_doc = {"schema_version": SCHEMA_VERSION, "ov_I": float(sum(g.objective for g in a.bases)),
                 "traces": [t.to_dict() for t in traces]}
    written.append(write_json(out / "strategy_trace.json", trace_doc))
    levels = []
    reports = {}
    for k, lvl in sorted(main.per_k.items(), reverse=True):
        entry = com_partition(lvl.partition, a.bases).to_dict()
        entry["k"] = k
        if verify:
            check = verify_partition(lvl.partition, a.bases)
            entry["com_resolved"] = check["com_resolved"]
            entry["relative_residual"] = check["relative_residual"]
            entry["host_audit"] = check["host_audit"]
        levels.append(entry)
        reports[k] = error_report(lvl.partition, a.bases, a.net)
    mergers = {"schema_version": SCHEMA_VERSION, "strategy": main.strategy, "partitions": levels}
    if verify:
        mergers["pairwise"] = pairwise_mergers(a.bases, verify=True)
    written.append(write_json(out / "mergers.json", mergers))
    written.extend(emit_tables(traces, reports, out, [g.id for g in a.net.generators]))


def _check_target(args, a: Analysis) -> None:
    if not 1 <= args.target_k <= len(a.bases):
        raise UsageError(f"--target-k must lie in [1, {len(a.bases)}], got {args.target_k}")


def cmd_merge(args) -> list[Path]:
    a = _analyse(args)
    _check_target(args, a)
    out = _outdir(args)
    written: list[Path] = []
    trace = _run_strategy(args.strategy, args, a, out, written)
    _write_merge_outputs([trace], a, out, args.verify_hosts, written)
    return written


def cmd_report(args) -> list[Path]:
    a = _analyse(args)
    _check_target(args, a)
    out = _outdir(args)
    written = _write_bases(a, out)
    names = ["greedy", "greedy-adjacent"]
    if len(a.bases) <= args.exhaustive_cap:
        names.insert(0, "exhaustive")
    traces = [_run_strategy(n, args, a, out, written) for n in names]
    _write_merge_outputs(traces, a, out, args.verify_hosts, written)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="basismerge", description="Basis-driven time series aggregation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inputs=True):
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        if inputs:
            sp.add_argument("--network", required=True, help="network JSON file")
            sp.add_argument("--timeseries", required=True, help="timeseries CSV file")
            sp.add_argument("--jobs", type=int, default=1, help="worker processes for timestep solves")

    def merging(sp):
        sp.add_argument("--target-k", type=int, default=1, help="stop at this many clusters")
        sp.add_argument("--verify-hosts", action="store_true",
                        help="re-solve merged LPs and record residuals and host audits")
        sp.add_argument("--adjacency", choices=["input-space", "active-set", "file"], default="input-space")
        sp.add_argument("--adjacency-file", help="JSON file with {\"pairs\": [[a, b], ...]}")
        sp.add_argument("--exhaustive-cap", type=int, default=EXHAUSTIVE_CAP)

    g = sub.add_parser("gen-case", help="write a synthetic case study")
    common(g, inputs=False)
    g.add_argument("--weeks", type=int, default=52)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--template", choices=sorted(TEMPLATES), default="three-node")
    g.set_defaults(func=cmd_gen_case)

    s = sub.add_parser("solve", help="solve every timestep")
    common(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bases", help="group timesteps by basis and check exactness")
    common(b)
    b.set_defaults(func=cmd_bases)

    m = sub.add_parser("merge", help="search for bases mergers")
    common(m)
    m.add_argument("--strategy", choices=["exhaustive", "greedy", "greedy-adjacent"], required=True)
    merging(m)
    m.set_defaults(func=cmd_merge)

    r = sub.add_parser("report", help="bases plus every strategy")
    common(r)
    merging(r)
    r.set_defaults(func=cmd_report)
    return p


def _fail(category: str, msg: str, code: int) -> int:
    print(f"basismerge: error [{category}]: {msg}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be >= 1")
        for path in args.func(args):
            print(path)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except (InputError, ConfigurationError, ContractViolation, FileNotFoundError) as exc:
        return _fail("input", str(exc), EXIT_INPUT)
    except InfeasibleTimestep as exc:
        return _fail("infeasible", str(exc), EXIT_INFEASIBLE)
    except ExhaustiveCapExceeded as exc:
        return _fail("cap", f"{exc}; use --exhaustive-cap or another strategy", EXIT_CAP)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_ERROR)
    except ValueError as exc:
        return _fail("input", str(exc), EXIT_INPUT)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
