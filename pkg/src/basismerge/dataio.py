"""Network (JSON) and timeseries (CSV) files."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Sequence

from .transport import ConfigurationError, Generator, Line, NetworkModel, TimestepData

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed input file."""


def _require(obj: dict, key: str, path: str, kind, problems: list[str]):
    if not isinstance(obj, dict) or key not in obj:
        problems.append(f"{path}.{key}: missing")
        return None
    val = obj[key]
    if kind is float:
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    else:
        ok = isinstance(val, kind)
    if not ok:
        problems.append(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}")
        return None
    return float(val) if kind is float else val


def network_from_dict(doc: Any) -> NetworkModel:
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise InputError("network: top level must be an object")
    nodes = _require(doc, "nodes", "network", list, problems) or []
    for k, n in enumerate(nodes):
        if not isinstance(n, str):
            problems.append(f"network.nodes[{k}]: expected str")
    gens, lines = [], []
    for k, g in enumerate(_require(doc, "generators", "network", list, problems) or []):
        p = f"network.generators[{k}]"
        vals = [_require(g, "id", p, str, problems), _require(g, "node", p, str, problems),
                _require(g, "cost", p, float, problems), _require(g, "capacity", p, float, problems)]
        cf = g.get("uses_cf_series", False) if isinstance(g, dict) else False
        if not isinstance(cf, bool):
            problems.append(f"{p}.uses_cf_series: expected bool")
        if None not in vals:
            gens.append(Generator(*vals, uses_cf_series=bool(cf)))
    for k, ln in enumerate(doc.get("lines", [])):
        p = f"network.lines[{k}]"
        vals = [_require(ln, "id", p, str, problems), _require(ln, "from", p, str, problems),
                _require(ln, "to", p, str, problems), _require(ln, "capacity", p, float, problems),
                _require(ln, "transport_cost", p, float, problems)]
        if None not in vals:
            lines.append(Line(*vals))
    if problems:
        raise InputError("invalid network file: " + "; ".join(problems))
    try:
        return NetworkModel(tuple(nodes), tuple(gens), tuple(lines))
    except ConfigurationError as exc:
        raise InputError(str(exc)) from exc


def network_to_dict(net: NetworkModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "nodes": list(net.nodes),
        "generators": [{"id": g.id, "node": g.node, "cost": g.cost, "capacity": g.capacity,
                        "uses_cf_series": g.uses_cf_series} for g in net.generators],
        "lines": [{"id": ln.id, "from": ln.from_node, "to": ln.to_node, "capacity": ln.capacity,
                   "transport_cost": ln.transport_cost} for ln in net.lines],
    }


def load_network(path) -> NetworkModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    return network_from_dict(doc)


def write_network(path, net: NetworkModel) -> Path:
    path = Path(path)
    path.write_text(json.dumps(network_to_dict(net), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_timeseries(path) -> list[TimestepData]:
    """Rows of ``t, D_<node>..., CF_<gen>...`` with ``t`` running 1, 2, ..."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if not header or header[0] != "t":
            raise InputError(f"{path}: missing column 't' (must be first)")
        d_cols = [(k, h[2:]) for k, h in enumerate(header) if h.startswith("D_")]
        cf_cols = [(k, h[3:]) for k, h in enumerate(header) if h.startswith("CF_")]
        if not d_cols:
            raise InputError(f"{path}: missing demand columns 'D_<node>'")
        unknown = [h for k, h in enumerate(header[1:], 1)
                   if not (h.startswith("D_") or h.startswith("CF_"))]
        if unknown:
            raise InputError(f"{path}: unexpected columns {unknown}")
        out = []
        for row_no, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise InputError(f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            try:
                t = int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise InputError(f"{path}: row {row_no}: {exc}") from exc
            if t != row_no:
                raise InputError(f"{path}: row {row_no}: t={t} breaks the contiguous sequence starting at 1")
            demand = {}
            for k, node in d_cols:
                v = values[k - 1]
                if not v >= 0:
                    raise InputError(f"{path}: row {row_no}: demand D_{node}={v} must be >= 0")
                demand[node] = v
            cf = {}
            for k, gen in cf_cols:
                v = values[k - 1]
                if not 0.0 <= v <= 1.0:
                    raise InputError(f"{path}: row {row_no}: capacity factor CF_{gen}={v} outside [0, 1]")
                cf[gen] = v
            out.append(TimestepData(demand, cf))
    if not out:
        raise InputError(f"{path}: no timesteps (at least one row required)")
    return out


def write_timeseries(path, data: Sequence[TimestepData], net: NetworkModel) -> Path:
    path = Path(path)
    cf_gens = [g.id for g in net.generators if g.uses_cf_series]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"D_{n}" for n in net.nodes] + [f"CF_{g}" for g in cf_gens])
        for t, d in enumerate(data, start=1):
            w.writerow([t] + [repr(float(d.demand.get(n, 0.0))) for n in net.nodes]
                       + [repr(float(d.capacity_factor[g])) for g in cf_gens])
    return path


def write_json(path, doc: dict) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
