"""Output-error metrics and table rendering."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .aggregation import BasisGroup, BasisSet
from .merging import Partition, com_partition, host_primal, make_cluster, resolve_partition
from .strategies import StrategyTrace
from .transport import NetworkModel

_TOL = 1e-7


class UndefinedMetricError(ZeroDivisionError):
    pass


def error_ov(ov_i: Sequence[float], ov_k: Sequence[float]) -> float:
    """Signed relative objective error of the merged model."""
    total_i = float(np.sum(ov_i))
    if total_i == 0.0:
        raise UndefinedMetricError("objective error undefined: sum of OV^i is zero")
    return (total_i - float(np.sum(ov_k))) / total_i


def error_generator(g: str, prod_i: Sequence[Mapping[str, float]],
                    prod_k: Sequence[Mapping[str, float]]) -> Optional[float]:
    """Signed relative production error of generator ``g``.

    Productions are weight-expanded totals per basis/cluster. Returns 0 when
    ``g`` produces nothing in either model and ``None`` (not applicable) when
    only the merged model uses it.
    """
    total_i = float(sum(p[g] for p in prod_i))
    total_k = float(sum(p[g] for p in prod_k))
    if total_i == 0.0:
        return 0.0 if total_k == 0.0 else None
    return (total_i - total_k) / total_i


@dataclass
class ErrorReport:
    partition: Partition
    eps_ov: float
    eps_gen: dict[str, Optional[float]]
    com_abs: float
    ov_i: dict[int, float]
    ov_k: dict[str, float]
    prod_i: dict[int, dict[str, float]] = field(default_factory=dict)
    prod_k: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"partition": self.partition.label(), "eps_ov": self.eps_ov,
                "eps_gen": self.eps_gen, "com_abs": self.com_abs,
                "ov_i": {str(k): v for k, v in self.ov_i.items()},
                "ov_k": self.ov_k, "prod_i": {str(k): v for k, v in self.prod_i.items()},
                "prod_k": self.prod_k}


def _production(net: NetworkModel, weight: float, x: np.ndarray) -> dict[str, float]:
    return {g.id: float(weight * x[net.gen_var(g.id)]) for g in net.generators}


def error_report(p: Partition, bs: BasisSet, net: NetworkModel, resolve: bool = False) -> ErrorReport:
    """Objective and per-generator errors of ``p`` against the per-basis model.

    Cluster production comes from the host's active rows at the centroid,
    or from re-solving the merged LP when ``resolve`` is set.
    """
    ev = com_partition(p, bs)
    ov_i = {g.id: g.objective for g in bs}
    prod_i = {}
    for g in bs:
        x = g.primal_rep if g.primal_rep is not None else g.member_primal_mean
        prod_i[g.id] = _production(net, g.weight, x)
    prod_k = {}
    solved = resolve_partition(p, bs) if resolve else None
    for n, block in enumerate(p.blocks):
        cluster = make_cluster(block, bs)
        if solved is not None:
            x = solved.primal[n]
        elif len(block) == 1:
            g = bs.get(block[0])
            x = g.primal_rep if g.primal_rep is not None else g.member_primal_mean
        else:
            x = host_primal(cluster, bs, ev.hosts[cluster.label])
        prod_k[cluster.label] = _production(net, cluster.weight, x)
    eps_ov = error_ov(list(ov_i.values()), list(ev.per_cluster_ov.values()))
    eps_gen = {g.id: error_generator(g.id, list(prod_i.values()), list(prod_k.values()))
               for g in net.generators}
    return ErrorReport(p, eps_ov, eps_gen, ev.com, ov_i, ev.per_cluster_ov, prod_i, prod_k)


def describe_basis(bg: BasisGroup, net: NetworkModel, tol: float = _TOL) -> dict:
    """Congested lines, full-load and marginal generators, and nodal prices.

    The marginal generator has zero reduced cost and interior output; failing
    that, any generator whose cost equals its node's price is listed.
    """
    y = bg.member_dual
    x = bg.member_primal_mean
    rhs = bg.centroid
    active = set(bg.active_set.indices)
    congested = [ln.id for ln in net.lines if net.line_row(ln.id) in active and ln.capacity > tol]
    full_load, marginal, fallback = [], [], []
    prices = {n: float(y[net.balance_row(n)]) for n in net.nodes}
    for g in net.generators:
        r = net.gen_row(g.id)
        cap = rhs[r]
        p = x[net.gen_var(g.id)]
        if r in active and cap > tol:
            full_load.append(g.id)
        reduced = g.cost - y[r] - prices[g.node]
        scale = max(1.0, abs(g.cost))
        if abs(reduced) <= tol * scale and tol < p < cap - tol:
            marginal.append(g.id)
        if abs(g.cost - prices[g.node]) <= tol * scale:
            fallback.append(g.id)
    demand = {n: float(rhs[net.balance_row(n)]) for n in net.nodes}
    demand_node = max(net.nodes, key=lambda n: (demand[n], -net.nodes.index(n)))
    return {
        "basis_id": bg.id, "weight": bg.weight,
        "congested_lines": congested, "full_load": full_load,
        "marginal": marginal or fallback, "marginal_by_fallback": not marginal,
        "demand_node": demand_node, "lmp": prices[demand_node], "lmp_by_node": prices,
    }


def _pct(v: Optional[float]) -> str:
    if v is None:
        return "NA"
    s = f"{100.0 * v:.2f}"
    return "0.00" if s == "-0.00" else s


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_tables(traces: Sequence[StrategyTrace], reports: Mapping[int, ErrorReport],
                outdir, generators: Sequence[str] = ()) -> list[Path]:
    """Write ``counts.csv`` for every trace and ``optimal_mergers.csv``.

    ``reports`` maps cluster count to the error report of the partition the
    first trace chose at that level. Percentages are rounded here only.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if not generators and reports:
        generators = list(next(iter(reports.values())).eps_gen)
    ks = sorted({k for t in traces for k in t.per_k}, reverse=True)
    counts_path = outdir / "counts.csv"
    _write_csv(counts_path, ["strategy"] + [str(k) for k in ks],
               [[t.strategy] + [t.per_k[k].evaluated if k in t.per_k else "" for k in ks]
                for t in traces])
    merg_path = outdir / "optimal_mergers.csv"
    rows = []
    if traces:
        for k in sorted(traces[0].per_k, reverse=True):
            rep = reports.get(k)
            if rep is None:
                continue
            rows.append([k, rep.partition.label(), _pct(rep.eps_ov)]
                        + [_pct(rep.eps_gen.get(g)) for g in generators])
    _write_csv(merg_path, ["K", "partition", "eps_OV_pct"] + [f"eps_{g}_pct" for g in generators], rows)
    return [counts_path, merg_path]


def emit_bases_table(descriptors: Sequence[dict], outdir) -> Path:
    path = Path(outdir) / "bases_table.csv"
    rows = [[d["basis_id"], d["weight"], " ".join(d["congested_lines"]) or "-",
             " ".join(d["full_load"]) or "-", " ".join(d["marginal"]) or "-",
             d["demand_node"], f"{d['lmp']:.2f}"] for d in descriptors]
    _write_csv(path, ["basis", "weight", "congestion", "full_load", "marginal", "demand_node", "lmp"], rows)
    return path


def emit_points(path, net: NetworkModel, rhs: np.ndarray, labels: np.ndarray) -> Path:
    """Tidy per-timestep input data with basis labels, for scatter plots."""
    path = Path(path)
    cf_gens = [g for g in net.generators if g.uses_cf_series]
    header = (["t"] + [f"D_{n}" for n in net.nodes] + [f"CF_{g.id}" for g in cf_gens] + ["basis"])
    rows = []
    for t in range(rhs.shape[0]):
        demand = [repr(float(rhs[t, net.balance_row(n)])) for n in net.nodes]
        cfs = [repr(float(rhs[t, net.gen_row(g.id)] / g.capacity)) if g.capacity > 0 else "0.0"
               for g in cf_gens]
        rows.append([t + 1] + demand + cfs + [int(labels[t])])
    _write_csv(path, header, rows)
    return path

