"""Per-timestep optimal transport LP on a directed network.

Variables are ordered ``[p_g for g in generators] + [f_l for l in lines]``;
rows are ``[generator caps] + [line caps] + [nodal balances]``. Only the
right-hand side changes between timesteps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .lp import EQ, LE, LpStandardForm


class ConfigurationError(ValueError):
    """Network or timestep data that does not describe a valid model."""


class ContractViolation(ValueError):
    """Inputs that break a documented precondition."""


@dataclass(frozen=True)
class Generator:
    id: str
    node: str
    cost: float
    capacity: float
    uses_cf_series: bool = False


@dataclass(frozen=True)
class Line:
    id: str
    from_node: str
    to_node: str
    capacity: float
    transport_cost: float


@dataclass(frozen=True)
class NetworkModel:
    nodes: tuple[str, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "lines", tuple(self.lines))
        problems = []
        if not self.nodes:
            problems.append("nodes: empty")
        if not self.generators:
            problems.append("generators: empty")
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            problems.append("nodes: duplicate ids")
        for kind, items in (("generators", self.generators), ("lines", self.lines)):
            ids = [x.id for x in items]
            if len(set(ids)) != len(ids):
                problems.append(f"{kind}: duplicate ids")
        for k, g in enumerate(self.generators):
            if g.node not in known:
                problems.append(f"generators[{k}].node: unknown node {g.node!r}")
            if not g.capacity >= 0:
                problems.append(f"generators[{k}].capacity: must be >= 0")
            if not np.isfinite(g.cost):
                problems.append(f"generators[{k}].cost: must be finite")
        for k, ln in enumerate(self.lines):
            for end in ("from_node", "to_node"):
                if getattr(ln, end) not in known:
                    problems.append(f"lines[{k}].{end}: unknown node {getattr(ln, end)!r}")
            if ln.from_node == ln.to_node:
                problems.append(f"lines[{k}]: self loop at {ln.from_node!r}")
            if not ln.capacity >= 0:
                problems.append(f"lines[{k}].capacity: must be >= 0")
        if problems:
            raise ConfigurationError("invalid network: " + "; ".join(problems))

    @property
    def n_vars(self) -> int:
        return len(self.generators) + len(self.lines)

    @property
    def n_rows(self) -> int:
        return len(self.generators) + len(self.lines) + len(self.nodes)

    def gen_row(self, gen_id: str) -> int:
        return self._gen_index[gen_id]

    def line_row(self, line_id: str) -> int:
        return len(self.generators) + self._line_index[line_id]

    def balance_row(self, node: str) -> int:
        return len(self.generators) + len(self.lines) + self.nodes.index(node)

    def gen_var(self, gen_id: str) -> int:
        return self._gen_index[gen_id]

    def line_var(self, line_id: str) -> int:
        return len(self.generators) + self._line_index[line_id]

    @cached_property
    def _gen_index(self) -> dict[str, int]:
        return {g.id: k for k, g in enumerate(self.generators)}

    @cached_property
    def _line_index(self) -> dict[str, int]:
        return {ln.id: k for k, ln in enumerate(self.lines)}

    def row_names(self) -> tuple[str, ...]:
        return tuple([f"gen_cap[{g.id}]" for g in self.generators]
                     + [f"flow_cap[{ln.id}]" for ln in self.lines]
                     + [f"balance[{n}]" for n in self.nodes])

    def col_names(self) -> tuple[str, ...]:
        return tuple([f"p[{g.id}]" for g in self.generators]
                     + [f"f[{ln.id}]" for ln in self.lines])


@dataclass(frozen=True)
class TimestepData:
    demand: Mapping[str, float] = field(default_factory=dict)
    capacity_factor: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for node, d in self.demand.items():
            if not d >= 0:
                raise ConfigurationError(f"demand[{node}] must be >= 0, got {d}")
        for gen, cf in self.capacity_factor.items():
            if not 0.0 <= cf <= 1.0:
                raise ConfigurationError(f"capacity_factor[{gen}] must lie in [0, 1], got {cf}")


def check_timestep(net: NetworkModel, data: TimestepData) -> None:
    nodes = set(net.nodes)
    gens = {g.id: g for g in net.generators}
    unknown = [n for n in data.demand if n not in nodes]
    unknown += [g for g in data.capacity_factor if g not in gens]
    if unknown:
        raise ConfigurationError(f"timestep references unknown ids: {sorted(unknown)}")
    for g in net.generators:
        cf = data.capacity_factor.get(g.id)
        if g.uses_cf_series and cf is None:
            raise ConfigurationError(f"missing capacity factor for generator {g.id!r}")
        if not g.uses_cf_series and cf is not None and cf != 1.0:
            raise ConfigurationError(f"generator {g.id!r} has a fixed capacity factor of 1, got {cf}")


def build_template(net: NetworkModel) -> LpStandardForm:
    """The timestep LP with a zero right-hand side; only ``b`` varies over time."""
    ng, nl, nn = len(net.generators), len(net.lines), len(net.nodes)
    A = np.zeros((ng + nl + nn, ng + nl))
    A[:ng, :ng] = np.eye(ng)
    A[ng:ng + nl, ng:] = np.eye(nl)
    node_pos = {n: k for k, n in enumerate(net.nodes)}
    for k, g in enumerate(net.generators):
        A[ng + nl + node_pos[g.node], k] = 1.0
    for k, ln in enumerate(net.lines):
        A[ng + nl + node_pos[ln.to_node], ng + k] += 1.0
        A[ng + nl + node_pos[ln.from_node], ng + k] -= 1.0
    cost = [g.cost for g in net.generators] + [ln.transport_cost for ln in net.lines]
    kinds = (LE,) * (ng + nl) + (EQ,) * nn
    return LpStandardForm(cost, A, np.zeros(ng + nl + nn), kinds,
                          net.row_names(), net.col_names())


def timestep_rhs(net: NetworkModel, data: TimestepData) -> np.ndarray:
    check_timestep(net, data)
    caps = [g.capacity * (data.capacity_factor.get(g.id, 1.0) if g.uses_cf_series else 1.0)
            for g in net.generators]
    flows = [ln.capacity for ln in net.lines]
    demand = [float(data.demand.get(n, 0.0)) for n in net.nodes]
    return np.array(caps + flows + demand, dtype=float)


def build_timestep_lp(net: NetworkModel, data: TimestepData) -> LpStandardForm:
    return build_template(net).with_rhs(timestep_rhs(net, data))


def dual_objective(net: NetworkModel, duals, data: TimestepData) -> float:
    """Dual objective of the transport LP.

    ``duals`` maps row index to value (a full-length array also works) using
    the sensitivity sign map: generator/line cap duals are ``<= 0`` and nodal
    balance duals are the locational marginal prices.
    """
    if not isinstance(duals, Mapping):
        duals = dict(enumerate(np.asarray(duals, dtype=float).tolist()))
    missing = [r for r in range(net.n_rows) if r not in duals]
    if missing:
        raise ContractViolation(f"missing dual values for rows {missing}")
    rhs = timestep_rhs(net, data)
    total = 0.0
    for k, g in enumerate(net.generators):
        total += duals[k] * rhs[k]
    for ln in net.lines:
        r = net.line_row(ln.id)
        total += duals[r] * ln.capacity
    for n in net.nodes:
        r = net.balance_row(n)
        total += duals[r] * rhs[r]
    return float(total)


def lmp(net: NetworkModel, dual: Sequence[float]) -> dict[str, float]:
    """Balance-row duals by node."""
    return {n: float(dual[net.balance_row(n)]) for n in net.nodes}
