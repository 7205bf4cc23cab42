"""Synthetic three-node case study.

Demand sits at node ``n1`` together with non-supplied power (NSP); a
CF-driven renewable sits at ``n2`` and a thermal unit at ``n3``. Each corridor
is represented by two directed lines:

* line 1: ``n3 <-> n1`` (thermal export path)
* line 2: ``n2 <-> n3``
* line 3: ``n2 <-> n1`` (direct renewable path)

Capacities are tuned so that every corridor congests in some hours and the
renewable, thermal and NSP marginal regimes all occur.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .transport import Generator, Line, NetworkModel, TimestepData

HOURS_PER_WEEK = 168


@dataclass(frozen=True)
class CaseStudyConfig:
    weeks: int = 52
    seed: int = 7
    template: str = "three-node"
    demand_base: float = 3.5
    demand_amplitude: float = 4.5
    demand_noise: float = 0.08
    seasonal_amplitude: float = 0.15
    weekend_drop: float = 0.12
    wind_persistence: float = 0.97
    wind_scale: float = 1.3
    wind_offset: float = -0.3
    wind_seasonal: float = 0.3

    def __post_init__(self):
        if self.weeks < 1:
            raise ValueError("weeks must be >= 1")
        if self.template not in TEMPLATES:
            raise ValueError(f"unknown network template {self.template!r}; known: {sorted(TEMPLATES)}")
        if not 0.0 <= self.wind_persistence < 1.0:
            raise ValueError("wind_persistence must lie in [0, 1)")

    @property
    def horizon(self) -> int:
        return self.weeks * HOURS_PER_WEEK


def three_node_network(transport_cost: float = 0.1) -> NetworkModel:
    gens = (
        Generator("Re", "n2", cost=3.0, capacity=7.0, uses_cf_series=True),
        Generator("Th", "n3", cost=24.0, capacity=5.0),
        Generator("NSP", "n1", cost=5000.0, capacity=20.0),
    )
    corridors = (("1", "n3", "n1", 5.3), ("2", "n2", "n3", 2.0), ("3", "n2", "n1", 3.0))
    lines = []
    for name, a, b, cap in corridors:
        lines.append(Line(f"L{name}+", a, b, cap, transport_cost))
        lines.append(Line(f"L{name}-", b, a, cap, transport_cost))
    return NetworkModel(("n1", "n2", "n3"), gens, tuple(lines))


TEMPLATES = {"three-node": three_node_network}


def demand_profile(cfg: CaseStudyConfig, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(cfg.horizon)
    hour, day = t % 24, t // 24
    seasonal = cfg.seasonal_amplitude * np.cos(2 * np.pi * day / 364)
    daily = 0.5 * (1 - np.cos(2 * np.pi * (hour - 4) / 24))
    weekend = np.where(day % 7 >= 5, -cfg.weekend_drop, 0.0)
    # day-correlated noise: 24 h moving sum of white noise, unit variance
    raw = rng.normal(0.0, 1.0, cfg.horizon + 23)
    noise = np.convolve(raw, np.ones(24) / np.sqrt(24), "valid")
    demand = (cfg.demand_base * (1 + seasonal + weekend + cfg.demand_noise * noise)
              + cfg.demand_amplitude * daily)
    return np.clip(demand, 0.05, None)


def wind_profile(cfg: CaseStudyConfig, rng: np.random.Generator) -> np.ndarray:
    n = cfg.horizon
    phi = cfg.wind_persistence
    shocks = rng.normal(0.0, 1.0, n)
    z = np.empty(n)
    z[0] = shocks[0]
    scale = np.sqrt(1 - phi * phi)
    for k in range(1, n):
        z[k] = phi * z[k - 1] + scale * shocks[k]
    day = np.arange(n) // 24
    logit = cfg.wind_scale * z + cfg.wind_offset + cfg.wind_seasonal * np.cos(2 * np.pi * day / 364)
    return 1.0 / (1.0 + np.exp(-logit))


def generate_case_study(cfg: CaseStudyConfig = CaseStudyConfig()) -> tuple[NetworkModel, list[TimestepData]]:
    """Network plus hourly demand at ``n1`` and renewable capacity factors."""
    net = TEMPLATES[cfg.template]()
    rng = np.random.default_rng(cfg.seed)
    demand = demand_profile(cfg, rng)
    cf = wind_profile(cfg, rng)
    cf_gens = [g.id for g in net.generators if g.uses_cf_series]
    data = [TimestepData({n: float(d) if n == "n1" else 0.0 for n in net.nodes},
                         {g: float(c) for g in cf_gens})
            for d, c in zip(demand, cf)]
    return net, data
