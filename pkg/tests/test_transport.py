import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from basismerge.casestudy import three_node_network
from basismerge.lp import solve_lp
from basismerge.transport import (
    ConfigurationError, ContractViolation, Generator, Line, NetworkModel, TimestepData,
    build_template, build_timestep_lp, dual_objective, lmp, timestep_rhs,
)

from conftest import random_data, random_network, toy_network
from oracles import toy_dispatch_ov, vertex_oracle


def test_template_layout():
    net = three_node_network()
    lp = build_template(net)
    assert (lp.n_rows, lp.n_cols) == (3 + 6 + 3, 3 + 6)
    assert lp.row_kind == ("le",) * 9 + ("eq",) * 3
    # every line leaves one node and enters another
    flows = lp.matrix[9:, 3:]
    assert np.all(flows.sum(axis=0) == 0)
    assert np.all(np.abs(flows).sum(axis=0) == 2)
    assert lp.col_names[0] == "p[Re]"


@pytest.mark.parametrize("demand", [3.0, 4.0, 8.0, 12.0])
def test_toy_dispatch_matches_merit_order(demand):
    net = toy_network()
    sol = solve_lp(build_timestep_lp(net, TimestepData({"n1": demand})))
    assert sol.objective == pytest.approx(toy_dispatch_ov(demand), abs=1e-12)
    price = 1.0 if demand < 5 else 10.0
    assert lmp(net, sol.dual)["n1"] == pytest.approx(price)


def test_lmp_matches_finite_difference():
    net = three_node_network()
    data = TimestepData({"n1": 6.0, "n2": 0.0, "n3": 0.0}, {"Re": 0.4})
    base = solve_lp(build_timestep_lp(net, data))
    h = 1e-5
    bumped = solve_lp(build_timestep_lp(net, TimestepData({"n1": 6.0 + h, "n2": 0.0, "n3": 0.0}, {"Re": 0.4})))
    assert (bumped.objective - base.objective) / h == pytest.approx(lmp(net, base.dual)["n1"], abs=1e-5)


def test_nsp_sets_price_when_short():
    net = three_node_network()
    sol = solve_lp(build_timestep_lp(net, TimestepData({"n1": 14.0}, {"Re": 0.1})))
    assert lmp(net, sol.dual)["n1"] == pytest.approx(5000.0)


def test_zero_demand_costs_nothing():
    net = three_node_network()
    sol = solve_lp(build_timestep_lp(net, TimestepData({}, {"Re": 0.5})))
    assert sol.objective == 0.0


def test_dual_objective_accepts_mapping_and_checks_rows():
    net = toy_network()
    data = TimestepData({"n1": 8.0})
    sol = solve_lp(build_timestep_lp(net, data))
    assert dual_objective(net, sol.dual, data) == pytest.approx(35.0)
    as_map = {k: float(v) for k, v in enumerate(sol.dual)}
    assert dual_objective(net, as_map, data) == pytest.approx(35.0)
    del as_map[2]
    with pytest.raises(ContractViolation, match=r"\[2\]"):
        dual_objective(net, as_map, data)


def test_network_validation_lists_every_problem():
    gens = (Generator("G", "nx", 1.0, 1.0), Generator("H", "n1", 1.0, -2.0))
    lines = (Line("L", "n1", "ny", 1.0, 0.1),)
    with pytest.raises(ConfigurationError) as exc:
        NetworkModel(("n1",), gens, lines)
    msg = str(exc.value)
    assert "'nx'" in msg and "'ny'" in msg and "capacity" in msg


def test_empty_generators_rejected():
    with pytest.raises(ConfigurationError, match="generators"):
        NetworkModel(("n1",), ())


def test_timestep_validation():
    net = three_node_network()
    with pytest.raises(ConfigurationError, match="Re"):
        timestep_rhs(net, TimestepData({"n1": 1.0}))
    with pytest.raises(ConfigurationError):
        TimestepData({"n1": -1.0})
    with pytest.raises(ConfigurationError):
        TimestepData({"n1": 1.0}, {"Re": 1.5})
    with pytest.raises(ConfigurationError, match="unknown"):
        timestep_rhs(net, TimestepData({"n9": 1.0}, {"Re": 0.5}))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 3))
def test_random_networks_match_reference_solvers(seed, n_nodes):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n_nodes)
    (data,) = random_data(rng, net, 1)
    lp = build_timestep_lp(net, data)
    sol = solve_lp(lp)
    if lp.n_cols <= 8:
        ref, _ = vertex_oracle(lp.cost, lp.matrix, lp.rhs, lp.row_kind)
    else:
        eq = np.array([k == "eq" for k in lp.row_kind])
        ref = linprog(lp.cost, A_ub=lp.matrix[~eq], b_ub=lp.rhs[~eq],
                      A_eq=lp.matrix[eq], b_eq=lp.rhs[eq], method="highs").fun
    assert sol.objective == pytest.approx(ref, rel=1e-9, abs=1e-9)
    assert dual_objective(net, sol.dual, data) == pytest.approx(sol.objective, rel=1e-9, abs=1e-9)
