import re
import time

import numpy as np
import pytest

from basismerge import CaseStudyConfig, Generator, Line, NetworkModel, TimestepData, analyse, generate_case_study

TOY_DEMAND = (3.0, 4.0, 8.0, 12.0)


def toy_network() -> NetworkModel:
    return NetworkModel(("n1",), (Generator("G1", "n1", 1.0, 5.0), Generator("G2", "n1", 10.0, 100.0)))


def toy_data(demand=TOY_DEMAND):
    return [TimestepData({"n1": d}) for d in demand]


@pytest.fixture
def toy_net():
    return toy_network()


@pytest.fixture
def toy_analysis():
    return analyse(toy_network(), toy_data())


@pytest.fixture(scope="session")
def timed_case_analysis():
    """Default case study generated and analysed from scratch, with wall time."""
    start = time.perf_counter()
    net, data = generate_case_study(CaseStudyConfig())
    a = analyse(net, data)
    return a, time.perf_counter() - start


@pytest.fixture(scope="session")
def case_analysis(timed_case_analysis):
    return timed_case_analysis[0]


@pytest.fixture(scope="session")
def short_case():
    """Four weeks of the case study, enough for several bases."""
    net, data = generate_case_study(CaseStudyConfig(weeks=4))
    return net, data, analyse(net, data)


def random_network(rng: np.random.Generator, n_nodes: int) -> NetworkModel:
    nodes = tuple(f"n{k + 1}" for k in range(n_nodes))
    gens = [Generator(f"G{k + 1}", nodes[k], float(rng.uniform(1, 50)), float(rng.uniform(1, 6)),
                      uses_cf_series=bool(k % 2 == 0)) for k in range(n_nodes)]
    gens += [Generator(f"NSP{k + 1}", n, 1000.0, 50.0) for k, n in enumerate(nodes)]
    lines = []
    for a in range(n_nodes):
        for b in range(a + 1, n_nodes):
            cap = float(rng.uniform(0.5, 3))
            cost = float(rng.uniform(0.05, 0.5))
            lines.append(Line(f"L{a}{b}+", nodes[a], nodes[b], cap, cost))
            lines.append(Line(f"L{a}{b}-", nodes[b], nodes[a], cap, cost))
    return NetworkModel(nodes, tuple(gens), tuple(lines))


def random_data(rng: np.random.Generator, net: NetworkModel, T: int):
    cf_gens = [g.id for g in net.generators if g.uses_cf_series]
    return [TimestepData({n: float(rng.uniform(0, 8)) for n in net.nodes},
                         {g: float(rng.uniform(0, 1)) for g in cf_gens}) for _ in range(T)]



_CRITERIA: dict[int, list[tuple[str, bool]]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)[a-z]?_(\w+)", report.nodeid)
    if m and (report.when == "call" or report.failed):
        _CRITERIA.setdefault(int(m.group(1)), []).append((m.group(2), report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        parts = _CRITERIA[k]
        status = "PASS" if all(ok for _, ok in parts) else "FAIL"
        names = ", ".join(name.replace("_", " ") + ("" if ok else " [failed]") for name, ok in parts)
        terminalreporter.write_line(f"criterion {k}: {status}  ({names})")
