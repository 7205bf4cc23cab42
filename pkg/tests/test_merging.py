import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from basismerge.merging import (
    ComEvaluator, Partition, audit_host, candidate_com, com_partition, host_basis, host_primal,
    host_ties, make_cluster, resolve_partition,
)
from basismerge.pipeline import analyse, pairwise_mergers, verify_partition
from basismerge.transport import Generator, NetworkModel, TimestepData

from oracles import set_partitions, toy_dispatch_ov

THREE_GENS = ((1.0, 5.0), (10.0, 100.0), (100.0, 1000.0))


def three_gen_network():
    return NetworkModel(("n1",), tuple(Generator(f"G{k}", "n1", c, p) for k, (c, p) in enumerate(THREE_GENS)))


def test_toy_pair_merge(toy_analysis):
    bs = toy_analysis.bases
    p = Partition.single([1, 2])
    ev = com_partition(p, bs)
    assert ev.ov_I == pytest.approx(117.0, abs=1e-12)
    assert ev.ov_K == pytest.approx(90.0, abs=1e-12)
    assert ev.com == pytest.approx(27.0, abs=1e-12)
    assert ev.hosts == {"{1,2}": 2}
    # merit-order oracle at the merged centroid 6.75 with weight 4
    assert 4 * toy_dispatch_ov(6.75) == 90.0
    assert resolve_partition(p, bs).objective == pytest.approx(90.0, abs=1e-12)


def test_toy_host_candidates(toy_analysis):
    bs = toy_analysis.bases
    c = make_cluster([1, 2], bs)
    assert candidate_com(c, 2, bs) == pytest.approx(27.0, abs=1e-12)
    # hosting in A prices all 6.75 * 4 units at 1
    assert candidate_com(c, 1, bs) == pytest.approx(90.0, abs=1e-12)
    assert host_basis(c, bs) == (2, pytest.approx(27.0))
    assert host_ties(c, bs) == [2]
    audit = audit_host(c, bs)
    assert audit.status == "match" and audit.solved_basis == 2
    np.testing.assert_allclose(host_primal(c, bs), [5.0, 1.75], atol=1e-12)


def test_identity_partition_costs_nothing(toy_analysis):
    ev = com_partition(Partition.identity([1, 2]), toy_analysis.bases)
    assert ev.com == 0.0
    assert ev.ov_K == ev.ov_I


def test_partition_canonical_form():
    p = Partition(((3, 1), (2,)))
    assert p.blocks == ((1, 3), (2,))
    assert p.label() == "{1,3},{2}"
    assert Partition.identity([2, 1]).merge((1,), (2,)) == Partition.single([1, 2])
    with pytest.raises(ValueError):
        Partition(((1, 2), (2,)))
    with pytest.raises(ValueError):
        Partition(((),))


def test_partition_must_cover_bases(toy_analysis):
    with pytest.raises(ValueError, match="cover"):
        com_partition(Partition(((1,),)), toy_analysis.bases)


def test_evaluator_matches_literal_formula(short_case):
    _, _, a = short_case
    bs = a.bases
    ev = ComEvaluator(bs)
    ids = bs.ids
    for i in ids:
        for j in ids:
            if i < j:
                p = Partition.identity(ids).merge((i,), (j,))
                assert ev.partition_com(p.blocks) == pytest.approx(com_partition(p, bs).com,
                                                                   rel=1e-12, abs=1e-9)
    assert ev.partition_com(Partition.single(ids).blocks) == pytest.approx(
        com_partition(Partition.single(ids), bs).com, rel=1e-12)


def test_pairwise_merges_match_resolve(short_case):
    _, _, a = short_case
    for row in pairwise_mergers(a.bases):
        assert row["relative_residual"] <= 1e-8
        for audit in row["host_audit"].values():
            assert audit["status"] != "violation"


def test_com_is_nonnegative(short_case):
    _, _, a = short_case
    ev = ComEvaluator(a.bases)
    for blocks in set_partitions(a.bases.ids[:6]):
        blocks = [tuple(b) for b in blocks] + [(i,) for i in a.bases.ids[6:]]
        assert ev.partition_com(blocks) >= -1e-9 * abs(ev.ov_I)


@st.composite
def three_regime_demands(draw):
    regions = [(0.1, 4.9), (5.1, 104.9), (105.1, 1100.0)]
    out = []
    for lo, hi in regions:
        out += draw(st.lists(st.floats(lo, hi), min_size=1, max_size=4))
    return draw(st.permutations(out))


@settings(max_examples=40, deadline=None)
@given(three_regime_demands())
def test_com_matches_merit_order_oracle(demands):
    a = analyse(three_gen_network(), [TimestepData({"n1": d}) for d in demands])
    bs = a.bases
    assert len(bs) == 3
    ov_i = sum(toy_dispatch_ov(d, THREE_GENS) for d in demands)
    for blocks in set_partitions(bs.ids):
        p = Partition(tuple(tuple(b) for b in blocks))
        ov_k = 0.0
        for b in p.blocks:
            c = make_cluster(b, bs)
            ov_k += c.weight * toy_dispatch_ov(c.centroid[-1], THREE_GENS)
        ev = com_partition(p, bs)
        assert ev.com == pytest.approx(ov_i - ov_k, rel=1e-9, abs=1e-7)
        assert verify_partition(p, bs)["relative_residual"] <= 1e-9
