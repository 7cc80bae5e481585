import random

import pytest
from hypothesis import given, strategies as st

from bouquet.address import ExternalAddress, LinearTail, SIGNS, linear_address, zero_address
from bouquet.strata import (
    BranchLeavesTree,
    NotInX,
    StratumIndex,
    branch_probe,
    certify_stratification,
    exhibit_successor,
    in_tree,
    parse_stratum,
    random_member,
    random_node_for,
    stratum_membership,
    stratum_nonempty,
)

x_addresses = st.builds(
    ExternalAddress,
    st.lists(st.integers(-12, 12), max_size=6).map(tuple),
    st.builds(LinearTail, st.integers(1, 3), st.integers(-4, 6), st.sampled_from(SIGNS)),
)


def test_membership():
    s = linear_address([0, 3])
    assert stratum_membership(s, StratumIndex())
    assert stratum_membership(s, StratumIndex(((1, 0),)))
    assert not stratum_membership(s, StratumIndex(((0, 0),)))
    assert not stratum_membership(s, StratumIndex(((1, 5),)))
    assert not stratum_membership(zero_address(), StratumIndex())
    with pytest.raises(NotInX):
        exhibit_successor(zero_address(), StratumIndex())
    with pytest.raises(ValueError):
        stratum_membership(s, StratumIndex(((0, 0), (0, 3))))


def test_tree_and_nonempty():
    assert in_tree(StratumIndex())
    assert in_tree(parse_stratum("1:0"))
    assert not stratum_nonempty(parse_stratum("0:0"))
    assert not in_tree(parse_stratum("1:0,1:0"))


@given(x_addresses, st.integers(0, 4))
def test_successor_contract(s, dom):
    rng = random.Random(dom)
    alpha = random_node_for(s, dom, rng)
    beta = exhibit_successor(s, alpha)
    assert beta.truncate(dom) == alpha
    assert beta.N(dom) >= dom
    assert stratum_membership(s, beta) and in_tree(beta)


@given(x_addresses, st.integers(1, 4), st.integers(0, 10 ** 6))
def test_tree_closed_under_truncation(s, dom, seed):
    alpha = random_node_for(s, dom, random.Random(seed))
    assert all(in_tree(alpha.truncate(k)) for k in range(dom + 1))
    m = random_member(alpha, random.Random(seed))
    # nesting: members of a node belong to every truncation
    assert all(stratum_membership(m, alpha.truncate(k)) for k in range(dom + 1))


def test_branch_probe():
    pairs = [(k + 1, k + 2) for k in range(6)]
    probe = branch_probe(pairs, 6)
    assert probe.diameters == tuple(2.0 ** -k for k in range(7))
    assert probe.constraints_hold
    with pytest.raises(BranchLeavesTree) as err:
        branch_probe([(0, 0)], 1)
    assert err.value.level == 1


def test_certificate_is_clean_and_reproducible():
    a = certify_stratification(3, seed=7, samples=60)
    b = certify_stratification(3, seed=7, samples=60)
    assert a.passed and a.to_json() == b.to_json()
    assert all(a.checks[c] > 0 for c in ("S1", "S2", "S3", "S4", "C2a", "C2b", "C2c"))


def test_corrupted_successor_is_caught():
    def bad(address, alpha):
        return alpha.extend(alpha.dom, address[alpha.dom])

    cert = certify_stratification(3, seed=1, samples=80, successor=bad)
    assert not cert.passed
    assert {v["condition"] for v in cert.violations} & {"S3", "S4"}
