import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymcp.coupling import (
    CODE,
    EDGE_FAMILIES,
    PAIRS,
    TABLES,
    VERTEX_FAMILIES,
    Coupling,
    CouplingKind,
    coupled_run,
    coupled_stream,
    coupling_break_demo,
    marginal_stream,
    minimal_break,
    pair_transition,
    regenerate_tables,
    verify_table_closure,
)
from asymcp.dynamics import Params, evolve_from_stream, initial_configuration
from asymcp.errors import DomainError
from asymcp.lattice import Configuration, LatticeGeometry

B1, B2, GA = CouplingKind.BETA1, CouplingKind.BETA2, CouplingKind.GAMMA


def _rows(text):
    return tuple(tuple(line.split()) for line in text.strip().splitlines())


# The beta2 table exactly as printed; its "2" and "2'" columns disagree with
# the stated arrow semantics in five cells.
PRINTED_BETA2 = {
    "arrow": TABLES[B2]["arrow"],
    "arrow2": _rows("""
        00 01 02 11 12 22
        01 01 02 11 12 22
        01 01 02 11 12 22
        01 01 02 11 12 22
        01 01 02 11 12 22
        11 11 12 11 12 22
    """),
    "arrow2p": _rows("""
        00 01 02 11 12 22
        00 01 02 11 12 22
        01 01 02 11 12 22
        00 01 02 11 12 22
        01 01 02 11 12 22
        11 11 12 11 12 22
    """),
    "dot": ("00", "02", "02", "22", "22", "22"),
    "cross": ("00",) * 6,
}


def test_pair_transition_examples():
    assert pair_transition("beta1", "arrow", "11", "00") == "11"
    assert pair_transition(B1, "arrow1p", "22", "01") == "11"
    assert pair_transition(GA, "white_dot", "11") == "12"
    for kind in CouplingKind:
        assert pair_transition(kind, "cross", "12") == "00"
        assert all(pair_transition(kind, "cross", p, "22") == "00" for p in PAIRS)


def test_pair_transition_errors():
    with pytest.raises(DomainError):
        pair_transition(B1, "white_dot", "11")
    with pytest.raises(DomainError):
        pair_transition(B1, "arrow", "10", "00")
    with pytest.raises(DomainError):
        pair_transition(B1, "arrow", "11")
    with pytest.raises(DomainError):
        pair_transition("delta", "arrow", "11", "00")


def test_vertex_events_ignore_head():
    for kind in CouplingKind:
        for f in VERTEX_FAMILIES[kind]:
            for x, y in itertools.product(PAIRS, PAIRS):
                assert pair_transition(kind, f, x, y) == pair_transition(kind, f, x)


@pytest.mark.parametrize("kind, edge, vertex", [(B1, 108, 12), (B2, 108, 12), (GA, 72, 18)])
def test_closure_exhaustive(kind, edge, vertex):
    r = verify_table_closure(kind)
    assert r.ok, r.violations
    assert (r.edge_cases, r.vertex_cases, r.cases) == (edge, vertex, edge + vertex)


def test_tables_match_rule_regeneration():
    for kind in CouplingKind:
        assert regenerate_tables(kind) == TABLES[kind]


def test_every_cell_stays_in_s():
    for kind in CouplingKind:
        for f, entries in TABLES[kind].items():
            flat = entries if f in VERTEX_FAMILIES[kind] else [c for row in entries for c in row]
            assert set(flat) <= set(PAIRS)


def test_printed_beta2_table_audit():
    r = verify_table_closure(B2, tables=PRINTED_BETA2)
    outside = [v for v in r.violations if v[4] == "outside S"]
    marginal = [v for v in r.violations if v[4] != "outside S"]
    assert outside == []
    assert sorted((v[0], v[1], v[2]) for v in marginal) == sorted([
        ("arrow2", "01", "00"), ("arrow2", "11", "00"),
        ("arrow2p", "22", "00"), ("arrow2p", "22", "01"), ("arrow2p", "22", "02"),
    ])


def test_corrupted_table_is_reported():
    bad = {f: v for f, v in TABLES[GA].items()}
    bad["white_dot"] = ("00", "02", "02", "12", "10", "22")
    r = verify_table_closure(GA, tables=bad)
    assert ("white_dot", "12", None, "10", "outside S") in r.violations


def test_coupling_ordering_validation():
    Coupling(B1, Params(1.0, 3.0, 1.0), 2.0)
    Coupling(B1, Params(1.0, 3.0, 1.0), 1.0)
    with pytest.raises(DomainError):
        Coupling(B1, Params(1.0, 3.0, 1.0), 4.0)
    with pytest.raises(DomainError):
        Coupling(B2, Params(1.0, 3.0, 1.0), 2.0)
    with pytest.raises(DomainError):
        Coupling(GA, Params(3.0, 1.0, 1.0), 2.0)
    with pytest.raises(DomainError):
        Coupling(GA, Params(1.0, 3.0, 1.0), 0.5)


def test_family_rates_sum_to_marginals():
    c = Coupling(B1, Params(1.0, 5.0, 0.5), 3.0)
    edge, site = c.family_rates(1)
    assert edge["arrow"] * 2 == 1.0
    assert (edge["arrow"] + edge["arrow1p"]) * 2 == 3.0
    assert sum(edge.values()) * 2 == 5.0
    assert site == {"dot": 0.5, "cross": 1.0}


def _random_start(g, seed):
    rng = np.random.default_rng(seed)
    return Configuration.bernoulli(g, 0.3, 0.3, rng)


@pytest.mark.parametrize("kind, params, prime", [
    (B1, Params(1.0, 4.0, 1.0), 2.5),
    (B2, Params(1.0, 2.0, 0.7), 4.0),
    (GA, Params(1.5, 3.0, 0.3), 2.0),
])
def test_marginals_bit_equal_single_replays(kind, params, prime):
    c = Coupling(kind, params, prime)
    g = LatticeGeometry(1, 30)
    xi0 = _random_start(g, 1)
    es = coupled_stream(c, g, 15.0, seed=2)
    tr = coupled_run(c, xi0, 15.0, stream=es, record_changes=True, debug=True)
    for which, p in ((0, c.params), (1, c.high)):
        ms = marginal_stream(c, es, which)
        assert ms.rates["arrow1"] * 2 == pytest.approx(p.beta1)
        assert ms.rates["arrow2"] * 2 == pytest.approx(p.beta2)
        assert ms.rates["dot"] == pytest.approx(p.gamma)
        single = evolve_from_stream(xi0, ms, record_changes=True)
        assert single.changes == tr.changes[which]
        final = tr.low if which == 0 else tr.high
        assert single.final == final


@pytest.mark.parametrize("kind", list(CouplingKind))
def test_equal_parameters_give_identical_marginals(kind):
    p = Params(1.0, 3.0, 0.8)
    prime = {B1: p.beta1, B2: p.beta2, GA: p.gamma}[kind]
    c = Coupling(kind, p, prime)
    g = LatticeGeometry(1, 25)
    for seed in range(5):
        tr = coupled_run(c, _random_start(g, seed), 10.0, seed=seed)
        assert tr.low == tr.high
        assert np.array_equal(tr.infected_low, tr.infected_high)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(list(CouplingKind)), st.floats(0, 3), st.floats(0, 3), st.floats(0, 3),
       st.floats(0, 3), st.integers(0, 10**6))
def test_domination_property(kind, a, b, g_, extra, seed):
    b1, b2 = sorted((a, b))
    p = Params(b1, b2, g_)
    if kind is B1:
        prime = b1 + (b2 - b1) * extra / 3
    elif kind is B2:
        prime = b2 + extra
    else:
        prime = g_ + extra
    c = Coupling(kind, p, prime)
    g = LatticeGeometry(1, 20)
    tr = coupled_run(c, _random_start(g, seed), 5.0, seed=seed, sample_dt=0.5, debug=True)
    assert tr.dominated.all()
    assert np.all(tr.infected_low <= tr.infected_high)
    low_inf = tr.low.states > 0
    high_inf = tr.high.states > 0
    assert not np.any(low_inf & ~high_inf)


def test_gamma_coupling_domination_example():
    c = Coupling(GA, Params(1.0, 3.0, 0.5), 2.0)
    g = LatticeGeometry(1, 50)
    tr = coupled_run(c, initial_configuration("all-1", g), 20.0, seed=3, debug=True)
    assert tr.dominated.all()


def test_coupled_csv():
    c = Coupling(B1, Params(1.0, 3.0, 1.0), 2.0)
    g = LatticeGeometry(1, 10)
    tr = coupled_run(c, Configuration.filled(g, 1), 3.0, seed=0)
    lines = tr.to_csv().splitlines()
    assert lines[0] == "t,u_inf_low,u_inf_high,dominated"
    assert len(lines) == 5
    assert all(line.endswith(",1") for line in lines[1:])


def test_minimal_break():
    r = minimal_break()
    assert r.found and r.pair == "10"
    assert [h[0] for h in r.history] == ["start", "white_dot", "arrow1"]
    assert r.pair not in CODE


def test_break_demo_leaves_s():
    r = coupling_break_demo(3.0, 1.0, 0.5, 2.0, LatticeGeometry(1, 20), 10.0, seed=1)
    assert r.found
    assert r.pair not in CODE
    assert r.pair == "10"


def test_break_demo_validation():
    with pytest.raises(DomainError):
        coupling_break_demo(1.0, 3.0, 0.5, 2.0, LatticeGeometry(1, 10), 1.0)
    with pytest.raises(DomainError):
        coupling_break_demo(3.0, 1.0, 2.0, 0.5, LatticeGeometry(1, 10), 1.0)


def test_edge_and_vertex_families_partition():
    for kind in CouplingKind:
        assert set(EDGE_FAMILIES[kind]) | set(VERTEX_FAMILIES[kind]) == set(TABLES[kind])
        assert not set(EDGE_FAMILIES[kind]) & set(VERTEX_FAMILIES[kind])
