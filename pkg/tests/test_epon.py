import pytest
from hypothesis import given, settings, strategies as st

from conftest import toy_profile
from qoesim.epon import (OnuState, WiredClient, backhaul_demand, eara_allocate, epon_allocate,
                         hpf_allocate, intra_onu_assign, onu_min_bw)
from qoesim.errors import ConfigError, InfeasibleError
from qoesim.qoe import CLIENT_TYPES, SKYPE, build_profile_table
from qoesim.wireless import Choice, ChoiceTable, make_allocation

TABLES = {"skype": build_profile_table(SKYPE)}
BY_LABEL = {p.label: p for p in TABLES["skype"]}


def client(cid, level, app="skype"):
    return WiredClient(cid, CLIENT_TYPES[level], app)


def test_backhaul_demand():
    picks = [Choice(6, 0.5, 4.62, 0.0, BY_LABEL["640x480@5"]),
             Choice(2, 0.0, 4.15, 0.07, BY_LABEL["320x240@5"])]
    tables = [ChoiceTable(i, CLIENT_TYPES[1], 933, (c,)) for i, c in enumerate(picks)]
    cell = make_allocation(tables, picks, 100)
    assert backhaul_demand([cell]) == pytest.approx(6.40)
    assert backhaul_demand([cell], overhead=1.1) == pytest.approx(7.04)


def test_onu_min_bw():
    assert onu_min_bw(OnuState(0, [client(0, 1)]), TABLES) == pytest.approx(0.32)
    mixed = OnuState(0, [client(0, 1), client(1, 2), client(2, 3)])
    assert onu_min_bw(mixed, TABLES) == pytest.approx(2.24)


def test_intra_onu_single_client():
    out = intra_onu_assign(OnuState(0, [client(0, 1)]), 1.0, TABLES)
    assert out.profiles[0].label == "160x120@15"


def test_intra_onu_rejects_short_grant():
    with pytest.raises(ConfigError):
        intra_onu_assign(OnuState(0, [client(0, 3)]), 1.0, TABLES)


def test_eara_splits_in_proportion_to_drop():
    tables = {
        "a": [toy_profile("a", 1.0, 3.0, 0.2), toy_profile("a", 2.0, 3.5, 0.1), toy_profile("a", 3.0, 4.0, 0.05)],
        "b": [toy_profile("b", 1.0, 3.2, 0.1), toy_profile("b", 2.0, 3.6, 0.08)],
    }
    onus = [OnuState("A", [client(0, 1, "a")]), OnuState("B", [client(1, 1, "b")])]
    alloc = eara_allocate(onus, 5.0, 0.0, tables)
    assert alloc.split_call_drop == {"A": pytest.approx(0.2), "B": pytest.approx(0.1)}
    assert alloc.grants == {"A": pytest.approx(3.0), "B": pytest.approx(2.0)}
    assert alloc.onus[0].profiles[0].mos == 4.0
    assert alloc.onus[1].profiles[1].mos == 3.6


def test_eara_equal_split_when_no_drop():
    tables = {"z": [toy_profile("z", 1.0, 4.6, 0.0), toy_profile("z", 5.0, 4.7, 0.0)]}
    onus = [OnuState(k, [client(k, 3, "z")]) for k in range(2)]
    alloc = eara_allocate(onus, 10.0, 2.0, tables)
    assert alloc.grants == {0: pytest.approx(4.0), 1: pytest.approx(4.0)}


def test_hpf_serves_highest_type_first():
    onu = OnuState(0, [client("lo", 1), client("hi", 3)])
    alloc = hpf_allocate([onu], 2.6, 0.0, TABLES)
    assert alloc.upgrade_trace[0] == ("hi", 3)
    assert alloc.onus[0].profiles["hi"].label == "160x120@28"


def test_hpf_no_excess_keeps_minimums():
    onu = OnuState(0, [client(0, 1), client(1, 3)])
    alloc = hpf_allocate([onu], 1.6, 0.0, TABLES)
    assert alloc.upgrade_trace == []
    assert [p.label for p in alloc.onus[0].profiles.values()] == ["160x120@5", "320x240@5"]


@pytest.mark.parametrize("policy", ["eara", "hpf"])
def test_shortfall_reported(policy):
    onus = [OnuState(0, [client(0, 3)])]
    with pytest.raises(InfeasibleError) as e:
        epon_allocate(policy, onus, 10.0, 9.5, TABLES)
    assert e.value.shortfall == pytest.approx(0.78)


def test_unknown_policy():
    with pytest.raises(ConfigError):
        epon_allocate("fifo", [], 1.0, 0.0, TABLES)


onus_st = st.lists(st.lists(st.sampled_from([1, 2, 3]), min_size=1, max_size=6), min_size=1, max_size=4)


def build_onus(levels):
    n = 0
    onus = []
    for k, lv in enumerate(levels):
        clients = []
        for level in lv:
            clients.append(client(n, level))
            n += 1
        onus.append(OnuState(k, clients))
    return onus


@settings(max_examples=200, deadline=None)
@given(onus_st, st.floats(0, 200), st.floats(0, 50), st.sampled_from(["eara", "hpf"]))
def test_grants_conserve_capacity(levels, extra, backhaul, policy):
    onus = build_onus(levels)
    mins = {o.id: onu_min_bw(o, TABLES) for o in onus}
    total = backhaul + sum(mins.values()) + extra
    alloc = epon_allocate(policy, onus, total, backhaul, TABLES)
    assert alloc.total_granted + backhaul <= total + 1e-9
    assert alloc.budget.excess == pytest.approx(total - backhaul - sum(mins.values()))
    for out in alloc.onus:
        assert out.granted_bw >= mins[out.onu_id] - 1e-9
        used = sum(p.send_rate for p in out.profiles.values())
        assert used <= out.granted_bw + 1e-9
    for _, c, p in alloc.client_outcomes(onus):
        assert p.mos >= c.ctype.min_mos


@settings(max_examples=100, deadline=None)
@given(onus_st, st.floats(0, 100), st.floats(0, 100))
def test_eara_grants_monotone_in_capacity(levels, x1, x2):
    onus = build_onus(levels)
    base = sum(onu_min_bw(o, TABLES) for o in onus)
    lo, hi = sorted((x1, x2))
    a = eara_allocate(onus, base + lo, 0.0, TABLES).grants
    b = eara_allocate(onus, base + hi, 0.0, TABLES).grants
    assert all(b[k] >= a[k] - 1e-9 for k in a)
