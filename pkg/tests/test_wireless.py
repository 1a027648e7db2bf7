import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import channel
from qoesim.errors import InfeasibleError, InfeasibleSlaError, UnservableUeError
from qoesim.qoe import CLIENT_TYPES, SKYPE, build_profile_table
from qoesim.wireless import (ChoiceTable, UeState, admit, build_choice_table, mrr_allocate,
                             prb_weight, wf_allocate, wf_order)

SKYPE_TABLE = build_profile_table(SKYPE)


def test_weight_at_top_cqi():
    # 1.28 Mbps over 933 bits/PRB at 1000 TTI/s -> ceil(1.372)
    assert prb_weight(1.28, 933) == 2


def test_weight_exact_multiple_not_rounded_up():
    assert prb_weight(0.933 * 3, 933) == 3


def test_choice_table_is_pruned_and_ascending():
    ue = UeState(0, CLIENT_TYPES[1], channel())
    t = build_choice_table(ue, SKYPE_TABLE)
    ws = [c.weight for c in t.choices]
    ms = [c.mos for c in t.choices]
    assert ws == sorted(set(ws))
    assert all(b > a for a, b in zip(ms, ms[1:]))
    assert t.baseline.raw_profit == 0.0
    # @5 and @10 both need one PRB at 933 bits, so @5 is dominated
    assert t.baseline.profile.label == "160x120@10"


def test_choice_table_respects_floor():
    ue = UeState(0, CLIENT_TYPES[3], channel())
    t = build_choice_table(ue, SKYPE_TABLE)
    assert all(c.mos >= 4.1 for c in t.choices)


def test_unservable_ue():
    with pytest.raises(UnservableUeError):
        build_choice_table(UeState(0, CLIENT_TYPES[1], channel(0, 0)), SKYPE_TABLE)


def test_unreachable_floor():
    from qoesim.qoe import ClientType
    with pytest.raises(InfeasibleSlaError):
        build_choice_table(UeState(0, ClientType(4, 4.9), channel()), SKYPE_TABLE)


def test_admission_blocks_lowest_type_heaviest_first():
    a = ChoiceTable.from_pairs([(5, 0)], ue_id=0, level=1)
    b = ChoiceTable.from_pairs([(3, 0)], ue_id=1, level=1)
    c = ChoiceTable.from_pairs([(4, 0)], ue_id=2, level=3)
    admitted, blocked = admit([a, b, c], 8)
    assert [t.ue_id for t in admitted] == [1, 2]
    assert [t.ue_id for t in blocked] == [0]


def test_admission_noop_when_fits():
    ts = [ChoiceTable.from_pairs([(2, 0)], ue_id=i) for i in range(3)]
    assert admit(ts, 6) == (ts, [])


def test_wf_prefers_better_channel():
    good = ChoiceTable.from_pairs([(1, 0), (3, 1.0)], ue_id=7, bits_per_prb=933)
    poor = ChoiceTable.from_pairs([(1, 0), (3, 1.0)], ue_id=2, bits_per_prb=26)
    assert wf_order([poor, good]) == [1, 0]
    alloc = wf_allocate([poor, good], 4)
    assert alloc.prbs == {2: 1, 7: 3}
    assert alloc.incremental_profit == pytest.approx(1.0)


def test_wf_ties_broken_by_id():
    ts = [ChoiceTable.from_pairs([(1, 0)], ue_id=i, bits_per_prb=100) for i in (5, 3, 4)]
    assert [ts[i].ue_id for i in wf_order(ts)] == [3, 4, 5]


def test_baseline_overflow_raises():
    ts = [ChoiceTable.from_pairs([(3, 0)], ue_id=i) for i in range(3)]
    with pytest.raises(InfeasibleError) as e:
        wf_allocate(ts, 8)
    assert e.value.shortfall == 1


def test_mrr_reproducible_under_seed():
    ts = [ChoiceTable.from_pairs([(1, 0), (2, 0.5), (4, 1.0)], ue_id=i) for i in range(4)]
    a = mrr_allocate(ts, 9, np.random.default_rng(1))
    b = mrr_allocate(ts, 9, np.random.default_rng(1))
    assert a.prbs == b.prbs


tables_st = st.lists(
    st.lists(st.tuples(st.integers(1, 10), st.floats(0, 2)), min_size=1, max_size=5),
    min_size=1, max_size=8)


@settings(max_examples=200, deadline=None)
@given(tables_st, st.integers(0, 60), st.integers(0, 2**32 - 1))
def test_heuristics_respect_budget(pairs, budget, seed):
    tables = [ChoiceTable.from_pairs(sorted(p), ue_id=i, bits_per_prb=i + 1) for i, p in enumerate(pairs)]
    tables, _ = admit(tables, budget)
    for alloc in (wf_allocate(tables, budget), mrr_allocate(tables, budget, np.random.default_rng(seed))):
        assert alloc.total_prbs_used <= budget
        assert set(alloc.choices) == {t.ue_id for t in tables}
        for t in tables:
            assert alloc.choices[t.ue_id] in t.choices


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([1, 2, 3]), st.integers(1, 15)), min_size=1, max_size=15),
       st.integers(1, 100))
def test_real_tables_meet_floors(ues, budget):
    from qoesim.channel import ChannelConfig, bits_per_prb
    cfg = ChannelConfig()
    tables = [build_choice_table(UeState(i, CLIENT_TYPES[lv], channel(cqi, bits_per_prb(cfg, cqi))), SKYPE_TABLE)
              for i, (lv, cqi) in enumerate(ues)]
    tables, blocked = admit(tables, budget)
    alloc = wf_allocate(tables, budget, [t.ue_id for t in blocked])
    for t in tables:
        assert alloc.choices[t.ue_id].mos >= t.ctype.min_mos
    assert alloc.total_prbs_used <= budget
