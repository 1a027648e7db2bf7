import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qoesim.errors import ConfigError, InfeasibleError, InstanceTooLargeError
from qoesim.mckp import brute_force_oracle, mckp_allocate, solve_mckp
from qoesim.verify import random_instance
from qoesim.wireless import ChoiceTable


def two_ues():
    a = ChoiceTable.from_pairs([(1, 0.0), (2, 1.0), (3, 2.0)], ue_id=0)
    b = ChoiceTable.from_pairs([(1, 0.0), (2, 1.0)], ue_id=1)
    return [a, b]


def test_small_example():
    # heaviest pair weighs exactly 5
    profit, assignment = brute_force_oracle(two_ues(), 5)
    assert profit == pytest.approx(3.0)
    assert assignment == (2, 1)
    alloc = mckp_allocate(two_ues(), 5, epsilon=0.01)
    assert alloc.incremental_profit == pytest.approx(3.0)
    assert alloc.total_prbs_used == 5


def test_oracle_tie_break_is_lexicographic():
    profit, assignment = brute_force_oracle(two_ues(), 4)
    assert profit == pytest.approx(2.0)
    assert assignment == (1, 1)


def test_budget_at_floor_gives_baselines():
    alloc = mckp_allocate(two_ues(), 2)
    assert alloc.prbs == {0: 1, 1: 1}


def test_infeasible():
    with pytest.raises(InfeasibleError) as e:
        solve_mckp(two_ues(), 1, 0.1)
    assert e.value.shortfall == 1


@pytest.mark.parametrize("eps", [0, -0.1, 1.5])
def test_epsilon_domain(eps):
    with pytest.raises(ConfigError):
        solve_mckp(two_ues(), 5, eps)


def test_oracle_guard():
    big = [ChoiceTable.from_pairs([(1, k * 0.1) for k in range(10)], ue_id=i) for i in range(8)]
    with pytest.raises(InstanceTooLargeError):
        brute_force_oracle(big, 100)


def test_empty_instance():
    assert solve_mckp([], 10, 0.1).picks == []
    assert brute_force_oracle([], 10) == (0.0, ())


def test_all_zero_profit():
    ts = [ChoiceTable.from_pairs([(1, 0.0), (4, 0.0)], ue_id=i) for i in range(3)]
    alloc = mckp_allocate(ts, 12)
    assert alloc.incremental_profit == 0.0
    assert alloc.total_prbs_used <= 12


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_exact_on_grid_profits(seed):
    tables, budget = random_instance(np.random.default_rng(seed))
    opt, _ = brute_force_oracle(tables, budget)
    alloc = mckp_allocate(tables, budget, epsilon=1e-4)
    assert alloc.total_prbs_used <= budget
    assert alloc.incremental_profit == pytest.approx(opt, abs=1e-9)


@settings(max_examples=300, deadline=None)
@given(seeds, st.sampled_from([0.05, 0.1, 0.3, 0.5, 1.0]))
def test_approximation_bound(seed, eps):
    tables, budget = random_instance(np.random.default_rng(seed))
    opt, _ = brute_force_oracle(tables, budget)
    alloc = mckp_allocate(tables, budget, epsilon=eps)
    assert alloc.total_prbs_used <= budget
    assert alloc.incremental_profit >= (1 - eps) * opt - 1e-9
    assert alloc.incremental_profit <= opt + 1e-9


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_scaled_profit_within_upper_bound(seed):
    tables, budget = random_instance(np.random.default_rng(seed))
    sol = solve_mckp(tables, budget, 0.2)
    assert 0 <= sol.scaled_profit <= sol.upper_bound
    assert sum(t.choices[j].weight for t, j in zip(tables, sol.picks)) <= budget
