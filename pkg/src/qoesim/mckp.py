"""Multiple-choice knapsack allocation with profit scaling, and its exact oracle.

Each UE contributes exactly one choice. The DP tracks, for every reachable
scaled profit q, the fewest PRBs achieving it over the first i UEs; the
answer is the largest q whose PRB count fits the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import ConfigError, InfeasibleError, InstanceTooLargeError
from .wireless import ChoiceTable, WirelessAllocation, make_allocation

ORACLE_GUARD = 10 ** 7


@dataclass
class MckpSolution:
    picks: list[int]  # index into each table's choices
    scale: float
    scaled_profit: int
    upper_bound: int


def solve_mckp(tables: Sequence[ChoiceTable], budget: int, epsilon: float) -> MckpSolution:
    if not 0.0 < epsilon <= 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1], got {epsilon}")
    n = len(tables)
    if n == 0:
        return MckpSolution([], 1.0, 0, 0)

    min_w = [min(c.weight for c in t.choices) for t in tables]
    floor_w = sum(min_w)
    if floor_w > budget:
        raise InfeasibleError(f"minimum PRBs {floor_w} exceed budget {budget}",
                              shortfall=floor_w - budget)

    # a choice is usable only if it fits with every other UE at its lightest
    usable = []
    for t, mw in zip(tables, min_w):
        slack = budget - (floor_w - mw)
        usable.append([j for j, c in enumerate(t.choices) if c.weight <= slack])

    offsets = [min(t.choices[j].raw_profit for j in idx) for t, idx in zip(tables, usable)]
    p_max = max(t.choices[j].raw_profit - off
                for t, idx, off in zip(tables, usable, offsets) for j in idx)
    scale = epsilon * p_max / n if p_max > 0 else 1.0

    scaled = []
    for t, idx, off in zip(tables, usable, offsets):
        # 1e-9 keeps exact multiples of the scale from flooring one step low
        scaled.append([int(math.floor((t.choices[j].raw_profit - off) / scale + 1e-9)) for j in idx])
    upper = sum(max(s) for s in scaled)

    sentinel = budget + 1
    y = np.full(upper + 1, sentinel, dtype=np.int64)
    y[0] = 0
    back = np.empty((n, upper + 1), dtype=np.int32)
    for i, t in enumerate(tables):
        best = np.full(upper + 1, sentinel, dtype=np.int64)
        arg = np.full(upper + 1, -1, dtype=np.int32)
        for k, (j, s) in enumerate(zip(usable[i], scaled[i])):
            cand = np.full(upper + 1, sentinel, dtype=np.int64)
            cand[s:] = y[: upper + 1 - s] + t.choices[j].weight
            better = cand < best
            best[better] = cand[better]
            arg[better] = k
        np.minimum(best, sentinel, out=best)
        y = best
        back[i] = arg

    feasible = np.nonzero(y <= budget)[0]
    q = int(feasible[-1])
    result_q = q
    picks = [0] * n
    for i in range(n - 1, -1, -1):
        k = int(back[i, q])
        picks[i] = usable[i][k]
        q -= scaled[i][k]
    return MckpSolution(picks, scale, result_q, upper)


def mckp_allocate(tables: Sequence[ChoiceTable], budget: int, epsilon: float = 0.1,
                  blocked: Sequence[Hashable] = ()) -> WirelessAllocation:
    """PRB allocation maximising cumulative MoS within a (1 - epsilon) factor."""
    sol = solve_mckp(tables, budget, epsilon)
    picks = [t.choices[j] for t, j in zip(tables, sol.picks)]
    return make_allocation(tables, picks, budget, blocked)


def brute_force_oracle(tables: Sequence[ChoiceTable], budget: int, guard: int = ORACLE_GUARD):
    """Exact optimum by enumerating every one-choice-per-UE vector.

    Returns ``(profit, assignment)``; among optimal vectors the
    lexicographically smallest index tuple wins.
    """
    sizes = [len(t.choices) for t in tables]
    if math.prod(sizes) > guard:
        raise InstanceTooLargeError(f"{math.prod(sizes)} assignments exceed guard {guard}")
    if not tables:
        return 0.0, ()

    weights = np.zeros(sizes, dtype=np.int64)
    profits = np.zeros(sizes, dtype=float)
    for axis, t in enumerate(tables):
        shape = [1] * len(sizes)
        shape[axis] = sizes[axis]
        weights = weights + np.array([c.weight for c in t.choices]).reshape(shape)
        profits = profits + np.array([c.raw_profit for c in t.choices]).reshape(shape)

    ok = weights <= budget
    if not ok.any():
        need = int(weights.min())
        raise InfeasibleError(f"no assignment fits budget {budget}", shortfall=need - budget)
    masked = np.where(ok, profits, -np.inf).ravel()
    best = masked.max()
    flat = int(np.nonzero(masked >= best - 1e-9)[0][0])
    assignment = tuple(int(i) for i in np.unravel_index(flat, sizes))
    return float(sum(t.choices[j].raw_profit for t, j in zip(tables, assignment))), assignment
