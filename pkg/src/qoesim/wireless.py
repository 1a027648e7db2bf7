"""Per-cell PRB scheduling: choice tables, admission, MRR and WF heuristics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np

from .channel import UeChannelState
from .errors import InfeasibleError, InfeasibleSlaError, UnservableUeError
from .qoe import ClientType, VideoProfile, client_type

TTI_PER_SECOND = 1000


@dataclass(frozen=True)
class UeState:
    id: Hashable
    ctype: ClientType
    channel: UeChannelState
    app: str = "skype"


@dataclass(frozen=True)
class Choice:
    weight: int
    raw_profit: float
    mos: float
    call_drop: float = 0.0
    profile: Optional[VideoProfile] = None


@dataclass(frozen=True)
class ChoiceTable:
    """Admissible (weight, profit) options of one UE, ascending by weight."""

    ue_id: Hashable
    ctype: ClientType
    bits_per_prb: int
    choices: tuple[Choice, ...]

    @property
    def baseline(self) -> Choice:
        return self.choices[0]

    @property
    def top(self) -> Choice:
        return max(self.choices, key=lambda c: (c.mos, -c.weight))

    @classmethod
    def from_pairs(cls, pairs, ue_id=0, level=1, bits_per_prb=1, base_mos=1.0):
        """Synthetic table from (weight, raw_profit) pairs, kept in given order."""
        choices = tuple(Choice(int(w), float(p), base_mos + float(p)) for w, p in pairs)
        return cls(ue_id, client_type(level), bits_per_prb, choices)


def prb_weight(send_rate_mbps: float, bits_per_prb: int) -> int:
    """PRBs per TTI needed to carry ``send_rate_mbps``."""
    per_prb_bps = TTI_PER_SECOND * bits_per_prb
    # absorb float noise such as 1.28e6 -> 1280000.0000000002
    return max(1, math.ceil(send_rate_mbps * 1e6 / per_prb_bps - 1e-9))


def build_choice_table(ue: UeState, table: Sequence[VideoProfile]) -> ChoiceTable:
    bits = ue.channel.bits_per_prb
    if bits <= 0:
        raise UnservableUeError(f"UE {ue.id} has CQI {ue.channel.cqi}: no bits per PRB")
    admissible = [p for p in table if p.mos >= ue.ctype.min_mos]
    if not admissible:
        raise InfeasibleSlaError(f"UE {ue.id}: no profile reaches MoS {ue.ctype.min_mos}")

    weighted = sorted(((prb_weight(p.send_rate, bits), p) for p in admissible),
                      key=lambda wp: (wp[0], -wp[1].mos))
    kept: list[tuple[int, VideoProfile]] = []
    for w, p in weighted:
        # drop equal-weight losers and anything not strictly better than a lighter choice
        if kept and (w == kept[-1][0] or p.mos <= kept[-1][1].mos):
            continue
        kept.append((w, p))

    base_mos = kept[0][1].mos
    choices = tuple(Choice(w, p.mos - base_mos, p.mos, p.call_drop, p) for w, p in kept)
    return ChoiceTable(ue.id, ue.ctype, bits, choices)


def admit(tables: Sequence[ChoiceTable], budget: int):
    """Split UEs into (admitted, blocked) so that baseline weights fit ``budget``.

    Removal order: lowest client type first, then heaviest baseline, then id.
    Both returned lists keep the input order.
    """
    total = sum(t.baseline.weight for t in tables)
    if total <= budget:
        return list(tables), []
    order = sorted(tables, key=lambda t: (t.ctype.level, -t.baseline.weight, t.ue_id))
    removed = set()
    for t in order:
        if total <= budget:
            break
        removed.add(t.ue_id)
        total -= t.baseline.weight
    admitted = [t for t in tables if t.ue_id not in removed]
    blocked = [t for t in tables if t.ue_id in removed]
    return admitted, blocked


@dataclass
class WirelessAllocation:
    choices: dict  # ue_id -> Choice
    budget: int
    total_prbs_used: int
    cumulative_mos: float
    cumulative_call_drop: float
    incremental_profit: float
    per_type_mos: dict = field(default_factory=dict)
    per_type_call_drop: dict = field(default_factory=dict)
    levels: dict = field(default_factory=dict)  # ue_id -> client type level
    blocked: tuple = ()

    @property
    def prbs(self) -> dict:
        return {u: c.weight for u, c in self.choices.items()}


def make_allocation(tables: Sequence[ChoiceTable], picks: Sequence[Choice], budget: int,
                    blocked: Sequence[Hashable] = ()) -> WirelessAllocation:
    by_type: dict[int, list[Choice]] = {}
    for t, c in zip(tables, picks):
        by_type.setdefault(t.ctype.level, []).append(c)
    return WirelessAllocation(
        choices={t.ue_id: c for t, c in zip(tables, picks)},
        budget=budget,
        total_prbs_used=sum(c.weight for c in picks),
        cumulative_mos=sum(c.mos for c in picks),
        cumulative_call_drop=sum(c.call_drop for c in picks),
        incremental_profit=sum(c.raw_profit for c in picks),
        per_type_mos={k: sum(c.mos for c in v) / len(v) for k, v in sorted(by_type.items())},
        per_type_call_drop={k: sum(c.call_drop for c in v) / len(v) for k, v in sorted(by_type.items())},
        levels={t.ue_id: t.ctype.level for t in tables},
        blocked=tuple(blocked),
    )


def _baselines(tables: Sequence[ChoiceTable], budget: int) -> tuple[list[Choice], int]:
    picks = [t.baseline for t in tables]
    used = sum(c.weight for c in picks)
    if used > budget:
        raise InfeasibleError(f"baseline PRBs {used} exceed budget {budget}", shortfall=used - budget)
    return picks, budget - used


def _best_upgrade(table: ChoiceTable, current: Choice, remaining: int) -> Optional[Choice]:
    cap = current.weight + remaining
    better = [c for c in table.choices if c.weight <= cap and c.mos > current.mos]
    if not better:
        return None
    return max(better, key=lambda c: (c.mos, -c.weight))


def mrr_allocate(tables: Sequence[ChoiceTable], budget: int, rng: np.random.Generator,
                 blocked: Sequence[Hashable] = ()) -> WirelessAllocation:
    """Modified round robin: baselines, then cyclic greedy upgrades from a random UE."""
    picks, remaining = _baselines(tables, budget)
    n = len(tables)
    if n:
        start = int(rng.integers(n))
        changed = True
        while changed and remaining > 0:
            changed = False
            for k in range(n):
                i = (start + k) % n
                up = _best_upgrade(tables[i], picks[i], remaining)
                if up is None:
                    continue
                remaining -= up.weight - picks[i].weight
                picks[i] = up
                changed = True
                if remaining == 0:
                    break
    return make_allocation(tables, picks, budget, blocked)


def wf_order(tables: Sequence[ChoiceTable]) -> list[int]:
    return sorted(range(len(tables)), key=lambda i: (-tables[i].bits_per_prb, tables[i].ue_id))


def wf_allocate(tables: Sequence[ChoiceTable], budget: int,
                blocked: Sequence[Hashable] = ()) -> WirelessAllocation:
    """Water filling: baselines, then greedy upgrades in descending channel quality."""
    picks, remaining = _baselines(tables, budget)
    for i in wf_order(tables):
        if remaining <= 0:
            break
        up = _best_upgrade(tables[i], picks[i], remaining)
        if up is not None:
            remaining -= up.weight - picks[i].weight
            picks[i] = up
    return make_allocation(tables, picks, budget, blocked)
