"""Downstream EPON split between wireless backhaul and wired ONUs (EARA / HPF)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .errors import ConfigError, InfeasibleError
from .qoe import ClientType, VideoProfile, best_profile_within, min_profile_for_type
from .wireless import WirelessAllocation

Tables = Mapping[str, Sequence[VideoProfile]]

# float slack when comparing summed Mbps against a budget
BW_EPS = 1e-9


@dataclass(frozen=True)
class WiredClient:
    id: Hashable
    ctype: ClientType
    app: str = "skype"


@dataclass
class OnuState:
    id: Hashable
    clients: list[WiredClient] = field(default_factory=list)


@dataclass
class OnuOutcome:
    onu_id: Hashable
    min_bw: float
    granted_bw: float
    profiles: dict  # client id -> VideoProfile
    avg_mos: float
    avg_call_drop: float


@dataclass(frozen=True)
class EponBudget:
    total: float
    backhaul: float
    wired_min: float

    @property
    def excess(self) -> float:
        return self.total - self.wired_min - self.backhaul


@dataclass
class EponAllocation:
    policy: str
    budget: EponBudget
    onus: list[OnuOutcome]
    split_call_drop: dict = field(default_factory=dict)  # onu id -> drop used for the split
    upgrade_trace: list = field(default_factory=list)  # (client id, level) in upgrade order

    @property
    def grants(self) -> dict:
        return {o.onu_id: o.granted_bw for o in self.onus}

    @property
    def total_granted(self) -> float:
        return sum(o.granted_bw for o in self.onus)

    def client_outcomes(self, onus: Sequence[OnuState]):
        """Yield (onu id, client, profile) for every wired client."""
        out = {o.onu_id: o for o in self.onus}
        for onu in onus:
            for c in onu.clients:
                yield onu.id, c, out[onu.id].profiles[c.id]


def backhaul_demand(cells: Sequence[WirelessAllocation], overhead: float = 1.0) -> float:
    """Backhaul Mbps needed to carry every admitted UE's chosen send rate."""
    total = 0.0
    for cell in cells:
        for c in cell.choices.values():
            if c.profile is not None:
                total += c.profile.send_rate
    return total * overhead


def _priority_order(clients: Sequence[WiredClient]) -> list[WiredClient]:
    return sorted(clients, key=lambda c: (-c.ctype.level, c.id))


def onu_min_bw(onu: OnuState, tables: Tables) -> float:
    return sum(min_profile_for_type(tables[c.app], c.ctype).send_rate for c in onu.clients)


def _outcome(onu: OnuState, min_bw: float, grant: float, profiles: dict) -> OnuOutcome:
    n = len(onu.clients)
    avg_mos = sum(profiles[c.id].mos for c in onu.clients) / n if n else 0.0
    avg_drop = sum(profiles[c.id].call_drop for c in onu.clients) / n if n else 0.0
    return OnuOutcome(onu.id, min_bw, grant, profiles, avg_mos, avg_drop)


def intra_onu_assign(onu: OnuState, grant: float, tables: Tables) -> OnuOutcome:
    """Spread an ONU grant over its clients, highest client type first.

    Every client starts at its cheapest SLA-meeting profile; the leftover is
    handed out by upgrading each client, in priority order, to the best
    profile whose extra send rate still fits.
    """
    mins = {c.id: min_profile_for_type(tables[c.app], c.ctype) for c in onu.clients}
    min_bw = sum(p.send_rate for p in mins.values())
    if grant < min_bw - BW_EPS:
        raise ConfigError(f"ONU {onu.id}: grant {grant:.6f} below minimum {min_bw:.6f}")
    profiles = dict(mins)
    leftover = max(0.0, grant - min_bw)
    for c in _priority_order(onu.clients):
        cur = profiles[c.id]
        best = best_profile_within(tables[c.app], cur.send_rate + leftover + BW_EPS, c.ctype)
        if best is not None and best.mos > cur.mos:
            leftover -= best.send_rate - cur.send_rate
            profiles[c.id] = best
    return _outcome(onu, min_bw, grant, profiles)


def _budget(onus: Sequence[OnuState], total: float, backhaul: float, tables: Tables) -> tuple[EponBudget, list[float]]:
    mins = [onu_min_bw(o, tables) for o in onus]
    budget = EponBudget(total, backhaul, sum(mins))
    if budget.excess < -BW_EPS:
        raise InfeasibleError(
            f"EPON capacity {total:.3f} Mbps < backhaul {backhaul:.3f} + wired minimum {budget.wired_min:.3f}",
            shortfall=-budget.excess)
    return budget, mins


def eara_allocate(onus: Sequence[OnuState], total: float, backhaul: float, tables: Tables) -> EponAllocation:
    """Split excess bandwidth across ONUs in proportion to their average call drop.

    Drops are those of the ONU's clients at their minimum profiles; the
    split is done once.
    """
    budget, mins = _budget(onus, total, backhaul, tables)
    excess = max(0.0, budget.excess)
    drops = {}
    for o, m in zip(onus, mins):
        drops[o.id] = intra_onu_assign(o, m, tables).avg_call_drop
    weight_sum = sum(drops.values())
    outcomes = []
    for o, m in zip(onus, mins):
        if weight_sum > 0:
            share = excess * drops[o.id] / weight_sum
        else:
            share = excess / len(onus)
        outcomes.append(intra_onu_assign(o, m + share, tables))
    return EponAllocation("eara", budget, outcomes, split_call_drop=drops)


def hpf_allocate(onus: Sequence[OnuState], total: float, backhaul: float, tables: Tables) -> EponAllocation:
    """Give excess to the highest-type clients first.

    Each client in turn takes the best profile the remaining excess can pay
    for, so lower types only see what higher types leave behind.
    """
    budget, mins = _budget(onus, total, backhaul, tables)
    excess = max(0.0, budget.excess)
    profiles = {}
    owner = {}
    for o in onus:
        for c in o.clients:
            profiles[c.id] = min_profile_for_type(tables[c.app], c.ctype)
            owner[c.id] = o.id
    extra = {o.id: 0.0 for o in onus}
    trace = []
    everyone = [c for o in onus for c in o.clients]
    for c in _priority_order(everyone):
        if excess <= BW_EPS:
            break
        cur = profiles[c.id]
        best = best_profile_within(tables[c.app], cur.send_rate + excess + BW_EPS, c.ctype)
        if best is not None and best.mos > cur.mos:
            cost = best.send_rate - cur.send_rate
            profiles[c.id] = best
            excess = max(0.0, excess - cost)
            extra[owner[c.id]] += cost
            trace.append((c.id, c.ctype.level))
    outcomes = []
    for o, m in zip(onus, mins):
        outcomes.append(_outcome(o, m, m + extra[o.id], {c.id: profiles[c.id] for c in o.clients}))
    return EponAllocation("hpf", budget, outcomes, upgrade_trace=trace)


EPON_POLICIES = {"eara": eara_allocate, "hpf": hpf_allocate}


def epon_allocate(policy: str, onus, total, backhaul, tables) -> EponAllocation:
    try:
        fn = EPON_POLICIES[policy]
    except KeyError:
        raise ConfigError(f"unknown EPON policy {policy!r}; expected eara or hpf") from None
    return fn(onus, total, backhaul, tables)
