"""End-to-end seeded runs: channels -> per-cell PRB scheduling -> EPON split."""

from __future__ import annotations

import csv
import io
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelConfig, channel_state
from .epon import OnuState, WiredClient, backhaul_demand, epon_allocate
from .errors import ConfigError, QoeSimError
from .mckp import mckp_allocate
from .qoe import build_profile_table, client_type, get_application
from .wireless import (ChoiceTable, UeState, admit, build_choice_table, mrr_allocate,
                       wf_allocate)

WIRELESS_ALGORITHMS = ("mrr", "wf", "mckp")
EPON_ALGORITHMS = ("eara", "hpf")
LEVELS = (1, 2, 3)

# (UEs per cell, wired clients per ONU)
DEFAULT_LOADS = {"low": (5, 4), "medium": (10, 8), "high": (15, 12)}


@dataclass(frozen=True)
class ScenarioConfig:
    cells: int = 5
    wired_onus: int = 3
    prbs_per_cell: int = 100
    epon_capacity: float = 10_000.0
    load: str = "medium"
    load_levels: dict = field(default_factory=lambda: dict(DEFAULT_LOADS))
    type_mix: tuple = (1 / 3, 1 / 3, 1 / 3)
    app: str = "skype"
    wired_app: Optional[str] = None
    algorithm_wireless: str = "mckp"
    algorithm_epon: str = "eara"
    epsilon: float = 0.1
    ttis: int = 20
    seed: int = 0
    fec: float = 0.4
    # per-app rate bounds; off by default so every app keeps its full ladder
    enforce_rate_bounds: bool = False
    distance_km: tuple = (0.05, 1.0)
    backhaul_overhead: float = 1.0
    channel: ChannelConfig = field(default_factory=ChannelConfig)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("cells", "wired_onus", "prbs_per_cell"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.ttis < 0:
            raise ConfigError("ttis must be non-negative")
        if self.epon_capacity <= 0:
            raise ConfigError("epon_capacity must be positive")
        if self.load not in self.load_levels:
            raise ConfigError(f"unknown load {self.load!r}; expected one of {sorted(self.load_levels)}")
        for k, v in self.load_levels.items():
            if len(v) != 2 or min(v) <= 0:
                raise ConfigError(f"load {k!r} needs two positive counts")
        if len(self.type_mix) != 3 or min(self.type_mix) < 0 or abs(sum(self.type_mix) - 1) > 1e-9:
            raise ConfigError("type_mix must be three non-negative weights summing to 1")
        if self.algorithm_wireless not in WIRELESS_ALGORITHMS:
            raise ConfigError(f"unknown wireless algorithm {self.algorithm_wireless!r}")
        if self.algorithm_epon not in EPON_ALGORITHMS:
            raise ConfigError(f"unknown EPON algorithm {self.algorithm_epon!r}")
        if not 0 < self.epsilon <= 1:
            raise ConfigError("epsilon must lie in (0, 1]")
        lo, hi = self.distance_km
        if not 0 < lo <= hi:
            raise ConfigError("distance_km must satisfy 0 < min <= max")
        get_application(self.app)
        get_application(self.wired_app or self.app)

    @property
    def ues_per_cell(self) -> int:
        return self.load_levels[self.load][0]

    @property
    def clients_per_onu(self) -> int:
        return self.load_levels[self.load][1]

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        kw = dict(d)
        if "channel" in kw:
            kw["channel"] = ChannelConfig.from_dict(kw["channel"])
        if "load_levels" in kw:
            kw["load_levels"] = {k: tuple(v) for k, v in kw["load_levels"].items()}
        for k in ("type_mix", "distance_km"):
            if k in kw:
                kw[k] = tuple(kw[k])
        try:
            return cls(**kw)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channel"] = asdict(self.channel)
        return d


@dataclass
class TypeStats:
    mean_mos: float = math.nan
    mean_call_drop: float = math.nan
    blocked: int = 0
    mean_resource: float = math.nan  # PRBs (wireless) or Mbps (wired) per client-TTI
    samples: int = 0


@dataclass
class RunMetrics:
    config: ScenarioConfig
    cumulative_mos: list = field(default_factory=list)  # wireless, per TTI
    cumulative_call_drop: list = field(default_factory=list)
    wireless: dict = field(default_factory=dict)  # level or "all" -> TypeStats
    wired: dict = field(default_factory=dict)
    blocked: int = 0
    sla_violations: int = 0
    max_cell_prbs: int = 0
    max_epon_overshoot: float = -math.inf
    max_excess_identity_error: float = 0.0
    sched_seconds: list = field(default_factory=list)

    @property
    def mean_cumulative_mos(self) -> float:
        return float(np.mean(self.cumulative_mos)) if self.cumulative_mos else math.nan

    @property
    def mean_cumulative_call_drop(self) -> float:
        return float(np.mean(self.cumulative_call_drop)) if self.cumulative_call_drop else math.nan


class _Acc:
    def __init__(self):
        self.mos = 0.0
        self.drop = 0.0
        self.res = 0.0
        self.n = 0
        self.blocked = 0

    def add(self, mos, drop, res):
        self.mos += mos
        self.drop += drop
        self.res += res
        self.n += 1

    def stats(self) -> TypeStats:
        if not self.n:
            return TypeStats(blocked=self.blocked)
        return TypeStats(self.mos / self.n, self.drop / self.n, self.blocked, self.res / self.n, self.n)


def _draw_types(rng, n, mix):
    return [int(x) for x in rng.choice(LEVELS, size=n, p=np.asarray(mix, dtype=float))]


def schedule_cell(algorithm: str, tables: Sequence[ChoiceTable], budget: int, rng, epsilon: float,
                  blocked=()):
    if algorithm == "mrr":
        return mrr_allocate(tables, budget, rng, blocked)
    if algorithm == "wf":
        return wf_allocate(tables, budget, blocked)
    if algorithm == "mckp":
        return mckp_allocate(tables, budget, epsilon, blocked)
    raise ConfigError(f"unknown wireless algorithm {algorithm!r}")


def run(cfg: ScenarioConfig) -> RunMetrics:
    """Simulate ``cfg.ttis`` TTIs; identical configs give identical metrics."""
    place_ss, fade_ss, sched_ss = np.random.SeedSequence(cfg.seed).spawn(3)
    place_rng = np.random.default_rng(place_ss)
    fade_rng = np.random.default_rng(fade_ss)
    sched_rng = np.random.default_rng(sched_ss)

    app = get_application(cfg.app)
    wired_app = get_application(cfg.wired_app or cfg.app)
    if not cfg.enforce_rate_bounds:
        app = replace(app, enforce_bounds=False)
        wired_app = replace(wired_app, enforce_bounds=False)
    tables = {app.name: build_profile_table(app, cfg.fec)}
    tables.setdefault(wired_app.name, build_profile_table(wired_app, cfg.fec))

    n_ue = cfg.ues_per_cell
    lo, hi = cfg.distance_km
    cells = []
    for cell in range(cfg.cells):
        levels = _draw_types(place_rng, n_ue, cfg.type_mix)
        dists = place_rng.uniform(lo, hi, size=n_ue)
        cells.append([(cell * n_ue + k, client_type(lv), float(d)) for k, (lv, d) in enumerate(zip(levels, dists))])
    onus = []
    for o in range(cfg.wired_onus):
        levels = _draw_types(place_rng, cfg.clients_per_onu, cfg.type_mix)
        onus.append(OnuState(o, [WiredClient((o, k), client_type(lv), wired_app.name)
                                 for k, lv in enumerate(levels)]))

    choice_cache: dict = {}
    w_acc = {lv: _Acc() for lv in LEVELS}
    f_acc = {lv: _Acc() for lv in LEVELS}
    m = RunMetrics(cfg)
    budget = cfg.prbs_per_cell

    for tti in range(cfg.ttis):
        try:
            allocs = []
            cum_mos = cum_drop = 0.0
            t0 = time.perf_counter()
            for ues in cells:
                cell_tables, unservable = [], []
                for ue_id, ctype, dist in ues:
                    st = channel_state(cfg.channel, dist, fade_rng)
                    if st.bits_per_prb == 0:
                        unservable.append(ue_id)
                        continue
                    key = (ctype.level, st.bits_per_prb)
                    if key not in choice_cache:
                        choice_cache[key] = build_choice_table(
                            UeState(None, ctype, st, app.name), tables[app.name]).choices
                    cell_tables.append(ChoiceTable(ue_id, ctype, st.bits_per_prb, choice_cache[key]))
                admitted, refused = admit(cell_tables, budget)
                blocked = unservable + [t.ue_id for t in refused]
                alloc = schedule_cell(cfg.algorithm_wireless, admitted, budget, sched_rng,
                                      cfg.epsilon, blocked)
                allocs.append(alloc)
                m.max_cell_prbs = max(m.max_cell_prbs, alloc.total_prbs_used)
                levels = {u: ct.level for u, ct, _ in ues}
                for ue_id in blocked:
                    w_acc[levels[ue_id]].blocked += 1
                    m.blocked += 1
                for t in admitted:
                    c = alloc.choices[t.ue_id]
                    w_acc[t.ctype.level].add(c.mos, c.call_drop, c.weight)
                    if c.mos < t.ctype.min_mos:
                        m.sla_violations += 1
                cum_mos += alloc.cumulative_mos
                cum_drop += alloc.cumulative_call_drop
            m.sched_seconds.append(time.perf_counter() - t0)
            m.cumulative_mos.append(cum_mos)
            m.cumulative_call_drop.append(cum_drop)

            w_b = backhaul_demand(allocs, cfg.backhaul_overhead)
            ep = epon_allocate(cfg.algorithm_epon, onus, cfg.epon_capacity, w_b, tables)
            m.max_epon_overshoot = max(m.max_epon_overshoot, w_b + ep.total_granted - cfg.epon_capacity)
            w_f = sum(o.min_bw for o in ep.onus)
            m.max_excess_identity_error = max(
                m.max_excess_identity_error, abs(ep.budget.excess - (cfg.epon_capacity - w_f - w_b)))
            for _, client, prof in ep.client_outcomes(onus):
                f_acc[client.ctype.level].add(prof.mos, prof.call_drop, prof.send_rate)
                if prof.mos < client.ctype.min_mos:
                    m.sla_violations += 1
        except QoeSimError as e:
            e.tti = tti
            e.args = (f"tti {tti}: {e}",) + e.args[1:]
            raise

    for acc, out in ((w_acc, m.wireless), (f_acc, m.wired)):
        total = _Acc()
        for lv in LEVELS:
            out[lv] = acc[lv].stats()
            a = acc[lv]
            total.mos += a.mos
            total.drop += a.drop
            total.res += a.res
            total.n += a.n
            total.blocked += a.blocked
        out["all"] = total.stats()
    return m


METRICS_CSV_COLUMNS = ("run_id", "seed", "load", "wireless_alg", "epon_alg", "domain",
                       "client_type", "mean_mos", "mean_call_drop", "blocked", "prbs_or_bw")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.6f}"
    return str(x)


def metrics_rows(m: RunMetrics, run_id: str = "0") -> list[list[str]]:
    cfg = m.config
    head = [run_id, cfg.seed, cfg.load, cfg.algorithm_wireless, cfg.algorithm_epon]
    rows = [head + ["wireless_cumulative", "all", m.mean_cumulative_mos,
                    m.mean_cumulative_call_drop, m.blocked, math.nan]]
    for domain, stats in (("wireless", m.wireless), ("wired", m.wired)):
        for key in (*LEVELS, "all"):
            s = stats.get(key, TypeStats())
            rows.append(head + [domain, key, s.mean_mos, s.mean_call_drop, s.blocked, s.mean_resource])
    return [[_fmt(v) for v in r] for r in rows]


def write_metrics_csv(runs: Sequence[tuple[str, RunMetrics]], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(METRICS_CSV_COLUMNS)
    for run_id, m in runs:
        w.writerows(metrics_rows(m, run_id))


def metrics_csv(runs: Sequence[tuple[str, RunMetrics]]) -> str:
    buf = io.StringIO()
    write_metrics_csv(runs, buf)
    return buf.getvalue()


@dataclass
class SweepRow:
    load: str
    algorithm: str
    seed: int
    metrics: Optional[RunMetrics] = None
    error: Optional[str] = None

    @property
    def run_id(self) -> str:
        return f"{self.load}-{self.algorithm}-{self.seed}"


def config_for(base: ScenarioConfig, load: str, algorithm: str, seed: int) -> ScenarioConfig:
    """``algorithm`` names a wireless scheduler, an EPON policy, or ``wireless+epon``."""
    kw = {"load": load, "seed": seed}
    for part in algorithm.split("+"):
        if part in WIRELESS_ALGORITHMS:
            kw["algorithm_wireless"] = part
        elif part in EPON_ALGORITHMS:
            kw["algorithm_epon"] = part
        else:
            raise ConfigError(f"unknown algorithm {part!r}")
    return replace(base, **kw)


def _sweep_cell(args):
    base, load, algorithm, seed = args
    try:
        return SweepRow(load, algorithm, seed, metrics=run(config_for(base, load, algorithm, seed)))
    except QoeSimError as e:
        return SweepRow(load, algorithm, seed, error=f"{type(e).__name__}: {e}")


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("QOE_SIM_THREADS", "1")))
    except ValueError:
        raise ConfigError("QOE_SIM_THREADS must be an integer") from None


def sweep(base: ScenarioConfig, loads: Sequence[str], algorithms: Sequence[str],
          seeds: Sequence[int], workers: Optional[int] = None) -> list[SweepRow]:
    """Run the full (load, algorithm, seed) grid; failures are kept per cell."""
    if not loads or not algorithms or not seeds:
        raise ConfigError("sweep axes must be non-empty")
    for a in algorithms:
        config_for(base, loads[0], a, seeds[0])
    grid = [(base, ld, a, s) for ld in loads for a in algorithms for s in seeds]
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [_sweep_cell(g) for g in grid]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_sweep_cell, grid))


SUMMARY_COLUMNS = ("load", "algorithm", "domain", "client_type", "n", "mos_mean", "mos_stderr",
                   "drop_mean", "drop_stderr")


def _mean_stderr(values):
    arr = np.asarray(values, dtype=float)
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def summarize(rows: Sequence[SweepRow]) -> list[dict]:
    """Mean and standard error over seeds per (load, algorithm, domain, client type)."""
    groups: dict = {}
    for r in rows:
        if r.metrics is None:
            continue
        m = r.metrics
        items = [("wireless_cumulative", "all", m.mean_cumulative_mos, m.mean_cumulative_call_drop)]
        for domain, stats in (("wireless", m.wireless), ("wired", m.wired)):
            for key, s in stats.items():
                items.append((domain, key, s.mean_mos, s.mean_call_drop))
        for domain, key, mos, drop in items:
            g = groups.setdefault((r.load, r.algorithm, domain, str(key)), ([], []))
            if not math.isnan(mos):
                g[0].append(mos)
                g[1].append(drop)

    out = []
    for key in sorted(groups):
        mos, drop = groups[key]
        if not mos:
            warnings.warn(f"summary group {key} has no samples; skipped")
            continue
        mm, ms = _mean_stderr(mos)
        dm, ds = _mean_stderr(drop)
        out.append(dict(zip(SUMMARY_COLUMNS, (*key, len(mos), mm, ms, dm, ds))))
    return out
