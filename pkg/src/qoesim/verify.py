"""Bundled acceptance checks, runnable without a test framework.

Every check returns a :class:`CheckResult`; ``run_checks`` drives them and
``qoesim verify`` prints one line per check.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import qoe
from .mckp import brute_force_oracle, mckp_allocate
from .simulator import ScenarioConfig, metrics_csv, run, sweep
from .wireless import ChoiceTable

# Measured Skype ladder: (width, height, fps, video Mbps, send Mbps, MoS, call drop).
SKYPE_MEASURED = (
    (640, 480, 5, 3.07, 5.12, 4.62, 0.000),
    (640, 480, 10, 6.14, 10.23, 4.69, 0.000),
    (640, 480, 15, 9.20, 15.33, 4.72, 0.000),
    (640, 480, 28, 17.20, 28.66, 4.74, 0.000),
    (320, 240, 5, 0.77, 1.28, 4.15, 0.070),
    (320, 240, 10, 1.54, 2.56, 4.46, 0.008),
    (320, 240, 15, 2.30, 3.83, 4.57, 0.000),
    (320, 240, 28, 4.30, 7.16, 4.66, 0.000),
    (160, 120, 5, 0.19, 0.32, 2.92, 0.532),
    (160, 120, 10, 0.38, 0.64, 3.63, 0.248),
    (160, 120, 15, 0.57, 0.96, 3.96, 0.116),
    (160, 120, 28, 1.07, 1.70, 4.32, 0.036),
)

RATE_TOL = 0.01
MOS_TOL = 0.2
MOS_TIGHT_TOL = 0.12
FLOAT_SLACK = 1e-9
SEEDS = tuple(range(30))
TTIS = 20
# 1G-EPON downstream line rate; the 10G default never contends
EPON_CAPACITY = 1000.0


@dataclass
class CheckResult:
    name: str
    group: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_ladder() -> CheckResult:
    t0 = time.perf_counter()
    table = qoe.build_profile_table(qoe.SKYPE)
    by_key = {(p.resolution.width, p.resolution.height, p.fps): p for p in table}
    rate_misses, mos_errs = [], []
    for w, h, fps, rv, rs, mos, _ in SKYPE_MEASURED:
        p = by_key[(w, h, fps)]
        if abs(p.video_rate - rv) > RATE_TOL + FLOAT_SLACK or abs(p.send_rate - rs) > RATE_TOL + FLOAT_SLACK:
            rate_misses.append(f"{w}x{h}@{fps}: R_v {p.video_rate:.4f}/{rv} R_s {p.send_rate:.4f}/{rs}")
        mos_errs.append(abs(p.mos - mos))
    anchor_misses = [f"{mos}->{qoe.call_drop_of_mos(mos)}" for *_, mos, drop in SKYPE_MEASURED
                     if qoe.call_drop_of_mos(mos) != drop]
    elapsed = time.perf_counter() - t0

    mos_ok = max(mos_errs) <= MOS_TOL and sum(e <= MOS_TIGHT_TOL for e in mos_errs) >= 11
    data = dict(count_ok=len(table) == 12, rates_ok=not rate_misses, mos_ok=mos_ok,
                anchors_ok=not anchor_misses, fast=elapsed < 1.0,
                max_mos_err=max(mos_errs), rate_misses=rate_misses)
    passed = all(data[k] for k in ("count_ok", "rates_ok", "mos_ok", "anchors_ok", "fast"))
    detail = (f"{len(table)} profiles, max |dMoS| {max(mos_errs):.3f}, "
              f"{sum(e <= MOS_TIGHT_TOL for e in mos_errs)}/12 within {MOS_TIGHT_TOL}, "
              f"rate mismatches {len(rate_misses)}, anchor mismatches {len(anchor_misses)}, {elapsed * 1e3:.1f} ms")
    if rate_misses:
        detail += " [" + "; ".join(rate_misses) + "]"
    return CheckResult("skype_ladder_reproduction", "ladder", passed, detail, data)


def check_zero_drop() -> CheckResult:
    bad = []
    n = 0
    for app in qoe.APPLICATIONS.values():
        for a in (app, replace(app, enforce_bounds=False)):
            for p in qoe.build_profile_table(a):
                if p.mos >= qoe.ZERO_DROP_MOS:
                    n += 1
                    if qoe.call_drop_of_mos(p.mos) != 0.0 or p.call_drop != 0.0:
                        bad.append(p.label)
    return CheckResult("zero_drop_boundary", "zero_drop", not bad,
                       f"{n} profiles with MoS >= 4.5, {len(bad)} with nonzero drop")


def random_instance(rng: np.random.Generator, max_ues=6, max_choices=5, max_budget=30):
    """Small MCKP instance with profits on a 0.001 grid; always feasible."""
    while True:
        n = int(rng.integers(1, max_ues + 1))
        tables = []
        for i in range(n):
            k = int(rng.integers(1, max_choices + 1))
            pairs = [(int(rng.integers(1, 11)), int(rng.integers(0, 2001)) / 1000.0) for _ in range(k)]
            tables.append(ChoiceTable.from_pairs(pairs, ue_id=i))
        floor_w = sum(min(c.weight for c in t.choices) for t in tables)
        if floor_w <= max_budget:
            return tables, int(rng.integers(floor_w, max_budget + 1))


LOSSLESS_EPSILON = 1e-4  # epsilon * p_max stays below the 0.001 profit grid


@lru_cache(maxsize=None)
def _mckp_instances(count=500, seed=20240):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        tables, budget = random_instance(rng)
        opt, _ = brute_force_oracle(tables, budget)
        out.append((tables, budget, opt))
    return tuple(out)


def check_mckp_exact() -> CheckResult:
    t0 = time.perf_counter()
    insts = _mckp_instances()
    misses = 0
    for tables, budget, opt in insts:
        got = mckp_allocate(tables, budget, LOSSLESS_EPSILON)
        if round(got.incremental_profit, 9) != round(opt, 9) or got.total_prbs_used > budget:
            misses += 1
    elapsed = time.perf_counter() - t0
    ok = misses == 0 and elapsed < 30.0
    return CheckResult("mckp_exactness", "mckp", ok,
                       f"{len(insts)} instances, {misses} mismatches, {elapsed:.2f} s")


def check_fptas_bound() -> CheckResult:
    insts = _mckp_instances()
    fails = {}
    for eps in (0.5, 0.25, 0.1):
        fails[eps] = sum(
            mckp_allocate(tables, budget, eps).incremental_profit < (1 - eps) * opt - FLOAT_SLACK
            for tables, budget, opt in insts)
    ok = not any(fails.values())
    return CheckResult("fptas_bound", "mckp", ok,
                       f"{len(insts)} instances; failures per epsilon {fails}")


def acceptance_base(**kw) -> ScenarioConfig:
    return replace(ScenarioConfig(epon_capacity=EPON_CAPACITY, ttis=TTIS), **kw)


@lru_cache(maxsize=None)
def _sweep(loads, algorithms, app="skype"):
    return tuple(sweep(acceptance_base(app=app), list(loads), list(algorithms), list(SEEDS), workers=None))


def _by(rows, load, algorithm):
    return [r.metrics for r in rows if r.load == load and r.algorithm == algorithm]


def _all_sweeps():
    return (list(_sweep(("medium", "high"), ("mrr", "wf", "mckp")))
            + list(_sweep(("high",), ("eara", "hpf")))
            + list(_sweep(("high",), ("mckp",), "googleplus")))


def check_scheduler_ordering() -> CheckResult:
    rows = _sweep(("medium", "high"), ("mrr", "wf", "mckp"))
    errors = [r for r in rows if r.error]
    ok = not errors
    parts = []
    for load in ("medium", "high"):
        mos = {a: statistics.fmean(m.mean_cumulative_mos for m in _by(rows, load, a)) for a in ("mrr", "wf", "mckp")}
        drop = {a: statistics.fmean(m.mean_cumulative_call_drop for m in _by(rows, load, a)) for a in ("mrr", "wf", "mckp")}
        ok &= mos["mckp"] >= mos["wf"] >= mos["mrr"]
        ok &= drop["mckp"] <= drop["wf"] <= drop["mrr"]
        if load == "high":
            ok &= mos["mckp"] > mos["mrr"]
        parts.append(f"{load}: MoS " + " ".join(f"{a}={v:.3f}" for a, v in mos.items())
                     + " | drop " + " ".join(f"{a}={v:.4f}" for a, v in drop.items()))
    return CheckResult("scheduler_ordering", "ordering", bool(ok), "; ".join(parts))


def check_sla() -> CheckResult:
    rows = _all_sweeps()
    viol = sum(r.metrics.sla_violations for r in rows if r.metrics)
    errs = sum(1 for r in rows if r.error)
    return CheckResult("sla_invariant", "sla", viol == 0 and errs == 0,
                       f"{len(rows)} runs, {viol} clients below floor, {errs} failed runs")


def check_budget() -> CheckResult:
    rows = [r.metrics for r in _all_sweeps() if r.metrics]
    prbs = max(m.max_cell_prbs for m in rows)
    over = max(m.max_epon_overshoot for m in rows)
    ident = max(m.max_excess_identity_error for m in rows)
    ok = prbs <= 100 and over <= 1e-6 and ident <= 1e-6
    return CheckResult("budget_conservation", "budget", ok,
                       f"max cell PRBs {prbs}, max EPON overshoot {over:.3g} Mbps, "
                       f"max excess identity error {ident:.3g} Mbps")


def check_eara_vs_hpf() -> CheckResult:
    rows = _sweep(("high",), ("eara", "hpf"))
    mean = {a: {lv: float(np.nanmean([m.wired[lv].mean_mos for m in _by(rows, "high", a)])) for lv in (1, 2, 3)}
            for a in ("eara", "hpf")}
    ok = mean["eara"][1] > mean["hpf"][1] and mean["hpf"][3] >= mean["eara"][3]
    return CheckResult("eara_vs_hpf", "epon", ok,
                       " ".join(f"{a}: " + ",".join(f"t{lv}={v:.3f}" for lv, v in d.items()) for a, d in mean.items()))


def check_apps() -> CheckResult:
    sk = _by(_sweep(("medium", "high"), ("mrr", "wf", "mckp")), "high", "mckp")
    gp = _by(_sweep(("high",), ("mckp",), "googleplus"), "high", "mckp")
    sk_mos = statistics.fmean(m.mean_cumulative_mos for m in sk)
    gp_mos = statistics.fmean(m.mean_cumulative_mos for m in gp)
    sk_drop = statistics.fmean(m.mean_cumulative_call_drop for m in sk)
    gp_drop = statistics.fmean(m.mean_cumulative_call_drop for m in gp)
    ok = gp_mos >= sk_mos and gp_drop <= sk_drop
    return CheckResult("googleplus_vs_skype", "apps", ok,
                       f"MoS googleplus={gp_mos:.3f} skype={sk_mos:.3f}; "
                       f"drop googleplus={gp_drop:.4f} skype={sk_drop:.4f}")


def runtime_instance(seed=7, n=15, total_choices=427, budget=100):
    rng = np.random.default_rng(seed)
    sizes = [total_choices // n + (1 if i < total_choices % n else 0) for i in range(n)]
    tables = []
    for i, k in enumerate(sizes):
        weights = np.sort(rng.choice(np.arange(1, 40), size=k, replace=False))
        profits = np.sort(rng.uniform(0.0, 1.8, size=k))
        profits[0] = 0.0
        tables.append(ChoiceTable.from_pairs(zip(weights.tolist(), profits.tolist()), ue_id=i))
    return tables, budget


def check_runtime(repeats=51) -> CheckResult:
    tables, budget = runtime_instance()
    n_choices = sum(len(t.choices) for t in tables)
    mckp_allocate(tables, budget, 0.1)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        mckp_allocate(tables, budget, 0.1)
        times.append(time.perf_counter() - t0)
    med = statistics.median(times) * 1e3
    return CheckResult("mckp_runtime", "runtime", med < 10.0 and n_choices == 427,
                       f"N={n_choices}, n={len(tables)}, eps=0.1: median {med:.2f} ms")


def check_determinism() -> CheckResult:
    cfgs = [acceptance_base(load="high", algorithm_wireless=a, algorithm_epon=e, seed=3, ttis=5)
            for a, e in (("mrr", "eara"), ("wf", "hpf"), ("mckp", "eara"))]
    same = all(metrics_csv([("r", run(c))]) == metrics_csv([("r", run(c))]) for c in cfgs)
    return CheckResult("determinism", "determinism", same, f"{len(cfgs)} configs re-run, identical CSV: {same}")


CHECKS = (
    ("ladder", check_ladder),
    ("zero_drop", check_zero_drop),
    ("mckp", check_mckp_exact),
    ("mckp", check_fptas_bound),
    ("ordering", check_scheduler_ordering),
    ("sla", check_sla),
    ("budget", check_budget),
    ("epon", check_eara_vs_hpf),
    ("apps", check_apps),
    ("runtime", check_runtime),
    ("determinism", check_determinism),
)

GROUPS = tuple(dict.fromkeys(g for g, _ in CHECKS))


def run_checks(only=None, echo=print) -> list[CheckResult]:
    results = []
    for group, fn in CHECKS:
        if only and group != only:
            continue
        res = fn()
        results.append(res)
        if echo:
            echo(res.line())
    return results
