"""Command-line front end.

Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 infeasible scenario.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace

from . import qoe
from .errors import ConfigError, DomainError, InfeasibleError, InfeasibleSlaError, QoeSimError
from .simulator import (DEFAULT_LOADS, EPON_ALGORITHMS, SUMMARY_COLUMNS, WIRELESS_ALGORITHMS,
                        ScenarioConfig, metrics_csv, run, summarize, sweep)
from .verify import GROUPS, run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` so that ``path`` is either complete or untouched."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qoesim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text: str) -> None:
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def load_config(args) -> ScenarioConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    cfg = ScenarioConfig.from_dict(data)
    over = {}
    for flag, key in (("seed", "seed"), ("load", "load"), ("wireless", "algorithm_wireless"),
                      ("epon", "algorithm_epon"), ("epsilon", "epsilon"), ("app", "app"),
                      ("ttis", "ttis")):
        v = getattr(args, flag, None)
        if v is not None:
            over[key] = v
    return replace(cfg, **over) if over else cfg


def cmd_profiles(args) -> int:
    app = qoe.get_application(args.app)
    if args.no_bounds:
        app = replace(app, enforce_bounds=False)
    buf = io.StringIO()
    qoe.write_profiles_csv(qoe.build_profile_table(app, fec=args.fec), buf)
    _emit(args, buf.getvalue())
    return EXIT_OK


def _print_type_table(m, out=sys.stderr):
    print(f"{'domain':<9} {'type':>4} {'mean MoS':>9} {'call drop':>10} {'blocked':>8}", file=out)
    for domain, stats in (("wireless", m.wireless), ("wired", m.wired)):
        for key, s in stats.items():
            mos = "-" if s.samples == 0 else f"{s.mean_mos:.3f}"
            drop = "-" if s.samples == 0 else f"{s.mean_call_drop:.4f}"
            print(f"{domain:<9} {key!s:>4} {mos:>9} {drop:>10} {s.blocked:>8}", file=out)
    print(f"cumulative wireless MoS per TTI: {m.mean_cumulative_mos:.3f}", file=out)


def cmd_run(args) -> int:
    cfg = load_config(args)
    m = run(cfg)
    _emit(args, metrics_csv([("0", m)]))
    _print_type_table(m)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    loads = args.loads.split(",") if args.loads else [cfg.load]
    algs = args.algorithms.split(",") if args.algorithms else [cfg.algorithm_wireless]
    first = cfg.seed
    seeds = list(range(first, first + args.seeds))
    rows = sweep(cfg, loads, algs, seeds, workers=args.workers)
    done = [(r.run_id, r.metrics) for r in rows if r.metrics is not None]
    text = metrics_csv(done)
    _emit(args, text)
    for r in rows:
        if r.error:
            print(f"run {r.run_id} failed: {r.error}", file=sys.stderr)
    if args.summary:
        buf = io.StringIO()
        w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in summarize(rows):
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
        write_atomic(args.summary, buf.getvalue())
    return EXIT_OK if done else EXIT_INFEASIBLE


def cmd_verify(args) -> int:
    results = run_checks(only=args.only)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qoesim", description="QoE-aware OFDMA + EPON resource allocation simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("profiles", help="dump an application's profile table as CSV")
    pr.add_argument("--app", default="skype")
    pr.add_argument("--fec", type=float, default=qoe.FEC)
    pr.add_argument("--no-bounds", action="store_true", help="ignore the app's rate bounds")
    pr.add_argument("--output")
    pr.set_defaults(func=cmd_profiles)

    def scenario_flags(sp):
        sp.add_argument("--config")
        sp.add_argument("--output")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--load", choices=sorted(DEFAULT_LOADS))
        sp.add_argument("--wireless", choices=WIRELESS_ALGORITHMS)
        sp.add_argument("--epon", choices=EPON_ALGORITHMS)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--app", choices=sorted(qoe.APPLICATIONS))
        sp.add_argument("--ttis", type=int)

    r = sub.add_parser("run", help="run one scenario and write metrics CSV")
    scenario_flags(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a (load x algorithm x seed) grid")
    scenario_flags(s)
    s.add_argument("--seeds", type=int, default=30, help="number of consecutive seeds from --seed")
    s.add_argument("--loads", help="comma-separated loads, e.g. low,medium,high")
    s.add_argument("--algorithms", help="comma-separated, e.g. mrr,wf,mckp or eara,hpf or mckp+hpf")
    s.add_argument("--summary", help="also write mean/stderr summary CSV here")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the bundled acceptance checks")
    v.add_argument("--only", choices=GROUPS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleError, InfeasibleSlaError) as e:
        msg = f"infeasible scenario: {e}"
        if getattr(e, "shortfall", None):
            msg += f" (shortfall {e.shortfall:.3f})"
        print(msg, file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QoeSimError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
