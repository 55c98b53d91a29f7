"""Command line entry points.

Subcommands: simulate (one configuration), sweep (messages or SNR grid),
analyze (closed forms only), bound (informed-transmitter bound only), and
verify (quick oracle-equivalence self-checks).  Exit codes: 0 success,
1 verification failure, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import informed, runstats
from .channel import (
    ChannelParams,
    decode_success_prob,
    mean_capacity,
    mean_capacity_closed_form,
    sample_capacity_matrix,
    window_decode_prob,
)
from .engine import evaluate_ets, evaluate_pb
from .errors import ConfigError, NumericFailure
from .experiments import (
    ExperimentConfig,
    analytic_rows,
    emit_csv,
    emit_svg,
    parse_config,
    parse_scheme_token,
    render_csv,
    run_experiment,
)

_DEFAULTS = dict(
    snr_db=-5.0,
    rate=1.0,
    messages=40,
    trials=10_000,
    seed=12345,
    threads=1,
    schemes="mt,ets,pb,twts,dwts",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamfade",
        description="Throughput and inter-decoding delay of streaming over block fading",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="INI experiment file")
        p.add_argument("--out-csv", metavar="PATH", help="write the result table here")
        p.add_argument("--out-svg", metavar="PATH", help="write a line chart here")
        p.add_argument("--trials", type=int, metavar="N")
        p.add_argument("--seed", type=int, metavar="U64")
        p.add_argument("--threads", type=int, metavar="N")
        p.add_argument("--scheme", metavar="NAME[,NAME...]", help="scheme tokens, e.g. mt,pb:8,twts")
        p.add_argument("--snr-db", type=float, metavar="X")
        p.add_argument("--rate", type=float, metavar="R")
        p.add_argument("--messages", type=int, metavar="M")

    p_sim = sub.add_parser("simulate", help="run one configuration")
    add_common(p_sim)

    p_sweep = sub.add_parser("sweep", help="sweep messages or SNR")
    add_common(p_sweep)
    p_sweep.add_argument("--variable", choices=("messages", "snr_db"), default="messages")
    p_sweep.add_argument("--values", metavar="V1,V2,...", help="sweep grid (defaults per variable)")

    p_an = sub.add_parser("analyze", help="closed forms only, no sampling")
    add_common(p_an)
    p_an.add_argument("--windows", default="2,3,5", metavar="B1,B2,...")

    p_bound = sub.add_parser("bound", help="informed-transmitter bound only")
    add_common(p_bound)

    p_ver = sub.add_parser("verify", help="run the oracle-equivalence self checks")
    p_ver.add_argument("--seed", type=int, default=2025)
    return parser


def _config_from_args(args, sweep_variable=None, sweep_values=None) -> ExperimentConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            base = parse_config(fh.read())
        fields = dict(
            snr_db=base.snr_db,
            rate=base.rate,
            messages=base.messages,
            schemes=base.schemes,
            include_it_bound=base.include_it_bound,
            trials=base.trials,
            seed=base.seed,
            threads=base.threads,
            sweep_variable=base.sweep_variable,
            sweep_values=base.sweep_values,
            csv_path=base.csv_path,
            svg_path=base.svg_path,
        )
    else:
        fields = dict(
            snr_db=_DEFAULTS["snr_db"],
            rate=_DEFAULTS["rate"],
            messages=_DEFAULTS["messages"],
            schemes=tuple(
                parse_scheme_token(t) for t in _DEFAULTS["schemes"].split(",")
            ),
            include_it_bound=True,
            trials=_DEFAULTS["trials"],
            seed=_DEFAULTS["seed"],
            threads=_DEFAULTS["threads"],
            sweep_variable=None,
            sweep_values=None,
            csv_path=None,
            svg_path=None,
        )
    if args.snr_db is not None:
        fields["snr_db"] = args.snr_db
    if args.rate is not None:
        fields["rate"] = args.rate
    if args.messages is not None:
        fields["messages"] = args.messages
    if args.trials is not None:
        fields["trials"] = args.trials
    if args.seed is not None:
        fields["seed"] = args.seed
    if args.threads is not None:
        fields["threads"] = args.threads
    if args.scheme:
        fields["schemes"] = tuple(
            parse_scheme_token(t) for t in args.scheme.split(",") if t.strip()
        )
    if args.out_csv:
        fields["csv_path"] = args.out_csv
    if getattr(args, "out_svg", None):
        fields["svg_path"] = args.out_svg
    if sweep_variable is not None:
        fields["sweep_variable"] = sweep_variable
        fields["sweep_values"] = sweep_values
    return ExperimentConfig(**fields)


def _write_outputs(rows, config, default_metric="throughput"):
    if config.csv_path:
        emit_csv(rows, config.csv_path)
    else:
        sys.stdout.write(render_csv(rows))
    if config.svg_path:
        emit_svg(rows, config.svg_path, metric=default_metric)


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    rows = run_experiment(config)
    _write_outputs(rows, config)
    return 0


def _default_sweep(variable: str):
    if variable == "messages":
        return tuple(range(1, 65))
    return tuple(float(v) for v in range(-10, 16))


def _cmd_sweep(args) -> int:
    values = None
    if args.values:
        try:
            floats = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad sweep values {args.values!r}", "sweep.values")
        values = (
            tuple(int(v) for v in floats) if args.variable == "messages" else tuple(floats)
        )
    config = _config_from_args(args, args.variable, values or _default_sweep(args.variable))
    rows = run_experiment(config)
    _write_outputs(rows, config)
    return 0


def _cmd_analyze(args) -> int:
    config = _config_from_args(args)
    try:
        windows = tuple(int(w) for w in args.windows.split(",") if w.strip())
    except ValueError:
        raise ConfigError(f"bad window list {args.windows!r}", "windows")
    rows = analytic_rows(config, windows)
    _write_outputs(rows, config)
    return 0


def _cmd_bound(args) -> int:
    config = _config_from_args(args)
    fields = dict(config.__dict__)
    fields.update(schemes=(), include_it_bound=True)
    config = ExperimentConfig(**fields)
    rows = run_experiment(config)
    _write_outputs(rows, config)
    return 0


def _cmd_verify(args) -> int:
    """Fast oracle-equivalence suite; prints one PASS/FAIL line per check."""
    seed = args.seed
    failures = 0

    def report(name, ok):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures += 1

    # Run-length triangle: enumeration == matrix power == partial fractions.
    worst = 0.0
    for m in range(2, 11):
        for p in (0.1, 0.3, 0.5, 0.7, 0.9):
            enum = runstats.enumerate_run_tails(m, p)
            for d in range(1, m + 1):
                mat = runstats.run_tail_matrix_power(m, p, d)
                pf = runstats.run_tail_partial_fraction(m, p, d)
                worst = max(worst, abs(enum[d - 1] - mat), abs(enum[d - 1] - pf))
    report(f"run-length triangle (worst dev {worst:.2e})", worst < 1e-9)

    # Greedy + delay minimization against the exhaustive subset oracle.
    ok = True
    trial = 0
    for snr in (-5.0, 0.0, 5.0):
        for m in range(2, 11):
            params = ChannelParams(snr_db=snr, rate=1.0, blocks=m)
            for _ in range(12):
                caps = sample_capacity_matrix(params, seed, trial, trial + 1)[0]
                trial += 1
                count, delay = informed.informed_trial(caps, 1.0)
                ok = ok and (count, delay) == informed.oracle_exhaustive(caps, 1.0)
    report("informed-transmitter bound vs exhaustive oracle", ok)

    # Channel closed forms.
    devs = []
    for snr in (-5.0, 0.0, 5.0, 10.0):
        params = ChannelParams(snr_db=snr, rate=1.0, blocks=1)
        devs.append(abs(mean_capacity(params) - mean_capacity_closed_form(params)))
        devs.append(abs(window_decode_prob(params, 1) - decode_success_prob(params)))
    report(f"capacity closed forms (worst dev {max(devs):.2e})", max(devs) < 1e-8)

    # Per-realization scheme identities.
    params = ChannelParams(snr_db=-5.0, rate=1.0, blocks=24)
    caps = sample_capacity_matrix(params, seed, 0, 4000)
    c_ets, d_ets = evaluate_ets(caps, 1.0)
    c_pb, d_pb = evaluate_pb(caps, 1.0, 9)
    report(
        "equal-share and pre-buffering delay identities",
        bool(np.all(d_ets == 24 - c_ets) and np.all(d_pb == 24 - c_pb)),
    )
    print("all checks passed" if failures == 0 else f"{failures} check(s) failed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "analyze": _cmd_analyze,
        "bound": _cmd_bound,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
