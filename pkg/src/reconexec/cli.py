"""Command-line entry point: run scenarios, fit the reconfiguration model, print work-model speedups."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

from .clock import MS
from .fabric import DegenerateFit, fit_model
from .scenario import (
    MAPPINGS,
    ConfigError,
    events_csv,
    format_duration,
    load_config,
    parse_duration,
    results_csv,
    run_scenario,
    summarize,
)
from .workloads import builtin_workloads

log = logging.getLogger("reconexec")


class CliError(Exception):
    pass


def _duration(text: str) -> int:
    try:
        return parse_duration(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.scenario)
    cfg = cfg.with_overrides(seed=args.seed, duration=args.duration)
    result = run_scenario(cfg, mapping=args.mapping, backend=args.backend, time_scale=args.time_scale)
    if args.out:
        _write(args.out, results_csv(result.roundtrips))
    if args.events:
        _write(args.events, events_csv(result.executions))

    stats = summarize(result.roundtrips, args.bin_width, clients=[c.name for c in cfg.clients])
    print(f"# mapping={result.mapping} backend={result.backend} duration={format_duration(cfg.duration)} "
          f"reconfigurations={result.reconfigurations}")
    print("client,count,mean_ms,min_ms,max_ms")
    for name, s in stats.items():
        print(f"{name},{s.count},{s.mean / MS:.3f},{s.min / MS:.3f},{s.max / MS:.3f}")
    return 0


def read_samples(path: str) -> list[tuple[int, float]]:
    """Read ``size_bytes,time_ms`` rows; a non-numeric first row is taken as a header."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    samples = []
    for i, row in enumerate(rows, 1):
        if len(row) != 2:
            raise CliError(f"{path}:{i}: expected 2 columns (size_bytes,time_ms), got {len(row)}")
        try:
            samples.append((int(row[0]), float(row[1])))
        except ValueError:
            if i == 1:
                continue
            raise CliError(f"{path}:{i}: non-numeric row {row}") from None
    return samples


def cmd_fit(args: argparse.Namespace) -> int:
    model = fit_model(read_samples(args.samples))
    print("t_offset_ms,bandwidth_MBps")
    print(f"{model.t_offset_ms:.2f},{model.bandwidth_mbps:.1f}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    print("callback,t_exec_hw_ms,t_exec_sw_ms,speedup")
    for w in builtin_workloads():
        print(f"{w.title},{w.hw_exec / MS:.2f},{w.sw_exec / MS:.2f},{w.speedup:.1f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reconexec", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="log executor decisions")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a client/server scenario")
    run.add_argument("--scenario", required=True, help="scenario file (bundled names are also accepted)")
    run.add_argument("--mapping", choices=MAPPINGS, default=None, help="override the file's mapping")
    run.add_argument("--backend", choices=("sim", "threads"), default="sim")
    run.add_argument("--duration", type=_duration, default=None, help="scenario time, e.g. 20s")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="write per-roundtrip results CSV here")
    run.add_argument("--events", default=None, help="write the per-execution event log CSV here")
    run.add_argument("--time-scale", type=float, default=0.01,
                     help="real seconds per scenario second for the threaded backend (default: 0.01)")
    run.add_argument("--bin-width", type=_duration, default=1 * MS, help="histogram bin width")
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit-reconfig", help="least-squares fit of reconfiguration time vs. bitstream size")
    fit.add_argument("--samples", required=True, help="CSV of size_bytes,time_ms rows")
    fit.set_defaults(func=cmd_fit)

    bench = sub.add_parser("bench-callbacks", help="print SW/HW execution times and speedups")
    bench.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ConfigError, DegenerateFit, OSError, ValueError) as exc:
        print(f"reconexec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
