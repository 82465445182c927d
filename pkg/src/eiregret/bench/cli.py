"""Command line entry point: ``run``, ``verify`` and ``plot``.

Exit codes: 0 success, 1 invalid input (bad flags, missing or malformed
files), 2 runtime failure (every trial failed, IO error, failed check).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from eiregret.bench.config import OUT_ENV, ConfigError, ExperimentConfig, load_config
from eiregret.bench.experiment import ExperimentError, run_experiment
from eiregret.bench.io import (
    CsvValidationError,
    read_summary_csv,
    write_simple_regret_csv,
    write_summary_csv,
    write_trace_csv,
    write_trials_csv,
)
from eiregret.bench.plot import emit_plot_svg

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("eiregret")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eiregret", description="GP-EI regret experiments and numerical checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a multi-trial experiment from a config file")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, default=None, help=f"output directory (overrides ${OUT_ENV} and the config)")
    run.add_argument("--parallel", type=int, default=1, help="worker processes (results do not depend on it)")

    ver = sub.add_parser("verify", help="run the randomized lemma, GP and EI checks")
    ver.add_argument("--suite", choices=("all", "lemmas", "gp", "ei"), default="all")
    ver.add_argument("--out", type=Path, default=None, help="directory for the CSV table")

    plot = sub.add_parser("plot", help="plot summary CSVs to an SVG")
    plot.add_argument("--in", dest="inputs", nargs="+", required=True, type=Path)
    plot.add_argument("--out", required=True, type=Path)
    plot.add_argument("--title", default=None)
    return p


def resolve_out_dir(cli_out: Optional[Path], cfg_out: Optional[str]) -> Path:
    """``--out`` wins over ``$EIREGRET_OUT``, which wins over the config value."""
    if cli_out is not None:
        return Path(cli_out)
    env = os.environ.get(OUT_ENV)
    if env:
        return Path(env)
    return Path(cfg_out or "out")


def write_outputs(cfg: ExperimentConfig, results, out_dir: Path) -> list[Path]:
    written = []
    for summary, traces in results:
        stem = out_dir / summary.stem
        ok = [tr for tr in traces if not tr.failed]
        written.append(write_trace_csv(ok, f"{stem}_traces.csv"))
        written.append(write_summary_csv(summary, f"{stem}_summary.csv"))
        written.append(write_trials_csv(summary, f"{stem}_trials.csv"))
        if summary.simple_regret_mean is not None:
            written.append(write_simple_regret_csv(summary, f"{stem}_simple_regret.csv"))
    svg = out_dir / f"{cfg.function}_sigma{cfg.noise_sigma:g}_regret.svg"
    title = f"{cfg.function}, noise sigma {cfg.noise_sigma:g}"
    written.append(emit_plot_svg([s for s, _ in results], svg, title=title))
    return written


def _cmd_run(args) -> int:
    if args.parallel < 1:
        raise ConfigError("--parallel must be at least 1")
    cfg = load_config(args.config)
    out_dir = resolve_out_dir(args.out, cfg.out_dir)
    log.info("running %s (%s), %d trials x %d iterations -> %s", cfg.function,
             ",".join(r.value for r in cfg.incumbents), cfg.trials, cfg.iterations, out_dir)
    results = run_experiment(cfg, parallel=args.parallel)
    for summary, _ in results:
        print(f"{summary.label:<6} final mean R_t/t = {summary.mean[-1]:.6g} "
              f"(+/- {summary.half_width[-1]:.3g}), failed trials: {len(summary.failed)}")
    for path in write_outputs(cfg, results, out_dir):
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from eiregret.verify import format_table, run_suite

    results = run_suite(args.suite)
    print(format_table(results))
    out_dir = resolve_out_dir(args.out, None)
    path = out_dir / f"verify_{args.suite}.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["suite", "check", "probes", "violations", "worst", "status"])
            for r in results:
                w.writerow([r.suite, r.name, r.probes, r.violations, repr(r.worst), r.status()])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    print(f"wrote {path}")
    return EXIT_OK if all(r.passed is not False for r in results) else EXIT_RUNTIME


def _cmd_plot(args) -> int:
    for p in args.inputs:
        if not p.is_file():
            raise ConfigError(f"summary file not found: {p}")
    curves = [read_summary_csv(p) for p in args.inputs]
    print(f"wrote {emit_plot_svg(curves, args.out, title=args.title)}")
    return EXIT_OK


def cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    handler = {"run": _cmd_run, "verify": _cmd_verify, "plot": _cmd_plot}[args.command]
    try:
        return handler(args)
    except (ConfigError, CsvValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ExperimentError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    sys.exit(cli())


if __name__ == "__main__":
    main()
