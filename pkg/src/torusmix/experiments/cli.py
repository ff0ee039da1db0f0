"""Command line: ``torusmix list | run <config> | report <results>``."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .report import ReportError, emit_report
from .runner import EXIT_CONFIG, EXIT_OK, run_scenario
from .scenarios import list_scenarios


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torusmix", description="Random toral dynamics experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list builtin scenarios")
    run = sub.add_parser("run", help="run a scenario config (a JSON file, or a builtin name)")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    run.add_argument("--out", default=None, help="output directory (default: config 'out' or ./out)")
    rep = sub.add_parser("report", help="summarize a results.json and (re)draw its plots")
    rep.add_argument("results")
    rep.add_argument("--out", default=None, help="directory for the SVG files")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, desc in list_scenarios():
            print(f"{name:22s} {desc}")
        return EXIT_OK
    if args.command == "run":
        names = dict(list_scenarios())
        if args.config in names:
            cfg = {"scenario": args.config}
        else:
            try:
                cfg = load_config(args.config)
            except ConfigError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
        return run_scenario(cfg, args.out, seed=args.seed, threads=args.threads,
                            log=lambda m: print(m, file=sys.stderr if m.startswith("error") else sys.stdout))
    try:
        text = emit_report(args.results, args.out)
    except ReportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if text:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
