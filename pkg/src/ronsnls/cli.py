"""Command-line entry point: ``ronsnls run`` and ``ronsnls list``."""

from __future__ import annotations

import argparse
import sys

from . import experiments as ex


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ronsnls", description="Reduced-order models for NLS and MNLS wave envelopes.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, metavar="PATH", help="config file or bundled config name (e.g. fig3)")
    run.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key; repeatable")
    run.add_argument("--output", metavar="DIR", help="output directory (default: output.dir from the config)")
    run.add_argument("--threads", type=int, metavar="N", help="worker processes for sweeps")

    sub.add_parser("list", help="list bundled experiment configs")
    return parser


def cmd_list() -> int:
    entries = ex.list_experiments()
    width = max(len(e.name) for e in entries)
    for e in entries:
        print(f"{e.name:<{width}}  {e.experiment:<17}  {e.description}")
    return ex.EXIT_OK


def cmd_run(args) -> int:
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return ex.EXIT_CONFIG
    try:
        cfg = ex.load_config(args.config, args.overrides)
    except ex.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ex.EXIT_CONFIG
    result = ex.run_experiment(cfg, args.output, args.threads)
    print(result.summary)
    for e in result.events:
        print(f"event: {e}", file=sys.stderr)
    print(f"outputs written to {result.outputs[-1].parent}")
    return result.status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
