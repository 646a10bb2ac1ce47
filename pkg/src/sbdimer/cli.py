"""Command-line entry point: ``sbdimer <subcommand> --config FILE --out DIR``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import SWEEP_AXES, RunConfig, _value_list, load_config
from .errors import ConfigError, PipelineError
from .pipeline import STAGES, run_pipeline, sweep

SUBCOMMANDS = {
    "spectrum": ("spectrum",),
    "bloch": ("bloch",),
    "adiabatic": ("adiabatic",),
    "husimi": ("husimi",),
    "absorb": ("absorb",),
    "ratio": ("ratio",),
    "all": STAGES,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    common.add_argument("--out", help="output directory (overrides the config's 'out')")
    common.add_argument("--cache", help="directory for cached eigensystems")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="sbdimer",
                                 description="Spin-boson dimer spectra, phase-space projections and absorption bands")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    sp = sub.add_parser("sweep", parents=[common])
    sp.add_argument("--axis", choices=SWEEP_AXES, help="overrides sweep_axis")
    sp.add_argument("--values", help="comma-separated values (inf allowed for mu_ratio)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        out = args.out or cfg.out
        if args.command == "sweep":
            axis = args.axis or cfg.sweep_axis
            values = _value_list(args.values) if args.values else cfg.sweep_values
            if not axis or not values:
                raise ConfigError("sweep needs an axis and at least one value", key="sweep_axis")
            results = sweep(cfg, axis, values, out, cache_dir=args.cache)
            failed = {k: v for k, v in results.items() if isinstance(v, Exception)}
            for k, v in failed.items():
                print(f"sbdimer: sweep point {k} failed: {v}", file=sys.stderr)
            return 1 if failed else 0
        manifest = run_pipeline(cfg, out, SUBCOMMANDS[args.command], cache_dir=args.cache)
    except ConfigError as exc:
        print(f"sbdimer: [config] {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"sbdimer: [config] {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"sbdimer: {exc}", file=sys.stderr)
        return 1
    for name in sorted(manifest):
        print(name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
