"""Command-line entry point.

Exit codes: 0 success, 2 configuration or CSV-format error, 3 numeric
failure (blow-up, eigensolver failure, singular response, heading
singularity).
"""

import argparse
import sys
from pathlib import Path

from .config import parse_config
from .errors import ConfigError, ConstructionError, CsvFormatError, FlockError
from .experiments import run, run_preset
from .plots import plot_csv

PLOT_KINDS = ("spacetime", "response", "spectrum")


def build_parser():
    p = argparse.ArgumentParser(prog="flocklab", description="flock dynamics laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a TOML config")
    p_run.add_argument("config", help="path to the experiment file")

    p_pre = sub.add_parser("preset", help="run a built-in experiment set")
    p_pre.add_argument("name", choices=("fig2", "fig3", "fig4", "turn"))
    p_pre.add_argument("--out", default=None, help="output directory (default runs/<name>)")
    p_pre.add_argument("--scale", type=int, default=100, help="chain length for fig presets")

    p_plot = sub.add_parser("plot", help="render an SVG from a CSV artifact")
    p_plot.add_argument("csv", help="input CSV path")
    p_plot.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p_plot.add_argument("--out", default=None, help="output SVG (default: CSV path with .svg)")
    return p


def _cmd_run(args):
    cfg = parse_config(args.config)
    outputs, summary, manifest = run(cfg)
    for path in outputs:
        print(path)
    print(manifest)
    return 0


def _cmd_preset(args):
    out_dir = args.out if args.out is not None else str(Path("runs") / args.name)
    if args.scale < 1:
        raise ConfigError(f"--scale must be >= 1, got {args.scale}")
    for outputs, summary, manifest in run_preset(args.name, out_dir, scale=args.scale):
        for path in outputs:
            print(path)
        print(manifest)
    return 0


def _cmd_plot(args):
    out = args.out if args.out is not None else str(Path(args.csv).with_suffix(".svg"))
    plot_csv(args.kind, args.csv, out)
    print(out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "preset": _cmd_preset, "plot": _cmd_plot}[args.command]
    try:
        return handler(args)
    except (ConfigError, CsvFormatError, ConstructionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FlockError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
