"""Command-line entry points for the campaign workbench."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from . import pipeline

_STAGES = {
    "synth": pipeline.stage_synth,
    "extract": pipeline.stage_extract,
    "features": pipeline.stage_features,
    "localize": pipeline.stage_localize,
    "report": pipeline.stage_report,
    "figdata": pipeline.stage_figdata,
    "pipeline": pipeline.stage_pipeline,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risloc",
        description="Synthesize sweep acquisitions, extract multipath features, "
        "and solve the RIS-aided positioning scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("validate", "check a config file and print a summary"),
        ("synth", "run the sweeps and write channel containers"),
        ("extract", "run SAGE on stored containers, write sweeps.csv and mpcs.csv"),
        ("features", "build per-(UE, anchor) features from extraction outputs"),
        ("localize", "solve the configured scenarios, write results.csv"),
        ("report", "aggregate results into the error table"),
        ("figdata", "emit plot-ready CSV analogues of the campaign figures"),
        ("pipeline", "run all stages in order"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="YAML config (default: built-in campaign)")
        p.add_argument("--out", type=Path, default=None, help="override the output directory")
        p.add_argument("--seed", type=int, default=None, help="override the campaign seed")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers for extraction")
        if name in ("localize", "report", "pipeline"):
            p.add_argument("--scenario", action="append", default=None, help="restrict to one scenario id (repeatable)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs is not None:
            cfg.jobs = args.jobs
        if getattr(args, "scenario", None):
            unknown = [s for s in args.scenario if s not in cfg.scenarios]
            if unknown:
                raise ConfigError(f"unknown scenario ids: {unknown}")
            cfg.scenarios = list(args.scenario)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"risloc {args.command}: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        scene = cfg.scene
        print(f"config ok: {len(scene.ue_truths)} UE, {len(scene.ris_list)} RIS, "
              f"{scene.sweep.n_angles} pointing angles, {cfg.grid.n_freq} frequency bins, "
              f"{len(cfg.scenarios)} scenarios, seed {cfg.seed}")
        return 0

    try:
        _STAGES[args.command](cfg)
    except Exception as exc:  # surface the failing stage in the diagnostic
        print(f"risloc {args.command}: {exc}", file=sys.stderr)
        return 1
    print(f"risloc {args.command}: done (outputs in {cfg.out_dir})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
