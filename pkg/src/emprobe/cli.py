"""Command line: ``emprobe run``, ``emprobe validate`` and ``emprobe synth``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import WORKDIR_ENV, ConfigError, config_to_dict, load_config
from .pipeline import EXIT_OK, EXIT_VALIDATION, STAGES, PipelineError, parse_stages, run


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="emprobe",
        description="Handcrafted features versus code embeddings for method-name classification.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run pipeline stages",
                       description=f"Stages, in order: {','.join(STAGES)}. "
                                   f"{WORKDIR_ENV} overrides the configured workdir.")
    r.add_argument("--config", required=True, help="experiment JSON file")
    r.add_argument("--stages", help="comma-separated subset (default: all)")
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key, dotted for nested keys; VALUE parses as JSON")

    v = sub.add_parser("validate", help="check a config without running anything")
    v.add_argument("--config", required=True)
    v.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")

    s = sub.add_parser("synth", help="write the bundled demo corpus, embeddings and config")
    s.add_argument("--out", required=True, help="directory to create")
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if args.command == "synth":
        from .synthetic import write_demo_experiment

        print(write_demo_experiment(args.out, seed=args.seed))
        return EXIT_OK

    try:
        cfg = load_config(args.config, args.overrides)
        cfg.check_paths()
    except ConfigError as exc:
        print(f"emprobe: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "validate":
        print(json.dumps(config_to_dict(cfg), indent=2))
        return EXIT_OK

    try:
        stages = parse_stages(args.stages)
    except PipelineError as exc:
        print(f"emprobe: {exc}", file=sys.stderr)
        return exc.exit_code
    report = run(cfg, stages)
    print(report.to_json())
    if report.exit_code != EXIT_OK:
        print(f"emprobe: {report.error}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
