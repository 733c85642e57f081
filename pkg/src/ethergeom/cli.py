"""Command-line harness: ``ethergeom <subcommand> [options]``.

Exit status is 0 when every check passes, 1 when any check fails and 2 for
configuration errors.  Reports are written as ``<subcommand>.json`` and
``<subcommand>.csv`` into the output directory (``--output``, the ``output``
config key, or the ``ETHERGEOM_OUTPUT_DIR`` environment variable, which wins).
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from .checks import CRITERIA, SUBCOMMANDS, ConfigError, RunConfig, holonomy_sweep, run

log = logging.getLogger("ethergeom")

OUTPUT_ENV = "ETHERGEOM_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="ethergeom", description="Numerical verification suites for Ether geometry.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, criteria in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run criteria {', '.join(criteria)}")
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
        p.add_argument("--model", action="append", help="model name (repeatable or comma-separated)")
        p.add_argument("--seed", type=int)
        p.add_argument("--areas", help="comma-separated loop areas for the small-loop sweep")
        p.add_argument("--times", help="comma-separated flow times")
        p.add_argument("--samples", type=int)
        p.add_argument("--paths", type=int)
        p.add_argument("--criterion", action="append", choices=CRITERIA,
                       help="run only this acceptance criterion (repeatable)")
        p.add_argument("--output", help="output directory")
        p.add_argument("--no-write", action="store_true", help="do not write report files")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args):
    cfg = RunConfig()
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = RunConfig.from_text(text, cfg)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = value
    if args.model is not None:
        overrides["models"] = ",".join(args.model)
    for key in ("seed", "areas", "times", "samples", "paths", "output"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = str(value)
    cfg = cfg.with_overrides(overrides)
    if os.environ.get(OUTPUT_ENV):
        cfg = cfg.with_overrides({"output": os.environ[OUTPUT_ENV]})
    return cfg


def write_report(report, cfg, subcommand):
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{subcommand}.json").write_text(report.to_json())
    (out / f"{subcommand}.csv").write_text(report.to_csv())
    if subcommand == "holonomy":
        with open(out / "holonomy_sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "area", "delta", "slope"])
            for model, area, delta, slope in holonomy_sweep(cfg):
                w.writerow([model, f"{area:.6e}", f"{delta:.6e}", f"{slope:.6f}"])
    return out


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        cfg = load_config(args)
        report = run(args.subcommand, cfg, args.criterion)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"configuration error: {exc.args[0]}", file=sys.stderr)
        return 2

    if not args.no_write:
        out = write_report(report, cfg, args.subcommand)
        log.info("reports written to %s", out)
    for crit, ok in sorted(report.criteria_status().items(), key=lambda kv: CRITERIA.index(kv[0])):
        print(f"{crit}: {'PASS' if ok else 'FAIL'}")
    failed = report.worst()
    if failed:
        print("worst offenders:")
        for r in failed:
            print(f"  {r.check_id}  residual={r.residual:.3e} {r.comparison} {r.threshold:.1e}  [{r.eq_tag}]")
    print(f"{len(report.records) - sum(not r.passed for r in report.records)}/{len(report.records)} checks passed")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
