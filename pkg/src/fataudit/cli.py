"""Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 data or
validation error, 4 fairness violations with ``--fail-on-violation``,
5 analysis failure.  Diagnostics go to stderr, results to ``--out`` or
stdout.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import __version__, errors, pipeline
from .config import AccountabilitySettings, FairnessSettings, TransparencySettings, load_config
from .dataset import read_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_VIOLATION = 4
EXIT_ANALYSIS = 5


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="input CSV (overrides the config)")
    common.add_argument("--schema", help="schema sidecar file (overrides the config)")
    common.add_argument("--config", help="audit configuration (TOML)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output file (directory for 'research')")
    common.add_argument("--fail-on-violation", action="store_true",
                        help="exit with status 4 if fairness violations are found")

    parser = argparse.ArgumentParser(prog="fataudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    sub.add_parser("validate", parents=[common], help="check data (and config) and print the schema")
    sub.add_parser("fairness", parents=[common], help="fairness section only, as JSON")
    sub.add_parser("accountability", parents=[common], help="accountability section only, as JSON")
    p = sub.add_parser("explain", parents=[common], help="local surrogate explanations, as JSON")
    p.add_argument("--row", type=int, action="append", help="row to explain (repeatable)")
    for name in ("pd", "ice"):
        p = sub.add_parser(name, parents=[common], help=f"{name.upper()} curve table, as CSV")
        p.add_argument("--feature", required=True)
    p = sub.add_parser("report", parents=[common], help="full deployment-mode audit report")
    p.add_argument("--stamp", action="store_true", help="add a generation timestamp")
    p = sub.add_parser("research", parents=[common], help="write plot tables to a directory")
    p.add_argument("--svg", action="store_true", help="also write SVG line charts")
    return parser


def _config(args):
    if not args.config:
        raise errors.ConfigError(f"'{args.command}' needs --config")
    cfg = load_config(args.config)
    changes = {}
    if args.data:
        changes["data"] = args.data
    if args.schema:
        changes["schema"] = args.schema
    if args.seed is not None:
        changes["seed"] = args.seed
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _validate(args) -> int:
    if args.config:
        cfg = _config(args)
        data = pipeline.load_audit_data(cfg)
        d = data.table
    elif args.data:
        d = read_csv(args.data, args.schema)
    else:
        raise errors.ConfigError("'validate' needs --data or --config")
    lines = [f"rows: {d.n_rows}", f"features: {d.n_features}"]
    lines += [f"  {f.name}: {f.kind.value}" for f in d.schema]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _section_report(args, section: str, default) -> int:
    cfg = _config(args)
    if getattr(cfg, section) is None:
        cfg = dataclasses.replace(cfg, **{section: default})
    report = pipeline.run_audit(cfg.only(section))
    _emit(pipeline.dumps(report), args.out)
    return _violation_exit(args, report)


def _violation_exit(args, report) -> int:
    if args.fail_on_violation and report["violations"]["count"] > 0:
        print(f"fataudit: {report['violations']['count']} fairness violation(s)", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _explain(args) -> int:
    cfg = _config(args)
    settings = cfg.transparency or TransparencySettings()
    rows = tuple(args.row) if args.row else settings.surrogate_rows
    if not rows:
        raise errors.EmptyRequest("no rows to explain; pass --row or set transparency.surrogate_rows")
    settings = dataclasses.replace(settings, pd_features=(), ice_features=(), surrogate_rows=rows)
    report = pipeline.run_audit(dataclasses.replace(cfg.only("transparency"), transparency=settings))
    _emit(pipeline.dumps(report), args.out)
    return EXIT_OK


def _curves(args) -> int:
    cfg = _config(args)
    bundle = pipeline.run_research(cfg, [pipeline.Request(args.command, args.feature)])
    (table,) = bundle.tables.values()
    _emit(table.to_csv(), args.out)
    return EXIT_OK


def _report(args) -> int:
    cfg = _config(args)
    report = pipeline.run_audit(cfg, stamp=args.stamp)
    out = args.out or cfg.output
    _emit(pipeline.dumps(report), out)
    return _violation_exit(args, report)


def _research(args) -> int:
    cfg = _config(args)
    if not args.out:
        raise errors.ConfigError("'research' needs --out DIRECTORY")
    bundle = pipeline.run_research(cfg)
    for path in pipeline.write_bundle(bundle, args.out, svg=args.svg):
        print(path, file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "validate": _validate,
    "fairness": lambda a: _section_report(a, "fairness", FairnessSettings()),
    "accountability": lambda a: _section_report(a, "accountability", AccountabilitySettings()),
    "explain": _explain,
    "pd": _curves,
    "ice": _curves,
    "report": _report,
    "research": _research,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except errors.ConfigError as exc:
        print(f"fataudit: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except errors.DataError as exc:
        print(f"fataudit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except errors.AnalysisError as exc:
        print(f"fataudit: analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except OSError as exc:
        print(f"fataudit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 5
        print(f"fataudit: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
