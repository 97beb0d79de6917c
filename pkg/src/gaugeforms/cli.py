"""Command-line front end: ``gaugeforms verify|sweep|list-scenarios|dump-schema``."""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .runner import CONFIG_SCHEMA, REPORT_SCHEMA, ConfigError, ScenarioConfig, convergence_sweep, run_suite
from .scenarios import SCENARIOS


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaugeforms", description="Verify characteristic-form identities on tori.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("verify", "run every check of a scenario"),
                           ("sweep", "refinement study over the configured resolutions")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config", help="YAML scenario config")
        s.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
        s.add_argument("--output", help="write the JSON report here")
        s.add_argument("--seed", type=int, help="override the config seed")
    sub.add_parser("list-scenarios", help="show scenarios, their checks and defaults")
    d = sub.add_parser("dump-schema", help="print the JSON schemas of configs and reports")
    d.add_argument("--output", help="write the schema here instead of stdout")
    return p


def _list_scenarios() -> str:
    lines = []
    for s in SCENARIOS.values():
        lines.append(f"{s.name}: {s.description}")
        for c in s.checks:
            crit = f" [criterion {c.criterion}]" if c.criterion is not None else ""
            lines.append(f"    {c.id}{crit}: {c.summary} (tol {c.tolerance:g})")
        lines.append(f"    sweep: {s.sweep_label if s.sweep else 'none'}")
        lines.append(f"    default params: {json.dumps(s.defaults.get('params', {}), sort_keys=True)}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        print(_list_scenarios())
        return 0
    if args.command == "dump-schema":
        text = json.dumps({"config": CONFIG_SCHEMA, "report": REPORT_SCHEMA}, indent=2, sort_keys=True) + "\n"
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = ScenarioConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        report = run_suite(cfg, args.threads) if args.command == "verify" else convergence_sweep(cfg, args.threads)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    print(report.summary())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
