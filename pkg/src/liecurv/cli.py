"""Command-line entry point: ``liecurv run | catalog | suite``.

Exit codes: 0 when every asserted verdict passes, 1 on input errors,
2 when a verdict fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from liecurv import catalog, scenario
from liecurv.errors import LieCurvError, SchemaError
from liecurv.matrixgroup import family_listing
from liecurv.suite import SUITES, run_suite, summary_rows

EXIT_OK, EXIT_INPUT, EXIT_VERDICT = 0, 1, 2


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.3e}"
    return str(x)


def _headline(result: dict) -> str:
    keys = [k for k, v in result.items() if isinstance(v, (bool, int, float, str)) or v is None]
    return ", ".join(f"{k}={_fmt(result[k])}" for k in keys[:6])


def render_run_text(report: dict, timings: list[float]) -> str:
    scn = report["scenario"]
    lines = [f"scenario: {scn.get('name', '<unnamed>')}  (algebra {scn['algebra'] if isinstance(scn['algebra'], str) else 'inline'}, "
             f"target {scn['target']}, seed {report['seed']})"]
    for entry, t in zip(report["checks"], timings):
        detail = entry["error"]["type"] + ": " + entry["error"]["message"] if "error" in entry else _headline(entry.get("result", {}))
        lines.append(f"  {entry['verdict'].upper():5s} {entry['name']:20s} {detail}  [{t * 1e3:.1f} ms]")
    lines.append("PASSED" if report["passed"] else "FAILED")
    return "\n".join(lines)


def render_suite_text(report: dict, elapsed: float) -> str:
    lines = [f"suite {report['suite']} (seed {report['seed']}, version {report['toolkit_version']})",
             f"{'#':>3}  {'check':52s} {'germs':>6} {'max residual':>13}  verdict"]
    for num, title, germs, res, verdict in summary_rows(report):
        lines.append(f"{num:>3}  {title:52s} {germs:>6} {_fmt(res):>13}  {verdict}")
    lines.append(f"{'ALL PASS' if report['passed'] else 'FAILURES'} in {elapsed:.1f} s")
    return "\n".join(lines)


def cmd_run(args) -> int:
    scn = scenario.load(args.file)
    timings: list[float] = []
    report = scenario.run(scn, seed=args.seed, tol_fd=args.tol_fd, timings=timings)
    print(render_json(report) if args.json else render_run_text(report, timings))
    return EXIT_OK if report["passed"] else EXIT_VERDICT


def cmd_catalog(args) -> int:
    show_all = not (args.algebras or args.families or args.scenarios)
    if args.algebras or show_all:
        print("algebras:")
        for line in catalog.listing():
            print(f"  {line}")
        print("metrics: default, identity, killing, or an inline Gram matrix")
    if args.families or show_all:
        print("immersion families:")
        for line in family_listing():
            print(f"  {line}")
    if args.scenarios or show_all:
        print("bundled scenarios:")
        for name in scenario.bundled():
            print(f"  {name}")
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.name not in SUITES:
        raise SchemaError(f"unknown suite {args.name!r}; known: {', '.join(SUITES)}")
    start = time.perf_counter()
    report = run_suite(args.name, args.seed)
    elapsed = time.perf_counter() - start
    print(render_json(report) if args.json else render_suite_text(report, elapsed))
    return EXIT_OK if report["passed"] else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liecurv", description="Curvature of Lie groups with bi-invariant metrics.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("file")
    r.add_argument("--json", action="store_true", help="print the JSON report")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--tol-fd", type=float, default=None, help="override the finite-difference verdict tolerance")
    r.set_defaults(func=cmd_run)
    c = sub.add_parser("catalog", help="list algebras, immersion families and bundled scenarios")
    c.add_argument("--algebras", action="store_true")
    c.add_argument("--families", action="store_true")
    c.add_argument("--scenarios", action="store_true")
    c.set_defaults(func=cmd_catalog)
    s = sub.add_parser("suite", help="run a verification battery")
    s.add_argument("name")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (json.JSONDecodeError, KeyError) as exc:
        # malformed LIECURV_TOL_OVERRIDE or an unknown tolerance name
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LieCurvError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERDICT


if __name__ == "__main__":
    sys.exit(main())
