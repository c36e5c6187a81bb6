"""Command-line front end: ``modalqm {run,verify,list}``.

Exit codes: 0 success, 1 a pass/fail check failed, 2 usage or config error.
Reports are deterministic JSON (sorted keys, no timestamps); curves are CSV
with a header row of ``column [unit]`` names, LF line endings and UTF-8.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from .scenarios import REGISTRY, SCHEMA_VERSION, ScenarioConfig, run_scenario, to_jsonable
from .verify import SUITES, run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
OUT_ENV = "MODALQM_OUT_DIR"
INFO_KEYS = {"description", "required"}


class ConfigError(ValueError):
    pass


def parse_config(data, *, scenario: str | None = None) -> ScenarioConfig:
    """Build a ScenarioConfig from a JSON-compatible mapping."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    allowed = {"name", "scenario", "parameters", "tolerances", "seed"} | INFO_KEYS
    extra = set(data) - allowed
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    name = scenario or data.get("name") or data.get("scenario")
    if not name:
        raise ConfigError("config names no scenario")
    params = data.get("parameters", {})
    tols = data.get("tolerances", {})
    if not isinstance(params, dict) or not isinstance(tols, dict):
        raise ConfigError("parameters and tolerances must be objects")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    return ScenarioConfig(str(name), dict(params), {str(k): float(v) for k, v in tols.items()}, seed)


def load_config(path: str | None, scenario: str | None) -> ScenarioConfig:
    if path is None:
        if scenario is None:
            raise ConfigError("give --scenario or --config")
        return ScenarioConfig(scenario)
    try:
        text = Path(path).read_text(encoding="utf-8")
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data, scenario=scenario)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if not isinstance(x, (str, bool)) else x for x in r])
    return buf.getvalue()


def curve_csv(curve) -> str:
    header = [f"{c} [{u}]" for c, u in zip(curve.columns, curve.units)]
    return _csv(header, curve.rows.tolist())


def checks_csv(report) -> str:
    rows = []
    for c in report.checks:
        v = c.value
        rows.append([c.name, json.dumps(to_jsonable(v)), repr(float(c.tolerance)), c.relation, str(c.passed).lower()])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "value", "tolerance", "relation", "passed"])
    w.writerows(rows)
    return buf.getvalue()


def _output_path(out: str | None, default_name: str) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(OUT_ENV, ".")) / default_name


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, args.scenario)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.name not in REGISTRY:
        print(f"error: unknown scenario {cfg.name!r}; see 'modalqm list'", file=sys.stderr)
        return EXIT_USAGE
    seed = args.seed if args.seed is not None else cfg.seed
    try:
        report = run_scenario(cfg.name, cfg.parameters, seed=seed, tol_scale=args.tolerance_scale,
                              tolerances=cfg.tolerances)
    except (TypeError, ValueError, KeyError) as exc:
        print(f"error: invalid configuration for {cfg.name}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ext = "csv" if args.format == "csv" else "json"
    path = _output_path(args.out, f"{cfg.name}.{ext}")
    _write_text(path, checks_csv(report) if args.format == "csv" else dumps(report.to_dict()))
    for name, curve in sorted(report.curves.items()):
        _write_text(path.with_name(f"{path.stem}_{name}.csv"), curve_csv(curve))
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {cfg.name}.{c.name}")
    print(f"report written to {path}")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_verify(args) -> int:
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    results = run_suite(args.suite, args.trials, args.seed if args.seed is not None else 0)
    summary = {"schema_version": SCHEMA_VERSION, "suite": args.suite, "trials": args.trials,
               "seed": args.seed or 0,
               "suites": {k: [p.to_dict() for p in v] for k, v in results.items()}}
    ok = True
    for suite, props in results.items():
        for p in props:
            ok &= p.ok
            print(f"{'PASS' if p.ok else 'FAIL'} {suite}.{p.name}: {p.passes}/{p.trials} "
                  f"worst={p.worst:.3e} tol={p.tolerance:.1e}")
            for ce in p.counterexamples:
                print(f"    counterexample: {json.dumps(to_jsonable(ce), sort_keys=True)}")
    summary["ok"] = ok
    if args.out:
        _write_text(Path(args.out), dumps(summary))
    return EXIT_OK if ok else EXIT_CHECK


def registry_listing() -> list[dict]:
    return [{"name": e.name, "description": e.description, "required": list(e.required),
             "parameters": e.defaults} for e in REGISTRY.values()]


def cmd_list(args) -> int:
    entries = registry_listing()
    if args.format == "json":
        sys.stdout.write(dumps(entries))
    else:
        width = max(len(e["name"]) for e in entries)
        for e in entries:
            req = ", ".join(e["required"]) or "-"
            print(f"{e['name']:<{width}}  {e['description']}  (parameters: {req})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modalqm", description="Density-matrix ontology and conditional-probability laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write its report")
    run.add_argument("--scenario")
    run.add_argument("--config", help="JSON object with name, parameters, tolerances, seed")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"report path (default: ${OUT_ENV} or the current directory)")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--tolerance-scale", type=float, default=1.0)
    run.set_defaults(func=cmd_run)

    ver = sub.add_parser("verify", help="run randomized property suites")
    ver.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--seed", type=int)
    ver.add_argument("--out")
    ver.set_defaults(func=cmd_verify)

    lst = sub.add_parser("list", help="list registered scenarios")
    lst.add_argument("--format", choices=("text", "json"), default="text")
    lst.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "tolerance_scale", 1.0) <= 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
