"""``nfl-lab`` command line.

    nfl-lab run CONFIG
    nfl-lab verify-all [--size small]
    nfl-lab list-experiments
    nfl-lab schema
    nfl-lab <kind> [--config CONFIG] [--set key=value ...]

Global flags go before the subcommand.  The exit status is 0 iff every
check passed; 2 means the config was rejected before anything ran.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from pathlib import Path

import yaml

from ..core import EnumerationTooLarge
from ..specs import SpecError
from .config import KINDS, SCHEMA_VERSION, ConfigError, load_config, resolve_config, schema_document
from .experiments import run_experiment
from .report import write_report

log = logging.getLogger("nfl_lab")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2

DESCRIPTIONS = {
    "nfl_sum_sweep": "sum over all f of E(Phi|f,m,A) for several algorithms; must not depend on A",
    "inner_product": "P(phi|m,A) directly and as sum_f P(f) D(f;phi) under uniform and Dirichlet priors",
    "prior_mc": "flat-Dirichlet Monte Carlo average of prior-weighted performance",
    "supervised_nfl": "off-training-set error given d under the uniform target prior, per learner",
    "cv_vs_anticv": "cross-validation against anti-cross-validation over a candidate set",
    "conditioning_contrast": "whole-space cost per target against off-training cost given m",
    "meta_induction": "majority and anti-majority predicting which search algorithm wins",
    "mco_benchmark": "CV-scheduled Monte Carlo optimization against fixed temperatures",
}

# canned configs for verify-all; "small" runs in seconds
VERIFY_SUITE = {
    "small": [
        {"experiment": "nfl_sum_sweep", "space": {"x_size": 4, "y_size": 2}, "m": [1, 2, 3, 4], "measures": ["min", "mean"],
         "algorithms": ["enumerate", "random(seed=7)", "hill_descend(start=0)", "hill_ascend(start=0)", "random_mixture(seeds=8)"]},
        {"experiment": "inner_product", "space": {"x_size": 4, "y_size": 2}, "m": 2, "seed": 1, "dirichlet_priors": 5,
         "algorithms": ["enumerate", "random(seed=7)", "hill_descend(start=0)"]},
        {"experiment": "prior_mc", "space": {"x_size": 4, "y_size": 2}, "m": 2, "seed": 2, "n_samples": 2000,
         "algorithms": ["enumerate", "hill_descend(start=0)", "hill_ascend(start=3)"]},
        {"experiment": "supervised_nfl", "space": {"x_size": 4, "y_size": 2}, "m": 2,
         "learners": ["majority", "anti_majority", "constant(0)", "nearest_neighbor", "uniform"]},
        {"experiment": "cv_vs_anticv", "space": {"x_size": 4, "y_size": 2}, "m": 3,
         "candidates": ["constant(0)", "constant(1)", "majority"]},
        {"experiment": "conditioning_contrast", "space": {"x_size": 4, "y_size": 2}, "m": 3},
        {"experiment": "meta_induction"},
        {"experiment": "mco_benchmark", "seed": 0, "space": {"x_size": 32, "y_size": 8}, "n_seeds": 30, "m": 8},
    ],
}


def _parse_assignment(text: str):
    if "=" not in text:
        raise ConfigError(text, "--set expects key=value")
    key, value = text.split("=", 1)
    return key.strip(), yaml.safe_load(value)


def _apply_override(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node = cfg
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(key, "cannot set a key inside a non-mapping value")
    node[parts[-1]] = value


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("NFL_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError("NFL_LAB_THREADS", f"must be an integer, got {env!r}") from None
    return 1


def prepare(raw: dict, args) -> dict:
    raw = copy.deepcopy(raw)
    raw.setdefault("schema_version", SCHEMA_VERSION)
    if args.arithmetic:
        raw["arithmetic"] = args.arithmetic
    if args.out_dir:
        raw.setdefault("output", {})["dir"] = args.out_dir
    return resolve_config(raw)


def execute(cfg: dict, workers: int, quiet: bool = False) -> bool:
    """Run one resolved config, write its report and print a check summary."""
    try:
        report = run_experiment(cfg, workers)
    except (EnumerationTooLarge, SpecError) as exc:
        raise ConfigError("", str(exc)) from None
    paths = write_report(report, cfg["output"]["dir"], cfg["output"]["name"])
    if not quiet:
        for c in report.checks:
            print(f"{'PASS' if c['pass'] else 'FAIL'}  {cfg['name']}: {c['name']}")
        print(f"report: {paths['report']}")
    return report.passed


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nfl-lab", description="No Free Lunch verification laboratory")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: $NFL_LAB_THREADS or 1)")
    p.add_argument("--arithmetic", choices=["rational", "float"], default=None, help="override the config's arithmetic mode")
    p.add_argument("--out-dir", default=None, help="override the config's output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("config", type=Path)

    va = sub.add_parser("verify-all", help="run the canned suite of theorem checks")
    va.add_argument("--size", choices=sorted(VERIFY_SUITE), default="small")

    sub.add_parser("list-experiments", help="list experiment kinds")
    sub.add_parser("schema", help="print the config schema document")

    for kind in KINDS:
        k = sub.add_parser(kind, help=DESCRIPTIONS[kind])
        k.add_argument("--config", type=Path, default=None, help="base config (the experiment key may be omitted)")
        k.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key; dotted keys reach into mappings; values are YAML")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        workers = _threads(args)
        if args.command == "list-experiments":
            for kind in KINDS:
                print(f"{kind:24s} {DESCRIPTIONS[kind]}")
            return EXIT_OK
        if args.command == "schema":
            print(json.dumps(schema_document(), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "verify-all":
            ok = True
            for i, raw in enumerate(VERIFY_SUITE[args.size]):
                raw = dict(raw, name=f"verify-{i:02d}-{raw['experiment']}")
                if not args.out_dir:
                    raw["output"] = {"dir": "nfl-lab-verify"}
                log.info("running %s", raw["name"])
                ok &= execute(prepare(raw, args), workers)
            print("ALL CHECKS PASSED" if ok else "SOME CHECKS FAILED")
            return EXIT_OK if ok else EXIT_CHECK_FAILED
        if args.command == "run":
            raw = load_config(args.config)
        else:
            raw = load_config(args.config) if args.config else {}
            if raw.get("experiment", args.command) != args.command:
                raise ConfigError("experiment", f"config is for {raw['experiment']!r}, not {args.command!r}")
            raw["experiment"] = args.command
            for item in args.overrides:
                _apply_override(raw, *_parse_assignment(item))
        return EXIT_OK if execute(prepare(raw, args), workers) else EXIT_CHECK_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
